use std::fs;
use std::io::{BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};

use image::{ImageBuffer, ImageFormat, Luma, Rgb};
use serde::{Deserialize, Serialize};

use super::camera::{CameraId, CameraModel};
use super::CellError;

/// Registered color + depth raster from one camera, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbdFrame {
    pub camera_id: CameraId,
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[u8; 3]>,
    /// Distance along the optical axis, millimeters.
    pub depth_mm: Vec<u16>,
    pub timestamp: u64,
}

impl RgbdFrame {
    /// Uniform frame, e.g. a bare table.
    pub fn filled(camera_id: CameraId, width: u32, height: u32, rgb: [u8; 3], depth_mm: u16) -> Self {
        let n = width as usize * height as usize;
        Self {
            camera_id,
            width,
            height,
            rgb: vec![rgb; n],
            depth_mm: vec![depth_mm; n],
            timestamp: 0,
        }
    }

    #[inline]
    pub fn index(&self, u: u32, v: u32) -> usize {
        v as usize * self.width as usize + u as usize
    }

    pub fn rgb_at(&self, u: u32, v: u32) -> [u8; 3] {
        self.rgb[self.index(u, v)]
    }

    pub fn depth_at(&self, u: u32, v: u32) -> u16 {
        self.depth_mm[self.index(u, v)]
    }

    pub fn full_bbox(&self) -> BoundingBox {
        BoundingBox {
            u_min: 0,
            v_min: 0,
            u_max: self.width - 1,
            v_max: self.height - 1,
        }
    }

    pub fn same_shape(&self, other: &RgbdFrame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let flat: Vec<u8> = self.rgb.iter().flatten().copied().collect();
        let img: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(self.width, self.height, flat)
            .expect("raster length matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).expect("in-memory png encoding");
        out.into_inner()
    }

    /// Writes `<stem>.png` (color), `<stem>.pgm` (16-bit depth, mm) and
    /// `<stem>.json` (camera id and timestamp).
    pub fn save(&self, stem: &Path) -> Result<(), CellError> {
        fs::write(with_ext(stem, "png"), self.encode_png())?;

        // binary PGM, maxval 65535, big-endian samples
        let mut pgm = BufWriter::new(fs::File::create(with_ext(stem, "pgm"))?);
        write!(pgm, "P5\n{} {}\n65535\n", self.width, self.height)?;
        for d in &self.depth_mm {
            pgm.write_all(&d.to_be_bytes())?;
        }
        pgm.flush()?;

        let meta = FrameMeta {
            camera_id: self.camera_id,
            timestamp: self.timestamp,
        };
        fs::write(with_ext(stem, "json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    /// Reads a frame written by [`RgbdFrame::save`]. The JSON sidecar is
    /// optional; without it the frame is attributed to Cam 2 at tick 0.
    pub fn load(stem: &Path) -> Result<Self, CellError> {
        let rgb_img = image::open(with_ext(stem, "png"))?.to_rgb8();
        let depth_img: ImageBuffer<Luma<u16>, Vec<u16>> =
            image::open(with_ext(stem, "pgm"))?.to_luma16();
        if rgb_img.dimensions() != depth_img.dimensions() {
            return Err(CellError::Format(format!(
                "{}: color {:?} and depth {:?} dimensions differ",
                stem.display(),
                rgb_img.dimensions(),
                depth_img.dimensions()
            )));
        }
        let meta_path = with_ext(stem, "json");
        let meta = if meta_path.exists() {
            serde_json::from_slice(&fs::read(meta_path)?)?
        } else {
            FrameMeta {
                camera_id: CameraId::Cam2,
                timestamp: 0,
            }
        };
        let (width, height) = rgb_img.dimensions();
        Ok(Self {
            camera_id: meta.camera_id,
            width,
            height,
            rgb: rgb_img.pixels().map(|p| p.0).collect(),
            depth_mm: depth_img.into_raw(),
            timestamp: meta.timestamp,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct FrameMeta {
    camera_id: CameraId,
    timestamp: u64,
}

/// Appends an extension to a stem without clobbering dots in the stem.
pub(crate) fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Inclusive pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub u_min: u32,
    pub v_min: u32,
    pub u_max: u32,
    pub v_max: u32,
}

impl BoundingBox {
    pub fn contains(&self, u: u32, v: u32) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    pub fn is_valid_for(&self, width: u32, height: u32) -> bool {
        self.u_min < self.u_max && self.v_min < self.v_max && self.u_max < width && self.v_max < height
    }
}

/// Smallest box around all pixels painted with the basket rim key, grown by
/// `margin` pixels and clipped to the frame.
pub fn compute_basket_bbox(
    frame: &RgbdFrame,
    basket_color_key: [u8; 3],
    margin: u32,
) -> Result<BoundingBox, CellError> {
    if frame.camera_id != CameraId::Cam1 {
        return Err(CellError::WrongCamera {
            expected: CameraId::Cam1,
            got: frame.camera_id,
        });
    }
    let mut found: Option<BoundingBox> = None;
    for v in 0..frame.height {
        for u in 0..frame.width {
            if frame.rgb_at(u, v) != basket_color_key {
                continue;
            }
            let b = found.get_or_insert(BoundingBox {
                u_min: u,
                v_min: v,
                u_max: u,
                v_max: v,
            });
            b.u_min = b.u_min.min(u);
            b.u_max = b.u_max.max(u);
            b.v_min = b.v_min.min(v);
            b.v_max = b.v_max.max(v);
        }
    }
    let b = found.ok_or(CellError::BasketAbsent)?;
    let grown = BoundingBox {
        u_min: b.u_min.saturating_sub(margin),
        v_min: b.v_min.saturating_sub(margin),
        u_max: b.u_max.saturating_add(margin).min(frame.width - 1),
        v_max: b.v_max.saturating_add(margin).min(frame.height - 1),
    };
    if !grown.is_valid_for(frame.width, frame.height) {
        return Err(CellError::BasketAbsent);
    }
    Ok(grown)
}

/// Blanks everything outside `bbox` to the bare-table backdrop.
pub fn apply_bounding_box(
    frame: &RgbdFrame,
    bbox: &BoundingBox,
    camera: &CameraModel,
    table_rgb: [u8; 3],
) -> RgbdFrame {
    let mut out = frame.clone();
    for v in 0..frame.height {
        for u in 0..frame.width {
            if !bbox.contains(u, v) {
                let i = frame.index(u, v);
                out.rgb[i] = table_rgb;
                out.depth_mm[i] = camera.table_depth_mm;
            }
        }
    }
    out
}
