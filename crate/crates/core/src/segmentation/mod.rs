//! Background subtraction on the inspection-table camera.
//!
//! A baseline is the per-pixel median of a few empty-table frames. A pixel of
//! a fresh frame is foreground when its depth moved by more than the depth
//! threshold or any color channel moved by more than the color threshold;
//! both comparisons are strict. Foreground pixels are back-projected into a
//! colored point cloud in row-major order.

mod ply;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cellsim::{pixel_to_world, with_ext, CameraId, CameraModel, CellError, RgbdFrame};

pub use ply::export_cloud;

#[derive(Debug, thiserror::Error)]
pub enum SegmentationError {
    #[error("baseline needs at least one frame")]
    NoFrames,
    #[error("frames come from different cameras ({0:?} and {1:?})")]
    MixedCameras(CameraId, CameraId),
    #[error("frame is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch { want_w: u32, want_h: u32, got_w: u32, got_h: u32 },
    #[error("thresholds must be strictly positive")]
    InvalidThresholds,
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegBaseline {
    pub camera_id: CameraId,
    pub width: u32,
    pub height: u32,
    pub baseline_rgb: Vec<[u8; 3]>,
    pub baseline_depth_mm: Vec<u16>,
    pub frame_count_used: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegThresholds {
    pub depth_delta_mm: f64,
    pub rgb_delta: u8,
}

impl Default for SegThresholds {
    fn default() -> Self {
        Self {
            depth_delta_mm: 5.0,
            rgb_delta: 15,
        }
    }
}

impl SegThresholds {
    pub fn validate(&self) -> Result<(), SegmentationError> {
        if self.depth_delta_mm > 0.0 && self.rgb_delta > 0 {
            Ok(())
        } else {
            Err(SegmentationError::InvalidThresholds)
        }
    }

    /// Strict change test for one pixel against its baseline.
    #[inline]
    pub fn is_foreground(&self, depth: u16, rgb: [u8; 3], base_depth: u16, base_rgb: [u8; 3]) -> bool {
        (depth as f64 - base_depth as f64).abs() > self.depth_delta_mm
            || rgb
                .iter()
                .zip(base_rgb)
                .any(|(&c, b)| c.abs_diff(b) > self.rgb_delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub rgb: [u8; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ColoredPointCloud {
    pub points: Vec<CloudPoint>,
    pub source_tick: u64,
}

impl ColoredPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn lower_median<T: Ord + Copy>(values: &mut [T]) -> T {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Per-pixel (lower) median over a set of empty-table frames.
pub fn capture_baseline(frames: &[RgbdFrame]) -> Result<SegBaseline, SegmentationError> {
    let first = frames.first().ok_or(SegmentationError::NoFrames)?;
    for f in frames {
        if f.camera_id != first.camera_id {
            return Err(SegmentationError::MixedCameras(first.camera_id, f.camera_id));
        }
        if !f.same_shape(first) {
            return Err(SegmentationError::DimensionMismatch {
                want_w: first.width,
                want_h: first.height,
                got_w: f.width,
                got_h: f.height,
            });
        }
    }
    let n = first.depth_mm.len();
    let mut depth = Vec::with_capacity(n);
    let mut rgb = Vec::with_capacity(n);
    let mut scratch_d = vec![0u16; frames.len()];
    let mut scratch_c = vec![0u8; frames.len()];
    for i in 0..n {
        for (k, f) in frames.iter().enumerate() {
            scratch_d[k] = f.depth_mm[i];
        }
        depth.push(lower_median(&mut scratch_d));
        let mut px = [0u8; 3];
        for (ch, out) in px.iter_mut().enumerate() {
            for (k, f) in frames.iter().enumerate() {
                scratch_c[k] = f.rgb[i][ch];
            }
            *out = lower_median(&mut scratch_c);
        }
        rgb.push(px);
    }
    Ok(SegBaseline {
        camera_id: first.camera_id,
        width: first.width,
        height: first.height,
        baseline_rgb: rgb,
        baseline_depth_mm: depth,
        frame_count_used: frames.len() as u32,
    })
}

/// Foreground pixels of `frame` as world points, row-major.
pub fn segment(
    frame: &RgbdFrame,
    baseline: &SegBaseline,
    thr: &SegThresholds,
    camera: &CameraModel,
) -> Result<ColoredPointCloud, SegmentationError> {
    if frame.camera_id != baseline.camera_id {
        return Err(SegmentationError::MixedCameras(baseline.camera_id, frame.camera_id));
    }
    if frame.width != baseline.width || frame.height != baseline.height {
        return Err(SegmentationError::DimensionMismatch {
            want_w: baseline.width,
            want_h: baseline.height,
            got_w: frame.width,
            got_h: frame.height,
        });
    }
    let mut points = Vec::new();
    for v in 0..frame.height {
        for u in 0..frame.width {
            let i = frame.index(u, v);
            let (d, c) = (frame.depth_mm[i], frame.rgb[i]);
            if thr.is_foreground(d, c, baseline.baseline_depth_mm[i], baseline.baseline_rgb[i]) {
                let p = pixel_to_world([u as f64, v as f64], d as f64, camera);
                points.push(CloudPoint {
                    x: p.x as f32,
                    y: p.y as f32,
                    z: p.z as f32,
                    rgb: c,
                });
            }
        }
    }
    Ok(ColoredPointCloud {
        points,
        source_tick: frame.timestamp,
    })
}

#[derive(Serialize, Deserialize)]
struct BaselineMeta {
    camera_id: CameraId,
    timestamp: u64,
    frame_count_used: u32,
}

impl SegBaseline {
    pub fn as_frame(&self) -> RgbdFrame {
        RgbdFrame {
            camera_id: self.camera_id,
            width: self.width,
            height: self.height,
            rgb: self.baseline_rgb.clone(),
            depth_mm: self.baseline_depth_mm.clone(),
            timestamp: 0,
        }
    }

    /// Stores `baseline.{png,pgm,json}` in `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), SegmentationError> {
        fs::create_dir_all(dir)?;
        let stem = dir.join("baseline");
        self.as_frame().save(&stem)?;
        let meta = BaselineMeta {
            camera_id: self.camera_id,
            timestamp: 0,
            frame_count_used: self.frame_count_used,
        };
        fs::write(with_ext(&stem, "json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, SegmentationError> {
        let stem = dir.join("baseline");
        let frame = RgbdFrame::load(&stem)?;
        let meta: BaselineMeta = serde_json::from_slice(&fs::read(with_ext(&stem, "json"))?)?;
        Ok(Self {
            camera_id: meta.camera_id,
            width: frame.width,
            height: frame.height,
            baseline_rgb: frame.rgb,
            baseline_depth_mm: frame.depth_mm,
            frame_count_used: meta.frame_count_used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellsim::TABLE_RGB;

    fn cam() -> CameraModel {
        CameraModel::overhead(CameraId::Cam2, [-700.0, 0.0], 800, 32, 24, 40.0)
    }

    fn bare() -> RgbdFrame {
        RgbdFrame::filled(CameraId::Cam2, 32, 24, TABLE_RGB, 800)
    }

    #[test]
    fn single_frame_baseline_is_that_frame() {
        let mut f = bare();
        f.depth_mm[3] = 777;
        f.rgb[9] = [1, 2, 3];
        let b = capture_baseline(std::slice::from_ref(&f)).unwrap();
        assert_eq!(b.baseline_depth_mm, f.depth_mm);
        assert_eq!(b.baseline_rgb, f.rgb);
        assert_eq!(b.frame_count_used, 1);
    }

    #[test]
    fn median_of_three_and_lower_median_of_two() {
        let mut frames = vec![bare(), bare(), bare()];
        frames[2].depth_mm[0] = 799;
        frames[0].rgb[0] = [10, 200, 128];
        frames[1].rgb[0] = [20, 100, 128];
        let b = capture_baseline(&frames).unwrap();
        assert_eq!(b.baseline_depth_mm[0], 800);
        assert_eq!(b.baseline_rgb[0], [20, 128, 128]);

        let mut two = vec![bare(), bare()];
        two[0].depth_mm[0] = 790;
        assert_eq!(capture_baseline(&two).unwrap().baseline_depth_mm[0], 790);
    }

    #[test]
    fn baseline_errors() {
        assert!(matches!(capture_baseline(&[]), Err(SegmentationError::NoFrames)));
        let mut other = bare();
        other.camera_id = CameraId::Cam1;
        assert!(matches!(
            capture_baseline(&[bare(), other]),
            Err(SegmentationError::MixedCameras(..))
        ));
    }

    #[test]
    fn identical_frame_is_empty() {
        let f = bare();
        let b = capture_baseline(std::slice::from_ref(&f)).unwrap();
        assert!(segment(&f, &b, &SegThresholds::default(), &cam()).unwrap().is_empty());
    }

    #[test]
    fn thresholds_are_strict() {
        let b = capture_baseline(&[bare()]).unwrap();
        let thr = SegThresholds::default();
        let mut f = bare();
        f.depth_mm[0] = 795; // exactly 5 mm
        f.rgb[1] = [143, 113, 128]; // exactly 15 per channel
        assert!(segment(&f, &b, &thr, &cam()).unwrap().is_empty());
        f.depth_mm[0] = 794;
        f.rgb[1] = [144, 128, 128];
        let cloud = segment(&f, &b, &thr, &cam()).unwrap();
        assert_eq!(cloud.len(), 2);
        // row-major: pixel 0 before pixel 1
        assert_eq!(cloud.points[0].rgb, TABLE_RGB);
        assert_eq!(cloud.points[1].rgb, [144, 128, 128]);
        assert!((cloud.points[0].z - 6.0).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch() {
        let b = capture_baseline(&[bare()]).unwrap();
        let f = RgbdFrame::filled(CameraId::Cam2, 16, 24, TABLE_RGB, 800);
        assert!(matches!(
            segment(&f, &b, &SegThresholds::default(), &cam()),
            Err(SegmentationError::DimensionMismatch { .. })
        ));
        let mut other = bare();
        other.camera_id = CameraId::Cam1;
        assert!(matches!(
            segment(&other, &b, &SegThresholds::default(), &cam()),
            Err(SegmentationError::MixedCameras(CameraId::Cam2, CameraId::Cam1))
        ));
    }

    #[test]
    fn baseline_persists() {
        let dir = tempfile::tempdir().unwrap();
        let mut frames = vec![bare(), bare(), bare()];
        frames[1].depth_mm[4] = 700;
        let b = capture_baseline(&frames).unwrap();
        b.save(dir.path()).unwrap();
        assert_eq!(SegBaseline::load(dir.path()).unwrap(), b);
    }
}
