use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::geometry::{Rect, RigidTransform};
use super::frame::BoundingBox;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CameraId {
    Cam1,
    Cam2,
}

impl CameraId {
    pub fn as_str(self) -> &'static str {
        match self {
            CameraId::Cam1 => "cam1",
            CameraId::Cam2 => "cam2",
        }
    }
}

impl std::str::FromStr for CameraId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cam1" => Ok(CameraId::Cam1),
            "cam2" => Ok(CameraId::Cam2),
            other => Err(format!("unknown camera '{other}' (expected cam1 or cam2)")),
        }
    }
}

/// Pinhole camera with its world pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub id: CameraId,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub pose_world: RigidTransform,
    /// Depth reading of the bare table plane.
    pub table_depth_mm: u16,
}

impl CameraModel {
    /// Camera hovering `table_depth_mm` above `center`, principal point in
    /// the middle of the image.
    pub fn overhead(
        id: CameraId,
        center: [f64; 2],
        table_depth_mm: u16,
        width: u32,
        height: u32,
        focal_px: f64,
    ) -> Self {
        Self {
            id,
            fx: focal_px,
            fy: focal_px,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            width,
            height,
            pose_world: RigidTransform::looking_down(center[0], center[1], table_depth_mm as f64),
            table_depth_mm,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(format!("{:?}: focal lengths must be positive", self.id));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64 && self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(format!("{:?}: principal point outside the image", self.id));
        }
        if self.table_depth_mm == 0 {
            return Err(format!("{:?}: table depth must be positive", self.id));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Table-plane point seen through the centre of pixel `(u, v)`.
    pub fn table_point(&self, u: u32, v: u32) -> Point3<f64> {
        pixel_to_world([u as f64, v as f64], self.table_depth_mm as f64, self)
    }

    /// Pixel-space box covering a table rectangle, clipped to the image.
    /// `None` when the rectangle is entirely out of view.
    pub fn bbox_of_table_rect(&self, rect: &Rect) -> Option<BoundingBox> {
        let corners = [
            [rect.min[0], rect.min[1]],
            [rect.min[0], rect.max[1]],
            [rect.max[0], rect.min[1]],
            [rect.max[0], rect.max[1]],
        ];
        let (mut u0, mut v0, mut u1, mut v1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for c in corners {
            let (px, _) = world_to_pixel(&Point3::new(c[0], c[1], 0.0), self);
            u0 = u0.min(px[0]);
            v0 = v0.min(px[1]);
            u1 = u1.max(px[0]);
            v1 = v1.max(px[1]);
        }
        let w = self.width as f64 - 1.0;
        let h = self.height as f64 - 1.0;
        if u1 < 0.0 || v1 < 0.0 || u0 > w || v0 > h {
            return None;
        }
        let bbox = BoundingBox {
            u_min: u0.max(0.0).ceil() as u32,
            v_min: v0.max(0.0).ceil() as u32,
            u_max: u1.min(w).floor() as u32,
            v_max: v1.min(h).floor() as u32,
        };
        (bbox.u_min < bbox.u_max && bbox.v_min < bbox.v_max).then_some(bbox)
    }
}

/// Pinhole back-projection of a pixel at a given depth (distance along the
/// optical axis) into world coordinates.
pub fn pixel_to_world(pixel: [f64; 2], depth_mm: f64, camera: &CameraModel) -> Point3<f64> {
    let x = (pixel[0] - camera.cx) * depth_mm / camera.fx;
    let y = (pixel[1] - camera.cy) * depth_mm / camera.fy;
    camera.pose_world.apply(&Point3::new(x, y, depth_mm))
}

/// Forward projection; returns the (sub-)pixel and the depth along the axis.
pub fn world_to_pixel(point: &Point3<f64>, camera: &CameraModel) -> ([f64; 2], f64) {
    let p = camera.pose_world.apply_inverse(point);
    let u = camera.fx * p.x / p.z + camera.cx;
    let v = camera.fy * p.y / p.z + camera.cy;
    ([u, v], p.z)
}
