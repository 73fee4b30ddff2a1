//! Deterministic 2.5D model of the sorting cell: items piled in a basket,
//! zones, overhead RGB-D cameras and the dynamic basket region of interest.
//!
//! The world is a top-down grid of `cell_mm` square cells. Every item carries
//! a rasterized footprint whose cells store the absolute height of the item's
//! top surface, so a camera pixel only has to find the highest cell under it.

mod camera;
mod class;
mod frame;
mod geometry;
mod scene;
mod world;

pub use camera::{pixel_to_world, world_to_pixel, CameraId, CameraModel};
pub use class::{GarmentClass, UnknownClass};
pub use frame::{apply_bounding_box, compute_basket_bbox, BoundingBox, RgbdFrame};
pub(crate) use frame::with_ext;
pub use geometry::{Aabb, Rect, RigidTransform};
pub use scene::{entangled_pairs, spawn_scene, SceneSpec, DEFAULT_STACKING_FACTOR};
pub use world::{
    depth_below, CellLayout, Destination, Footprint, FrameNoise, Item, ItemId, Location,
    SurfaceCell, WorldState, Zone, ZoneId, RIM_RGB, TABLE_RGB,
};

#[derive(Debug, thiserror::Error)]
pub enum CellError {
    #[error("basket absent: no rim pixels in frame")]
    BasketAbsent,
    #[error("expected a frame from {expected:?}, got {got:?}")]
    WrongCamera { expected: CameraId, got: CameraId },
    #[error("camera {0:?} is not part of the layout")]
    UnknownCamera(CameraId),
    #[error("unknown item {0}")]
    UnknownItem(ItemId),
    #[error("no such destination {0:?}")]
    UnknownDestination(Location),
    #[error("item {item} does not fit into {target:?}")]
    DoesNotFit { item: ItemId, target: Location },
    #[error("basket capacity exceeded: {footprint_mm2:.0} mm^2 of items for {capacity_mm2:.0} mm^2 of stacking capacity")]
    BasketOverfull { footprint_mm2: f64, capacity_mm2: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("malformed frame: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
