use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::camera::{CameraId, CameraModel};
use super::class::GarmentClass;
use super::frame::RgbdFrame;
use super::geometry::Rect;
use super::CellError;

/// Bare table color.
pub const TABLE_RGB: [u8; 3] = [128, 128, 128];
/// Reserved color of the (transparent) basket rim, used to find the basket.
pub const RIM_RGB: [u8; 3] = [255, 0, 255];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl std::fmt::Display for ItemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "item-{:03}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZoneId {
    A,
    B,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub rect_world: Rect,
    /// Sorting bins; only zone C has them.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bins: BTreeMap<GarmentClass, Rect>,
}

/// Where an item currently is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Zone(ZoneId),
    /// A sorting bin inside zone C.
    Bin(GarmentClass),
    Gripped,
}

impl Location {
    pub fn zone(&self) -> Option<ZoneId> {
        match self {
            Location::Zone(z) => Some(*z),
            Location::Bin(_) => Some(ZoneId::C),
            Location::Gripped => None,
        }
    }
}

/// One grid cell of an item's top surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    /// Height of the top surface above the table.
    pub height_mm: f32,
    /// Height of whatever the item rests on at this cell (0 on the bare table).
    pub support_mm: f32,
    pub rgb: [u8; 3],
}

impl SurfaceCell {
    pub fn own_height(&self) -> f32 {
        self.height_mm - self.support_mm
    }
}

/// Rasterized item outline on the world grid. `cells` is row-major with
/// `width` columns along world x; `origin` is the grid index of cell (0, 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub origin: [i32; 2],
    pub width: u32,
    pub height: u32,
    pub cells: Vec<Option<SurfaceCell>>,
}

impl Footprint {
    pub fn area_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Occupied cells as `(grid x, grid y, cell)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, &SurfaceCell)> + '_ {
        let w = self.width as usize;
        self.cells.iter().enumerate().filter_map(move |(k, c)| {
            c.as_ref().map(|c| {
                (
                    self.origin[0] + (k % w) as i32,
                    self.origin[1] + (k / w) as i32,
                    c,
                )
            })
        })
    }

    pub fn cell_at(&self, gx: i32, gy: i32) -> Option<&SurfaceCell> {
        let i = gx - self.origin[0];
        let j = gy - self.origin[1];
        if i < 0 || j < 0 || i >= self.width as i32 || j >= self.height as i32 {
            return None;
        }
        self.cells[j as usize * self.width as usize + i as usize].as_ref()
    }

    /// Sum of own (unsupported) heights times cell count; proportional to volume.
    pub fn own_volume(&self) -> f64 {
        self.iter().map(|(_, _, c)| c.own_height() as f64).sum()
    }

    pub fn mean_own_height(&self) -> f64 {
        let n = self.area_cells();
        if n == 0 {
            0.0
        } else {
            self.own_volume() / n as f64
        }
    }

    pub fn max_height(&self) -> f32 {
        self.iter().map(|(_, _, c)| c.height_mm).fold(0.0, f32::max)
    }

    /// World rectangle covered by the footprint's bounding raster.
    pub fn rect(&self, cell_mm: f64) -> Rect {
        Rect::new(
            [self.origin[0] as f64 * cell_mm, self.origin[1] as f64 * cell_mm],
            [
                (self.origin[0] + self.width as i32) as f64 * cell_mm,
                (self.origin[1] + self.height as i32) as f64 * cell_mm,
            ],
        )
    }

    /// Drops the item's support so heights are its own profile.
    pub fn lift(&mut self) {
        for c in self.cells.iter_mut().flatten() {
            c.height_mm -= c.support_mm;
            c.support_mm = 0.0;
        }
    }

    /// Nearest-neighbour stretch along world x by `factor`, rescaling the own
    /// heights so that area x mean height is preserved.
    pub fn stretch_x(&mut self, factor: f64) {
        assert!(factor > 0.0, "stretch factor must be positive");
        let old_w = self.width as usize;
        let new_w = ((old_w as f64 * factor).round() as usize).max(1);
        if new_w == old_w {
            return;
        }
        let volume_before = self.own_volume();
        let mut cells = Vec::with_capacity(new_w * self.height as usize);
        for j in 0..self.height as usize {
            for i in 0..new_w {
                let src = (i * old_w) / new_w;
                cells.push(self.cells[j * old_w + src].map(|mut c| {
                    c.height_mm -= c.support_mm;
                    c.support_mm = 0.0;
                    c
                }));
            }
        }
        self.cells = cells;
        self.width = new_w as u32;
        let volume_after = self.own_volume();
        if volume_after > 0.0 {
            let scale = (volume_before / volume_after) as f32;
            for c in self.cells.iter_mut().flatten() {
                c.height_mm *= scale;
            }
        }
        // keep the stretch centred on the old footprint
        let grow = new_w as i32 - old_w as i32;
        self.origin[0] -= grow / 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub true_class: GarmentClass,
    /// Bottles, cans and similar non-textile objects (class `other`).
    #[serde(default)]
    pub foreign: bool,
    pub footprint: Footprint,
    pub thickness_mm: f32,
    pub entangled_with: Option<ItemId>,
}

/// Static geometry of the cell: world grid, zones, basket and cameras.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellLayout {
    pub cell_mm: f64,
    pub zones: Vec<Zone>,
    pub basket_rect_world: Rect,
    pub rim_width_mm: f64,
    pub cameras: Vec<CameraModel>,
    pub table_rgb: [u8; 3],
    pub rim_rgb: [u8; 3],
}

impl Default for CellLayout {
    fn default() -> Self {
        Self::standard()
    }
}

impl CellLayout {
    /// Desk-scale layout with the picking robot at the world origin: basket
    /// (zone A) in front, inspection table (B) to the left, sorting bins (C)
    /// towards the second robot.
    pub fn standard() -> Self {
        let mut bins = BTreeMap::new();
        let classes = GarmentClass::ITEM_CLASSES;
        for (k, class) in classes.into_iter().enumerate() {
            let col = (k % 2) as f64;
            let row = (k / 2) as f64;
            bins.insert(
                class,
                Rect::new(
                    [400.0 + 450.0 * col, -1000.0 + 300.0 * row],
                    [850.0 + 450.0 * col, -700.0 + 300.0 * row],
                ),
            );
        }
        Self {
            cell_mm: 4.0,
            zones: vec![
                Zone {
                    id: ZoneId::A,
                    rect_world: Rect::new([-450.0, 380.0], [450.0, 1020.0]),
                    bins: BTreeMap::new(),
                },
                Zone {
                    id: ZoneId::B,
                    rect_world: Rect::new([-1000.0, -300.0], [-400.0, 300.0]),
                    bins: BTreeMap::new(),
                },
                Zone {
                    id: ZoneId::C,
                    rect_world: Rect::new([400.0, -1000.0], [1300.0, -100.0]),
                    bins,
                },
            ],
            basket_rect_world: Rect::new([-300.0, 500.0], [300.0, 900.0]),
            rim_width_mm: 8.0,
            cameras: vec![
                CameraModel::overhead(CameraId::Cam1, [0.0, 700.0], 800, 640, 480, 525.0),
                CameraModel::overhead(CameraId::Cam2, [-700.0, 0.0], 800, 640, 480, 525.0),
            ],
            table_rgb: TABLE_RGB,
            rim_rgb: RIM_RGB,
        }
    }

    pub fn validate(&self) -> Result<(), CellError> {
        for cam in &self.cameras {
            cam.validate().map_err(CellError::InvalidLayout)?;
        }
        for (i, a) in self.zones.iter().enumerate() {
            for b in &self.zones[i + 1..] {
                if a.rect_world.intersects(&b.rect_world) {
                    return Err(CellError::InvalidLayout(format!(
                        "zones {:?} and {:?} overlap",
                        a.id, b.id
                    )));
                }
            }
        }
        if !(self.cell_mm > 0.0) {
            return Err(CellError::InvalidLayout("cell size must be positive".into()));
        }
        Ok(())
    }

    pub fn zone(&self, id: ZoneId) -> Option<&Zone> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn camera(&self, id: CameraId) -> Result<&CameraModel, CellError> {
        self.cameras
            .iter()
            .find(|c| c.id == id)
            .ok_or(CellError::UnknownCamera(id))
    }

    pub fn bin(&self, class: GarmentClass) -> Option<&Rect> {
        self.zone(ZoneId::C).and_then(|z| z.bins.get(&class))
    }

    pub fn grid_cell(&self, x: f64, y: f64) -> (i32, i32) {
        ((x / self.cell_mm).floor() as i32, (y / self.cell_mm).floor() as i32)
    }

    fn is_rim_cell(&self, gx: i32, gy: i32) -> bool {
        let c = [
            (gx as f64 + 0.5) * self.cell_mm,
            (gy as f64 + 0.5) * self.cell_mm,
        ];
        let outer = self.basket_rect_world.expand(self.rim_width_mm);
        outer.contains_point(c) && !self.basket_rect_world.contains_point(c)
    }
}

/// Target of a move: a zone or a bin, optionally at a specific table point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Destination {
    pub target: Location,
    pub center_mm: Option<[f64; 2]>,
}

impl Destination {
    pub fn zone(id: ZoneId) -> Self {
        Self {
            target: Location::Zone(id),
            center_mm: None,
        }
    }

    pub fn bin(class: GarmentClass) -> Self {
        Self {
            target: Location::Bin(class),
            center_mm: None,
        }
    }

    pub fn at(mut self, center: [f64; 2]) -> Self {
        self.center_mm = Some(center);
        self
    }
}

/// Optional post-render perturbation. Rendering is noise-free unless one is
/// supplied.
pub trait FrameNoise {
    fn perturb(&self, frame: &mut RgbdFrame);
}

/// Ground-truth simulated scene. `items` is in stacking order: later items
/// were dropped on top of earlier ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub layout: CellLayout,
    pub items: Vec<Item>,
    pub item_zone: BTreeMap<ItemId, Location>,
    pub rng_seed: u64,
    pub tick: u64,
}

#[derive(Clone, Copy)]
struct TopCell {
    height: f32,
    rgb: [u8; 3],
}

impl WorldState {
    pub fn empty(layout: CellLayout, seed: u64) -> Self {
        Self {
            layout,
            items: Vec::new(),
            item_zone: BTreeMap::new(),
            rng_seed: seed,
            tick: 0,
        }
    }

    pub fn item(&self, id: ItemId) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    pub(crate) fn item_mut(&mut self, id: ItemId) -> Result<&mut Item, CellError> {
        self.items
            .iter_mut()
            .find(|i| i.id == id)
            .ok_or(CellError::UnknownItem(id))
    }

    pub fn location(&self, id: ItemId) -> Option<Location> {
        self.item_zone.get(&id).copied()
    }

    pub fn items_in(&self, zone: ZoneId) -> Vec<ItemId> {
        self.items
            .iter()
            .filter(|i| self.location(i.id).and_then(|l| l.zone()) == Some(zone))
            .map(|i| i.id)
            .collect()
    }

    fn is_on_table(&self, id: ItemId) -> bool {
        !matches!(self.location(id), Some(Location::Gripped) | None)
    }

    /// Highest item surface at a grid cell; later stacking order wins ties.
    pub fn topmost_at_cell(&self, gx: i32, gy: i32) -> Option<(ItemId, f32)> {
        let mut best: Option<(ItemId, f32)> = None;
        for item in &self.items {
            if !self.is_on_table(item.id) {
                continue;
            }
            if let Some(c) = item.footprint.cell_at(gx, gy) {
                if best.map_or(true, |(_, h)| c.height_mm >= h) {
                    best = Some((item.id, c.height_mm));
                }
            }
        }
        best
    }

    /// Item whose top surface is seen through pixel `(u, v)`.
    pub fn item_at_pixel(&self, camera: &CameraModel, u: u32, v: u32) -> Option<ItemId> {
        let p = camera.table_point(u, v);
        let (gx, gy) = self.layout.grid_cell(p.x, p.y);
        self.topmost_at_cell(gx, gy).map(|(id, _)| id)
    }

    fn surface_height(&self, gx: i32, gy: i32, exclude: ItemId) -> f32 {
        self.items
            .iter()
            .filter(|i| i.id != exclude && self.is_on_table(i.id))
            .filter_map(|i| i.footprint.cell_at(gx, gy).map(|c| c.height_mm))
            .fold(0.0, f32::max)
    }

    /// Marks an item as held by the gripper; its profile loses its support.
    pub fn grip(&mut self, id: ItemId) -> Result<(), CellError> {
        self.item_mut(id)?.footprint.lift();
        self.item_zone.insert(id, Location::Gripped);
        self.tick += 1;
        Ok(())
    }

    /// Translates an item to `dest` and lets it settle on whatever is already
    /// there. The footprint is clamped to lie inside the destination rectangle.
    pub fn move_item(&mut self, id: ItemId, dest: Destination) -> Result<(), CellError> {
        let target_rect = match dest.target {
            Location::Zone(z) => {
                self.layout
                    .zone(z)
                    .ok_or(CellError::UnknownDestination(dest.target))?
                    .rect_world
            }
            Location::Bin(class) => *self
                .layout
                .bin(class)
                .ok_or(CellError::UnknownDestination(dest.target))?,
            Location::Gripped => return self.grip(id),
        };
        let cell_mm = self.layout.cell_mm;
        let center = dest.center_mm.unwrap_or_else(|| target_rect.center());

        let item = self.item_mut(id)?;
        let fp = &mut item.footprint;
        let w = fp.width as i32;
        let h = fp.height as i32;
        let lo_x = (target_rect.min[0] / cell_mm).ceil() as i32;
        let lo_y = (target_rect.min[1] / cell_mm).ceil() as i32;
        let hi_x = (target_rect.max[0] / cell_mm).floor() as i32 - w;
        let hi_y = (target_rect.max[1] / cell_mm).floor() as i32 - h;
        if hi_x < lo_x || hi_y < lo_y {
            return Err(CellError::DoesNotFit {
                item: id,
                target: dest.target,
            });
        }
        let ox = ((center[0] / cell_mm) - w as f64 / 2.0).round() as i32;
        let oy = ((center[1] / cell_mm) - h as f64 / 2.0).round() as i32;
        fp.lift();
        fp.origin = [ox.clamp(lo_x, hi_x), oy.clamp(lo_y, hi_y)];

        // settle
        self.item_zone.insert(id, dest.target);
        let cells: Vec<(usize, f32)> = {
            let item = self.item(id).expect("item exists");
            let fp = &item.footprint;
            let wi = fp.width as usize;
            fp.cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_some())
                .map(|(k, _)| {
                    let gx = fp.origin[0] + (k % wi) as i32;
                    let gy = fp.origin[1] + (k / wi) as i32;
                    (k, self.surface_height(gx, gy, id))
                })
                .collect()
        };
        let item = self.item_mut(id)?;
        for (k, support) in cells {
            if let Some(c) = item.footprint.cells[k].as_mut() {
                c.support_mm = support;
                c.height_mm += support;
            }
        }
        // the moved item now lies on top of the pile
        let pos = self.items.iter().position(|i| i.id == id).expect("item exists");
        let moved = self.items.remove(pos);
        self.items.push(moved);
        self.tick += 1;
        Ok(())
    }

    /// Breaks an entanglement link in both directions.
    pub fn untangle(&mut self, id: ItemId) {
        let partner = self.item(id).and_then(|i| i.entangled_with);
        if let Some(p) = partner {
            if let Ok(i) = self.item_mut(p) {
                i.entangled_with = None;
            }
        }
        if let Ok(i) = self.item_mut(id) {
            i.entangled_with = None;
        }
    }

    pub fn render_camera(&self, camera_id: CameraId) -> Result<RgbdFrame, CellError> {
        self.render_camera_with(camera_id, None)
    }

    /// Top-down RGB-D rendering: each pixel looks up the grid cell under its
    /// table-plane ray; depth is the table depth minus the highest surface
    /// there, color that of the topmost item (or rim, or table).
    pub fn render_camera_with(
        &self,
        camera_id: CameraId,
        noise: Option<&dyn FrameNoise>,
    ) -> Result<RgbdFrame, CellError> {
        let cam = self.layout.camera(camera_id)?;
        let layout = &self.layout;

        // world grid window under the camera
        let corners = [
            cam.table_point(0, 0),
            cam.table_point(cam.width - 1, 0),
            cam.table_point(0, cam.height - 1),
            cam.table_point(cam.width - 1, cam.height - 1),
        ];
        let (mut gx0, mut gy0, mut gx1, mut gy1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for p in corners {
            let (gx, gy) = layout.grid_cell(p.x, p.y);
            gx0 = gx0.min(gx);
            gy0 = gy0.min(gy);
            gx1 = gx1.max(gx);
            gy1 = gy1.max(gy);
        }
        let gw = (gx1 - gx0 + 1) as usize;
        let gh = (gy1 - gy0 + 1) as usize;
        let mut top: Vec<Option<TopCell>> = vec![None; gw * gh];
        let slot = |gx: i32, gy: i32| -> Option<usize> {
            if gx < gx0 || gy < gy0 || gx > gx1 || gy > gy1 {
                None
            } else {
                Some((gy - gy0) as usize * gw + (gx - gx0) as usize)
            }
        };

        for gy in gy0..=gy1 {
            for gx in gx0..=gx1 {
                if layout.is_rim_cell(gx, gy) {
                    top[slot(gx, gy).expect("in window")] = Some(TopCell {
                        height: 0.0,
                        rgb: layout.rim_rgb,
                    });
                }
            }
        }
        for item in &self.items {
            if !self.is_on_table(item.id) {
                continue;
            }
            for (gx, gy, c) in item.footprint.iter() {
                if let Some(k) = slot(gx, gy) {
                    if top[k].map_or(true, |t| c.height_mm >= t.height) {
                        top[k] = Some(TopCell {
                            height: c.height_mm,
                            rgb: c.rgb,
                        });
                    }
                }
            }
        }

        let table = cam.table_depth_mm;
        let mut frame = RgbdFrame::filled(cam.id, cam.width, cam.height, layout.table_rgb, table);
        frame.timestamp = self.tick;
        for v in 0..cam.height {
            for u in 0..cam.width {
                let p = cam.table_point(u, v);
                let (gx, gy) = layout.grid_cell(p.x, p.y);
                if let Some(t) = slot(gx, gy).and_then(|k| top[k]) {
                    let i = frame.index(u, v);
                    frame.rgb[i] = t.rgb;
                    frame.depth_mm[i] = depth_below(table, t.height);
                }
            }
        }
        if let Some(n) = noise {
            n.perturb(&mut frame);
        }
        Ok(frame)
    }

    /// Total number of items per location kind, for conservation checks.
    pub fn census(&self) -> HashMap<Location, usize> {
        let mut out = HashMap::new();
        for loc in self.item_zone.values() {
            *out.entry(*loc).or_insert(0) += 1;
        }
        out
    }
}

/// Depth reading of a surface `height_mm` above a table at `table_mm`.
pub fn depth_below(table_mm: u16, height_mm: f32) -> u16 {
    let d = (table_mm as f32 - height_mm).round();
    d.clamp(1.0, table_mm as f32) as u16
}
