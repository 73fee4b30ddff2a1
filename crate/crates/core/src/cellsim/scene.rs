use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::class::GarmentClass;
use super::world::{CellLayout, Footprint, Item, ItemId, Location, SurfaceCell, WorldState, ZoneId};
use super::CellError;

/// What to throw into the basket.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub shirt: u32,
    pub sock: u32,
    pub trousers: u32,
    pub underwear: u32,
    /// Out-of-taxonomy garments.
    pub other: u32,
    /// Bottles, cans and similar rigid objects; also labelled `other`.
    pub foreign_objects: u32,
    /// Probability that an adjacent pair of shuffled garments is entangled.
    pub entangle_p: f64,
    /// Upper bound on the number of entangled pairs.
    pub max_entangled_pairs: Option<u32>,
    /// Total footprint area may be at most this multiple of the basket area.
    pub stacking_factor: Option<f64>,
}

pub const DEFAULT_STACKING_FACTOR: f64 = 3.0;

impl SceneSpec {
    pub fn total_items(&self) -> u32 {
        self.shirt + self.sock + self.trousers + self.underwear + self.other + self.foreign_objects
    }

    fn garment_counts(&self) -> [(GarmentClass, u32); 5] {
        [
            (GarmentClass::Shirt, self.shirt),
            (GarmentClass::Sock, self.sock),
            (GarmentClass::Trousers, self.trousers),
            (GarmentClass::Underwear, self.underwear),
            (GarmentClass::Other, self.other),
        ]
    }
}

/// Size ranges per kind in mm. `height` is the crumpled pile height in the
/// basket; `thickness` is the material pinched between the fingers.
struct Shape {
    w: (f64, f64),
    d: (f64, f64),
    height: (f64, f64),
    thickness: (f64, f64),
    rounded: bool,
}

fn shape_for(class: GarmentClass, foreign: bool) -> Shape {
    if foreign {
        return Shape {
            w: (50.0, 90.0),
            d: (50.0, 90.0),
            height: (40.0, 110.0),
            thickness: (40.0, 90.0),
            rounded: true,
        };
    }
    match class {
        GarmentClass::Shirt => Shape { w: (150.0, 190.0), d: (120.0, 150.0), height: (20.0, 40.0), thickness: (2.0, 6.0), rounded: false },
        GarmentClass::Sock => Shape { w: (60.0, 100.0), d: (30.0, 50.0), height: (10.0, 20.0), thickness: (3.0, 8.0), rounded: false },
        GarmentClass::Trousers => Shape { w: (180.0, 220.0), d: (100.0, 130.0), height: (25.0, 50.0), thickness: (3.0, 8.0), rounded: false },
        GarmentClass::Underwear => Shape { w: (90.0, 120.0), d: (70.0, 100.0), height: (10.0, 25.0), thickness: (2.0, 6.0), rounded: false },
        GarmentClass::Other | GarmentClass::Empty => Shape { w: (80.0, 160.0), d: (60.0, 120.0), height: (15.0, 35.0), thickness: (2.0, 8.0), rounded: true },
    }
}

/// Item colors stay clearly away from the table gray so background
/// subtraction sees them: at least one channel differs by 40 or more, and
/// per-cell jitter is at most 6.
fn pick_color(rng: &mut ChaCha8Rng, table: [u8; 3], rim: [u8; 3]) -> [u8; 3] {
    loop {
        let c = [rng.random::<u8>(), rng.random::<u8>(), rng.random::<u8>()];
        let far = c.iter().zip(table).any(|(&a, b)| (a as i32 - b as i32).abs() >= 40);
        let near_rim = c.iter().zip(rim).all(|(&a, b)| (a as i32 - b as i32).abs() <= 12);
        if far && !near_rim {
            return c;
        }
    }
}

fn make_footprint(rng: &mut ChaCha8Rng, shape: &Shape, cell_mm: f64, foreign: bool, base: [u8; 3]) -> (Footprint, f32) {
    let w_mm = rng.random_range(shape.w.0..=shape.w.1);
    let d_mm = rng.random_range(shape.d.0..=shape.d.1);
    let pile = rng.random_range(shape.height.0..=shape.height.1);
    let thickness = rng.random_range(shape.thickness.0..=shape.thickness.1) as f32;
    let w = ((w_mm / cell_mm).round() as u32).max(1);
    let h = ((d_mm / cell_mm).round() as u32).max(1);
    let mut cells = Vec::with_capacity((w * h) as usize);
    for j in 0..h {
        for i in 0..w {
            // normalized offset from the centre, in [-1, 1]
            let nx = (i as f64 + 0.5) / w as f64 * 2.0 - 1.0;
            let ny = (j as f64 + 0.5) / h as f64 * 2.0 - 1.0;
            let r2 = nx * nx + ny * ny;
            if shape.rounded && r2 > 1.0 {
                cells.push(None);
                continue;
            }
            let profile = if foreign {
                1.0
            } else {
                // crumpled fabric: highest in the middle
                0.7 + 0.3 * (1.0 - r2.min(2.0) / 2.0)
            };
            let jitter = |c: u8, rng: &mut ChaCha8Rng| -> u8 {
                (c as i32 + rng.random_range(-6..=6)).clamp(0, 255) as u8
            };
            let rgb = [jitter(base[0], rng), jitter(base[1], rng), jitter(base[2], rng)];
            cells.push(Some(SurfaceCell {
                height_mm: (pile * profile) as f32,
                support_mm: 0.0,
                rgb,
            }));
        }
    }
    (
        Footprint {
            origin: [0, 0],
            width: w,
            height: h,
            cells,
        },
        thickness,
    )
}

/// Drops a randomized basket load. Equal `(spec, seed)` give equal worlds.
pub fn spawn_scene(spec: &SceneSpec, seed: u64, layout: CellLayout) -> Result<WorldState, CellError> {
    if !(0.0..=1.0).contains(&spec.entangle_p) {
        return Err(CellError::InvalidScene(format!(
            "entangle_p {} outside [0, 1]",
            spec.entangle_p
        )));
    }
    layout.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell_mm = layout.cell_mm;
    let basket = layout.basket_rect_world;

    let mut kinds: Vec<(GarmentClass, bool)> = Vec::new();
    for (class, n) in spec.garment_counts() {
        kinds.extend(std::iter::repeat((class, false)).take(n as usize));
    }
    kinds.extend(std::iter::repeat((GarmentClass::Other, true)).take(spec.foreign_objects as usize));

    let mut items = Vec::with_capacity(kinds.len());
    for (k, (class, foreign)) in kinds.into_iter().enumerate() {
        let shape = shape_for(class, foreign);
        let base = pick_color(&mut rng, layout.table_rgb, layout.rim_rgb);
        let (mut footprint, thickness) = make_footprint(&mut rng, &shape, cell_mm, foreign, base);
        footprint.origin = [0, 0];
        items.push(Item {
            id: ItemId(k as u32),
            true_class: class,
            foreign,
            footprint,
            thickness_mm: thickness,
            entangled_with: None,
        });
    }

    let total_area: f64 = items
        .iter()
        .map(|i| i.footprint.area_cells() as f64 * cell_mm * cell_mm)
        .sum();
    let factor = spec.stacking_factor.unwrap_or(DEFAULT_STACKING_FACTOR);
    if total_area > basket.area() * factor {
        return Err(CellError::BasketOverfull {
            footprint_mm2: total_area,
            capacity_mm2: basket.area() * factor,
        });
    }

    items.shuffle(&mut rng);

    // drop items one by one; each rests on the surface left by the previous ones
    let mut surface: HashMap<(i32, i32), f32> = HashMap::new();
    for item in items.iter_mut() {
        let fp = &mut item.footprint;
        let lo_x = (basket.min[0] / cell_mm).ceil() as i32;
        let lo_y = (basket.min[1] / cell_mm).ceil() as i32;
        let hi_x = ((basket.max[0] / cell_mm).floor() as i32 - fp.width as i32).max(lo_x);
        let hi_y = ((basket.max[1] / cell_mm).floor() as i32 - fp.height as i32).max(lo_y);
        if fp.width as f64 * cell_mm > basket.width() || fp.height as f64 * cell_mm > basket.height() {
            return Err(CellError::InvalidScene(format!(
                "item {} larger than the basket",
                item.id
            )));
        }
        fp.origin = [rng.random_range(lo_x..=hi_x), rng.random_range(lo_y..=hi_y)];
        let width = fp.width as usize;
        for (k, cell) in fp.cells.iter_mut().enumerate() {
            if let Some(c) = cell.as_mut() {
                let key = (fp.origin[0] + (k % width) as i32, fp.origin[1] + (k / width) as i32);
                let below = surface.get(&key).copied().unwrap_or(0.0);
                c.support_mm = below;
                c.height_mm += below;
                surface.insert(key, c.height_mm);
            }
        }
    }

    // entanglement among garments only
    let mut garments: Vec<usize> = (0..items.len()).filter(|&k| !items[k].foreign).collect();
    garments.sort_by_key(|&k| items[k].id);
    garments.shuffle(&mut rng);
    let cap = spec.max_entangled_pairs.unwrap_or(u32::MAX);
    let mut pairs = 0;
    for pair in garments.chunks_exact(2) {
        if pairs >= cap {
            break;
        }
        if rng.random_bool(spec.entangle_p) {
            let (a, b) = (pair[0], pair[1]);
            items[a].entangled_with = Some(items[b].id);
            items[b].entangled_with = Some(items[a].id);
            pairs += 1;
        }
    }

    let item_zone: BTreeMap<ItemId, Location> = items
        .iter()
        .map(|i| (i.id, Location::Zone(ZoneId::A)))
        .collect();
    Ok(WorldState {
        layout,
        items,
        item_zone,
        rng_seed: seed,
        tick: 0,
    })
}

/// Number of entangled pairs (each link counted once).
pub fn entangled_pairs(world: &WorldState) -> usize {
    world
        .items
        .iter()
        .filter(|i| matches!(i.entangled_with, Some(p) if p > i.id))
        .count()
}
