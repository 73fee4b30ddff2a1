use rand::Rng;
use serde::{Deserialize, Serialize};

use super::predict::GraspCandidate;
use super::reach::RobotModel;
use super::tactile::{TactileBaseline, TactileConfig, TactileReading};
use super::GraspError;
use crate::cellsim::{CameraModel, Destination, ItemId, Location, WorldState, ZoneId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickOutcome {
    pub grasped_item: Option<ItemId>,
    pub reading: TactileReading,
    /// Items lifted along with the grasped one (entangled partners).
    pub bycatch: Vec<ItemId>,
}

/// Drives the gripper onto `candidate`. The failure draw is taken from `rng`
/// on every call so the stream stays aligned whatever the outcome.
pub fn execute_pick(
    world: &mut WorldState,
    robot: &RobotModel,
    candidate: &GraspCandidate,
    camera: &CameraModel,
    tactile: &TactileConfig,
    baseline: &TactileBaseline,
    rng: &mut impl Rng,
) -> Result<PickOutcome, GraspError> {
    let slipped = rng.random::<f64>() < robot.pick_failure_rate;
    let target = world.item_at_pixel(camera, candidate.pixel[0], candidate.pixel[1]);
    let (Some(id), false) = (target, slipped) else {
        return Ok(PickOutcome {
            grasped_item: None,
            reading: tactile.synthesize(baseline, None),
            bycatch: Vec::new(),
        });
    };

    world.grip(id)?;
    let item = world.item(id).expect("gripped item exists");
    let thickness = item.thickness_mm;
    let mut bycatch = Vec::new();
    if let Some(partner) = item.entangled_with {
        if matches!(world.location(partner), Some(Location::Zone(_))) {
            world.grip(partner)?;
            bycatch.push(partner);
        }
    }
    Ok(PickOutcome {
        grasped_item: Some(id),
        reading: tactile.synthesize(baseline, Some(thickness)),
        bycatch,
    })
}

/// Shakes the lifted garment so by-catch falls back into the basket, then
/// drags it over the table edge, which flattens it: its footprint grows by
/// `spread_factor` while area x mean height stays constant.
pub fn shake_and_spread(
    world: &mut WorldState,
    _robot: &RobotModel,
    outcome: &PickOutcome,
    spread_factor: f64,
    rng: &mut impl Rng,
) -> Result<(), GraspError> {
    let id = outcome.grasped_item.ok_or(GraspError::NothingGrasped)?;

    // shake: by-catch drops above the basket
    for &other in &outcome.bycatch {
        world.untangle(other);
        let basket = world.layout.basket_rect_world;
        let cell = world.layout.cell_mm;
        let fp = &world.item(other).ok_or(GraspError::Cell(crate::cellsim::CellError::UnknownItem(other)))?.footprint;
        let half_w = fp.width as f64 * cell / 2.0;
        let half_h = fp.height as f64 * cell / 2.0;
        let cx = sample_span(rng, basket.min[0] + half_w, basket.max[0] - half_w);
        let cy = sample_span(rng, basket.min[1] + half_h, basket.max[1] - half_h);
        world.move_item(other, Destination::zone(ZoneId::A).at([cx, cy]))?;
    }
    world.untangle(id);

    // edge spread
    if (spread_factor - 1.0).abs() > f64::EPSILON {
        let item = world.item_mut(id)?;
        item.footprint.stretch_x(spread_factor);
    }
    world.tick += 1;
    Ok(())
}

fn sample_span(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        (lo + hi) / 2.0
    }
}
