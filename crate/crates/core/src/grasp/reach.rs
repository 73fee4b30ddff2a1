use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::cellsim::Aabb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RobotId {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub id: RobotId,
    pub base_position_world: [f64; 3],
    pub reach_min_mm: f64,
    pub reach_max_mm: f64,
    /// Probability that a pick attempt loses the item.
    pub pick_failure_rate: f64,
}

impl RobotModel {
    /// Picking arm at the world origin.
    pub fn alice() -> Self {
        Self {
            id: RobotId::Alice,
            base_position_world: [0.0, 0.0, 0.0],
            reach_min_mm: 150.0,
            reach_max_mm: 1000.0,
            pick_failure_rate: 0.0,
        }
    }

    /// Sorting arm, 1.4 m along +x from Alice.
    pub fn bob() -> Self {
        Self {
            id: RobotId::Bob,
            base_position_world: [1400.0, 0.0, 0.0],
            ..Self::alice()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 <= self.reach_min_mm && self.reach_min_mm < self.reach_max_mm) {
            return Err(format!("{:?}: reach band must satisfy 0 <= min < max", self.id));
        }
        if !(0.0..=1.0).contains(&self.pick_failure_rate) {
            return Err(format!("{:?}: failure rate outside [0, 1]", self.id));
        }
        Ok(())
    }

    pub fn base(&self) -> Point3<f64> {
        Point3::from(self.base_position_world)
    }
}

/// Reach-band test plus a straight-line collision check of the segment from
/// the robot base to the target against the twin's obstacle boxes.
pub fn check_reachability(pose: &Point3<f64>, robot: &RobotModel, obstacles: &[Aabb]) -> bool {
    let base = robot.base();
    let dist = (pose - base).norm();
    if dist < robot.reach_min_mm || dist > robot.reach_max_mm {
        return false;
    }
    !obstacles.iter().any(|b| segment_hits_box(&base, pose, b))
}

/// Slab test of the closed segment `a -> b` against a closed box.
pub fn segment_hits_box(a: &Point3<f64>, b: &Point3<f64>, bx: &Aabb) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..3 {
        if d[i].abs() < 1e-12 {
            if a[i] < bx.min[i] || a[i] > bx.max[i] {
                return false;
            }
            continue;
        }
        let inv = 1.0 / d[i];
        let mut ta = (bx.min[i] - a[i]) * inv;
        let mut tb = (bx.max[i] - a[i]) * inv;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}
