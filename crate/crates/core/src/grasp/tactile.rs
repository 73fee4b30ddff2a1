use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GraspError;

/// Per-channel force offsets with the gripper open and empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TactileBaseline {
    pub normal: Vec<f64>,
    pub shear: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TactileReading {
    pub normal: Vec<f64>,
    pub shear: Vec<f64>,
}

impl TactileBaseline {
    pub fn channels(&self) -> usize {
        self.normal.len()
    }

    /// The reading of an empty gripper: the spacers keep the fingertips
    /// apart, so nothing but the offsets shows up.
    pub fn as_reading(&self) -> TactileReading {
        TactileReading {
            normal: self.normal.clone(),
            shear: self.shear.clone(),
        }
    }
}

/// Linear force model used to synthesize fingertip readings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TactileConfig {
    pub channels: usize,
    /// Normal force increase per millimeter of grasped material.
    pub gain_per_mm: f64,
    /// Smallest normal-force increase that counts as a successful grasp.
    pub min_delta: f64,
}

impl Default for TactileConfig {
    fn default() -> Self {
        Self {
            channels: 4,
            gain_per_mm: 0.5,
            min_delta: 1.0,
        }
    }
}

impl TactileConfig {
    /// Simulated baseline capture: small random offsets per channel.
    pub fn record_baseline(&self, rng: &mut impl Rng) -> TactileBaseline {
        let n = self.channels.max(1);
        TactileBaseline {
            normal: (0..n).map(|_| rng.random_range(0.05..0.3)).collect(),
            shear: (0..n).map(|_| rng.random_range(-0.05..0.05)).collect(),
        }
    }

    /// Reading with `thickness_mm` of material between the fingers, or the
    /// empty-gripper reading for `None`.
    pub fn synthesize(&self, baseline: &TactileBaseline, thickness_mm: Option<f32>) -> TactileReading {
        let delta = thickness_mm.map_or(0.0, |t| self.gain_per_mm * t as f64);
        TactileReading {
            normal: baseline.normal.iter().map(|b| b + delta).collect(),
            shear: baseline.shear.clone(),
        }
    }
}

/// Grasp success: some channel's normal force rose by at least `min_delta`.
pub fn verify_grasp(
    reading: &TactileReading,
    baseline: &TactileBaseline,
    min_delta: f64,
) -> Result<bool, GraspError> {
    if reading.normal.len() != baseline.normal.len() || reading.shear.len() != baseline.shear.len() {
        return Err(GraspError::ChannelMismatch {
            reading: reading.normal.len(),
            baseline: baseline.normal.len(),
        });
    }
    let max_delta = reading
        .normal
        .iter()
        .zip(&baseline.normal)
        .map(|(r, b)| r - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(max_delta >= min_delta)
}
