use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::cellsim::{pixel_to_world, BoundingBox, CameraModel, RgbdFrame};

/// Grasp proposal in pixel and world coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pixel: [u32; 2],
    pub depth_mm: u16,
    pub world_pose: GraspPose,
    /// Normalized region prominence in [0, 1].
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspPose {
    pub position: [f64; 3],
    pub yaw_rad: f64,
}

/// Tuning of the height-prominence predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspParams {
    /// Pixels must stand strictly higher than this above the table.
    pub min_height_mm: f64,
    /// The grasp region is the connected patch around the peak that stays
    /// above this fraction of the peak height.
    pub band_fraction: f64,
    /// Peak height mapped to score 1.
    pub saturation_mm: f64,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            min_height_mm: 3.0,
            band_fraction: 0.5,
            saturation_mm: 100.0,
        }
    }
}

/// Deterministic stand-in for a learned grasp detector: picks the centroid of
/// the highest connected region inside `roi`.
pub fn predict_grasp(
    frame: &RgbdFrame,
    roi: &BoundingBox,
    camera: &CameraModel,
    params: &GraspParams,
) -> Option<GraspCandidate> {
    if !roi.is_valid_for(frame.width, frame.height) {
        return None;
    }
    let table = camera.table_depth_mm as f64;
    let height_at = |u: u32, v: u32| table - frame.depth_at(u, v) as f64;

    let mut peak: Option<(u32, u32, f64)> = None;
    for v in roi.v_min..=roi.v_max {
        for u in roi.u_min..=roi.u_max {
            let h = height_at(u, v);
            if h > params.min_height_mm && peak.map_or(true, |(_, _, p)| h > p) {
                peak = Some((u, v, h));
            }
        }
    }
    let (pu, pv, peak_h) = peak?;
    let floor = (peak_h * params.band_fraction).max(params.min_height_mm);
    let in_band = |u: u32, v: u32| roi.contains(u, v) && height_at(u, v) >= floor;

    // 4-connected flood fill from the peak
    let w = frame.width as usize;
    let mut seen = vec![false; frame.depth_mm.len()];
    let mut region: Vec<(u32, u32)> = Vec::new();
    let mut queue = VecDeque::from([(pu, pv)]);
    seen[pv as usize * w + pu as usize] = true;
    while let Some((u, v)) = queue.pop_front() {
        region.push((u, v));
        let neighbours = [
            (u.wrapping_sub(1), v),
            (u + 1, v),
            (u, v.wrapping_sub(1)),
            (u, v + 1),
        ];
        for (nu, nv) in neighbours {
            if nu >= frame.width || nv >= frame.height {
                continue;
            }
            let k = nv as usize * w + nu as usize;
            if !seen[k] && in_band(nu, nv) {
                seen[k] = true;
                queue.push_back((nu, nv));
            }
        }
    }
    region.sort_unstable_by_key(|&(u, v)| (v, u));

    let n = region.len() as f64;
    let mu = region.iter().map(|&(u, _)| u as f64).sum::<f64>() / n;
    let mv = region.iter().map(|&(_, v)| v as f64).sum::<f64>() / n;
    let target = (mu.round() as u32, mv.round() as u32);
    let pixel = if region.binary_search_by_key(&(target.1, target.0), |&(u, v)| (v, u)).is_ok() {
        target
    } else {
        // non-convex region: nearest member to the centroid
        *region
            .iter()
            .min_by(|a, b| {
                let da = (a.0 as f64 - mu).powi(2) + (a.1 as f64 - mv).powi(2);
                let db = (b.0 as f64 - mu).powi(2) + (b.1 as f64 - mv).powi(2);
                da.total_cmp(&db)
            })
            .expect("region contains the peak")
    };

    // principal axis from second central moments
    let (mut m20, mut m02, mut m11) = (0.0, 0.0, 0.0);
    for &(u, v) in &region {
        let du = u as f64 - mu;
        let dv = v as f64 - mv;
        m20 += du * du;
        m02 += dv * dv;
        m11 += du * dv;
    }
    let yaw_rad = 0.5 * (2.0 * m11).atan2(m20 - m02);

    let depth_mm = frame.depth_at(pixel.0, pixel.1);
    let p = pixel_to_world([pixel.0 as f64, pixel.1 as f64], depth_mm as f64, camera);
    Some(GraspCandidate {
        pixel: [pixel.0, pixel.1],
        depth_mm,
        world_pose: GraspPose {
            position: [p.x, p.y, p.z],
            yaw_rad,
        },
        score: (peak_h / params.saturation_mm).clamp(0.0, 1.0),
    })
}

/// Fast check whether anything is left on the inspection table.
pub fn quick_occupancy_check(
    frame: &RgbdFrame,
    zone_b_roi: &BoundingBox,
    camera: &CameraModel,
    params: &GraspParams,
) -> bool {
    predict_grasp(frame, zone_b_roi, camera, params).is_some()
}
