use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cellsim::{Aabb, GarmentClass, WorldState, ZoneId};
use crate::grasp::{RobotId, RobotModel};
use crate::segmentation::{export_cloud, ColoredPointCloud};

/// JSON schema of [`TwinSnapshot`] documents.
pub const TWIN_SNAPSHOT_SCHEMA: &str = include_str!("../../schemas/twin_snapshot.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinRobot {
    pub id: RobotId,
    pub base_mm: [f64; 3],
    pub reach_max_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinZone {
    pub id: ZoneId,
    pub min_mm: [f64; 2],
    pub max_mm: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinBin {
    pub class: GarmentClass,
    pub min_mm: [f64; 2],
    pub max_mm: [f64; 2],
}

/// Segmented cloud of the inspection table, stored next to the snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudRef {
    pub path: String,
    pub points: usize,
}

/// Planning-scene view of the cell at one moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinSnapshot {
    pub tick: u64,
    pub robots: Vec<TwinRobot>,
    pub zones: Vec<TwinZone>,
    pub bins: Vec<TwinBin>,
    pub obstacles: Vec<Aabb>,
    /// `None` when nothing was segmented on the table.
    pub cloud: Option<CloudRef>,
}

impl TwinSnapshot {
    pub fn file_name(tick: u64) -> String {
        format!("snapshot_{tick:06}.json")
    }

    pub fn cloud_file_name(tick: u64) -> String {
        format!("cloud_{tick:06}.ply")
    }
}

/// Builds the snapshot document; the cloud reference names
/// `cloud_<tick>.ply` next to the snapshot file.
pub fn export_twin_snapshot(
    world: &WorldState,
    cloud: &ColoredPointCloud,
    obstacles: &[Aabb],
    robots: &[RobotModel],
    tick: u64,
) -> TwinSnapshot {
    let layout = &world.layout;
    TwinSnapshot {
        tick,
        robots: robots
            .iter()
            .map(|r| TwinRobot {
                id: r.id,
                base_mm: r.base_position_world,
                reach_max_mm: r.reach_max_mm,
            })
            .collect(),
        zones: layout
            .zones
            .iter()
            .map(|z| TwinZone {
                id: z.id,
                min_mm: z.rect_world.min,
                max_mm: z.rect_world.max,
            })
            .collect(),
        bins: layout
            .zone(ZoneId::C)
            .map(|z| {
                z.bins
                    .iter()
                    .map(|(class, r)| TwinBin {
                        class: *class,
                        min_mm: r.min,
                        max_mm: r.max,
                    })
                    .collect()
            })
            .unwrap_or_default(),
        obstacles: obstacles.to_vec(),
        cloud: (!cloud.is_empty()).then(|| CloudRef {
            path: TwinSnapshot::cloud_file_name(tick),
            points: cloud.len(),
        }),
    }
}

/// Writes the snapshot JSON (and its PLY, if any) into `dir`.
pub fn write_twin_snapshot(dir: &Path, snapshot: &TwinSnapshot, cloud: &ColoredPointCloud) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    if let Some(c) = &snapshot.cloud {
        export_cloud(cloud, &dir.join(&c.path))?;
    }
    let json = serde_json::to_vec_pretty(snapshot).map_err(std::io::Error::other)?;
    fs::write(dir.join(TwinSnapshot::file_name(snapshot.tick)), json)
}
