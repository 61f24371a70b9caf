//! Deterministic synthetic generator for multi-cell radio measurement traces
//! with ground-truth handover events.
//!
//! A scenario is a set of cell sites, UE tracks and a radio environment.
//! Every UE produces one measurement sample per second: quantized RSRP, RSRQ
//! and SINR for the serving cell and the three strongest neighbors, plus a
//! flag marking the exact tick a handover executes. Handovers follow an
//! A3-style rule: a neighbor's reported RSRP must exceed the serving cell's
//! by `ho_margin_db` continuously for `ho_time_to_trigger_s` before the
//! switch happens on the following tick.

mod generator;
mod mobility;
mod propagation;
mod trace_io;

pub use generator::{generate_trace, generate_trace_detailed, TickInternals};
pub use propagation::{
    compute_rsrq, link_budget, pathloss_db, CellLink, LinkBudget, ReportedMetrics,
    ShadowingTrack, MIN_DISTANCE_M, REF_PATHLOSS_DB,
};
pub use trace_io::{read_trace, write_trace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// UE tracks may not leave the cell bounding box padded by this much.
pub const ARENA_PADDING_M: f64 = 1500.0;

/// Maximum allowed UE speed, m/s.
pub const MAX_SPEED_MPS: f64 = 40.0;

/// A base station site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub cell_id: String,
    /// Planar position in meters.
    pub position: [f64; 2],
    pub tx_power_dbm: f64,
    /// Resource blocks per channel bandwidth (the N of the RSRQ relation).
    pub bandwidth_rbs: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityKind {
    Linear,
    Circular,
    RandomWaypoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: [f64; 2],
    pub speed_mps: f64,
}

/// A UE's movement description; one position is produced per 1 s tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeTrack {
    pub ue_id: String,
    pub waypoints: Vec<Waypoint>,
    pub mobility_kind: MobilityKind,
}

/// Radio environment and handover-judgment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioEnv {
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    pub shadowing_corr_distance_m: f64,
    pub noise_floor_dbm: f64,
    pub ho_margin_db: f64,
    pub ho_time_to_trigger_s: f64,
    pub seed: u64,
}

impl Default for RadioEnv {
    fn default() -> Self {
        Self {
            pathloss_exponent: 4.0,
            shadowing_sigma_db: 3.5,
            shadowing_corr_distance_m: 25.0,
            noise_floor_dbm: -98.0,
            ho_margin_db: 3.0,
            ho_time_to_trigger_s: 2.0,
            seed: 42,
        }
    }
}

/// One neighbor slot: strongest non-serving cells by reported RSRP,
/// descending. Absent slots keep sentinel floor metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborReading {
    pub cell: Option<String>,
    pub metrics: ReportedMetrics,
}

impl NeighborReading {
    pub fn absent() -> Self {
        Self { cell: None, metrics: ReportedMetrics::sentinel() }
    }
}

/// One KPM-style measurement record: 1 s granularity, serving cell plus up
/// to three neighbors, and the handover execution flag.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSample {
    pub timestamp: u64,
    pub ue_id: String,
    pub serving_cell: String,
    pub serving: ReportedMetrics,
    pub neighbors: [NeighborReading; 3],
    pub handover: bool,
}

/// A complete simulation configuration; this is the scenario JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub cells: Vec<CellSite>,
    pub ues: Vec<UeTrack>,
    pub env: RadioEnv,
    pub duration_s: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Scenario("cell list is empty".into()));
        }
        if self.duration_s < 1 {
            return Err(Error::Scenario("duration must be at least 1 s".into()));
        }
        let mut cell_ids = std::collections::HashSet::new();
        for cell in &self.cells {
            if cell.cell_id.is_empty() || cell.cell_id.contains(',') {
                return Err(Error::Scenario(format!("invalid cell id {:?}", cell.cell_id)));
            }
            if !cell_ids.insert(cell.cell_id.as_str()) {
                return Err(Error::Scenario(format!("duplicate cell id {:?}", cell.cell_id)));
            }
            if !cell.tx_power_dbm.is_finite() || !cell.position.iter().all(|p| p.is_finite()) {
                return Err(Error::Scenario(format!("non-finite parameters for cell {:?}", cell.cell_id)));
            }
            if cell.bandwidth_rbs < 1 {
                return Err(Error::Scenario(format!("cell {:?} needs at least 1 RB", cell.cell_id)));
            }
        }
        let mut ue_ids = std::collections::HashSet::new();
        for ue in &self.ues {
            if ue.ue_id.is_empty() || ue.ue_id.contains(',') {
                return Err(Error::Scenario(format!("invalid ue id {:?}", ue.ue_id)));
            }
            if !ue_ids.insert(ue.ue_id.as_str()) {
                return Err(Error::Scenario(format!("duplicate ue id {:?}", ue.ue_id)));
            }
            if ue.waypoints.is_empty() {
                return Err(Error::Scenario(format!("ue {:?} has no waypoints", ue.ue_id)));
            }
            for w in &ue.waypoints {
                if !(0.0..=MAX_SPEED_MPS).contains(&w.speed_mps) {
                    return Err(Error::Scenario(format!(
                        "ue {:?} speed {} outside [0, {}] m/s",
                        ue.ue_id, w.speed_mps, MAX_SPEED_MPS
                    )));
                }
                if !w.position.iter().all(|p| p.is_finite()) {
                    return Err(Error::Scenario(format!("ue {:?} has a non-finite waypoint", ue.ue_id)));
                }
            }
        }
        let env = &self.env;
        if !(2.0..=5.0).contains(&env.pathloss_exponent) {
            return Err(Error::Scenario("pathloss exponent outside [2, 5]".into()));
        }
        if env.shadowing_sigma_db < 0.0
            || env.shadowing_corr_distance_m < 0.0
            || env.ho_margin_db < 0.0
            || env.ho_time_to_trigger_s < 0.0
        {
            return Err(Error::Scenario("negative environment parameter".into()));
        }
        if !env.noise_floor_dbm.is_finite() {
            return Err(Error::Scenario("non-finite noise floor".into()));
        }
        Ok(())
    }

    /// Arena bounds: cell bounding box padded by [`ARENA_PADDING_M`].
    pub fn arena(&self) -> (f64, f64, f64, f64) {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for cell in &self.cells {
            min_x = min_x.min(cell.position[0]);
            max_x = max_x.max(cell.position[0]);
            min_y = min_y.min(cell.position[1]);
            max_y = max_y.max(cell.position[1]);
        }
        (
            min_x - ARENA_PADDING_M,
            max_x + ARENA_PADDING_M,
            min_y - ARENA_PADDING_M,
            max_y + ARENA_PADDING_M,
        )
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(json)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The stock four-cell scenario: 40,000 samples (4 UEs x 10,000 s) with
    /// a handover flag rate tuned to land between 8% and 12%.
    pub fn default_four_cell() -> Self {
        let cells = vec![
            CellSite { cell_id: "cell-a".into(), position: [0.0, 0.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
            CellSite { cell_id: "cell-b".into(), position: [160.0, 0.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
            CellSite { cell_id: "cell-c".into(), position: [0.0, 160.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
            CellSite { cell_id: "cell-d".into(), position: [160.0, 160.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
        ];
        // Each UE patrols one quadrant: a long meandering stretch deep in
        // its home cell, then two quick laps around the four-cell junction
        // that cross every boundary in a burst before heading home again.
        let junction_loop = |ue_id: &str, flip_x: bool, flip_y: bool| -> UeTrack {
            let mirror = move |p: [f64; 2]| -> [f64; 2] {
                [
                    if flip_x { 160.0 - p[0] } else { p[0] },
                    if flip_y { 160.0 - p[1] } else { p[1] },
                ]
            };
            let home = [
                [20.0, 20.0],
                [12.0, 64.0],
                [44.0, 44.0],
                [12.0, 12.0],
                [64.0, 12.0],
            ];
            let lap = [[52.0, 52.0], [52.0, 108.0], [108.0, 108.0], [108.0, 52.0]];
            // Walking pace around the home cell, driving pace on the laps.
            let waypoints = home
                .iter()
                .map(|&p| (p, 6.0))
                .chain(lap.iter().chain(lap.iter()).map(|&p| (p, 12.0)))
                .map(|(p, speed_mps)| Waypoint { position: mirror(p), speed_mps })
                .collect();
            UeTrack { ue_id: ue_id.into(), waypoints, mobility_kind: MobilityKind::Circular }
        };
        let ues = vec![
            junction_loop("ue-0", false, false),
            junction_loop("ue-1", true, false),
            junction_loop("ue-2", false, true),
            junction_loop("ue-3", true, true),
        ];
        Self { cells, ues, env: RadioEnv::default(), duration_s: 10_000 }
    }
}
