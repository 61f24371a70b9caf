//! Trace generation: walks every UE through the scenario, computes the link
//! budget per tick and applies the A3 handover rule.

use crate::error::{Error, Result};

use super::mobility::TrackWalker;
use super::propagation::{link_budget, pathloss_db, LinkBudget, ReportedMetrics, ShadowingTrack};
use super::{MeasurementSample, NeighborReading, Scenario};

/// Unquantized per-tick link state, exposed for consistency checks.
pub struct TickInternals {
    pub ue_index: usize,
    pub timestamp: u64,
    /// (raw RSRP dBm, raw SINR dB, detectable) per cell, scenario order.
    pub links: Vec<(f64, f64, bool)>,
    pub rssi_dbm: f64,
}

/// Deterministic trace synthesis: one sample per UE per second, ticks
/// numbered from 1. Identical scenarios produce identical traces.
pub fn generate_trace(scenario: &Scenario) -> Result<Vec<MeasurementSample>> {
    Ok(generate_trace_detailed(scenario)?.0)
}

/// Like [`generate_trace`] but also returns the raw link quantities each
/// sample was derived from.
pub fn generate_trace_detailed(scenario: &Scenario) -> Result<(Vec<MeasurementSample>, Vec<TickInternals>)> {
    scenario.validate()?;
    let arena = scenario.arena();
    let n_cells = scenario.cells.len();
    let ttt_ticks = ttt_ticks(scenario.env.ho_time_to_trigger_s);

    let mut samples = Vec::with_capacity(scenario.ues.len() * scenario.duration_s as usize);
    let mut internals = Vec::with_capacity(samples.capacity());

    for (ue_idx, ue) in scenario.ues.iter().enumerate() {
        let mut walker = TrackWalker::new(ue, scenario.env.seed, ue_idx as u64);
        let mut shadows: Vec<ShadowingTrack> = (0..n_cells)
            .map(|cell_idx| {
                ShadowingTrack::new(
                    scenario.env.shadowing_sigma_db,
                    scenario.env.shadowing_corr_distance_m,
                    scenario.env.seed,
                    ue_idx as u64,
                    cell_idx as u64,
                )
            })
            .collect();

        let mut position = ue.waypoints[0].position;
        let mut serving: usize = 0;
        let mut streaks = vec![0u64; n_cells];

        for tick in 0..scenario.duration_s {
            let moved = if tick == 0 {
                0.0
            } else {
                let next = walker.step(1.0);
                let moved = dist(position, next);
                position = next;
                moved
            };
            if position[0] < arena.0 || position[0] > arena.1 || position[1] < arena.2 || position[1] > arena.3 {
                return Err(Error::Scenario(format!(
                    "ue {:?} left the arena at tick {} (position {:.1}, {:.1})",
                    ue.ue_id,
                    tick + 1,
                    position[0],
                    position[1]
                )));
            }

            let rx_dbm: Vec<f64> = scenario
                .cells
                .iter()
                .enumerate()
                .map(|(cell_idx, cell)| {
                    let d = dist(position, cell.position);
                    let shadow = if tick == 0 {
                        shadows[cell_idx].value()
                    } else {
                        shadows[cell_idx].advance(moved)
                    };
                    cell.tx_power_dbm - pathloss_db(d, scenario.env.pathloss_exponent) - shadow
                })
                .collect();
            let rbs: Vec<u32> = scenario.cells.iter().map(|c| c.bandwidth_rbs).collect();
            let budget = link_budget(&rx_dbm, &rbs, scenario.env.noise_floor_dbm);
            let reports: Vec<ReportedMetrics> = (0..n_cells)
                .map(|i| budget.report(i, scenario.cells[i].bandwidth_rbs))
                .collect::<Result<_>>()?;

            let mut handover = false;
            if tick == 0 {
                serving = strongest_cell(&reports);
            } else if let Some(target) = completed_streak(&streaks, &reports, serving, ttt_ticks) {
                serving = target;
                handover = true;
                streaks.iter_mut().for_each(|s| *s = 0);
            }
            update_streaks(&mut streaks, &reports, serving, scenario.env.ho_margin_db);

            samples.push(build_sample(scenario, ue_idx, tick + 1, serving, &reports, handover));
            internals.push(TickInternals {
                ue_index: ue_idx,
                timestamp: tick + 1,
                links: budget_links(&budget),
                rssi_dbm: budget.rssi_dbm,
            });
        }
    }
    Ok((samples, internals))
}

/// Time-to-trigger in whole ticks; sub-second values round, and anything
/// below one tick still requires a single full tick at 1 s sampling.
fn ttt_ticks(ttt_s: f64) -> u64 {
    (ttt_s.round() as u64).max(1)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn strongest_cell(reports: &[ReportedMetrics]) -> usize {
    let mut best = 0;
    for (idx, report) in reports.iter().enumerate().skip(1) {
        if report.rsrp > reports[best].rsrp {
            best = idx;
        }
    }
    best
}

/// A handover fires once a neighbor's streak covers the time-to-trigger.
/// Among completed candidates the strongest (then lowest-index) wins.
fn completed_streak(streaks: &[u64], reports: &[ReportedMetrics], serving: usize, ttt: u64) -> Option<usize> {
    let mut winner: Option<usize> = None;
    for (idx, &streak) in streaks.iter().enumerate() {
        if idx == serving || streak < ttt {
            continue;
        }
        match winner {
            Some(w) if reports[idx].rsrp <= reports[w].rsrp => {}
            _ => winner = Some(idx),
        }
    }
    winner
}

fn update_streaks(streaks: &mut [u64], reports: &[ReportedMetrics], serving: usize, margin_db: f64) {
    for idx in 0..streaks.len() {
        if idx == serving {
            streaks[idx] = 0;
        } else if reports[idx].rsrp > reports[serving].rsrp + margin_db {
            streaks[idx] += 1;
        } else {
            streaks[idx] = 0;
        }
    }
}

fn build_sample(
    scenario: &Scenario,
    ue_idx: usize,
    timestamp: u64,
    serving: usize,
    reports: &[ReportedMetrics],
    handover: bool,
) -> MeasurementSample {
    // Neighbors: strongest non-serving cells by reported RSRP, descending;
    // ties break toward the lower cell index.
    let mut order: Vec<usize> = (0..reports.len()).filter(|&i| i != serving).collect();
    order.sort_by(|&a, &b| {
        reports[b]
            .rsrp
            .partial_cmp(&reports[a].rsrp)
            .expect("reported rsrp is finite")
            .then(a.cmp(&b))
    });
    let mut neighbors = [NeighborReading::absent(), NeighborReading::absent(), NeighborReading::absent()];
    for (slot, &cell_idx) in order.iter().take(3).enumerate() {
        neighbors[slot] = NeighborReading {
            cell: Some(scenario.cells[cell_idx].cell_id.clone()),
            metrics: reports[cell_idx],
        };
    }
    MeasurementSample {
        timestamp,
        ue_id: scenario.ues[ue_idx].ue_id.clone(),
        serving_cell: scenario.cells[serving].cell_id.clone(),
        serving: reports[serving],
        neighbors,
        handover,
    }
}

fn budget_links(budget: &LinkBudget) -> Vec<(f64, f64, bool)> {
    budget
        .cells
        .iter()
        .map(|c| (c.rsrp_raw_dbm, c.sinr_raw_db, c.detectable))
        .collect()
}
