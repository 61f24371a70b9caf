//! Link budget: log-distance pathloss, spatially correlated shadowing and
//! the derived RSRP / RSRQ / SINR measurements.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ranges::{RSRP_RANGE, RSRQ_RANGE, SINR_DETECTION_FLOOR_DB, SINR_RANGE};
use crate::seeding;

/// Reference pathloss at 1 m (free-space loss for a 3.9 GHz carrier).
pub const REF_PATHLOSS_DB: f64 = 44.0;

/// Distances below this are clamped before the log-distance term.
pub const MIN_DISTANCE_M: f64 = 1.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Log-distance pathloss: `PL = PL0 + 10·α·log10(d / d0)` with `d0 = 1 m`.
pub fn pathloss_db(distance_m: f64, exponent: f64) -> f64 {
    REF_PATHLOSS_DB + 10.0 * exponent * (distance_m.max(MIN_DISTANCE_M)).log10()
}

/// RSRQ per `RSRQ = N · RSRP / RSSI`, evaluated in linear power units and
/// reported on the quantized \[-19.5, -3\] dB grid.
pub fn compute_rsrq(rsrp_dbm: f64, rssi_dbm: f64, n_rbs: u32) -> Result<f64> {
    if !rsrp_dbm.is_finite() || !rssi_dbm.is_finite() {
        return Err(Error::NonFinite("compute_rsrq input".into()));
    }
    if n_rbs < 1 {
        return Err(Error::Scenario("n_rbs must be >= 1".into()));
    }
    let ratio = n_rbs as f64 * dbm_to_mw(rsrp_dbm) / dbm_to_mw(rssi_dbm);
    Ok(RSRQ_RANGE.quantize(10.0 * ratio.log10()))
}

/// One cell's unquantized link quantities at a single tick.
#[derive(Debug, Clone, Copy)]
pub struct CellLink {
    /// Per-resource-element received power before quantization, dBm.
    pub rsrp_raw_dbm: f64,
    /// Signal to interference-plus-noise, dB, before quantization.
    pub sinr_raw_db: f64,
    /// True when the cell clears the SINR detection floor.
    pub detectable: bool,
}

/// Quantized measurement triple as reported by the UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportedMetrics {
    pub rsrp: f64,
    pub rsrq: f64,
    pub sinr: f64,
}

impl ReportedMetrics {
    pub fn sentinel() -> Self {
        use crate::ranges::sentinel;
        Self { rsrp: sentinel::RSRP_DBM, rsrq: sentinel::RSRQ_DB, sinr: sentinel::SINR_DB }
    }
}

/// Full link budget for one UE position against every cell.
pub struct LinkBudget {
    /// Per-cell raw quantities, indexed like the scenario cell list.
    pub cells: Vec<CellLink>,
    /// Total received power over the measured bandwidth, dBm.
    pub rssi_dbm: f64,
}

/// Computes the link budget for one tick.
///
/// `rx_wideband_dbm[i]` is cell i's total received power (tx power minus
/// pathloss minus shadowing). RSSI sums every cell plus the thermal noise
/// floor; SINR for cell i treats all other cells as interference; RSRP
/// spreads the cell's power over its `12·N` resource elements.
pub fn link_budget(rx_wideband_dbm: &[f64], bandwidth_rbs: &[u32], noise_floor_dbm: f64) -> LinkBudget {
    let rx_mw: Vec<f64> = rx_wideband_dbm.iter().map(|&dbm| dbm_to_mw(dbm)).collect();
    let noise_mw = dbm_to_mw(noise_floor_dbm);
    let total_mw: f64 = rx_mw.iter().sum::<f64>() + noise_mw;
    let cells = rx_mw
        .iter()
        .zip(bandwidth_rbs)
        .map(|(&mw, &n_rbs)| {
            let interference_mw = total_mw - mw;
            let sinr_raw_db = mw_to_dbm(mw / interference_mw);
            let rsrp_raw_dbm = mw_to_dbm(mw) - 10.0 * (12.0 * n_rbs as f64).log10();
            CellLink {
                rsrp_raw_dbm,
                sinr_raw_db,
                detectable: sinr_raw_db >= SINR_DETECTION_FLOOR_DB,
            }
        })
        .collect();
    LinkBudget { cells, rssi_dbm: mw_to_dbm(total_mw) }
}

impl LinkBudget {
    /// Quantized report for cell `idx`, with sentinel floors for
    /// undetectable cells.
    pub fn report(&self, idx: usize, n_rbs: u32) -> Result<ReportedMetrics> {
        let link = &self.cells[idx];
        if !link.detectable {
            return Ok(ReportedMetrics::sentinel());
        }
        Ok(ReportedMetrics {
            rsrp: RSRP_RANGE.quantize(link.rsrp_raw_dbm),
            rsrq: compute_rsrq(link.rsrp_raw_dbm, self.rssi_dbm, n_rbs)?,
            sinr: SINR_RANGE.quantize(link.sinr_raw_db),
        })
    }
}

/// Log-normal shadowing, Gauss-Markov correlated over traveled distance:
/// `x' = ρ·x + sqrt(1-ρ²)·N(0,σ)` with `ρ = exp(-Δd / d_corr)`.
pub struct ShadowingTrack {
    value_db: f64,
    sigma_db: f64,
    corr_distance_m: f64,
    rng: ChaCha8Rng,
}

impl ShadowingTrack {
    pub fn new(sigma_db: f64, corr_distance_m: f64, base_seed: u64, ue_index: u64, cell_index: u64) -> Self {
        let mut rng = seeding::rng(seeding::derive_seed(
            base_seed,
            0x7368_6164 ^ ue_index,
            cell_index,
        ));
        let value_db = if sigma_db > 0.0 {
            Normal::new(0.0, sigma_db).expect("finite sigma").sample(&mut rng)
        } else {
            0.0
        };
        Self { value_db, sigma_db, corr_distance_m, rng }
    }

    /// Advance by `moved_m` meters of UE travel and return the new value.
    pub fn advance(&mut self, moved_m: f64) -> f64 {
        if self.sigma_db <= 0.0 {
            return 0.0;
        }
        let rho = if self.corr_distance_m > 0.0 {
            (-moved_m / self.corr_distance_m).exp()
        } else {
            0.0
        };
        let innovation: f64 = Normal::new(0.0, self.sigma_db).expect("finite sigma").sample(&mut self.rng);
        self.value_db = rho * self.value_db + (1.0 - rho * rho).sqrt() * innovation;
        self.value_db
    }

    pub fn value(&self) -> f64 {
        self.value_db
    }
}
