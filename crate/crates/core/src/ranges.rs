//! Reporting ranges and quantization for the radio measurement metrics.
//!
//! All emitted metrics live on fixed quantized grids: RSRP in 1 dB steps over
//! \[-140, -44\] dBm, RSRQ in 0.5 dB steps over \[-19.5, -3\] dB and SINR in
//! 0.5 dB steps over \[-20, 40\] dB. The same ranges double as the min-max
//! normalization constants for model features, so they are defined once here
//! and shared by the simulator, the dataset builder and the streaming service.

use serde::{Deserialize, Serialize};

/// One metric's reporting range and quantization step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

/// RSRP reporting range: -140..-44 dBm, 1 dB resolution.
pub const RSRP_RANGE: MetricRange = MetricRange { lo: -140.0, hi: -44.0, step: 1.0 };

/// RSRQ reporting range: -19.5..-3 dB, 0.5 dB resolution.
pub const RSRQ_RANGE: MetricRange = MetricRange { lo: -19.5, hi: -3.0, step: 0.5 };

/// SINR reporting range: -20..+40 dB, 0.5 dB resolution. Cells below the
/// -20 dB detection floor are reported with sentinel values instead.
pub const SINR_RANGE: MetricRange = MetricRange { lo: -20.0, hi: 40.0, step: 0.5 };

/// SINR below which a cell is considered undetectable.
pub const SINR_DETECTION_FLOOR_DB: f64 = -20.0;

impl MetricRange {
    /// Clamp to the range and round to the nearest step. `-0.0` is
    /// canonicalized to `+0.0` so serialized traces are stable.
    pub fn quantize(&self, value: f64) -> f64 {
        let clamped = value.clamp(self.lo, self.hi);
        (clamped / self.step).round() * self.step + 0.0
    }

    /// True when the value is inside the range and on the quantization grid.
    pub fn contains_quantized(&self, value: f64) -> bool {
        if !value.is_finite() || value < self.lo || value > self.hi {
            return false;
        }
        let steps = value / self.step;
        (steps - steps.round()).abs() < 1e-9
    }

    /// Min-max normalization onto \[0, 1\].
    pub fn normalize(&self, value: f64) -> f64 {
        (value - self.lo) / (self.hi - self.lo)
    }

    /// Inverse of [`normalize`](Self::normalize), snapped back onto the
    /// quantization grid so the round trip is exact for reported values.
    pub fn denormalize(&self, value: f64) -> f64 {
        self.quantize(self.lo + value * (self.hi - self.lo))
    }
}

/// Sentinel metrics reported for an undetectable cell (SINR under the
/// detection floor) or an absent neighbor slot: the floor of each range.
pub mod sentinel {
    pub const RSRP_DBM: f64 = -140.0;
    pub const RSRQ_DB: f64 = -19.5;
    pub const SINR_DB: f64 = -20.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rsrp_whole_db() {
        assert_eq!(RSRP_RANGE.quantize(-100.4), -100.0);
        assert_eq!(RSRP_RANGE.quantize(-100.6), -101.0);
        assert_eq!(RSRP_RANGE.quantize(-30.0), -44.0);
        assert_eq!(RSRP_RANGE.quantize(-200.0), -140.0);
    }

    #[test]
    fn quantize_half_db_grids() {
        assert_eq!(RSRQ_RANGE.quantize(-10.3), -10.5);
        assert_eq!(RSRQ_RANGE.quantize(-10.2), -10.0);
        assert_eq!(RSRQ_RANGE.quantize(0.0), -3.0);
        assert_eq!(SINR_RANGE.quantize(3.26), 3.5);
        assert_eq!(SINR_RANGE.quantize(55.0), 40.0);
    }

    #[test]
    fn no_negative_zero() {
        let q = SINR_RANGE.quantize(-0.1);
        assert_eq!(q.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn grid_membership() {
        assert!(RSRQ_RANGE.contains_quantized(-19.5));
        assert!(!RSRQ_RANGE.contains_quantized(-19.75));
        assert!(!RSRP_RANGE.contains_quantized(-30.0));
        assert!(RSRP_RANGE.contains_quantized(-44.0));
    }
}
