//! Online inference over NDJSON measurement streams.
//!
//! Traces are replayed as KPM-indication-style messages (one JSON object per
//! line, fields matching the trace CSV columns plus a per-UE sequence
//! number). The serving side keeps the last `k` indications per UE and emits
//! one purchase decision per indication once the window is full, bit-exactly
//! matching what the batch pipeline computes on the same data.

mod replay;
mod serve;

pub use replay::{replay, ReplayOptions, ReplayStats, Sink, WriteSink};
pub use serve::{serve, DecisionRecord, ServeEngine, ServeStats};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiosim::{MeasurementSample, NeighborReading, ReportedMetrics};
use crate::ranges::{MetricRange, RSRP_RANGE, RSRQ_RANGE, SINR_RANGE};

/// One measurement indication: the trace CSV payload plus a sequence number
/// that is strictly increasing per UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicationMessage {
    pub seq: u64,
    pub ts: u64,
    pub ue_id: String,
    pub serving_cell: String,
    pub s_rsrp: f64,
    pub s_rsrq: f64,
    pub s_sinr: f64,
    pub n1_cell: Option<String>,
    pub n1_rsrp: f64,
    pub n1_rsrq: f64,
    pub n1_sinr: f64,
    pub n2_cell: Option<String>,
    pub n2_rsrp: f64,
    pub n2_rsrq: f64,
    pub n2_sinr: f64,
    pub n3_cell: Option<String>,
    pub n3_rsrp: f64,
    pub n3_rsrq: f64,
    pub n3_sinr: f64,
    /// Ground-truth handover flag carried along for offline scoring.
    pub ho: u8,
}

impl IndicationMessage {
    pub fn from_sample(seq: u64, sample: &MeasurementSample) -> Self {
        let n = |i: usize| &sample.neighbors[i];
        Self {
            seq,
            ts: sample.timestamp,
            ue_id: sample.ue_id.clone(),
            serving_cell: sample.serving_cell.clone(),
            s_rsrp: sample.serving.rsrp,
            s_rsrq: sample.serving.rsrq,
            s_sinr: sample.serving.sinr,
            n1_cell: n(0).cell.clone(),
            n1_rsrp: n(0).metrics.rsrp,
            n1_rsrq: n(0).metrics.rsrq,
            n1_sinr: n(0).metrics.sinr,
            n2_cell: n(1).cell.clone(),
            n2_rsrp: n(1).metrics.rsrp,
            n2_rsrq: n(1).metrics.rsrq,
            n2_sinr: n(1).metrics.sinr,
            n3_cell: n(2).cell.clone(),
            n3_rsrp: n(2).metrics.rsrp,
            n3_rsrq: n(2).metrics.rsrq,
            n3_sinr: n(2).metrics.sinr,
            ho: sample.handover as u8,
        }
    }

    /// Schema validation and conversion back to a measurement sample.
    pub fn to_sample(&self) -> Result<MeasurementSample> {
        if self.ue_id.is_empty() || self.serving_cell.is_empty() {
            return Err(Error::Stream("empty ue_id or serving_cell".into()));
        }
        if self.ho > 1 {
            return Err(Error::Stream(format!("ho must be 0 or 1, found {}", self.ho)));
        }
        let metric = |value: f64, range: &MetricRange, name: &str| -> Result<f64> {
            if !range.contains_quantized(value) {
                return Err(Error::Stream(format!("{name} out of range: {value}")));
            }
            Ok(value)
        };
        let triple = |rsrp: f64, rsrq: f64, sinr: f64, tag: &str| -> Result<ReportedMetrics> {
            Ok(ReportedMetrics {
                rsrp: metric(rsrp, &RSRP_RANGE, &format!("{tag}_rsrp"))?,
                rsrq: metric(rsrq, &RSRQ_RANGE, &format!("{tag}_rsrq"))?,
                sinr: metric(sinr, &SINR_RANGE, &format!("{tag}_sinr"))?,
            })
        };
        Ok(MeasurementSample {
            timestamp: self.ts,
            ue_id: self.ue_id.clone(),
            serving_cell: self.serving_cell.clone(),
            serving: triple(self.s_rsrp, self.s_rsrq, self.s_sinr, "s")?,
            neighbors: [
                NeighborReading {
                    cell: self.n1_cell.clone(),
                    metrics: triple(self.n1_rsrp, self.n1_rsrq, self.n1_sinr, "n1")?,
                },
                NeighborReading {
                    cell: self.n2_cell.clone(),
                    metrics: triple(self.n2_rsrp, self.n2_rsrq, self.n2_sinr, "n2")?,
                },
                NeighborReading {
                    cell: self.n3_cell.clone(),
                    metrics: triple(self.n3_rsrp, self.n3_rsrq, self.n3_sinr, "n3")?,
                },
            ],
            handover: self.ho == 1,
        })
    }
}
