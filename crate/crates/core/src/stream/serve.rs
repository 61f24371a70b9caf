//! Streaming inference: per-UE sliding windows over incoming indications,
//! one decision per indication once `k` of them have arrived.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::{sample_features, FEATURES_PER_STEP};
use crate::error::{Error, Result};
use crate::seqmodel::{forward, ForwardMode, WeightsFile};

use super::IndicationMessage;

/// One emitted purchase decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub ts: u64,
    pub ue_id: String,
    /// Model probability that a handover occurs within the horizon.
    pub p_ho: f64,
    /// 1 when `p_ho >= threshold`: acquire resources.
    pub decision: u8,
    pub horizon_t: usize,
    pub model_version: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServeStats {
    pub received: u64,
    pub decisions: u64,
    /// Lines dropped for JSON or schema violations.
    pub malformed: u64,
    /// Per-UE sequence discontinuities (window reset each time).
    pub seq_gaps: u64,
}

/// Holds the model and the per-UE window state. Memory is bounded: at most
/// `k` feature rows are retained per UE.
pub struct ServeEngine {
    weights: WeightsFile,
    threshold: f64,
    model_version: String,
    windows: HashMap<String, VecDeque<[f64; FEATURES_PER_STEP]>>,
    last_seq: HashMap<String, u64>,
    stats: ServeStats,
    scratch: Vec<f64>,
}

impl ServeEngine {
    pub fn new(weights: WeightsFile, threshold: f64, model_version: impl Into<String>) -> Result<Self> {
        weights.validate()?;
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Stream(format!("threshold {threshold} outside (0, 1)")));
        }
        let k = weights.window_spec.history_k;
        Ok(Self {
            weights,
            threshold,
            model_version: model_version.into(),
            windows: HashMap::new(),
            last_seq: HashMap::new(),
            stats: ServeStats::default(),
            scratch: vec![0.0; k * FEATURES_PER_STEP],
        })
    }

    pub fn stats(&self) -> ServeStats {
        self.stats
    }

    /// Consumes one NDJSON line. Malformed input is counted and skipped;
    /// sequence gaps reset the UE's window before the message is applied.
    pub fn handle_line(&mut self, line: &str) -> Result<Option<DecisionRecord>> {
        self.stats.received += 1;
        let message: IndicationMessage = match serde_json::from_str(line) {
            Ok(m) => m,
            Err(e) => {
                self.stats.malformed += 1;
                log::warn!("dropping malformed message: {e}");
                return Ok(None);
            }
        };
        let sample = match message.to_sample() {
            Ok(s) => s,
            Err(e) => {
                self.stats.malformed += 1;
                log::warn!("dropping schema-violating message: {e}");
                return Ok(None);
            }
        };

        let expected = self.last_seq.get(&message.ue_id).map_or(1, |s| s + 1);
        if message.seq != expected {
            self.stats.seq_gaps += 1;
            log::warn!(
                "ue {}: sequence {} where {expected} was expected; resetting window",
                message.ue_id,
                message.seq
            );
            self.windows.remove(&message.ue_id);
        }
        self.last_seq.insert(message.ue_id.clone(), message.seq);

        let k = self.weights.window_spec.history_k;
        let window = self.windows.entry(message.ue_id.clone()).or_default();
        window.push_back(sample_features(&sample));
        while window.len() > k {
            window.pop_front();
        }
        if window.len() < k {
            return Ok(None);
        }

        for (row, chunk) in window.iter().zip(self.scratch.chunks_mut(FEATURES_PER_STEP)) {
            chunk.copy_from_slice(row);
        }
        let prediction = forward(&self.weights.weights, &self.scratch, ForwardMode::Eval)?;
        let decision = u8::from(prediction.p_ho >= self.threshold);
        self.stats.decisions += 1;
        Ok(Some(DecisionRecord {
            ts: sample.timestamp,
            ue_id: sample.ue_id,
            p_ho: prediction.p_ho,
            decision,
            horizon_t: self.weights.window_spec.horizon_t,
            model_version: self.model_version.clone(),
        }))
    }
}

/// Pumps NDJSON indications from `input` into the engine, writing one
/// decision line per inference to `output`.
pub fn serve<R: BufRead, W: Write>(engine: &mut ServeEngine, input: R, mut output: W) -> Result<ServeStats> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(decision) = engine.handle_line(&line)? {
            serde_json::to_writer(&mut output, &decision)?;
            output.write_all(b"\n")?;
        }
    }
    output.flush()?;
    Ok(engine.stats())
}
