//! Versioned weight files.
//!
//! JSON with a metadata header followed by the parameter blocks in declared
//! order (per layer: input kernel, recurrent kernel, bias; then the output
//! weight and bias). The header pins everything a consumer needs to run the
//! model identically: topology, window spec, normalization constants,
//! feature order, class weights and the training seed. Floating point
//! round-trips are exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassWeights, NormalizationRanges, WindowSpec, FEATURE_ORDER};
use crate::error::{Error, Result};

use super::ModelWeights;

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format_version: u32,
    pub window_spec: WindowSpec,
    pub normalization: NormalizationRanges,
    pub feature_order: Vec<String>,
    pub class_weights: ClassWeights,
    pub seed: u64,
    pub weights: ModelWeights,
}

impl WeightsFile {
    pub fn new(weights: ModelWeights, window_spec: WindowSpec, class_weights: ClassWeights, seed: u64) -> Self {
        Self {
            format_version: WEIGHTS_FORMAT_VERSION,
            window_spec,
            normalization: NormalizationRanges::default(),
            feature_order: FEATURE_ORDER.iter().map(|s| s.to_string()).collect(),
            class_weights,
            seed,
            weights,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != WEIGHTS_FORMAT_VERSION {
            return Err(Error::WeightFormat(format!(
                "unsupported format version {} (expected {WEIGHTS_FORMAT_VERSION})",
                self.format_version
            )));
        }
        WindowSpec::new(self.window_spec.history_k, self.window_spec.horizon_t)?;
        self.weights.validate()?;
        Ok(())
    }

    /// Guard for pipelines that are configured with their own window spec:
    /// the weight file must have been trained with the same one.
    pub fn ensure_window_spec(&self, expected: &WindowSpec) -> Result<()> {
        if self.window_spec != *expected {
            return Err(Error::MetadataMismatch(format!(
                "weights were trained with history={} horizon={}, pipeline expects history={} horizon={}",
                self.window_spec.history_k,
                self.window_spec.horizon_t,
                expected.history_k,
                expected.horizon_t
            )));
        }
        Ok(())
    }
}

pub fn save_weights(file: &WeightsFile, path: &Path) -> Result<()> {
    file.validate()?;
    std::fs::write(path, serde_json::to_string(file)?)?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<WeightsFile> {
    let text = std::fs::read_to_string(path)?;
    let file: WeightsFile = serde_json::from_str(&text)
        .map_err(|e| Error::WeightFormat(format!("{}: {e}", path.display())))?;
    file.validate()?;
    Ok(file)
}
