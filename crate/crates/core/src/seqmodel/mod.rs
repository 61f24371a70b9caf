//! Sequence-to-vector LSTM classifier, implemented from scratch in f64.
//!
//! The stack is a configurable number of LSTM layers followed by a softmax
//! over the two classes. Gates are ordered input|forget|cell|output with
//! sigmoid gates and tanh activations; dropout and recurrent dropout are
//! variational (one mask per sequence). Training is plain backpropagation
//! through time with exact gradients, verified against finite differences.

mod backward;
mod forward;
mod persist;
mod train;

pub use backward::{backward, BatchItem, DropoutPlan};
pub use forward::{forward, forward_traced, loss, DropoutMasks, ForwardMode, MaskTrace, Prediction};
pub use persist::{load_weights, save_weights, WeightsFile, WEIGHTS_FORMAT_VERSION};
pub use train::{predict_windows, train, EpochStats, Optimizer, TrainConfig, TrainingLog};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

/// One LSTM layer's size and regularization rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub cells: usize,
    pub dropout: f64,
    pub recurrent_dropout: f64,
}

/// Model topology. An empty layer list degenerates to a softmax regression
/// on the final timestep's raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_size: usize,
    pub layers: Vec<LayerSpec>,
    pub output_classes: usize,
}

impl Default for ModelSpec {
    /// The stock topology: 12 inputs, stacked LSTM layers of 32/64/32 cells
    /// with 10% dropout and 50% recurrent dropout, softmax over 2 classes.
    fn default() -> Self {
        let layer = |cells| LayerSpec { cells, dropout: 0.10, recurrent_dropout: 0.50 };
        Self { input_size: 12, layers: vec![layer(32), layer(64), layer(32)], output_classes: 2 }
    }
}

impl ModelSpec {
    /// A small single-layer variant for quick experiments and sweeps.
    pub fn compact(cells: usize) -> Self {
        Self {
            input_size: 12,
            layers: vec![LayerSpec { cells, dropout: 0.10, recurrent_dropout: 0.25 }],
            output_classes: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_size < 1 {
            return Err(Error::Model("input size must be >= 1".into()));
        }
        if self.output_classes != 2 {
            return Err(Error::Model("output layer must have exactly 2 classes".into()));
        }
        for (idx, layer) in self.layers.iter().enumerate() {
            if layer.cells < 1 {
                return Err(Error::Model(format!("layer {idx} must have >= 1 cell")));
            }
            for (name, rate) in [("dropout", layer.dropout), ("recurrent_dropout", layer.recurrent_dropout)] {
                if !(0.0..1.0).contains(&rate) {
                    return Err(Error::Model(format!("layer {idx} {name} {rate} outside [0, 1)")));
                }
            }
        }
        Ok(())
    }

    /// Input width of layer `idx` (previous layer's cells, or the raw input).
    pub fn layer_input_size(&self, idx: usize) -> usize {
        if idx == 0 {
            self.input_size
        } else {
            self.layers[idx - 1].cells
        }
    }

    /// Width of whatever feeds the output layer.
    pub fn output_input_size(&self) -> usize {
        self.layers.last().map_or(self.input_size, |l| l.cells)
    }

    pub fn param_count(&self) -> usize {
        let mut count = 0;
        for (idx, layer) in self.layers.iter().enumerate() {
            let input = self.layer_input_size(idx);
            count += 4 * layer.cells * (input + layer.cells + 1);
        }
        count + self.output_classes * (self.output_input_size() + 1)
    }
}

/// One LSTM layer's parameters. Rows of both kernels are gate-major: the
/// input, forget, cell and output gate blocks of `cells` rows each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerWeights {
    pub input_size: usize,
    pub cells: usize,
    /// `[4*cells x input_size]`, row-major.
    pub w_input: Vec<f64>,
    /// `[4*cells x cells]`, row-major.
    pub w_recurrent: Vec<f64>,
    /// `[4*cells]`.
    pub bias: Vec<f64>,
}

/// Dense softmax head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputWeights {
    pub input_size: usize,
    pub classes: usize,
    /// `[classes x input_size]`, row-major.
    pub weight: Vec<f64>,
    /// `[classes]`.
    pub bias: Vec<f64>,
}

/// All trainable parameters. The same shape doubles as the gradient
/// container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeights {
    pub spec: ModelSpec,
    pub layers: Vec<LstmLayerWeights>,
    pub output: OutputWeights,
}

impl ModelWeights {
    /// Fan-in scaled uniform init; forget-gate biases start at 1.
    pub fn init(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = seeding::rng(seeding::derive_seed(seed, 0x696e_6974, 0));
        let mut uniform = |n: usize, fan_in: usize| -> Vec<f64> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
        };
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (idx, layer) in spec.layers.iter().enumerate() {
            let input = spec.layer_input_size(idx);
            let cells = layer.cells;
            let mut bias = vec![0.0; 4 * cells];
            bias[cells..2 * cells].iter_mut().for_each(|b| *b = 1.0);
            layers.push(LstmLayerWeights {
                input_size: input,
                cells,
                w_input: uniform(4 * cells * input, input),
                w_recurrent: uniform(4 * cells * cells, cells),
                bias,
            });
        }
        let out_in = spec.output_input_size();
        let output = OutputWeights {
            input_size: out_in,
            classes: spec.output_classes,
            weight: uniform(spec.output_classes * out_in, out_in),
            bias: vec![0.0; spec.output_classes],
        };
        Ok(Self { spec: spec.clone(), layers, output })
    }

    /// Zeroed parameters with the same shape (gradient container).
    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| LstmLayerWeights {
                input_size: l.input_size,
                cells: l.cells,
                w_input: vec![0.0; l.w_input.len()],
                w_recurrent: vec![0.0; l.w_recurrent.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        Self {
            spec: self.spec.clone(),
            layers,
            output: OutputWeights {
                input_size: self.output.input_size,
                classes: self.output.classes,
                weight: vec![0.0; self.output.weight.len()],
                bias: vec![0.0; self.output.bias.len()],
            },
        }
    }

    /// All-zero parameters for a spec (useful as a degenerate baseline).
    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        let mut w = Self::init(spec, 0)?;
        w.param_iter_mut().for_each(|v| *v = 0.0);
        Ok(w)
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    /// Parameters in declared order: per layer `w_input`, `w_recurrent`,
    /// `bias`; then the output `weight` and `bias`.
    pub fn param_iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w_input.iter().chain(l.w_recurrent.iter()).chain(l.bias.iter()))
            .chain(self.output.weight.iter())
            .chain(self.output.bias.iter())
    }

    pub fn param_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                l.w_input
                    .iter_mut()
                    .chain(l.w_recurrent.iter_mut())
                    .chain(l.bias.iter_mut())
            })
            .chain(self.output.weight.iter_mut())
            .chain(self.output.bias.iter_mut())
    }

    /// Accumulate `other * scale` into self (same shapes assumed).
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (dst, src) in self.param_iter_mut().zip(other.param_iter()) {
            *dst += *src * scale;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.param_iter().all(|v| v.is_finite())
    }

    /// Shape consistency against the embedded spec.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.layers.len() != self.spec.layers.len() {
            return Err(Error::Model(format!(
                "weight file has {} layers, spec declares {}",
                self.layers.len(),
                self.spec.layers.len()
            )));
        }
        for (idx, (w, s)) in self.layers.iter().zip(&self.spec.layers).enumerate() {
            let input = self.spec.layer_input_size(idx);
            if w.cells != s.cells || w.input_size != input {
                return Err(Error::Model(format!("layer {idx} dimensions disagree with spec")));
            }
            if w.w_input.len() != 4 * s.cells * input
                || w.w_recurrent.len() != 4 * s.cells * s.cells
                || w.bias.len() != 4 * s.cells
            {
                return Err(Error::Model(format!("layer {idx} parameter block sizes are wrong")));
            }
        }
        let out_in = self.spec.output_input_size();
        if self.output.input_size != out_in
            || self.output.classes != self.spec.output_classes
            || self.output.weight.len() != self.spec.output_classes * out_in
            || self.output.bias.len() != self.spec.output_classes
        {
            return Err(Error::Model("output layer block sizes are wrong".into()));
        }
        if !self.all_finite() {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(())
    }
}
