//! Forward pass: stacked LSTM over the window, softmax on the final
//! timestep's top hidden state.

use rand::Rng;

use crate::dataset::{ClassWeights, Label};
use crate::error::{Error, Result};
use crate::seeding;

use super::{ModelSpec, ModelWeights};

/// Class distribution for one window: `p_no_ho` + `p_ho` = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub p_no_ho: f64,
    pub p_ho: f64,
}

impl Prediction {
    pub fn prob(&self, label: Label) -> f64 {
        match label {
            Label::NoHo => self.p_no_ho,
            Label::Ho => self.p_ho,
        }
    }

    /// Purchase decision at a threshold: HO when `p_ho >= threshold`.
    pub fn decide(&self, threshold: f64) -> Label {
        if self.p_ho >= threshold {
            Label::Ho
        } else {
            Label::NoHo
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ForwardMode {
    /// No dropout; output is a pure function of (weights, window).
    Eval,
    /// Variational dropout masks sampled once per sequence from the seed.
    Train { dropout_seed: u64 },
}

/// Inverted-dropout masks (elements are 0 or `1/(1-p)`), one pair per layer,
/// shared by every timestep of the sequence.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    pub layers: Vec<LayerMasks>,
}

#[derive(Debug, Clone)]
pub struct LayerMasks {
    pub input: Vec<f64>,
    pub recurrent: Vec<f64>,
}

impl DropoutMasks {
    pub fn ones(spec: &ModelSpec) -> Self {
        let layers = spec
            .layers
            .iter()
            .enumerate()
            .map(|(idx, layer)| LayerMasks {
                input: vec![1.0; spec.layer_input_size(idx)],
                recurrent: vec![1.0; layer.cells],
            })
            .collect();
        Self { layers }
    }

    pub fn sample(spec: &ModelSpec, seed: u64) -> Self {
        let mut rng = seeding::rng(seed);
        let mut draw = |len: usize, rate: f64| -> Vec<f64> {
            if rate <= 0.0 {
                return vec![1.0; len];
            }
            let keep = 1.0 - rate;
            (0..len)
                .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                .collect()
        };
        let layers = spec
            .layers
            .iter()
            .enumerate()
            .map(|(idx, layer)| LayerMasks {
                input: draw(spec.layer_input_size(idx), layer.dropout),
                recurrent: draw(layer.cells, layer.recurrent_dropout),
            })
            .collect();
        Self { layers }
    }
}

/// Per-layer intermediates retained for backpropagation through time.
pub(crate) struct LayerCache {
    /// Masked layer input per step, `steps x input_size`.
    pub x_masked: Vec<f64>,
    /// Masked previous hidden state per step, `steps x cells`.
    pub h_masked: Vec<f64>,
    /// Post-activation gates per step, `steps x 4*cells` (i|f|g|o).
    pub gates: Vec<f64>,
    /// Cell state entering each step, `steps x cells`.
    pub c_prev: Vec<f64>,
    /// tanh of the updated cell state, `steps x cells`.
    pub tanh_c: Vec<f64>,
}

pub(crate) struct ForwardCache {
    pub layers: Vec<LayerCache>,
    /// Input of the output layer (top hidden state at the final step).
    pub top_h: Vec<f64>,
    pub probs: [f64; 2],
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Runs the network over a flat row-major window (`steps x input_size`).
pub fn forward(weights: &ModelWeights, window: &[f64], mode: ForwardMode) -> Result<Prediction> {
    let masks = match mode {
        ForwardMode::Eval => DropoutMasks::ones(&weights.spec),
        ForwardMode::Train { dropout_seed } => DropoutMasks::sample(&weights.spec, dropout_seed),
    };
    run_forward(weights, window, &masks, false, None).map(|(pred, _)| pred)
}

/// Mask application record for one layer at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskTrace {
    pub layer: usize,
    pub step: usize,
    pub input_mask: Vec<f64>,
    pub recurrent_mask: Vec<f64>,
}

/// Instrumented forward: additionally records the dropout masks as applied
/// at every timestep.
pub fn forward_traced(
    weights: &ModelWeights,
    window: &[f64],
    mode: ForwardMode,
) -> Result<(Prediction, Vec<MaskTrace>)> {
    let masks = match mode {
        ForwardMode::Eval => DropoutMasks::ones(&weights.spec),
        ForwardMode::Train { dropout_seed } => DropoutMasks::sample(&weights.spec, dropout_seed),
    };
    let mut trace = Vec::new();
    let (pred, _) = run_forward(weights, window, &masks, false, Some(&mut trace))?;
    Ok((pred, trace))
}

/// Weighted cross-entropy: `-w_label * ln(p_label)` with the probability
/// floored at 1e-12.
pub fn loss(pred: &Prediction, label: Label, class_weights: &ClassWeights) -> f64 {
    -class_weights.for_label(label) * pred.prob(label).max(1e-12).ln()
}

pub(crate) fn run_forward(
    weights: &ModelWeights,
    window: &[f64],
    masks: &DropoutMasks,
    want_cache: bool,
    mut mask_trace: Option<&mut Vec<MaskTrace>>,
) -> Result<(Prediction, Option<ForwardCache>)> {
    let input_size = weights.spec.input_size;
    if window.is_empty() || window.len() % input_size != 0 {
        return Err(Error::Model(format!(
            "window length {} is not a positive multiple of input size {input_size}",
            window.len()
        )));
    }
    let steps = window.len() / input_size;
    let n_layers = weights.layers.len();

    let mut caches: Vec<LayerCache> = Vec::with_capacity(if want_cache { n_layers } else { 0 });
    if want_cache {
        for (idx, layer) in weights.spec.layers.iter().enumerate() {
            let input = weights.spec.layer_input_size(idx);
            caches.push(LayerCache {
                x_masked: vec![0.0; steps * input],
                h_masked: vec![0.0; steps * layer.cells],
                gates: vec![0.0; steps * 4 * layer.cells],
                c_prev: vec![0.0; steps * layer.cells],
                tanh_c: vec![0.0; steps * layer.cells],
            });
        }
    }

    let mut h_state: Vec<Vec<f64>> = weights.layers.iter().map(|l| vec![0.0; l.cells]).collect();
    let mut c_state: Vec<Vec<f64>> = weights.layers.iter().map(|l| vec![0.0; l.cells]).collect();
    let max_width = weights
        .layers
        .iter()
        .map(|l| l.input_size.max(l.cells))
        .chain([input_size])
        .max()
        .unwrap();
    let mut x_buf = vec![0.0; max_width];
    let mut xm_buf = vec![0.0; max_width];
    let mut hm_buf = vec![0.0; max_width];

    for step in 0..steps {
        let mut x_len = input_size;
        x_buf[..x_len].copy_from_slice(&window[step * input_size..(step + 1) * input_size]);
        for l in 0..n_layers {
            let layer = &weights.layers[l];
            let (cells, in_len) = (layer.cells, layer.input_size);
            debug_assert_eq!(x_len, in_len);
            let mask = &masks.layers[l];

            for i in 0..in_len {
                xm_buf[i] = x_buf[i] * mask.input[i];
            }
            for i in 0..cells {
                hm_buf[i] = h_state[l][i] * mask.recurrent[i];
            }
            if let Some(trace) = mask_trace.as_deref_mut() {
                trace.push(MaskTrace {
                    layer: l,
                    step,
                    input_mask: mask.input.clone(),
                    recurrent_mask: mask.recurrent.clone(),
                });
            }

            if want_cache {
                let cache = &mut caches[l];
                cache.x_masked[step * in_len..(step + 1) * in_len].copy_from_slice(&xm_buf[..in_len]);
                cache.h_masked[step * cells..(step + 1) * cells].copy_from_slice(&hm_buf[..cells]);
                cache.c_prev[step * cells..(step + 1) * cells].copy_from_slice(&c_state[l]);
            }

            // gates = bias + W_in * x~ + W_rec * h~, gate-major blocks i|f|g|o.
            let mut pre = vec![0.0; 4 * cells];
            for r in 0..4 * cells {
                let wi = &layer.w_input[r * in_len..(r + 1) * in_len];
                let wr = &layer.w_recurrent[r * cells..(r + 1) * cells];
                pre[r] = layer.bias[r] + dot(wi, &xm_buf[..in_len]) + dot(wr, &hm_buf[..cells]);
            }

            for i in 0..cells {
                let gi = sigmoid(pre[i]);
                let gf = sigmoid(pre[cells + i]);
                let gg = pre[2 * cells + i].tanh();
                let go = sigmoid(pre[3 * cells + i]);
                let c_new = gf * c_state[l][i] + gi * gg;
                let tc = c_new.tanh();
                let h_new = go * tc;
                if !h_new.is_finite() || !c_new.is_finite() {
                    return Err(Error::Model(format!(
                        "non-finite state in layer {l} at step {step}"
                    )));
                }
                c_state[l][i] = c_new;
                h_state[l][i] = h_new;
                if want_cache {
                    let cache = &mut caches[l];
                    cache.gates[step * 4 * cells + i] = gi;
                    cache.gates[step * 4 * cells + cells + i] = gf;
                    cache.gates[step * 4 * cells + 2 * cells + i] = gg;
                    cache.gates[step * 4 * cells + 3 * cells + i] = go;
                    cache.tanh_c[step * cells + i] = tc;
                }
            }
            x_buf[..cells].copy_from_slice(&h_state[l]);
            x_len = cells;
        }
    }

    // Output layer input: top hidden state at the final step, or the raw
    // final row when there are no LSTM layers.
    let top_h: Vec<f64> = if n_layers > 0 {
        h_state[n_layers - 1].clone()
    } else {
        window[(steps - 1) * input_size..].to_vec()
    };
    let out = &weights.output;
    let mut logits = [0.0f64; 2];
    for c in 0..2 {
        let row = &out.weight[c * out.input_size..(c + 1) * out.input_size];
        logits[c] = out.bias[c] + dot(row, &top_h);
    }
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Model("non-finite state in output layer".into()));
    }
    let pred = Prediction { p_no_ho: e0 / z, p_ho: e1 / z };

    let cache = want_cache.then(|| ForwardCache { layers: caches, top_h, probs: [pred.p_no_ho, pred.p_ho] });
    Ok((pred, cache))
}
