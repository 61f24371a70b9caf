//! Backpropagation through time with exact gradients of the mean weighted
//! cross-entropy over a batch.

use rayon::prelude::*;

use crate::dataset::{ClassWeights, Label};
use crate::error::{Error, Result};
use crate::seeding;

use super::forward::{run_forward, DropoutMasks, ForwardCache};
use super::ModelWeights;

/// One training example: flat row-major features and the target label.
#[derive(Debug, Clone, Copy)]
pub struct BatchItem<'a> {
    pub features: &'a [f64],
    pub label: Label,
}

/// How dropout masks are chosen during the backward pass. Masks are held
/// fixed between the internal forward pass and the gradient computation.
#[derive(Debug, Clone, Copy)]
pub enum DropoutPlan {
    /// No dropout (gradient checking, final evaluation).
    Off,
    /// Per-sample masks derived from this seed and the batch position.
    Seeded(u64),
}

impl DropoutPlan {
    fn masks(&self, weights: &ModelWeights, index: usize) -> DropoutMasks {
        match self {
            DropoutPlan::Off => DropoutMasks::ones(&weights.spec),
            DropoutPlan::Seeded(base) => DropoutMasks::sample(
                &weights.spec,
                seeding::derive_seed(*base, 0x64726f70, index as u64),
            ),
        }
    }
}

/// Samples per rayon work item; chunk boundaries are fixed by index so the
/// final reduction order never depends on thread scheduling.
const CHUNK: usize = 8;

/// Gradients of the mean weighted loss over the batch, plus that loss.
pub fn backward(
    weights: &ModelWeights,
    batch: &[BatchItem],
    class_weights: &ClassWeights,
    dropout: DropoutPlan,
) -> Result<(ModelWeights, f64)> {
    if batch.is_empty() {
        return Err(Error::Model("backward needs a non-empty batch".into()));
    }
    let chunks: Vec<(ModelWeights, f64)> = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut grads = weights.zeros_like();
            let mut loss_sum = 0.0;
            for (offset, item) in chunk.iter().enumerate() {
                let index = chunk_idx * CHUNK + offset;
                let masks = dropout.masks(weights, index);
                loss_sum += sample_backward(weights, item, class_weights, &masks, &mut grads)?;
            }
            Ok((grads, loss_sum))
        })
        .collect::<Result<_>>()?;

    let mut total = weights.zeros_like();
    let mut loss_sum = 0.0;
    for (grads, chunk_loss) in chunks {
        total.add_scaled(&grads, 1.0);
        loss_sum += chunk_loss;
    }
    let scale = 1.0 / batch.len() as f64;
    total.param_iter_mut().for_each(|g| *g *= scale);
    if !total.all_finite() {
        return Err(Error::Model("non-finite gradient".into()));
    }
    Ok((total, loss_sum * scale))
}

/// Accumulates one sample's gradients (of its weighted loss, unscaled by the
/// batch size) into `grads` and returns the sample loss.
fn sample_backward(
    weights: &ModelWeights,
    item: &BatchItem,
    class_weights: &ClassWeights,
    masks: &DropoutMasks,
    grads: &mut ModelWeights,
) -> Result<f64> {
    let (pred, cache) = run_forward(weights, item.features, masks, true, None)?;
    let cache: ForwardCache = cache.expect("cache requested");
    let w = class_weights.for_label(item.label);
    let loss = super::forward::loss(&pred, item.label, class_weights);

    // Softmax + weighted cross-entropy: dL/dlogit = w * (p - onehot).
    let mut dlogits = [w * cache.probs[0], w * cache.probs[1]];
    dlogits[item.label.index()] -= w;

    let out = &weights.output;
    let out_in = out.input_size;
    let mut d_top = vec![0.0; out_in];
    for c in 0..2 {
        let d = dlogits[c];
        grads.output.bias[c] += d;
        let row = &out.weight[c * out_in..(c + 1) * out_in];
        let grow = &mut grads.output.weight[c * out_in..(c + 1) * out_in];
        for k in 0..out_in {
            grow[k] += d * cache.top_h[k];
            d_top[k] += d * row[k];
        }
    }
    if weights.layers.is_empty() {
        return Ok(loss);
    }

    let steps = cache.layers[0].c_prev.len() / weights.layers[0].cells;
    // Gradient flowing into each layer's hidden output per step; for the top
    // layer only the final step receives signal (from the softmax head).
    let top = weights.layers.len() - 1;
    let mut d_above = vec![0.0; steps * weights.layers[top].cells];
    d_above[(steps - 1) * weights.layers[top].cells..].copy_from_slice(&d_top);

    for l in (0..weights.layers.len()).rev() {
        let layer = &weights.layers[l];
        let cache_l = &cache.layers[l];
        let glayer = &mut grads.layers[l];
        let (cells, in_len) = (layer.cells, layer.input_size);
        let mask = &masks.layers[l];

        let mut dh_next = vec![0.0; cells];
        let mut dc_next = vec![0.0; cells];
        let mut dx_all = vec![0.0; steps * in_len];
        let mut dpre = vec![0.0; 4 * cells];

        for step in (0..steps).rev() {
            let gates = &cache_l.gates[step * 4 * cells..(step + 1) * 4 * cells];
            let (gi, rest) = gates.split_at(cells);
            let (gf, rest) = rest.split_at(cells);
            let (gg, go) = rest.split_at(cells);
            let tc = &cache_l.tanh_c[step * cells..(step + 1) * cells];
            let c_prev = &cache_l.c_prev[step * cells..(step + 1) * cells];
            let xm = &cache_l.x_masked[step * in_len..(step + 1) * in_len];
            let hm = &cache_l.h_masked[step * cells..(step + 1) * cells];
            let d_above_step = &d_above[step * cells..(step + 1) * cells];

            for i in 0..cells {
                let dh = d_above_step[i] + dh_next[i];
                let dc = dh * go[i] * (1.0 - tc[i] * tc[i]) + dc_next[i];
                dpre[i] = dc * gg[i] * gi[i] * (1.0 - gi[i]);
                dpre[cells + i] = dc * c_prev[i] * gf[i] * (1.0 - gf[i]);
                dpre[2 * cells + i] = dc * gi[i] * (1.0 - gg[i] * gg[i]);
                dpre[3 * cells + i] = dh * tc[i] * go[i] * (1.0 - go[i]);
                dc_next[i] = dc * gf[i];
            }

            dh_next.iter_mut().for_each(|v| *v = 0.0);
            let dx = &mut dx_all[step * in_len..(step + 1) * in_len];
            for r in 0..4 * cells {
                let d = dpre[r];
                glayer.bias[r] += d;
                if d == 0.0 {
                    continue;
                }
                let wi_row = &layer.w_input[r * in_len..(r + 1) * in_len];
                let gwi_row = &mut glayer.w_input[r * in_len..(r + 1) * in_len];
                for k in 0..in_len {
                    gwi_row[k] += d * xm[k];
                    dx[k] += d * wi_row[k];
                }
                let wr_row = &layer.w_recurrent[r * cells..(r + 1) * cells];
                let gwr_row = &mut glayer.w_recurrent[r * cells..(r + 1) * cells];
                for k in 0..cells {
                    gwr_row[k] += d * hm[k];
                    dh_next[k] += d * wr_row[k];
                }
            }
            // Chain through the masks that produced x~ and h~.
            for k in 0..cells {
                dh_next[k] *= mask.recurrent[k];
            }
            for k in 0..in_len {
                dx[k] *= mask.input[k];
            }
        }
        d_above = dx_all;
    }
    Ok(loss)
}
