//! Forward pass, backpropagation, SGD training and the finite-difference
//! gradient check.
//!
//! Layer order is linear → batch-norm → tanh for every hidden layer; dropout
//! (inverted scaling) sits between the last hidden layer and the linear
//! output. Training mode normalizes with the batch's own statistics and
//! maintains running statistics by exponential moving average; inference
//! mode uses the running statistics and never applies dropout.
//!
//! The training objective is mean-squared error summed over output
//! components and averaged over the batch; the reported evaluation MSE
//! ([`mean_squared_error`]) is averaged over all elements.

use super::windows::encode_window;
use super::{DatasetSample, LipsyncError, MlpParameters, TrainingConfig, BN_EPSILON};
use crate::rng::SplitMix64;

/// Whether batch statistics and dropout are live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Train,
    Infer,
}

/// Row-major matrix; rows are batch examples.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, cols: usize) -> Result<Self, LipsyncError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(LipsyncError::InvalidShape(format!(
                    "row length {} does not match {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// `X · Wᵀ + b` where `weights` is `out_dim × in_dim` row-major.
fn linear_forward(input: &Mat, weights: &[f64], bias: &[f64], out_dim: usize) -> Mat {
    let mut out = Mat::zeros(input.rows, out_dim);
    for r in 0..input.rows {
        let x = input.row(r);
        let z = out.row_mut(r);
        for (o, z_o) in z.iter_mut().enumerate() {
            let w = &weights[o * x.len()..(o + 1) * x.len()];
            let mut acc = bias[o];
            for (xi, wi) in x.iter().zip(w) {
                acc += xi * wi;
            }
            *z_o = acc;
        }
    }
    out
}

/// Per-hidden-layer tensors cached by the forward pass for backprop.
struct LayerCache {
    /// Input to the layer's linear part.
    input: Mat,
    /// Normalized pre-activation x̂.
    x_hat: Mat,
    /// 1/sqrt(var + eps) per feature.
    inv_std: Vec<f64>,
    /// Batch statistics (train mode) for the running-average update.
    batch_mean: Vec<f64>,
    batch_var: Vec<f64>,
    /// tanh output.
    activated: Mat,
}

pub(crate) struct ForwardCache {
    layers: Vec<LayerCache>,
    /// Activations fed to the output layer (after dropout in train mode).
    output_input: Mat,
    /// Inverted-scaling dropout mask, when dropout was applied.
    dropout_mask: Option<Vec<f64>>,
}

/// Batched forward pass. Pure: running statistics are *not* mutated here;
/// the training loop folds the cached batch statistics into them afterwards.
pub(crate) fn forward_batch_cached(
    params: &MlpParameters,
    input: &Mat,
    mode: ForwardMode,
    rng: &mut SplitMix64,
    dropout_p: f64,
) -> Result<(Mat, ForwardCache), LipsyncError> {
    if input.cols != params.input_dim {
        return Err(LipsyncError::InvalidShape(format!(
            "input dimension {} does not match model {}",
            input.cols, params.input_dim
        )));
    }
    if input.rows == 0 {
        return Err(LipsyncError::EmptyDataset);
    }
    let m = input.rows;
    let mut current = input.clone();
    let mut layers = Vec::with_capacity(params.hidden.len());
    for layer in &params.hidden {
        let z = linear_forward(&current, &layer.weights, &layer.bias, layer.out_dim);
        let (mean, var) = match mode {
            ForwardMode::Train => {
                let mut mean = vec![0.0; layer.out_dim];
                for r in 0..m {
                    for (acc, &v) in mean.iter_mut().zip(z.row(r)) {
                        *acc += v;
                    }
                }
                for v in &mut mean {
                    *v /= m as f64;
                }
                let mut var = vec![0.0; layer.out_dim];
                for r in 0..m {
                    for ((acc, &v), &mu) in var.iter_mut().zip(z.row(r)).zip(&mean) {
                        let d = v - mu;
                        *acc += d * d;
                    }
                }
                for v in &mut var {
                    *v /= m as f64;
                }
                (mean, var)
            }
            ForwardMode::Infer => (layer.bn_running_mean.clone(), layer.bn_running_var.clone()),
        };
        let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + BN_EPSILON).sqrt()).collect();
        let mut x_hat = Mat::zeros(m, layer.out_dim);
        let mut activated = Mat::zeros(m, layer.out_dim);
        for r in 0..m {
            let z_row = z.row(r);
            let xh = x_hat.row_mut(r);
            for o in 0..layer.out_dim {
                xh[o] = (z_row[o] - mean[o]) * inv_std[o];
            }
            let a = activated.row_mut(r);
            for o in 0..layer.out_dim {
                a[o] = (layer.bn_scale[o] * xh[o] + layer.bn_shift[o]).tanh();
            }
        }
        layers.push(LayerCache {
            input: current,
            x_hat,
            inv_std,
            batch_mean: mean,
            batch_var: var,
            activated: activated.clone(),
        });
        current = activated;
    }

    let dropout_mask = if mode == ForwardMode::Train && dropout_p > 0.0 {
        let keep = 1.0 - dropout_p;
        let mask: Vec<f64> = (0..current.rows * current.cols)
            .map(|_| {
                if rng.next_f64() >= dropout_p {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        for (v, &k) in current.data.iter_mut().zip(&mask) {
            *v *= k;
        }
        Some(mask)
    } else {
        None
    };

    let output = linear_forward(
        &current,
        &params.output.weights,
        &params.output.bias,
        params.output.out_dim,
    );
    if output.data.iter().any(|v| !v.is_finite()) {
        return Err(LipsyncError::Numeric(
            "forward pass produced a non-finite value".into(),
        ));
    }
    Ok((
        output,
        ForwardCache {
            layers,
            output_input: current,
            dropout_mask,
        },
    ))
}

/// Single-input forward pass (batch of one).
///
/// In inference mode batch-norm uses the stored running statistics and
/// `rng` / `dropout_p` are ignored. In training mode the statistics come
/// from this one-sample batch, which normalizes the pre-activations to the
/// batch-norm shift — useful for determinism tests, not for inference.
pub fn forward(
    params: &MlpParameters,
    input: &[f64],
    mode: ForwardMode,
    rng: &mut SplitMix64,
    dropout_p: f64,
) -> Result<Vec<f64>, LipsyncError> {
    params.validate()?;
    let batch = Mat::from_rows(vec![input.to_vec()], params.input_dim)?;
    let (output, _) = forward_batch_cached(params, &batch, mode, rng, dropout_p)?;
    Ok(output.data)
}

/// Batched forward pass over encoded input vectors.
pub fn forward_batch(
    params: &MlpParameters,
    inputs: &[Vec<f64>],
    mode: ForwardMode,
    rng: &mut SplitMix64,
    dropout_p: f64,
) -> Result<Vec<Vec<f64>>, LipsyncError> {
    params.validate()?;
    let batch = Mat::from_rows(inputs.to_vec(), params.input_dim)?;
    let (output, _) = forward_batch_cached(params, &batch, mode, rng, dropout_p)?;
    Ok((0..output.rows).map(|r| output.row(r).to_vec()).collect())
}

/// Gradients mirroring the parameter layout.
pub(crate) struct Gradients {
    pub hidden: Vec<HiddenGradients>,
    pub output_weights: Vec<f64>,
    pub output_bias: Vec<f64>,
}

pub(crate) struct HiddenGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub bn_scale: Vec<f64>,
    pub bn_shift: Vec<f64>,
}

/// Training loss on a batch: squared error summed over output components,
/// averaged over batch rows.
fn batch_loss(output: &Mat, targets: &Mat) -> f64 {
    let mut total = 0.0;
    for (y, t) in output.data.iter().zip(&targets.data) {
        let d = y - t;
        total += d * d;
    }
    total / output.rows as f64
}

/// Backpropagate the batch loss through the cached forward pass.
fn backward(
    params: &MlpParameters,
    cache: &ForwardCache,
    output: &Mat,
    targets: &Mat,
) -> Gradients {
    let m = output.rows;
    // dL/dY for L = (1/m) Σ_rows Σ_components (y - t)².
    let mut grad = Mat::zeros(m, output.cols);
    for (g, (y, t)) in grad
        .data
        .iter_mut()
        .zip(output.data.iter().zip(&targets.data))
    {
        *g = 2.0 * (y - t) / m as f64;
    }

    // Output layer.
    let h = &cache.output_input;
    let mut output_weights = vec![0.0; params.output.weights.len()];
    let mut output_bias = vec![0.0; params.output.out_dim];
    for r in 0..m {
        let g = grad.row(r);
        let x = h.row(r);
        for (o, &g_o) in g.iter().enumerate() {
            output_bias[o] += g_o;
            let w_row = &mut output_weights[o * x.len()..(o + 1) * x.len()];
            for (w, &xi) in w_row.iter_mut().zip(x) {
                *w += g_o * xi;
            }
        }
    }
    // dL/d(output input).
    let mut delta = Mat::zeros(m, params.output.in_dim);
    for r in 0..m {
        let g = grad.row(r);
        let d = delta.row_mut(r);
        for (o, &g_o) in g.iter().enumerate() {
            let w_row = &params.output.weights[o * d.len()..(o + 1) * d.len()];
            for (di, &wi) in d.iter_mut().zip(w_row) {
                *di += g_o * wi;
            }
        }
    }
    if let Some(mask) = &cache.dropout_mask {
        for (d, &k) in delta.data.iter_mut().zip(mask) {
            *d *= k;
        }
    }

    let mut hidden = Vec::with_capacity(params.hidden.len());
    for (layer, layer_cache) in params.hidden.iter().zip(&cache.layers).rev() {
        // Through tanh: delta is dL/dh, activated holds h = tanh(a).
        let mut d_act = delta;
        for r in 0..m {
            let h_row = layer_cache.activated.row(r);
            let d = d_act.row_mut(r);
            for (di, &hi) in d.iter_mut().zip(h_row) {
                *di *= 1.0 - hi * hi;
            }
        }
        // Batch-norm backward.
        let out_dim = layer.out_dim;
        let mut sum_d = vec![0.0; out_dim];
        let mut sum_d_xhat = vec![0.0; out_dim];
        for r in 0..m {
            let d = d_act.row(r);
            let xh = layer_cache.x_hat.row(r);
            for o in 0..out_dim {
                sum_d[o] += d[o];
                sum_d_xhat[o] += d[o] * xh[o];
            }
        }
        let bn_scale_grad = sum_d_xhat.clone();
        let bn_shift_grad = sum_d.clone();
        let mut d_z = Mat::zeros(m, out_dim);
        for r in 0..m {
            let d = d_act.row(r);
            let xh = layer_cache.x_hat.row(r);
            let dz = d_z.row_mut(r);
            for o in 0..out_dim {
                dz[o] = layer.bn_scale[o] * layer_cache.inv_std[o] / m as f64
                    * (m as f64 * d[o] - sum_d[o] - xh[o] * sum_d_xhat[o]);
            }
        }
        // Linear backward.
        let x = &layer_cache.input;
        let mut weights = vec![0.0; layer.weights.len()];
        let mut bias = vec![0.0; out_dim];
        for r in 0..m {
            let dz = d_z.row(r);
            let x_row = x.row(r);
            for (o, &dz_o) in dz.iter().enumerate() {
                bias[o] += dz_o;
                let w_row = &mut weights[o * x_row.len()..(o + 1) * x_row.len()];
                for (w, &xi) in w_row.iter_mut().zip(x_row) {
                    *w += dz_o * xi;
                }
            }
        }
        let mut d_input = Mat::zeros(m, layer.in_dim);
        for r in 0..m {
            let dz = d_z.row(r);
            let d = d_input.row_mut(r);
            for (o, &dz_o) in dz.iter().enumerate() {
                let w_row = &layer.weights[o * d.len()..(o + 1) * d.len()];
                for (di, &wi) in d.iter_mut().zip(w_row) {
                    *di += dz_o * wi;
                }
            }
        }
        hidden.push(HiddenGradients {
            weights,
            bias,
            bn_scale: bn_scale_grad,
            bn_shift: bn_shift_grad,
        });
        delta = d_input;
    }
    hidden.reverse();
    Gradients {
        hidden,
        output_weights,
        output_bias,
    }
}

fn apply_sgd(params: &mut MlpParameters, grads: &Gradients, lr: f64) {
    for (layer, g) in params.hidden.iter_mut().zip(&grads.hidden) {
        for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
            *w -= lr * gw;
        }
        for (b, gb) in layer.bias.iter_mut().zip(&g.bias) {
            *b -= lr * gb;
        }
        for (s, gs) in layer.bn_scale.iter_mut().zip(&g.bn_scale) {
            *s -= lr * gs;
        }
        for (s, gs) in layer.bn_shift.iter_mut().zip(&g.bn_shift) {
            *s -= lr * gs;
        }
    }
    for (w, gw) in params.output.weights.iter_mut().zip(&grads.output_weights) {
        *w -= lr * gw;
    }
    for (b, gb) in params.output.bias.iter_mut().zip(&grads.output_bias) {
        *b -= lr * gb;
    }
}

/// Fold the cached batch statistics into the running statistics:
/// `running = momentum · running + (1 − momentum) · batch`.
fn update_running_stats(params: &mut MlpParameters, cache: &ForwardCache, momentum: f64) {
    for (layer, layer_cache) in params.hidden.iter_mut().zip(&cache.layers) {
        for (r, &b) in layer
            .bn_running_mean
            .iter_mut()
            .zip(&layer_cache.batch_mean)
        {
            *r = momentum * *r + (1.0 - momentum) * b;
        }
        for (r, &b) in layer.bn_running_var.iter_mut().zip(&layer_cache.batch_var) {
            *r = momentum * *r + (1.0 - momentum) * b;
        }
    }
}

/// Encode a dataset into input/target matrices, validating ids and shapes.
fn encode_dataset(
    params: &MlpParameters,
    samples: &[DatasetSample],
) -> Result<(Mat, Mat), LipsyncError> {
    if samples.is_empty() {
        return Err(LipsyncError::EmptyDataset);
    }
    let window = params.windowing.input_window;
    if params.input_dim % window != 0 {
        return Err(LipsyncError::InvalidShape(format!(
            "input dimension {} is not a multiple of the window length {window}",
            params.input_dim
        )));
    }
    let inventory_size = params.input_dim / window;
    let out_dim = params.output.out_dim;
    let mut inputs = Mat::zeros(samples.len(), params.input_dim);
    let mut targets = Mat::zeros(samples.len(), out_dim);
    for (r, sample) in samples.iter().enumerate() {
        if sample.input_ids.len() != window {
            return Err(LipsyncError::InvalidShape(format!(
                "sample {r}: expected {window} input ids, got {}",
                sample.input_ids.len()
            )));
        }
        if sample.target.len() != out_dim {
            return Err(LipsyncError::InvalidShape(format!(
                "sample {r}: expected {out_dim} target values, got {}",
                sample.target.len()
            )));
        }
        if sample.target.iter().any(|v| !v.is_finite()) {
            return Err(LipsyncError::Numeric(format!(
                "sample {r}: target contains a non-finite value"
            )));
        }
        inputs
            .row_mut(r)
            .copy_from_slice(&encode_window(&sample.input_ids, inventory_size)?);
        targets.row_mut(r).copy_from_slice(&sample.target);
    }
    Ok((inputs, targets))
}

/// Final parameters and the per-step loss trace.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MlpParameters,
    pub loss_trace: Vec<f64>,
}

/// Mini-batch SGD. Fully deterministic for a fixed `config.rng_seed`:
/// shuffling and dropout draw from one stream in a fixed order. When the
/// dataset is no larger than the batch size, every step trains on the whole
/// dataset in file order.
pub fn train(
    params: MlpParameters,
    samples: &[DatasetSample],
    config: &TrainingConfig,
) -> Result<TrainOutcome, LipsyncError> {
    params.validate()?;
    config.validate()?;
    let (inputs, targets) = encode_dataset(&params, samples)?;
    let n = samples.len();
    let mut params = params;
    let mut rng = SplitMix64::new(config.rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n; // forces a shuffle before the first large-dataset batch
    let mut loss_trace = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let batch_rows: Vec<usize> = if n <= config.batch_size {
            (0..n).collect()
        } else {
            if cursor + config.batch_size > n {
                rng.shuffle(&mut order);
                cursor = 0;
            }
            let rows = order[cursor..cursor + config.batch_size].to_vec();
            cursor += config.batch_size;
            rows
        };
        let mut batch_in = Mat::zeros(batch_rows.len(), inputs.cols);
        let mut batch_tg = Mat::zeros(batch_rows.len(), targets.cols);
        for (i, &row) in batch_rows.iter().enumerate() {
            batch_in.row_mut(i).copy_from_slice(inputs.row(row));
            batch_tg.row_mut(i).copy_from_slice(targets.row(row));
        }
        let (output, cache) = forward_batch_cached(
            &params,
            &batch_in,
            ForwardMode::Train,
            &mut rng,
            config.dropout_p,
        )?;
        let loss = batch_loss(&output, &batch_tg);
        if !loss.is_finite() {
            return Err(LipsyncError::Diverged { step });
        }
        loss_trace.push(loss);
        let grads = backward(&params, &cache, &output, &batch_tg);
        apply_sgd(&mut params, &grads, config.learning_rate);
        update_running_stats(&mut params, &cache, config.bn_momentum);
    }
    Ok(TrainOutcome { params, loss_trace })
}

/// Evaluation MSE in inference mode, averaged over every output element.
pub fn mean_squared_error(
    params: &MlpParameters,
    samples: &[DatasetSample],
) -> Result<f64, LipsyncError> {
    params.validate()?;
    let (inputs, targets) = encode_dataset(params, samples)?;
    let mut rng = SplitMix64::new(0);
    let (output, _) = forward_batch_cached(params, &inputs, ForwardMode::Infer, &mut rng, 0.0)?;
    let mut total = 0.0;
    for (y, t) in output.data.iter().zip(&targets.data) {
        let d = y - t;
        total += d * d;
    }
    Ok(total / output.data.len() as f64)
}

/// Every scalar parameter, addressable for the finite-difference sweep.
#[derive(Debug, Clone, Copy)]
struct Slot {
    layer: usize, // == hidden.len() selects the output layer
    field: SlotField,
    index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SlotField {
    Weights,
    Bias,
    BnScale,
    BnShift,
}

fn slots(params: &MlpParameters) -> Vec<Slot> {
    let mut slots = Vec::with_capacity(params.parameter_count());
    for (layer, hidden) in params.hidden.iter().enumerate() {
        for (field, len) in [
            (SlotField::Weights, hidden.weights.len()),
            (SlotField::Bias, hidden.bias.len()),
            (SlotField::BnScale, hidden.bn_scale.len()),
            (SlotField::BnShift, hidden.bn_shift.len()),
        ] {
            for index in 0..len {
                slots.push(Slot {
                    layer,
                    field,
                    index,
                });
            }
        }
    }
    let out = params.hidden.len();
    for index in 0..params.output.weights.len() {
        slots.push(Slot {
            layer: out,
            field: SlotField::Weights,
            index,
        });
    }
    for index in 0..params.output.bias.len() {
        slots.push(Slot {
            layer: out,
            field: SlotField::Bias,
            index,
        });
    }
    slots
}

fn slot_mut(params: &mut MlpParameters, slot: Slot) -> &mut f64 {
    if slot.layer == params.hidden.len() {
        match slot.field {
            SlotField::Weights => &mut params.output.weights[slot.index],
            SlotField::Bias => &mut params.output.bias[slot.index],
            _ => unreachable!("output layer has no batch-norm"),
        }
    } else {
        let layer = &mut params.hidden[slot.layer];
        match slot.field {
            SlotField::Weights => &mut layer.weights[slot.index],
            SlotField::Bias => &mut layer.bias[slot.index],
            SlotField::BnScale => &mut layer.bn_scale[slot.index],
            SlotField::BnShift => &mut layer.bn_shift[slot.index],
        }
    }
}

fn slot_grad(grads: &Gradients, hidden_count: usize, slot: Slot) -> f64 {
    if slot.layer == hidden_count {
        match slot.field {
            SlotField::Weights => grads.output_weights[slot.index],
            SlotField::Bias => grads.output_bias[slot.index],
            _ => unreachable!(),
        }
    } else {
        let g = &grads.hidden[slot.layer];
        match slot.field {
            SlotField::Weights => g.weights[slot.index],
            SlotField::Bias => g.bias[slot.index],
            SlotField::BnScale => g.bn_scale[slot.index],
            SlotField::BnShift => g.bn_shift[slot.index],
        }
    }
}

/// Compare analytic gradients against central finite differences over every
/// parameter and return the worst error.
///
/// The forward pass runs in training mode on the given batch (batch-norm
/// statistics come from the batch itself) with dropout disabled, double
/// precision throughout. The per-parameter error is
/// `|analytic − numeric| / max(|analytic| + |numeric|, 1)` — relative for
/// healthy gradients, absolute at unit scale for vanishing ones (batch-norm
/// makes hidden biases exactly redundant, so their true gradient is zero) —
/// and both sides below 1e-8 count as exact.
///
/// The batch should exercise varied inputs: a feature that is near-constant
/// across the batch drives its batch variance toward zero, and the resulting
/// curvature in `1/sqrt(var + eps)` degrades the finite-difference side (not
/// the analytic one).
pub fn grad_check(
    params: &MlpParameters,
    samples: &[DatasetSample],
    epsilon: f64,
) -> Result<f64, LipsyncError> {
    params.validate()?;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(LipsyncError::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (inputs, targets) = encode_dataset(params, samples)?;
    let mut rng = SplitMix64::new(0);
    let (output, cache) = forward_batch_cached(params, &inputs, ForwardMode::Train, &mut rng, 0.0)?;
    let grads = backward(params, &cache, &output, &targets);

    let mut worst = 0.0f64;
    let hidden_count = params.hidden.len();
    let mut probe = params.clone();
    for slot in slots(params) {
        let original = *slot_mut(&mut probe, slot);
        *slot_mut(&mut probe, slot) = original + epsilon;
        let (out_plus, _) =
            forward_batch_cached(&probe, &inputs, ForwardMode::Train, &mut rng, 0.0)?;
        let loss_plus = batch_loss(&out_plus, &targets);
        *slot_mut(&mut probe, slot) = original - epsilon;
        let (out_minus, _) =
            forward_batch_cached(&probe, &inputs, ForwardMode::Train, &mut rng, 0.0)?;
        let loss_minus = batch_loss(&out_minus, &targets);
        *slot_mut(&mut probe, slot) = original;

        let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
        let analytic = slot_grad(&grads, hidden_count, slot);
        if analytic.abs() < 1e-8 && numeric.abs() < 1e-8 {
            continue;
        }
        let error = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1.0);
        worst = worst.max(error);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::FrameWindowing;
    use super::*;

    fn identity_bn_params() -> MlpParameters {
        // 2-2-2-2-4 network with hand-set weights. Running variances are set
        // to 1 − eps so the inference-mode inv_std is exactly 1, making the
        // batch-norm an identity map and the whole network hand-computable.
        let w = FrameWindowing::new(1, 1, 4).unwrap();
        let layer = |weights: Vec<f64>, bias: Vec<f64>| super::super::HiddenLayer {
            in_dim: 2,
            out_dim: 2,
            weights,
            bias,
            bn_scale: vec![1.0, 1.0],
            bn_shift: vec![0.0, 0.0],
            bn_running_mean: vec![0.0, 0.0],
            bn_running_var: vec![1.0 - BN_EPSILON, 1.0 - BN_EPSILON],
        };
        MlpParameters {
            input_dim: 2,
            hidden: vec![
                layer(vec![0.5, 0.5, 1.0, 0.0], vec![0.5, -0.5]),
                layer(vec![1.0, 1.0, 1.0, -1.0], vec![0.0, 0.25]),
                layer(vec![0.75, -0.25, 0.5, 0.5], vec![0.1, -0.1]),
            ],
            output: super::super::OutputLayer {
                in_dim: 2,
                out_dim: 4,
                weights: vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, -0.5],
                bias: vec![0.0, 0.1, -0.1, 0.2],
            },
            windowing: w,
        }
    }

    /// Independent plain-loop forward pass for the identity-BN network.
    fn oracle_forward(params: &MlpParameters, input: &[f64]) -> Vec<f64> {
        let mut h = input.to_vec();
        for layer in &params.hidden {
            let mut next = vec![0.0; layer.out_dim];
            for o in 0..layer.out_dim {
                let mut z = layer.bias[o];
                for (i, &x) in h.iter().enumerate() {
                    z += layer.weights[o * h.len() + i] * x;
                }
                let x_hat =
                    (z - layer.bn_running_mean[o]) / (layer.bn_running_var[o] + BN_EPSILON).sqrt();
                next[o] = (layer.bn_scale[o] * x_hat + layer.bn_shift[o]).tanh();
            }
            h = next;
        }
        let out = &params.output;
        (0..out.out_dim)
            .map(|o| {
                let mut y = out.bias[o];
                for (i, &x) in h.iter().enumerate() {
                    y += out.weights[o * h.len() + i] * x;
                }
                y
            })
            .collect()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let mut params = MlpParameters::seeded(6, &[4, 4], w, 0).unwrap();
        for layer in &mut params.hidden {
            layer.weights.iter_mut().for_each(|v| *v = 0.0);
            layer.bias.iter_mut().for_each(|v| *v = 0.0);
        }
        params.output.weights.iter_mut().for_each(|v| *v = 0.0);
        params.output.bias.iter_mut().for_each(|v| *v = 0.0);
        let mut rng = SplitMix64::new(0);
        let input = vec![1.0, 0.0, 0.0, 1.0, 0.5, -0.5];
        let out = forward(&params, &input, ForwardMode::Infer, &mut rng, 0.0).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn miniature_network_matches_independent_oracle() {
        let params = identity_bn_params();
        let input = vec![1.0, -1.0];
        let mut rng = SplitMix64::new(0);
        let fast = forward(&params, &input, ForwardMode::Infer, &mut rng, 0.5).unwrap();
        let slow = oracle_forward(&params, &input);
        assert_eq!(fast.len(), 4);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn train_mode_forward_is_deterministic_given_the_dropout_seed() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(6, &[16, 16], w, 11).unwrap();
        // Two distinct rows: batch statistics stay non-degenerate, so the
        // dropout mask actually shows up in the output.
        let inputs = vec![
            vec![0.2, -0.4, 1.0, 0.0, 0.3, -0.1],
            vec![-0.6, 0.8, 0.0, 1.0, -0.2, 0.4],
        ];
        let run = |seed: u64| {
            let mut rng = SplitMix64::new(seed);
            forward_batch(&params, &inputs, ForwardMode::Train, &mut rng, 0.5).unwrap()
        };
        assert_eq!(run(5), run(5));
        // Different dropout seeds give different train-mode outputs.
        assert_ne!(run(5), run(6));
        // Inference ignores the rng entirely.
        let mut rng_a = SplitMix64::new(1);
        let mut rng_b = SplitMix64::new(99);
        assert_eq!(
            forward_batch(&params, &inputs, ForwardMode::Infer, &mut rng_a, 0.5).unwrap(),
            forward_batch(&params, &inputs, ForwardMode::Infer, &mut rng_b, 0.5).unwrap()
        );
    }

    #[test]
    fn batch_norm_train_mode_normalizes_the_batch() {
        // One hidden feature over a batch of two: z = [1, 3] has mean 2 and
        // biased variance 1, so x̂ = ±1/√(1+eps) and h = tanh(x̂).
        let w = FrameWindowing::new(1, 1, 1).unwrap();
        let params = MlpParameters {
            input_dim: 1,
            hidden: vec![super::super::HiddenLayer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![1.0],
                bias: vec![0.0],
                bn_scale: vec![1.0],
                bn_shift: vec![0.0],
                bn_running_mean: vec![0.0],
                bn_running_var: vec![1.0],
            }],
            output: super::super::OutputLayer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![1.0],
                bias: vec![0.0],
            },
            windowing: w,
        };
        let batch = Mat::from_rows(vec![vec![1.0], vec![3.0]], 1).unwrap();
        let mut rng = SplitMix64::new(0);
        let (out, cache) =
            forward_batch_cached(&params, &batch, ForwardMode::Train, &mut rng, 0.0).unwrap();
        let expected = (1.0 / (1.0 + BN_EPSILON).sqrt()).tanh();
        assert!((out.data[0] + expected).abs() < 1e-15);
        assert!((out.data[1] - expected).abs() < 1e-15);
        assert_eq!(cache.layers[0].batch_mean, vec![2.0]);
        assert_eq!(cache.layers[0].batch_var, vec![1.0]);
    }

    fn tiny_samples(seed: u64, count: usize, params: &MlpParameters) -> Vec<DatasetSample> {
        let window = params.windowing.input_window;
        let inventory = params.input_dim / window;
        let out_dim = params.output.out_dim;
        let mut rng = SplitMix64::new(seed);
        (0..count)
            .map(|_| DatasetSample {
                input_ids: (0..window)
                    .map(|_| rng.next_bounded(inventory as u64) as usize)
                    .collect(),
                target: (0..out_dim).map(|_| rng.next_f64()).collect(),
            })
            .collect()
    }

    #[test]
    fn zero_learning_rate_changes_only_running_stats() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(9, &[8], w, 2).unwrap();
        let samples = tiny_samples(3, 4, &params);
        let config = TrainingConfig {
            learning_rate: 0.0,
            steps: 5,
            batch_size: 4,
            dropout_p: 0.0,
            ..TrainingConfig::default()
        };
        let outcome = train(params.clone(), &samples, &config).unwrap();
        for (before, after) in params.hidden.iter().zip(&outcome.params.hidden) {
            assert_eq!(before.weights, after.weights);
            assert_eq!(before.bias, after.bias);
            assert_eq!(before.bn_scale, after.bn_scale);
            assert_eq!(before.bn_shift, after.bn_shift);
            assert_ne!(before.bn_running_mean, after.bn_running_mean);
        }
        assert_eq!(params.output, outcome.params.output);
        assert_eq!(outcome.loss_trace.len(), 5);
    }

    #[test]
    fn overfits_a_single_example_by_100x() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(9, &[8], w, 4).unwrap();
        let samples = tiny_samples(5, 1, &params);
        let config = TrainingConfig {
            learning_rate: 0.05,
            steps: 500,
            batch_size: 1,
            dropout_p: 0.0,
            rng_seed: 6,
            ..TrainingConfig::default()
        };
        let outcome = train(params, &samples, &config).unwrap();
        let first = outcome.loss_trace[0];
        let last = *outcome.loss_trace.last().unwrap();
        assert!(last < first, "loss did not decrease: {first} -> {last}");
        assert!(
            first / last >= 100.0,
            "expected a 100x drop, got {first} -> {last}"
        );
    }

    #[test]
    fn training_is_reproducible_for_a_fixed_seed() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(9, &[8], w, 4).unwrap();
        let samples = tiny_samples(5, 40, &params);
        let config = TrainingConfig {
            learning_rate: 1e-2,
            steps: 30,
            batch_size: 8,
            dropout_p: 0.5,
            rng_seed: 42,
            ..TrainingConfig::default()
        };
        let a = train(params.clone(), &samples, &config).unwrap();
        let b = train(params, &samples, &config).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(9, &[8], w, 4).unwrap();
        let err = train(params, &[], &TrainingConfig::default()).unwrap_err();
        assert_eq!(err, LipsyncError::EmptyDataset);
    }

    #[test]
    fn gradients_match_finite_differences_on_a_tiny_net() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(3 * 4, &[8, 8], w, 9).unwrap();
        let samples = tiny_samples(10, 3, &params);
        let worst = grad_check(&params, &samples, 1e-4).unwrap();
        assert!(worst < 1e-5, "max gradient error {worst}");
    }

    #[test]
    fn gradients_match_on_a_second_sample_set() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let params = MlpParameters::seeded(3 * 4, &[8, 8], w, 21).unwrap();
        let samples = tiny_samples(22, 5, &params);
        let worst = grad_check(&params, &samples, 1e-4).unwrap();
        assert!(worst < 1e-5, "max gradient error {worst}");
    }

    #[test]
    fn grad_check_rejects_degenerate_shapes() {
        let w = FrameWindowing::new(3, 3, 2).unwrap();
        let mut params = MlpParameters::seeded(9, &[8], w, 4).unwrap();
        params.hidden.clear();
        let err = grad_check(&params, &tiny_samples(1, 2, &params), 1e-4).unwrap_err();
        assert!(matches!(err, LipsyncError::InvalidShape(_)));
    }
}
