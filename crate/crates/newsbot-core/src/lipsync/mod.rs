//! Sliding-window lip-sync model: phoneme frames in, per-frame blendshape
//! weights out.
//!
//! The phoneme timeline is sampled into per-video-frame phoneme ids, each
//! frame becomes a one-hot window of its 11-frame phonetic context, and a
//! fully connected network (three tanh hidden layers with batch
//! normalization, dropout before the output layer) predicts a 5-frame window
//! of 32 blendshape weights. Overlapping window predictions are blended with
//! the frame-wise mean and clamped to `[0, 1]`.
//!
//! Training is plain mini-batch SGD on mean-squared error, fully seeded:
//! init, shuffling and dropout all draw from one [`SplitMix64`] stream.
//! [`grad_check`] verifies the backpropagation against central finite
//! differences.

mod io;
mod net;
mod synthetic;
mod windows;

pub use io::{
    parse_animation, parse_dataset, parse_model, write_animation, write_dataset, write_model,
};
pub use net::{
    forward, forward_batch, grad_check, mean_squared_error, train, ForwardMode, TrainOutcome,
};
pub use synthetic::SyntheticTask;
pub use windows::{blend_windows, one_hot_windows};

use thiserror::Error;

use crate::phoneme_timeline::{timeline_to_frames, PhonemeError, PhonemeTimeline};
use crate::rng::SplitMix64;

/// Batch-norm variance epsilon.
pub const BN_EPSILON: f64 = 1e-5;

/// Window geometry: how much phonetic context the model sees and how many
/// output frames it predicts per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameWindowing {
    /// Input context length in frames; odd, centered on the current frame.
    pub input_window: usize,
    /// Predicted frames per window; odd, centered on the current frame.
    pub output_window: usize,
    /// Mouth-related blendshape weights per frame.
    pub num_blendshapes: usize,
}

impl Default for FrameWindowing {
    fn default() -> Self {
        Self {
            input_window: 11,
            output_window: 5,
            num_blendshapes: 32,
        }
    }
}

impl FrameWindowing {
    pub fn new(
        input_window: usize,
        output_window: usize,
        num_blendshapes: usize,
    ) -> Result<Self, LipsyncError> {
        let w = Self {
            input_window,
            output_window,
            num_blendshapes,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), LipsyncError> {
        if self.input_window == 0 || self.input_window % 2 == 0 {
            return Err(LipsyncError::InvalidShape(format!(
                "input window must be odd and positive, got {}",
                self.input_window
            )));
        }
        if self.output_window == 0 || self.output_window % 2 == 0 {
            return Err(LipsyncError::InvalidShape(format!(
                "output window must be odd and positive, got {}",
                self.output_window
            )));
        }
        if self.num_blendshapes == 0 {
            return Err(LipsyncError::InvalidShape(
                "need at least one blendshape".to_string(),
            ));
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        self.output_window * self.num_blendshapes
    }
}

/// One hidden layer: linear weights/bias plus batch-norm state.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim × in_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub bn_scale: Vec<f64>,
    pub bn_shift: Vec<f64>,
    pub bn_running_mean: Vec<f64>,
    pub bn_running_var: Vec<f64>,
}

/// The final linear layer.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim × in_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Full network state. Weights are `f64` throughout so the finite-difference
/// gradient check is meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    pub input_dim: usize,
    pub hidden: Vec<HiddenLayer>,
    pub output: OutputLayer,
    pub windowing: FrameWindowing,
}

impl MlpParameters {
    /// Seeded initialization: weights uniform in `±1/sqrt(fan_in)`, biases
    /// and batch-norm shifts zero, batch-norm scales one, running statistics
    /// at mean 0 / variance 1.
    pub fn seeded(
        input_dim: usize,
        hidden_widths: &[usize],
        windowing: FrameWindowing,
        seed: u64,
    ) -> Result<Self, LipsyncError> {
        windowing.validate()?;
        if input_dim == 0 {
            return Err(LipsyncError::InvalidShape(
                "input_dim must be positive".into(),
            ));
        }
        if hidden_widths.is_empty() || hidden_widths.contains(&0) {
            return Err(LipsyncError::InvalidShape(
                "need at least one hidden layer of positive width".into(),
            ));
        }
        let mut rng = SplitMix64::new(seed);
        let mut init_linear = |in_dim: usize, out_dim: usize| -> (Vec<f64>, Vec<f64>) {
            let scale = 1.0 / (in_dim as f64).sqrt();
            let weights = (0..in_dim * out_dim)
                .map(|_| rng.next_range(-scale, scale))
                .collect();
            (weights, vec![0.0; out_dim])
        };
        let mut hidden = Vec::with_capacity(hidden_widths.len());
        let mut in_dim = input_dim;
        for &width in hidden_widths {
            let (weights, bias) = init_linear(in_dim, width);
            hidden.push(HiddenLayer {
                in_dim,
                out_dim: width,
                weights,
                bias,
                bn_scale: vec![1.0; width],
                bn_shift: vec![0.0; width],
                bn_running_mean: vec![0.0; width],
                bn_running_var: vec![1.0; width],
            });
            in_dim = width;
        }
        let out_dim = windowing.output_dim();
        let (weights, bias) = init_linear(in_dim, out_dim);
        let params = Self {
            input_dim,
            hidden,
            output: OutputLayer {
                in_dim,
                out_dim,
                weights,
                bias,
            },
            windowing,
        };
        params.validate()?;
        Ok(params)
    }

    /// The production-scale network: `11·P → 2048 → 2048 → 2048 → 160`.
    pub fn production_scale(inventory_size: usize, seed: u64) -> Result<Self, LipsyncError> {
        let windowing = FrameWindowing::default();
        Self::seeded(
            windowing.input_window * inventory_size,
            &[2048, 2048, 2048],
            windowing,
            seed,
        )
    }

    /// Check dimension chaining and value sanity.
    pub fn validate(&self) -> Result<(), LipsyncError> {
        self.windowing.validate()?;
        if self.hidden.is_empty() {
            return Err(LipsyncError::InvalidShape("no hidden layers".into()));
        }
        let mut expected_in = self.input_dim;
        for (k, layer) in self.hidden.iter().enumerate() {
            if layer.in_dim != expected_in {
                return Err(LipsyncError::InvalidShape(format!(
                    "hidden layer {k} expects input {expected_in}, declares {}",
                    layer.in_dim
                )));
            }
            if layer.in_dim == 0 || layer.out_dim == 0 {
                return Err(LipsyncError::InvalidShape(format!(
                    "hidden layer {k} has a zero dimension"
                )));
            }
            let checks: [(&str, &[f64], usize); 6] = [
                ("weights", &layer.weights, layer.in_dim * layer.out_dim),
                ("bias", &layer.bias, layer.out_dim),
                ("bn_scale", &layer.bn_scale, layer.out_dim),
                ("bn_shift", &layer.bn_shift, layer.out_dim),
                ("bn_running_mean", &layer.bn_running_mean, layer.out_dim),
                ("bn_running_var", &layer.bn_running_var, layer.out_dim),
            ];
            for (name, values, expected_len) in checks {
                if values.len() != expected_len {
                    return Err(LipsyncError::InvalidShape(format!(
                        "hidden layer {k} {name}: expected {expected_len} values, got {}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(LipsyncError::Numeric(format!(
                        "hidden layer {k} {name} contains a non-finite value"
                    )));
                }
            }
            if layer.bn_running_var.iter().any(|&v| v <= 0.0) {
                return Err(LipsyncError::Numeric(format!(
                    "hidden layer {k} running variance must stay positive"
                )));
            }
            expected_in = layer.out_dim;
        }
        if self.output.in_dim != expected_in {
            return Err(LipsyncError::InvalidShape(format!(
                "output layer expects input {expected_in}, declares {}",
                self.output.in_dim
            )));
        }
        if self.output.out_dim == 0
            || self.output.weights.len() != self.output.in_dim * self.output.out_dim
            || self.output.bias.len() != self.output.out_dim
        {
            return Err(LipsyncError::InvalidShape(
                "output layer shape mismatch".into(),
            ));
        }
        if self
            .output
            .weights
            .iter()
            .chain(&self.output.bias)
            .any(|v| !v.is_finite())
        {
            return Err(LipsyncError::Numeric(
                "output layer contains a non-finite value".into(),
            ));
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        self.output.out_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden
            .iter()
            .map(|l| l.weights.len() + l.bias.len() + l.bn_scale.len() + l.bn_shift.len())
            .sum::<usize>()
            + self.output.weights.len()
            + self.output.bias.len()
    }

    /// Inventory size implied by the input dimension, when consistent.
    pub fn inventory_size(&self) -> Option<usize> {
        (self.input_dim % self.windowing.input_window == 0)
            .then(|| self.input_dim / self.windowing.input_window)
    }
}

/// SGD hyperparameters. Defaults follow the production recipe: batch 128,
/// learning rate 1e-3, 8000 steps, dropout 0.5, batch-norm momentum 0.9.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub dropout_p: f64,
    pub bn_momentum: f64,
    pub rng_seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            learning_rate: 1e-3,
            steps: 8000,
            dropout_p: 0.5,
            bn_momentum: 0.9,
            rng_seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), LipsyncError> {
        if self.batch_size == 0 {
            return Err(LipsyncError::InvalidConfig(
                "batch size must be positive".into(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(LipsyncError::InvalidConfig(format!(
                "learning rate must be non-negative and finite, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(LipsyncError::InvalidConfig(format!(
                "dropout probability must lie in [0, 1), got {}",
                self.dropout_p
            )));
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return Err(LipsyncError::InvalidConfig(format!(
                "batch-norm momentum must lie in [0, 1), got {}",
                self.bn_momentum
            )));
        }
        Ok(())
    }
}

/// One training example: an input window of phoneme ids and its target
/// blendshape block (`output_window × num_blendshapes`, frame-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSample {
    pub input_ids: Vec<usize>,
    pub target: Vec<f64>,
}

/// Per-frame blendshape weights at a fixed frame rate; every weight lies in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendshapeAnimation {
    pub fps: f64,
    pub num_blendshapes: usize,
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum LipsyncError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("phoneme id {id} out of range for inventory of {inventory_size}")]
    IdOutOfRange { id: usize, inventory_size: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("training diverged at step {step}: loss is not finite")]
    Diverged { step: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(
        "inventory mismatch: model expects input dimension {expected}, timeline implies {actual}"
    )]
    InventoryMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Timeline(#[from] PhonemeError),
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("dataset file line {line}: {message}")]
    DatasetFormat { line: usize, message: String },
    #[error("animation file line {line}: {message}")]
    AnimationFormat { line: usize, message: String },
}

/// End-to-end synthesis: sample the timeline into phoneme frames, window and
/// one-hot encode them, run the network in inference mode per window, and
/// blend the overlapping predictions. The animation has exactly as many
/// frames as the timeline's frame count at `fps`.
pub fn synthesize_animation(
    params: &MlpParameters,
    timeline: &PhonemeTimeline,
    fps: f64,
) -> Result<BlendshapeAnimation, LipsyncError> {
    params.validate()?;
    let inventory_size = timeline.inventory.len();
    let expected = params.windowing.input_window * inventory_size;
    if params.input_dim != expected || params.output_dim() != params.windowing.output_dim() {
        return Err(LipsyncError::InventoryMismatch {
            expected: params.input_dim,
            actual: expected,
        });
    }
    let frame_ids = timeline_to_frames(timeline, fps)?;
    if frame_ids.is_empty() {
        return Ok(BlendshapeAnimation {
            fps,
            num_blendshapes: params.windowing.num_blendshapes,
            frames: Vec::new(),
        });
    }
    let windows = one_hot_windows(&frame_ids, inventory_size, &params.windowing)?;
    let mut rng = SplitMix64::new(0); // unused in inference mode
    let predictions = forward_batch(params, &windows, ForwardMode::Infer, &mut rng, 0.0)?;
    let frames = blend_windows(&predictions, frame_ids.len(), &params.windowing)?;
    Ok(BlendshapeAnimation {
        fps,
        num_blendshapes: params.windowing.num_blendshapes,
        frames,
    })
}
