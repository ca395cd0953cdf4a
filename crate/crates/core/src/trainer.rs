//! Desk-scale probabilistic classifiers: softmax regression and a
//! one-hidden-layer rectifier network, trained by seeded mini-batch SGD with
//! momentum. Training is a pure function of (dataset, config); repeat runs
//! reproduce bitwise-identical parameters.

use crate::data::LabeledDataset;
use crate::rectifier::PredictionMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("training data must cover at least 2 distinct classes")]
    DegenerateData,
    #[error("feature dimension {got} does not match the trained dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad model file: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hyperparameters. `hidden_width == 0` selects plain softmax regression.
/// The learning rate is multiplied by `lr_decay_factor` once per
/// `lr_decay_period` epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_period: usize,
    pub momentum: f64,
    pub seed: u64,
    pub hidden_width: usize,
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            learning_rate: 0.1,
            lr_decay_factor: 1.0,
            lr_decay_period: 10,
            momentum: 0.9,
            seed: 0,
            hidden_width: 0,
            standardize: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(TrainError::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Config("momentum must lie in [0, 1)".into()));
        }
        if !self.lr_decay_factor.is_finite() || self.lr_decay_factor <= 0.0 {
            return Err(TrainError::Config(
                "lr_decay_factor must be positive".into(),
            ));
        }
        if self.lr_decay_period == 0 {
            return Err(TrainError::Config("lr_decay_period must be >= 1".into()));
        }
        Ok(())
    }
}

/// Numerically safe softmax: max-subtraction keeps exponents bounded, so
/// logits up to +-1e4 produce no overflow or NaN.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Per-layer parameter gradients: (weights, bias) in layer order.
pub type LayerGradients = Vec<(Array2<f64>, Array1<f64>)>;

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    weights: Array2<f64>, // (out, in)
    bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Standardizer {
    mean: Array1<f64>,
    std: Array1<f64>,
}

impl Standardizer {
    fn fit(features: &ArrayView2<f64>) -> Self {
        let n = features.nrows().max(1) as f64;
        let mean = features.sum_axis(Axis(0)) / n;
        let mut var = Array1::zeros(features.ncols());
        for row in features.rows() {
            let centered = &row - &mean;
            var = var + centered.mapv(|v| v * v);
        }
        // zero-variance features pass through centered
        let std = (var / n).mapv(|v: f64| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 });
        Self { mean, std }
    }

    fn apply(&self, features: &ArrayView2<f64>) -> Array2<f64> {
        let mut out = features.to_owned();
        for mut row in out.rows_mut() {
            row -= &self.mean;
            row /= &self.std;
        }
        out
    }
}

/// A trained classifier. Immutable after training; inference is pure and
/// safe to run concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    layers: Vec<Layer>,
    standardizer: Option<Standardizer>,
    train_config: TrainConfig,
}

impl Classifier {
    /// All-zero parameters: every prediction is the uniform distribution.
    pub fn zeroed(input_dim: usize, hidden_width: usize, num_classes: usize) -> Self {
        let sizes = layer_sizes(input_dim, hidden_width, num_classes);
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                weights: Array2::zeros((w[1], w[0])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Self {
            layers,
            standardizer: None,
            train_config: TrainConfig::default(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.layers
            .last()
            .expect("at least one layer")
            .weights
            .nrows()
    }

    /// `[input_dim, hidden_width?, num_classes]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(|l| l.weights.nrows()));
        sizes
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.train_config
    }

    /// Per-row class probabilities. Rows of the result sum to 1 within 1e-9.
    pub fn predict_proba(&self, features: ArrayView2<f64>) -> Result<PredictionMatrix, TrainError> {
        if features.ncols() != self.input_dim() {
            return Err(TrainError::DimensionMismatch {
                expected: self.input_dim(),
                got: features.ncols(),
            });
        }
        let input = match &self.standardizer {
            Some(s) => s.apply(&features),
            None => features.to_owned(),
        };
        let logits = self.forward(&input).1;
        let probs = softmax_rows(logits);
        Ok(PredictionMatrix::new(probs).expect("softmax rows are stochastic"))
    }

    /// Forward pass in the network's native coordinates (after any feature
    /// standardization). Returns per-layer pre-activations and the logits.
    fn forward(&self, input: &Array2<f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let mut pre_activations = Vec::with_capacity(self.layers.len().saturating_sub(1));
        let mut activation = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = activation.dot(&layer.weights.t()) + &layer.bias;
            if i + 1 == self.layers.len() {
                return (pre_activations, z);
            }
            activation = z.mapv(|v| v.max(0.0));
            pre_activations.push(z);
        }
        unreachable!("loop returns on the last layer")
    }

    /// Mean cross-entropy and its analytic parameter gradients over a batch,
    /// in the network's native coordinates. Exposed so gradients can be
    /// checked against finite differences.
    pub fn loss_and_gradients(
        &self,
        features: ArrayView2<f64>,
        labels: &[usize],
    ) -> Result<(f64, LayerGradients), TrainError> {
        if features.ncols() != self.input_dim() {
            return Err(TrainError::DimensionMismatch {
                expected: self.input_dim(),
                got: features.ncols(),
            });
        }
        let batch = features.nrows();
        assert_eq!(batch, labels.len(), "one label per feature row");
        assert!(batch > 0, "empty batch");
        let input = features.to_owned();
        let (pre_activations, logits) = self.forward(&input);

        // loss via log-sum-exp; probabilities for the gradient
        let mut loss = 0.0;
        let mut delta = Array2::zeros(logits.raw_dim());
        for (i, row) in logits.rows().into_iter().enumerate() {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = row.iter().map(|&z| (z - max).exp()).sum();
            let lse = max + sum_exp.ln();
            loss += lse - row[labels[i]];
            for (j, &z) in row.iter().enumerate() {
                delta[[i, j]] = (z - lse).exp();
            }
            delta[[i, labels[i]]] -= 1.0;
        }
        loss /= batch as f64;
        delta /= batch as f64;

        // backpropagate; activations[l] feeds layer l
        let mut activations = Vec::with_capacity(self.layers.len());
        activations.push(input);
        for z in &pre_activations {
            activations.push(z.mapv(|v| v.max(0.0)));
        }
        let mut grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        let mut current = delta;
        for l in (0..self.layers.len()).rev() {
            let grad_w = current.t().dot(&activations[l]);
            let grad_b = current.sum_axis(Axis(0));
            if l > 0 {
                let mut back = current.dot(&self.layers[l].weights);
                back.zip_mut_with(&pre_activations[l - 1], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                current = back;
            }
            grads[l] = (grad_w, grad_b);
        }
        Ok((loss, grads))
    }

    /// All parameters flattened: per layer, row-major weights then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend(layer.weights.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    /// Writes back a flat parameter vector in [`Classifier::params`] order.
    pub fn set_params(&mut self, params: &[f64]) {
        let mut cursor = 0;
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut() {
                *w = params[cursor];
                cursor += 1;
            }
            for b in layer.bias.iter_mut() {
                *b = params[cursor];
                cursor += 1;
            }
        }
        assert_eq!(cursor, params.len(), "parameter count mismatch");
    }

    pub fn to_saved(&self) -> SavedModel {
        SavedModel {
            layer_sizes: self.layer_sizes(),
            weights: self
                .layers
                .iter()
                .map(|l| l.weights.iter().copied().collect())
                .collect(),
            biases: self.layers.iter().map(|l| l.bias.to_vec()).collect(),
            feature_mean: self.standardizer.as_ref().map(|s| s.mean.to_vec()),
            feature_std: self.standardizer.as_ref().map(|s| s.std.to_vec()),
            train_config: self.train_config.clone(),
        }
    }

    pub fn from_saved(saved: SavedModel) -> Result<Self, TrainError> {
        if saved.layer_sizes.len() < 2 {
            return Err(TrainError::Model(
                "need at least input and output sizes".into(),
            ));
        }
        let layer_count = saved.layer_sizes.len() - 1;
        if saved.weights.len() != layer_count || saved.biases.len() != layer_count {
            return Err(TrainError::Model("layer count mismatch".into()));
        }
        let mut layers = Vec::with_capacity(layer_count);
        for l in 0..layer_count {
            let (rows, cols) = (saved.layer_sizes[l + 1], saved.layer_sizes[l]);
            if saved.weights[l].len() != rows * cols || saved.biases[l].len() != rows {
                return Err(TrainError::Model(format!("layer {l} shape mismatch")));
            }
            layers.push(Layer {
                weights: Array2::from_shape_vec((rows, cols), saved.weights[l].clone())
                    .expect("shape checked"),
                bias: Array1::from_vec(saved.biases[l].clone()),
            });
        }
        let standardizer = match (saved.feature_mean, saved.feature_std) {
            (Some(mean), Some(std)) => {
                if mean.len() != saved.layer_sizes[0] || std.len() != saved.layer_sizes[0] {
                    return Err(TrainError::Model("standardizer length mismatch".into()));
                }
                Some(Standardizer {
                    mean: Array1::from_vec(mean),
                    std: Array1::from_vec(std),
                })
            }
            (None, None) => None,
            _ => return Err(TrainError::Model("incomplete standardizer".into())),
        };
        Ok(Self {
            layers,
            standardizer,
            train_config: saved.train_config,
        })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), TrainError> {
        let text = serde_json::to_string_pretty(&self.to_saved())
            .map_err(|e| TrainError::Model(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path)?;
        let saved: SavedModel =
            serde_json::from_str(&text).map_err(|e| TrainError::Model(e.to_string()))?;
        Self::from_saved(saved)
    }
}

/// On-disk model form: layer sizes, row-major flattened weights and biases,
/// optional standardization statistics, and the config that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub feature_mean: Option<Vec<f64>>,
    pub feature_std: Option<Vec<f64>>,
    pub train_config: TrainConfig,
}

fn layer_sizes(input_dim: usize, hidden_width: usize, num_classes: usize) -> Vec<usize> {
    if hidden_width == 0 {
        vec![input_dim, num_classes]
    } else {
        vec![input_dim, hidden_width, num_classes]
    }
}

fn softmax_rows(logits: Array2<f64>) -> Array2<f64> {
    let mut out = logits;
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|z| (z - max).exp());
        let total = row.sum();
        row.mapv_inplace(|e| e / total);
    }
    out
}

/// Trains by mini-batch gradient descent with momentum, minimizing mean
/// cross-entropy. Weights start Glorot-uniform from the config seed, biases
/// at zero; batch order reshuffles each epoch from the same stream.
pub fn train(dataset: &LabeledDataset, config: &TrainConfig) -> Result<Classifier, TrainError> {
    config.validate()?;
    let distinct: std::collections::BTreeSet<usize> = dataset.labels().iter().copied().collect();
    if distinct.len() < 2 {
        return Err(TrainError::DegenerateData);
    }
    let num_classes = dataset.num_classes();
    let dims = dataset.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let sizes = layer_sizes(dims, config.hidden_width, num_classes);
    let mut layers: Vec<Layer> = sizes
        .windows(2)
        .map(|w| {
            let (fan_out, fan_in) = (w[1], w[0]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut weights = Array2::zeros((fan_out, fan_in));
            for v in weights.iter_mut() {
                *v = rng.random_range(-bound..bound);
            }
            Layer {
                weights,
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();

    let standardizer = config
        .standardize
        .then(|| Standardizer::fit(&dataset.features()));
    let inputs = match &standardizer {
        Some(s) => s.apply(&dataset.features()),
        None => dataset.features().to_owned(),
    };
    let labels = dataset.labels();

    let mut model = Classifier {
        layers: std::mem::take(&mut layers),
        standardizer: None,
        train_config: config.clone(),
    };
    let mut velocity: LayerGradients = model
        .layers
        .iter()
        .map(|l| {
            (
                Array2::zeros(l.weights.raw_dim()),
                Array1::zeros(l.bias.raw_dim()),
            )
        })
        .collect();

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 0..config.epochs {
        let lr = config.learning_rate
            * config
                .lr_decay_factor
                .powi((epoch / config.lr_decay_period) as i32);
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let x = inputs.select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let (_, grads) = model.loss_and_gradients(x.view(), &y)?;
            for (l, (grad_w, grad_b)) in grads.into_iter().enumerate() {
                // velocity accumulates raw gradients; the step scales by lr
                let (vel_w, vel_b) = &mut velocity[l];
                *vel_w = &*vel_w * config.momentum + &grad_w;
                *vel_b = &*vel_b * config.momentum + &grad_b;
                model.layers[l].weights = &model.layers[l].weights - &(&*vel_w * lr);
                model.layers[l].bias = &model.layers[l].bias - &(&*vel_b * lr);
            }
        }
    }
    model.standardizer = standardizer;
    Ok(model)
}
