//! Experiment config files. Every run takes a mandatory master seed; stage
//! seeds derive from it by label, so one knob reproduces everything.

use anyhow::Context;
use fitens_core::scl::FittedScheme;
use fitens_core::spaces::SpaceConfig;
use fitens_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Synthetic-data parameters; the generator seed is derived from the master
/// seed, not stored here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticParams {
    pub num_classes: usize,
    pub dims: usize,
    pub per_class_count: usize,
    pub class_mean_scale: f64,
    pub noise_sigma: f64,
}

impl SyntheticParams {
    pub fn to_spec(&self, seed: u64) -> fitens_core::SyntheticSpec {
        fitens_core::SyntheticSpec {
            num_classes: self.num_classes,
            dims: self.dims,
            per_class_count: self.per_class_count,
            class_mean_scale: self.class_mean_scale,
            noise_sigma: self.noise_sigma,
            seed,
        }
    }
}

/// Train hyperparameters as written in config files (seed excluded; it is
/// always derived).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_period: usize,
    pub momentum: f64,
    pub hidden_width: usize,
    pub standardize: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        let base = TrainConfig::default();
        Self {
            epochs: base.epochs,
            batch_size: base.batch_size,
            learning_rate: base.learning_rate,
            lr_decay_factor: base.lr_decay_factor,
            lr_decay_period: base.lr_decay_period,
            momentum: base.momentum,
            hidden_width: base.hidden_width,
            standardize: base.standardize,
        }
    }
}

impl TrainParams {
    pub fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            lr_decay_factor: self.lr_decay_factor,
            lr_decay_period: self.lr_decay_period,
            momentum: self.momentum,
            seed,
            hidden_width: self.hidden_width,
            standardize: self.standardize,
        }
    }
}

/// One externally produced member: a prediction-matrix CSV plus the sidecar
/// binding it to its superclass space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberFiles {
    pub matrix: PathBuf,
    pub space: PathBuf,
}

/// Prediction-matrix ingestion source: member outputs for the
/// in-distribution examples and for the OOD examples, with optional labels
/// for the in-distribution side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionsSource {
    pub num_classes: usize,
    pub in_members: Vec<MemberFiles>,
    pub ood_members: Vec<MemberFiles>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SyntheticParams),
    Csv { train: PathBuf, test: PathBuf },
    Predictions(PredictionsSource),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OodSource {
    /// Hold these classes out of training entirely; their rows become OOD.
    HoldoutClasses(Vec<usize>),
    /// Uniform-noise features over [low, high)^dims.
    UniformNoise { count: usize, low: f64, high: f64 },
    /// Feature rows from a dataset CSV (labels ignored).
    Csv(PathBuf),
}

impl OodSource {
    pub fn name(&self) -> String {
        match self {
            OodSource::HoldoutClasses(_) => "holdout_classes".into(),
            OodSource::UniformNoise { .. } => "uniform_noise".into(),
            OodSource::Csv(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into()),
        }
    }
}

/// Inline space config or a pointer to a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpacesRef {
    Path { path: PathBuf },
    Inline(SpaceConfig),
}

impl SpacesRef {
    pub fn resolve(&self, base: &Path) -> anyhow::Result<SpaceConfig> {
        match self {
            SpacesRef::Inline(config) => Ok(config.clone()),
            SpacesRef::Path { path } => {
                let full = if path.is_relative() {
                    base.join(path)
                } else {
                    path.clone()
                };
                let text = std::fs::read_to_string(&full)
                    .with_context(|| format!("reading {}", full.display()))?;
                SpaceConfig::from_json(&text).with_context(|| format!("parsing {}", full.display()))
            }
        }
    }
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_bins() -> usize {
    fitens_core::metrics::DEFAULT_HISTOGRAM_BINS
}

/// Config for `fitens run`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: DatasetSource,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub spaces: Option<SpacesRef>,
    #[serde(default)]
    pub train: Option<TrainParams>,
    #[serde(default)]
    pub ood: Option<OodSource>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuilderChoice {
    Plain,
    Fitted,
}

impl BuilderChoice {
    pub fn label(&self) -> &'static str {
        match self {
            BuilderChoice::Plain => "plain",
            BuilderChoice::Fitted => "fitted",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSource {
    /// Partitions written out literally: each a list of class-index parts.
    Explicit(Vec<Vec<Vec<usize>>>),
    Sample {
        count: usize,
        min_part_size: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedBuilderConfig {
    /// Per-part specs generated from consecutive-pair offsets.
    Scheme(FittedScheme),
    /// Literal per-part specs; spec k applies to part k.
    ExplicitSpecs(Vec<SpaceConfig>),
}

fn one() -> usize {
    1
}

/// Config for `fitens scl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SclConfig {
    pub seed: u64,
    pub dataset: DatasetSource,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub partitions: PartitionSource,
    pub builders: Vec<BuilderChoice>,
    #[serde(default)]
    pub fitted: Option<FittedBuilderConfig>,
    #[serde(default)]
    pub train: Option<TrainParams>,
    #[serde(default = "one")]
    pub runs: usize,
}

pub fn read_config_bytes(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn parse_run_config(bytes: &[u8]) -> anyhow::Result<RunConfig> {
    serde_json::from_slice(bytes).context("parsing run config")
}

pub fn parse_scl_config(bytes: &[u8]) -> anyhow::Result<SclConfig> {
    serde_json::from_slice(bytes).context("parsing scl config")
}

/// Labels sidecar for ingested predictions: a `label` header, one integer
/// per line.
pub fn load_labels(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "label")) => {}
        _ => anyhow::bail!("{}: expected a 'label' header line", path.display()),
    }
    lines
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            line.trim()
                .parse::<usize>()
                .with_context(|| format!("{}: bad label on line {}", path.display(), i + 1))
        })
        .collect()
}
