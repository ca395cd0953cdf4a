//! Fitted ensembles for consistent predictive confidence.
//!
//! This crate builds ensembles whose members solve superclass reformulations
//! of a classification task, rectifies their class probabilities through
//! minimum-constraints at inference, and measures a classifier's inhibition
//! ability with the separable-concept-learning (SCL) metric alongside
//! standard OOD-detection metrics.
//!
//! - [`spaces`]: superclass spaces, sequels, fitted-ensemble specs.
//! - [`data`]: synthetic datasets, CSV ingestion, class-disjoint splits.
//! - [`trainer`]: small softmax / one-hidden-layer classifiers.
//! - [`rectifier`]: probability rectification and fitted-ensemble inference.
//! - [`scl`]: separable-concept-learning evaluation.
//! - [`metrics`]: OOD-detection metrics, histograms, confidence statistics.

pub mod data;
pub mod metrics;
pub mod rectifier;
pub mod scl;
pub mod seed;
pub mod spaces;
pub mod trainer;

pub use data::{DataError, LabeledDataset, SyntheticSpec};
pub use metrics::{ConfidenceSample, ConfidenceStats, MeanStd, MetricsError, MetricsReport};
pub use rectifier::{
    FittedEnsemble, IngestError, MemberPrediction, PredictionMatrix, RectifiedScores, RectifyError,
};
pub use scl::{
    FittedScheme, PartModel, SclBuilder, SclError, SclModelSet, SclPartition, SclResult,
};
pub use spaces::{ClassSet, FittedEnsembleSpec, Sequel, SpaceConfig, SpaceError, SuperclassSpace};
pub use trainer::{Classifier, TrainConfig, TrainError};
