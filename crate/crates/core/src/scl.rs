//! Separable concept learning (SCL) evaluation.
//!
//! A partition of the class set (every part holding at least two classes)
//! splits the task: one model per part trains on that part's examples only.
//! At test time every part model scores every example, the per-part scores
//! are concatenated in global class order and normalized, and the argmax
//! decides. The resulting SCL accuracy is bounded above by the routed
//! accuracy, where each example is scored only by the model owning its true
//! class; the gap measures how much cross-part confusion (the inhibition
//! failure) costs.

use crate::data::{split_by_classes, DataError, LabeledDataset};
use crate::rectifier::{build_fitted_ensemble, FittedEnsemble, PredictionMatrix, RectifyError};
use crate::seed::derive_seed;
use crate::spaces::{ClassSet, FittedEnsembleSpec, Sequel, SpaceError, SuperclassSpace};
use crate::trainer::{train, Classifier, TrainConfig, TrainError};
use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SclError {
    #[error("part {index} has {size} classes; every part needs at least 2")]
    PartTooSmall { index: usize, size: usize },
    #[error("class {class} appears in more than one part")]
    Overlap { class: usize },
    #[error("class {class} is not covered by any part")]
    Coverage { class: usize },
    #[error("class {class} is out of range for {num_classes} classes")]
    UnknownClass { class: usize, num_classes: usize },
    #[error("expected {expected} part outputs, got {got}")]
    PartCountMismatch { expected: usize, got: usize },
    #[error("part {part}: expected {expected} scores, got {got}")]
    ArityMismatch {
        part: usize,
        expected: usize,
        got: usize,
    },
    #[error("part {part} has no training examples")]
    EmptyPartData { part: usize },
    #[error(
        "cannot sample partitions of {num_classes} classes with min part size {min_part_size}"
    )]
    Infeasible {
        num_classes: usize,
        min_part_size: usize,
    },
    #[error("builder provides {specs} specs for {parts} parts")]
    BuilderArity { specs: usize, parts: usize },
    #[error("partition is over {partition} classes but the dataset has {dataset}")]
    ClassCountMismatch { partition: usize, dataset: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Rectify(#[from] RectifyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A partition of the class set whose parts all have size >= 2. Canonical
/// form: indices ascending within parts, parts ordered by minimum index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SclPartition {
    parts: Vec<Vec<usize>>,
    num_classes: usize,
}

impl SclPartition {
    pub fn new(parts: Vec<Vec<usize>>, num_classes: usize) -> Result<Self, SclError> {
        let mut seen = vec![false; num_classes];
        for (index, part) in parts.iter().enumerate() {
            if part.len() < 2 {
                return Err(SclError::PartTooSmall {
                    index,
                    size: part.len(),
                });
            }
            for &class in part {
                if class >= num_classes {
                    return Err(SclError::UnknownClass { class, num_classes });
                }
                if seen[class] {
                    return Err(SclError::Overlap { class });
                }
                seen[class] = true;
            }
        }
        if let Some(class) = seen.iter().position(|&s| !s) {
            return Err(SclError::Coverage { class });
        }
        let mut parts: Vec<Vec<usize>> = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        parts.sort_by_key(|p| p[0]);
        Ok(Self { parts, num_classes })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Index of the part containing `class`.
    pub fn part_of(&self, class: usize) -> Result<usize, SclError> {
        if class >= self.num_classes {
            return Err(SclError::UnknownClass {
                class,
                num_classes: self.num_classes,
            });
        }
        Ok(self
            .parts
            .iter()
            .position(|p| p.binary_search(&class).is_ok())
            .expect("partition covers every class"))
    }

    /// Part-local index of `class` (ascending original order within its part).
    pub fn local_index(&self, class: usize) -> Result<(usize, usize), SclError> {
        let part = self.part_of(class)?;
        let local = self.parts[part]
            .binary_search(&class)
            .expect("class is in its part");
        Ok((part, local))
    }
}

/// Merges per-part score vectors into a distribution over all classes:
/// each part's scores land at its classes' global positions, then the whole
/// vector is divided by its total.
pub fn concat_scores(
    part_outputs: &[Vec<f64>],
    partition: &SclPartition,
) -> Result<Vec<f64>, SclError> {
    if part_outputs.len() != partition.num_parts() {
        return Err(SclError::PartCountMismatch {
            expected: partition.num_parts(),
            got: part_outputs.len(),
        });
    }
    let mut merged = vec![0.0; partition.num_classes()];
    for (k, (part, output)) in partition.parts().iter().zip(part_outputs).enumerate() {
        if output.len() != part.len() {
            return Err(SclError::ArityMismatch {
                part: k,
                expected: part.len(),
                got: output.len(),
            });
        }
        debug_assert!((output.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        for (&class, &score) in part.iter().zip(output) {
            merged[class] = score;
        }
    }
    let total: f64 = merged.iter().sum();
    for v in merged.iter_mut() {
        *v /= total;
    }
    Ok(merged)
}

/// One trained model per partition part: a plain classifier or a full
/// fitted ensemble over the part's classes. Fitted part outputs go through
/// the explicit normalization step so concatenation sees distributions.
#[derive(Debug, Clone)]
pub enum PartModel {
    Plain(Classifier),
    Fitted(FittedEnsemble),
}

impl PartModel {
    pub fn num_outputs(&self) -> usize {
        match self {
            PartModel::Plain(c) => c.num_classes(),
            PartModel::Fitted(e) => e.num_classes(),
        }
    }

    pub fn predict_proba(&self, features: ArrayView2<f64>) -> Result<PredictionMatrix, SclError> {
        match self {
            PartModel::Plain(c) => Ok(c.predict_proba(features)?),
            PartModel::Fitted(e) => Ok(e.predict(features)?.normalized_rows()),
        }
    }
}

/// A partition plus its trained part models.
#[derive(Debug, Clone)]
pub struct SclModelSet {
    partition: SclPartition,
    part_models: Vec<PartModel>,
}

impl SclModelSet {
    pub fn new(partition: SclPartition, part_models: Vec<PartModel>) -> Result<Self, SclError> {
        if part_models.len() != partition.num_parts() {
            return Err(SclError::PartCountMismatch {
                expected: partition.num_parts(),
                got: part_models.len(),
            });
        }
        for (k, (part, model)) in partition.parts().iter().zip(&part_models).enumerate() {
            if model.num_outputs() != part.len() {
                return Err(SclError::ArityMismatch {
                    part: k,
                    expected: part.len(),
                    got: model.num_outputs(),
                });
            }
        }
        Ok(Self {
            partition,
            part_models,
        })
    }

    pub fn partition(&self) -> &SclPartition {
        &self.partition
    }

    pub fn part_models(&self) -> &[PartModel] {
        &self.part_models
    }

    /// Scores the merged model (SCL accuracy) and the routed upper bound on
    /// a shared test set.
    pub fn evaluate(
        &self,
        features: ArrayView2<f64>,
        labels: &[usize],
    ) -> Result<SclResult, SclError> {
        for &label in labels {
            if label >= self.partition.num_classes() {
                return Err(SclError::UnknownClass {
                    class: label,
                    num_classes: self.partition.num_classes(),
                });
            }
        }
        let matrices: Vec<PredictionMatrix> = self
            .part_models
            .iter()
            .map(|m| m.predict_proba(features))
            .collect::<Result<_, _>>()?;
        let n = labels.len();
        let mut scl_correct = 0usize;
        let mut routed_correct = 0usize;
        let mut per_part_total = vec![0usize; self.partition.num_parts()];
        let mut per_part_correct = vec![0usize; self.partition.num_parts()];
        for (i, &label) in labels.iter().enumerate() {
            let part_outputs: Vec<Vec<f64>> = matrices
                .iter()
                .map(|m| m.values().row(i).to_vec())
                .collect();
            let merged = concat_scores(&part_outputs, &self.partition)?;
            if argmax(&merged) == label {
                scl_correct += 1;
            }
            let (part, local) = self.partition.local_index(label)?;
            per_part_total[part] += 1;
            if argmax(&part_outputs[part]) == local {
                routed_correct += 1;
                per_part_correct[part] += 1;
            }
        }
        let scl_accuracy = scl_correct as f64 / n as f64;
        let routed_accuracy_bound = routed_correct as f64 / n as f64;
        let per_part_accuracy = per_part_total
            .iter()
            .zip(&per_part_correct)
            .map(|(&total, &correct)| (total > 0).then(|| correct as f64 / total as f64))
            .collect();
        Ok(SclResult {
            scl_accuracy,
            routed_accuracy_bound,
            gap: routed_accuracy_bound - scl_accuracy,
            per_part_accuracy,
            partition: self.partition.parts().to_vec(),
        })
    }
}

/// Routed accuracy alone: each test example is scored only by the part
/// model that owns its true label, within that part's restricted label set.
pub fn routed_accuracy_bound(
    model_set: &SclModelSet,
    features: ArrayView2<f64>,
    labels: &[usize],
) -> Result<f64, SclError> {
    Ok(model_set.evaluate(features, labels)?.routed_accuracy_bound)
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (j, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = j;
        }
    }
    best
}

/// The separable-risk report for one partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SclResult {
    pub scl_accuracy: f64,
    pub routed_accuracy_bound: f64,
    pub gap: f64,
    pub per_part_accuracy: Vec<Option<f64>>,
    pub partition: Vec<Vec<usize>>,
}

/// Seeded sampling of class partitions with every part at least
/// `min_part_size`: shuffle the classes, pick a part count, distribute the
/// leftover sizes at random, and cut.
pub fn sample_partitions(
    num_classes: usize,
    count: usize,
    min_part_size: usize,
    seed: u64,
) -> Result<Vec<SclPartition>, SclError> {
    if min_part_size < 2 || num_classes < 2 * min_part_size {
        return Err(SclError::Infeasible {
            num_classes,
            min_part_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_parts = num_classes / min_part_size;
    let mut partitions = Vec::with_capacity(count);
    for _ in 0..count {
        let mut classes: Vec<usize> = (0..num_classes).collect();
        classes.shuffle(&mut rng);
        let k = rng.random_range(1..=max_parts);
        let mut sizes = vec![min_part_size; k];
        for _ in 0..num_classes - k * min_part_size {
            sizes[rng.random_range(0..k)] += 1;
        }
        let mut parts = Vec::with_capacity(k);
        let mut cursor = 0;
        for size in sizes {
            parts.push(classes[cursor..cursor + size].to_vec());
            cursor += size;
        }
        partitions.push(SclPartition::new(parts, num_classes)?);
    }
    Ok(partitions)
}

/// Generates a per-part fitted spec from consecutive-pair spaces at the
/// given offsets. Spaces that collapse to a single block bound nothing and
/// are dropped; if none survive, the member set degrades to the identity
/// problem alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedScheme {
    pub offsets: Vec<usize>,
    pub include_identity: bool,
    pub allow_uneven: bool,
}

impl FittedScheme {
    pub fn spec_for(&self, num_classes: usize) -> Result<FittedEnsembleSpec, SclError> {
        let mut spaces = Vec::new();
        for &offset in &self.offsets {
            let space = SuperclassSpace::consecutive_pairs(num_classes, offset, self.allow_uneven)?;
            if space.num_blocks() >= 2 {
                spaces.push(space);
            }
        }
        let (sequel_spaces, include_identity) = if spaces.is_empty() {
            (vec![SuperclassSpace::identity(num_classes)], false)
        } else {
            (spaces, self.include_identity)
        };
        Ok(FittedEnsembleSpec::new(
            ClassSet::new(num_classes)?,
            vec![Sequel::new(sequel_spaces)?],
            include_identity,
        )?)
    }
}

/// How each part model is built.
#[derive(Debug, Clone)]
pub enum SclBuilder {
    /// One plain classifier per part.
    Plain,
    /// One fitted ensemble per part from explicitly listed specs
    /// (spec `k` must match part `k`'s class count).
    FittedExplicit(Vec<FittedEnsembleSpec>),
    /// One fitted ensemble per part, spec generated from a scheme.
    FittedScheme(FittedScheme),
}

/// Filters the training data per part, remaps each part's labels to a dense
/// range in ascending original order, and trains the part models. Part `k`
/// trains on a seed stream derived from the config seed and `k`.
pub fn train_scl_models(
    train_data: &LabeledDataset,
    partition: &SclPartition,
    builder: &SclBuilder,
    config: &TrainConfig,
) -> Result<SclModelSet, SclError> {
    if train_data.num_classes() != partition.num_classes() {
        return Err(SclError::ClassCountMismatch {
            partition: partition.num_classes(),
            dataset: train_data.num_classes(),
        });
    }
    if let SclBuilder::FittedExplicit(specs) = builder {
        if specs.len() != partition.num_parts() {
            return Err(SclError::BuilderArity {
                specs: specs.len(),
                parts: partition.num_parts(),
            });
        }
    }
    let mut part_models = Vec::with_capacity(partition.num_parts());
    for (k, part) in partition.parts().iter().enumerate() {
        let part_data = split_by_classes(train_data, part, true)?;
        if part_data.is_empty() {
            return Err(SclError::EmptyPartData { part: k });
        }
        let part_config = TrainConfig {
            seed: derive_seed(config.seed, &format!("scl/part/{k}")),
            ..config.clone()
        };
        let model = match builder {
            SclBuilder::Plain => PartModel::Plain(train(&part_data, &part_config)?),
            SclBuilder::FittedExplicit(specs) => {
                let spec = &specs[k];
                if spec.num_classes() != part.len() {
                    return Err(SclError::ClassCountMismatch {
                        partition: part.len(),
                        dataset: spec.num_classes(),
                    });
                }
                PartModel::Fitted(build_fitted_ensemble(&part_data, spec, &part_config)?)
            }
            SclBuilder::FittedScheme(scheme) => {
                let spec = scheme.spec_for(part.len())?;
                PartModel::Fitted(build_fitted_ensemble(&part_data, &spec, &part_config)?)
            }
        };
        part_models.push(model);
    }
    SclModelSet::new(partition.clone(), part_models)
}

/// End to end: train the part models and evaluate both scores on the shared
/// test set.
pub fn run_scl_experiment(
    train_data: &LabeledDataset,
    partition: &SclPartition,
    builder: &SclBuilder,
    config: &TrainConfig,
    test_data: &LabeledDataset,
) -> Result<SclResult, SclError> {
    if test_data.num_classes() != train_data.num_classes() {
        return Err(SclError::ClassCountMismatch {
            partition: train_data.num_classes(),
            dataset: test_data.num_classes(),
        });
    }
    let models = train_scl_models(train_data, partition, builder, config)?;
    models.evaluate(test_data.features(), test_data.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_gaussian_blobs, train_test_split, SyntheticSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn partition_invariants() {
        assert!(matches!(
            SclPartition::new(vec![vec![0], vec![1, 2]], 3),
            Err(SclError::PartTooSmall { index: 0, size: 1 })
        ));
        assert!(matches!(
            SclPartition::new(vec![vec![0, 1], vec![1, 2]], 3),
            Err(SclError::Overlap { class: 1 })
        ));
        assert!(matches!(
            SclPartition::new(vec![vec![0, 1]], 3),
            Err(SclError::Coverage { class: 2 })
        ));
        let p = SclPartition::new(vec![vec![3, 2], vec![1, 0]], 4).unwrap();
        assert_eq!(p.parts(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(p.part_of(2).unwrap(), 1);
        assert_eq!(p.local_index(3).unwrap(), (1, 1));
    }

    #[test]
    fn concat_single_part_is_unchanged() {
        let p = SclPartition::new(vec![vec![0, 1]], 2).unwrap();
        let merged = concat_scores(&[vec![0.2, 0.8]], &p).unwrap();
        assert_eq!(merged, vec![0.2, 0.8]);
    }

    #[test]
    fn concat_contiguous_parts() {
        let p = SclPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let merged = concat_scores(&[vec![0.6, 0.4], vec![0.8, 0.2]], &p).unwrap();
        for (got, want) in merged.iter().zip([0.3, 0.2, 0.4, 0.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn concat_interleaved_parts_place_by_global_index() {
        let p = SclPartition::new(vec![vec![0, 2], vec![1, 3]], 4).unwrap();
        let merged = concat_scores(&[vec![0.6, 0.4], vec![0.8, 0.2]], &p).unwrap();
        for (got, want) in merged.iter().zip([0.3, 0.4, 0.2, 0.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn concat_rejects_arity_mismatch() {
        let p = SclPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        assert!(matches!(
            concat_scores(&[vec![0.6, 0.4], vec![1.0]], &p),
            Err(SclError::ArityMismatch {
                part: 1,
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            concat_scores(&[vec![0.6, 0.4]], &p),
            Err(SclError::PartCountMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn routed_right_but_scl_wrong_example() {
        // true class 2: part {0,1} answers [0.9, 0.1], part {2,3} answers
        // [0.6, 0.4]; concatenation elects class 0 while routing stays right
        let p = SclPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let outputs = vec![vec![0.9, 0.1], vec![0.6, 0.4]];
        let merged = concat_scores(&outputs, &p).unwrap();
        for (got, want) in merged.iter().zip([0.45, 0.05, 0.3, 0.2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(argmax(&merged), 0);
        let (part, local) = p.local_index(2).unwrap();
        assert_eq!(argmax(&outputs[part]), local);
    }

    #[test]
    fn normalization_never_changes_the_argmax() {
        let p = SclPartition::new(vec![vec![0, 3], vec![1, 2], vec![4, 5]], 6).unwrap();
        let outputs = vec![vec![0.7, 0.3], vec![0.55, 0.45], vec![0.1, 0.9]];
        let merged = concat_scores(&outputs, &p).unwrap();
        let mut placed = vec![0.0; 6];
        for (part, output) in p.parts().iter().zip(&outputs) {
            for (&class, &score) in part.iter().zip(output) {
                placed[class] = score;
            }
        }
        assert_eq!(argmax(&merged), argmax(&placed));
    }

    fn blobs(num_classes: usize, seed: u64) -> LabeledDataset {
        gen_gaussian_blobs(&SyntheticSpec {
            num_classes,
            dims: 2,
            per_class_count: 60,
            class_mean_scale: 4.0,
            noise_sigma: 1.0,
            seed,
        })
        .unwrap()
    }

    fn quick_config(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 12,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn routed_bound_dominates_scl_accuracy_on_trained_models() {
        let data = blobs(10, 3);
        let (train_data, test_data) = train_test_split(&data, 0.3, 1).unwrap();
        let partition = SclPartition::new(vec![(0..5).collect(), (5..10).collect()], 10).unwrap();
        let result = run_scl_experiment(
            &train_data,
            &partition,
            &SclBuilder::Plain,
            &quick_config(7),
            &test_data,
        )
        .unwrap();
        assert!(result.scl_accuracy <= result.routed_accuracy_bound);
        assert!(result.gap >= 0.0);
        assert_eq!(result.per_part_accuracy.len(), 2);
    }

    #[test]
    fn whole_set_partition_reduces_to_plain_accuracy() {
        let data = blobs(4, 9);
        let (train_data, test_data) = train_test_split(&data, 0.3, 2).unwrap();
        let partition = SclPartition::new(vec![(0..4).collect()], 4).unwrap();
        let config = quick_config(5);
        let models =
            train_scl_models(&train_data, &partition, &SclBuilder::Plain, &config).unwrap();
        let result = models
            .evaluate(test_data.features(), test_data.labels())
            .unwrap();
        // the same part model scored directly, bit for bit
        let PartModel::Plain(classifier) = &models.part_models()[0] else {
            panic!("plain builder produces plain models");
        };
        let probs = classifier.predict_proba(test_data.features()).unwrap();
        let correct = probs
            .values()
            .rows()
            .into_iter()
            .zip(test_data.labels())
            .filter(|(row, &label)| argmax(&row.to_vec()) == label)
            .count();
        let plain_accuracy = correct as f64 / test_data.len() as f64;
        assert_eq!(result.scl_accuracy, plain_accuracy);
        assert_eq!(result.routed_accuracy_bound, plain_accuracy);
    }

    #[test]
    fn fitted_builder_runs_with_explicit_and_scheme_specs() {
        let data = blobs(10, 13);
        let (train_data, test_data) = train_test_split(&data, 0.3, 4).unwrap();
        let partition = SclPartition::new(vec![(0..5).collect(), (5..10).collect()], 10).unwrap();
        // one merged-pair space per part, five classes each
        let spec = |merge: (usize, usize)| {
            let mut blocks: Vec<Vec<usize>> = (0..5)
                .filter(|&c| c != merge.0 && c != merge.1)
                .map(|c| vec![c])
                .collect();
            blocks.push(vec![merge.0, merge.1]);
            FittedEnsembleSpec::new(
                ClassSet::new(5).unwrap(),
                vec![Sequel::new(vec![SuperclassSpace::new(blocks, 5).unwrap()]).unwrap()],
                true,
            )
            .unwrap()
        };
        let explicit = SclBuilder::FittedExplicit(vec![spec((3, 4)), spec((0, 1))]);
        let result = run_scl_experiment(
            &train_data,
            &partition,
            &explicit,
            &quick_config(6),
            &test_data,
        )
        .unwrap();
        assert!(result.scl_accuracy <= result.routed_accuracy_bound);

        let scheme = SclBuilder::FittedScheme(FittedScheme {
            offsets: vec![0, 1],
            include_identity: true,
            allow_uneven: true,
        });
        let result = run_scl_experiment(
            &train_data,
            &partition,
            &scheme,
            &quick_config(6),
            &test_data,
        )
        .unwrap();
        assert!(result.scl_accuracy <= result.routed_accuracy_bound);
    }

    #[test]
    fn empty_part_training_data_is_an_error() {
        let data = blobs(4, 17);
        let half = split_by_classes(&data, &[0, 1], false).unwrap();
        let partition = SclPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        assert!(matches!(
            train_scl_models(&half, &partition, &SclBuilder::Plain, &quick_config(0)),
            Err(SclError::EmptyPartData { part: 1 })
        ));
    }

    #[test]
    fn sampled_partitions_are_valid_feasible_and_deterministic() {
        let a = sample_partitions(10, 20, 2, 3).unwrap();
        let b = sample_partitions(10, 20, 2, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for p in &a {
            assert!(p.parts().iter().all(|part| part.len() >= 2));
        }
        // four classes with min size 2: single part or two pairs
        for p in sample_partitions(4, 30, 2, 5).unwrap() {
            let sizes: Vec<usize> = p.parts().iter().map(|p| p.len()).collect();
            assert!(sizes == vec![4] || sizes == vec![2, 2]);
        }
        assert!(matches!(
            sample_partitions(3, 1, 2, 0),
            Err(SclError::Infeasible {
                num_classes: 3,
                min_part_size: 2
            })
        ));
    }

    #[test]
    fn scheme_degrades_to_identity_for_tiny_parts() {
        let scheme = FittedScheme {
            offsets: vec![0, 1],
            include_identity: true,
            allow_uneven: true,
        };
        let spec = scheme.spec_for(2).unwrap();
        assert_eq!(spec.num_members(), 1);
        assert_eq!(spec.member_spaces()[0], SuperclassSpace::identity(2));
        let spec = scheme.spec_for(6).unwrap();
        assert_eq!(spec.num_members(), 3);
    }
}
