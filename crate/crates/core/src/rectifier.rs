//! Probability rectification and fitted-ensemble inference.
//!
//! Every member-classifier bounds the probability of each original class by
//! the probability of the superclass block containing it. Rectification
//! starts every class score at 1 and takes the minimum over all member
//! bounds, so the output satisfies every inequality at once. Scores are
//! deliberately left unnormalized: an input that contradicts the members
//! ends up with scores near zero everywhere, which is the rejection signal.

use crate::data::LabeledDataset;
use crate::seed::derive_seed;
use crate::spaces::{FittedEnsembleSpec, SpaceError, SuperclassSpace};
use crate::trainer::{train, Classifier, TrainConfig, TrainError};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RectifyError {
    #[error("member list is empty")]
    EmptyMemberList,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ensembles must share an identical spec")]
    SpecMismatch,
    #[error("row {row} sums to {sum}, not row-stochastic")]
    NotStochastic { row: usize, sum: f64 },
    #[error("probability out of range at ({row}, {col}): {value}")]
    ValueOutOfRange { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Errors from the prediction-matrix ingestion path.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("bad header: {0}")]
    Schema(String),
    #[error("line {line}: row sums to {sum}, outside 1 +- {tol}")]
    RowNotStochastic { line: u64, sum: f64, tol: f64 },
    #[error("{file}: matrix has {cols} columns but the bound space has {blocks} blocks")]
    SidecarMismatch {
        file: String,
        cols: usize,
        blocks: usize,
    },
    #[error("bad sidecar: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A row-stochastic matrix of per-example class (or superclass)
/// probabilities: entries in [0, 1], each row summing to 1 within 1e-6.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    values: Array2<f64>,
}

impl PredictionMatrix {
    pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(values: Array2<f64>) -> Result<Self, RectifyError> {
        for ((row, col), &value) in values.indexed_iter() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(RectifyError::ValueOutOfRange { row, col, value });
            }
        }
        for (row, r) in values.rows().into_iter().enumerate() {
            let sum = r.sum();
            if (sum - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(RectifyError::NotStochastic { row, sum });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// One member-classifier's output bound to the superclass space it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberPrediction {
    space: SuperclassSpace,
    matrix: PredictionMatrix,
}

impl MemberPrediction {
    pub fn new(space: SuperclassSpace, matrix: PredictionMatrix) -> Result<Self, RectifyError> {
        if matrix.cols() != space.num_blocks() {
            return Err(RectifyError::ShapeMismatch(format!(
                "matrix has {} columns but the space has {} blocks",
                matrix.cols(),
                space.num_blocks()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &SuperclassSpace {
        &self.space
    }

    pub fn matrix(&self) -> &PredictionMatrix {
        &self.matrix
    }
}

/// Rectified per-class scores. Entries lie in [0, 1] but rows are *not*
/// normalized; row sums can be anywhere in [0, n].
#[derive(Debug, Clone, PartialEq)]
pub struct RectifiedScores {
    values: Array2<f64>,
}

impl RectifiedScores {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.values.ncols()
    }

    /// Per-example decision: the argmax class (ties to the lowest index) and
    /// the raw maximum rectified value as the confidence.
    pub fn predict(&self) -> Vec<(usize, f64)> {
        self.values
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = (0usize, row[0]);
                for (j, &v) in row.iter().enumerate().skip(1) {
                    if v > best.1 {
                        best = (j, v);
                    }
                }
                best
            })
            .collect()
    }

    /// Raw maximum rectified value per example.
    pub fn confidences(&self) -> Vec<f64> {
        self.predict().into_iter().map(|(_, c)| c).collect()
    }

    /// Explicit normalization step for concatenation-style consumers; a row
    /// of all zeros becomes uniform.
    pub fn normalized_rows(&self) -> PredictionMatrix {
        let n = self.num_classes();
        let mut out = self.values.clone();
        for mut row in out.rows_mut() {
            let sum = row.sum();
            if sum == 0.0 {
                row.fill(1.0 / n as f64);
            } else {
                row.mapv_inplace(|v| v / sum);
            }
        }
        PredictionMatrix::new(out).expect("normalized rows are stochastic")
    }
}

/// Minimum-constraint rectification. For each example and class `y` the
/// output is the minimum, over members, of the member's probability for the
/// block containing `y`, starting from 1.
pub fn rectify(
    members: &[MemberPrediction],
    num_classes: usize,
) -> Result<RectifiedScores, RectifyError> {
    if members.is_empty() {
        return Err(RectifyError::EmptyMemberList);
    }
    let rows = members[0].matrix.rows();
    for (i, member) in members.iter().enumerate() {
        if member.space.num_classes() != num_classes {
            return Err(RectifyError::ShapeMismatch(format!(
                "member {i} is over {} classes, expected {num_classes}",
                member.space.num_classes()
            )));
        }
        if member.matrix.rows() != rows {
            return Err(RectifyError::ShapeMismatch(format!(
                "member {i} has {} rows, expected {rows}",
                member.matrix.rows()
            )));
        }
    }
    let mut scores = Array2::from_elem((rows, num_classes), 1.0);
    for member in members {
        let block_of: Vec<usize> = (0..num_classes)
            .map(|class| member.space.block_of(class).expect("class count checked"))
            .collect();
        let matrix = member.matrix.values();
        for row in 0..rows {
            for (class, &block) in block_of.iter().enumerate() {
                let bound = matrix[[row, block]];
                if bound < scores[[row, class]] {
                    scores[[row, class]] = bound;
                }
            }
        }
    }
    Ok(RectifiedScores { values: scores })
}

/// A trained fitted ensemble: one member-classifier per space of the spec,
/// in training order (sequel-major, identity last).
#[derive(Debug, Clone)]
pub struct FittedEnsemble {
    spec: FittedEnsembleSpec,
    members: Vec<(SuperclassSpace, Classifier)>,
}

impl FittedEnsemble {
    pub fn spec(&self) -> &FittedEnsembleSpec {
        &self.spec
    }

    pub fn members(&self) -> &[(SuperclassSpace, Classifier)] {
        &self.members
    }

    pub fn num_classes(&self) -> usize {
        self.spec.num_classes()
    }

    /// The member trained on the original per-class problem, when the spec
    /// includes it.
    pub fn identity_classifier(&self) -> Option<&Classifier> {
        self.spec
            .include_identity()
            .then(|| &self.members.last().expect("spec guarantees members").1)
    }

    /// Every member's probabilities for `features`, in member order.
    pub fn member_predictions(
        &self,
        features: ArrayView2<f64>,
    ) -> Result<Vec<MemberPrediction>, RectifyError> {
        self.members
            .iter()
            .map(|(space, classifier)| {
                let matrix = classifier.predict_proba(features)?;
                MemberPrediction::new(space.clone(), matrix)
            })
            .collect()
    }

    /// Runs every member and rectifies.
    pub fn predict(&self, features: ArrayView2<f64>) -> Result<RectifiedScores, RectifyError> {
        let members = self.member_predictions(features)?;
        rectify(&members, self.num_classes())
    }
}

/// Trains one member per spec space on the relabeled dataset. Members train
/// independently (in parallel), each on an RNG stream derived from the
/// config seed and its member index, so results do not depend on scheduling.
pub fn build_fitted_ensemble(
    dataset: &LabeledDataset,
    spec: &FittedEnsembleSpec,
    config: &TrainConfig,
) -> Result<FittedEnsemble, RectifyError> {
    if dataset.num_classes() != spec.num_classes() {
        return Err(RectifyError::ShapeMismatch(format!(
            "dataset has {} classes but the spec expects {}",
            dataset.num_classes(),
            spec.num_classes()
        )));
    }
    let spaces = spec.member_spaces();
    let members: Vec<(SuperclassSpace, Classifier)> = spaces
        .into_par_iter()
        .enumerate()
        .map(|(index, space)| {
            let relabeled = space.relabel(dataset.labels())?;
            let member_data =
                LabeledDataset::new(dataset.features().to_owned(), relabeled, space.num_blocks())
                    .expect("relabeled dataset is valid");
            let member_config = TrainConfig {
                seed: derive_seed(config.seed, &format!("member/{index}")),
                ..config.clone()
            };
            let classifier = train(&member_data, &member_config)?;
            Ok((space, classifier))
        })
        .collect::<Result<_, RectifyError>>()?;
    Ok(FittedEnsemble {
        spec: spec.clone(),
        members,
    })
}

/// Combines several fitted ensembles with identical specs at the
/// superclass-space level: corresponding member outputs are averaged with
/// uniform weights, then rectified once.
pub fn aggregate_ensembles(
    ensembles: &[FittedEnsemble],
    features: ArrayView2<f64>,
) -> Result<RectifiedScores, RectifyError> {
    let first = ensembles.first().ok_or(RectifyError::EmptyMemberList)?;
    for ensemble in &ensembles[1..] {
        if ensemble.spec != first.spec {
            return Err(RectifyError::SpecMismatch);
        }
    }
    let per_ensemble: Vec<Vec<MemberPrediction>> = ensembles
        .iter()
        .map(|e| e.member_predictions(features))
        .collect::<Result<_, _>>()?;
    let weight = 1.0 / ensembles.len() as f64;
    let averaged: Vec<MemberPrediction> = (0..first.members.len())
        .map(|j| {
            let mut acc = per_ensemble[0][j].matrix.values().clone();
            for preds in &per_ensemble[1..] {
                acc += preds[j].matrix.values();
            }
            let matrix = PredictionMatrix::new(acc * weight)?;
            MemberPrediction::new(first.members[j].0.clone(), matrix)
        })
        .collect::<Result<_, _>>()?;
    rectify(&averaged, first.num_classes())
}

/// Sidecar file binding a prediction matrix to its superclass space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSidecar {
    pub num_classes: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl SpaceSidecar {
    pub fn from_space(space: &SuperclassSpace) -> Self {
        Self {
            num_classes: space.num_classes(),
            blocks: space.blocks().to_vec(),
        }
    }

    pub fn to_space(&self) -> Result<SuperclassSpace, SpaceError> {
        SuperclassSpace::new(self.blocks.clone(), self.num_classes)
    }
}

pub fn write_space_sidecar<P: AsRef<Path>>(
    space: &SuperclassSpace,
    path: P,
) -> Result<(), IngestError> {
    let text =
        serde_json::to_string_pretty(&SpaceSidecar::from_space(space)).expect("sidecar serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_space_sidecar<P: AsRef<Path>>(path: P) -> Result<SuperclassSpace, IngestError> {
    let text = std::fs::read_to_string(path)?;
    let sidecar: SpaceSidecar =
        serde_json::from_str(&text).map_err(|e| IngestError::Sidecar(e.to_string()))?;
    Ok(sidecar.to_space()?)
}

/// Writes `id,p0,p1,...` rows with round-trip-exact decimal probabilities.
pub fn write_prediction_csv<P: AsRef<Path>>(
    matrix: &PredictionMatrix,
    path: P,
) -> Result<(), IngestError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(file, "id")?;
    for c in 0..matrix.cols() {
        write!(file, ",p{c}")?;
    }
    writeln!(file)?;
    for (row, r) in matrix.values().rows().into_iter().enumerate() {
        write!(file, "{row}")?;
        for &v in r.iter() {
            write!(file, ",{v}")?;
        }
        writeln!(file)?;
    }
    file.flush()?;
    Ok(())
}

/// Ingestion tolerance for externally produced rows.
pub const INGEST_ROW_SUM_TOLERANCE: f64 = 1e-4;

/// Reads an `id,p0,p1,...` file. Rows whose probabilities do not sum to 1
/// within 1e-4 are rejected with their line number; accepted rows are then
/// renormalized so the stored matrix is row-stochastic to machine precision.
pub fn read_prediction_csv<P: AsRef<Path>>(path: P) -> Result<PredictionMatrix, IngestError> {
    let map_csv = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        IngestError::Parse {
            line,
            msg: e.to_string(),
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(map_csv)?;
    let headers = reader.headers().map_err(map_csv)?.clone();
    if headers.len() < 2 || &headers[0] != "id" {
        return Err(IngestError::Schema("expected header id,p0,p1,...".into()));
    }
    for (c, field) in headers.iter().skip(1).enumerate() {
        if field != format!("p{c}") {
            return Err(IngestError::Schema(format!(
                "expected probability column p{c}, found {field:?}"
            )));
        }
    }
    let cols = headers.len() - 1;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(map_csv)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != cols + 1 {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected {} fields, found {}", cols + 1, record.len()),
            });
        }
        let mut sum = 0.0;
        let mut row = Vec::with_capacity(cols);
        for field in record.iter().skip(1) {
            let value: f64 = field.parse().map_err(|_| IngestError::Parse {
                line,
                msg: format!("bad probability {field:?}"),
            })?;
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("probability {value} outside [0, 1]"),
                });
            }
            sum += value;
            row.push(value);
        }
        if (sum - 1.0).abs() > INGEST_ROW_SUM_TOLERANCE {
            return Err(IngestError::RowNotStochastic {
                line,
                sum,
                tol: INGEST_ROW_SUM_TOLERANCE,
            });
        }
        values.extend(row.into_iter().map(|v| v / sum));
        rows += 1;
    }
    let matrix = Array2::from_shape_vec((rows, cols), values).expect("row-major parse");
    Ok(PredictionMatrix::new(matrix).expect("renormalized rows are stochastic"))
}

/// Loads a matrix and its space sidecar as one member, checking that the
/// column count matches the space's block count.
pub fn load_member_prediction<P: AsRef<Path>, Q: AsRef<Path>>(
    matrix_path: P,
    sidecar_path: Q,
) -> Result<MemberPrediction, IngestError> {
    let matrix = read_prediction_csv(&matrix_path)?;
    let space = read_space_sidecar(&sidecar_path)?;
    if matrix.cols() != space.num_blocks() {
        return Err(IngestError::SidecarMismatch {
            file: matrix_path.as_ref().display().to_string(),
            cols: matrix.cols(),
            blocks: space.num_blocks(),
        });
    }
    MemberPrediction::new(space, matrix).map_err(|e| IngestError::Sidecar(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_gaussian_blobs, SyntheticSpec};
    use crate::spaces::{ClassSet, Sequel};
    use ndarray::arr2;

    fn member(blocks: Vec<Vec<usize>>, n: usize, rows: Vec<Vec<f64>>) -> MemberPrediction {
        let space = SuperclassSpace::new(blocks, n).unwrap();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let matrix = PredictionMatrix::new(
            Array2::from_shape_vec((rows.len(), rows[0].len()), flat).unwrap(),
        )
        .unwrap();
        MemberPrediction::new(space, matrix).unwrap()
    }

    #[test]
    fn rectify_four_class_worked_example() {
        let members = vec![
            member(
                (0..4).map(|c| vec![c]).collect(),
                4,
                vec![vec![0.7, 0.1, 0.1, 0.1]],
            ),
            member(vec![vec![0, 3], vec![1, 2]], 4, vec![vec![0.6, 0.4]]),
            member(vec![vec![0, 1], vec![2, 3]], 4, vec![vec![0.9, 0.1]]),
        ];
        let scores = rectify(&members, 4).unwrap();
        assert_eq!(scores.values(), &arr2(&[[0.6, 0.1, 0.1, 0.1]]));
        assert_eq!(scores.predict(), vec![(0, 0.6)]);
    }

    #[test]
    fn single_identity_member_passes_through() {
        let rows = vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]];
        let m = member((0..3).map(|c| vec![c]).collect(), 3, rows.clone());
        let scores = rectify(std::slice::from_ref(&m), 3).unwrap();
        assert_eq!(scores.values(), m.matrix().values());
    }

    #[test]
    fn uniform_pair_members_bound_everything_at_one_tenth() {
        let n = 10;
        let identity = member((0..n).map(|c| vec![c]).collect(), n, vec![vec![0.1; 10]]);
        let pairs = member(
            (0..5).map(|i| vec![2 * i, 2 * i + 1]).collect(),
            n,
            vec![vec![0.2; 5]],
        );
        let scores = rectify(&[identity, pairs], n).unwrap();
        assert!(scores.values().iter().all(|&v| v == 0.1));
    }

    #[test]
    fn predict_breaks_ties_to_the_lowest_index_and_handles_zero_rows() {
        let scores = RectifiedScores {
            values: arr2(&[[0.3, 0.3, 0.3, 0.3], [0.0, 0.0, 0.0, 0.0]]),
        };
        assert_eq!(scores.predict(), vec![(0, 0.3), (0, 0.0)]);
    }

    #[test]
    fn shape_errors_are_reported() {
        assert!(matches!(
            rectify(&[], 4),
            Err(RectifyError::EmptyMemberList)
        ));
        let a = member(vec![vec![0, 1]], 2, vec![vec![1.0]]);
        let b = member(
            vec![vec![0], vec![1]],
            2,
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        );
        assert!(matches!(
            rectify(&[a.clone(), b], 2),
            Err(RectifyError::ShapeMismatch(_))
        ));
        assert!(matches!(
            rectify(&[a], 3),
            Err(RectifyError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn prediction_matrix_validates_rows() {
        let bad = Array2::from_shape_vec((1, 2), vec![0.9, 0.3]).unwrap();
        assert!(matches!(
            PredictionMatrix::new(bad),
            Err(RectifyError::NotStochastic { row: 0, .. })
        ));
        let out_of_range = Array2::from_shape_vec((1, 2), vec![1.4, -0.4]).unwrap();
        assert!(matches!(
            PredictionMatrix::new(out_of_range),
            Err(RectifyError::ValueOutOfRange { .. })
        ));
    }

    fn four_class_spec(include_identity: bool) -> FittedEnsembleSpec {
        let h0 = SuperclassSpace::new(vec![vec![0, 3], vec![1, 2]], 4).unwrap();
        let h1 = SuperclassSpace::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        FittedEnsembleSpec::new(
            ClassSet::new(4).unwrap(),
            vec![Sequel::new(vec![h0, h1]).unwrap()],
            include_identity,
        )
        .unwrap()
    }

    fn blobs4() -> LabeledDataset {
        gen_gaussian_blobs(&SyntheticSpec {
            num_classes: 4,
            dims: 2,
            per_class_count: 40,
            class_mean_scale: 5.0,
            noise_sigma: 0.8,
            seed: 21,
        })
        .unwrap()
    }

    fn quick_config() -> TrainConfig {
        TrainConfig {
            epochs: 8,
            seed: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn build_counts_members_per_spec() {
        let data = blobs4();
        let ensemble =
            build_fitted_ensemble(&data, &four_class_spec(true), &quick_config()).unwrap();
        assert_eq!(ensemble.members().len(), 3);
        assert!(ensemble.identity_classifier().is_some());

        // two sequels of two spaces each plus the identity: five members
        let h0 = SuperclassSpace::new(vec![vec![0, 3], vec![1, 2]], 4).unwrap();
        let h1 = SuperclassSpace::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let h2 = SuperclassSpace::new(vec![vec![0, 2], vec![1, 3]], 4).unwrap();
        let spec = FittedEnsembleSpec::new(
            ClassSet::new(4).unwrap(),
            vec![
                Sequel::new(vec![h0, h1.clone()]).unwrap(),
                Sequel::new(vec![h2, h1]).unwrap(),
            ],
            true,
        )
        .unwrap();
        let ensemble = build_fitted_ensemble(&data, &spec, &quick_config()).unwrap();
        assert_eq!(ensemble.members().len(), 5);
    }

    #[test]
    fn identity_only_ensemble_matches_a_plain_classifier() {
        let data = blobs4();
        let spec = FittedEnsembleSpec::new(
            ClassSet::new(4).unwrap(),
            vec![Sequel::new(vec![SuperclassSpace::identity(4)]).unwrap()],
            false,
        )
        .unwrap();
        let ensemble = build_fitted_ensemble(&data, &spec, &quick_config()).unwrap();
        assert_eq!(ensemble.members().len(), 1);
        let scores = ensemble.predict(data.features()).unwrap();
        let direct = ensemble.members()[0]
            .1
            .predict_proba(data.features())
            .unwrap();
        assert_eq!(scores.values(), direct.values());
    }

    #[test]
    fn ensemble_prediction_is_pure() {
        let data = blobs4();
        let ensemble =
            build_fitted_ensemble(&data, &four_class_spec(true), &quick_config()).unwrap();
        let a = ensemble.predict(data.features()).unwrap();
        let b = ensemble.predict(data.features()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregation_of_one_or_identical_ensembles_is_transparent() {
        let data = blobs4();
        let ensemble =
            build_fitted_ensemble(&data, &four_class_spec(true), &quick_config()).unwrap();
        let solo = aggregate_ensembles(std::slice::from_ref(&ensemble), data.features()).unwrap();
        assert_eq!(solo, ensemble.predict(data.features()).unwrap());
        let twin =
            aggregate_ensembles(&[ensemble.clone(), ensemble.clone()], data.features()).unwrap();
        assert_eq!(twin, solo);
    }

    #[test]
    fn aggregation_rejects_mismatched_specs() {
        let data = blobs4();
        let a = build_fitted_ensemble(&data, &four_class_spec(true), &quick_config()).unwrap();
        let b = build_fitted_ensemble(&data, &four_class_spec(false), &quick_config()).unwrap();
        assert!(matches!(
            aggregate_ensembles(&[a, b], data.features()),
            Err(RectifyError::SpecMismatch)
        ));
    }

    #[test]
    fn member_average_is_the_uniform_mean() {
        // one member pair with rows [1,0] and [0,1]: the averaged member row
        // [0.5, 0.5] is what rectification sees
        let space = SuperclassSpace::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let a = PredictionMatrix::new(arr2(&[[1.0, 0.0]])).unwrap();
        let b = PredictionMatrix::new(arr2(&[[0.0, 1.0]])).unwrap();
        let avg = PredictionMatrix::new((a.values() + b.values()) * 0.5).unwrap();
        assert_eq!(avg.values(), &arr2(&[[0.5, 0.5]]));
        let rectified = rectify(&[MemberPrediction::new(space, avg).unwrap()], 4).unwrap();
        assert_eq!(rectified.values(), &arr2(&[[0.5, 0.5, 0.5, 0.5]]));
    }

    #[test]
    fn prediction_csv_round_trips_and_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.csv");
        let matrix = PredictionMatrix::new(arr2(&[[0.25, 0.75], [0.5, 0.5]])).unwrap();
        write_prediction_csv(&matrix, &path).unwrap();
        let loaded = read_prediction_csv(&path).unwrap();
        assert_eq!(loaded.values(), matrix.values());

        std::fs::write(&path, "id,p0,p1\n0,0.5,0.5\n1,0.9,0.3\n").unwrap();
        match read_prediction_csv(&path) {
            Err(IngestError::RowNotStochastic { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected stochastic check failure, got {other:?}"),
        }
    }

    #[test]
    fn sidecar_mismatch_names_the_matrix_file() {
        let dir = tempfile::tempdir().unwrap();
        let matrix_path = dir.path().join("m.csv");
        let sidecar_path = dir.path().join("m.space.json");
        let matrix = PredictionMatrix::new(arr2(&[[0.5, 0.5]])).unwrap();
        write_prediction_csv(&matrix, &matrix_path).unwrap();
        write_space_sidecar(&SuperclassSpace::identity(3), &sidecar_path).unwrap();
        match load_member_prediction(&matrix_path, &sidecar_path) {
            Err(IngestError::SidecarMismatch {
                file,
                cols: 2,
                blocks: 3,
            }) => {
                assert!(file.contains("m.csv"));
            }
            other => panic!("expected sidecar mismatch, got {other:?}"),
        }
    }

    #[test]
    fn normalization_is_explicit_and_handles_zero_rows() {
        let scores = RectifiedScores {
            values: arr2(&[[0.2, 0.2], [0.0, 0.0]]),
        };
        let normalized = scores.normalized_rows();
        assert_eq!(normalized.values(), &arr2(&[[0.5, 0.5], [0.5, 0.5]]));
    }
}
