//! Synthetic desk-scale datasets, CSV ingestion, and class-disjoint splits.

use crate::seed::derive_seed;
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("row {row}: label {label} out of range for {num_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        num_classes: usize,
    },
    #[error("row {row}, column {col}: feature is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("feature rows ({rows}) and labels ({labels}) disagree")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("class {class} is out of range for {num_classes} classes")]
    UnknownClass { class: usize, num_classes: usize },
    #[error("class selection is empty")]
    EmptySelection,
    #[error("test fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("bad header: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn csv_err(e: csv::Error) -> DataError {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return DataError::Io(io);
        }
        unreachable!("is_io_error guarantees an Io kind");
    }
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    DataError::Parse {
        line,
        msg: e.to_string(),
    }
}

/// A feature matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledDataset {
    /// Validates that labels fit the class count and all features are finite.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        if features.nrows() != labels.len() {
            return Err(DataError::LengthMismatch {
                rows: features.nrows(),
                labels: labels.len(),
            });
        }
        for (row, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(DataError::LabelOutOfRange {
                    row,
                    label,
                    num_classes,
                });
            }
        }
        for ((row, col), &value) in features.indexed_iter() {
            if !value.is_finite() {
                return Err(DataError::NonFinite { row, col });
            }
        }
        Ok(Self {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.ncols()
    }
}

/// Recipe for deterministic Gaussian-blob data: class `k`'s mean sits on a
/// circle of radius `class_mean_scale` (first two dimensions; on a line for
/// one-dimensional data) and points get isotropic noise of `noise_sigma`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub dims: usize,
    pub per_class_count: usize,
    pub class_mean_scale: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), DataError> {
        if self.num_classes < 2 {
            return Err(DataError::InvalidSpec("num_classes must be >= 2".into()));
        }
        if self.dims == 0 {
            return Err(DataError::InvalidSpec("dims must be >= 1".into()));
        }
        if self.per_class_count == 0 {
            return Err(DataError::InvalidSpec(
                "per_class_count must be >= 1".into(),
            ));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma <= 0.0 {
            return Err(DataError::InvalidSpec(
                "noise_sigma must be positive".into(),
            ));
        }
        if !self.class_mean_scale.is_finite() {
            return Err(DataError::InvalidSpec(
                "class_mean_scale must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Deterministic mean for class `k`.
    pub fn class_mean(&self, k: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.dims];
        if self.dims == 1 {
            mean[0] = self.class_mean_scale * k as f64;
        } else {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / self.num_classes as f64;
            mean[0] = self.class_mean_scale * angle.cos();
            mean[1] = self.class_mean_scale * angle.sin();
        }
        mean
    }
}

/// Draws `per_class_count` points per class around deterministic means.
/// Same spec, same dataset; rows are class-major.
pub fn gen_gaussian_blobs(spec: &SyntheticSpec) -> Result<LabeledDataset, DataError> {
    spec.validate()?;
    let rows = spec.num_classes * spec.per_class_count;
    let mut features = Array2::zeros((rows, spec.dims));
    let mut labels = Vec::with_capacity(rows);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated positive");
    for k in 0..spec.num_classes {
        let mean = spec.class_mean(k);
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &format!("blobs/class/{k}")));
        for i in 0..spec.per_class_count {
            let row = k * spec.per_class_count + i;
            for d in 0..spec.dims {
                features[[row, d]] = mean[d] + noise.sample(&mut rng);
            }
            labels.push(k);
        }
    }
    LabeledDataset::new(features, labels, spec.num_classes)
}

/// Uniform-noise feature rows over `[low, high)^dims`; an artificial OOD
/// source with no class structure.
pub fn gen_uniform_noise(
    count: usize,
    dims: usize,
    low: f64,
    high: f64,
    seed: u64,
) -> Result<Array2<f64>, DataError> {
    if dims == 0 {
        return Err(DataError::InvalidSpec("dims must be >= 1".into()));
    }
    if !low.is_finite() || !high.is_finite() || low >= high {
        return Err(DataError::InvalidSpec("need finite low < high".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Array2::zeros((count, dims));
    for row in 0..count {
        for d in 0..dims {
            features[[row, d]] = rng.random_range(low..high);
        }
    }
    Ok(features)
}

/// Retains exactly the rows whose label is in `keep`. With `relabel_dense`
/// the kept classes remap to `0..keep.len()` in ascending original order and
/// the class count shrinks accordingly.
pub fn split_by_classes(
    dataset: &LabeledDataset,
    keep: &[usize],
    relabel_dense: bool,
) -> Result<LabeledDataset, DataError> {
    if keep.is_empty() {
        return Err(DataError::EmptySelection);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &class in &kept {
        if class >= dataset.num_classes {
            return Err(DataError::UnknownClass {
                class,
                num_classes: dataset.num_classes,
            });
        }
    }
    let mut dense = vec![usize::MAX; dataset.num_classes];
    for (new, &old) in kept.iter().enumerate() {
        dense[old] = new;
    }
    let rows: Vec<usize> = dataset
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &label)| dense[label] != usize::MAX)
        .map(|(row, _)| row)
        .collect();
    let mut features = Array2::zeros((rows.len(), dataset.dims()));
    let mut labels = Vec::with_capacity(rows.len());
    for (out, &row) in rows.iter().enumerate() {
        features.row_mut(out).assign(&dataset.features.row(row));
        let label = dataset.labels[row];
        labels.push(if relabel_dense { dense[label] } else { label });
    }
    let num_classes = if relabel_dense {
        kept.len()
    } else {
        dataset.num_classes
    };
    LabeledDataset::new(features, labels, num_classes)
}

/// Seeded stratified split into (train, test). Per class, `floor(count *
/// test_fraction)` shuffled rows go to the test side, so a class with one
/// row lands in train.
pub fn train_test_split(
    dataset: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadFraction(test_fraction));
    }
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for class in 0..dataset.num_classes {
        let mut rows: Vec<usize> = dataset
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &label)| label == class)
            .map(|(row, _)| row)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("split/class/{class}")));
        rows.shuffle(&mut rng);
        let test_count = (rows.len() as f64 * test_fraction).floor() as usize;
        test_rows.extend_from_slice(&rows[..test_count]);
        train_rows.extend_from_slice(&rows[test_count..]);
    }
    let take = |rows: &[usize]| -> Result<LabeledDataset, DataError> {
        let mut features = Array2::zeros((rows.len(), dataset.dims()));
        let mut labels = Vec::with_capacity(rows.len());
        for (out, &row) in rows.iter().enumerate() {
            features.row_mut(out).assign(&dataset.features.row(row));
            labels.push(dataset.labels[row]);
        }
        LabeledDataset::new(features, labels, dataset.num_classes)
    };
    Ok((take(&train_rows)?, take(&test_rows)?))
}

/// Writes `label,f0,f1,...` rows; features carry 17 significant digits so a
/// reload reproduces the exact 64-bit values.
pub fn save_csv<P: AsRef<Path>>(dataset: &LabeledDataset, path: P) -> Result<(), DataError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(file, "label")?;
    for d in 0..dataset.dims() {
        write!(file, ",f{d}")?;
    }
    writeln!(file)?;
    for (row, &label) in dataset.labels.iter().enumerate() {
        write!(file, "{label}")?;
        for d in 0..dataset.dims() {
            write!(file, ",{:.16e}", dataset.features[[row, d]])?;
        }
        writeln!(file)?;
    }
    file.flush()?;
    Ok(())
}

/// Reads a `label,f0,f1,...` file. The class count is inferred as the
/// largest label plus one; non-numeric or non-finite values are rejected
/// with the offending line number.
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<LabeledDataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() < 2 || &headers[0] != "label" {
        return Err(DataError::Schema("expected header label,f0,f1,...".into()));
    }
    for (d, field) in headers.iter().skip(1).enumerate() {
        if field != format!("f{d}") {
            return Err(DataError::Schema(format!(
                "expected feature column f{d}, found {field:?}"
            )));
        }
    }
    let dims = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != dims + 1 {
            return Err(DataError::Parse {
                line,
                msg: format!("expected {} fields, found {}", dims + 1, record.len()),
            });
        }
        let label: usize = record[0].parse().map_err(|_| DataError::Parse {
            line,
            msg: format!("bad label {:?}", &record[0]),
        })?;
        labels.push(label);
        for field in record.iter().skip(1) {
            let value: f64 = field.parse().map_err(|_| DataError::Parse {
                line,
                msg: format!("bad feature value {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(DataError::Parse {
                    line,
                    msg: format!("non-finite feature value {field:?}"),
                });
            }
            values.push(value);
        }
    }
    let rows = labels.len();
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let features = Array2::from_shape_vec((rows, dims), values)
        .expect("row-major values match the parsed shape");
    LabeledDataset::new(features, labels, num_classes)
}
