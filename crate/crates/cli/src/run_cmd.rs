//! `fitens run`: train (or ingest) the fitted-ensemble members, rectify,
//! and write the metrics reports.

use crate::config::{self, DatasetSource, MemberFiles, OodSource, RunConfig};
use crate::output;
use anyhow::Context;
use clap::Args;
use fitens_core::data::{self, LabeledDataset};
use fitens_core::metrics::{self, ConfidenceSample, MetricsReport};
use fitens_core::rectifier::{self, FittedEnsemble, MemberPrediction};
use fitens_core::seed::derive_seed;
use fitens_core::spaces::SuperclassSpace;
use fitens_core::trainer::Classifier;
use ndarray::{Array2, ArrayView2};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct RunArgs {
    /// Experiment config file
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the reports
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also print the rendered tables to stdout
    #[arg(long)]
    pub pretty: bool,
}

/// One model's evaluation inputs: in-distribution samples with correctness,
/// plus OOD confidences.
struct ModelEval {
    label: String,
    in_samples: Vec<ConfidenceSample>,
    ood_conf: Vec<f64>,
}

#[derive(Serialize)]
struct ModelReport {
    model: String,
    ood_dataset: String,
    n_in: usize,
    n_out: usize,
    fpr_at_95_tpr_pct: String,
    auroc_pct: String,
    detection_error_pct: String,
    metrics: MetricsReport,
}

#[derive(Serialize)]
struct RunReport {
    num_classes: usize,
    ood_dataset: String,
    models: Vec<ModelReport>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_relative() {
        base.join(path)
    } else {
        path.to_path_buf()
    }
}

fn argmax_rows(values: &Array2<f64>) -> Vec<(usize, f64)> {
    values
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

fn samples_with_labels(
    predictions: &[(usize, f64)],
    labels: &[usize],
) -> anyhow::Result<Vec<ConfidenceSample>> {
    anyhow::ensure!(
        predictions.len() == labels.len(),
        "evaluate: {} predictions for {} labels",
        predictions.len(),
        labels.len()
    );
    predictions
        .iter()
        .zip(labels)
        .map(|(&(class, confidence), &label)| {
            ConfidenceSample::new(confidence, true, Some(class == label)).context("evaluate")
        })
        .collect()
}

fn eval_ensemble(
    ensemble: &FittedEnsemble,
    test: &LabeledDataset,
    ood: ArrayView2<f64>,
) -> anyhow::Result<ModelEval> {
    let scores = ensemble.predict(test.features()).context("evaluate")?;
    let in_samples = samples_with_labels(&scores.predict(), test.labels())?;
    let ood_conf = ensemble.predict(ood).context("evaluate")?.confidences();
    Ok(ModelEval {
        label: "fitted_ensemble".into(),
        in_samples,
        ood_conf,
    })
}

fn eval_identity(
    classifier: &Classifier,
    test: &LabeledDataset,
    ood: ArrayView2<f64>,
) -> anyhow::Result<ModelEval> {
    let probs = classifier
        .predict_proba(test.features())
        .context("evaluate")?;
    let in_samples = samples_with_labels(&argmax_rows(probs.values()), test.labels())?;
    let ood_probs = classifier.predict_proba(ood).context("evaluate")?;
    let ood_conf = argmax_rows(ood_probs.values())
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    Ok(ModelEval {
        label: "identity".into(),
        in_samples,
        ood_conf,
    })
}

/// Loads a train/test pair from either source and widens both to a shared
/// class count.
fn load_train_test(
    cfg: &RunConfig,
    base: &Path,
) -> anyhow::Result<(LabeledDataset, LabeledDataset)> {
    match &cfg.dataset {
        DatasetSource::Synthetic(params) => {
            let spec = params.to_spec(derive_seed(cfg.seed, "dataset"));
            let full = data::gen_gaussian_blobs(&spec).context("dataset")?;
            Ok(
                data::train_test_split(&full, cfg.test_fraction, derive_seed(cfg.seed, "split"))
                    .context("dataset")?,
            )
        }
        DatasetSource::Csv { train, test } => {
            let train_set = data::load_csv(resolve(base, train)).context("dataset")?;
            let test_set = data::load_csv(resolve(base, test)).context("dataset")?;
            let n = train_set.num_classes().max(test_set.num_classes());
            let widen = |d: &LabeledDataset| {
                LabeledDataset::new(d.features().to_owned(), d.labels().to_vec(), n)
                    .context("dataset")
            };
            Ok((widen(&train_set)?, widen(&test_set)?))
        }
        DatasetSource::Predictions(_) => unreachable!("handled by the ingestion pipeline"),
    }
}

fn trained_pipeline(
    cfg: &RunConfig,
    base: &Path,
) -> anyhow::Result<(Vec<ModelEval>, usize, String)> {
    let ood = cfg
        .ood
        .as_ref()
        .context("dataset: trained runs need an 'ood' source")?;
    let (full_train, full_test) = load_train_test(cfg, base)?;

    // carve the in-distribution task and the OOD features
    let (train_set, test_set, ood_features) = match ood {
        OodSource::HoldoutClasses(holdout) => {
            anyhow::ensure!(!holdout.is_empty(), "dataset: holdout class list is empty");
            let keep: Vec<usize> = (0..full_train.num_classes())
                .filter(|c| !holdout.contains(c))
                .collect();
            anyhow::ensure!(
                keep.len() >= 2,
                "dataset: holding out {} classes leaves fewer than 2",
                holdout.len()
            );
            let train_set = data::split_by_classes(&full_train, &keep, true).context("dataset")?;
            let test_set = data::split_by_classes(&full_test, &keep, true).context("dataset")?;
            let ood_rows = data::split_by_classes(&full_test, holdout, false).context("dataset")?;
            anyhow::ensure!(
                !ood_rows.is_empty(),
                "dataset: no rows in the holdout classes"
            );
            (train_set, test_set, ood_rows.features().to_owned())
        }
        OodSource::UniformNoise { count, low, high } => {
            let noise = data::gen_uniform_noise(
                *count,
                full_train.dims(),
                *low,
                *high,
                derive_seed(cfg.seed, "ood"),
            )
            .context("dataset")?;
            (full_train, full_test, noise)
        }
        OodSource::Csv(path) => {
            let rows = data::load_csv(resolve(base, path)).context("dataset")?;
            (full_train, full_test, rows.features().to_owned())
        }
    };

    let spaces_ref = cfg
        .spaces
        .as_ref()
        .context("spaces: trained runs need a 'spaces' entry")?;
    let space_config = spaces_ref.resolve(base).context("spaces")?;
    let spec = space_config.to_spec().context("spaces")?;
    anyhow::ensure!(
        spec.num_classes() == train_set.num_classes(),
        "spaces: spec covers {} classes but the in-distribution task has {}",
        spec.num_classes(),
        train_set.num_classes()
    );

    let train_params = cfg.train.clone().unwrap_or_default();
    let ensemble = rectifier::build_fitted_ensemble(
        &train_set,
        &spec,
        &train_params.to_config(derive_seed(cfg.seed, "train")),
    )
    .context("train")?;

    let mut evals = vec![eval_ensemble(&ensemble, &test_set, ood_features.view())?];
    if let Some(identity) = ensemble.identity_classifier() {
        evals.push(eval_identity(identity, &test_set, ood_features.view())?);
    }
    Ok((evals, train_set.num_classes(), ood.name()))
}

fn load_members(
    files: &[MemberFiles],
    side: &str,
    base: &Path,
) -> anyhow::Result<Vec<MemberPrediction>> {
    anyhow::ensure!(!files.is_empty(), "dataset: {side} member list is empty");
    files
        .iter()
        .map(|f| {
            rectifier::load_member_prediction(resolve(base, &f.matrix), resolve(base, &f.space))
                .with_context(|| format!("dataset: loading {side} member {}", f.matrix.display()))
        })
        .collect()
}

fn ingest_pipeline(
    source: &config::PredictionsSource,
    base: &Path,
) -> anyhow::Result<(Vec<ModelEval>, usize, String)> {
    let n = source.num_classes;
    let in_members = load_members(&source.in_members, "in-distribution", base)?;
    let ood_members = load_members(&source.ood_members, "ood", base)?;
    anyhow::ensure!(
        in_members.len() == ood_members.len(),
        "dataset: {} in-distribution members vs {} ood members",
        in_members.len(),
        ood_members.len()
    );
    for (i, (a, b)) in in_members.iter().zip(&ood_members).enumerate() {
        anyhow::ensure!(
            a.space() == b.space(),
            "dataset: member {i}: in-distribution and ood spaces disagree"
        );
    }

    let in_scores = rectifier::rectify(&in_members, n).context("evaluate")?;
    let ood_conf = rectifier::rectify(&ood_members, n)
        .context("evaluate")?
        .confidences();

    let labels = source
        .labels
        .as_ref()
        .map(|p| config::load_labels(&resolve(base, p)))
        .transpose()
        .context("dataset")?;
    let in_samples = match &labels {
        Some(labels) => samples_with_labels(&in_scores.predict(), labels)?,
        None => in_scores
            .confidences()
            .into_iter()
            .map(|c| ConfidenceSample::new(c, true, None).context("evaluate"))
            .collect::<anyhow::Result<_>>()?,
    };
    let mut evals = vec![ModelEval {
        label: "fitted_ensemble".into(),
        in_samples,
        ood_conf,
    }];

    // an ingested identity-space member doubles as the plain baseline
    let identity = SuperclassSpace::identity(n);
    if let Some(pos) = in_members.iter().position(|m| m.space() == &identity) {
        let in_preds = argmax_rows(in_members[pos].matrix().values());
        let in_samples = match &labels {
            Some(labels) => samples_with_labels(&in_preds, labels)?,
            None => in_preds
                .into_iter()
                .map(|(_, c)| ConfidenceSample::new(c, true, None).context("evaluate"))
                .collect::<anyhow::Result<_>>()?,
        };
        let ood_conf = argmax_rows(ood_members[pos].matrix().values())
            .into_iter()
            .map(|(_, c)| c)
            .collect();
        evals.push(ModelEval {
            label: "identity".into(),
            in_samples,
            ood_conf,
        });
    }
    Ok((evals, n, "ingested".into()))
}

pub fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let raw = config::read_config_bytes(&args.config).context("config")?;
    let mut cfg = config::parse_run_config(&raw).context("config")?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("report: creating {}", args.out.display()))?;
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();

    let (evals, num_classes, ood_name) = match &cfg.dataset {
        DatasetSource::Predictions(source) => ingest_pipeline(source, &base)?,
        _ => trained_pipeline(&cfg, &base)?,
    };

    let mut outputs = Vec::new();
    let mut model_reports = Vec::new();
    let mut conf_entries = Vec::new();
    let mut ood_entries = Vec::new();
    for eval in &evals {
        let report = metrics::evaluate_ood(&eval.in_samples, &eval.ood_conf, cfg.histogram_bins)
            .context("evaluate")?;
        let hist_name = format!("histogram_{}.csv", eval.label);
        output::write_text(&metrics::histogram_csv(&report), &args.out.join(&hist_name))
            .context("report")?;
        outputs.push(hist_name);
        conf_entries.push((eval.label.clone(), report.stats.clone()));
        ood_entries.push((eval.label.clone(), report.clone()));
        model_reports.push(ModelReport {
            model: eval.label.clone(),
            ood_dataset: ood_name.clone(),
            n_in: report.n_in,
            n_out: report.n_out,
            fpr_at_95_tpr_pct: metrics::format_percent(report.fpr_at_95_tpr),
            auroc_pct: metrics::format_percent(report.auroc),
            detection_error_pct: metrics::format_percent(report.detection_error),
            metrics: report,
        });
    }

    let tables = format!(
        "Confidence statistics (in-distribution test set)\n{}\nOOD detection ({})\n{}",
        metrics::render_confidence_table(&conf_entries),
        ood_name,
        metrics::render_ood_table(&ood_entries),
    );
    output::write_text(&tables, &args.out.join("tables.txt")).context("report")?;
    outputs.push("tables.txt".into());

    let report = RunReport {
        num_classes,
        ood_dataset: ood_name,
        models: model_reports,
    };
    output::write_json(&report, &args.out.join("report.json")).context("report")?;
    outputs.push("report.json".into());

    outputs.push("manifest.json".into());
    output::write_manifest("run", &raw, cfg.seed, outputs, &args.out).context("report")?;

    if args.pretty {
        print!("{tables}");
    }
    Ok(())
}
