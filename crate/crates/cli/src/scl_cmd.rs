//! `fitens scl`: separable-concept-learning experiments over one or more
//! partitions, with per-run results and mean/std aggregates across seeds.

use crate::config::{
    self, BuilderChoice, DatasetSource, FittedBuilderConfig, PartitionSource, SclConfig,
};
use crate::output;
use crate::run_cmd::RunArgs;
use anyhow::Context;
use clap::Args;
use fitens_core::data::{self, LabeledDataset};
use fitens_core::metrics::format_percent;
use fitens_core::scl::{self, SclBuilder, SclPartition, SclResult};
use fitens_core::seed::derive_seed;
use serde::Serialize;
use std::path::Path;

#[derive(Args)]
pub struct SclArgs {
    #[command(flatten)]
    pub common: RunArgs,
    /// Override the config's partition source with seeded sampling
    /// (use together with --count and --min-part-size)
    #[arg(long, value_parser = ["sample"])]
    pub partitions: Option<String>,
    /// Number of partitions to sample
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Smallest allowed part when sampling
    #[arg(long, default_value_t = 2)]
    pub min_part_size: usize,
}

#[derive(Serialize)]
struct SclRunRecord {
    partition_index: usize,
    builder: String,
    run: usize,
    result: SclResult,
}

#[derive(Serialize)]
struct SclAggregate {
    partition_index: usize,
    partition: Vec<Vec<usize>>,
    builder: String,
    runs: usize,
    scl_accuracy_mean: f64,
    scl_accuracy_std: f64,
    routed_bound_mean: f64,
    routed_bound_std: f64,
    gap_mean: f64,
}

#[derive(Serialize)]
struct SclReport {
    num_classes: usize,
    runs: usize,
    records: Vec<SclRunRecord>,
    aggregates: Vec<SclAggregate>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn load_train_test(
    cfg: &SclConfig,
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
            let resolve = |p: &Path| {
                if p.is_relative() {
                    base.join(p)
                } else {
                    p.to_path_buf()
                }
            };
            let train_set = data::load_csv(resolve(train)).context("dataset")?;
            let test_set = data::load_csv(resolve(test)).context("dataset")?;
            let n = train_set.num_classes().max(test_set.num_classes());
            let widen = |d: &LabeledDataset| {
                LabeledDataset::new(d.features().to_owned(), d.labels().to_vec(), n)
                    .context("dataset")
            };
            Ok((widen(&train_set)?, widen(&test_set)?))
        }
        DatasetSource::Predictions(_) => {
            anyhow::bail!("dataset: prediction matrices cannot drive an SCL run")
        }
    }
}

fn resolve_builder(choice: BuilderChoice, cfg: &SclConfig) -> anyhow::Result<SclBuilder> {
    match choice {
        BuilderChoice::Plain => Ok(SclBuilder::Plain),
        BuilderChoice::Fitted => match &cfg.fitted {
            Some(FittedBuilderConfig::Scheme(scheme)) => {
                Ok(SclBuilder::FittedScheme(scheme.clone()))
            }
            Some(FittedBuilderConfig::ExplicitSpecs(configs)) => {
                let specs = configs
                    .iter()
                    .map(|c| c.to_spec())
                    .collect::<Result<Vec<_>, _>>()
                    .context("scl: building explicit per-part specs")?;
                Ok(SclBuilder::FittedExplicit(specs))
            }
            // consecutive pairs at offsets 0 and 1 plus the identity problem
            None => Ok(SclBuilder::FittedScheme(scl::FittedScheme {
                offsets: vec![0, 1],
                include_identity: true,
                allow_uneven: true,
            })),
        },
    }
}

pub fn cmd_scl(args: SclArgs) -> anyhow::Result<()> {
    let sampling_override = args
        .partitions
        .is_some()
        .then_some(PartitionSource::Sample {
            count: args.count,
            min_part_size: args.min_part_size,
        });
    let args = args.common;
    let raw = config::read_config_bytes(&args.config).context("config")?;
    let mut cfg = config::parse_scl_config(&raw).context("config")?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(source) = sampling_override {
        cfg.partitions = source;
    }
    anyhow::ensure!(!cfg.builders.is_empty(), "config: 'builders' is empty");
    anyhow::ensure!(cfg.runs >= 1, "config: 'runs' must be at least 1");
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("report: creating {}", args.out.display()))?;
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();

    let (train_set, test_set) = load_train_test(&cfg, &base)?;
    let num_classes = train_set.num_classes();

    let partitions: Vec<SclPartition> = match &cfg.partitions {
        PartitionSource::Explicit(list) => list
            .iter()
            .map(|parts| SclPartition::new(parts.clone(), num_classes))
            .collect::<Result<_, _>>()
            .context("partitions")?,
        PartitionSource::Sample {
            count,
            min_part_size,
        } => scl::sample_partitions(
            num_classes,
            *count,
            *min_part_size,
            derive_seed(cfg.seed, "partitions"),
        )
        .context("partitions")?,
    };

    let train_params = cfg.train.clone().unwrap_or_default();
    let mut records = Vec::new();
    for run in 0..cfg.runs {
        for (pi, partition) in partitions.iter().enumerate() {
            let run_seed = derive_seed(cfg.seed, &format!("scl/run/{run}/partition/{pi}"));
            for &choice in &cfg.builders {
                let builder = resolve_builder(choice, &cfg)?;
                let result = scl::run_scl_experiment(
                    &train_set,
                    partition,
                    &builder,
                    &train_params.to_config(run_seed),
                    &test_set,
                )
                .with_context(|| {
                    format!("scl: partition {pi}, builder {}, run {run}", choice.label())
                })?;
                records.push(SclRunRecord {
                    partition_index: pi,
                    builder: choice.label().to_string(),
                    run,
                    result,
                });
            }
        }
    }

    let mut aggregates = Vec::new();
    for (pi, partition) in partitions.iter().enumerate() {
        for &choice in &cfg.builders {
            let group: Vec<&SclRunRecord> = records
                .iter()
                .filter(|r| r.partition_index == pi && r.builder == choice.label())
                .collect();
            let scl_values: Vec<f64> = group.iter().map(|r| r.result.scl_accuracy).collect();
            let routed: Vec<f64> = group
                .iter()
                .map(|r| r.result.routed_accuracy_bound)
                .collect();
            let gaps: Vec<f64> = group.iter().map(|r| r.result.gap).collect();
            let (scl_mean, scl_std) = mean_std(&scl_values);
            let (routed_mean, routed_std) = mean_std(&routed);
            aggregates.push(SclAggregate {
                partition_index: pi,
                partition: partition.parts().to_vec(),
                builder: choice.label().to_string(),
                runs: group.len(),
                scl_accuracy_mean: scl_mean,
                scl_accuracy_std: scl_std,
                routed_bound_mean: routed_mean,
                routed_bound_std: routed_std,
                gap_mean: gaps.iter().sum::<f64>() / gaps.len() as f64,
            });
        }
    }

    // comparison table: one row per partition, one column per builder,
    // SCL accuracy as mean (std) percentages
    let mut table = String::new();
    let header: Vec<String> = std::iter::once("partition".to_string())
        .chain(cfg.builders.iter().map(|b| format!("{} (std)", b.label())))
        .collect();
    table.push_str(&header.join(" | "));
    table.push('\n');
    for (pi, _) in partitions.iter().enumerate() {
        let mut cells = vec![format!("{pi:<9}")];
        for &choice in &cfg.builders {
            let agg = aggregates
                .iter()
                .find(|a| a.partition_index == pi && a.builder == choice.label())
                .expect("aggregate exists for every pair");
            cells.push(format!(
                "{} ({})",
                format_percent(agg.scl_accuracy_mean),
                format_percent(agg.scl_accuracy_std)
            ));
        }
        table.push_str(&cells.join(" | "));
        table.push('\n');
    }

    let report = SclReport {
        num_classes,
        runs: cfg.runs,
        records,
        aggregates,
    };
    output::write_json(&report, &args.out.join("scl_report.json")).context("report")?;
    output::write_text(&table, &args.out.join("scl_tables.txt")).context("report")?;
    output::write_manifest(
        "scl",
        &raw,
        cfg.seed,
        vec![
            "scl_report.json".into(),
            "scl_tables.txt".into(),
            "manifest.json".into(),
        ],
        &args.out,
    )
    .context("report")?;

    if args.pretty {
        print!("{table}");
    }
    Ok(())
}
