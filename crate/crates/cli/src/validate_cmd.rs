//! `fitens validate`: parse and cross-check configs and data files without
//! training or evaluating anything.

use crate::config::{self, DatasetSource, FittedBuilderConfig, PartitionSource};
use anyhow::Context;
use clap::Args;
use fitens_core::data;
use fitens_core::rectifier;
use fitens_core::scl::SclPartition;
use fitens_core::spaces::SpaceConfig;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ValidateArgs {
    /// A `fitens run` config to check
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// A `fitens scl` config to check
    #[arg(long)]
    pub scl: Option<PathBuf>,
    /// A space/sequel config file to check
    #[arg(long)]
    pub spaces: Option<PathBuf>,
    /// A prediction-matrix CSV to check (needs --sidecar)
    #[arg(long, requires = "sidecar")]
    pub matrix: Option<PathBuf>,
    /// The space sidecar bound to --matrix
    #[arg(long, requires = "matrix")]
    pub sidecar: Option<PathBuf>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_relative() {
        base.join(path)
    } else {
        path.to_path_buf()
    }
}

fn validate_spaces_file(path: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("spaces: reading {}", path.display()))?;
    let config = SpaceConfig::from_json(&text)
        .with_context(|| format!("spaces: parsing {}", path.display()))?;
    let spec = config.to_spec().context("spaces: validating")?;
    println!(
        "ok: {} ({} classes, {} members)",
        path.display(),
        spec.num_classes(),
        spec.num_members()
    );
    for (i, sequel) in spec.sequels().iter().enumerate() {
        println!(
            "  sequel {i}: {} spaces, resolving: {}",
            sequel.spaces().len(),
            sequel.is_resolving()
        );
    }
    Ok(())
}

fn validate_dataset(source: &DatasetSource, base: &Path) -> anyhow::Result<usize> {
    match source {
        DatasetSource::Synthetic(params) => {
            // a one-point generation exercises the spec checks
            let probe = config::SyntheticParams {
                per_class_count: 1,
                ..params.clone()
            };
            let data = data::gen_gaussian_blobs(&probe.to_spec(0)).context("dataset")?;
            println!(
                "ok: synthetic spec ({} classes, {} dims)",
                params.num_classes, params.dims
            );
            Ok(data.num_classes())
        }
        DatasetSource::Csv { train, test } => {
            let train_set = data::load_csv(resolve(base, train)).context("dataset: train csv")?;
            let test_set = data::load_csv(resolve(base, test)).context("dataset: test csv")?;
            println!(
                "ok: csv dataset (train {} rows, test {} rows)",
                train_set.len(),
                test_set.len()
            );
            Ok(train_set.num_classes().max(test_set.num_classes()))
        }
        DatasetSource::Predictions(source) => {
            for member in source.in_members.iter().chain(&source.ood_members) {
                rectifier::load_member_prediction(
                    resolve(base, &member.matrix),
                    resolve(base, &member.space),
                )
                .with_context(|| format!("dataset: member {}", member.matrix.display()))?;
            }
            if let Some(labels) = &source.labels {
                config::load_labels(&resolve(base, labels)).context("dataset: labels")?;
            }
            println!(
                "ok: prediction members ({} in-distribution, {} ood)",
                source.in_members.len(),
                source.ood_members.len()
            );
            Ok(source.num_classes)
        }
    }
}

fn validate_run_config(path: &Path) -> anyhow::Result<()> {
    let raw = config::read_config_bytes(path)?;
    let cfg = config::parse_run_config(&raw).context("config")?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    validate_dataset(&cfg.dataset, &base)?;
    if let Some(spaces) = &cfg.spaces {
        let space_config = spaces.resolve(&base).context("spaces")?;
        let spec = space_config.to_spec().context("spaces")?;
        println!(
            "ok: spaces ({} members over {} classes)",
            spec.num_members(),
            spec.num_classes()
        );
    } else if !matches!(cfg.dataset, DatasetSource::Predictions(_)) {
        anyhow::bail!("spaces: trained runs need a 'spaces' entry");
    }
    if cfg.ood.is_none() && !matches!(cfg.dataset, DatasetSource::Predictions(_)) {
        anyhow::bail!("dataset: trained runs need an 'ood' source");
    }
    println!("ok: run config {}", path.display());
    Ok(())
}

fn validate_scl_config(path: &Path) -> anyhow::Result<()> {
    let raw = config::read_config_bytes(path)?;
    let cfg = config::parse_scl_config(&raw).context("config")?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let num_classes = validate_dataset(&cfg.dataset, &base)?;
    match &cfg.partitions {
        PartitionSource::Explicit(list) => {
            for (i, parts) in list.iter().enumerate() {
                SclPartition::new(parts.clone(), num_classes)
                    .with_context(|| format!("partitions: partition {i}"))?;
            }
            println!("ok: {} explicit partitions", list.len());
        }
        PartitionSource::Sample {
            count,
            min_part_size,
        } => {
            fitens_core::scl::sample_partitions(num_classes, 1, *min_part_size, 0)
                .context("partitions")?;
            println!("ok: sampling {count} partitions (min part size {min_part_size})");
        }
    }
    if let Some(FittedBuilderConfig::ExplicitSpecs(configs)) = &cfg.fitted {
        for (i, c) in configs.iter().enumerate() {
            c.to_spec()
                .with_context(|| format!("scl: fitted spec {i}"))?;
        }
    }
    println!("ok: scl config {}", path.display());
    Ok(())
}

pub fn cmd_validate(args: ValidateArgs) -> anyhow::Result<()> {
    let mut checked = false;
    if let Some(path) = &args.spaces {
        validate_spaces_file(path)?;
        checked = true;
    }
    if let Some(path) = &args.run {
        validate_run_config(path)?;
        checked = true;
    }
    if let Some(path) = &args.scl {
        validate_scl_config(path)?;
        checked = true;
    }
    if let (Some(matrix), Some(sidecar)) = (&args.matrix, &args.sidecar) {
        let member = rectifier::load_member_prediction(matrix, sidecar)
            .with_context(|| format!("matrix: {}", matrix.display()))?;
        println!(
            "ok: {} ({} rows, {} blocks)",
            matrix.display(),
            member.matrix().rows(),
            member.space().num_blocks()
        );
        checked = true;
    }
    anyhow::ensure!(
        checked,
        "validate: nothing to check; pass --run, --scl, --spaces, or --matrix/--sidecar"
    );
    Ok(())
}
