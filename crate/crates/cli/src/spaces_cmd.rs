//! `fitens spaces`: generate a superclass-space config file.

use anyhow::Context;
use clap::Args;
use fitens_core::spaces::{SpaceConfig, SuperclassSpace};
use std::path::PathBuf;

#[derive(Debug, Clone, clap::ValueEnum)]
pub enum Scheme {
    /// Pair consecutive classes starting at --offset
    Consecutive,
    /// Pair class k with k + --stride, walking from --offset
    Strided,
    /// Seeded random partition into blocks of --block-size
    Random,
    /// Blocks given literally via --blocks
    Explicit,
}

#[derive(Args)]
pub struct SpacesArgs {
    /// Number of classes
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Starting class for the pair schemes
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    /// Pair distance for the strided scheme
    #[arg(long, default_value_t = 2)]
    pub stride: usize,
    /// Block size for the random scheme
    #[arg(long, default_value_t = 2)]
    pub block_size: usize,
    /// Seed for the random scheme
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow a final block of three when the class count is odd
    #[arg(long)]
    pub uneven: bool,
    /// Explicit blocks, class indices comma-separated, blocks by semicolon:
    /// "0,3;1,2"
    #[arg(long)]
    pub blocks: Option<String>,
    /// Mark the emitted config as including the identity problem
    #[arg(long)]
    pub include_identity: bool,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_blocks(text: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    text.split(';')
        .map(|block| {
            block
                .split(',')
                .map(|idx| {
                    idx.trim()
                        .parse::<usize>()
                        .with_context(|| format!("bad class index {idx:?}"))
                })
                .collect()
        })
        .collect()
}

pub fn cmd_spaces(args: SpacesArgs) -> anyhow::Result<()> {
    let space = match args.scheme {
        Scheme::Consecutive => SuperclassSpace::consecutive_pairs(args.n, args.offset, args.uneven),
        Scheme::Strided => SuperclassSpace::strided_pairs(args.n, args.stride, args.offset),
        Scheme::Random => SuperclassSpace::random_partition(args.n, args.block_size, args.seed),
        Scheme::Explicit => {
            let text = args
                .blocks
                .as_deref()
                .context("spaces: --blocks is required for the explicit scheme")?;
            let blocks = parse_blocks(text).context("spaces: parsing --blocks")?;
            SuperclassSpace::new(blocks, args.n)
        }
    }
    .context("spaces: generating")?;
    let config = SpaceConfig {
        num_classes: args.n,
        sequels: vec![vec![space.blocks().to_vec()]],
        include_identity: args.include_identity.then_some(true),
    };
    let text = config.to_canonical_json();
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("spaces: writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
