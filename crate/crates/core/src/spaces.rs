//! Superclass spaces, sequels, and fitted-ensemble specs.
//!
//! A superclass space is a partition of the original class set into disjoint
//! blocks ("superclasses"); each space defines a coarser classification
//! problem. A sequel is an ordered collection of spaces; it *resolves* the
//! original problem when every pair of distinct classes is separated by some
//! space. A fitted-ensemble spec lists the sequels whose spaces become the
//! ensemble's member problems, optionally together with the identity space
//! (every class its own block).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Errors from space construction, generation, and relabeling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("class {class} appears in more than one block")]
    Overlap { class: usize },
    #[error("class {class} is not covered by any block")]
    Coverage { class: usize },
    #[error("block {index} is empty")]
    EmptyBlock { index: usize },
    #[error("class {class} is out of range for {num_classes} classes")]
    UnknownClass { class: usize, num_classes: usize },
    #[error("need at least 2 classes, got {num_classes}")]
    TooFewClasses { num_classes: usize },
    #[error("class names must be unique and match the class count")]
    BadNames,
    #[error(
        "consecutive pairing needs an even class count, got {num_classes} (uneven not allowed)"
    )]
    OddClassCount { num_classes: usize },
    #[error("stride walk cannot pair class {class}: partner {partner} unavailable")]
    Pairing { class: usize, partner: usize },
    #[error("block size {block_size} is invalid for {num_classes} classes")]
    BadBlockSize {
        block_size: usize,
        num_classes: usize,
    },
    #[error("a sequel must contain at least one space")]
    EmptySequel,
    #[error("spaces in a sequel must share a class count ({expected} != {got})")]
    MixedClassCounts { expected: usize, got: usize },
    #[error("a fitted ensemble spec needs at least one sequel")]
    NoSequels,
}

/// The original class set: a class count plus optional display names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    num_classes: usize,
    names: Option<Vec<String>>,
}

impl ClassSet {
    pub fn new(num_classes: usize) -> Result<Self, SpaceError> {
        if num_classes < 2 {
            return Err(SpaceError::TooFewClasses { num_classes });
        }
        Ok(Self {
            num_classes,
            names: None,
        })
    }

    pub fn with_names(num_classes: usize, names: Vec<String>) -> Result<Self, SpaceError> {
        let mut set = Self::new(num_classes)?;
        if names.len() != num_classes {
            return Err(SpaceError::BadNames);
        }
        let distinct: BTreeSet<&str> = names.iter().map(|s| s.as_str()).collect();
        if distinct.len() != names.len() {
            return Err(SpaceError::BadNames);
        }
        set.names = Some(names);
        Ok(set)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }
}

/// A partition of the class indices `0..num_classes` into disjoint,
/// non-empty blocks.
///
/// Stored in canonical form: indices ascending within each block, blocks
/// ordered by their minimum index. Canonical form makes spaces comparable
/// and serialized output reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperclassSpace {
    blocks: Vec<Vec<usize>>,
    num_classes: usize,
    class_to_block: Vec<usize>,
}

impl SuperclassSpace {
    /// Builds a space from explicit blocks, validating the partition
    /// property and canonicalizing the result.
    pub fn new(blocks: Vec<Vec<usize>>, num_classes: usize) -> Result<Self, SpaceError> {
        Self::validate_blocks(&blocks, num_classes)?;
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        let mut class_to_block = vec![0usize; num_classes];
        for (i, block) in blocks.iter().enumerate() {
            for &class in block {
                class_to_block[class] = i;
            }
        }
        Ok(Self {
            blocks,
            num_classes,
            class_to_block,
        })
    }

    /// Checks that `blocks` form a partition of `0..num_classes`: every
    /// block non-empty, no class in two blocks, every class in some block.
    pub fn validate_blocks(blocks: &[Vec<usize>], num_classes: usize) -> Result<(), SpaceError> {
        if num_classes == 0 {
            return Err(SpaceError::TooFewClasses { num_classes });
        }
        let mut seen = vec![false; num_classes];
        for (index, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(SpaceError::EmptyBlock { index });
            }
            for &class in block {
                if class >= num_classes {
                    return Err(SpaceError::UnknownClass { class, num_classes });
                }
                if seen[class] {
                    return Err(SpaceError::Overlap { class });
                }
                seen[class] = true;
            }
        }
        if let Some(class) = seen.iter().position(|&s| !s) {
            return Err(SpaceError::Coverage { class });
        }
        Ok(())
    }

    /// The discrete partition: every class is its own block, in index order.
    pub fn identity(num_classes: usize) -> Self {
        let blocks: Vec<Vec<usize>> = (0..num_classes).map(|c| vec![c]).collect();
        Self::new(blocks, num_classes).expect("identity partition is always valid")
    }

    /// Pairs consecutive classes `{offset+2i, offset+2i+1}` (mod n).
    ///
    /// Odd class counts are rejected unless `allow_uneven` is set, in which
    /// case the final block takes three classes instead of two.
    pub fn consecutive_pairs(
        num_classes: usize,
        offset: usize,
        allow_uneven: bool,
    ) -> Result<Self, SpaceError> {
        if num_classes < 2 {
            return Err(SpaceError::TooFewClasses { num_classes });
        }
        let n = num_classes;
        let mut blocks = Vec::new();
        if n.is_multiple_of(2) {
            for i in 0..n / 2 {
                blocks.push(vec![(offset + 2 * i) % n, (offset + 2 * i + 1) % n]);
            }
        } else if allow_uneven {
            for i in 0..(n - 3) / 2 {
                blocks.push(vec![(offset + 2 * i) % n, (offset + 2 * i + 1) % n]);
            }
            blocks.push(vec![
                (offset + n - 3) % n,
                (offset + n - 2) % n,
                (offset + n - 1) % n,
            ]);
        } else {
            return Err(SpaceError::OddClassCount { num_classes });
        }
        Self::new(blocks, n)
    }

    /// Pairs each class `k` with `(k + stride) mod n`, greedily over the
    /// still-unpaired classes visited in ascending order from `offset`.
    pub fn strided_pairs(
        num_classes: usize,
        stride: usize,
        offset: usize,
    ) -> Result<Self, SpaceError> {
        if num_classes < 2 {
            return Err(SpaceError::TooFewClasses { num_classes });
        }
        let n = num_classes;
        let mut paired = vec![false; n];
        let mut blocks = Vec::with_capacity(n / 2);
        for t in 0..n {
            let class = (offset + t) % n;
            if paired[class] {
                continue;
            }
            let partner = (class + stride) % n;
            if partner == class || paired[partner] {
                return Err(SpaceError::Pairing { class, partner });
            }
            paired[class] = true;
            paired[partner] = true;
            blocks.push(vec![class, partner]);
        }
        Self::new(blocks, n)
    }

    /// Shuffles the class indices with a seeded generator and slices
    /// consecutive runs of `block_size`; the leftover classes form a final,
    /// smaller block when `block_size` does not divide `n`.
    pub fn random_partition(
        num_classes: usize,
        block_size: usize,
        seed: u64,
    ) -> Result<Self, SpaceError> {
        if num_classes < 2 {
            return Err(SpaceError::TooFewClasses { num_classes });
        }
        if block_size == 0 || block_size > num_classes {
            return Err(SpaceError::BadBlockSize {
                block_size,
                num_classes,
            });
        }
        let mut indices: Vec<usize> = (0..num_classes).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let blocks: Vec<Vec<usize>> = indices.chunks(block_size).map(|c| c.to_vec()).collect();
        Self::new(blocks, num_classes)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Index of the unique block containing `class`.
    pub fn block_of(&self, class: usize) -> Result<usize, SpaceError> {
        if class >= self.num_classes {
            return Err(SpaceError::UnknownClass {
                class,
                num_classes: self.num_classes,
            });
        }
        Ok(self.class_to_block[class])
    }

    /// Maps class labels to the indices of their containing blocks.
    pub fn relabel(&self, labels: &[usize]) -> Result<Vec<usize>, SpaceError> {
        labels.iter().map(|&label| self.block_of(label)).collect()
    }
}

/// An ordered, non-empty collection of superclass spaces over one class set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequel {
    spaces: Vec<SuperclassSpace>,
    num_classes: usize,
}

impl Sequel {
    pub fn new(spaces: Vec<SuperclassSpace>) -> Result<Self, SpaceError> {
        let first = spaces.first().ok_or(SpaceError::EmptySequel)?;
        let num_classes = first.num_classes();
        for space in &spaces {
            if space.num_classes() != num_classes {
                return Err(SpaceError::MixedClassCounts {
                    expected: num_classes,
                    got: space.num_classes(),
                });
            }
        }
        Ok(Self {
            spaces,
            num_classes,
        })
    }

    pub fn spaces(&self) -> &[SuperclassSpace] {
        &self.spaces
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// True when the spaces jointly pin down every original class: for every
    /// pair of distinct classes some space puts them in different blocks.
    ///
    /// Equivalently, the meet of the partitions is the discrete partition,
    /// which holds exactly when the per-class vectors of block memberships
    /// are pairwise distinct.
    pub fn is_resolving(&self) -> bool {
        let signatures: BTreeSet<Vec<usize>> = (0..self.num_classes)
            .map(|class| {
                self.spaces
                    .iter()
                    .map(|space| space.class_to_block[class])
                    .collect()
            })
            .collect();
        signatures.len() == self.num_classes
    }
}

/// The recipe for a fitted ensemble: one member problem per space in each
/// sequel, plus the original per-class problem when `include_identity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FittedEnsembleSpec {
    class_set: ClassSet,
    sequels: Vec<Sequel>,
    include_identity: bool,
}

impl FittedEnsembleSpec {
    pub fn new(
        class_set: ClassSet,
        sequels: Vec<Sequel>,
        include_identity: bool,
    ) -> Result<Self, SpaceError> {
        if sequels.is_empty() {
            return Err(SpaceError::NoSequels);
        }
        for sequel in &sequels {
            if sequel.num_classes() != class_set.num_classes() {
                return Err(SpaceError::MixedClassCounts {
                    expected: class_set.num_classes(),
                    got: sequel.num_classes(),
                });
            }
        }
        Ok(Self {
            class_set,
            sequels,
            include_identity,
        })
    }

    pub fn class_set(&self) -> &ClassSet {
        &self.class_set
    }

    pub fn num_classes(&self) -> usize {
        self.class_set.num_classes()
    }

    pub fn sequels(&self) -> &[Sequel] {
        &self.sequels
    }

    pub fn include_identity(&self) -> bool {
        self.include_identity
    }

    /// Member spaces in training order: sequel-major, space-minor, with the
    /// identity space last when included.
    pub fn member_spaces(&self) -> Vec<SuperclassSpace> {
        let mut spaces: Vec<SuperclassSpace> = self
            .sequels
            .iter()
            .flat_map(|sequel| sequel.spaces().iter().cloned())
            .collect();
        if self.include_identity {
            spaces.push(SuperclassSpace::identity(self.num_classes()));
        }
        spaces
    }

    pub fn num_members(&self) -> usize {
        let base: usize = self.sequels.iter().map(|s| s.spaces().len()).sum();
        base + usize::from(self.include_identity)
    }
}

/// File form of a space/sequel configuration.
///
/// Layout: `num_classes`, then `sequels` as a list of sequels, each sequel a
/// list of spaces, each space a list of blocks, each block a list of class
/// indices. Serialization through [`SpaceConfig::to_canonical_json`] is
/// byte-stable under a parse/serialize round trip for canonical-form input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub num_classes: usize,
    pub sequels: Vec<Vec<Vec<Vec<usize>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_identity: Option<bool>,
}

impl SpaceConfig {
    pub fn from_spec(spec: &FittedEnsembleSpec) -> Self {
        Self {
            num_classes: spec.num_classes(),
            sequels: spec
                .sequels()
                .iter()
                .map(|sequel| {
                    sequel
                        .spaces()
                        .iter()
                        .map(|space| space.blocks().to_vec())
                        .collect()
                })
                .collect(),
            include_identity: Some(spec.include_identity()),
        }
    }

    /// Validates and assembles the configured spec. `include_identity`
    /// defaults to false when absent.
    pub fn to_spec(&self) -> Result<FittedEnsembleSpec, SpaceError> {
        let class_set = ClassSet::new(self.num_classes)?;
        let sequels = self
            .sequels
            .iter()
            .map(|spaces| {
                let spaces = spaces
                    .iter()
                    .map(|blocks| SuperclassSpace::new(blocks.clone(), self.num_classes))
                    .collect::<Result<Vec<_>, _>>()?;
                Sequel::new(spaces)
            })
            .collect::<Result<Vec<_>, _>>()?;
        FittedEnsembleSpec::new(class_set, sequels, self.include_identity.unwrap_or(false))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Pretty JSON with a trailing newline; the canonical on-disk form.
    pub fn to_canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }
}
