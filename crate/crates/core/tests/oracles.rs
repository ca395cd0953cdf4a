//! Independent brute-force oracles for rectification and the detection
//! metrics, plus the exact invariants they pin down. The oracles recompute
//! everything by direct scanning and share none of the library's lookup
//! structures.

use fitens_core::metrics::{auroc, detection_error, fpr_at_tpr};
use fitens_core::rectifier::{rectify, MemberPrediction, PredictionMatrix};
use fitens_core::scl::{concat_scores, SclPartition};
use fitens_core::spaces::SuperclassSpace;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_member(rng: &mut ChaCha8Rng, num_classes: usize, rows: usize) -> MemberPrediction {
    let block_size = rng.random_range(1..=num_classes);
    let space = SuperclassSpace::random_partition(num_classes, block_size, rng.random()).unwrap();
    let cols = space.num_blocks();
    let mut values = Array2::zeros((rows, cols));
    for r in 0..rows {
        let raw: Vec<f64> = (0..cols).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for (c, &v) in raw.iter().enumerate() {
            values[[r, c]] = v / total;
        }
    }
    MemberPrediction::new(space, PredictionMatrix::new(values).unwrap()).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<MemberPrediction>, usize, usize) {
    let num_classes = rng.random_range(2..=8);
    let rows = rng.random_range(1..=50);
    let member_count = rng.random_range(1..=5);
    let members: Vec<MemberPrediction> = (0..member_count)
        .map(|_| random_member(rng, num_classes, rows))
        .collect();
    (members, num_classes, rows)
}

/// Re-derives the min rule by scanning every (member, block) membership.
fn rectify_oracle(members: &[MemberPrediction], num_classes: usize, rows: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0f64; num_classes]; rows];
    for member in members {
        let blocks = member.space().blocks();
        for (row, scores) in out.iter_mut().enumerate() {
            for (class, score) in scores.iter_mut().enumerate() {
                let block = blocks
                    .iter()
                    .position(|b| b.contains(&class))
                    .expect("partition covers every class");
                let bound = member.matrix().values()[[row, block]];
                if bound < *score {
                    *score = bound;
                }
            }
        }
    }
    out
}

#[test]
fn rectify_matches_the_brute_force_oracle_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(1101);
    for _ in 0..200 {
        let (members, num_classes, rows) = random_instance(&mut rng);
        let got = rectify(&members, num_classes).unwrap();
        let want = rectify_oracle(&members, num_classes, rows);
        for (row, want_row) in want.iter().enumerate() {
            for (class, &want_value) in want_row.iter().enumerate() {
                assert_eq!(got.values()[[row, class]], want_value);
            }
        }
    }
}

#[test]
fn rectified_scores_satisfy_every_member_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(1102);
    for _ in 0..100 {
        let (members, num_classes, rows) = random_instance(&mut rng);
        let scores = rectify(&members, num_classes).unwrap();
        for member in &members {
            for row in 0..rows {
                for class in 0..num_classes {
                    let block = member.space().block_of(class).unwrap();
                    assert!(
                        scores.values()[[row, class]] <= member.matrix().values()[[row, block]]
                    );
                }
            }
        }
    }
}

#[test]
fn appending_a_member_never_raises_a_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(1103);
    for _ in 0..100 {
        let (members, num_classes, rows) = random_instance(&mut rng);
        let base = rectify(&members, num_classes).unwrap();
        let mut extended = members.clone();
        extended.push(random_member(&mut rng, num_classes, rows));
        let more = rectify(&extended, num_classes).unwrap();
        for (a, b) in base.values().iter().zip(more.values().iter()) {
            assert!(b <= a);
        }
    }
}

#[test]
fn rectification_is_order_independent_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1104);
    for _ in 0..100 {
        let (mut members, num_classes, _) = random_instance(&mut rng);
        let base = rectify(&members, num_classes).unwrap();
        // duplicated member list: min is idempotent
        let doubled: Vec<MemberPrediction> =
            members.iter().chain(members.iter()).cloned().collect();
        assert_eq!(rectify(&doubled, num_classes).unwrap(), base);
        // permuted member list: min is commutative
        for _ in 0..3 {
            let i = rng.random_range(0..members.len());
            let j = rng.random_range(0..members.len());
            members.swap(i, j);
        }
        assert_eq!(rectify(&members, num_classes).unwrap(), base);
    }
}

#[test]
fn identity_member_caps_the_maximum_confidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1105);
    for _ in 0..100 {
        let (mut members, num_classes, rows) = random_instance(&mut rng);
        let identity = {
            let space = SuperclassSpace::identity(num_classes);
            let mut values = Array2::zeros((rows, num_classes));
            for r in 0..rows {
                let raw: Vec<f64> = (0..num_classes)
                    .map(|_| rng.random_range(0.01..1.0))
                    .collect();
                let total: f64 = raw.iter().sum();
                for (c, &v) in raw.iter().enumerate() {
                    values[[r, c]] = v / total;
                }
            }
            MemberPrediction::new(space, PredictionMatrix::new(values).unwrap()).unwrap()
        };
        members.push(identity.clone());
        let scores = rectify(&members, num_classes).unwrap();
        for (row, (_, confidence)) in scores.predict().into_iter().enumerate() {
            let identity_max = identity
                .matrix()
                .values()
                .row(row)
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(confidence <= identity_max);
        }
    }
}

// --- metric oracles -------------------------------------------------------

fn fpr_oracle(in_conf: &[f64], out_conf: &[f64], target: f64) -> f64 {
    let n = in_conf.len() as f64;
    let mut best: Option<f64> = None;
    for &t in in_conf {
        let coverage = in_conf.iter().filter(|&&c| c >= t).count() as f64 / n;
        if coverage >= target {
            best = Some(match best {
                Some(b) if b >= t => b,
                _ => t,
            });
        }
    }
    let t = best.expect("minimum confidence reaches full coverage");
    out_conf.iter().filter(|&&c| c >= t).count() as f64 / out_conf.len() as f64
}

fn auroc_oracle(in_conf: &[f64], out_conf: &[f64]) -> f64 {
    let mut wins = 0u64;
    let mut ties = 0u64;
    for &a in in_conf {
        for &b in out_conf {
            if a > b {
                wins += 1;
            } else if a == b {
                ties += 1;
            }
        }
    }
    let numerator = 2 * wins + ties;
    let denominator = 2 * in_conf.len() as u64 * out_conf.len() as u64;
    if 2 * numerator <= denominator {
        numerator as f64 / denominator as f64
    } else {
        1.0 - (denominator - numerator) as f64 / denominator as f64
    }
}

fn detection_oracle(in_conf: &[f64], out_conf: &[f64]) -> f64 {
    let n = in_conf.len() as f64;
    let m = out_conf.len() as f64;
    let mut candidates: Vec<f64> = in_conf.iter().chain(out_conf).copied().collect();
    candidates.push(f64::NEG_INFINITY);
    candidates.push(f64::INFINITY);
    let mut best = f64::INFINITY;
    for &t in &candidates {
        let missed_in = in_conf.iter().filter(|&&c| c < t).count() as f64;
        let passed_out = out_conf.iter().filter(|&&c| c >= t).count() as f64;
        let error = 0.5 * (missed_in / n) + 0.5 * (passed_out / m);
        if error < best {
            best = error;
        }
    }
    best
}

fn random_conf_list(rng: &mut ChaCha8Rng, tie_heavy: bool) -> Vec<f64> {
    let len = rng.random_range(1..=200);
    (0..len)
        .map(|_| {
            if tie_heavy {
                rng.random_range(0..=8) as f64 / 8.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect()
}

#[test]
fn metrics_match_their_threshold_scan_oracles_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..300 {
        let tie_heavy = round % 2 == 0;
        let inside = random_conf_list(&mut rng, tie_heavy);
        let outside = random_conf_list(&mut rng, tie_heavy);
        assert_eq!(
            fpr_at_tpr(&inside, &outside, 0.95).unwrap(),
            fpr_oracle(&inside, &outside, 0.95)
        );
        assert_eq!(
            auroc(&inside, &outside).unwrap(),
            auroc_oracle(&inside, &outside)
        );
        assert_eq!(
            detection_error(&inside, &outside).unwrap(),
            detection_oracle(&inside, &outside)
        );
        assert_eq!(
            auroc(&inside, &outside).unwrap() + auroc(&outside, &inside).unwrap(),
            1.0
        );
        assert!(detection_error(&inside, &outside).unwrap() <= 0.5);
    }
}

proptest! {
    #[test]
    fn auroc_symmetry_holds_exactly(
        a in proptest::collection::vec(0..=16u8, 1..60),
        b in proptest::collection::vec(0..=16u8, 1..60),
    ) {
        let a: Vec<f64> = a.into_iter().map(|v| v as f64 / 16.0).collect();
        let b: Vec<f64> = b.into_iter().map(|v| v as f64 / 16.0).collect();
        prop_assert_eq!(auroc(&a, &b).unwrap() + auroc(&b, &a).unwrap(), 1.0);
    }

    #[test]
    fn fpr_is_non_decreasing_in_the_target(
        a in proptest::collection::vec(0..=1024u16, 1..80),
        b in proptest::collection::vec(0..=1024u16, 1..80),
    ) {
        let a: Vec<f64> = a.into_iter().map(|v| v as f64 / 1024.0).collect();
        let b: Vec<f64> = b.into_iter().map(|v| v as f64 / 1024.0).collect();
        let mut previous = 0.0;
        for step in 1..=20 {
            let target = step as f64 / 20.0;
            let fpr = fpr_at_tpr(&a, &b, target).unwrap();
            prop_assert!(fpr >= previous);
            previous = fpr;
        }
    }

    #[test]
    fn metrics_ignore_input_order(
        a in proptest::collection::vec(0..=64u8, 1..80),
        b in proptest::collection::vec(0..=64u8, 1..80),
    ) {
        let a: Vec<f64> = a.into_iter().map(|v| v as f64 / 64.0).collect();
        let b: Vec<f64> = b.into_iter().map(|v| v as f64 / 64.0).collect();
        let mut ra: Vec<f64> = a.iter().rev().copied().collect();
        let rb: Vec<f64> = b.iter().rev().copied().collect();
        ra.rotate_left(a.len() / 2);
        prop_assert_eq!(auroc(&a, &b).unwrap(), auroc(&ra, &rb).unwrap());
        prop_assert_eq!(
            fpr_at_tpr(&a, &b, 0.95).unwrap(),
            fpr_at_tpr(&ra, &rb, 0.95).unwrap()
        );
        prop_assert_eq!(
            detection_error(&a, &b).unwrap(),
            detection_error(&ra, &rb).unwrap()
        );
    }

    // grid-valued confidences keep x*2 and x+1 exact, so the transforms are
    // strictly increasing on the floats as well
    #[test]
    fn auroc_is_invariant_under_increasing_transforms(
        a in proptest::collection::vec(0..=1024u16, 1..60),
        b in proptest::collection::vec(0..=1024u16, 1..60),
    ) {
        let a: Vec<f64> = a.into_iter().map(|v| v as f64 / 1024.0).collect();
        let b: Vec<f64> = b.into_iter().map(|v| v as f64 / 1024.0).collect();
        let base = auroc(&a, &b).unwrap();
        for transform in [|x: f64| 2.0 * x, |x: f64| x + 1.0] {
            let ta: Vec<f64> = a.iter().map(|&x| transform(x)).collect();
            let tb: Vec<f64> = b.iter().map(|&x| transform(x)).collect();
            prop_assert_eq!(auroc(&ta, &tb).unwrap(), base);
        }
    }

    // the proof mechanism behind the routed bound: concatenation divides by
    // the number of parts, so it can only lower the true-class score
    #[test]
    fn concat_never_raises_a_part_local_score(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let num_classes = rng.random_range(4..=10);
        let partition = loop {
            let candidate = fitens_core::scl::sample_partitions(num_classes, 1, 2, rng.random())
                .unwrap()
                .pop()
                .unwrap();
            if candidate.num_parts() >= 2 {
                break candidate;
            }
        };
        let outputs: Vec<Vec<f64>> = partition
            .parts()
            .iter()
            .map(|part| {
                let raw: Vec<f64> = (0..part.len()).map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            })
            .collect();
        let merged = concat_scores(&outputs, &partition).unwrap();
        prop_assert!((merged.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (part, output) in partition.parts().iter().zip(&outputs) {
            for (&class, &local_score) in part.iter().zip(output) {
                prop_assert!(merged[class] <= local_score);
            }
            // within-part score ratios survive the shared normalization
            let (&a, &b) = (part.first().unwrap(), part.last().unwrap());
            let (ia, ib) = (0, part.len() - 1);
            let before = outputs[partition.part_of(a).unwrap()][ia]
                / outputs[partition.part_of(b).unwrap()][ib];
            let after = merged[a] / merged[b];
            prop_assert!((before - after).abs() / before.abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_partitions_validate(seed in any::<u64>(), n in 4usize..=16) {
        for partition in fitens_core::scl::sample_partitions(n, 5, 2, seed).unwrap() {
            let rebuilt = SclPartition::new(partition.parts().to_vec(), n).unwrap();
            prop_assert_eq!(rebuilt, partition);
        }
    }
}
