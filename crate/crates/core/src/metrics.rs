//! Threshold-based OOD-detection metrics, confidence histograms, and
//! confidence statistics.
//!
//! In-distribution examples are the positives. "Detected as in-distribution"
//! always means confidence >= threshold, and thresholds are restricted to
//! observed confidence values, so every metric is an exact finite
//! computation with no interpolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("confidence lists must be non-empty")]
    EmptyInput,
    #[error("tpr target must lie in (0, 1], got {0}")]
    BadTprTarget(f64),
    #[error("histogram needs at least one bin")]
    BadBins,
    #[error("confidence {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("correctness flag requires an in-distribution sample")]
    CorrectnessOutOfDistribution,
}

/// Default histogram bin count; 20 gives 0.05-wide bins.
pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// False-positive rate at the threshold that keeps `tpr_target` of the
/// in-distribution examples: the threshold is the largest confidence value
/// such that the fraction of `in_conf >= t` reaches the target, and the
/// result is the fraction of `out_conf >= t`.
pub fn fpr_at_tpr(in_conf: &[f64], out_conf: &[f64], tpr_target: f64) -> Result<f64, MetricsError> {
    if in_conf.is_empty() || out_conf.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(tpr_target > 0.0 && tpr_target <= 1.0) {
        return Err(MetricsError::BadTprTarget(tpr_target));
    }
    let sorted_in = sorted(in_conf);
    let n = sorted_in.len();
    let mut idx = n;
    let threshold = loop {
        let value = sorted_in[idx - 1];
        let first = sorted_in.partition_point(|&x| x < value);
        if (n - first) as f64 / n as f64 >= tpr_target {
            break value;
        }
        idx = first; // the minimum always reaches full coverage
    };
    let hits = out_conf.iter().filter(|&&c| c >= threshold).count();
    Ok(hits as f64 / out_conf.len() as f64)
}

/// Rank-based AUROC: (#pairs with in > out + half the ties) over all pairs;
/// the probability that an in-distribution example outranks an OOD one.
///
/// The division is taken from whichever side of 1/2 is smaller and
/// complemented otherwise, so `auroc(a, b) + auroc(b, a) == 1.0` holds
/// exactly in floating point, ties included.
pub fn auroc(in_conf: &[f64], out_conf: &[f64]) -> Result<f64, MetricsError> {
    if in_conf.is_empty() || out_conf.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sorted_out = sorted(out_conf);
    let mut wins: u64 = 0;
    let mut ties: u64 = 0;
    for &c in in_conf {
        let below = sorted_out.partition_point(|&x| x < c) as u64;
        let at_or_below = sorted_out.partition_point(|&x| x <= c) as u64;
        wins += below;
        ties += at_or_below - below;
    }
    let numerator = 2 * wins + ties;
    let denominator = 2 * in_conf.len() as u64 * out_conf.len() as u64;
    Ok(if 2 * numerator <= denominator {
        numerator as f64 / denominator as f64
    } else {
        1.0 - (denominator - numerator) as f64 / denominator as f64
    })
}

/// Minimum equal-prior misdetection probability over all thresholds:
/// `0.5 * frac(in < t) + 0.5 * frac(out >= t)`, minimized over every
/// observed confidence plus the two trivial extremes (which score 0.5).
pub fn detection_error(in_conf: &[f64], out_conf: &[f64]) -> Result<f64, MetricsError> {
    if in_conf.is_empty() || out_conf.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sorted_in = sorted(in_conf);
    let sorted_out = sorted(out_conf);
    let n = sorted_in.len() as f64;
    let m = sorted_out.len() as f64;
    let mut candidates = sorted_in.clone();
    candidates.extend_from_slice(&sorted_out);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = 0.5;
    for &t in &candidates {
        let missed_in = sorted_in.partition_point(|&x| x < t) as f64;
        let passed_out = (sorted_out.len() - sorted_out.partition_point(|&x| x < t)) as f64;
        let error = 0.5 * (missed_in / n) + 0.5 * (passed_out / m);
        if error < best {
            best = error;
        }
    }
    Ok(best)
}

/// Uniform bin counts over [0, 1]; a confidence of exactly 1.0 lands in the
/// last bin. Counts sum to the input length.
pub fn confidence_histogram(
    confidences: &[f64],
    num_bins: usize,
) -> Result<Vec<usize>, MetricsError> {
    if num_bins == 0 {
        return Err(MetricsError::BadBins);
    }
    let mut counts = vec![0usize; num_bins];
    for &c in confidences {
        if !(0.0..=1.0).contains(&c) {
            return Err(MetricsError::OutOfRange(c));
        }
        let bin = ((c * num_bins as f64).floor() as usize).min(num_bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// One prediction's confidence, tagged as in- or out-of-distribution;
/// correctness is defined only for in-distribution samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSample {
    pub confidence: f64,
    pub in_distribution: bool,
    pub correct: Option<bool>,
}

impl ConfidenceSample {
    pub fn new(
        confidence: f64,
        in_distribution: bool,
        correct: Option<bool>,
    ) -> Result<Self, MetricsError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(MetricsError::OutOfRange(confidence));
        }
        if correct.is_some() && !in_distribution {
            return Err(MetricsError::CorrectnessOutOfDistribution);
        }
        Ok(Self {
            confidence,
            in_distribution,
            correct,
        })
    }
}

/// A mean with its (population) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// Confidence statistics over the in-distribution samples. Subgroups with
/// no members are reported as absent, not as zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceStats {
    pub avg_miss_conf: Option<MeanStd>,
    pub avg_correct_conf: Option<MeanStd>,
    pub avg_total_conf: MeanStd,
    pub accuracy: Option<f64>,
    pub n_in: usize,
}

/// Means and deviations of confidence over misclassified, correctly
/// classified, and all in-distribution samples, plus accuracy. Samples
/// without a correctness flag count toward the total only.
pub fn confidence_stats(samples: &[ConfidenceSample]) -> Result<ConfidenceStats, MetricsError> {
    let in_dist: Vec<&ConfidenceSample> = samples.iter().filter(|s| s.in_distribution).collect();
    if in_dist.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let total: Vec<f64> = in_dist.iter().map(|s| s.confidence).collect();
    let miss: Vec<f64> = in_dist
        .iter()
        .filter(|s| s.correct == Some(false))
        .map(|s| s.confidence)
        .collect();
    let correct: Vec<f64> = in_dist
        .iter()
        .filter(|s| s.correct == Some(true))
        .map(|s| s.confidence)
        .collect();
    let flagged = miss.len() + correct.len();
    Ok(ConfidenceStats {
        avg_miss_conf: (!miss.is_empty()).then(|| mean_std(&miss)),
        avg_correct_conf: (!correct.is_empty()).then(|| mean_std(&correct)),
        avg_total_conf: mean_std(&total),
        accuracy: (flagged > 0).then(|| correct.len() as f64 / flagged as f64),
        n_in: in_dist.len(),
    })
}

/// The full report for one (model, OOD set) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_in: usize,
    pub n_out: usize,
    pub fpr_at_95_tpr: f64,
    pub auroc: f64,
    pub detection_error: f64,
    pub histogram_bins: usize,
    pub histogram_in: Vec<usize>,
    pub histogram_out: Vec<usize>,
    pub stats: ConfidenceStats,
}

/// Computes every metric for one model's in-distribution samples against one
/// OOD confidence list.
pub fn evaluate_ood(
    in_samples: &[ConfidenceSample],
    out_confidences: &[f64],
    num_bins: usize,
) -> Result<MetricsReport, MetricsError> {
    let in_conf: Vec<f64> = in_samples
        .iter()
        .filter(|s| s.in_distribution)
        .map(|s| s.confidence)
        .collect();
    if in_conf.is_empty() || out_confidences.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(MetricsReport {
        n_in: in_conf.len(),
        n_out: out_confidences.len(),
        fpr_at_95_tpr: fpr_at_tpr(&in_conf, out_confidences, 0.95)?,
        auroc: auroc(&in_conf, out_confidences)?,
        detection_error: detection_error(&in_conf, out_confidences)?,
        histogram_bins: num_bins,
        histogram_in: confidence_histogram(&in_conf, num_bins)?,
        histogram_out: confidence_histogram(out_confidences, num_bins)?,
        stats: confidence_stats(in_samples)?,
    })
}

/// `bin_low,bin_high,count_in,count_out` rows for the report's histograms.
pub fn histogram_csv(report: &MetricsReport) -> String {
    let bins = report.histogram_bins as f64;
    let mut out = String::from("bin_low,bin_high,count_in,count_out\n");
    for i in 0..report.histogram_bins {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i as f64 / bins,
            (i + 1) as f64 / bins,
            report.histogram_in[i],
            report.histogram_out[i],
        ));
    }
    out
}

/// A fraction rendered as a percentage with two decimals.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}

fn percent_with_std(value: &Option<MeanStd>) -> String {
    match value {
        Some(ms) => format!("{} ({})", format_percent(ms.mean), format_percent(ms.std)),
        None => "-".to_string(),
    }
}

/// Confidence-statistics table: one labeled column per model, with the
/// miss / correct / total / accuracy rows.
pub fn render_confidence_table(entries: &[(String, ConfidenceStats)]) -> String {
    let mut lines = Vec::new();
    let header: Vec<String> = std::iter::once(format!("{:<30}", "metric"))
        .chain(entries.iter().map(|(label, _)| label.clone()))
        .collect();
    lines.push(header.join(" | "));
    let row = |label: &str, values: Vec<String>| {
        std::iter::once(format!("{label:<30}"))
            .chain(values)
            .collect::<Vec<_>>()
            .join(" | ")
    };
    lines.push(row(
        "Avg. miss-prediction conf.",
        entries
            .iter()
            .map(|(_, s)| percent_with_std(&s.avg_miss_conf))
            .collect(),
    ));
    lines.push(row(
        "Avg. correct prediction conf.",
        entries
            .iter()
            .map(|(_, s)| percent_with_std(&s.avg_correct_conf))
            .collect(),
    ));
    lines.push(row(
        "Avg. total prediction conf.",
        entries
            .iter()
            .map(|(_, s)| format_percent(s.avg_total_conf.mean))
            .collect(),
    ));
    lines.push(row(
        "Classification Accuracy",
        entries
            .iter()
            .map(|(_, s)| s.accuracy.map_or("-".to_string(), format_percent))
            .collect(),
    ));
    lines.join("\n") + "\n"
}

/// OOD-detection table with the FPR / AUROC / detection-error rows.
pub fn render_ood_table(entries: &[(String, MetricsReport)]) -> String {
    let mut lines = Vec::new();
    let header: Vec<String> = std::iter::once(format!("{:<30}", "metric"))
        .chain(entries.iter().map(|(label, _)| label.clone()))
        .collect();
    lines.push(header.join(" | "));
    let row = |label: &str, values: Vec<String>| {
        std::iter::once(format!("{label:<30}"))
            .chain(values)
            .collect::<Vec<_>>()
            .join(" | ")
    };
    lines.push(row(
        "FPR at 95% TPR",
        entries
            .iter()
            .map(|(_, r)| format_percent(r.fpr_at_95_tpr))
            .collect(),
    ));
    lines.push(row(
        "Area under ROC curve",
        entries
            .iter()
            .map(|(_, r)| format_percent(r.auroc))
            .collect(),
    ));
    lines.push(row(
        "Best detection error",
        entries
            .iter()
            .map(|(_, r)| format_percent(r.detection_error))
            .collect(),
    ));
    lines.join("\n") + "\n"
}
