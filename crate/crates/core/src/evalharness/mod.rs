//! Leakage-aware evaluation. Datasets are clustered by name and each
//! budgeting method is scored on bootstrapped cluster splits.

mod benchmark;
mod cluster;
mod similarity;

pub use benchmark::{
    run_benchmark, BenchmarkConfig, CorpusEntry, EvalReport, EvalRow, MethodSummary, PilotMode,
    PilotRecord,
};
pub use cluster::{
    bootstrap_split, cluster_datasets, default_cluster_count, NameClusterIndex, SplitPlan, SplitRep,
};
pub use similarity::{matched_chars, name_similarity};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact-bin rate, adjacent-bin rate and far-miss rate (distance 2 or more).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinAccuracy {
    pub acc0: f64,
    pub acc1: f64,
    pub far: f64,
}

pub fn bin_accuracy(true_bins: &[usize], pred_bins: &[usize]) -> Result<BinAccuracy> {
    if true_bins.len() != pred_bins.len() {
        return Err(Error::DimensionMismatch {
            expected: true_bins.len(),
            actual: pred_bins.len(),
        });
    }
    if true_bins.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = [0usize; 3];
    for (&t, &p) in true_bins.iter().zip(pred_bins) {
        counts[t.abs_diff(p).min(2)] += 1;
    }
    let n = true_bins.len() as f64;
    let acc0 = counts[0] as f64 / n;
    let acc1 = counts[1] as f64 / n;
    // as a complement, (acc0 + acc1) + far is exactly 1 in floating point
    Ok(BinAccuracy {
        acc0,
        acc1,
        far: 1.0 - (acc0 + acc1),
    })
}

/// `(Acc0, Acc1)`.
pub fn acc_metrics(true_bins: &[usize], pred_bins: &[usize]) -> Result<(f64, f64)> {
    bin_accuracy(true_bins, pred_bins).map(|a| (a.acc0, a.acc1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub dataset: String,
    pub minority_ratio: f64,
    pub abs_error: f64,
}

/// Absolute prediction error against the pilot's minority-label ratio,
/// with the least-squares line `error = slope * ratio + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceAnalysis {
    pub points: Vec<BalancePoint>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

pub fn balance_analysis(points: Vec<BalancePoint>) -> BalanceAnalysis {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.minority_ratio).sum::<f64>() / n;
    let my = points.iter().map(|p| p.abs_error).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.minority_ratio - mx).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.minority_ratio - mx) * (p.abs_error - my))
        .sum();
    let (slope, intercept) = if points.len() >= 2 && sxx > 0.0 {
        let slope = sxy / sxx;
        (Some(slope), Some(my - slope * mx))
    } else {
        (None, None)
    };
    BalanceAnalysis {
        points,
        slope,
        intercept,
    }
}
