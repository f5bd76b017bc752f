//! The learning-based budgeter: turn pilot curves into feature vectors,
//! bin needed amounts, and learn to map curves to final performance and
//! needed-amount bins.

mod analysis;
mod model;

pub use analysis::{
    coefficient_profile, one_point_analysis, one_point_profile, select_top_coefficients,
    select_top_indices, OnePointFit,
};
pub use model::{
    powerlaw_budget, powerlaw_fit_or_flat, predict_budget, train_budget_model, BudgetConfig,
    BudgetExample, BudgetModel, BudgetReport, FinalModel, Method, ModelKind, NeededModel,
    ReportInputs, MIN_CORPUS,
};

use serde::{Deserialize, Serialize};

use crate::curves::{default_pilot_grid, LearningCurve};
use crate::{Error, Result};

pub const BIN_COUNT: usize = 5;
pub const PAPER_BIN_UPPER: [f64; BIN_COUNT] = [104.0, 227.0, 430.0, 805.0, 2000.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinMode {
    /// Bins over needed row counts.
    FixedCount,
    /// Bins over needed amount divided by pilot size.
    Ratio,
}

/// Contiguous bins `[0, u_0], (u_0, u_1], ..., (u_{k-2}, u_{k-1}]`. Values
/// above the last edge fall in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinScheme {
    pub mode: BinMode,
    pub upper: Vec<f64>,
}

impl BinScheme {
    pub fn new(mode: BinMode, upper: Vec<f64>) -> Result<Self> {
        if upper.len() < 2 {
            return Err(Error::invalid("a bin scheme needs at least two bins"));
        }
        if !(upper[0] >= 0.0)
            || upper.windows(2).any(|w| !(w[0] < w[1]))
            || !upper.iter().all(|u| u.is_finite())
        {
            return Err(Error::invalid(
                "bin edges must be finite, non-negative and strictly increasing",
            ));
        }
        Ok(BinScheme { mode, upper })
    }

    /// `[0,104], [105,227], [228,430], [431,805], [806,2000]`.
    pub fn standard() -> Self {
        BinScheme {
            mode: BinMode::FixedCount,
            upper: PAPER_BIN_UPPER.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn assign(&self, value: f64) -> usize {
        self.upper
            .iter()
            .position(|&u| value <= u)
            .unwrap_or(self.upper.len() - 1)
    }

    /// Inclusive bounds for count bins; for ratio bins the lower bound is
    /// exclusive except in bin 0.
    pub fn interval(&self, bin: usize) -> (f64, f64) {
        let hi = self.upper[bin];
        let lo = match (bin, self.mode) {
            (0, _) => 0.0,
            (_, BinMode::FixedCount) => self.upper[bin - 1] + 1.0,
            (_, BinMode::Ratio) => self.upper[bin - 1],
        };
        (lo, hi)
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        let (lo, hi) = self.interval(bin);
        (lo + hi) / 2.0
    }

    /// Bin of a needed amount for a pilot of `m` rows.
    pub fn label(&self, needed: usize, m: usize) -> usize {
        match self.mode {
            BinMode::FixedCount => self.assign(needed as f64),
            BinMode::Ratio => self.assign(needed as f64 / m as f64),
        }
    }
}

pub fn assign_bin(needed: f64, scheme: &BinScheme) -> usize {
    scheme.assign(needed)
}

/// Quantile bins: sorted values are cut into `k` runs of near-equal length
/// and each run's largest value becomes an upper edge. When ties make an
/// edge repeat, it moves to the next distinct value, keeping enough distinct
/// values for the bins that follow.
pub fn make_quantile_bins(values: &[f64], k: usize, mode: BinMode) -> Result<BinScheme> {
    if k < 2 {
        return Err(Error::invalid("need at least two bins"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("bin values must be finite and non-negative"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::invalid(format!(
            "{} distinct values cannot fill {k} bins",
            distinct.len()
        )));
    }
    let n = sorted.len();
    let mut upper = Vec::with_capacity(k);
    let mut pos = 0usize;
    for i in 0..k {
        let want = if i + 1 == k {
            distinct.len() - 1
        } else {
            let target = sorted[(i + 1) * n / k - 1];
            let at = distinct.partition_point(|&v| v < target);
            at.max(pos).min(distinct.len() - (k - i))
        };
        upper.push(distinct[want]);
        pos = want + 1;
    }
    BinScheme::new(mode, upper)
}

/// Percent points `10, 15, ..., 90` of the generalized featurization.
pub const PERCENT_POINTS: [usize; 17] = [
    10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90,
];

/// `floor(p% * m)`.
pub fn percent_index(p: usize, m: usize) -> usize {
    p * m / 100
}

/// Distinct train sizes a percent-mode curve must contain.
pub fn percent_grid(m: usize) -> Vec<usize> {
    let mut g: Vec<usize> = PERCENT_POINTS
        .iter()
        .map(|&p| percent_index(p, m))
        .filter(|&x| x >= 1)
        .collect();
    g.dedup();
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureMode {
    /// `s_x` at each grid size.
    Fixed { grid: Vec<usize> },
    /// `s` at each percent point of the pilot size, then the pilot size.
    Percent,
}

impl FeatureMode {
    pub fn fixed_for_pilot(m: usize) -> Self {
        FeatureMode::Fixed {
            grid: default_pilot_grid(m),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureMode::Fixed { grid } => grid.len(),
            FeatureMode::Percent => PERCENT_POINTS.len() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Curve grid to compute for a pilot of `m` rows.
    pub fn curve_grid(&self, m: usize) -> Vec<usize> {
        match self {
            FeatureMode::Fixed { grid } => grid.clone(),
            FeatureMode::Percent => percent_grid(m),
        }
    }

    /// Human-readable feature names.
    pub fn feature_names(&self) -> Vec<String> {
        match self {
            FeatureMode::Fixed { grid } => grid.iter().map(|x| format!("s_{x}")).collect(),
            FeatureMode::Percent => PERCENT_POINTS
                .iter()
                .map(|p| format!("s_{p}%"))
                .chain(std::iter::once("m".to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub mode: FeatureMode,
}

pub fn featurize(curve: &LearningCurve, mode: &FeatureMode) -> Result<FeatureVector> {
    let need = |x: usize| {
        curve.at(x).ok_or_else(|| {
            let span = match mode {
                FeatureMode::Fixed { grid } => format!(
                    "the model's grid needs s_x for x in {}..={}, so pilots of at least {} rows",
                    grid.first().unwrap_or(&0),
                    grid.last().unwrap_or(&0),
                    grid.last().unwrap_or(&0) + crate::curves::MIN_HELD_OUT
                ),
                FeatureMode::Percent => {
                    "percent features need s at floor(p% * m) for p = 10..90".into()
                }
            };
            Error::invalid(format!(
                "curve from a pilot of {} rows has no s_{x}; {span}",
                curve.m
            ))
        })
    };
    let values = match mode {
        FeatureMode::Fixed { grid } => grid.iter().map(|&x| need(x)).collect::<Result<Vec<_>>>()?,
        FeatureMode::Percent => {
            let mut v = PERCENT_POINTS
                .iter()
                .map(|&p| need(percent_index(p, curve.m)))
                .collect::<Result<Vec<_>>>()?;
            v.push(curve.m as f64);
            v
        }
    };
    Ok(FeatureVector {
        values,
        mode: mode.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(grid: Vec<usize>, m: usize) -> LearningCurve {
        let s = grid.iter().map(|&x| x as f64 / 1000.0).collect::<Vec<_>>();
        LearningCurve {
            stddev: vec![0.0; grid.len()],
            grid,
            s,
            m,
        }
    }

    #[test]
    fn standard_edges() {
        let b = BinScheme::standard();
        for (v, want) in [
            (0, 0),
            (104, 0),
            (105, 1),
            (227, 1),
            (228, 2),
            (430, 2),
            (431, 3),
            (805, 3),
            (806, 4),
            (2000, 4),
            (5000, 4),
        ] {
            assert_eq!(assign_bin(v as f64, &b), want, "{v}");
        }
        assert_eq!(b.interval(3), (431.0, 805.0));
        for bin in 0..5 {
            assert_eq!(b.assign(b.midpoint(bin)), bin);
        }
    }

    #[test]
    fn scheme_validation() {
        assert!(BinScheme::new(BinMode::Ratio, vec![1.0]).is_err());
        assert!(BinScheme::new(BinMode::Ratio, vec![1.0, 1.0]).is_err());
        assert!(BinScheme::new(BinMode::Ratio, vec![-1.0, 1.0]).is_err());
        let r = BinScheme::new(BinMode::Ratio, vec![0.5, 1.0, 2.0]).unwrap();
        assert_eq!(r.interval(1), (0.5, 1.0));
        assert_eq!(r.label(200, 100), 2);
        assert_eq!(BinScheme::standard().label(200, 100), 1);
    }

    #[test]
    fn quantile_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let b = make_quantile_bins(&v, 5, BinMode::FixedCount).unwrap();
        assert_eq!(b.upper, vec![20.0, 40.0, 60.0, 80.0, 100.0]);
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let b = make_quantile_bins(&v, 5, BinMode::FixedCount).unwrap();
        let mut counts = [0; 5];
        v.iter().for_each(|x| counts[b.assign(*x)] += 1);
        assert_eq!(counts, [2; 5]);
        assert!(make_quantile_bins(&[3.0; 20], 5, BinMode::Ratio).is_err());
    }

    #[test]
    fn quantile_ties_keep_bins_non_empty() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0];
        let b = make_quantile_bins(&v, 5, BinMode::Ratio).unwrap();
        assert_eq!(b.upper, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let v = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.7, 0.9, 1.2, 4.0];
        let b = make_quantile_bins(&v, 5, BinMode::Ratio).unwrap();
        let mut counts = [0; 5];
        v.iter().for_each(|x| counts[b.assign(*x)] += 1);
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }

    #[test]
    fn percent_features() {
        assert_eq!(percent_index(10, 100), 10);
        assert_eq!(percent_index(15, 50), 7);
        let g = percent_grid(100);
        assert_eq!(g.len(), 17);
        let f = featurize(&curve(g, 100), &FeatureMode::Percent).unwrap();
        assert_eq!(f.values.len(), 18);
        assert_eq!(f.values[0], 0.010);
        assert_eq!(f.values[17], 100.0);
        let f = featurize(&curve(percent_grid(50), 50), &FeatureMode::Percent).unwrap();
        assert_eq!(f.values[1], 0.007);
        assert_eq!(FeatureMode::Percent.feature_names().len(), 18);
    }

    #[test]
    fn fixed_features_and_gaps() {
        let mode = FeatureMode::fixed_for_pilot(100);
        assert_eq!(mode.len(), 81);
        let f = featurize(&curve((10..=90).collect(), 100), &mode).unwrap();
        assert_eq!(f.values.len(), 81);
        let err = featurize(&curve((11..=90).collect(), 100), &mode).unwrap_err();
        assert!(err.to_string().contains("s_10"), "{err}");
        let err = featurize(&curve((10..=40).collect(), 50), &mode).unwrap_err();
        assert!(err.to_string().contains("at least 100 rows"), "{err}");
    }

    proptest! {
        #[test]
        fn quantile_counts_balanced(mut v in proptest::collection::btree_set(0u32..100_000, 5..300)
            .prop_map(|s| s.into_iter().map(f64::from).collect::<Vec<_>>()),
            seed: u64)
        {
            use rand::seq::SliceRandom;
            v.shuffle(&mut crate::seed::rng(seed));
            let b = make_quantile_bins(&v, 5, BinMode::FixedCount).unwrap();
            let mut counts = [0usize; 5];
            v.iter().for_each(|x| counts[b.assign(*x)] += 1);
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "{:?}", counts);
        }

        #[test]
        fn midpoints_round_trip(edges in proptest::collection::btree_set(1u32..5000, 5)) {
            let upper: Vec<f64> = edges.into_iter().map(f64::from).collect();
            let b = BinScheme::new(BinMode::FixedCount, upper).unwrap();
            for bin in 0..5 {
                prop_assert_eq!(b.assign(b.midpoint(bin)), bin);
            }
        }
    }
}
