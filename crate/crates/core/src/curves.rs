//! Learning curves by repeated random splitting, and the ground truth a
//! budget predictor is scored against.
//!
//! A pilot curve point `s_x` is the mean macro-F1 of forests trained on `x`
//! rows drawn from the pilot and tested on the remaining pilot rows. The
//! reference curve of a full dataset does the same with samples of the
//! training split, always scored on the fixed test split.

use ndarray::ArrayView2;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::learners::{metric_vector, train_forest, ForestParams, MetricVector};
use crate::tabular::{DatasetSplit, PilotStudy, TabularDataset};
use crate::{par, seed, Error, Result, FORMAT_VERSION};

/// Pilot rows that must stay out of every training sample.
pub const MIN_HELD_OUT: usize = 10;
pub const DEFAULT_REPETITIONS: usize = 500;
pub const DEFAULT_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub repetitions: usize,
    pub grid: Vec<usize>,
    pub seed: u64,
    pub forest: ForestParams,
}

impl CurveConfig {
    /// `x = 10, 11, ..., m - 10` with the default repetition count.
    pub fn for_pilot(m: usize, seed: u64) -> Self {
        CurveConfig {
            repetitions: DEFAULT_REPETITIONS,
            grid: default_pilot_grid(m),
            seed,
            forest: ForestParams::default(),
        }
    }
}

pub fn default_pilot_grid(m: usize) -> Vec<usize> {
    (10..=m.saturating_sub(MIN_HELD_OUT)).collect()
}

/// `10..100 step 10, 125..500 step 25, 600..2500 step 100`, cut at the
/// training-set size.
pub fn default_needed_grid(train_size: usize) -> Vec<usize> {
    (10..=100)
        .step_by(10)
        .chain((125..=500).step_by(25))
        .chain((600..=2500).step_by(100))
        .filter(|&n| n <= train_size)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub grid: Vec<usize>,
    pub s: Vec<f64>,
    pub stddev: Vec<f64>,
    /// Pilot (or training-set) size the curve was computed from.
    pub m: usize,
}

impl LearningCurve {
    pub fn at(&self, x: usize) -> Option<f64> {
        self.grid.binary_search(&x).ok().map(|i| self.s[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,s,stddev\n");
        for ((x, s), sd) in self.grid.iter().zip(&self.s).zip(&self.stddev) {
            out.push_str(&format!("{x},{s},{sd}\n"));
        }
        out
    }

    pub fn from_csv(text: &str, m: usize) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["x", "s", "stddev"] {
            return Err(Error::Format("curve header must be x,s,stddev".into()));
        }
        let mut curve = LearningCurve {
            grid: Vec::new(),
            s: Vec::new(),
            stddev: Vec::new(),
            m,
        };
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let field = |i: usize| {
                rec.get(i)
                    .ok_or_else(|| Error::Format("short curve row".into()))
            };
            let bad = |e: &dyn std::fmt::Display| Error::Format(format!("curve row: {e}"));
            curve.grid.push(field(0)?.parse().map_err(|e| bad(&e))?);
            curve.s.push(field(1)?.parse().map_err(|e| bad(&e))?);
            curve.stddev.push(field(2)?.parse().map_err(|e| bad(&e))?);
        }
        check_grid(&curve.grid)?;
        Ok(curve)
    }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid is empty"));
    }
    if grid[0] < 1 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "grid must be strictly increasing and start at 1 or above",
        ));
    }
    Ok(())
}

fn distinct_classes(labels: &[usize]) -> usize {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn fit_and_score(
    train: &TabularDataset,
    train_rows: &[usize],
    test_x: ArrayView2<'_, f64>,
    test_y: &[usize],
    params: &ForestParams,
) -> Result<MetricVector> {
    let sample = train.select(train_rows);
    let model = train_forest(sample.rows.view(), &sample.labels, params)?;
    metric_vector(test_y, &model.predict(test_x)?)
}

/// One random split of the pilot: train on `x` sampled rows, test on the
/// rest.
fn pilot_split_score(
    data: &TabularDataset,
    x: usize,
    item_seed: u64,
    forest: &ForestParams,
) -> Result<f64> {
    let m = data.n_rows();
    let mut rng = seed::rng(item_seed);
    let train_idx = index::sample(&mut rng, m, x).into_vec();
    let mut in_train = vec![false; m];
    train_idx.iter().for_each(|&i| in_train[i] = true);
    let test_idx: Vec<usize> = (0..m).filter(|&i| !in_train[i]).collect();
    let test = data.select(&test_idx);
    let params = forest.with_seed(seed::derive(item_seed, &[0xF0]));
    fit_and_score(data, &train_idx, test.rows.view(), &test.labels, &params).map(|m| m.f1_macro)
}

/// Multiple-splitting curve of a pilot sample. Repetition `r` at size `x`
/// is seeded from `(config.seed, x, r)`.
pub fn pilot_curve(pilot: &PilotStudy, config: &CurveConfig) -> Result<LearningCurve> {
    let m = pilot.data.n_rows();
    check_grid(&config.grid)?;
    if config.repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let max_x = *config.grid.last().expect("checked non-empty");
    if max_x + MIN_HELD_OUT > m {
        return Err(Error::invalid(format!(
            "grid reaches x={max_x} but a pilot of {m} rows allows at most {}",
            m.saturating_sub(MIN_HELD_OUT)
        )));
    }
    if distinct_classes(&pilot.data.labels) < 2 {
        return Err(Error::SingleClass);
    }
    let reps = config.repetitions;
    let items: Vec<(usize, usize)> = config
        .grid
        .iter()
        .flat_map(|&x| (0..reps).map(move |r| (x, r)))
        .collect();
    let scores = par::try_map_slice(&items, |&(x, r)| {
        pilot_split_score(
            &pilot.data,
            x,
            seed::derive(config.seed, &[x as u64, r as u64]),
            &config.forest,
        )
    })?;
    let (s, stddev) = scores.chunks(reps).map(mean_std).unzip();
    Ok(LearningCurve {
        grid: config.grid.clone(),
        s,
        stddev,
        m,
    })
}

/// Metrics of a forest trained on all of `D_train`, scored on `D_test`.
pub fn full_train_metrics(split: &DatasetSplit, params: &ForestParams) -> Result<MetricVector> {
    let all: Vec<usize> = (0..split.train.n_rows()).collect();
    fit_and_score(
        &split.train,
        &all,
        split.test.rows.view(),
        &split.test.labels,
        params,
    )
}

/// Final performance: macro-F1 on `D_test` of the full-train forest.
pub fn final_performance(split: &DatasetSplit, params: &ForestParams) -> Result<f64> {
    full_train_metrics(split, params).map(|m| m.f1_macro)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub grid: Vec<usize>,
    pub repetitions: usize,
    pub threshold: f64,
    pub forest: ForestParams,
    pub seed: u64,
}

impl ReferenceConfig {
    pub fn new(train_size: usize, repetitions: usize, seed: u64) -> Self {
        ReferenceConfig {
            grid: default_needed_grid(train_size),
            repetitions,
            threshold: DEFAULT_THRESHOLD,
            forest: ForestParams::default(),
            seed,
        }
    }
}

/// Reference curve with all four metrics kept per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCurve {
    pub curve: LearningCurve,
    pub metrics: Vec<MetricVector>,
}

fn check_reference_grid(split: &DatasetSplit, grid: &[usize], repetitions: usize) -> Result<()> {
    check_grid(grid)?;
    let n = split.train.n_rows();
    if *grid.last().expect("non-empty") > n {
        return Err(Error::invalid(format!("grid exceeds training size {n}")));
    }
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    Ok(())
}

/// Mean metrics of forests trained on `x`-row samples of `D_train` and
/// scored on `D_test`. At `x = |D_train|` the sample is the whole training
/// set and the forest uses `forest.seed`, which makes that point the exact
/// full-train computation.
pub fn reference_curve(
    split: &DatasetSplit,
    grid: &[usize],
    repetitions: usize,
    forest: &ForestParams,
    seed: u64,
) -> Result<ReferenceCurve> {
    check_reference_grid(split, grid, repetitions)?;
    let n = split.train.n_rows();
    let items: Vec<(usize, usize)> = grid
        .iter()
        .flat_map(|&x| {
            let reps = if x == n { 1 } else { repetitions };
            (0..reps).map(move |r| (x, r))
        })
        .collect();
    let scores = par::try_map_slice(&items, |&(x, r)| {
        if x == n {
            return full_train_metrics(split, forest);
        }
        let item_seed = seed::derive(seed, &[x as u64, r as u64]);
        let mut rng = seed::rng(item_seed);
        let rows = index::sample(&mut rng, n, x).into_vec();
        let params = forest.with_seed(seed::derive(item_seed, &[0xF0]));
        fit_and_score(
            &split.train,
            &rows,
            split.test.rows.view(),
            &split.test.labels,
            &params,
        )
    })?;

    let mut curve = LearningCurve {
        grid: grid.to_vec(),
        s: Vec::with_capacity(grid.len()),
        stddev: Vec::with_capacity(grid.len()),
        m: n,
    };
    let mut metrics = Vec::with_capacity(grid.len());
    let mut at = 0;
    for &x in grid {
        let reps = if x == n { 1 } else { repetitions };
        let chunk = &scores[at..at + reps];
        at += reps;
        let f1: Vec<f64> = chunk.iter().map(|m| m.f1_macro).collect();
        let (mean, sd) = mean_std(&f1);
        curve.s.push(mean);
        curve.stddev.push(sd);
        let mut sum = [0.0; 4];
        for m in chunk {
            for (acc, v) in sum.iter_mut().zip(m.as_array()) {
                *acc += v;
            }
        }
        metrics.push(MetricVector::from_array(sum.map(|v| v / reps as f64)));
    }
    Ok(ReferenceCurve { curve, metrics })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeededAmount {
    pub amount: usize,
    /// False when no grid size dominated and `amount` is `|D_train|`.
    pub reached: bool,
}

/// Smallest grid size whose mean metric vector strictly dominates
/// `threshold` times the full-train vector.
pub fn needed_from_reference(
    reference: &ReferenceCurve,
    full: &MetricVector,
    threshold: f64,
    train_size: usize,
) -> NeededAmount {
    let target = full.scaled(threshold);
    reference
        .curve
        .grid
        .iter()
        .zip(&reference.metrics)
        .find(|(_, m)| m.dominates(&target))
        .map(|(&x, _)| NeededAmount {
            amount: x,
            reached: true,
        })
        .unwrap_or(NeededAmount {
            amount: train_size,
            reached: false,
        })
}

pub fn needed_amount(split: &DatasetSplit, config: &ReferenceConfig) -> Result<NeededAmount> {
    let reference = reference_curve(
        split,
        &config.grid,
        config.repetitions,
        &config.forest,
        config.seed,
    )?;
    let full = full_train_metrics(split, &config.forest)?;
    Ok(needed_from_reference(
        &reference,
        &full,
        config.threshold,
        split.train.n_rows(),
    ))
}

/// Final performance and needed amount of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub format_version: u32,
    pub dataset: String,
    pub final_performance: f64,
    pub needed_amount: usize,
    pub needed_reached: bool,
    pub full_metrics: MetricVector,
    pub reference: ReferenceCurve,
    pub config: ReferenceConfig,
    pub split_seed: u64,
}

pub fn ground_truth(split: &DatasetSplit, config: &ReferenceConfig) -> Result<GroundTruth> {
    let reference = reference_curve(
        split,
        &config.grid,
        config.repetitions,
        &config.forest,
        config.seed,
    )?;
    let full = full_train_metrics(split, &config.forest)?;
    let needed = needed_from_reference(&reference, &full, config.threshold, split.train.n_rows());
    Ok(GroundTruth {
        format_version: FORMAT_VERSION,
        dataset: split.source_name.clone(),
        final_performance: full.f1_macro,
        needed_amount: needed.amount,
        needed_reached: needed.reached,
        full_metrics: full,
        reference,
        config: config.clone(),
        split_seed: split.seed,
    })
}

impl GroundTruth {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let gt: GroundTruth = serde_json::from_str(text)?;
        if gt.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "ground truth version {} unsupported",
                gt.format_version
            )));
        }
        if !(0.0..=1.0).contains(&gt.final_performance) {
            return Err(Error::Format("final performance outside [0, 1]".into()));
        }
        Ok(gt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitComparison {
    pub x: usize,
    pub final_performance: f64,
    pub single_split: f64,
    pub five_fold: f64,
    pub multiple_split: f64,
    pub full_test: f64,
}

impl SplitComparison {
    /// `|M / O_D - 1|` per method, in field order.
    pub fn error_rates(&self) -> [f64; 4] {
        [
            self.single_split,
            self.five_fold,
            self.multiple_split,
            self.full_test,
        ]
        .map(|m| (m / self.final_performance - 1.0).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCompareConfig {
    /// Training size; `None` means `floor(0.8 m)`.
    pub x: Option<usize>,
    pub repetitions: usize,
    pub forest: ForestParams,
    pub seed: u64,
}

/// Compare four ways of estimating performance at train size `x` from a
/// pilot against the dataset's final performance.
pub fn split_comparison(
    pilot: &PilotStudy,
    split: &DatasetSplit,
    config: &SplitCompareConfig,
) -> Result<SplitComparison> {
    let o_d = final_performance(split, &config.forest)?;
    split_comparison_with(pilot, split, config, o_d)
}

/// As [`split_comparison`] with a precomputed final performance.
pub fn split_comparison_with(
    pilot: &PilotStudy,
    split: &DatasetSplit,
    config: &SplitCompareConfig,
    final_perf: f64,
) -> Result<SplitComparison> {
    let m = pilot.data.n_rows();
    if m < 5 {
        return Err(Error::invalid(
            "five-fold comparison needs at least 5 pilot rows",
        ));
    }
    let x = config.x.unwrap_or(m * 4 / 5);
    if x == 0 || x >= m {
        return Err(Error::invalid(format!("train size {x} must be in 1..{m}")));
    }
    if config.repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if distinct_classes(&pilot.data.labels) < 2 {
        return Err(Error::SingleClass);
    }

    let single_split = pilot_split_score(
        &pilot.data,
        x,
        seed::derive(config.seed, &[1]),
        &config.forest,
    )?;

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut seed::rng_at(config.seed, &[2]));
    let folds = par::try_map_range(5, |k| {
        let lo = k * m / 5;
        let hi = (k + 1) * m / 5;
        let train_rows: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
        let test = pilot.data.select(&order[lo..hi]);
        let params = config
            .forest
            .with_seed(seed::derive(config.seed, &[2, k as u64]));
        fit_and_score(
            &pilot.data,
            &train_rows,
            test.rows.view(),
            &test.labels,
            &params,
        )
        .map(|m| m.f1_macro)
    })?;
    let five_fold = folds.iter().sum::<f64>() / 5.0;

    let curve = pilot_curve(
        pilot,
        &CurveConfig {
            repetitions: config.repetitions,
            grid: vec![x],
            seed: seed::derive(config.seed, &[3]),
            forest: config.forest,
        },
    )
    .or_else(|e| match e {
        // the comparison may run closer to m than a curve grid allows
        Error::InvalidArgument(_) => Ok(LearningCurve {
            grid: vec![x],
            s: vec![mean_std(&repeated_pilot_scores(pilot, x, config)?).0],
            stddev: vec![0.0],
            m,
        }),
        other => Err(other),
    })?;
    let multiple_split = curve.s[0];

    let full = par::try_map_range(config.repetitions, |r| {
        let item_seed = seed::derive(config.seed, &[4, r as u64]);
        let rows = index::sample(&mut seed::rng(item_seed), m, x).into_vec();
        let params = config.forest.with_seed(seed::derive(item_seed, &[0xF0]));
        fit_and_score(
            &pilot.data,
            &rows,
            split.test.rows.view(),
            &split.test.labels,
            &params,
        )
        .map(|m| m.f1_macro)
    })?;
    let full_test = full.iter().sum::<f64>() / full.len() as f64;

    Ok(SplitComparison {
        x,
        final_performance: final_perf,
        single_split,
        five_fold,
        multiple_split,
        full_test,
    })
}

fn repeated_pilot_scores(
    pilot: &PilotStudy,
    x: usize,
    config: &SplitCompareConfig,
) -> Result<Vec<f64>> {
    let base = seed::derive(config.seed, &[3]);
    par::try_map_range(config.repetitions, |r| {
        pilot_split_score(
            &pilot.data,
            x,
            seed::derive(base, &[x as u64, r as u64]),
            &config.forest,
        )
    })
}
