use serde::{Deserialize, Serialize};

use super::cluster::{bootstrap_split, cluster_datasets, default_cluster_count, SplitPlan};
use super::{balance_analysis, bin_accuracy, BalanceAnalysis, BalancePoint};
use crate::budgeter::{
    featurize, make_quantile_bins, powerlaw_fit_or_flat, train_budget_model, BinMode, BinScheme,
    BudgetConfig, BudgetExample, FeatureMode, FeatureVector, Method, BIN_COUNT,
};
use crate::curves::{
    pilot_curve, CurveConfig, GroundTruth, LearningCurve, DEFAULT_THRESHOLD, MIN_HELD_OUT,
};
use crate::learners::ForestParams;
use crate::powerlaw::PowerLawReport;
use crate::tabular::{draw_pilot, DatasetSplit};
use crate::{par, seed, Error, Result, FORMAT_VERSION};

use crate::budgeter::MIN_CORPUS as MIN_TRAIN_DATASETS;

pub struct CorpusEntry {
    pub name: String,
    pub split: DatasetSplit,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PilotMode {
    /// Every pilot has `m` rows and features are `s_x` on a fixed grid.
    Fixed { m: usize },
    /// Pilot sizes drawn uniformly from `min..=max` per dataset; features
    /// are percent points plus the pilot size and needed amounts are binned
    /// as multiples of the pilot size.
    Varying { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub pilot: PilotMode,
    /// Cluster-split repetitions.
    pub repetitions: usize,
    /// Repetitions per pilot-curve point.
    pub curve_repetitions: usize,
    /// Spacing of the fixed-mode curve grid.
    pub curve_step: usize,
    pub curve_forest: ForestParams,
    pub budget: BudgetConfig,
    pub clusters: Option<usize>,
    pub train_frac: f64,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            methods: Method::ALL.to_vec(),
            pilot: PilotMode::Fixed { m: 100 },
            repetitions: 40,
            curve_repetitions: crate::curves::DEFAULT_REPETITIONS,
            curve_step: 1,
            curve_forest: ForestParams::default(),
            budget: BudgetConfig::default(),
            clusters: None,
            train_frac: 0.8,
            seed: 0,
        }
    }
}

impl BenchmarkConfig {
    fn feature_mode(&self) -> Option<FeatureMode> {
        match self.pilot {
            PilotMode::Fixed { m } => Some(FeatureMode::Fixed {
                grid: (10..=m.saturating_sub(MIN_HELD_OUT))
                    .step_by(self.curve_step.max(1))
                    .collect(),
            }),
            PilotMode::Varying { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotRecord {
    pub dataset: String,
    pub cluster: usize,
    pub pilot_size: usize,
    pub minority_ratio: f64,
    pub true_final: f64,
    pub true_needed: usize,
    pub curve: LearningCurve,
    pub powerlaw: PowerLawReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub rep: usize,
    pub method: Method,
    pub dataset: String,
    pub cluster: usize,
    pub pilot_size: usize,
    pub true_final: f64,
    pub pred_final: f64,
    pub true_bin: usize,
    pub pred_bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean over repetitions with a defined R²; `None` when none had one.
    pub r2_mean: Option<f64>,
    /// Repetitions whose test targets had zero variance.
    pub r2_undefined: usize,
    pub acc0_mean: f64,
    pub acc1_mean: f64,
    pub r2_per_rep: Vec<Option<f64>>,
    pub acc0_per_rep: Vec<f64>,
    pub acc1_per_rep: Vec<f64>,
    /// Final-performance error per dataset, averaged over the repetitions
    /// that tested it.
    pub balance: BalanceAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub config: BenchmarkConfig,
    pub datasets: Vec<String>,
    pub cluster_count: usize,
    pub cluster_of: Vec<usize>,
    pub splits: SplitPlan,
    /// Bin scheme of each repetition.
    pub schemes: Vec<BinScheme>,
    pub pilots: Vec<PilotRecord>,
    pub summaries: Vec<MethodSummary>,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One line per repetition, method and test dataset.
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record([
            "rep",
            "method",
            "dataset",
            "cluster",
            "pilot_size",
            "true_final",
            "pred_final",
            "true_bin",
            "pred_bin",
        ])
        .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.rep.to_string(),
                r.method.to_string(),
                r.dataset.clone(),
                r.cluster.to_string(),
                r.pilot_size.to_string(),
                r.true_final.to_string(),
                r.pred_final.to_string(),
                r.true_bin.to_string(),
                r.pred_bin.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn validate(corpus: &[CorpusEntry], config: &BenchmarkConfig) -> Result<()> {
    if corpus.len() < 2 {
        return Err(Error::invalid("a benchmark needs at least two datasets"));
    }
    if config.methods.is_empty() {
        return Err(Error::invalid("no methods selected"));
    }
    if config.repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let smallest_train = corpus
        .iter()
        .map(|e| e.split.train.n_rows())
        .min()
        .unwrap_or(0);
    match config.pilot {
        PilotMode::Fixed { m } => {
            if m < 2 * MIN_HELD_OUT {
                return Err(Error::invalid(format!(
                    "pilot size {m} leaves no curve grid"
                )));
            }
            if m > smallest_train {
                return Err(Error::invalid(format!(
                    "pilot size {m} exceeds a training split of {smallest_train}"
                )));
            }
        }
        PilotMode::Varying { min, max } => {
            if min < 100 || min > max || max > smallest_train {
                return Err(Error::invalid(format!(
                    "varying pilot sizes need 100 <= min <= max <= {smallest_train}, got {min}..={max}"
                )));
            }
        }
    }
    Ok(())
}

fn r2_defined(truth: &[f64], pred: &[f64]) -> Option<f64> {
    if truth.len() < 2 {
        return None;
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    if truth.iter().all(|t| *t == mean) {
        return None;
    }
    crate::learners::r2_score(truth, pred)
        .ok()
        .filter(|r| r.is_finite())
}

/// Score every selected method over bootstrapped cluster splits of the
/// corpus. Pilots and their curves are drawn once per dataset and shared by
/// all repetitions; each repetition retrains the learning methods on its
/// training clusters.
pub fn run_benchmark(corpus: &[CorpusEntry], config: &BenchmarkConfig) -> Result<EvalReport> {
    validate(corpus, config)?;
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let n = corpus.len();
    let names: Vec<String> = corpus.iter().map(|e| e.name.clone()).collect();
    let k = config.clusters.unwrap_or_else(|| default_cluster_count(n));
    let index = cluster_datasets(&names, k)?;
    let fixed_mode = config.feature_mode();

    let pilots = par::try_map_range(n, |i| {
        let entry = &corpus[i];
        let m = match config.pilot {
            PilotMode::Fixed { m } => m,
            PilotMode::Varying { min, max } => {
                use rand::Rng;
                seed::rng_at(config.seed, &[1, i as u64]).random_range(min..=max)
            }
        };
        let pilot = draw_pilot(&entry.split, m, seed::derive(config.seed, &[2, i as u64]))?;
        let grid = match &fixed_mode {
            Some(mode) => mode.curve_grid(m),
            None => FeatureMode::Percent.curve_grid(m),
        };
        let curve = pilot_curve(
            &pilot,
            &CurveConfig {
                repetitions: config.curve_repetitions,
                grid,
                seed: seed::derive(config.seed, &[3, i as u64]),
                forest: config.curve_forest,
            },
        )?;
        let powerlaw = PowerLawReport::new(&powerlaw_fit_or_flat(&curve), DEFAULT_THRESHOLD);
        Ok::<_, Error>(PilotRecord {
            dataset: entry.name.clone(),
            cluster: index.assignment[i],
            pilot_size: m,
            minority_ratio: pilot.data.minority_ratio(),
            true_final: entry.truth.final_performance,
            true_needed: entry.truth.needed_amount,
            curve,
            powerlaw,
        })
    })?;
    let mode = fixed_mode.unwrap_or(FeatureMode::Percent);
    let features: Vec<FeatureVector> = pilots
        .iter()
        .map(|p| featurize(&p.curve, &mode))
        .collect::<Result<_>>()?;

    let plan = bootstrap_split(
        &index,
        config.train_frac,
        config.repetitions,
        seed::derive(config.seed, &[4]),
    )?;
    let per_rep = par::try_map_range(config.repetitions, |rep| {
        run_repetition(rep, &plan, &pilots, &features, &methods, config)
    })?;
    let (schemes, rep_rows): (Vec<BinScheme>, Vec<Vec<EvalRow>>) = per_rep.into_iter().unzip();
    let rows: Vec<EvalRow> = rep_rows.into_iter().flatten().collect();

    let summaries = methods
        .iter()
        .map(|&method| summarize(method, &rows, &pilots, config.repetitions))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        datasets: names,
        cluster_count: k,
        cluster_of: index.assignment.clone(),
        splits: plan,
        schemes,
        pilots,
        summaries,
        rows,
    })
}

fn run_repetition(
    rep: usize,
    plan: &SplitPlan,
    pilots: &[PilotRecord],
    features: &[FeatureVector],
    methods: &[Method],
    config: &BenchmarkConfig,
) -> Result<(BinScheme, Vec<EvalRow>)> {
    let split = &plan.reps[rep];
    let in_train = |i: usize| split.train.binary_search(&pilots[i].cluster).is_ok();
    let train_ids: Vec<usize> = (0..pilots.len()).filter(|&i| in_train(i)).collect();
    let test_ids: Vec<usize> = (0..pilots.len()).filter(|&i| !in_train(i)).collect();

    let scheme = match config.pilot {
        PilotMode::Fixed { .. } => BinScheme::standard(),
        PilotMode::Varying { .. } => {
            let ratios: Vec<f64> = train_ids
                .iter()
                .map(|&i| pilots[i].true_needed as f64 / pilots[i].pilot_size as f64)
                .collect();
            make_quantile_bins(&ratios, BIN_COUNT, BinMode::Ratio)?
        }
    };
    let true_bin = |i: usize| scheme.label(pilots[i].true_needed, pilots[i].pilot_size);

    let mut rows = Vec::new();
    for &method in methods {
        let preds: Vec<(f64, usize)> = match method.model_kind() {
            None => test_ids
                .iter()
                .map(|&i| {
                    let pl = &pilots[i].powerlaw;
                    (
                        pl.final_prediction,
                        scheme.label(pl.needed_prediction as usize, pilots[i].pilot_size),
                    )
                })
                .collect(),
            Some(kind) => {
                if train_ids.len() < MIN_TRAIN_DATASETS {
                    return Err(Error::invalid(format!(
                        "{method} needs training but repetition {rep} has {} training datasets (minimum {MIN_TRAIN_DATASETS})",
                        train_ids.len()
                    )));
                }
                let examples: Vec<BudgetExample> = train_ids
                    .iter()
                    .map(|&i| BudgetExample {
                        name: pilots[i].dataset.clone(),
                        features: features[i].clone(),
                        pilot_size: pilots[i].pilot_size,
                        final_performance: pilots[i].true_final,
                        needed_amount: pilots[i].true_needed,
                    })
                    .collect();
                let mut budget = config.budget.clone();
                budget.forest = budget
                    .forest
                    .with_seed(seed::derive(config.seed, &[5, rep as u64]));
                let model = train_budget_model(&examples, kind, &scheme, &budget)?;
                let test_features: Vec<&FeatureVector> =
                    test_ids.iter().map(|&i| &features[i]).collect();
                let x = model.design(&test_features)?;
                let finals = model.predict_final_raw(&x)?;
                let bins = model.predict_bins(&x)?;
                finals
                    .into_iter()
                    .zip(bins)
                    .map(|(f, b)| (f.clamp(0.0, 1.0), b.min(scheme.len() - 1)))
                    .collect()
            }
        };
        for (&i, (pred_final, pred_bin)) in test_ids.iter().zip(preds) {
            rows.push(EvalRow {
                rep,
                method,
                dataset: pilots[i].dataset.clone(),
                cluster: pilots[i].cluster,
                pilot_size: pilots[i].pilot_size,
                true_final: pilots[i].true_final,
                pred_final,
                true_bin: true_bin(i),
                pred_bin,
            });
        }
    }
    Ok((scheme, rows))
}

fn summarize(
    method: Method,
    rows: &[EvalRow],
    pilots: &[PilotRecord],
    reps: usize,
) -> Result<MethodSummary> {
    let mut r2_per_rep = Vec::with_capacity(reps);
    let mut acc0_per_rep = Vec::with_capacity(reps);
    let mut acc1_per_rep = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mine: Vec<&EvalRow> = rows
            .iter()
            .filter(|r| r.rep == rep && r.method == method)
            .collect();
        let truth: Vec<f64> = mine.iter().map(|r| r.true_final).collect();
        let pred: Vec<f64> = mine.iter().map(|r| r.pred_final).collect();
        r2_per_rep.push(r2_defined(&truth, &pred));
        let tb: Vec<usize> = mine.iter().map(|r| r.true_bin).collect();
        let pb: Vec<usize> = mine.iter().map(|r| r.pred_bin).collect();
        let acc = bin_accuracy(&tb, &pb)?;
        acc0_per_rep.push(acc.acc0);
        acc1_per_rep.push(acc.acc1);
    }
    let defined: Vec<f64> = r2_per_rep.iter().flatten().copied().collect();
    let r2_mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    let mut points = Vec::new();
    for p in pilots {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == method && r.dataset == p.dataset)
            .map(|r| (r.pred_final - r.true_final).abs())
            .collect();
        if !errs.is_empty() {
            points.push(BalancePoint {
                dataset: p.dataset.clone(),
                minority_ratio: p.minority_ratio,
                abs_error: errs.iter().sum::<f64>() / errs.len() as f64,
            });
        }
    }
    Ok(MethodSummary {
        method,
        r2_mean,
        r2_undefined: reps - defined.len(),
        acc0_mean: acc0_per_rep.iter().sum::<f64>() / reps as f64,
        acc1_mean: acc1_per_rep.iter().sum::<f64>() / reps as f64,
        r2_per_rep,
        acc0_per_rep,
        acc1_per_rep,
        balance: balance_analysis(points),
    })
}
