use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use databudget::budgeter::{
    coefficient_profile, make_quantile_bins, one_point_profile, powerlaw_budget, predict_budget,
    train_budget_model, BinMode, BinScheme, BudgetConfig, BudgetExample, BudgetModel, FeatureMode,
    Method, ModelKind, BIN_COUNT,
};
use databudget::curves::{
    ground_truth, pilot_curve, split_comparison_with, CurveConfig, LearningCurve, ReferenceConfig,
    SplitCompareConfig, MIN_HELD_OUT,
};
use databudget::evalharness::{run_benchmark, BenchmarkConfig, CorpusEntry, PilotMode};
use databudget::learners::ForestParams;
use databudget::seed;
use databudget::tabular::{
    binarize_regression, draw_pilot, generate_synthetic, graded_corpus, load_csv,
    load_regression_csv, save_canonical, validate_eligibility, PilotStudy, TabularDataset,
};
use rand::Rng;
use serde::Serialize;

use crate::settings::Settings;
use crate::store::{name_key, write_report, write_text, Store, SPLIT_TEST, SPLIT_TOTAL};
use crate::svg::{box_chart, chart, Chart, Series};
use crate::{
    BenchArgs, CurveArgs, IngestArgs, ModeArg, PredictArgs, SynthArgs, TrainArgs, TruthArgs,
};

fn split_seed(s: &Settings) -> u64 {
    seed::derive(s.seed, &[1])
}

fn forest(trees: usize, seed: u64) -> ForestParams {
    ForestParams::default().with_trees(trees).with_seed(seed)
}

/// `10, 10 + step, ...` up to `m - 10`.
fn fixed_grid(m: usize, step: usize) -> Result<Vec<usize>> {
    if m < 2 * MIN_HELD_OUT {
        bail!(
            "pilot size {m} leaves no curve grid; pilots need at least {} rows",
            2 * MIN_HELD_OUT
        );
    }
    Ok((MIN_HELD_OUT..=m - MIN_HELD_OUT)
        .step_by(step.max(1))
        .collect())
}

fn curve_config(s: &Settings, grid: Vec<usize>, reps: usize, seed: u64) -> CurveConfig {
    CurveConfig {
        repetitions: reps,
        grid,
        seed,
        forest: forest(s.curve_trees, 0),
    }
}

pub fn synth(s: &Settings, a: &SynthArgs) -> Result<()> {
    let store = Store::new(&s.out);
    store.dir("datasets")?;
    #[derive(Serialize)]
    struct Entry<'a> {
        name: &'a str,
        spec: databudget::tabular::SyntheticSpec,
        seed: u64,
    }
    let specs = graded_corpus(a.count, a.rows);
    let mut entries = Vec::new();
    println!(
        "{:<12} {:>6} {:>4} {:>8} {:>11} {:>6}",
        "dataset", "rows", "d", "classes", "separation", "noise"
    );
    for (i, (name, spec)) in specs.iter().enumerate() {
        let ds_seed = seed::derive(s.seed, &[10, i as u64]);
        let ds = generate_synthetic(name, spec, ds_seed)?;
        save_dataset(&store, &ds)?;
        println!(
            "{:<12} {:>6} {:>4} {:>8} {:>11.3} {:>6.2}",
            name, spec.n, spec.d, spec.classes, spec.separation, spec.label_noise
        );
        entries.push(Entry {
            name,
            spec: *spec,
            seed: ds_seed,
        });
    }
    write_report(&store.root.join("reports/synth.json"), "synth", s, entries)
}

/// Write a dataset, warning when cached ground truth belongs to older contents.
fn save_dataset(store: &Store, ds: &TabularDataset) -> Result<()> {
    let csv = store.datasets_dir().join(format!("{}.csv", ds.name));
    let before = std::fs::read(&csv).ok();
    save_canonical(ds, store.datasets_dir())?;
    let changed = before.is_some_and(|b| std::fs::read(&csv).ok() != Some(b));
    if changed && store.truth_path(&ds.name).exists() {
        eprintln!(
            "warning: {}: dataset changed but its cached ground truth was kept; run groundtruth --force {}",
            ds.name, ds.name
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestEntry {
    path: PathBuf,
    name: Option<String>,
    stored: bool,
    rows: Option<usize>,
    features: Option<usize>,
    classes: Option<usize>,
    reasons: Vec<String>,
}

fn load_source(path: &Path, a: &IngestArgs) -> databudget::Result<TabularDataset> {
    if a.binarize {
        binarize_regression(&load_regression_csv(path, &a.label)?)
    } else {
        load_csv(path, &a.label)
    }
}

pub fn ingest(s: &Settings, a: &IngestArgs) -> Result<()> {
    let store = Store::new(&s.out);
    store.dir("datasets")?;
    let mut entries = Vec::new();
    for path in &a.paths {
        let entry = match load_source(path, a) {
            Err(e) => IngestEntry {
                path: path.clone(),
                name: None,
                stored: false,
                rows: None,
                features: None,
                classes: None,
                reasons: vec![e.to_string()],
            },
            Ok(ds) => {
                let elig = validate_eligibility(&ds);
                if elig.passed {
                    save_dataset(&store, &ds)?;
                }
                IngestEntry {
                    path: path.clone(),
                    name: Some(ds.name.clone()),
                    stored: elig.passed,
                    rows: Some(ds.n_rows()),
                    features: Some(ds.n_features()),
                    classes: Some(ds.n_classes),
                    reasons: elig.reasons,
                }
            }
        };
        entries.push(entry);
    }
    println!(
        "{:<24} {:>6} {:>8} {:>7}  status",
        "dataset", "rows", "features", "classes"
    );
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    for e in &entries {
        let name = e
            .name
            .clone()
            .unwrap_or_else(|| e.path.display().to_string());
        let status = if e.stored {
            "stored".to_string()
        } else {
            format!("rejected: {}", e.reasons.join("; "))
        };
        println!(
            "{:<24} {:>6} {:>8} {:>7}  {status}",
            name,
            opt(e.rows),
            opt(e.features),
            opt(e.classes)
        );
    }
    let stored = entries.iter().filter(|e| e.stored).count();
    println!("{stored} stored, {} rejected", entries.len() - stored);
    write_report(
        &store.root.join("reports/ingest.json"),
        "ingest",
        s,
        entries,
    )
}

#[derive(Serialize)]
struct CurveRun {
    repetitions: usize,
    csv: String,
}

pub fn curve(s: &Settings, a: &CurveArgs) -> Result<()> {
    let store = Store::new(&s.out);
    let m = s.pilot_size;
    let key = name_key(&a.dataset);
    let split = store.split(&a.dataset, split_seed(s))?;
    let pilot = draw_pilot(&split, m, seed::derive(s.seed, &[3, key]))?;
    let grid = fixed_grid(m, s.curve_step)?;
    let reps_list = if a.compare_reps.is_empty() {
        vec![s.curve_repetitions]
    } else {
        a.compare_reps.clone()
    };
    let dir = store.dir("curves")?;
    let stem = format!("{}-m{m}", a.dataset);
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for &reps in &reps_list {
        let cfg = curve_config(s, grid.clone(), reps, seed::derive(s.seed, &[4, key]));
        let c = pilot_curve(&pilot, &cfg)?;
        let file = format!("{stem}-r{reps}.csv");
        write_text(&dir.join(&file), &c.to_csv())?;
        println!(
            "{}: m={m}, R={reps}: s_{} = {:.4} .. s_{} = {:.4} -> {}",
            a.dataset,
            c.grid[0],
            c.s[0],
            c.grid[c.grid.len() - 1],
            c.s[c.s.len() - 1],
            dir.join(&file).display()
        );
        series.push(Series::line(
            format!("R={reps}"),
            c.grid
                .iter()
                .map(|&x| x as f64)
                .zip(c.s.iter().copied())
                .collect(),
        ));
        runs.push(CurveRun {
            repetitions: reps,
            csv: file,
        });
    }
    let svg = chart(&Chart {
        title: format!("{} learning curve, pilot of {m}", a.dataset),
        x_label: "train size x".into(),
        y_label: "F1 macro".into(),
        series,
    });
    write_text(&dir.join(format!("{stem}.svg")), &svg)?;
    #[derive(Serialize)]
    struct CurveReport {
        dataset: String,
        m: usize,
        minority_ratio: f64,
        runs: Vec<CurveRun>,
    }
    write_report(
        &dir.join(format!("{stem}.json")),
        "curve",
        s,
        CurveReport {
            dataset: a.dataset.clone(),
            m,
            minority_ratio: pilot.data.minority_ratio(),
            runs,
        },
    )
}

pub fn groundtruth(s: &Settings, a: &TruthArgs) -> Result<()> {
    let store = Store::new(&s.out);
    let names = if a.datasets.is_empty() {
        store.dataset_names()?
    } else {
        a.datasets.clone()
    };
    if names.is_empty() {
        bail!(
            "no datasets in {}; run ingest or synth first",
            store.root.display()
        );
    }
    store.dir("groundtruth")?;
    #[derive(Serialize, Default)]
    struct Summary {
        computed: Vec<String>,
        cached: Vec<String>,
        failed: Vec<(String, String)>,
    }
    let mut summary = Summary::default();
    for name in names {
        let key = name_key(&name);
        let mut cfg = ReferenceConfig::new(
            SPLIT_TOTAL - SPLIT_TEST,
            s.truth_repetitions,
            seed::derive(s.seed, &[2, key]),
        );
        cfg.forest = forest(s.truth_trees, seed::derive(s.seed, &[2, key, 1]));
        if !a.force {
            match store.load_truth(&name) {
                Ok(Some(gt)) if same_json(&gt.config, &cfg) && gt.split_seed == split_seed(s) => {
                    println!("{name}: cached");
                    summary.cached.push(name);
                    continue;
                }
                Ok(Some(_)) => {
                    eprintln!(
                        "warning: {name}: cached record was computed with other settings; kept (use --force to recompute)"
                    );
                    summary.cached.push(name);
                    continue;
                }
                Ok(None) => {}
                Err(e) => eprintln!("warning: {e:#}; recomputing"),
            }
        }
        let result = store
            .split(&name, split_seed(s))
            .and_then(|split| Ok(ground_truth(&split, &cfg)?));
        match result {
            Ok(gt) => {
                write_text(&store.truth_path(&name), &gt.to_json()?)?;
                println!(
                    "{name}: final performance {:.4}, needed amount {}{}",
                    gt.final_performance,
                    gt.needed_amount,
                    if gt.needed_reached {
                        ""
                    } else {
                        " (not reached)"
                    }
                );
                summary.computed.push(name);
            }
            Err(e) => {
                eprintln!("{name}: failed: {e:#}");
                summary.failed.push((name, format!("{e:#}")));
            }
        }
    }
    let failed = summary.failed.len();
    let total = failed + summary.computed.len() + summary.cached.len();
    write_report(
        &store.root.join("reports/groundtruth.json"),
        "groundtruth",
        s,
        &summary,
    )?;
    if failed > 0 {
        let names: Vec<&str> = summary.failed.iter().map(|f| f.0.as_str()).collect();
        bail!("{failed} of {total} datasets failed: {}", names.join(", "));
    }
    Ok(())
}

fn same_json<T: Serialize>(a: &T, b: &T) -> bool {
    serde_json::to_value(a).ok() == serde_json::to_value(b).ok()
}

fn mode_name(mode: ModeArg) -> &'static str {
    match mode {
        ModeArg::Fixed => "fixed",
        ModeArg::Percent => "percent",
    }
}

pub fn budget_train(s: &Settings, a: &TrainArgs) -> Result<()> {
    let kind = a
        .method
        .model_kind()
        .ok_or_else(|| anyhow!("{} needs no training", a.method))?;
    let store = Store::new(&s.out);
    let corpus = store.corpus()?;
    let mode = match a.mode {
        ModeArg::Fixed => FeatureMode::Fixed {
            grid: fixed_grid(s.pilot_size, s.curve_step)?,
        },
        ModeArg::Percent => {
            if s.varying_min < 100 || s.varying_min > s.varying_max {
                bail!(
                    "percent mode needs 100 <= min-m <= max-m, got {}..={}",
                    s.varying_min,
                    s.varying_max
                );
            }
            FeatureMode::Percent
        }
    };
    let mut examples = Vec::new();
    for (name, split, truth) in &corpus {
        let key = name_key(name);
        let m = match a.mode {
            ModeArg::Fixed => s.pilot_size,
            ModeArg::Percent => {
                seed::rng_at(s.seed, &[5, key]).random_range(s.varying_min..=s.varying_max)
            }
        };
        let pilot = draw_pilot(split, m, seed::derive(s.seed, &[6, key]))?;
        let cfg = curve_config(
            s,
            mode.curve_grid(m),
            s.curve_repetitions,
            seed::derive(s.seed, &[7, key]),
        );
        let curve = pilot_curve(&pilot, &cfg).with_context(|| format!("curve of `{name}`"))?;
        examples.push(BudgetExample::new(
            name.clone(),
            &curve,
            &mode,
            truth.final_performance,
            truth.needed_amount,
        )?);
    }
    let scheme = match a.mode {
        ModeArg::Fixed => BinScheme::standard(),
        ModeArg::Percent => {
            let ratios: Vec<f64> = examples
                .iter()
                .map(|e| e.needed_amount as f64 / e.pilot_size as f64)
                .collect();
            make_quantile_bins(&ratios, BIN_COUNT, BinMode::Ratio)?
        }
    };
    let config = BudgetConfig {
        forest: forest(s.model_trees, seed::derive(s.seed, &[8])),
        ..BudgetConfig::default()
    };
    let model = train_budget_model(&examples, kind, &scheme, &config)?;
    let path = a.output.clone().unwrap_or_else(|| {
        store
            .root
            .join("models")
            .join(format!("{}-{}.json", a.method, mode_name(a.mode)))
    });
    write_text(&path, &model.to_json()?)?;
    #[derive(Serialize)]
    struct TrainReport {
        model: PathBuf,
        fingerprint: String,
        datasets: Vec<String>,
        scheme: BinScheme,
    }
    write_report(
        &path.with_extension("run.json"),
        "budget train",
        s,
        TrainReport {
            model: path.clone(),
            fingerprint: model.fingerprint(),
            datasets: examples.iter().map(|e| e.name.clone()).collect(),
            scheme,
        },
    )?;
    println!(
        "trained {} on {} datasets -> {} ({})",
        a.method,
        examples.len(),
        path.display(),
        model.fingerprint()
    );
    Ok(())
}

fn find_model(store: &Store, paths: &[PathBuf], method: Method) -> Result<(PathBuf, BudgetModel)> {
    let read = |p: &Path| -> Result<BudgetModel> {
        let text = std::fs::read_to_string(p)
            .with_context(|| format!("cannot read model {}", p.display()))?;
        BudgetModel::from_json(&text).with_context(|| format!("invalid model {}", p.display()))
    };
    for p in paths {
        let model = read(p)?;
        if model.method() == method {
            return Ok((p.clone(), model));
        }
    }
    for mode in ["fixed", "percent"] {
        let p = store
            .root
            .join("models")
            .join(format!("{method}-{mode}.json"));
        if p.exists() {
            return Ok((p.clone(), read(&p)?));
        }
    }
    bail!("no trained model for {method}; run `budget train --method {method}` or pass --model")
}

/// Check that a pilot of `m` rows can produce every curve point the model
/// reads.
fn check_pilot_fits(model: &BudgetModel, path: &Path, m: usize) -> Result<()> {
    match &model.mode {
        FeatureMode::Fixed { grid } => {
            let top = *grid.last().unwrap_or(&0);
            if top + MIN_HELD_OUT > m {
                bail!(
                    "model {} reads s_x up to x={top}, which needs pilots of at least {} rows; this pilot has {m}",
                    path.display(),
                    top + MIN_HELD_OUT
                );
            }
        }
        FeatureMode::Percent => {
            if m < 100 {
                bail!(
                    "percent-mode model {} needs pilots of at least 100 rows so that s at 90% keeps {MIN_HELD_OUT} held-out rows; this pilot has {m}",
                    path.display()
                );
            }
        }
    }
    Ok(())
}

pub fn budget_predict(s: &Settings, a: &PredictArgs) -> Result<()> {
    let store = Store::new(&s.out);
    let data = load_csv(&a.pilot, &a.label)?;
    let m = data.n_rows();
    let pilot = PilotStudy {
        m,
        seed: 0,
        indices: (0..m).collect(),
        data,
    };
    let mut curves: Vec<LearningCurve> = Vec::new();
    let mut curve_for = |grid: Vec<usize>| -> Result<LearningCurve> {
        if let Some(c) = curves.iter().find(|c| c.grid == grid) {
            return Ok(c.clone());
        }
        let cfg = curve_config(s, grid, s.curve_repetitions, seed::derive(s.seed, &[11]));
        let c = pilot_curve(&pilot, &cfg)?;
        curves.push(c.clone());
        Ok(c)
    };
    let mut reports = Vec::new();
    for &method in &a.method {
        let report = match method.model_kind() {
            None => powerlaw_budget(
                &curve_for(fixed_grid(m, s.curve_step)?)?,
                &BinScheme::standard(),
            )?,
            Some(_) => {
                let (path, model) = find_model(&store, &a.model, method)?;
                check_pilot_fits(&model, &path, m)?;
                predict_budget(&model, &curve_for(model.mode.curve_grid(m))?)?
            }
        };
        println!("{}", report.summary());
        reports.push(report);
    }
    let stem = a
        .pilot
        .file_stem()
        .and_then(|f| f.to_str())
        .unwrap_or("pilot");
    #[derive(Serialize)]
    struct PredictReport<'a> {
        pilot: &'a Path,
        m: usize,
        reports: Vec<databudget::budgeter::BudgetReport>,
    }
    write_report(
        &store
            .root
            .join("reports")
            .join(format!("budget-{stem}.json")),
        "budget predict",
        s,
        PredictReport {
            pilot: &a.pilot,
            m,
            reports,
        },
    )
}

pub fn benchmark(s: &Settings, a: &BenchArgs) -> Result<()> {
    let store = Store::new(&s.out);
    let corpus: Vec<CorpusEntry> = store
        .corpus()?
        .into_iter()
        .map(|(name, split, truth)| CorpusEntry { name, split, truth })
        .collect();
    let pilot = if a.varying {
        PilotMode::Varying {
            min: s.varying_min,
            max: s.varying_max,
        }
    } else {
        PilotMode::Fixed { m: s.pilot_size }
    };
    let curve_forest = forest(s.curve_trees, 0);
    let cfg = BenchmarkConfig {
        methods: a.methods.clone(),
        pilot,
        repetitions: s.benchmark_repetitions,
        curve_repetitions: s.curve_repetitions,
        curve_step: s.curve_step,
        curve_forest,
        budget: BudgetConfig {
            forest: forest(s.model_trees, seed::derive(s.seed, &[8])),
            ..BudgetConfig::default()
        },
        clusters: s.clusters,
        train_frac: 0.8,
        seed: s.seed,
    };
    let report = run_benchmark(&corpus, &cfg)?;
    let tag = match cfg.pilot {
        PilotMode::Fixed { m } => format!("fixed-m{m}"),
        PilotMode::Varying { min, max } => format!("varying-m{min}-{max}"),
    };
    let dir = store.dir(&format!("benchmark/{tag}"))?;
    write_report(&dir.join("report.json"), "benchmark", s, &report)?;
    write_text(&dir.join("rows.csv"), &report.rows_csv()?)?;

    println!(
        "{} datasets in {} clusters, {} repetitions",
        report.datasets.len(),
        report.cluster_count,
        cfg.repetitions
    );
    println!("{:<12} {:>9} {:>7} {:>7}", "method", "R2", "Acc0", "Acc1");
    for sm in &report.summaries {
        let r2 = sm
            .r2_mean
            .map_or("undefined".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<12} {:>9} {:>7.4} {:>7.4}",
            sm.method.as_str(),
            r2,
            sm.acc0_mean,
            sm.acc1_mean
        );
    }

    // final-performance error against pilot class balance
    let mut series = Vec::new();
    for sm in &report.summaries {
        let pts = &sm.balance.points;
        series.push(Series::dots(
            sm.method.as_str(),
            pts.iter()
                .map(|p| (p.minority_ratio, p.abs_error))
                .collect(),
        ));
        if let (Some(k), Some(b)) = (sm.balance.slope, sm.balance.intercept) {
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
                    (acc.0.min(p.minority_ratio), acc.1.max(p.minority_ratio))
                });
            series.push(Series::line(
                format!("{} trend", sm.method.as_str()),
                vec![(lo, k * lo + b), (hi, k * hi + b)],
            ));
        }
    }
    write_text(
        &dir.join("balance.svg"),
        &chart(&Chart {
            title: "Final-performance error vs pilot minority ratio".into(),
            x_label: "minority-label ratio".into(),
            y_label: "|predicted - true| final performance".into(),
            series,
        }),
    )?;

    #[derive(Serialize)]
    struct Analysis {
        one_point: Vec<databudget::budgeter::OnePointFit>,
        coefficient_profile: Option<Vec<Vec<f64>>>,
        split_comparison: Vec<(String, databudget::curves::SplitComparison)>,
    }
    let mut analysis = Analysis {
        one_point: Vec::new(),
        coefficient_profile: None,
        split_comparison: Vec::new(),
    };

    if let PilotMode::Fixed { m } = cfg.pilot {
        let curves: Vec<LearningCurve> = report.pilots.iter().map(|p| p.curve.clone()).collect();
        let finals: Vec<f64> = report.pilots.iter().map(|p| p.true_final).collect();
        analysis.one_point = one_point_profile(&curves, &finals)?;
        write_text(
            &dir.join("one_point_r2.svg"),
            &chart(&Chart {
                title: format!("One-point fit R² of final performance on s_x (m={m})"),
                x_label: "train size x".into(),
                y_label: "R²".into(),
                series: vec![Series::line(
                    "R²",
                    analysis
                        .one_point
                        .iter()
                        .map(|f| (f.x as f64, f.r2))
                        .collect(),
                )],
            }),
        )?;

        let mode = FeatureMode::Fixed {
            grid: curves[0].grid.clone(),
        };
        let examples = report
            .pilots
            .iter()
            .map(|p| {
                BudgetExample::new(
                    p.dataset.clone(),
                    &p.curve,
                    &mode,
                    p.true_final,
                    p.true_needed,
                )
            })
            .collect::<databudget::Result<Vec<_>>>()?;
        let profile = train_budget_model(
            &examples,
            ModelKind::Lr,
            &BinScheme::standard(),
            &cfg.budget,
        )
        .and_then(|model| coefficient_profile(&model));
        match profile {
            Ok(rows) => {
                let series = rows
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        Series::line(
                            format!("bin {k}"),
                            mode.curve_grid(m)
                                .iter()
                                .map(|&x| x as f64)
                                .zip(row.iter().copied())
                                .collect(),
                        )
                    })
                    .collect();
                write_text(
                    &dir.join("coefficient_profile.svg"),
                    &chart(&Chart {
                        title: "Needed-amount logistic coefficients per bin".into(),
                        x_label: "train size x".into(),
                        y_label: "coefficient of s_x".into(),
                        series,
                    }),
                )?;
                analysis.coefficient_profile = Some(rows);
            }
            Err(e) => eprintln!("note: no coefficient profile: {e}"),
        }
    } else {
        eprintln!("note: one-point and coefficient figures need a fixed pilot size; skipped");
    }

    let split_m = match cfg.pilot {
        PilotMode::Fixed { m } => m,
        PilotMode::Varying { min, .. } => min,
    };
    for e in &corpus {
        let key = name_key(&e.name);
        let pilot = draw_pilot(&e.split, split_m, seed::derive(s.seed, &[12, key]))?;
        let sc = SplitCompareConfig {
            x: None,
            repetitions: s.curve_repetitions,
            forest: curve_forest,
            seed: seed::derive(s.seed, &[13, key]),
        };
        let cmp = split_comparison_with(&pilot, &e.split, &sc, e.truth.final_performance)?;
        analysis.split_comparison.push((e.name.clone(), cmp));
    }
    let names = ["single", "five-fold", "multiple", "full-test"];
    let groups: Vec<(String, Vec<f64>)> = names
        .iter()
        .enumerate()
        .map(|(k, n)| {
            (
                n.to_string(),
                analysis
                    .split_comparison
                    .iter()
                    .map(|(_, c)| c.error_rates()[k])
                    .collect(),
            )
        })
        .collect();
    write_text(
        &dir.join("split_comparison.svg"),
        &box_chart(
            &format!("Error rate |M/O_D - 1| by splitting method (m={split_m})"),
            "error rate",
            &groups,
        ),
    )?;
    write_report(&dir.join("analysis.json"), "benchmark", s, &analysis)?;
    println!("report and figures -> {}", dir.display());
    Ok(())
}
