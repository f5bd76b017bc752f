use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{featurize, BinMode, BinScheme, FeatureMode, FeatureVector};
use crate::curves::{LearningCurve, DEFAULT_THRESHOLD};
use crate::learners::{
    fit_forest_classifier, fit_forest_regressor, fit_linear_regression, fit_logistic_regression,
    ForestModel, ForestParams, ForestRegressor, LinearModel, LogisticModel, LogisticParams,
};
use crate::powerlaw::{fit_power_law, PowerLawFit, PowerLawReport, DEFAULT_HORIZON};
use crate::{Error, Result, FORMAT_VERSION};

/// Fewest corpus entries a meta-model is trained on.
pub const MIN_CORPUS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lr,
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Powerlaw,
    LearningLr,
    LearningRf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Powerlaw, Method::LearningLr, Method::LearningRf];

    pub fn model_kind(self) -> Option<ModelKind> {
        match self {
            Method::Powerlaw => None,
            Method::LearningLr => Some(ModelKind::Lr),
            Method::LearningRf => Some(ModelKind::Rf),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Powerlaw => "powerlaw",
            Method::LearningLr => "learning-lr",
            Method::LearningRf => "learning-rf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method {s:?}; expected powerlaw, learning-lr or learning-rf"
                ))
            })
    }
}

/// One corpus dataset as the meta-learner sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetExample {
    pub name: String,
    pub features: FeatureVector,
    pub pilot_size: usize,
    pub final_performance: f64,
    pub needed_amount: usize,
}

impl BudgetExample {
    pub fn new(
        name: impl Into<String>,
        curve: &LearningCurve,
        mode: &FeatureMode,
        final_performance: f64,
        needed_amount: usize,
    ) -> Result<Self> {
        Ok(BudgetExample {
            name: name.into(),
            features: featurize(curve, mode)?,
            pilot_size: curve.m,
            final_performance,
            needed_amount,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    /// L2 penalty of the linear final-performance model.
    pub ridge: f64,
    pub logistic: LogisticParams,
    pub forest: ForestParams,
    /// Train on this subset of feature indices only.
    pub selected: Option<Vec<usize>>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            ridge: 1e-3,
            logistic: LogisticParams::default(),
            forest: ForestParams::default(),
            selected: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FinalModel {
    Linear(LinearModel),
    Forest(ForestRegressor),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NeededModel {
    Logistic(LogisticModel),
    Forest(ForestModel),
    /// Every training label fell in one bin.
    Constant {
        bin: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub mode: FeatureMode,
    pub scheme: BinScheme,
    pub selected: Option<Vec<usize>>,
    pub final_model: FinalModel,
    pub needed_model: NeededModel,
}

impl BudgetModel {
    pub fn method(&self) -> Method {
        match self.kind {
            ModelKind::Lr => Method::LearningLr,
            ModelKind::Rf => Method::LearningRf,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BudgetModel = serde_json::from_str(text)?;
        if model.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model format version {} unsupported",
                model.format_version
            )));
        }
        Ok(model)
    }

    /// SHA-256 of the compact JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("model serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Feature matrix of `features` restricted to the model's columns.
    pub fn design(&self, features: &[&FeatureVector]) -> Result<Array2<f64>> {
        design_matrix(features, &self.mode, self.selected.as_deref())
    }

    /// Unclamped final-performance predictions for design rows.
    pub fn predict_final_raw(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        match &self.final_model {
            FinalModel::Linear(m) => m.predict(x.view()),
            FinalModel::Forest(m) => m.predict(x.view()),
        }
    }

    pub fn predict_bins(&self, x: &Array2<f64>) -> Result<Vec<usize>> {
        match &self.needed_model {
            NeededModel::Logistic(m) => m.predict(x.view()),
            NeededModel::Forest(m) => m.predict(x.view()),
            NeededModel::Constant { bin } => Ok(vec![*bin; x.nrows()]),
        }
    }
}

fn design_matrix(
    features: &[&FeatureVector],
    mode: &FeatureMode,
    selected: Option<&[usize]>,
) -> Result<Array2<f64>> {
    let width = mode.len();
    let columns: Vec<usize> = match selected {
        Some(s) => s.to_vec(),
        None => (0..width).collect(),
    };
    if let Some(&bad) = columns.iter().find(|&&j| j >= width) {
        return Err(Error::invalid(format!(
            "selected feature {bad} out of range for {width} features"
        )));
    }
    let mut x = Array2::zeros((features.len(), columns.len()));
    for (i, f) in features.iter().enumerate() {
        if f.mode != *mode {
            return Err(Error::ModelMismatch(format!(
                "feature mode {:?} does not match the model's {:?}",
                f.mode, mode
            )));
        }
        if f.values.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: f.values.len(),
            });
        }
        for (k, &j) in columns.iter().enumerate() {
            x[[i, k]] = f.values[j];
        }
    }
    Ok(x)
}

pub fn train_budget_model(
    corpus: &[BudgetExample],
    kind: ModelKind,
    scheme: &BinScheme,
    config: &BudgetConfig,
) -> Result<BudgetModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    if corpus.len() < MIN_CORPUS {
        return Err(Error::invalid(format!(
            "a budget model needs at least {MIN_CORPUS} datasets, got {}",
            corpus.len()
        )));
    }
    let mode = corpus[0].features.mode.clone();
    if corpus.iter().any(|e| e.features.mode != mode) {
        return Err(Error::ModelMismatch("corpus mixes feature modes".into()));
    }
    let rows: Vec<&FeatureVector> = corpus.iter().map(|e| &e.features).collect();
    let x = design_matrix(&rows, &mode, config.selected.as_deref())?;
    let finals: Vec<f64> = corpus.iter().map(|e| e.final_performance).collect();
    let bins: Vec<usize> = corpus
        .iter()
        .map(|e| scheme.label(e.needed_amount, e.pilot_size))
        .collect();

    let final_model = match kind {
        ModelKind::Lr => {
            FinalModel::Linear(fit_linear_regression(x.view(), &finals, config.ridge)?)
        }
        ModelKind::Rf => {
            FinalModel::Forest(fit_forest_regressor(x.view(), &finals, &config.forest)?)
        }
    };
    let needed_model = if bins.iter().all(|&b| b == bins[0]) {
        NeededModel::Constant { bin: bins[0] }
    } else {
        match kind {
            ModelKind::Lr => {
                NeededModel::Logistic(fit_logistic_regression(x.view(), &bins, &config.logistic)?)
            }
            ModelKind::Rf => {
                NeededModel::Forest(fit_forest_classifier(x.view(), &bins, &config.forest)?)
            }
        }
    };
    Ok(BudgetModel {
        format_version: FORMAT_VERSION,
        kind,
        mode,
        scheme: scheme.clone(),
        selected: config.selected.clone(),
        final_model,
        needed_model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub pilot_size: usize,
    pub grid_points: usize,
    pub s_first: f64,
    pub s_last: f64,
}

impl ReportInputs {
    fn of(curve: &LearningCurve) -> Self {
        ReportInputs {
            pilot_size: curve.m,
            grid_points: curve.grid.len(),
            s_first: curve.s.first().copied().unwrap_or(f64::NAN),
            s_last: curve.s.last().copied().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub method: Method,
    pub predicted_final: f64,
    pub predicted_bin: usize,
    pub bin_interval: (f64, f64),
    pub bin_mode: BinMode,
    /// Needed rows implied by the bin: the interval itself for count bins,
    /// the interval times the pilot size for ratio bins.
    pub needed_rows: (f64, f64),
    pub inputs: ReportInputs,
    pub model_fingerprint: Option<String>,
    pub powerlaw: Option<PowerLawReport>,
}

impl BudgetReport {
    fn new(
        method: Method,
        predicted_final: f64,
        bin: usize,
        scheme: &BinScheme,
        curve: &LearningCurve,
    ) -> Self {
        let interval = scheme.interval(bin);
        let needed_rows = match scheme.mode {
            BinMode::FixedCount => interval,
            BinMode::Ratio => (interval.0 * curve.m as f64, interval.1 * curve.m as f64),
        };
        BudgetReport {
            method,
            predicted_final,
            predicted_bin: bin,
            bin_interval: interval,
            bin_mode: scheme.mode,
            needed_rows,
            inputs: ReportInputs::of(curve),
            model_fingerprint: None,
            powerlaw: None,
        }
    }

    pub fn summary(&self) -> String {
        let (lo, hi) = self.needed_rows;
        format!(
            "{}: final performance {:.4}, needed amount bin {} ({:.0}..{:.0} rows) from a {}-row pilot",
            self.method, self.predicted_final, self.predicted_bin, lo, hi, self.inputs.pilot_size
        )
    }
}

pub fn predict_budget(model: &BudgetModel, curve: &LearningCurve) -> Result<BudgetReport> {
    let features = featurize(curve, &model.mode)?;
    let x = model.design(&[&features])?;
    let final_raw = model.predict_final_raw(&x)?[0];
    let bin = model.predict_bins(&x)?[0].min(model.scheme.len() - 1);
    let mut report = BudgetReport::new(
        model.method(),
        final_raw.clamp(0.0, 1.0),
        bin,
        &model.scheme,
        curve,
    );
    report.model_fingerprint = Some(model.fingerprint());
    Ok(report)
}

/// Power-law fit, or the flat curve at the last observed score when the
/// curve has too few unsaturated points to fit.
pub fn powerlaw_fit_or_flat(curve: &LearningCurve) -> PowerLawFit {
    fit_power_law(curve).unwrap_or_else(|_| {
        let last = curve.s.last().copied().unwrap_or(0.0);
        let sq = curve.s.iter().map(|s| (s - last).powi(2)).sum::<f64>();
        PowerLawFit {
            b: 1.0 - last,
            c: 0.0,
            rms_residual: (sq / curve.s.len().max(1) as f64).sqrt(),
            horizon: DEFAULT_HORIZON,
        }
    })
}

/// Budget from the dataset-independent power-law baseline.
pub fn powerlaw_budget(curve: &LearningCurve, scheme: &BinScheme) -> Result<BudgetReport> {
    if curve.grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let fit = powerlaw_fit_or_flat(curve);
    let pl = PowerLawReport::new(&fit, DEFAULT_THRESHOLD);
    let bin = scheme.label(pl.needed_prediction as usize, curve.m);
    let mut report = BudgetReport::new(Method::Powerlaw, pl.final_prediction, bin, scheme, curve);
    report.powerlaw = Some(pl);
    Ok(report)
}
