use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::{BudgetModel, FinalModel, NeededModel};
use crate::curves::LearningCurve;
use crate::learners::{fit_linear_regression, r2_score};
use crate::{Error, Result};

/// `y = k * s_x + b` over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnePointFit {
    pub x: usize,
    pub k: f64,
    pub b: f64,
    pub r2: f64,
}

pub fn one_point_analysis(
    curves: &[LearningCurve],
    targets: &[f64],
    x: usize,
) -> Result<OnePointFit> {
    if curves.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: curves.len(),
            actual: targets.len(),
        });
    }
    let s: Vec<f64> = curves
        .iter()
        .map(|c| {
            c.at(x)
                .ok_or_else(|| Error::invalid(format!("a curve has no s_{x}")))
        })
        .collect::<Result<_>>()?;
    let design = Array2::from_shape_vec((s.len(), 1), s).expect("one column");
    let model = fit_linear_regression(design.view(), targets, 0.0)?;
    let fitted = model.predict(design.view())?;
    Ok(OnePointFit {
        x,
        k: model.weights[0],
        b: model.bias,
        r2: r2_score(targets, &fitted)?,
    })
}

/// One-point fits at every train size shared by all curves. Sizes where
/// `s_x` does not vary across the corpus are skipped.
pub fn one_point_profile(curves: &[LearningCurve], targets: &[f64]) -> Result<Vec<OnePointFit>> {
    let first = curves.first().ok_or(Error::EmptyInput)?;
    let mut out = Vec::new();
    for &x in &first.grid {
        if curves.iter().any(|c| c.at(x).is_none()) {
            continue;
        }
        match one_point_analysis(curves, targets, x) {
            Ok(f) => out.push(f),
            Err(Error::Singular) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Indices of the `k` largest `|w|`, largest first; equal magnitudes keep
/// the lower index first.
pub fn select_top_indices(weights: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > weights.len() {
        return Err(Error::invalid(format!(
            "k={k} exceeds {} features",
            weights.len()
        )));
    }
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by(|&a, &b| {
        weights[b]
            .abs()
            .total_cmp(&weights[a].abs())
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(idx)
}

/// Top-`k` features by the linear final model's coefficients, as indices
/// into the model's full feature vector.
pub fn select_top_coefficients(model: &BudgetModel, k: usize) -> Result<Vec<usize>> {
    let FinalModel::Linear(linear) = &model.final_model else {
        return Err(Error::ModelMismatch(
            "top coefficients need a linear final model".into(),
        ));
    };
    let top = select_top_indices(&linear.weights, k)?;
    Ok(match &model.selected {
        Some(cols) => top.into_iter().map(|i| cols[i]).collect(),
        None => top,
    })
}

/// Logistic coefficients of the needed-amount model on the raw feature
/// scale: one row per bin class, one column per model feature.
pub fn coefficient_profile(model: &BudgetModel) -> Result<Vec<Vec<f64>>> {
    match &model.needed_model {
        NeededModel::Logistic(m) => Ok(m.raw_coefficients()),
        _ => Err(Error::ModelMismatch(
            "coefficient profile needs a logistic needed-amount model".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budgeter::{
        train_budget_model, BinScheme, BudgetConfig, BudgetExample, FeatureMode, ModelKind,
    };
    use rand::Rng;

    fn curve_with(values: &[(usize, f64)]) -> LearningCurve {
        LearningCurve {
            grid: values.iter().map(|v| v.0).collect(),
            s: values.iter().map(|v| v.1).collect(),
            stddev: vec![0.0; values.len()],
            m: 100,
        }
    }

    #[test]
    fn exact_one_point_relation() {
        let mut rng = crate::seed::rng(1);
        let mut curves = Vec::new();
        let mut y = Vec::new();
        for _ in 0..30 {
            let s60: f64 = rng.random_range(0.5..0.9);
            curves.push(curve_with(&[(10, rng.random()), (60, s60)]));
            y.push(2.0 * s60 - 0.1);
        }
        let fit = one_point_analysis(&curves, &y, 60).unwrap();
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.k - 2.0).abs() < 1e-9 && (fit.b + 0.1).abs() < 1e-9);
        assert!(one_point_analysis(&curves, &y, 61).is_err());
        let profile = one_point_profile(&curves, &y).unwrap();
        assert_eq!(profile.len(), 2);
    }

    #[test]
    fn independent_target_has_small_r2() {
        let mut rng = crate::seed::rng(2);
        let curves: Vec<_> = (0..400)
            .map(|_| curve_with(&[(30, rng.random())]))
            .collect();
        let y: Vec<f64> = (0..400).map(|_| rng.random()).collect();
        let fit = one_point_analysis(&curves, &y, 30).unwrap();
        assert!(fit.r2.abs() < 0.1, "{}", fit.r2);
    }

    #[test]
    fn top_indices() {
        let mut got = select_top_indices(&[0.9, -0.05, 0.5], 2).unwrap();
        got.sort();
        assert_eq!(got, vec![0, 2]);
        assert_eq!(
            select_top_indices(&[0.3, -0.3, 0.3, 0.3], 2).unwrap(),
            vec![0, 1]
        );
        assert!(select_top_indices(&[1.0], 0).unwrap().is_empty());
        assert!(select_top_indices(&[1.0], 2).is_err());
    }

    fn random_corpus(n: usize, seed: u64, label: impl Fn(&[f64]) -> usize) -> Vec<BudgetExample> {
        let mut rng = crate::seed::rng(seed);
        let mode = FeatureMode::fixed_for_pilot(100);
        (0..n)
            .map(|i| {
                let s: Vec<f64> = (0..81).map(|_| rng.random()).collect();
                let needed = [50, 150, 300, 600, 1500][label(&s)];
                let curve = LearningCurve {
                    grid: (10..=90).collect(),
                    stddev: vec![0.0; 81],
                    m: 100,
                    s: s.clone(),
                };
                BudgetExample::new(format!("d{i}"), &curve, &mode, s[80], needed).unwrap()
            })
            .collect()
    }

    #[test]
    fn profile_shape_and_sign() {
        // bin 0 exactly when s_10 is high; other bins follow s_11
        let corpus = random_corpus(300, 3, |s| {
            if s[0] > 0.6 {
                0
            } else {
                1 + ((s[1] * 4.0) as usize).min(3)
            }
        });
        let model = train_budget_model(
            &corpus,
            ModelKind::Lr,
            &BinScheme::standard(),
            &BudgetConfig::default(),
        )
        .unwrap();
        let profile = coefficient_profile(&model).unwrap();
        assert_eq!(profile.len(), 5);
        assert!(profile.iter().all(|r| r.len() == 81));
        let row0 = &profile[0];
        let best =
            select_top_indices(&row0.iter().map(|v| v.max(0.0)).collect::<Vec<_>>(), 1).unwrap()[0];
        assert_eq!(best, 0, "{row0:?}");

        let rf = train_budget_model(
            &corpus,
            ModelKind::Rf,
            &BinScheme::standard(),
            &BudgetConfig::default(),
        )
        .unwrap();
        assert!(coefficient_profile(&rf).is_err());
        assert!(select_top_coefficients(&rf, 3).is_err());
    }

    #[test]
    fn top_coefficients_map_through_selection() {
        let corpus = random_corpus(40, 4, |s| usize::from(s[5] > 0.5));
        let cfg = BudgetConfig {
            selected: Some(vec![80, 5, 7]),
            ..BudgetConfig::default()
        };
        let model =
            train_budget_model(&corpus, ModelKind::Lr, &BinScheme::standard(), &cfg).unwrap();
        // the final target is s_90, the first selected column
        assert_eq!(select_top_coefficients(&model, 1).unwrap(), vec![80]);
    }
}
