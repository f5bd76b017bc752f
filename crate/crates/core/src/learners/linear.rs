use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.nrows() > 0 && x.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.ncols(),
            });
        }
        Ok(x.outer_iter()
            .map(|r| {
                self.bias
                    + self
                        .weights
                        .iter()
                        .zip(r.iter())
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect())
    }
}

/// Pivot ratio below which the centred Gram matrix counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

/// Ridge regression by Cholesky on the centred normal equations, which
/// leaves the bias unpenalised.
pub fn fit_linear_regression(x: ArrayView2<'_, f64>, y: &[f64], ridge: f64) -> Result<LinearModel> {
    let (n, d) = x.dim();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("linear regression needs at least two rows"));
    }
    if !(ridge >= 0.0) {
        return Err(Error::invalid("ridge must be non-negative"));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    if d == 0 {
        return Ok(LinearModel {
            weights: Vec::new(),
            bias: y_mean,
        });
    }
    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let xc = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - means[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let mut gram = xc.transpose() * &xc;
    for j in 0..d {
        gram[(j, j)] += ridge;
    }
    let rhs = xc.transpose() * yc;
    let scale = (0..d).map(|j| gram[(j, j)]).fold(0.0f64, f64::max);
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::Singular)?;
    let l = chol.l_dirty();
    let min_pivot = (0..d)
        .map(|j| l[(j, j)] * l[(j, j)])
        .fold(f64::INFINITY, f64::min);
    if scale == 0.0 || min_pivot <= SINGULAR_TOL * scale {
        return Err(Error::Singular);
    }
    let w = chol.solve(&rhs);
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, bias })
}
