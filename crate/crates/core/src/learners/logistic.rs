use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::forest::argmax_low;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub iters: usize,
    pub step: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 1e-4,
            iters: 500,
            step: 0.1,
        }
    }
}

/// Multinomial logistic regression over standardised features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// C x d, acting on standardised features.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub means: Vec<f64>,
    /// Feature scales; zero marks a constant column, which is ignored.
    pub scales: Vec<f64>,
}

impl LogisticModel {
    pub fn n_classes(&self) -> usize {
        self.biases.len()
    }

    fn standardise(&self, row: impl Iterator<Item = f64>, out: &mut [f64]) {
        for (j, v) in row.enumerate() {
            out[j] = if self.scales[j] > 0.0 {
                (v - self.means[j]) / self.scales[j]
            } else {
                0.0
            };
        }
    }

    fn logits(&self, z: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + w.iter().zip(z).map(|(a, c)| a * c).sum::<f64>())
            .collect()
    }

    /// Argmax of the logits; ties go to the lowest class id.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let d = self.means.len();
        if x.nrows() > 0 && x.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.ncols(),
            });
        }
        let mut z = vec![0.0; d];
        Ok(x.outer_iter()
            .map(|r| {
                self.standardise(r.iter().copied(), &mut z);
                argmax_low(&self.logits(&z))
            })
            .collect())
    }

    /// Coefficients mapped back to the raw feature scale, one row per class.
    pub fn raw_coefficients(&self) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .map(|w| {
                w.iter()
                    .zip(&self.scales)
                    .map(|(a, s)| if *s > 0.0 { a / s } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

/// Full-batch gradient descent on the mean cross-entropy plus
/// `l2/2 * |W|^2`, from zero weights, for a fixed number of steps.
pub fn fit_logistic_regression(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    let (n, d) = x.dim();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let distinct = {
        let mut seen = vec![false; n_classes];
        y.iter().for_each(|&c| seen[c] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::SingleClass);
    }

    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let scales: Vec<f64> = (0..d)
        .map(|j| {
            let var = x
                .column(j)
                .iter()
                .map(|v| (v - means[j]).powi(2))
                .sum::<f64>()
                / n as f64;
            let sd = var.sqrt();
            if sd > 1e-12 * (1.0 + means[j].abs()) {
                sd
            } else {
                0.0
            }
        })
        .collect();
    let mut model = LogisticModel {
        weights: vec![vec![0.0; d]; n_classes],
        biases: vec![0.0; n_classes],
        means,
        scales,
    };
    let mut z = vec![0.0; n * d];
    for (i, r) in x.outer_iter().enumerate() {
        model.standardise(r.iter().copied(), &mut z[i * d..(i + 1) * d]);
    }

    let mut grad_w = vec![vec![0.0; d]; n_classes];
    let mut grad_b = vec![0.0; n_classes];
    for _ in 0..params.iters {
        grad_w
            .iter_mut()
            .for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
        grad_b.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let row = &z[i * d..(i + 1) * d];
            let mut p = model.logits(row);
            softmax_in_place(&mut p);
            p[y[i]] -= 1.0;
            for c in 0..n_classes {
                grad_b[c] += p[c];
                for j in 0..d {
                    grad_w[c][j] += p[c] * row[j];
                }
            }
        }
        let inv_n = 1.0 / n as f64;
        for c in 0..n_classes {
            model.biases[c] -= params.step * grad_b[c] * inv_n;
            for j in 0..d {
                let g = grad_w[c][j] * inv_n + params.l2 * model.weights[c][j];
                model.weights[c][j] -= params.step * g;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn separable_1d() {
        let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64 - 9.5);
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let m = fit_logistic_regression(x.view(), &y, &LogisticParams::default()).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
    }

    #[test]
    fn constant_feature_gives_majority() {
        // The intercept-only optimum is b_c = log(freq_c) + const, whose
        // argmax is the majority class (1 here, 5 of 8 rows).
        let x = Array2::from_elem((8, 1), 3.0);
        let y = vec![0, 1, 1, 2, 1, 0, 1, 1];
        let m = fit_logistic_regression(x.view(), &y, &LogisticParams::default()).unwrap();
        let probe = array![[3.0], [-100.0], [55.0]];
        assert_eq!(m.predict(probe.view()).unwrap(), vec![1, 1, 1]);
        assert!(m.biases[1] > m.biases[0] && m.biases[0] > m.biases[2]);
    }

    #[test]
    fn deterministic_and_errors() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0]];
        let y = vec![0, 0, 1, 1];
        let p = LogisticParams::default();
        assert_eq!(
            fit_logistic_regression(x.view(), &y, &p).unwrap(),
            fit_logistic_regression(x.view(), &y, &p).unwrap()
        );
        assert!(matches!(
            fit_logistic_regression(x.view(), &[1, 1, 1, 1], &p),
            Err(Error::SingleClass)
        ));
        let m = fit_logistic_regression(x.view(), &y, &p).unwrap();
        assert!(m.predict(Array2::zeros((1, 3)).view()).is_err());
    }

    #[test]
    fn raw_coefficients_shape() {
        let x = Array2::from_shape_fn((30, 4), |(i, j)| ((i * (j + 1)) % 7) as f64);
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let m = fit_logistic_regression(x.view(), &y, &LogisticParams::default()).unwrap();
        let c = m.raw_coefficients();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|r| r.len() == 4));
    }
}
