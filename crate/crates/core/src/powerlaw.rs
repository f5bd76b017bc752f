//! Dataset-independent baseline: fit `f(x) = 1 - b * x^c` to a pilot
//! learning curve and read the budget off the fitted function.
//!
//! The fit is a log-space linear least squares on `ln(1 - s) = ln b + c ln x`
//! followed by a bounded Levenberg-Marquardt refinement on the squared error
//! of the original model.

use serde::{Deserialize, Serialize};

use crate::curves::LearningCurve;
use crate::{Error, Result};

/// Train-set size at which the fitted curve is read as "final".
pub const DEFAULT_HORIZON: u64 = 2500;
/// Points with `s >= 1 - SATURATION_EPS` are left out of the log-space solve.
pub const SATURATION_EPS: f64 = 1e-6;
pub const REFINE_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub b: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeedStatus {
    /// Closed-form inversion, checked against neighbouring integers.
    Solved,
    /// Curve does not improve with data (`c >= 0`); answered by scanning.
    NonImproving,
    /// No `x` in `[1, horizon]` meets the target; the horizon is returned.
    NotReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeededEstimate {
    pub amount: u64,
    pub status: NeedStatus,
}

impl PowerLawFit {
    pub fn constant_one(horizon: u64) -> Self {
        PowerLawFit {
            b: 0.0,
            c: 0.0,
            rms_residual: 0.0,
            horizon,
        }
    }

    pub fn raw(&self, x: f64) -> f64 {
        1.0 - self.b * x.powf(self.c)
    }

    /// Fitted value clamped to `[0, 1]`.
    pub fn value(&self, x: f64) -> f64 {
        self.raw(x).clamp(0.0, 1.0)
    }
}

fn sse(xs: &[f64], ys: &[f64], b: f64, c: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = 1.0 - b * x.powf(c) - y;
            e * e
        })
        .sum()
}

/// Fit to a learning curve.
pub fn fit_power_law(curve: &LearningCurve) -> Result<PowerLawFit> {
    let xs: Vec<f64> = curve.grid.iter().map(|&x| x as f64).collect();
    fit_points(&xs, &curve.s, DEFAULT_HORIZON)
}

pub fn fit_points(xs: &[f64], ys: &[f64], horizon: u64) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::invalid("power-law fit needs at least three points"));
    }
    if xs.iter().any(|&x| !(x >= 1.0)) {
        return Err(Error::invalid("power-law x values must be at least 1"));
    }
    let usable: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y < 1.0 - SATURATION_EPS)
        .map(|(&x, &y)| (x.ln(), (1.0 - y).ln()))
        .collect();
    if usable.is_empty() {
        let mut fit = PowerLawFit::constant_one(horizon);
        fit.rms_residual = (sse(xs, ys, 0.0, 0.0) / xs.len() as f64).sqrt();
        return Ok(fit);
    }
    if usable.len() < 3 {
        return Err(Error::invalid(format!(
            "only {} unsaturated points; need at least three",
            usable.len()
        )));
    }

    let k = usable.len() as f64;
    let mean_u = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_v = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let suu: f64 = usable.iter().map(|p| (p.0 - mean_u).powi(2)).sum();
    let suv: f64 = usable.iter().map(|p| (p.0 - mean_u) * (p.1 - mean_v)).sum();
    let c0 = suv / suu;
    let b0 = (mean_v - c0 * mean_u).exp();

    let (b, c) = refine(xs, ys, b0, c0);
    Ok(PowerLawFit {
        b,
        c,
        rms_residual: (sse(xs, ys, b, c) / xs.len() as f64).sqrt(),
        horizon,
    })
}

/// Levenberg-Marquardt on (b, c) with `b >= 0`. Only steps that lower the
/// loss are taken, so the result is never worse than the start.
fn refine(xs: &[f64], ys: &[f64], mut b: f64, mut c: f64) -> (f64, f64) {
    let mut loss = sse(xs, ys, b, c);
    let mut lambda = 1e-3;
    for _ in 0..REFINE_ITERS {
        if loss == 0.0 || lambda > 1e12 {
            break;
        }
        // e = 1 - b x^c - y;  de/db = -x^c;  de/dc = -b x^c ln x
        let (mut jbb, mut jbc, mut jcc, mut gb, mut gc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(ys) {
            let p = x.powf(c);
            let e = 1.0 - b * p - y;
            let db = -p;
            let dc = -b * p * x.ln();
            jbb += db * db;
            jbc += db * dc;
            jcc += dc * dc;
            gb += db * e;
            gc += dc * e;
        }
        let a11 = jbb * (1.0 + lambda);
        let a22 = jcc * (1.0 + lambda);
        let det = a11 * a22 - jbc * jbc;
        if !(det.is_finite() && det > 0.0) {
            lambda *= 10.0;
            continue;
        }
        let step_b = -(a22 * gb - jbc * gc) / det;
        let step_c = -(a11 * gc - jbc * gb) / det;
        let nb = (b + step_b).max(0.0);
        let nc = c + step_c;
        let new_loss = sse(xs, ys, nb, nc);
        if new_loss.is_finite() && new_loss < loss {
            b = nb;
            c = nc;
            loss = new_loss;
            lambda = (lambda / 10.0).max(1e-12);
        } else {
            lambda *= 10.0;
        }
    }
    (b, c)
}

/// `clamp(1 - b * N^c, 0, 1)` at the fit's horizon.
pub fn extrapolate_final(fit: &PowerLawFit) -> f64 {
    fit.value(fit.horizon as f64)
}

/// Smallest integer `x` in `[1, N]` with `f(x) > threshold * f(N)`.
pub fn extrapolate_needed(fit: &PowerLawFit, threshold: f64) -> NeededEstimate {
    let n = fit.horizon.max(1);
    let target = threshold * fit.value(n as f64);
    let meets = |x: u64| fit.value(x as f64) > target;

    if fit.b > 0.0 && fit.c < 0.0 {
        // f is non-decreasing, so f(x) > t  <=>  x > ((1 - t) / b)^(1/c)
        let q = (1.0 - target) / fit.b;
        if !(q > 0.0) {
            return NeededEstimate {
                amount: n,
                status: NeedStatus::NotReached,
            };
        }
        let root = q.powf(1.0 / fit.c);
        let mut x = if root.is_finite() && root < n as f64 {
            (root.floor() as u64 + 1).clamp(1, n)
        } else {
            n
        };
        // rounding in the inversion can leave us one step off either way
        while x > 1 && meets(x - 1) {
            x -= 1;
        }
        while x <= n && !meets(x) {
            x += 1;
        }
        return if x > n {
            NeededEstimate {
                amount: n,
                status: NeedStatus::NotReached,
            }
        } else {
            NeededEstimate {
                amount: x,
                status: NeedStatus::Solved,
            }
        };
    }

    let status = if fit.b > 0.0 {
        NeedStatus::NonImproving
    } else {
        NeedStatus::Solved
    };
    match (1..=n).find(|&x| meets(x)) {
        Some(x) => NeededEstimate { amount: x, status },
        None => NeededEstimate {
            amount: n,
            status: NeedStatus::NotReached,
        },
    }
}

/// Persisted summary of a fit and its two predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub b: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub horizon: u64,
    pub final_prediction: f64,
    pub needed_prediction: u64,
    pub needed_status: NeedStatus,
}

impl PowerLawReport {
    pub fn new(fit: &PowerLawFit, threshold: f64) -> Self {
        let needed = extrapolate_needed(fit, threshold);
        PowerLawReport {
            b: fit.b,
            c: fit.c,
            rms_residual: fit.rms_residual,
            horizon: fit.horizon,
            final_prediction: extrapolate_final(fit),
            needed_prediction: needed.amount,
            needed_status: needed.status,
        }
    }
}
