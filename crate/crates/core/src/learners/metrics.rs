use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Accuracy plus macro-averaged F1, recall and precision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricVector {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub recall_macro: f64,
    pub precision_macro: f64,
}

impl MetricVector {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.accuracy,
            self.f1_macro,
            self.recall_macro,
            self.precision_macro,
        ]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        MetricVector {
            accuracy: a[0],
            f1_macro: a[1],
            recall_macro: a[2],
            precision_macro: a[3],
        }
    }

    /// Every component strictly greater than the matching one of `other`.
    pub fn dominates(&self, other: &MetricVector) -> bool {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .all(|(a, b)| *a > b)
    }

    pub fn scaled(&self, k: f64) -> MetricVector {
        MetricVector::from_array(self.as_array().map(|v| v * k))
    }
}

fn check_pair(y_true: &[usize], y_pred: &[usize]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Per-class confusion counts over the classes seen in either vector.
struct Confusion {
    tp: Vec<u64>,
    fp: Vec<u64>,
    fn_: Vec<u64>,
    present: Vec<bool>,
    correct: u64,
    n: u64,
}

fn confusion(y_true: &[usize], y_pred: &[usize]) -> Confusion {
    let k = y_true.iter().chain(y_pred).max().map_or(0, |m| m + 1);
    let mut c = Confusion {
        tp: vec![0; k],
        fp: vec![0; k],
        fn_: vec![0; k],
        present: vec![false; k],
        correct: 0,
        n: y_true.len() as u64,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        c.present[t] = true;
        c.present[p] = true;
        if t == p {
            c.tp[t] += 1;
            c.correct += 1;
        } else {
            c.fp[p] += 1;
            c.fn_[t] += 1;
        }
    }
    c
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Macro averages run over the union of classes in `y_true` and `y_pred`;
/// a zero denominator contributes 0.
pub fn metric_vector(y_true: &[usize], y_pred: &[usize]) -> Result<MetricVector> {
    check_pair(y_true, y_pred)?;
    let c = confusion(y_true, y_pred);
    let (mut p_sum, mut r_sum, mut f_sum, mut classes) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..c.present.len() {
        if !c.present[k] {
            continue;
        }
        let precision = ratio(c.tp[k], c.tp[k] + c.fp[k]);
        let recall = ratio(c.tp[k], c.tp[k] + c.fn_[k]);
        let f1 = ratio(2 * c.tp[k], 2 * c.tp[k] + c.fp[k] + c.fn_[k]);
        p_sum += precision;
        r_sum += recall;
        f_sum += f1;
        classes += 1.0;
    }
    Ok(MetricVector {
        accuracy: ratio(c.correct, c.n),
        f1_macro: f_sum / classes,
        recall_macro: r_sum / classes,
        precision_macro: p_sum / classes,
    })
}

pub fn f1_macro(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    metric_vector(y_true, y_pred).map(|m| m.f1_macro)
}

/// Coefficient of determination. With zero target variance the score is 1
/// for a perfect fit and `-inf` otherwise (treated as undefined).
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::invalid("r2 needs at least two points"));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect() {
        let m = metric_vector(&[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap();
        assert_eq!(m.as_array(), [1.0; 4]);
        let one = metric_vector(&[2, 2, 2], &[2, 2, 2]).unwrap();
        assert_eq!(one.as_array(), [1.0; 4]);
    }

    #[test]
    fn all_zero_prediction() {
        // class0: tp=2 fp=2 fn=0 -> P=1/2 R=1 F1=2/3; class1: tp=0 -> 0, 0, 0
        let m = metric_vector(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.precision_macro - 0.25).abs() < 1e-15);
        assert_eq!(m.recall_macro, 0.5);
        assert!((m.f1_macro - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn total_miss() {
        let m = metric_vector(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(m.as_array(), [0.0; 4]);
    }

    #[test]
    fn errors() {
        assert!(metric_vector(&[0], &[0, 1]).is_err());
        assert!(matches!(metric_vector(&[], &[]), Err(Error::EmptyInput)));
        assert!(r2_score(&[1.0], &[1.0]).is_err());
        assert!(r2_score(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn r2_values() {
        assert_eq!(r2_score(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0);
        assert_eq!(r2_score(&[1., 2., 3.], &[2., 2., 2.]).unwrap(), 0.0);
        // SS_res = 1, SS_tot = 2
        assert_eq!(r2_score(&[0., 1., 2.], &[0., 1., 1.]).unwrap(), 0.5);
        assert_eq!(r2_score(&[4., 4.], &[4., 4.]).unwrap(), 1.0);
        assert_eq!(r2_score(&[4., 4.], &[4., 5.]).unwrap(), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn components_in_unit_interval(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..60)) {
            let (t, p): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let m = metric_vector(&t, &p).unwrap();
            for v in m.as_array() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn binary_macro_recall_is_balanced_accuracy(pairs in proptest::collection::vec((0usize..2, 0usize..2), 1..60)) {
            let (t, p): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let m = metric_vector(&t, &p).unwrap();
            let recall = |c: usize| {
                let n = t.iter().filter(|&&x| x == c).count();
                let hit = t.iter().zip(&p).filter(|(&a, &b)| a == c && b == c).count();
                if n == 0 { 0.0 } else { hit as f64 / n as f64 }
            };
            let present: Vec<usize> = (0..2).filter(|c| t.contains(c) || p.contains(c)).collect();
            let balanced = present.iter().map(|&c| recall(c)).sum::<f64>() / present.len() as f64;
            prop_assert!((m.recall_macro - balanced).abs() < 1e-12);
        }
    }
}
