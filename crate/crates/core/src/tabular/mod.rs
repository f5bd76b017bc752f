//! Tabular classification datasets: schema, encoding, sampling.

mod io;
mod sample;
mod synth;

pub use io::{load_canonical, load_csv, load_regression_csv, save_canonical, MISSING_CATEGORY};
pub use sample::{draw_pilot, subsample_and_split, DatasetSplit, PilotStudy, MIN_PILOT};
pub use synth::{generate_synthetic, graded_corpus, SyntheticSpec};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rows needed before a source dataset is usable for ground truth.
pub const MIN_ELIGIBLE_ROWS: usize = 3000;
/// Encoded feature count must stay strictly below this.
pub const MAX_FEATURES_EXCLUSIVE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Distinct category strings in code order. For the label column these
    /// are the original class values, indexed by class id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Numeric,
            categories: Vec::new(),
        }
    }

    pub fn encode(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Binary,
    Multiclass,
    BinarizedRegression,
}

/// A numeric classification table. Feature columns are the non-label
/// entries of `schema`, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub name: String,
    pub schema: Vec<ColumnSchema>,
    pub rows: Array2<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub task: Task,
}

impl TabularDataset {
    /// Build a dataset, checking the structural invariants: one label
    /// column, matching lengths, at least two classes and every class
    /// present.
    pub fn new(
        name: impl Into<String>,
        schema: Vec<ColumnSchema>,
        rows: Array2<f64>,
        labels: Vec<usize>,
        task: Task,
    ) -> Result<Self> {
        let label_cols: Vec<&ColumnSchema> = schema
            .iter()
            .filter(|c| c.kind == ColumnKind::Label)
            .collect();
        if label_cols.len() != 1 {
            return Err(Error::invalid(format!(
                "schema must have exactly one label column, found {}",
                label_cols.len()
            )));
        }
        let n_classes = label_cols[0].categories.len();
        for col in &schema {
            let mut seen = std::collections::HashSet::new();
            if !col.categories.iter().all(|c| seen.insert(c)) {
                return Err(Error::invalid(format!(
                    "duplicate category in column `{}`",
                    col.name
                )));
            }
        }
        let d = schema.len() - 1;
        if rows.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rows.ncols(),
            });
        }
        if rows.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.nrows(),
                actual: labels.len(),
            });
        }
        if n_classes < 2 {
            return Err(Error::SingleClass);
        }
        let counts = class_counts(&labels, n_classes);
        if labels.iter().any(|&l| l >= n_classes) {
            return Err(Error::invalid("label id out of range"));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::invalid("every class must occur at least once"));
        }
        Ok(TabularDataset {
            name: name.into(),
            schema,
            rows,
            labels,
            n_classes,
            task,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn label_column(&self) -> &ColumnSchema {
        self.schema
            .iter()
            .find(|c| c.kind == ColumnKind::Label)
            .expect("validated at construction")
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.n_classes)
    }

    /// Rows at `indices` (duplicates allowed). The class set is inherited
    /// from the parent, so a subset may be missing some classes.
    pub fn select(&self, indices: &[usize]) -> TabularDataset {
        TabularDataset {
            name: self.name.clone(),
            schema: self.schema.clone(),
            rows: self.rows.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            task: self.task,
        }
    }

    /// Share of the least frequent class among the classes of the parent
    /// dataset. Zero if some class is absent.
    pub fn minority_ratio(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        let min = self.class_counts().into_iter().min().unwrap_or(0);
        min as f64 / self.labels.len() as f64
    }
}

pub(crate) fn class_counts(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l < n_classes {
            counts[l] += 1;
        }
    }
    counts
}

/// A table whose target is continuous; only useful as input to
/// [`binarize_regression`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub name: String,
    pub schema: Vec<ColumnSchema>,
    pub rows: Array2<f64>,
    pub targets: Vec<f64>,
}

/// Turn a regression target into two classes split at the median. Values
/// equal to the median go to class 0.
pub fn binarize_regression(dataset: &RegressionDataset) -> Result<TabularDataset> {
    let targets = &dataset.targets;
    if targets.is_empty() {
        return Err(Error::EmptyInput);
    }
    let median = median(targets);
    let labels: Vec<usize> = targets.iter().map(|&t| usize::from(t > median)).collect();
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::DegenerateMedian);
    }
    let schema = dataset
        .schema
        .iter()
        .map(|c| {
            if c.kind == ColumnKind::Label {
                ColumnSchema {
                    name: c.name.clone(),
                    kind: ColumnKind::Label,
                    categories: vec![format!("<={median}"), format!(">{median}")],
                }
            } else {
                c.clone()
            }
        })
        .collect();
    TabularDataset::new(
        dataset.name.clone(),
        schema,
        dataset.rows.clone(),
        labels,
        Task::BinarizedRegression,
    )
}

/// Median with the midpoint convention for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eligibility {
    pub passed: bool,
    pub reasons: Vec<String>,
}

/// Source datasets need at least 3000 rows and fewer than 50 encoded features.
pub fn validate_eligibility(dataset: &TabularDataset) -> Eligibility {
    let mut reasons = Vec::new();
    if dataset.n_rows() < MIN_ELIGIBLE_ROWS {
        reasons.push(format!(
            "too few rows: {} < {MIN_ELIGIBLE_ROWS}",
            dataset.n_rows()
        ));
    }
    if dataset.n_features() >= MAX_FEATURES_EXCLUSIVE {
        reasons.push(format!(
            "too many features: {} >= {MAX_FEATURES_EXCLUSIVE}",
            dataset.n_features()
        ));
    }
    Eligibility {
        passed: reasons.is_empty(),
        reasons,
    }
}

#[cfg(test)]
pub(crate) fn numeric_dataset(rows: Array2<f64>, labels: Vec<usize>) -> TabularDataset {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut schema: Vec<ColumnSchema> = (0..rows.ncols())
        .map(|j| ColumnSchema::numeric(format!("f{j}")))
        .collect();
    schema.push(ColumnSchema {
        name: "y".into(),
        kind: ColumnKind::Label,
        categories: (0..n_classes).map(|c| c.to_string()).collect(),
    });
    let task = if n_classes == 2 {
        Task::Binary
    } else {
        Task::Multiclass
    };
    TabularDataset::new("test", schema, rows, labels, task).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regression(targets: Vec<f64>) -> RegressionDataset {
        let n = targets.len();
        RegressionDataset {
            name: "r".into(),
            schema: vec![
                ColumnSchema::numeric("x"),
                ColumnSchema {
                    name: "y".into(),
                    kind: ColumnKind::Label,
                    categories: vec![],
                },
            ],
            rows: Array2::zeros((n, 1)),
            targets,
        }
    }

    #[test]
    fn binarize_median_ties_go_low() {
        let d = binarize_regression(&regression(vec![1., 2., 3., 4., 5.])).unwrap();
        assert_eq!(d.labels, vec![0, 0, 0, 1, 1]);
        assert_eq!(d.task, Task::BinarizedRegression);
        let d = binarize_regression(&regression(vec![10., 20.])).unwrap();
        assert_eq!(d.labels, vec![0, 1]);
    }

    #[test]
    fn binarize_degenerate() {
        assert!(matches!(
            binarize_regression(&regression(vec![7.; 4])),
            Err(Error::DegenerateMedian)
        ));
        // median equals the maximum: the upper class would be empty
        assert!(matches!(
            binarize_regression(&regression(vec![1., 5., 5., 5.])),
            Err(Error::DegenerateMedian)
        ));
    }

    fn sized(n: usize, d: usize) -> TabularDataset {
        let labels = (0..n).map(|i| i % 2).collect();
        numeric_dataset(Array2::zeros((n, d)), labels)
    }

    #[test]
    fn eligibility_thresholds() {
        assert!(validate_eligibility(&sized(3000, 10)).passed);
        let e = validate_eligibility(&sized(2999, 10));
        assert!(!e.passed);
        assert!(e.reasons[0].contains("too few rows"));
        let e = validate_eligibility(&sized(5000, 50));
        assert!(!e.passed);
        assert!(e.reasons[0].contains("too many features"));
    }

    #[test]
    fn construction_rejects_missing_class() {
        let schema = vec![
            ColumnSchema::numeric("x"),
            ColumnSchema {
                name: "y".into(),
                kind: ColumnKind::Label,
                categories: vec!["a".into(), "b".into(), "c".into()],
            },
        ];
        let r = TabularDataset::new(
            "t",
            schema,
            Array2::zeros((2, 1)),
            vec![0, 1],
            Task::Multiclass,
        );
        assert!(r.is_err());
    }

    #[test]
    fn minority_ratio_counts_parent_classes() {
        let d = numeric_dataset(Array2::zeros((4, 1)), vec![0, 0, 0, 1]);
        assert_eq!(d.minority_ratio(), 0.25);
        assert_eq!(d.select(&[0, 1]).minority_ratio(), 0.0);
    }
}
