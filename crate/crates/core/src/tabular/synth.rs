use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnSchema, TabularDataset, Task};
use crate::seed;
use crate::{Error, Result};

/// Gaussian-blob classification data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    /// Distance between any two class centroids, in units of the
    /// per-feature noise standard deviation.
    pub separation: f64,
    /// Fraction of rows whose label is replaced by a different class.
    pub label_noise: f64,
}

/// Unit-variance Gaussian clusters, one per class, with pairwise centroid
/// distance `separation` (exact when `classes <= d`, otherwise centroids sit
/// on random directions at radius `separation / sqrt(2)`). Classes are
/// balanced before noise is applied.
pub fn generate_synthetic(name: &str, spec: &SyntheticSpec, seed: u64) -> Result<TabularDataset> {
    if spec.classes < 2 || spec.d == 0 || spec.n < spec.classes {
        return Err(Error::invalid(format!("invalid synthetic spec {spec:?}")));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite())
        || !(0.0..=1.0).contains(&spec.label_noise)
    {
        return Err(Error::invalid(format!("invalid synthetic spec {spec:?}")));
    }
    let mut rng = seed::rng_at(seed, &[0x5e7]);
    let radius = spec.separation / std::f64::consts::SQRT_2;
    let centroids: Vec<Vec<f64>> = (0..spec.classes)
        .map(|c| {
            if spec.classes <= spec.d {
                (0..spec.d)
                    .map(|j| if j == c { radius } else { 0.0 })
                    .collect()
            } else {
                let v: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
                    .max(f64::MIN_POSITIVE);
                v.into_iter().map(|x| x / norm * radius).collect()
            }
        })
        .collect();

    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % spec.classes).collect();
    labels.shuffle(&mut rng);
    let mut rows = Array2::<f64>::zeros((spec.n, spec.d));
    for (i, &label) in labels.iter().enumerate() {
        for j in 0..spec.d {
            let z: f64 = rng.sample(StandardNormal);
            rows[[i, j]] = centroids[label][j] + z;
        }
    }
    let n_flip = (spec.label_noise * spec.n as f64).round() as usize;
    for i in rand::seq::index::sample(&mut rng, spec.n, n_flip) {
        let shift = rng.random_range(1..spec.classes);
        labels[i] = (labels[i] + shift) % spec.classes;
    }

    let mut schema: Vec<ColumnSchema> = (0..spec.d)
        .map(|j| ColumnSchema::numeric(format!("x{j}")))
        .collect();
    schema.push(ColumnSchema {
        name: "class".into(),
        kind: ColumnKind::Label,
        categories: (0..spec.classes).map(|c| format!("c{c}")).collect(),
    });
    let task = if spec.classes == 2 {
        Task::Binary
    } else {
        Task::Multiclass
    };
    TabularDataset::new(name, schema, rows, labels, task)
}

const FAMILIES: [&str; 5] = ["quartz", "basalt", "granite", "marble", "slate"];

/// Named specs running from easy to hard: centroid separation falls from
/// 3.5 to 0.5 across the corpus while class count, irrelevant dimensions
/// and label noise vary between neighbours.
pub fn graded_corpus(count: usize, n: usize) -> Vec<(String, SyntheticSpec)> {
    (0..count)
        .map(|i| {
            let t = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let classes = 2 + i % 3;
            let spec = SyntheticSpec {
                n,
                d: classes + (i * 5) % 9,
                classes,
                separation: 3.5 - 3.0 * t,
                label_noise: if i % 4 == 3 { 0.05 } else { 0.0 },
            };
            (format!("{}_{i:02}", FAMILIES[i % FAMILIES.len()]), spec)
        })
        .collect()
}
