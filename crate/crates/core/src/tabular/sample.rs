use rand::seq::index;

use super::TabularDataset;
use crate::seed;
use crate::{Error, Result};

/// Smallest pilot that still leaves room for a train/test curve.
pub const MIN_PILOT: usize = 20;

/// A source dataset cut into the fixed train and test sets used for
/// ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub source_name: String,
    pub train: TabularDataset,
    pub test: TabularDataset,
    /// Row indices into the source dataset.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// `m` rows drawn from a split's training set.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotStudy {
    pub data: TabularDataset,
    pub m: usize,
    pub seed: u64,
    /// Row indices into the training set.
    pub indices: Vec<usize>,
}

/// Sample `n_total` rows without replacement; the first `n_test` drawn form
/// the test set, the rest the training set.
pub fn subsample_and_split(
    dataset: &TabularDataset,
    n_total: usize,
    n_test: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    let n = dataset.n_rows();
    if n_total > n {
        return Err(Error::invalid(format!(
            "cannot sample {n_total} rows from a dataset of {n}"
        )));
    }
    if n_test == 0 || n_test >= n_total {
        return Err(Error::invalid(format!(
            "test size {n_test} must be in 1..{n_total}"
        )));
    }
    let mut rng = seed::rng_at(seed, &[0x5b1d]);
    let drawn = index::sample(&mut rng, n, n_total).into_vec();
    let (test_indices, train_indices) = drawn.split_at(n_test);
    Ok(DatasetSplit {
        source_name: dataset.name.clone(),
        train: dataset.select(train_indices),
        test: dataset.select(test_indices),
        train_indices: train_indices.to_vec(),
        test_indices: test_indices.to_vec(),
        seed,
    })
}

pub fn draw_pilot(split: &DatasetSplit, m: usize, seed: u64) -> Result<PilotStudy> {
    let n_train = split.train.n_rows();
    if m < MIN_PILOT || m > n_train {
        return Err(Error::invalid(format!(
            "pilot size {m} outside {MIN_PILOT}..={n_train}"
        )));
    }
    let mut rng = seed::rng_at(seed, &[0x9170]);
    let indices = index::sample(&mut rng, n_train, m).into_vec();
    Ok(PilotStudy {
        data: split.train.select(&indices),
        m,
        seed,
        indices,
    })
}
