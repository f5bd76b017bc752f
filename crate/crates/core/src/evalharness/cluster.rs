use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::similarity::name_similarity;
use crate::{par, seed, Error, Result};

/// Cluster count used when none is given: `ceil(N / 2)` capped at 100.
pub fn default_cluster_count(n_names: usize) -> usize {
    n_names.div_ceil(2).clamp(2, 100)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameClusterIndex {
    pub names: Vec<String>,
    pub similarity: Vec<Vec<f64>>,
    /// Cluster id per name; ids are numbered by each cluster's first member.
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl NameClusterIndex {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.names.len())
            .filter(|&i| self.assignment[i] == cluster)
            .collect()
    }
}

/// Average-linkage agglomerative clustering on `1 - similarity`, merged
/// down to `k` clusters. Each step joins the closest pair; ties go to the
/// pair whose smallest member indices are lowest.
pub fn cluster_datasets(names: &[String], k: usize) -> Result<NameClusterIndex> {
    let n = names.len();
    if k == 0 {
        return Err(Error::invalid("cluster count must be at least 1"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "{n} names cannot form {k} clusters"
        )));
    }
    let rows = par::try_map_range(n, |i| {
        (0..n)
            .map(|j| {
                if i == j {
                    Ok(1.0)
                } else {
                    name_similarity(&names[i], &names[j])
                }
            })
            .collect::<Result<Vec<f64>>>()
    })?;

    // Clusters keyed by their smallest member, which never changes on merge
    // since the survivor is the lower key.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut alive: Vec<bool> = vec![true; n];
    // sum of pairwise distances between live clusters
    let mut dist_sum: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - rows[i][j]).collect())
        .collect();
    for _ in 0..n - k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in (0..n).filter(|&a| alive[a]) {
            for b in (a + 1..n).filter(|&b| alive[b]) {
                let d = dist_sum[a][b] / (members[a].len() * members[b].len()) as f64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least two clusters remain");
        alive[b] = false;
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        for r in 0..n {
            if alive[r] && r != a {
                let s = dist_sum[a][r] + dist_sum[b][r];
                dist_sum[a][r] = s;
                dist_sum[r][a] = s;
            }
        }
    }

    let mut assignment = vec![0; n];
    for (id, root) in (0..n).filter(|&r| alive[r]).enumerate() {
        for &i in &members[root] {
            assignment[i] = id;
        }
    }
    Ok(NameClusterIndex {
        names: names.to_vec(),
        similarity: rows,
        assignment,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRep {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub reps: Vec<SplitRep>,
    pub train_frac: f64,
    pub seed: u64,
}

/// Per repetition, an independent uniform draw of `floor(train_frac * k)`
/// training clusters; the rest are test clusters.
pub fn bootstrap_split(
    index: &NameClusterIndex,
    train_frac: f64,
    reps: usize,
    seed: u64,
) -> Result<SplitPlan> {
    let k = index.k;
    if k < 2 {
        return Err(Error::invalid("need at least two clusters to split"));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid(
            "train fraction must lie strictly between 0 and 1",
        ));
    }
    let n_train = (train_frac * k as f64).floor() as usize;
    if n_train == 0 || n_train >= k {
        return Err(Error::invalid(format!(
            "train fraction {train_frac} leaves an empty side with {k} clusters"
        )));
    }
    let reps = (0..reps)
        .map(|r| {
            let mut train =
                index::sample(&mut seed::rng_at(seed, &[r as u64]), k, n_train).into_vec();
            train.sort_unstable();
            let test = (0..k).filter(|c| train.binary_search(c).is_err()).collect();
            SplitRep { train, test }
        })
        .collect();
    Ok(SplitPlan {
        reps,
        train_frac,
        seed,
    })
}
