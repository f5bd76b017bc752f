//! CART trees with threshold splits.
//!
//! Classification trees split on Gini impurity and keep class-count leaves;
//! regression trees split on squared error and keep mean leaves. Both are
//! grown from a list of (possibly repeated) row indices, so bootstrap
//! resamples need no copying of the data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::Rng as SeedRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(L),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<L> {
    pub nodes: Vec<Node<L>>,
}

impl<L> Tree<L> {
    pub fn leaf_for(&self, row: &[f64]) -> &L {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(l) => return l,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<L>(t: &Tree<L>, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf(_) => None,
            })
            .max()
    }
}

/// Column-major feature matrix shared by all trees of a forest.
pub(crate) struct Columns {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<f64>,
}

impl Columns {
    pub fn from_rows(x: ndarray::ArrayView2<'_, f64>) -> Self {
        let (n_rows, n_cols) = x.dim();
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_cols {
            data.extend(x.column(j).iter().copied());
        }
        Columns {
            n_rows,
            n_cols,
            data,
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

/// What a tree is fitting: class ids or real targets.
pub(crate) trait Target {
    type Leaf;
    type Stats: Clone;

    fn stats(&self, idx: &[usize]) -> Self::Stats;
    fn is_pure(&self, stats: &Self::Stats) -> bool;
    fn leaf(&self, stats: &Self::Stats) -> Self::Leaf;
    /// Best threshold on one sorted feature. `pairs` is sorted by value.
    /// Returns (score, threshold), higher score is better.
    fn best_cut(&self, pairs: &[(f64, usize)], total: &Self::Stats) -> Option<(f64, f64)>;
}

pub(crate) struct Classes<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl Target for Classes<'_> {
    type Leaf = Vec<u32>;
    type Stats = Vec<u32>;

    fn stats(&self, idx: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn is_pure(&self, stats: &Vec<u32>) -> bool {
        stats.iter().filter(|&&c| c > 0).count() <= 1
    }

    fn leaf(&self, stats: &Vec<u32>) -> Vec<u32> {
        stats.clone()
    }

    // Minimising the weighted Gini impurity of the children is the same as
    // maximising sum_k cL_k^2 / nL + sum_k cR_k^2 / nR.
    fn best_cut(&self, pairs: &[(f64, usize)], total: &Vec<u32>) -> Option<(f64, f64)> {
        let n = pairs.len();
        let mut left = vec![0u32; self.n_classes];
        let mut right = total.clone();
        let mut sq_left = 0.0f64;
        let mut sq_right: f64 = right.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let mut best: Option<(f64, f64)> = None;
        for k in 0..n - 1 {
            let class = self.labels[pairs[k].1];
            let cl = left[class] as f64;
            let cr = right[class] as f64;
            sq_left += 2.0 * cl + 1.0;
            sq_right -= 2.0 * cr - 1.0;
            left[class] += 1;
            right[class] -= 1;
            let (a, b) = (pairs[k].0, pairs[k + 1].0);
            if a >= b {
                continue;
            }
            let n_left = (k + 1) as f64;
            let score = sq_left / n_left + sq_right / (n as f64 - n_left);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, midpoint(a, b)));
            }
        }
        best
    }
}

pub(crate) struct Reals<'a> {
    pub targets: &'a [f64],
}

#[derive(Clone)]
pub(crate) struct SumStats {
    n: usize,
    sum: f64,
    min: f64,
    max: f64,
}

impl Target for Reals<'_> {
    type Leaf = f64;
    type Stats = SumStats;

    fn stats(&self, idx: &[usize]) -> SumStats {
        let mut s = SumStats {
            n: idx.len(),
            sum: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        for &i in idx {
            let t = self.targets[i];
            s.sum += t;
            s.min = s.min.min(t);
            s.max = s.max.max(t);
        }
        s
    }

    fn is_pure(&self, stats: &SumStats) -> bool {
        stats.min == stats.max
    }

    fn leaf(&self, stats: &SumStats) -> f64 {
        stats.sum / stats.n as f64
    }

    // Minimising the children's squared error is the same as maximising
    // SL^2 / nL + SR^2 / nR.
    fn best_cut(&self, pairs: &[(f64, usize)], total: &SumStats) -> Option<(f64, f64)> {
        let n = pairs.len();
        let mut sum_left = 0.0;
        let mut best: Option<(f64, f64)> = None;
        for k in 0..n - 1 {
            sum_left += self.targets[pairs[k].1];
            let (a, b) = (pairs[k].0, pairs[k + 1].0);
            if a >= b {
                continue;
            }
            let n_left = (k + 1) as f64;
            let sum_right = total.sum - sum_left;
            let score = sum_left * sum_left / n_left + sum_right * sum_right / (n as f64 - n_left);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, midpoint(a, b)));
            }
        }
        best
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // guard against rounding up to `b` for adjacent floats
    if m >= b {
        a
    } else {
        m
    }
}

pub(crate) fn grow<T: Target>(
    cols: &Columns,
    target: &T,
    mut idx: Vec<usize>,
    params: GrowParams,
    rng: &mut SeedRng,
) -> Tree<T::Leaf> {
    let mut nodes: Vec<Node<T::Leaf>> = Vec::new();
    let mut features: Vec<usize> = (0..cols.n_cols).collect();
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(idx.len());

    // (slot, start, end, depth); a placeholder leaf is overwritten once the
    // node is processed.
    let mut stack = vec![(0usize, 0usize, idx.len(), 0usize)];
    nodes.push(Node::Split {
        feature: 0,
        threshold: 0.0,
        left: 0,
        right: 0,
    });
    while let Some((slot, start, end, depth)) = stack.pop() {
        let node_idx = &idx[start..end];
        let stats = target.stats(node_idx);
        let stop = node_idx.len() < params.min_samples_split
            || params.max_depth.is_some_and(|d| depth >= d)
            || target.is_pure(&stats);
        let split = if stop {
            None
        } else {
            best_split(
                cols,
                target,
                node_idx,
                &stats,
                params,
                &mut features,
                &mut pairs,
                rng,
            )
        };
        match split {
            None => nodes[slot] = Node::Leaf(target.leaf(&stats)),
            Some((feature, threshold)) => {
                let col = cols.col(feature);
                let slice = &mut idx[start..end];
                let mut mid = 0;
                for k in 0..slice.len() {
                    if col[slice[k]] <= threshold {
                        slice.swap(k, mid);
                        mid += 1;
                    }
                }
                let left = nodes.len();
                let right = left + 1;
                for _ in 0..2 {
                    nodes.push(Node::Split {
                        feature: 0,
                        threshold: 0.0,
                        left: 0,
                        right: 0,
                    });
                }
                nodes[slot] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                stack.push((right, start + mid, end, depth + 1));
                stack.push((left, start, start + mid, depth + 1));
            }
        }
    }
    Tree { nodes }
}

/// Visit features in a fresh random order and stop after
/// `features_per_split` non-constant ones have been scored.
#[allow(clippy::too_many_arguments)]
fn best_split<T: Target>(
    cols: &Columns,
    target: &T,
    node_idx: &[usize],
    stats: &T::Stats,
    params: GrowParams,
    features: &mut [usize],
    pairs: &mut Vec<(f64, usize)>,
    rng: &mut SeedRng,
) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    let mut visited = 0;
    for k in 0..features.len() {
        if visited >= params.features_per_split {
            break;
        }
        let swap = rng.random_range(k..features.len());
        features.swap(k, swap);
        let feature = features[k];
        let col = cols.col(feature);
        pairs.clear();
        pairs.extend(node_idx.iter().map(|&i| (col[i], i)));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if pairs[0].0 >= pairs[pairs.len() - 1].0 {
            continue;
        }
        visited += 1;
        if let Some((score, threshold)) = target.best_cut(pairs, stats) {
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, feature, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}
