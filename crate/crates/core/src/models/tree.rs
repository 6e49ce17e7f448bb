//! Binary decision tree trained on weighted Gini impurity decrease over
//! sparse features. Candidate thresholds are midpoints between consecutive
//! distinct observed values of a feature, with absent sparse entries
//! counting as zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::vectorize::SparseVector;

/// `1 - p_neg^2 - p_pos^2` over weight fractions.
pub fn gini(w_neg: f64, w_pos: f64) -> Result<f64> {
    let total = w_neg + w_pos;
    if total <= 0.0 {
        return Err(Error::EmptyGini);
    }
    let p = w_pos / total;
    let q = w_neg / total;
    Ok(1.0 - p * p - q * q)
}

fn gini_unchecked(w_neg: f64, w_pos: f64) -> f64 {
    let total = w_neg + w_pos;
    let p = w_pos / total;
    let q = w_neg / total;
    1.0 - p * p - q * q
}

/// A chosen split: samples with `feature <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: bool,
        /// Positive-class fraction of the training weight in this leaf.
        pos_fraction: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub dim: usize,
}

impl DecisionTree {
    /// Walk from the root; missing sparse entries read as zero.
    pub fn predict(&self, vector: &SparseVector) -> (bool, f64) {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if vector.get(*feature) <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf {
                    label,
                    pos_fraction,
                } => return (*label, *pos_fraction),
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Column-major view of a dataset, shared across node evaluations.
pub(crate) struct FeatureColumns {
    /// Per feature: (row, value) for every stored nonzero, rows ascending.
    cols: Vec<Vec<(u32, f64)>>,
    n_rows: usize,
}

impl FeatureColumns {
    pub(crate) fn build(dataset: &Dataset) -> Self {
        let mut cols = vec![Vec::new(); dataset.dim];
        for (row, vector) in dataset.vectors.iter().enumerate() {
            for &(feature, value) in &vector.entries {
                cols[feature as usize].push((row as u32, value));
            }
        }
        Self {
            cols,
            n_rows: dataset.len(),
        }
    }
}

/// Scratch buffers reused across the recursion.
struct NodeScratch {
    /// membership stamp per row; a row is in the current node iff
    /// `stamp[row] == generation`
    stamp: Vec<u32>,
    generation: u32,
}

struct TreeBuilder<'a> {
    columns: &'a FeatureColumns,
    labels: &'a [bool],
    weights: &'a [f64],
    max_depth: Option<usize>,
    nodes: Vec<TreeNode>,
    scratch: NodeScratch,
}

/// One distinct observed value within a node, with its class weight totals.
#[derive(Debug, Clone, Copy)]
struct ValueBucket {
    value: f64,
    w_neg: f64,
    w_pos: f64,
}

fn best_split_on_node(
    columns: &FeatureColumns,
    labels: &[bool],
    weights: &[f64],
    rows: &[u32],
    scratch: &mut NodeScratch,
    features: Option<&[usize]>,
) -> Option<Split> {
    let mut node_pos = 0.0;
    let mut node_neg = 0.0;
    for &r in rows {
        if labels[r as usize] {
            node_pos += weights[r as usize];
        } else {
            node_neg += weights[r as usize];
        }
    }
    let node_total = node_pos + node_neg;
    if node_total <= 0.0 {
        return None;
    }
    let parent_gini = gini_unchecked(node_neg, node_pos);

    scratch.generation = scratch.generation.wrapping_add(1);
    let generation = scratch.generation;
    for &r in rows {
        scratch.stamp[r as usize] = generation;
    }

    let mut best: Option<Split> = None;
    let mut buckets: Vec<ValueBucket> = Vec::new();

    let all_features: Vec<usize>;
    let feature_iter: &[usize] = match features {
        Some(f) => f,
        None => {
            all_features = (0..columns.cols.len()).collect();
            &all_features
        }
    };

    for &feature in feature_iter {
        buckets.clear();
        let mut nz_pos = 0.0;
        let mut nz_neg = 0.0;
        let mut nz_count = 0usize;
        for &(row, value) in &columns.cols[feature] {
            if scratch.stamp[row as usize] != generation {
                continue;
            }
            let w = weights[row as usize];
            let (mut bp, mut bn) = (0.0, 0.0);
            if labels[row as usize] {
                bp = w;
                nz_pos += w;
            } else {
                bn = w;
                nz_neg += w;
            }
            nz_count += 1;
            buckets.push(ValueBucket {
                value,
                w_neg: bn,
                w_pos: bp,
            });
        }
        if nz_count < rows.len() {
            // implicit zeros
            buckets.push(ValueBucket {
                value: 0.0,
                w_neg: node_neg - nz_neg,
                w_pos: node_pos - nz_pos,
            });
        }
        if buckets.len() < 2 {
            continue;
        }
        buckets.sort_by(|a, b| a.value.total_cmp(&b.value));
        // aggregate duplicates in place
        let mut merged = 0usize;
        for i in 1..buckets.len() {
            if buckets[i].value == buckets[merged].value {
                buckets[merged].w_neg += buckets[i].w_neg;
                buckets[merged].w_pos += buckets[i].w_pos;
            } else {
                merged += 1;
                buckets[merged] = buckets[i];
            }
        }
        buckets.truncate(merged + 1);
        if buckets.len() < 2 {
            continue;
        }

        let mut left_pos = 0.0;
        let mut left_neg = 0.0;
        for i in 0..buckets.len() - 1 {
            left_pos += buckets[i].w_pos;
            left_neg += buckets[i].w_neg;
            let right_pos = node_pos - left_pos;
            let right_neg = node_neg - left_neg;
            let w_left = left_pos + left_neg;
            let w_right = right_pos + right_neg;
            if w_left <= 0.0 || w_right <= 0.0 {
                continue;
            }
            let threshold = (buckets[i].value + buckets[i + 1].value) / 2.0;
            let children = (w_left * gini_unchecked(left_neg, left_pos)
                + w_right * gini_unchecked(right_neg, right_pos))
                / node_total;
            let decrease = parent_gini - children;
            let better = match &best {
                None => decrease > 0.0,
                Some(b) => decrease > b.decrease,
            };
            if better {
                best = Some(Split {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

/// Exhaustively choose the weighted-Gini-optimal `(feature, threshold)` over
/// the whole dataset. Ties break toward the lowest feature index, then the
/// lowest threshold; `None` when no split has positive decrease.
pub fn best_split(
    dataset: &Dataset,
    weights: Option<&[f64]>,
    features: Option<&[usize]>,
) -> Option<Split> {
    let columns = FeatureColumns::build(dataset);
    let uniform;
    let weights = match weights.or(dataset.weights.as_deref()) {
        Some(w) => w,
        None => {
            uniform = vec![1.0 / dataset.len() as f64; dataset.len()];
            &uniform
        }
    };
    let rows: Vec<u32> = (0..dataset.len() as u32).collect();
    let mut scratch = NodeScratch {
        stamp: vec![0; dataset.len()],
        generation: 0,
    };
    best_split_on_node(&columns, &dataset.labels, weights, &rows, &mut scratch, features)
}

impl<'a> TreeBuilder<'a> {
    fn build_node(&mut self, rows: Vec<u32>, depth: usize) -> usize {
        let mut w_pos = 0.0;
        let mut w_neg = 0.0;
        for &r in &rows {
            if self.labels[r as usize] {
                w_pos += self.weights[r as usize];
            } else {
                w_neg += self.weights[r as usize];
            }
        }
        let total = w_pos + w_neg;
        let pos_fraction = if total > 0.0 { w_pos / total } else { 0.0 };
        let make_leaf = |nodes: &mut Vec<TreeNode>| {
            nodes.push(TreeNode::Leaf {
                label: w_pos > w_neg, // ties go negative
                pos_fraction,
            });
            nodes.len() - 1
        };

        let pure = w_pos == 0.0 || w_neg == 0.0;
        let at_depth_cap = self.max_depth.is_some_and(|d| depth >= d);
        if pure || at_depth_cap {
            return make_leaf(&mut self.nodes);
        }

        let split = match best_split_on_node(
            self.columns,
            self.labels,
            self.weights,
            &rows,
            &mut self.scratch,
            None,
        ) {
            Some(s) => s,
            None => return make_leaf(&mut self.nodes),
        };

        let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
        for &r in &rows {
            let value = value_of(self.columns, split.feature, r);
            if value <= split.threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        drop(rows);

        let here = self.nodes.len();
        self.nodes.push(TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.build_node(left_rows, depth + 1);
        let right = self.build_node(right_rows, depth + 1);
        if let TreeNode::Internal {
            left: l, right: r, ..
        } = &mut self.nodes[here]
        {
            *l = left;
            *r = right;
        }
        here
    }
}

fn value_of(columns: &FeatureColumns, feature: usize, row: u32) -> f64 {
    match columns.cols[feature].binary_search_by_key(&row, |&(r, _)| r) {
        Ok(pos) => columns.cols[feature][pos].1,
        Err(_) => 0.0,
    }
}

/// Grow a tree by recursive best splits until leaves are pure, the depth cap
/// is reached, or no split decreases impurity. Leaf labels are the weighted
/// majority, ties negative.
pub fn fit_tree(dataset: &Dataset, max_depth: Option<usize>) -> DecisionTree {
    let columns = FeatureColumns::build(dataset);
    fit_tree_with_columns(dataset, &columns, dataset.weights.as_deref(), max_depth)
}

/// Variant for callers that already hold a column view and externally
/// managed weights (boosting, bagging).
pub(crate) fn fit_tree_with_columns(
    dataset: &Dataset,
    columns: &FeatureColumns,
    weights: Option<&[f64]>,
    max_depth: Option<usize>,
) -> DecisionTree {
    let uniform;
    let weights = match weights {
        Some(w) => w,
        None => {
            uniform = vec![1.0 / dataset.len().max(1) as f64; dataset.len()];
            &uniform
        }
    };
    // rows with zero weight are excluded up front (bootstrap resampling)
    let rows: Vec<u32> = (0..dataset.len() as u32)
        .filter(|&r| weights[r as usize] > 0.0)
        .collect();
    let mut builder = TreeBuilder {
        columns,
        labels: &dataset.labels,
        weights,
        max_depth,
        nodes: Vec::new(),
        scratch: NodeScratch {
            stamp: vec![0; columns.n_rows],
            generation: 0,
        },
    };
    if rows.is_empty() {
        builder.nodes.push(TreeNode::Leaf {
            label: false,
            pos_fraction: 0.0,
        });
    } else {
        builder.build_node(rows, 0);
    }
    DecisionTree {
        nodes: builder.nodes,
        dim: dataset.dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Dataset;

    fn sparse(dim: usize, entries: &[(u32, f64)]) -> SparseVector {
        SparseVector {
            dim,
            entries: entries.to_vec(),
        }
    }

    fn one_d(values: &[f64], labels: &[bool]) -> Dataset {
        let vectors = values
            .iter()
            .map(|&v| {
                if v == 0.0 {
                    sparse(1, &[])
                } else {
                    sparse(1, &[(0, v)])
                }
            })
            .collect();
        Dataset::new(vectors, labels.to_vec(), 1).unwrap()
    }

    #[test]
    fn gini_of_known_mixtures() {
        assert_eq!(gini(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(gini(2.0, 2.0).unwrap(), 0.5);
        assert!((gini(3.0, 1.0).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini(0.0, 0.0).is_err());
    }

    #[test]
    fn one_dimensional_split_at_midpoint() {
        let ds = one_d(&[0.0, 1.0], &[false, true]);
        let split = best_split(&ds, None, None).unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 0.5);
        assert!((split.decrease - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_vectors_mixed_labels_yield_no_split() {
        let vectors = vec![sparse(2, &[(0, 1.0)]), sparse(2, &[(0, 1.0)])];
        let ds = Dataset::new(vectors, vec![true, false], 2).unwrap();
        assert!(best_split(&ds, None, None).is_none());
    }

    #[test]
    fn separable_data_trains_to_depth_one_and_zero_error() {
        let ds = one_d(&[0.0, 0.2, 1.0, 1.4], &[false, false, true, true]);
        let tree = fit_tree(&ds, None);
        assert_eq!(tree.depth(), 1);
        for (v, &y) in ds.vectors.iter().zip(&ds.labels) {
            assert_eq!(tree.predict(v).0, y);
        }
    }

    #[test]
    fn max_depth_zero_is_a_majority_leaf() {
        let ds = one_d(&[0.0, 1.0, 2.0], &[true, true, false]);
        let tree = fit_tree(&ds, Some(0));
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&sparse(1, &[(0, 5.0)])), (true, 2.0 / 3.0));
    }

    #[test]
    fn majority_ties_predict_negative() {
        let ds = one_d(&[0.0, 1.0], &[true, false]);
        let tree = fit_tree(&ds, Some(0));
        assert!(!tree.predict(&sparse(1, &[])).0);
    }

    #[test]
    fn consistent_random_datasets_reach_zero_training_error() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(4..20);
            let dim = rng.random_range(2..5);
            let mut vectors = Vec::new();
            let mut labels = Vec::new();
            for _ in 0..n {
                let entries: Vec<(u32, f64)> = (0..dim as u32)
                    .filter_map(|f| {
                        (rng.random::<f64>() < 0.7)
                            .then(|| (f, rng.random::<f64>() * 3.0))
                    })
                    .collect();
                vectors.push(SparseVector { dim, entries });
                labels.push(rng.random::<f64>() < 0.5);
            }
            // continuous features make duplicate vectors impossible in practice
            let ds = Dataset::new(vectors, labels, dim).unwrap();
            let tree = fit_tree(&ds, None);
            for (v, &y) in ds.vectors.iter().zip(&ds.labels) {
                assert_eq!(tree.predict(v).0, y, "training point misclassified");
            }
        }
    }

    #[test]
    fn predictions_invariant_under_monotone_feature_rescaling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let dim = 3;
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..30 {
            let entries: Vec<(u32, f64)> = (0..dim as u32)
                .filter_map(|f| (rng.random::<f64>() < 0.6).then(|| (f, rng.random::<f64>())))
                .collect();
            vectors.push(SparseVector { dim, entries });
            labels.push(rng.random::<f64>() < 0.4);
        }
        let scale = |v: &SparseVector| SparseVector {
            dim: v.dim,
            entries: v.entries.iter().map(|&(i, x)| (i, 3.0 * x)).collect(),
        };
        let scaled_vectors: Vec<SparseVector> = vectors.iter().map(scale).collect();
        let ds = Dataset::new(vectors, labels.clone(), dim).unwrap();
        let ds_scaled = Dataset::new(scaled_vectors, labels, dim).unwrap();
        let tree = fit_tree(&ds, None);
        let tree_scaled = fit_tree(&ds_scaled, None);
        for (v, vs) in ds.vectors.iter().zip(&ds_scaled.vectors) {
            assert_eq!(tree.predict(v).0, tree_scaled.predict(vs).0);
        }
    }
}
