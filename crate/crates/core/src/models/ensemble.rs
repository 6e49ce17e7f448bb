//! Ensembles over decision trees: bootstrap bagging with majority vote and
//! AdaBoost with weighted reweighting and a weighted vote.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{stream_rng, streams};
use crate::models::tree::{fit_tree_with_columns, DecisionTree, FeatureColumns};
use crate::models::Dataset;
use crate::vectorize::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaggedEnsemble {
    pub trees: Vec<DecisionTree>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl BaggedEnsemble {
    /// Majority vote; even splits go negative. The score is the fraction of
    /// trees voting positive.
    pub fn predict(&self, vector: &SparseVector) -> (bool, f64) {
        self.predict_with(self.trees.len(), vector)
    }

    /// Vote over the first `n` trees only (estimator sweeps).
    pub fn predict_with(&self, n: usize, vector: &SparseVector) -> (bool, f64) {
        let n = n.min(self.trees.len()).max(1);
        let positive = self.trees[..n]
            .iter()
            .filter(|t| t.predict(vector).0)
            .count();
        (2 * positive > n, positive as f64 / n as f64)
    }
}

/// Train `n` trees, each on a seeded bootstrap resample of the dataset
/// (`bootstrap = false` trains every tree on the full data). Per-tree seeds
/// derive from `(seed, tree index)`, so training order and thread count do
/// not affect the result.
pub fn fit_bagging(
    dataset: &Dataset,
    n: usize,
    seed: u64,
    bootstrap: bool,
    max_depth: Option<usize>,
) -> BaggedEnsemble {
    let n = n.max(1);
    let columns = FeatureColumns::build(dataset);
    let trees: Vec<DecisionTree> = (0..n)
        .into_par_iter()
        .map(|tree_index| {
            if bootstrap {
                let mut rng = stream_rng(seed, streams::BAGGING_BASE + tree_index as u64);
                let len = dataset.len();
                // bootstrap multiset expressed as per-row weights
                let mut counts = vec![0u32; len];
                for _ in 0..len {
                    counts[rng.random_range(0..len)] += 1;
                }
                let weights: Vec<f64> = counts
                    .iter()
                    .map(|&c| c as f64 / len as f64)
                    .collect();
                fit_tree_with_columns(dataset, &columns, Some(&weights), max_depth)
            } else {
                fit_tree_with_columns(dataset, &columns, dataset.weights.as_deref(), max_depth)
            }
        })
        .collect();
    BaggedEnsemble {
        trees,
        bootstrap,
        seed,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostStage {
    pub tree: DecisionTree,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub stages: Vec<BoostStage>,
    pub base_max_depth: Option<usize>,
    pub n_requested: usize,
}

impl BoostedEnsemble {
    pub fn predict(&self, vector: &SparseVector) -> (bool, f64) {
        self.predict_with(self.stages.len(), vector)
    }

    /// Weighted vote over the first `n` stages. The score maps the
    /// normalized vote from [-1, 1] to [0, 1]; a net-zero vote is negative.
    pub fn predict_with(&self, n: usize, vector: &SparseVector) -> (bool, f64) {
        let n = n.min(self.stages.len());
        if n == 0 {
            return (false, 0.5);
        }
        let mut net = 0.0;
        let mut denom = 0.0;
        for stage in &self.stages[..n] {
            let vote = if stage.tree.predict(vector).0 { 1.0 } else { -1.0 };
            net += stage.alpha * vote;
            denom += stage.alpha;
        }
        let score = if denom > 0.0 {
            (net / denom + 1.0) / 2.0
        } else {
            0.5
        };
        (net > 0.0, score)
    }
}

/// Per-stage diagnostics from a boosting fit.
#[derive(Debug, Clone)]
pub struct BoostStageDiag {
    pub epsilon: f64,
    pub alpha: f64,
    /// Misclassified weight mass of this stage's tree measured under the
    /// weights produced by its own update; absent when the fit stopped
    /// before updating (zero-error stage).
    pub post_update_error: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BoostTrace {
    pub stages: Vec<BoostStageDiag>,
}

const EPSILON_FLOOR: f64 = 1e-10;

/// AdaBoost with reweighting: sample weights start uniform; each stage
/// trains a weighted tree, computes its weighted error, and multiplies
/// misclassified weights by `e^alpha` with `alpha = ln((1 - eps) / eps)`.
/// A zero-error stage is kept (with the floored-epsilon alpha) and training
/// stops; a stage with error >= 0.5 is discarded and training stops.
pub fn fit_adaboost(
    dataset: &Dataset,
    n: usize,
    base_max_depth: Option<usize>,
    seed: u64,
) -> BoostedEnsemble {
    fit_adaboost_traced(dataset, n, base_max_depth, seed).0
}

pub fn fit_adaboost_traced(
    dataset: &Dataset,
    n: usize,
    base_max_depth: Option<usize>,
    _seed: u64, // the fit is fully deterministic; kept for signature parity
) -> (BoostedEnsemble, BoostTrace) {
    let n = n.max(1);
    let len = dataset.len();
    let columns = FeatureColumns::build(dataset);
    let mut weights = vec![1.0 / len as f64; len];
    let mut stages = Vec::new();
    let mut trace = BoostTrace::default();

    for _ in 0..n {
        let tree = fit_tree_with_columns(dataset, &columns, Some(&weights), base_max_depth);
        let miss: Vec<bool> = dataset
            .vectors
            .iter()
            .zip(&dataset.labels)
            .map(|(v, &y)| tree.predict(v).0 != y)
            .collect();
        let epsilon: f64 = weights
            .iter()
            .zip(&miss)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum();

        if epsilon >= 0.5 {
            break; // weak-learner assumption failed; discard this stage
        }
        let clamped = epsilon.max(EPSILON_FLOOR);
        let alpha = ((1.0 - clamped) / clamped).ln();
        stages.push(BoostStage {
            tree,
            alpha,
        });

        if epsilon <= 0.0 {
            trace.stages.push(BoostStageDiag {
                epsilon,
                alpha,
                post_update_error: None,
            });
            break;
        }

        let boost = alpha.exp();
        for (w, &m) in weights.iter_mut().zip(&miss) {
            if m {
                *w *= boost;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let post_update_error: f64 = weights
            .iter()
            .zip(&miss)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum();
        trace.stages.push(BoostStageDiag {
            epsilon,
            alpha,
            post_update_error: Some(post_update_error),
        });
    }

    (
        BoostedEnsemble {
            stages,
            base_max_depth,
            n_requested: n,
        },
        trace,
    )
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
    fn single_tree_without_bootstrap_matches_fit_tree() {
        let ds = one_d(&[0.0, 0.5, 1.0, 2.0], &[false, false, true, true]);
        let bag = fit_bagging(&ds, 1, 3, false, None);
        let tree = crate::models::tree::fit_tree(&ds, None);
        for v in &ds.vectors {
            assert_eq!(bag.predict(v).0, tree.predict(v).0);
        }
    }

    #[test]
    fn bagging_is_deterministic_per_seed() {
        let ds = one_d(&[0.0, 0.5, 1.0, 2.0, 3.0, 4.0], &[false, false, true, true, false, true]);
        let a = fit_bagging(&ds, 10, 42, true, None);
        let b = fit_bagging(&ds, 10, 42, true, None);
        let va = sparse(1, &[(0, 2.5)]);
        assert_eq!(a.predict(&va), b.predict(&va));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn full_data_trees_reach_zero_training_error_for_any_n() {
        let ds = one_d(&[0.0, 1.0, 2.0, 3.0], &[false, true, false, true]);
        let bag = fit_bagging(&ds, 7, 0, false, None);
        for (v, &y) in ds.vectors.iter().zip(&ds.labels) {
            assert_eq!(bag.predict(v).0, y);
        }
    }

    #[test]
    fn even_vote_splits_are_negative() {
        // hand-built ensemble: 2 trees disagree
        use crate::models::tree::TreeNode;
        let yes = DecisionTree {
            nodes: vec![TreeNode::Leaf {
                label: true,
                pos_fraction: 1.0,
            }],
            dim: 1,
        };
        let no = DecisionTree {
            nodes: vec![TreeNode::Leaf {
                label: false,
                pos_fraction: 0.0,
            }],
            dim: 1,
        };
        let bag = BaggedEnsemble {
            trees: vec![yes, no],
            bootstrap: false,
            seed: 0,
        };
        let (label, score) = bag.predict(&sparse(1, &[]));
        assert!(!label);
        assert_eq!(score, 0.5);
    }

    #[test]
    fn zero_error_first_stage_stops_boosting() {
        let ds = one_d(&[0.0, 1.0], &[false, true]);
        let (model, trace) = fit_adaboost_traced(&ds, 10, None, 0);
        assert_eq!(model.stages.len(), 1);
        assert!(trace.stages[0].epsilon <= 0.0);
        for (v, &y) in ds.vectors.iter().zip(&ds.labels) {
            assert_eq!(model.predict(v).0, y);
        }
    }

    #[test]
    fn single_stage_matches_single_weighted_tree() {
        let ds = one_d(&[0.0, 1.0, 2.0], &[false, true, true]);
        let boost = fit_adaboost(&ds, 1, Some(1), 0);
        let tree = crate::models::tree::fit_tree(&ds, Some(1));
        for v in &ds.vectors {
            assert_eq!(boost.predict(v).0, tree.predict(v).0);
        }
    }

    #[test]
    fn stump_boosting_recurrence_on_three_points() {
        // {0:-, 1:+, 2:-}: the best stump errs on one of three points, so
        // stage one has epsilon 1/3 and alpha ln 2.
        let ds = one_d(&[0.0, 1.0, 2.0], &[false, true, false]);
        let (_, trace) = fit_adaboost_traced(&ds, 3, Some(1), 0);
        assert!((trace.stages[0].epsilon - 1.0 / 3.0).abs() < 1e-12);
        assert!((trace.stages[0].alpha - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn updated_weights_make_each_stage_half_wrong() {
        let ds = one_d(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            &[false, true, false, true, true, false],
        );
        let (_, trace) = fit_adaboost_traced(&ds, 5, Some(1), 0);
        assert!(!trace.stages.is_empty());
        for diag in &trace.stages {
            if let Some(post) = diag.post_update_error {
                assert!((post - 0.5).abs() < 1e-9, "post-update error {post}");
            }
        }
    }

    #[test]
    fn net_zero_weighted_vote_is_negative_with_score_half() {
        use crate::models::tree::TreeNode;
        let leaf = |label| DecisionTree {
            nodes: vec![TreeNode::Leaf {
                label,
                pos_fraction: if label { 1.0 } else { 0.0 },
            }],
            dim: 1,
        };
        let model = BoostedEnsemble {
            stages: vec![
                BoostStage {
                    tree: leaf(true),
                    alpha: 2.0f64.ln(),
                },
                BoostStage {
                    tree: leaf(false),
                    alpha: 2.0f64.ln(),
                },
            ],
            base_max_depth: None,
            n_requested: 2,
        };
        let (label, score) = model.predict(&sparse(1, &[]));
        assert!(!label);
        assert!((score - 0.5).abs() < 1e-12);
    }
}
