//! Linear classifier trained on the soft-margin hinge objective
//! `(1/2)||w||^2 + C * sum_i hinge(y_i (w.x_i + b))` by seeded stochastic
//! subgradient descent with step size `1/(lambda t)`, `lambda = 1/(C n)`,
//! returning the average of the iterates. The bias rides along as an
//! augmented constant feature.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{stream_rng, streams};
use crate::models::Dataset;
use crate::vectorize::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub dim: usize,
}

impl LinearModel {
    pub fn margin(&self, vector: &SparseVector) -> f64 {
        vector.dot_dense(&self.weights) + self.bias
    }

    /// Sign of the margin; exactly zero goes negative. The score is the raw
    /// margin.
    pub fn predict(&self, vector: &SparseVector) -> (bool, f64) {
        let margin = self.margin(vector);
        (margin > 0.0, margin)
    }
}

/// The iterate recurrence `w_{t+1} = (1 - 1/t) w_t + (1/(lambda t)) g_t`
/// telescopes to `w_{t+1} = S_t / (lambda t)` where `S_t` sums the hinge
/// subgradients, and the iterate average telescopes to
/// `(H_T S_T - sum_t g_t H_{t-1}) / (lambda T)`, so both the current iterate
/// and the average are maintained with sparse updates only.
pub fn fit_linear(dataset: &Dataset, c: f64, epochs: usize, seed: u64) -> LinearModel {
    let n = dataset.len();
    let dim = dataset.dim;
    let bias_slot = dim; // augmented constant feature
    let lambda = 1.0 / (c * n as f64);
    let epochs = epochs.max(1);

    let mut grad_sum = vec![0.0f64; dim + 1]; // S_t
    let mut grad_weighted = vec![0.0f64; dim + 1]; // sum_t g_t * H_{t-1}
    let mut harmonic = 0.0f64; // H_{t-1}
    let mut t = 0u64;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, streams::LINEAR);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let vector = &dataset.vectors[i];
            let y = if dataset.labels[i] { 1.0 } else { -1.0 };
            // w_t = S_{t-1} / (lambda (t-1)); w_1 = 0
            let margin = if t == 1 {
                0.0
            } else {
                let scale = 1.0 / (lambda * (t - 1) as f64);
                (vector.dot_dense(&grad_sum[..dim]) + grad_sum[bias_slot]) * scale
            };
            if y * margin < 1.0 {
                for &(f, v) in &vector.entries {
                    grad_sum[f as usize] += y * v;
                    grad_weighted[f as usize] += y * v * harmonic;
                }
                grad_sum[bias_slot] += y;
                grad_weighted[bias_slot] += y * harmonic;
            }
            harmonic += 1.0 / t as f64;
        }
    }

    let total = t as f64;
    let averaged: Vec<f64> = grad_sum
        .iter()
        .zip(&grad_weighted)
        .map(|(&s, &a)| (harmonic * s - a) / (lambda * total))
        .collect();

    LinearModel {
        weights: averaged[..dim].to_vec(),
        bias: averaged[bias_slot],
        c,
        dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(dim: usize, entries: &[(u32, f64)]) -> SparseVector {
        SparseVector {
            dim,
            entries: entries.to_vec(),
        }
    }

    #[test]
    fn separates_two_opposite_points() {
        let ds = Dataset::new(
            vec![sparse(1, &[(0, 1.0)]), sparse(1, &[(0, -1.0)])],
            vec![true, false],
            1,
        )
        .unwrap();
        let model = fit_linear(&ds, 100.0, 100, 0);
        assert!(model.weights[0] > 0.0);
        for (v, &y) in ds.vectors.iter().zip(&ds.labels) {
            assert_eq!(model.predict(v).0, y);
        }
    }

    #[test]
    fn single_repeated_positive_point_predicts_positive() {
        let point = sparse(2, &[(0, 0.5), (1, 0.5)]);
        let ds = Dataset::new(vec![point.clone(); 4], vec![true; 4], 2).unwrap();
        let model = fit_linear(&ds, 100.0, 50, 1);
        assert!(model.predict(&point).0);
    }

    #[test]
    fn same_seed_gives_identical_weights() {
        let ds = Dataset::new(
            vec![
                sparse(2, &[(0, 1.0)]),
                sparse(2, &[(1, 1.0)]),
                sparse(2, &[(0, 0.4), (1, 0.8)]),
            ],
            vec![true, false, true],
            2,
        )
        .unwrap();
        let a = fit_linear(&ds, 100.0, 30, 9);
        let b = fit_linear(&ds, 100.0, 30, 9);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }

    #[test]
    fn zero_margin_predicts_negative() {
        let model = LinearModel {
            weights: vec![0.0],
            bias: 0.0,
            c: 100.0,
            dim: 1,
        };
        assert!(!model.predict(&sparse(1, &[(0, 1.0)])).0);
    }

    #[test]
    fn margin_sign_matches_label() {
        let ds = Dataset::new(
            vec![
                sparse(1, &[(0, 2.0)]),
                sparse(1, &[(0, 1.5)]),
                sparse(1, &[(0, -1.0)]),
                sparse(1, &[(0, -2.5)]),
            ],
            vec![true, true, false, false],
            1,
        )
        .unwrap();
        let model = fit_linear(&ds, 100.0, 100, 3);
        for v in &ds.vectors {
            let (label, score) = model.predict(v);
            assert_eq!(label, score > 0.0);
        }
    }
}
