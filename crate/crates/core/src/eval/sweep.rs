//! Estimator-count sweep: train the largest ensemble once, then score each
//! smaller count by truncating its tree or stage list. Both ensembles grow
//! by appending, so a truncated fit equals a fresh fit at that count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{fit_adaboost, fit_bagging, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepModel {
    Bagging {
        bootstrap: bool,
        max_depth: Option<usize>,
    },
    Adaboost {
        max_depth: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub counts: Vec<usize>,
    pub train_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
}

fn accuracy(predictions: &[bool], labels: &[bool]) -> f64 {
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| p == y)
        .count();
    correct as f64 / labels.len() as f64
}

/// Train once at the maximum count and report train/test accuracy at each
/// requested count. `counts` must be non-empty and strictly increasing.
pub fn estimator_sweep(
    train: &Dataset,
    test: &Dataset,
    model: SweepModel,
    counts: &[usize],
    seed: u64,
) -> Result<SweepReport> {
    if counts.is_empty() {
        return Err(Error::InvalidConfig("empty sweep counts".into()));
    }
    if counts.windows(2).any(|w| w[1] <= w[0]) || counts[0] == 0 {
        return Err(Error::InvalidConfig(
            "sweep counts must be strictly increasing and positive".into(),
        ));
    }
    let max = *counts.last().unwrap();

    let mut train_accuracy = Vec::with_capacity(counts.len());
    let mut test_accuracy = Vec::with_capacity(counts.len());
    match model {
        SweepModel::Bagging {
            bootstrap,
            max_depth,
        } => {
            let ensemble = fit_bagging(train, max, seed, bootstrap, max_depth);
            for &c in counts {
                let preds_train: Vec<bool> = train
                    .vectors
                    .iter()
                    .map(|v| ensemble.predict_with(c, v).0)
                    .collect();
                let preds_test: Vec<bool> = test
                    .vectors
                    .iter()
                    .map(|v| ensemble.predict_with(c, v).0)
                    .collect();
                train_accuracy.push(accuracy(&preds_train, &train.labels));
                test_accuracy.push(accuracy(&preds_test, &test.labels));
            }
        }
        SweepModel::Adaboost { max_depth } => {
            let ensemble = fit_adaboost(train, max, max_depth, seed);
            for &c in counts {
                let preds_train: Vec<bool> = train
                    .vectors
                    .iter()
                    .map(|v| ensemble.predict_with(c, v).0)
                    .collect();
                let preds_test: Vec<bool> = test
                    .vectors
                    .iter()
                    .map(|v| ensemble.predict_with(c, v).0)
                    .collect();
                train_accuracy.push(accuracy(&preds_train, &train.labels));
                test_accuracy.push(accuracy(&preds_test, &test.labels));
            }
        }
    }
    Ok(SweepReport {
        counts: counts.to_vec(),
        train_accuracy,
        test_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit_adaboost, fit_bagging};
    use crate::vectorize::SparseVector;

    fn sparse(dim: usize, entries: &[(u32, f64)]) -> SparseVector {
        SparseVector {
            dim,
            entries: entries.to_vec(),
        }
    }

    fn noisy_dataset(n: usize, seed: u64) -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let dim = 6;
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let y = rng.random::<f64>() < 0.5;
            let mut entries = Vec::new();
            for f in 0..dim as u32 {
                let base = if y { 0.6 } else { 0.4 };
                if rng.random::<f64>() < base {
                    entries.push((f, rng.random::<f64>() + if y { 0.5 } else { 0.0 }));
                }
            }
            vectors.push(SparseVector { dim, entries });
            // 10% label noise
            labels.push(if rng.random::<f64>() < 0.1 { !y } else { y });
        }
        Dataset::new(vectors, labels, dim).unwrap()
    }

    #[test]
    fn counts_of_one_match_the_single_model() {
        let train = noisy_dataset(60, 1);
        let test = noisy_dataset(30, 2);
        let report = estimator_sweep(
            &train,
            &test,
            SweepModel::Adaboost { max_depth: Some(1) },
            &[1],
            0,
        )
        .unwrap();
        let single = fit_adaboost(&train, 1, Some(1), 0);
        let preds: Vec<bool> = test.vectors.iter().map(|v| single.predict(v).0).collect();
        let acc = accuracy(&preds, &test.labels);
        assert_eq!(report.test_accuracy[0], acc);
    }

    #[test]
    fn truncated_boosting_equals_fresh_fit_at_each_count() {
        let train = noisy_dataset(80, 3);
        let full = fit_adaboost(&train, 12, Some(2), 9);
        for c in [1usize, 3, 7, 12] {
            let fresh = fit_adaboost(&train, c, Some(2), 9);
            let c_eff = c.min(full.stages.len());
            assert_eq!(fresh.stages.len().min(c_eff), c_eff.min(fresh.stages.len()));
            for v in &train.vectors {
                assert_eq!(
                    full.predict_with(c, v).0,
                    fresh.predict(v).0,
                    "prefix mismatch at count {c}"
                );
            }
        }
    }

    #[test]
    fn truncated_bagging_equals_fresh_fit_at_each_count() {
        let train = noisy_dataset(50, 4);
        let full = fit_bagging(&train, 8, 21, true, None);
        for c in [1usize, 4, 8] {
            let fresh = fit_bagging(&train, c, 21, true, None);
            for v in &train.vectors {
                assert_eq!(full.predict_with(c, v).0, fresh.predict(v).0);
            }
        }
    }

    #[test]
    fn sweep_validates_counts() {
        let train = noisy_dataset(20, 5);
        let test = noisy_dataset(10, 6);
        let model = SweepModel::Adaboost { max_depth: Some(1) };
        assert!(estimator_sweep(&train, &test, model, &[], 0).is_err());
        assert!(estimator_sweep(&train, &test, model, &[3, 2], 0).is_err());
        assert!(estimator_sweep(&train, &test, model, &[0, 2], 0).is_err());
    }

    #[test]
    fn sweep_reports_one_row_per_count() {
        let train = noisy_dataset(60, 7);
        let test = noisy_dataset(30, 8);
        let report = estimator_sweep(
            &train,
            &test,
            SweepModel::Bagging {
                bootstrap: true,
                max_depth: None,
            },
            &[1, 3, 5],
            2,
        )
        .unwrap();
        assert_eq!(report.counts, vec![1, 3, 5]);
        assert_eq!(report.train_accuracy.len(), 3);
        assert_eq!(report.test_accuracy.len(), 3);
    }
}
