//! Evaluation: confusion-matrix metrics, ROC curves with trapezoidal AUC,
//! cross-validation, grid search, and estimator-count sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod cv;
pub mod sweep;

pub use cv::{cross_validate, grid_search, CvReport, FoldResult, GridReport, TrainConfig};
pub use sweep::{estimator_sweep, SweepModel, SweepReport};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Accuracy, precision, recall, and F1. A degenerate denominator (no
/// predicted positives, or no actual positives) reports 0 with its flag
/// cleared rather than dropping the field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

/// Harmonic mean of precision and recall.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Standard binary-classification metrics against boolean labels.
pub fn metrics(predictions: &[bool], labels: &[bool]) -> Result<(ConfusionMatrix, Metrics)> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    let accuracy = (cm.tp + cm.tn) as f64 / cm.total() as f64;
    let precision_defined = cm.tp + cm.fp > 0;
    let precision = if precision_defined {
        cm.tp as f64 / (cm.tp + cm.fp) as f64
    } else {
        0.0
    };
    let recall_defined = cm.tp + cm.fn_ > 0;
    let recall = if recall_defined {
        cm.tp as f64 / (cm.tp + cm.fn_) as f64
    } else {
        0.0
    };
    let f1_defined = precision_defined && recall_defined && precision + recall > 0.0;
    let f1 = if f1_defined {
        f1_score(precision, recall)
    } else {
        0.0
    };
    Ok((
        cm,
        Metrics {
            accuracy,
            precision,
            recall,
            f1,
            precision_defined,
            recall_defined,
            f1_defined,
        },
    ))
}

/// ROC curve points from (0,0) to (1,1) and the trapezoidal area under it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// (false positive rate, true positive rate), monotone non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweep the decision threshold over distinct score values, descending;
/// samples with equal scores move together.
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predictions: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        // consume the whole tie group
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }

    let auc = points
        .windows(2)
        .map(|w| {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            (x2 - x1) * (y1 + y2) / 2.0
        })
        .sum();
    Ok(RocCurve { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_is_the_harmonic_mean() {
        assert!((f1_score(0.835, 0.839) - 0.837).abs() < 5e-4);
        assert!((f1_score(0.923, 0.846) - 0.883).abs() < 5e-4);
        assert!((f1_score(0.904, 0.876) - 0.890).abs() < 5e-4);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn all_correct_predictions_score_one() {
        let labels = vec![true, false, true, false];
        let (cm, m) = metrics(&labels, &labels).unwrap();
        assert_eq!(cm.total(), 4);
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn degenerate_denominators_report_zero_with_flags() {
        // never predicts positive
        let (_, m) = metrics(&[false, false], &[true, false]).unwrap();
        assert!(!m.precision_defined);
        assert_eq!(m.precision, 0.0);
        assert!(!m.f1_defined);
        // no actual positives
        let (_, m) = metrics(&[false, true], &[false, false]).unwrap();
        assert!(!m.recall_defined);
        assert_eq!(m.recall, 0.0);
    }

    #[test]
    fn metrics_identity_holds() {
        let preds = vec![true, true, false, true, false, false, true];
        let labels = vec![true, false, false, true, true, false, false];
        let (cm, m) = metrics(&preds, &labels).unwrap();
        assert_eq!(
            m.accuracy,
            (cm.tp + cm.tn) as f64 / cm.total() as f64
        );
        let lhs = m.f1 * (m.precision + m.recall);
        let rhs = 2.0 * m.precision * m.recall;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_and_empty_are_errors() {
        assert!(metrics(&[true], &[true, false]).is_err());
        assert!(metrics(&[], &[]).is_err());
    }

    #[test]
    fn perfectly_separating_scores_have_auc_one() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let labels = [true, true, false, false];
        let curve = roc(&scores, &labels).unwrap();
        assert_eq!(curve.auc, 1.0);
        assert_eq!(curve.points.first().copied(), Some((0.0, 0.0)));
        assert_eq!(curve.points.last().copied(), Some((1.0, 1.0)));
    }

    #[test]
    fn all_equal_scores_trace_the_diagonal() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let labels = [true, false, true, false];
        let curve = roc(&scores, &labels).unwrap();
        assert_eq!(curve.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!((curve.auc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hand_swept_fixture_is_perfect() {
        let scores = [0.9, 0.4, 0.6, 0.2];
        let labels = [true, false, true, false];
        let curve = roc(&scores, &labels).unwrap();
        assert_eq!(curve.auc, 1.0);
    }

    #[test]
    fn single_class_labels_are_rejected() {
        assert!(matches!(
            roc(&[0.5, 0.2], &[true, true]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn auc_is_invariant_under_monotone_score_transforms() {
        let scores = [0.9, 0.1, 0.7, 0.3, 0.5, 0.45];
        let labels = [true, false, true, false, true, false];
        let a = roc(&scores, &labels).unwrap().auc;
        let squashed: Vec<f64> = scores.iter().map(|s| (10.0 * s).exp()).collect();
        let b = roc(&squashed, &labels).unwrap().auc;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn curve_is_monotone() {
        let scores = [0.8, 0.6, 0.6, 0.55, 0.3, 0.2, 0.9];
        let labels = [true, false, true, true, false, true, false];
        let curve = roc(&scores, &labels).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }
}
