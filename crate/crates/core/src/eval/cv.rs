//! K-fold cross-validation and grid search. Every fold refits the full
//! pipeline (collocations, vocabulary, idf) on its training side only, so
//! nothing leaks from held-out documents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_kfold, Noteset};
use crate::error::{Error, Result};
use crate::eval::{metrics, ConfusionMatrix, Metrics};
use crate::models::{Model, ModelConfig};
use crate::pipeline::{fit_pipeline, VectorizeConfig};
use crate::preprocess::{PipelineConfig, RuleSet};
use crate::vectorize::Vocabulary;

/// Everything needed to train one candidate: preprocessing toggles,
/// vectorization knobs, and model hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub vectorize: VectorizeConfig,
    pub model: ModelConfig,
}

impl TrainConfig {
    pub fn new(model: ModelConfig) -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            vectorize: VectorizeConfig::default(),
            model,
        }
    }

    pub fn l2_normalize(&self) -> bool {
        self.vectorize
            .l2_normalize
            .unwrap_or_else(|| self.model.default_l2())
    }
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    /// Vocabulary fitted on this fold's training side; kept so callers can
    /// audit exactly what the fold saw.
    pub vocab: Vocabulary,
}

/// Mean and sample standard deviation per metric across folds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub summary: MetricsSummary,
    pub k: usize,
    pub seed: u64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(folds: &[FoldResult]) -> MetricsSummary {
    let pick = |f: fn(&Metrics) -> f64| -> Vec<f64> {
        folds.iter().map(|r| f(&r.metrics)).collect()
    };
    let (accuracy_mean, accuracy_std) = mean_std(&pick(|m| m.accuracy));
    let (precision_mean, precision_std) = mean_std(&pick(|m| m.precision));
    let (recall_mean, recall_std) = mean_std(&pick(|m| m.recall));
    let (f1_mean, f1_std) = mean_std(&pick(|m| m.f1));
    MetricsSummary {
        accuracy_mean,
        accuracy_std,
        precision_mean,
        precision_std,
        recall_mean,
        recall_std,
        f1_mean,
        f1_std,
    }
}

/// Train on one fold's complement and evaluate on the fold.
fn run_fold(
    notesets: &[Noteset],
    fold_of: &[usize],
    fold: usize,
    rules: &RuleSet,
    config: &TrainConfig,
    seed: u64,
) -> Result<FoldResult> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (ns, &f) in notesets.iter().zip(fold_of) {
        if f == fold {
            test.push(ns.clone());
        } else {
            train.push(ns.clone());
        }
    }
    let (pipe, train_data) = fit_pipeline(
        &train,
        &config.pipeline,
        rules,
        &config.vectorize,
        config.l2_normalize(),
    )?;
    let model = Model::fit(&train_data, &config.model, seed);
    let test_data = pipe.dataset(&test)?;
    let predictions: Vec<bool> = test_data
        .vectors
        .iter()
        .map(|v| model.predict(v).map(|p| p.label))
        .collect::<Result<_>>()?;
    let (confusion, m) = metrics(&predictions, &test_data.labels)?;
    Ok(FoldResult {
        fold,
        confusion,
        metrics: m,
        vocab: pipe.vocab,
    })
}

/// K-fold cross-validation with per-fold refitting of all corpus statistics.
pub fn cross_validate(
    notesets: &[Noteset],
    rules: &RuleSet,
    config: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let plan = split_kfold(notesets, k, seed)?;
    let fold_of: Vec<usize> = notesets
        .iter()
        .map(|ns| {
            plan.fold_of(&ns.admission_id)
                .ok_or_else(|| Error::MissingLabel(ns.admission_id.clone()))
        })
        .collect::<Result<_>>()?;

    let folds: Vec<FoldResult> = (0..k)
        .into_par_iter()
        .map(|fold| run_fold(notesets, &fold_of, fold, rules, config, seed))
        .collect::<Result<_>>()?;

    let summary = summarize(&folds);
    Ok(CvReport {
        folds,
        summary,
        k,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct GridRow {
    pub index: usize,
    pub config: TrainConfig,
    pub summary: MetricsSummary,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    /// Index of the row with the highest mean F1; ties go to the earliest
    /// grid point.
    pub best: usize,
}

/// Evaluate every grid point by cross-validation and pick the best mean F1.
pub fn grid_search(
    notesets: &[Noteset],
    rules: &RuleSet,
    grid: &[TrainConfig],
    k: usize,
    seed: u64,
) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty parameter grid".into()));
    }
    let rows: Vec<GridRow> = grid
        .par_iter()
        .enumerate()
        .map(|(index, config)| {
            cross_validate(notesets, rules, config, k, seed).map(|report| GridRow {
                index,
                config: config.clone(),
                summary: report.summary,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for row in &rows {
        if row.summary.f1_mean > rows[best].summary.f1_mean {
            best = row.index;
        }
    }
    Ok(GridReport { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticConfig};

    fn small_corpus() -> Vec<Noteset> {
        generate_synthetic(&SyntheticConfig {
            n_positive: 12,
            n_negative: 12,
            mean_doc_length: 60,
            seed: 5,
            ..Default::default()
        })
        .unwrap()
    }

    fn quick_config() -> TrainConfig {
        TrainConfig {
            pipeline: PipelineConfig::default(),
            vectorize: VectorizeConfig {
                min_df: 1,
                l2_normalize: None,
            },
            model: ModelConfig::Tree { max_depth: Some(4) },
        }
    }

    #[test]
    fn two_fold_cv_reports_two_rows() {
        let corpus = small_corpus();
        let report = cross_validate(&corpus, &RuleSet::default_rules().unwrap(), &quick_config(), 2, 3)
            .unwrap();
        assert_eq!(report.folds.len(), 2);
        assert_eq!(report.k, 2);
    }

    #[test]
    fn cv_is_deterministic() {
        let corpus = small_corpus();
        let rules = RuleSet::default_rules().unwrap();
        let a = cross_validate(&corpus, &rules, &quick_config(), 3, 7).unwrap();
        let b = cross_validate(&corpus, &rules, &quick_config(), 3, 7).unwrap();
        for (x, y) in a.folds.iter().zip(&b.folds) {
            assert_eq!(x.confusion, y.confusion);
        }
        assert_eq!(a.summary.f1_mean, b.summary.f1_mean);
    }

    #[test]
    fn fold_vocabularies_never_see_test_only_tokens() {
        let mut corpus = small_corpus();
        // plant a token that exists in exactly one document
        let planted = "zzquarkolimax";
        corpus[0].text.push_str(&format!(" {planted} {planted}"));
        let rules = RuleSet::default_rules().unwrap();
        let report = cross_validate(&corpus, &rules, &quick_config(), 4, 11).unwrap();
        let plan = split_kfold(&corpus, 4, 11).unwrap();
        let planted_fold = plan.fold_of(&corpus[0].admission_id).unwrap();
        let planted_stem = crate::preprocess::stem(planted);
        for fold in &report.folds {
            if fold.fold == planted_fold {
                // the only carrier is in this fold's test split
                assert!(
                    !fold.vocab.contains(&planted_stem),
                    "fold {} leaked a test-only token",
                    fold.fold
                );
            }
        }
    }

    #[test]
    fn grid_search_returns_a_row_per_point_and_the_best_f1() {
        let corpus = small_corpus();
        let rules = RuleSet::default_rules().unwrap();
        let grid = vec![
            TrainConfig {
                model: ModelConfig::Linear {
                    c: 0.01,
                    epochs: 30,
                },
                ..quick_config()
            },
            TrainConfig {
                model: ModelConfig::Linear {
                    c: 100.0,
                    epochs: 30,
                },
                ..quick_config()
            },
        ];
        let report = grid_search(&corpus, &rules, &grid, 2, 13).unwrap();
        assert_eq!(report.rows.len(), 2);
        let best_f1 = report.rows[report.best].summary.f1_mean;
        for row in &report.rows {
            assert!(best_f1 >= row.summary.f1_mean);
        }
    }

    #[test]
    fn duplicate_grid_points_score_identically() {
        let corpus = small_corpus();
        let rules = RuleSet::default_rules().unwrap();
        let grid = vec![quick_config(), quick_config()];
        let report = grid_search(&corpus, &rules, &grid, 2, 17).unwrap();
        assert_eq!(
            report.rows[0].summary.f1_mean,
            report.rows[1].summary.f1_mean
        );
        assert_eq!(report.best, 0, "ties break to the first grid point");
    }

    #[test]
    fn single_point_grid_returns_that_point() {
        let corpus = small_corpus();
        let rules = RuleSet::default_rules().unwrap();
        let report = grid_search(&corpus, &rules, &[quick_config()], 2, 1).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.best, 0);
    }
}
