//! Binary classifiers over sparse vectors: a Gini decision tree, bagged
//! trees, AdaBoost over depth-capped trees, and a hinge-loss linear model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectorize::{SparseVector, Vocabulary};

pub mod ensemble;
pub mod linear;
pub mod tree;

pub use ensemble::{
    fit_adaboost, fit_adaboost_traced, fit_bagging, BaggedEnsemble, BoostStage, BoostTrace,
    BoostedEnsemble,
};
pub use linear::{fit_linear, LinearModel};
pub use tree::{best_split, fit_tree, gini, DecisionTree, Split};

/// Labeled sparse vectors sharing one dimension, with optional per-sample
/// weights that sum to one.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub vectors: Vec<SparseVector>,
    pub labels: Vec<bool>,
    pub dim: usize,
    pub weights: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(vectors: Vec<SparseVector>, labels: Vec<bool>, dim: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::LengthMismatch {
                predictions: vectors.len(),
                labels: labels.len(),
            });
        }
        for v in &vectors {
            if v.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.dim,
                });
            }
        }
        Ok(Self {
            vectors,
            labels,
            dim,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.vectors.len() {
            return Err(Error::LengthMismatch {
                predictions: weights.len(),
                labels: self.vectors.len(),
            });
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidConfig("negative sample weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "sample weights must sum to 1, got {total}"
            )));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Model hyperparameters, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Tree {
        #[serde(default)]
        max_depth: Option<usize>,
    },
    Bagging {
        #[serde(default = "default_bagging_n")]
        n: usize,
        #[serde(default = "default_true")]
        bootstrap: bool,
        #[serde(default)]
        max_depth: Option<usize>,
    },
    Adaboost {
        #[serde(default = "default_adaboost_n")]
        n: usize,
        /// Depth cap for the base trees. Uncapped trees reach zero training
        /// error immediately and collapse boosting to a single stage, so the
        /// default caps at 3.
        #[serde(default = "default_adaboost_depth")]
        max_depth: Option<usize>,
    },
    Linear {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
    },
}

fn default_bagging_n() -> usize {
    10
}
fn default_adaboost_n() -> usize {
    40
}
fn default_adaboost_depth() -> Option<usize> {
    Some(3)
}
fn default_c() -> f64 {
    100.0
}
fn default_epochs() -> usize {
    300
}
fn default_true() -> bool {
    true
}

impl ModelConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelConfig::Tree { .. } => "tree",
            ModelConfig::Bagging { .. } => "bagging",
            ModelConfig::Adaboost { .. } => "adaboost",
            ModelConfig::Linear { .. } => "linear",
        }
    }

    /// Whether TF-IDF vectors should be L2-normalized for this model when
    /// the caller does not say otherwise. Trees split on per-feature
    /// thresholds and do not care; the linear model does.
    pub fn default_l2(&self) -> bool {
        matches!(self, ModelConfig::Linear { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: bool,
    /// Trees and ensembles report a positive-class score in [0, 1]; the
    /// linear model reports its raw margin.
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Tree(DecisionTree),
    Bagging(BaggedEnsemble),
    Adaboost(BoostedEnsemble),
    Linear(LinearModel),
}

impl Model {
    pub fn fit(dataset: &Dataset, config: &ModelConfig, seed: u64) -> Model {
        match *config {
            ModelConfig::Tree { max_depth } => Model::Tree(fit_tree(dataset, max_depth)),
            ModelConfig::Bagging {
                n,
                bootstrap,
                max_depth,
            } => Model::Bagging(fit_bagging(dataset, n, seed, bootstrap, max_depth)),
            ModelConfig::Adaboost { n, max_depth } => {
                Model::Adaboost(fit_adaboost(dataset, n, max_depth, seed))
            }
            ModelConfig::Linear { c, epochs } => Model::Linear(fit_linear(dataset, c, epochs, seed)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Tree(t) => t.dim,
            Model::Bagging(b) => b.trees.first().map_or(0, |t| t.dim),
            Model::Adaboost(b) => b.stages.first().map_or(0, |s| s.tree.dim),
            Model::Linear(l) => l.dim,
        }
    }

    pub fn predict(&self, vector: &SparseVector) -> Result<Prediction> {
        let expected = self.dim();
        if vector.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: vector.dim,
            });
        }
        let (label, score) = match self {
            Model::Tree(t) => t.predict(vector),
            Model::Bagging(b) => b.predict(vector),
            Model::Adaboost(b) => b.predict(vector),
            Model::Linear(l) => l.predict(vector),
        };
        Ok(Prediction { label, score })
    }

    pub fn predict_all(&self, vectors: &[SparseVector]) -> Result<Vec<Prediction>> {
        vectors.iter().map(|v| self.predict(v)).collect()
    }
}

/// Versioned on-disk model: hyperparameters, the trained model, and the
/// fingerprint of the vocabulary it was trained against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub config: ModelConfig,
    pub seed: u64,
    pub vocab_fingerprint: u64,
    /// Base of the idf logarithm, recorded for reproducibility.
    pub idf_log_base: &'static str,
    pub model: Model,
}

pub const MODEL_FILE_VERSION: u32 = 1;

impl ModelFile {
    pub fn new(model: Model, config: ModelConfig, seed: u64, vocab: &Vocabulary) -> Self {
        Self {
            version: MODEL_FILE_VERSION,
            config,
            seed,
            vocab_fingerprint: vocab.fingerprint(),
            idf_log_base: "e",
            model,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if file.version != MODEL_FILE_VERSION {
            return Err(Error::Format(format!(
                "unsupported model file version {}",
                file.version
            )));
        }
        Ok(file)
    }

    /// Refuse to score vectors built from a different vocabulary.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        let data = vocab.fingerprint();
        if data != self.vocab_fingerprint {
            return Err(Error::VocabularyMismatch {
                model: self.vocab_fingerprint,
                data,
            });
        }
        Ok(())
    }
}

/// Rank tokens by linear-model coefficient, descending; the most positive
/// coefficients mark the features that push hardest toward a positive call.
pub fn feature_importance(
    model: &LinearModel,
    vocab: &Vocabulary,
    top_k: usize,
) -> Vec<(String, f64)> {
    let mut ranked: Vec<(usize, f64)> = model.weights.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(top_k)
        .filter_map(|(i, w)| vocab.token_at(i).map(|t| (t.to_string(), w)))
        .collect()
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

    fn vocab_of(tokens: &[&str]) -> Vocabulary {
        let corpus: Vec<Vec<String>> = tokens
            .iter()
            .map(|t| vec![t.to_string(), t.to_string()])
            .collect();
        crate::vectorize::build_vocabulary(&corpus, 1).unwrap().0
    }

    #[test]
    fn importance_sorts_by_coefficient_descending() {
        let vocab = vocab_of(&["a", "b", "c"]);
        let model = LinearModel {
            weights: vec![2.0, -1.0, 0.5],
            bias: 0.0,
            c: 100.0,
            dim: 3,
        };
        let top = feature_importance(&model, &vocab, 2);
        assert_eq!(top, vec![("a".to_string(), 2.0), ("c".to_string(), 0.5)]);
        assert!(feature_importance(&model, &vocab, 0).is_empty());
        assert_eq!(feature_importance(&model, &vocab, 10).len(), 3);
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let ds = Dataset::new(
            vec![sparse(2, &[(0, 1.0)]), sparse(2, &[(1, 1.0)])],
            vec![true, false],
            2,
        )
        .unwrap();
        let model = Model::fit(&ds, &ModelConfig::Tree { max_depth: None }, 0);
        let err = model.predict(&sparse(3, &[])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn model_file_round_trip_and_fingerprint_check() {
        let ds = Dataset::new(
            vec![sparse(2, &[(0, 1.0)]), sparse(2, &[(1, 1.0)])],
            vec![true, false],
            2,
        )
        .unwrap();
        let config = ModelConfig::Bagging {
            n: 3,
            bootstrap: true,
            max_depth: None,
        };
        let model = Model::fit(&ds, &config, 7);
        let vocab = vocab_of(&["x", "y"]);
        let file = ModelFile::new(model, config, 7, &vocab);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        file.save(&path).unwrap();
        let back = ModelFile::load(&path).unwrap();
        assert_eq!(back.vocab_fingerprint, vocab.fingerprint());
        back.check_vocabulary(&vocab).unwrap();

        let other = vocab_of(&["p", "q", "r"]);
        assert!(back.check_vocabulary(&other).is_err());

        let v = sparse(2, &[(0, 1.0)]);
        assert_eq!(
            back.model.predict(&v).unwrap().label,
            file.model.predict(&v).unwrap().label
        );
    }

    #[test]
    fn weights_must_sum_to_one() {
        let ds = Dataset::new(vec![sparse(1, &[]), sparse(1, &[])], vec![true, false], 1).unwrap();
        assert!(ds.clone().with_weights(vec![0.5, 0.5]).is_ok());
        assert!(ds.clone().with_weights(vec![0.9, 0.5]).is_err());
        assert!(ds.with_weights(vec![-0.5, 1.5]).is_err());
    }
}
