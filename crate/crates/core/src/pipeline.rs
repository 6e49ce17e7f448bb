//! A pipeline fitted on a training corpus: collocation statistics,
//! vocabulary, and document frequencies all come from the training side
//! only, then apply unchanged to held-out documents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Noteset;
use crate::error::Result;
use crate::models::Dataset;
use crate::preprocess::{
    detect_and_merge_collocations, run_pipeline, CollocationSet, PipelineConfig, RuleSet,
    TokenStream,
};
use crate::vectorize::{build_vocabulary, tfidf_vector, CorpusStats, SparseVector, Vocabulary};

/// Vectorization knobs that sit between preprocessing and model fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VectorizeConfig {
    /// Minimum document frequency for a token to enter the vocabulary.
    pub min_df: usize,
    /// L2-normalize TF-IDF vectors; `None` defers to the model kind.
    pub l2_normalize: Option<bool>,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        Self {
            min_df: 2,
            l2_normalize: None,
        }
    }
}

/// Preprocessing and vectorization state learned from a training corpus.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub config: PipelineConfig,
    pub rules: RuleSet,
    pub collocations: CollocationSet,
    pub vocab: Vocabulary,
    pub stats: CorpusStats,
    pub l2_normalize: bool,
}

impl FittedPipeline {
    /// Preprocess one noteset with the fitted artifacts.
    pub fn tokens(&self, noteset: &Noteset) -> TokenStream {
        run_pipeline(&noteset.text, &self.config, &self.rules, &self.collocations)
    }

    /// Vectorize one noteset with the fitted vocabulary and idf.
    pub fn transform(&self, noteset: &Noteset) -> SparseVector {
        let tokens = self.tokens(noteset);
        tfidf_vector(&tokens, &self.vocab, &self.stats, self.l2_normalize)
    }

    /// Vectorize a corpus into a labeled dataset.
    pub fn dataset(&self, notesets: &[Noteset]) -> Result<Dataset> {
        let vectors: Vec<SparseVector> =
            notesets.par_iter().map(|ns| self.transform(ns)).collect();
        let labels: Vec<bool> = notesets.iter().map(|ns| ns.label).collect();
        Dataset::new(vectors, labels, self.vocab.len())
    }
}

/// Fit the corpus-level pipeline state on `train`: run the per-noteset
/// stages, detect collocations across the processed streams, then build the
/// vocabulary and document frequencies over the merged output. Returns the
/// fitted pipeline together with the training dataset (the training streams
/// are already in hand, so vectorizing them here avoids a second pass).
pub fn fit_pipeline(
    train: &[Noteset],
    config: &PipelineConfig,
    rules: &RuleSet,
    vectorize: &VectorizeConfig,
    l2_normalize: bool,
) -> Result<(FittedPipeline, Dataset)> {
    let base = CollocationSet::empty();
    let streams: Vec<TokenStream> = train
        .par_iter()
        .map(|ns| run_pipeline(&ns.text, config, rules, &base))
        .collect();

    let (streams, collocations) = if config.collocations {
        detect_and_merge_collocations(
            streams,
            config.npmi_threshold,
            config.min_pair_count,
            config.collocation_passes,
        )
    } else {
        (streams, CollocationSet::empty())
    };

    let (vocab, stats) = build_vocabulary(&streams, vectorize.min_df)?;
    let vectors: Vec<SparseVector> = streams
        .par_iter()
        .map(|tokens| tfidf_vector(tokens, &vocab, &stats, l2_normalize))
        .collect();
    let labels: Vec<bool> = train.iter().map(|ns| ns.label).collect();
    let dataset = Dataset::new(vectors, labels, vocab.len())?;

    Ok((
        FittedPipeline {
            config: config.clone(),
            rules: rules.clone(),
            collocations,
            vocab,
            stats,
            l2_normalize,
        },
        dataset,
    ))
}
