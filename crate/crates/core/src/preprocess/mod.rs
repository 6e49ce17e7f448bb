//! Text normalization pipeline: cleaning, semantic mapping, stemming,
//! negation handling, stop-word removal, and collocation merging.
//!
//! Stage order is clean -> semantic map -> tokenize -> stem -> negation ->
//! stop words -> collocations. Negation runs before stop-word removal
//! because the stop list contains "no", which would erase negation cues
//! before they fire.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub mod collocations;
pub mod rules;
pub mod stem;

pub use collocations::{detect_and_merge_collocations, npmi_from_counts, CollocationSet, PairStats};
pub use rules::RuleSet;
pub use stem::stem;

/// An ordered stream of normalized tokens.
pub type TokenStream = Vec<String>;

/// Token produced for negation cues and negation-flavored rule replacements;
/// any token equal to this triggers window deletion in the negation stage.
pub const NEGATION_TOKEN: &str = "NEGEX";

const DEFAULT_DEID_PATTERN: &str = r"\[\*\*[^\[\]]*?\*\*\]";

/// Stage toggles and knobs for the preprocessing pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub clean: bool,
    pub semantic_map: bool,
    pub stem: bool,
    pub negation: bool,
    pub stop_words: bool,
    pub collocations: bool,
    pub lowercase: bool,
    /// Tokens deleted after a negation cue.
    pub negation_window: usize,
    /// Cue phrases, expressed over the token forms present when the negation
    /// stage runs (post-stemming under the default toggles).
    pub negation_cues: Vec<String>,
    pub stop_list: BTreeSet<String>,
    pub npmi_threshold: f64,
    pub min_pair_count: u64,
    pub collocation_passes: usize,
    /// Regex for de-identification placeholders removed during cleaning.
    pub deid_pattern: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            clean: true,
            semantic_map: true,
            stem: true,
            negation: true,
            stop_words: true,
            collocations: true,
            lowercase: true,
            negation_window: 3,
            negation_cues: default_negation_cues(),
            stop_list: default_stop_list(),
            npmi_threshold: 0.5,
            min_pair_count: 5,
            collocation_passes: 1,
            deid_pattern: DEFAULT_DEID_PATTERN.to_string(),
        }
    }
}

impl PipelineConfig {
    /// Everything off: `run_pipeline` degenerates to a whitespace split.
    pub fn disabled() -> Self {
        Self {
            clean: false,
            semantic_map: false,
            stem: false,
            negation: false,
            stop_words: false,
            collocations: false,
            lowercase: false,
            ..Default::default()
        }
    }

    pub fn deid_regex(&self) -> Result<Regex, crate::error::Error> {
        Regex::new(&self.deid_pattern)
            .map_err(|e| crate::error::Error::InvalidConfig(format!("bad deid_pattern: {e}")))
    }
}

/// Cues shipped by default, in both surface and stemmed form so they fire
/// whether or not stemming is enabled.
pub fn default_negation_cues() -> Vec<String> {
    ["no", "not", "without", "denies", "deni", "denied"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn default_stop_list() -> BTreeSet<String> {
    include_str!("../../assets/stopwords.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Load a stop list from a file: one token per line, '#' comments.
pub fn stop_list_from_file(
    path: impl AsRef<std::path::Path>,
) -> crate::error::Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn default_deid_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(DEFAULT_DEID_PATTERN).unwrap())
}

/// Strip de-identification markers, then digits, then turn punctuation into
/// spaces; optionally lowercase; collapse whitespace runs.
pub fn clean(raw: &str, lowercase: bool) -> String {
    clean_with(raw, lowercase, default_deid_regex())
}

pub fn clean_with(raw: &str, lowercase: bool, deid: &Regex) -> String {
    let without_deid = deid.replace_all(raw, "");
    let mut out = String::with_capacity(without_deid.len());
    let mut last_was_space = true;
    for c in without_deid.chars() {
        let mapped = if c.is_numeric() {
            continue;
        } else if c.is_alphabetic() || c == '_' {
            if lowercase {
                c.to_ascii_lowercase()
            } else {
                c
            }
        } else {
            ' '
        };
        if mapped == ' ' {
            if !last_was_space {
                out.push(' ');
                last_was_space = true;
            }
        } else {
            out.push(mapped);
            last_was_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Whitespace split; never yields empty tokens.
pub fn tokenize(text: &str) -> TokenStream {
    text.split_whitespace().map(str::to_string).collect()
}

/// Replace each cue occurrence with `NEGEX` and delete the `window` tokens
/// that follow. Cues are multi-token phrases matched longest-first;
/// overlapping regions resolve left to right; a bare `NEGEX` token is always
/// a cue.
pub fn handle_negation(stream: &[String], cues: &[String], window: usize) -> TokenStream {
    let cue_phrases: Vec<Vec<&str>> = {
        let mut phrases: Vec<Vec<&str>> = cues
            .iter()
            .map(|c| c.split_whitespace().collect())
            .filter(|p: &Vec<&str>| !p.is_empty())
            .collect();
        phrases.sort_by_key(|p| std::cmp::Reverse(p.len()));
        phrases
    };

    let mut out = Vec::with_capacity(stream.len());
    let mut i = 0;
    while i < stream.len() {
        let cue_len = if stream[i] == NEGATION_TOKEN {
            Some(1)
        } else {
            cue_phrases
                .iter()
                .find(|p| {
                    i + p.len() <= stream.len()
                        && p.iter().zip(&stream[i..]).all(|(a, b)| *a == b)
                })
                .map(|p| p.len())
        };
        match cue_len {
            Some(len) => {
                out.push(NEGATION_TOKEN.to_string());
                i += len + window; // cue replaced, window dropped
            }
            None => {
                out.push(stream[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Drop every token present in the stop list, preserving order.
pub fn remove_stop_words(stream: &[String], stop_list: &BTreeSet<String>) -> TokenStream {
    stream
        .iter()
        .filter(|t| !stop_list.contains(*t))
        .cloned()
        .collect()
}

/// Run the per-noteset stages. Corpus-level collocation statistics must be
/// detected beforehand (or passed empty); disabled stages are identities.
pub fn run_pipeline(
    text: &str,
    config: &PipelineConfig,
    rules: &RuleSet,
    collocations: &CollocationSet,
) -> TokenStream {
    let cleaned = if config.clean {
        match Regex::new(&config.deid_pattern) {
            Ok(re) if config.deid_pattern != DEFAULT_DEID_PATTERN => {
                clean_with(text, config.lowercase, &re)
            }
            _ => clean(text, config.lowercase),
        }
    } else {
        text.to_string()
    };

    let mapped = if config.semantic_map {
        rules.apply(&cleaned)
    } else {
        cleaned
    };

    let mut tokens = tokenize(&mapped);

    if config.stem {
        for t in tokens.iter_mut() {
            let stemmed = stem(t);
            if stemmed != *t {
                *t = stemmed;
            }
        }
    }

    if config.negation {
        tokens = handle_negation(&tokens, &config.negation_cues, config.negation_window);
    }

    if config.stop_words {
        tokens = remove_stop_words(&tokens, &config.stop_list);
    }

    if config.collocations {
        tokens = collocations.merge_stream(&tokens);
    }

    tokens
}
