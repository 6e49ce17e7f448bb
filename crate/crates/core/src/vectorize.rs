//! Vocabulary construction, document-frequency statistics, and count /
//! TF-IDF sparse vectors.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token <-> dense index mapping; indices are assigned in lexicographic
/// token order so builds are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    index_to_token: Vec<String>,
    pub min_df: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.index_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_token.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn token_at(&self, index: usize) -> Option<&str> {
        self.index_to_token.get(index).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.index_to_token
    }

    /// Order-stable hash of the token list; embedded in model files to catch
    /// train/test vocabulary mismatches.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.index_to_token.len().hash(&mut hasher);
        for tok in &self.index_to_token {
            tok.hash(&mut hasher);
        }
        hasher.finish()
    }
}

/// Document counts backing the IDF: total documents and per-token document
/// frequency, indexed like the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    df: Vec<usize>,
}

impl CorpusStats {
    pub fn df(&self, index: usize) -> usize {
        self.df[index]
    }

    /// `ln(N / df)`; only defined for retained tokens, which always have
    /// `df >= 1`.
    pub fn idf(&self, index: usize) -> f64 {
        let df = self.df[index];
        debug_assert!(df >= 1, "retained tokens always occur somewhere");
        ((self.n_docs as f64) / (df as f64)).ln()
    }
}

/// Sorted sparse vector; no zero entries are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        match self
            .entries
            .binary_search_by_key(&(index as u32), |&(i, _)| i)
        {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| v * dense[i as usize])
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, v) in self.entries.iter_mut() {
            *v *= factor;
        }
    }

    /// Debug dump: space-separated `index:value` pairs.
    pub fn dump(&self) -> String {
        self.entries
            .iter()
            .map(|(i, v)| format!("{i}:{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Build the vocabulary (tokens with document frequency >= `min_df`) and the
/// matching corpus statistics over the same corpus.
pub fn build_vocabulary<S: AsRef<str>>(
    corpus: &[Vec<S>],
    min_df: usize,
) -> Result<(Vocabulary, CorpusStats)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let mut seen: Vec<&str> = doc.iter().map(|t| t.as_ref()).collect();
        seen.sort_unstable();
        seen.dedup();
        for tok in seen {
            *doc_freq.entry(tok).or_insert(0) += 1;
        }
    }
    let min_df = min_df.max(1);
    let mut index_to_token = Vec::new();
    let mut df = Vec::new();
    for (tok, freq) in doc_freq {
        if freq >= min_df {
            index_to_token.push(tok.to_string());
            df.push(freq);
        }
    }
    let token_to_index = index_to_token
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok((
        Vocabulary {
            token_to_index,
            index_to_token,
            min_df,
        },
        CorpusStats {
            n_docs: corpus.len(),
            df,
        },
    ))
}

/// Occurrence counts over the vocabulary; out-of-vocabulary tokens are
/// ignored.
pub fn count_vector<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<u32, f64> = HashMap::new();
    for tok in tokens {
        if let Some(idx) = vocab.index_of(tok.as_ref()) {
            *counts.entry(idx as u32).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(u32, f64)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

/// Term frequency times inverse document frequency:
/// `(count(t) / |d|) * idf(t)` where `|d|` counts in-vocabulary tokens.
/// Optionally scaled to unit Euclidean norm.
pub fn tfidf_vector<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    stats: &CorpusStats,
    l2_normalize: bool,
) -> SparseVector {
    let counts = count_vector(tokens, vocab);
    let total: f64 = counts.entries.iter().map(|&(_, c)| c).sum();
    if total == 0.0 {
        return SparseVector::empty(vocab.len());
    }
    let mut entries: Vec<(u32, f64)> = counts
        .entries
        .into_iter()
        .filter_map(|(i, c)| {
            let value = (c / total) * stats.idf(i as usize);
            (value != 0.0).then_some((i, value))
        })
        .collect();
    if l2_normalize {
        let norm = entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in entries.iter_mut() {
                *v /= norm;
            }
        }
    }
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

/// Write the vocabulary as TSV (`token<TAB>index<TAB>df`) with a header line
/// carrying N and min_df.
pub fn write_vocabulary(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    stats: &CorpusStats,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "#N={}\tmin_df={}", stats.n_docs, vocab.min_df)?;
    for (i, tok) in vocab.tokens().iter().enumerate() {
        writeln!(f, "{}\t{}\t{}", tok, i, stats.df(i))?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_vocabulary(path: impl AsRef<Path>) -> Result<(Vocabulary, CorpusStats)> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Format(
        "empty vocabulary file".into(),
    ))??;
    let header = header
        .strip_prefix("#N=")
        .ok_or_else(|| Error::Format("vocabulary header must start with #N=".into()))?;
    let (n_docs, min_df) = header
        .split_once("\tmin_df=")
        .ok_or_else(|| Error::Format("vocabulary header missing min_df".into()))?;
    let n_docs: usize = n_docs
        .parse()
        .map_err(|_| Error::Format(format!("bad N {n_docs:?}")))?;
    let min_df: usize = min_df
        .parse()
        .map_err(|_| Error::Format(format!("bad min_df {min_df:?}")))?;

    let mut rows: Vec<(String, usize, usize)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(tok), Some(idx), Some(df)) => {
                rows.push((
                    tok.to_string(),
                    idx.parse().map_err(|_| Error::BadRow {
                        row: i + 2,
                        message: format!("bad index {idx:?}"),
                    })?,
                    df.parse().map_err(|_| Error::BadRow {
                        row: i + 2,
                        message: format!("bad df {df:?}"),
                    })?,
                ));
            }
            _ => {
                return Err(Error::BadRow {
                    row: i + 2,
                    message: "expected token, index, df".into(),
                })
            }
        }
    }
    rows.sort_by_key(|&(_, idx, _)| idx);
    for (pos, &(_, idx, _)) in rows.iter().enumerate() {
        if idx != pos {
            return Err(Error::Format(format!(
                "vocabulary indices are not dense: expected {pos}, got {idx}"
            )));
        }
    }
    let index_to_token: Vec<String> = rows.iter().map(|(t, _, _)| t.clone()).collect();
    let df: Vec<usize> = rows.iter().map(|&(_, _, d)| d).collect();
    let token_to_index = index_to_token
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok((
        Vocabulary {
            token_to_index,
            index_to_token,
            min_df,
        },
        CorpusStats { n_docs, df },
    ))
}
