//! Collocation detection via normalized pointwise mutual information over
//! adjacent token pairs, and left-to-right non-overlapping pair merging.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adjacent-bigram counts, unigram token counts, and the total bigram count
/// used as the probability normalizer.
#[derive(Debug, Clone, Default)]
pub struct PairStats {
    pair_counts: HashMap<(String, String), u64>,
    unigram_counts: HashMap<String, u64>,
    total_bigrams: u64,
}

impl PairStats {
    pub fn from_corpus<S: AsRef<str>>(corpus: &[Vec<S>]) -> Self {
        let mut stats = Self::default();
        for stream in corpus {
            stats.accumulate(stream);
        }
        stats
    }

    pub fn accumulate<S: AsRef<str>>(&mut self, stream: &[S]) {
        for tok in stream {
            *self
                .unigram_counts
                .entry(tok.as_ref().to_string())
                .or_insert(0) += 1;
        }
        for pair in stream.windows(2) {
            let key = (pair[0].as_ref().to_string(), pair[1].as_ref().to_string());
            *self.pair_counts.entry(key).or_insert(0) += 1;
            self.total_bigrams += 1;
        }
    }

    /// Partial counts combine by summation, so corpus shards can be counted
    /// independently and merged.
    pub fn merge(&mut self, other: PairStats) {
        for (k, v) in other.pair_counts {
            *self.pair_counts.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.unigram_counts {
            *self.unigram_counts.entry(k).or_insert(0) += v;
        }
        self.total_bigrams += other.total_bigrams;
    }

    pub fn pair_count(&self, x: &str, y: &str) -> u64 {
        self.pair_counts
            .get(&(x.to_string(), y.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn unigram_count(&self, x: &str) -> u64 {
        self.unigram_counts.get(x).copied().unwrap_or(0)
    }

    pub fn total_bigrams(&self) -> u64 {
        self.total_bigrams
    }

    /// NPMI of an observed pair; `None` when the pair was never seen
    /// (zero-count pairs are never scored).
    pub fn npmi(&self, x: &str, y: &str) -> Option<f64> {
        let cxy = self.pair_count(x, y);
        if cxy == 0 || self.total_bigrams == 0 {
            return None;
        }
        Some(npmi_from_counts(
            cxy,
            self.unigram_count(x),
            self.unigram_count(y),
            self.total_bigrams,
        ))
    }
}

/// Normalized pointwise mutual information from raw counts:
/// `(-1 / ln p(x,y)) * ln(p(x,y) / (p(x) p(y)))` with `p(..) = c(..)/t`,
/// natural log. `p(x,y) = 1` is defined as 1 by continuity.
pub fn npmi_from_counts(cxy: u64, cx: u64, cy: u64, t: u64) -> f64 {
    assert!(cxy >= 1, "zero-count pairs are never scored");
    assert!(t >= 1);
    if cxy == t {
        return 1.0;
    }
    let t = t as f64;
    let pxy = cxy as f64 / t;
    let px = cx as f64 / t;
    let py = cy as f64 / t;
    (pxy / (px * py)).ln() / -pxy.ln()
}

/// One pair selected for merging, with the statistics that selected it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPair {
    pub x: String,
    pub y: String,
    pub count: u64,
    pub npmi: f64,
}

/// The pairs chosen by one detection pass, in deterministic order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollocationPass {
    pub pairs: Vec<SelectedPair>,
}

impl CollocationPass {
    fn lookup(&self) -> HashSet<(&str, &str)> {
        self.pairs
            .iter()
            .map(|p| (p.x.as_str(), p.y.as_str()))
            .collect()
    }
}

/// All detection passes, applied in order when merging a stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet {
    pub passes: Vec<CollocationPass>,
}

impl CollocationSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.passes.iter().all(|p| p.pairs.is_empty())
    }

    pub fn selected_pairs(&self) -> impl Iterator<Item = &SelectedPair> {
        self.passes.iter().flat_map(|p| p.pairs.iter())
    }

    /// Merge a single stream with this set's passes, left to right,
    /// non-overlapping: `[x, y, ...]` becomes `[x_y, ...]`.
    pub fn merge_stream(&self, stream: &[String]) -> Vec<String> {
        let mut tokens: Vec<String> = stream.to_vec();
        for pass in &self.passes {
            if pass.pairs.is_empty() {
                continue;
            }
            tokens = merge_once(&tokens, &pass.lookup());
        }
        tokens
    }

    /// TSV: `pair<TAB>count<TAB>npmi` with the pair space-joined; passes are
    /// separated by `# pass N` comment lines.
    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (i, pass) in self.passes.iter().enumerate() {
            writeln!(f, "# pass {}", i + 1)?;
            for p in &pass.pairs {
                writeln!(f, "{} {}\t{}\t{:.6}", p.x, p.y, p.count, p.npmi)?;
            }
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut passes: Vec<CollocationPass> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with('#') {
                if trimmed.starts_with("# pass") {
                    passes.push(CollocationPass::default());
                }
                continue;
            }
            let mut cols = trimmed.split('\t');
            let (pair, count, npmi) = match (cols.next(), cols.next(), cols.next()) {
                (Some(p), Some(c), Some(n)) => (p, c, n),
                _ => {
                    return Err(Error::BadRow {
                        row: i + 1,
                        message: "expected pair, count, npmi".into(),
                    })
                }
            };
            let (x, y) = pair.split_once(' ').ok_or_else(|| Error::BadRow {
                row: i + 1,
                message: "pair must be two space-separated tokens".into(),
            })?;
            if passes.is_empty() {
                passes.push(CollocationPass::default());
            }
            passes.last_mut().unwrap().pairs.push(SelectedPair {
                x: x.to_string(),
                y: y.to_string(),
                count: count.parse().map_err(|_| Error::BadRow {
                    row: i + 1,
                    message: format!("bad count {count:?}"),
                })?,
                npmi: npmi.parse().map_err(|_| Error::BadRow {
                    row: i + 1,
                    message: format!("bad npmi {npmi:?}"),
                })?,
            });
        }
        Ok(Self { passes })
    }
}

fn merge_once(tokens: &[String], selected: &HashSet<(&str, &str)>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len()
            && selected.contains(&(tokens[i].as_str(), tokens[i + 1].as_str()))
        {
            out.push(format!("{}_{}", tokens[i], tokens[i + 1]));
            i += 2;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}

/// Accumulate pair statistics over the corpus, select pairs with
/// `count >= min_pair_count` and `npmi >= threshold`, merge them, and repeat
/// for `passes` rounds on the merged output.
pub fn detect_and_merge_collocations(
    corpus: Vec<Vec<String>>,
    threshold: f64,
    min_pair_count: u64,
    passes: usize,
) -> (Vec<Vec<String>>, CollocationSet) {
    let mut corpus = corpus;
    let mut set = CollocationSet::empty();
    for _ in 0..passes {
        let stats = PairStats::from_corpus(&corpus);
        let mut pairs: Vec<SelectedPair> = stats
            .pair_counts
            .iter()
            .filter(|(_, &c)| c >= min_pair_count)
            .filter_map(|((x, y), &c)| {
                let score = npmi_from_counts(
                    c,
                    stats.unigram_count(x),
                    stats.unigram_count(y),
                    stats.total_bigrams,
                );
                (score >= threshold).then(|| SelectedPair {
                    x: x.clone(),
                    y: y.clone(),
                    count: c,
                    npmi: score,
                })
            })
            .collect();
        pairs.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
        let pass = CollocationPass { pairs };
        if pass.pairs.is_empty() {
            set.passes.push(pass);
            break;
        }
        let lookup = pass.lookup();
        corpus = corpus.iter().map(|s| merge_once(s, &lookup)).collect();
        set.passes.push(pass);
    }
    (corpus, set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn npmi_perfect_cooccurrence_is_one() {
        assert!((npmi_from_counts(4, 4, 4, 8) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn npmi_independence_is_zero() {
        assert!(npmi_from_counts(2, 4, 4, 8).abs() < 1e-12);
    }

    #[test]
    fn npmi_rare_pair_of_common_tokens_is_negative_half() {
        let v = npmi_from_counts(1, 8, 8, 16);
        assert!((v - (-0.5)).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn npmi_single_repeated_bigram_is_one_by_continuity() {
        assert_eq!(npmi_from_counts(10, 10, 10, 10), 1.0);
    }

    #[test]
    fn heart_attack_merges() {
        let corpus: Vec<Vec<String>> = (0..10).map(|_| toks("heart attack")).collect();
        let (merged, set) = detect_and_merge_collocations(corpus, 0.5, 5, 1);
        for stream in &merged {
            assert_eq!(stream, &toks("heart_attack"));
        }
        let pairs: Vec<_> = set.selected_pairs().collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].x, "heart");
        assert_eq!(pairs[0].y, "attack");
    }

    #[test]
    fn threshold_one_blocks_imperfect_pairs() {
        let mut corpus: Vec<Vec<String>> = (0..10).map(|_| toks("heart attack")).collect();
        corpus.push(toks("heart rate"));
        let (merged, set) = detect_and_merge_collocations(corpus.clone(), 1.0, 5, 1);
        assert!(set.is_empty());
        assert_eq!(merged, corpus);
    }

    #[test]
    fn greedy_merge_is_left_to_right_non_overlapping() {
        let corpus: Vec<Vec<String>> = (0..10).map(|_| toks("a b b a")).collect();
        // (a,b), (b,b) and (b,a) are all perfectly associated here; force all
        // selected and check the greedy scan.
        let (merged, set) = detect_and_merge_collocations(corpus, -0.999, 1, 1);
        let chosen: Vec<(String, String)> = set
            .selected_pairs()
            .map(|p| (p.x.clone(), p.y.clone()))
            .collect();
        assert!(chosen.contains(&("a".into(), "b".into())));
        assert!(chosen.contains(&("b".into(), "b".into())));
        assert!(chosen.contains(&("b".into(), "a".into())));
        for stream in &merged {
            assert_eq!(stream, &toks("a_b b_a"));
        }
    }

    #[test]
    fn detection_is_deterministic() {
        let corpus: Vec<Vec<String>> = vec![
            toks("heart attack noted today"),
            toks("heart attack ruled in"),
            toks("heart attack again heart attack"),
            toks("no heart attack"),
            toks("heart attack"),
        ];
        let (m1, s1) = detect_and_merge_collocations(corpus.clone(), 0.3, 2, 2);
        let (m2, s2) = detect_and_merge_collocations(corpus, 0.3, 2, 2);
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn tsv_round_trip() {
        let corpus: Vec<Vec<String>> = (0..6).map(|_| toks("heart attack")).collect();
        let (_, set) = detect_and_merge_collocations(corpus, 0.5, 5, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("colloc.tsv");
        set.write_tsv(&path).unwrap();
        let back = CollocationSet::read_tsv(&path).unwrap();
        assert_eq!(back.passes.len(), set.passes.len());
        assert_eq!(back.passes[0].pairs[0].x, "heart");
        assert_eq!(back.passes[0].pairs[0].count, 6);
    }
}
