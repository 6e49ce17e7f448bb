//! Admission-level noteset construction: labeling, concatenation, filtering,
//! deterministic splits, and the JSONL interchange format.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod mimic;
pub mod synthetic;

pub use synthetic::{generate_synthetic, generate_synthetic_records, SyntheticConfig};

/// One clinical note, keyed by hospitalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoteRecord {
    pub admission_id: String,
    pub category: String,
    pub text: String,
    pub chart_order: i64,
}

/// All note text for one hospitalization, concatenated in chart order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Noteset {
    pub admission_id: String,
    pub text: String,
    pub label: bool,
}

/// A set of ICD-9 codes, normalized (dots stripped, uppercased).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcdCodeSet {
    codes: std::collections::BTreeSet<String>,
}

impl IcdCodeSet {
    pub fn new<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            codes: codes
                .into_iter()
                .map(|c| Self::normalize(c.as_ref()))
                .filter(|c| !c.is_empty())
                .collect(),
        }
    }

    /// Strip dots and uppercase: "774.6" and "7746" are the same code.
    pub fn normalize(code: &str) -> String {
        code.trim()
            .chars()
            .filter(|c| *c != '.')
            .map(|c| c.to_ascii_uppercase())
            .collect()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.codes.contains(&Self::normalize(code))
    }

    pub fn intersects(&self, other: &IcdCodeSet) -> bool {
        self.codes.iter().any(|c| other.codes.contains(c))
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.codes.iter()
    }

    /// The neonatal-jaundice code set this project ships by default.
    /// 773.x hemolytic disease plus the 774.x jaundice family.
    pub fn default_jaundice() -> Self {
        Self::new([
            "7730", "7731", "7732", "7741", "7742", "77430", "77431", "77439", "7746",
        ])
    }

    /// One code per line, '#' comments allowed.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }
}

/// True when the admission carries at least one code from the target set.
pub fn label_admission(codes: &IcdCodeSet, jaundice_codes: &IcdCodeSet) -> bool {
    codes.intersects(jaundice_codes)
}

/// Concatenate each admission's notes (in chart order, input order as
/// tiebreak) into one noteset. `category_filter` keeps only matching note
/// categories; admissions with no surviving notes are dropped. Every
/// admission present in `records` must have a label.
pub fn build_notesets(
    records: &[NoteRecord],
    labels: &BTreeMap<String, bool>,
    category_filter: Option<&std::collections::BTreeSet<String>>,
) -> Result<Vec<Noteset>> {
    let mut grouped: BTreeMap<&str, Vec<(i64, usize)>> = BTreeMap::new();
    for (pos, rec) in records.iter().enumerate() {
        if let Some(filter) = category_filter {
            if !filter.contains(&rec.category) {
                continue;
            }
        }
        grouped
            .entry(rec.admission_id.as_str())
            .or_default()
            .push((rec.chart_order, pos));
    }

    let mut out = Vec::with_capacity(grouped.len());
    for (admission_id, mut entries) in grouped {
        let label = *labels
            .get(admission_id)
            .ok_or_else(|| Error::MissingLabel(admission_id.to_string()))?;
        entries.sort_by_key(|&(order, pos)| (order, pos));
        let text = entries
            .iter()
            .map(|&(_, pos)| records[pos].text.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        out.push(Noteset {
            admission_id: admission_id.to_string(),
            text,
            label,
        });
    }
    Ok(out)
}

/// Fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitPlan {
    pub assignments: BTreeMap<String, usize>,
    pub k: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn fold_of(&self, admission_id: &str) -> Option<usize> {
        self.assignments.get(admission_id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded uniform shuffle followed by round-robin assignment; fold sizes
/// differ by at most one.
pub fn split_kfold(notesets: &[Noteset], k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be >= 2, got {k}")));
    }
    if notesets.len() < k {
        return Err(Error::TooFewItems {
            needed: k,
            got: notesets.len(),
        });
    }
    let mut order: Vec<usize> = (0..notesets.len()).collect();
    let mut rng = stream_rng(seed, streams::SPLIT);
    order.shuffle(&mut rng);
    let assignments = order
        .iter()
        .enumerate()
        .map(|(i, &idx)| (notesets[idx].admission_id.clone(), i % k))
        .collect();
    Ok(SplitPlan {
        assignments,
        k,
        seed,
    })
}

/// Seeded holdout split; `test_fraction` of the corpus (rounded) becomes the
/// test set.
pub fn split_holdout(
    notesets: &[Noteset],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<Noteset>, Vec<Noteset>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidConfig(format!(
            "test fraction must be in [0, 1), got {test_fraction}"
        )));
    }
    let n_test = ((notesets.len() as f64) * test_fraction).round() as usize;
    let mut order: Vec<usize> = (0..notesets.len()).collect();
    let mut rng = stream_rng(seed, streams::HOLDOUT);
    order.shuffle(&mut rng);
    let mut test = Vec::with_capacity(n_test);
    let mut train = Vec::with_capacity(notesets.len() - n_test);
    for (i, &idx) in order.iter().enumerate() {
        if i < n_test {
            test.push(notesets[idx].clone());
        } else {
            train.push(notesets[idx].clone());
        }
    }
    Ok((train, test))
}

/// Read notesets from JSONL: one `{"admission_id", "text", "label"}` object
/// per line.
pub fn read_notesets_jsonl(path: impl AsRef<Path>) -> Result<Vec<Noteset>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let noteset: Noteset = serde_json::from_str(&line).map_err(|e| Error::BadRow {
            row: i + 1,
            message: e.to_string(),
        })?;
        out.push(noteset);
    }
    Ok(out)
}

pub fn write_notesets_jsonl(path: impl AsRef<Path>, notesets: &[Noteset]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for ns in notesets {
        serde_json::to_writer(&mut file, ns)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

/// Named RNG streams so each consumer of a run seed draws independently.
pub(crate) mod streams {
    pub const SPLIT: u64 = 1;
    pub const HOLDOUT: u64 = 2;
    pub const SYNTHETIC: u64 = 3;
    pub const BAGGING_BASE: u64 = 1000;
    pub const LINEAR: u64 = 4;
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.into());
    rng
}
