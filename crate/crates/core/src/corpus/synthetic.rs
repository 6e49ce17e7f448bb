//! Deterministic synthetic corpus generator, a stand-in for the restricted
//! clinical dataset. Documents carry de-identification markers, digits, and
//! punctuation so the cleaning stage has real work to do; signal terms are
//! spread across note categories so category ablations change the outcome.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_notesets, stream_rng, streams, NoteRecord, Noteset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub n_positive: usize,
    pub n_negative: usize,
    pub signal_terms: Vec<String>,
    pub distractor_terms: Vec<String>,
    /// Fraction of signal-term mentions in negative documents that appear
    /// inside a negation context ("no X", "rule out X").
    pub negation_rate: f64,
    /// Fraction of labels flipped after generation (exact count, seeded).
    pub label_noise_rate: f64,
    /// Mean token count of a whole noteset (split over its notes).
    pub mean_doc_length: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_positive: 100,
            n_negative: 150,
            signal_terms: DEFAULT_SIGNAL.iter().map(|s| s.to_string()).collect(),
            distractor_terms: DEFAULT_DISTRACTORS.iter().map(|s| s.to_string()).collect(),
            negation_rate: 0.3,
            label_noise_rate: 0.0,
            mean_doc_length: 120,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("negation_rate", self.negation_rate),
            ("label_noise_rate", self.label_noise_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be in [0, 1], got {rate}"
                )));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_SIGNAL: &[&str] = &[
    "jaundice",
    "bilirubin",
    "phototherapy",
    "icterus",
    "kernicterus",
    "hemolysis",
    "coombs",
    "unconjugated",
    "sclerae",
    "isoimmunization",
];

pub const DEFAULT_DISTRACTORS: &[&str] = &[
    "respiratory",
    "cardiac",
    "apnea",
    "bradycardia",
    "sepsis",
    "antibiotics",
    "ventilator",
    "oxygen",
    "saturation",
    "glucose",
    "feeding",
    "formula",
    "gavage",
    "incubator",
    "caffeine",
    "surfactant",
    "murmur",
    "abdomen",
    "culture",
    "electrolytes",
];

// Background vocabulary; deliberately avoids negation cues and the patterns
// in the default rule file.
const FILLER: &[&str] = &[
    "the", "and", "patient", "infant", "baby", "is", "was", "with", "for", "on", "in", "this",
    "day", "today", "overnight", "care", "plan", "continues", "stable", "well", "noted", "exam",
    "skin", "warm", "dry", "active", "alert", "tone", "good", "monitor", "continue", "assess",
    "team", "family", "mother", "father", "parents", "update", "events", "tolerating", "voiding",
    "stooling", "adequate", "intake", "output", "goal", "current", "status", "remains", "room",
    "air", "rate", "breath", "sounds", "clear", "equal", "soft", "nontender", "bowel", "present",
    "extremities", "moving", "all", "fontanelle", "flat", "sutures", "approximated", "weight",
    "gain", "appropriate", "age", "sleeping", "between", "cares", "wakes", "feeds", "nipple",
    "bottle", "breast", "latch", "supports", "social", "work", "involved", "discharge", "planning",
    "follow", "clinic", "appointment", "scheduled", "immunizations", "given", "screen", "passed",
    "hearing", "state", "swaddled", "labs", "pending", "results", "reviewed", "orders", "written",
    "note", "addendum", "seen", "examined", "agree", "above", "assessment", "rounds", "attending",
    "resident", "covering", "service", "signed", "temp", "axillary", "heart", "regular", "rhythm",
];

const DEID_MARKERS: &[&str] = &[
    "[**2101-1-5**]",
    "[**Name (NI) 123**]",
    "[**Hospital1 18**]",
    "[**MD Number(1) 456**]",
    "[**Telephone/Fax (1) 789**]",
];

const NEGATION_CUES: &[&[&str]] = &[&["no"], &["rule", "out"], &["no", "evidence", "of"]];

const CATEGORIES: &[&str] = &["Nursing", "Physician", "Discharge summary"];
// Where a planted mention lands: cumulative weights over CATEGORIES.
const CATEGORY_CDF: &[f64] = &[0.40, 0.75, 1.0];

fn pick_category(rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    CATEGORY_CDF.iter().position(|&c| u < c).unwrap_or(2)
}

fn filler_token(rng: &mut impl Rng) -> String {
    // head-heavy: half the draws come from the first 20 words
    if rng.random::<f64>() < 0.5 {
        FILLER[rng.random_range(0..20)].to_string()
    } else {
        FILLER[rng.random_range(20..FILLER.len())].to_string()
    }
}

fn base_note_tokens(rng: &mut impl Rng, len: usize) -> Vec<String> {
    let mut tokens = Vec::with_capacity(len + 8);
    for _ in 0..len {
        let roll: f64 = rng.random();
        if roll < 0.04 {
            tokens.push(format!(
                "{}.{}",
                rng.random_range(0..40),
                rng.random_range(0..10)
            ));
        } else if roll < 0.06 {
            tokens.push(DEID_MARKERS[rng.random_range(0..DEID_MARKERS.len())].to_string());
        } else {
            let mut tok = filler_token(rng);
            let punct: f64 = rng.random();
            if punct < 0.10 {
                tok.push('.');
            } else if punct < 0.16 {
                tok.push(',');
            }
            tokens.push(tok);
        }
    }
    tokens
}

fn insert_run(rng: &mut impl Rng, note: &mut Vec<String>, run: &[&str]) {
    let at = rng.random_range(0..=note.len());
    for (i, tok) in run.iter().enumerate() {
        note.insert(at + i, tok.to_string());
    }
}

/// Generate per-note records plus the (noise-flipped) label map. Pure
/// function of the config; a fixed seed reproduces the corpus byte for byte.
pub fn generate_synthetic_records(
    config: &SyntheticConfig,
) -> Result<(Vec<NoteRecord>, BTreeMap<String, bool>)> {
    config.validate()?;
    let n = config.n_positive + config.n_negative;
    let mut rng = stream_rng(config.seed, streams::SYNTHETIC);

    let mut records = Vec::with_capacity(n * CATEGORIES.len());
    let mut labels = BTreeMap::new();
    let per_note = (config.mean_doc_length / CATEGORIES.len()).max(8);

    for doc in 0..n {
        let truly_positive = doc < config.n_positive;
        let admission_id = format!("synth-{doc:05}");

        let mut notes: Vec<Vec<String>> = (0..CATEGORIES.len())
            .map(|_| {
                let jitter = 0.75 + 0.5 * rng.random::<f64>();
                let len = ((per_note as f64) * jitter).round().max(6.0) as usize;
                base_note_tokens(&mut rng, len)
            })
            .collect();

        for term in &config.signal_terms {
            if truly_positive {
                if rng.random::<f64>() < 0.8 {
                    let mentions = if rng.random::<f64>() < 0.35 { 2 } else { 1 };
                    for _ in 0..mentions {
                        let note = pick_category(&mut rng);
                        insert_run(&mut rng, &mut notes[note], &[term.as_str()]);
                    }
                }
            } else if rng.random::<f64>() < 0.06 {
                let note = pick_category(&mut rng);
                if rng.random::<f64>() < config.negation_rate {
                    let cue = NEGATION_CUES[rng.random_range(0..NEGATION_CUES.len())];
                    let mut run: Vec<&str> = cue.to_vec();
                    run.push(term.as_str());
                    insert_run(&mut rng, &mut notes[note], &run);
                } else {
                    insert_run(&mut rng, &mut notes[note], &[term.as_str()]);
                }
            }
        }

        for term in &config.distractor_terms {
            if rng.random::<f64>() < 0.3 {
                let mentions = if rng.random::<f64>() < 0.3 { 2 } else { 1 };
                for _ in 0..mentions {
                    let note = pick_category(&mut rng);
                    insert_run(&mut rng, &mut notes[note], &[term.as_str()]);
                }
            }
        }

        for (order, (category, tokens)) in CATEGORIES.iter().zip(notes).enumerate() {
            records.push(NoteRecord {
                admission_id: admission_id.clone(),
                category: category.to_string(),
                text: tokens.join(" "),
                chart_order: order as i64,
            });
        }
        labels.insert(admission_id, truly_positive);
    }

    // Flip an exact, seeded fraction of labels.
    let flips = ((config.label_noise_rate * n as f64).round() as usize).min(n);
    if flips > 0 {
        let mut ids: Vec<String> = (0..n).map(|d| format!("synth-{d:05}")).collect();
        ids.shuffle(&mut rng);
        for id in ids.into_iter().take(flips) {
            let entry = labels.get_mut(&id).unwrap();
            *entry = !*entry;
        }
    }

    Ok((records, labels))
}

/// Generate complete notesets (all categories concatenated).
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Vec<Noteset>> {
    let (records, labels) = generate_synthetic_records(config)?;
    build_notesets(&records, &labels, None)
}
