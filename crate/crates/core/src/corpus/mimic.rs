//! Loader for MIMIC-style CSV exports: a note events table (HADM_ID,
//! CATEGORY, TEXT) and a diagnoses table (HADM_ID, ICD9_CODE). Multi-line
//! quoted text fields are handled per the CSV standard.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{build_notesets, label_admission, IcdCodeSet, NoteRecord, Noteset};
use crate::error::{Error, Result};

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn optional_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

/// Read the note events table. CHART_ORDER is used when present, then
/// ROW_ID; otherwise notes keep their file order.
pub fn read_noteevents(path: impl AsRef<Path>) -> Result<Vec<NoteRecord>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();
    let hadm = column_index(&headers, "HADM_ID")?;
    let category = column_index(&headers, "CATEGORY")?;
    let text = column_index(&headers, "TEXT")?;
    let order_col = optional_column(&headers, "CHART_ORDER")
        .or_else(|| optional_column(&headers, "ROW_ID"));

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2; // 1-based, after header
        let admission_id = row
            .get(hadm)
            .ok_or_else(|| Error::BadRow {
                row: line,
                message: "missing HADM_ID field".into(),
            })?
            .trim()
            .to_string();
        if admission_id.is_empty() {
            return Err(Error::BadRow {
                row: line,
                message: "empty HADM_ID".into(),
            });
        }
        let chart_order = match order_col {
            Some(col) => {
                let raw = row.get(col).unwrap_or("").trim();
                raw.parse::<i64>().map_err(|_| Error::BadRow {
                    row: line,
                    message: format!("ordering column is not an integer: {raw:?}"),
                })?
            }
            None => i as i64,
        };
        records.push(NoteRecord {
            admission_id,
            category: row.get(category).unwrap_or("").trim().to_string(),
            text: row.get(text).unwrap_or("").to_string(),
            chart_order,
        });
    }
    Ok(records)
}

/// Read the diagnoses table into per-admission code sets.
pub fn read_diagnoses(path: impl AsRef<Path>) -> Result<BTreeMap<String, IcdCodeSet>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let hadm = column_index(&headers, "HADM_ID")?;
    let code = column_index(&headers, "ICD9_CODE")?;

    let mut by_admission: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let admission_id = row.get(hadm).unwrap_or("").trim().to_string();
        if admission_id.is_empty() {
            return Err(Error::BadRow {
                row: line,
                message: "empty HADM_ID".into(),
            });
        }
        by_admission
            .entry(admission_id)
            .or_default()
            .push(row.get(code).unwrap_or("").to_string());
    }
    Ok(by_admission
        .into_iter()
        .map(|(id, codes)| (id, IcdCodeSet::new(codes)))
        .collect())
}

/// Load notesets from the two CSVs: parse, label each admission by code
/// intersection, and concatenate notes. Admissions with notes but no
/// diagnosis rows get an empty code set (negative label).
pub fn load_mimic_csv(
    noteevents_path: impl AsRef<Path>,
    diagnoses_path: impl AsRef<Path>,
    jaundice_codes: &IcdCodeSet,
    category_filter: Option<&std::collections::BTreeSet<String>>,
) -> Result<Vec<Noteset>> {
    let records = read_noteevents(noteevents_path)?;
    let diagnoses = read_diagnoses(diagnoses_path)?;
    let empty = IcdCodeSet::new::<[&str; 0], _>([]);
    let labels: BTreeMap<String, bool> = records
        .iter()
        .map(|r| {
            let codes = diagnoses.get(&r.admission_id).unwrap_or(&empty);
            (
                r.admission_id.clone(),
                label_admission(codes, jaundice_codes),
            )
        })
        .collect();
    build_notesets(&records, &labels, category_filter)
}
