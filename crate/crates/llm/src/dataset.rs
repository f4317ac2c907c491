//! Disease/symptom CSV ingestion.
//!
//! Expected layout: a header row, then one row per case with the disease in
//! the first column and symptoms in the remaining columns. Blank symptom
//! cells are allowed, and rows may have different lengths.

use std::collections::HashSet;
use std::path::Path;

use llmshap_core::{Feature, FeatureId, FeatureSet};

use crate::error::DatasetError;

#[derive(Clone, Debug)]
pub struct Instance {
    /// 1-based line number in the source file.
    pub line: usize,
    pub label: String,
    pub features: FeatureSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub skipped: Vec<SkippedRow>,
}

pub fn ingest_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path)?;
    ingest_reader(file, &display)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, name: &str) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut instances = Vec::new();
    let mut skipped = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = row
            .as_ref()
            .ok()
            .and_then(|r| r.position())
            .map_or(i + 2, |p| p.line() as usize);
        let row = match row {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                return Err(DatasetError::Csv {
                    path: name.to_string(),
                    source: e,
                })
            }
            Err(e) => {
                log::warn!("{name}:{line}: skipping malformed row: {e}");
                skipped.push(SkippedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let label = row.get(0).unwrap_or("").to_string();
        if label.is_empty() {
            log::warn!("{name}:{line}: skipping row without a disease label");
            skipped.push(SkippedRow {
                line,
                reason: "missing disease label".into(),
            });
            continue;
        }
        let mut seen = HashSet::new();
        let mut features = Vec::new();
        for cell in row.iter().skip(1).filter(|c| !c.is_empty()) {
            if !seen.insert(cell) {
                log::warn!("{name}:{line}: dropping repeated symptom {cell:?}");
                continue;
            }
            features.push(Feature::labelled(features.len() as FeatureId, cell));
        }
        if features.is_empty() {
            log::warn!("{name}:{line}: skipping row without symptoms");
            skipped.push(SkippedRow {
                line,
                reason: "no symptoms".into(),
            });
            continue;
        }
        let features = FeatureSet::new(features).expect("ids and labels are unique by construction");
        instances.push(Instance { line, label, features });
    }
    if instances.is_empty() {
        return Err(DatasetError::NoRows {
            path: name.to_string(),
            skipped: skipped.len(),
        });
    }
    Ok(Dataset { instances, skipped })
}
