//! Hillstrom e-mail dataset ingestion: maps the public CSV schema to
//! labeled examples with one-hot encoded categoricals and min-max scaled
//! numerics. One e-mail arm is kept as the treated group, "No E-Mail" is
//! the control, and the other e-mail arm is dropped.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{ContextPoint, Outcome, Treatment};
use crate::uplift_baseline::LabeledExample;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column '{0}'")]
    MissingColumn(String),
    #[error("row {row}: unknown segment literal '{value}'")]
    UnknownSegment { row: usize, value: String },
    #[error("row {row}: cannot parse '{value}' in column '{column}' as a number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("no rows left after arm filtering")]
    EmptyAfterFilter,
}

/// Which response column to model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseField {
    Visit,
    Conversion,
}

/// Which e-mail campaign counts as the treated arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreatmentArm {
    Mens,
    Womens,
}

impl TreatmentArm {
    fn segment_literal(self) -> &'static str {
        match self {
            TreatmentArm::Mens => "Mens E-Mail",
            TreatmentArm::Womens => "Womens E-Mail",
        }
    }
}

const CONTROL_SEGMENT: &str = "No E-Mail";
const SEGMENTS: [&str; 3] = ["Mens E-Mail", "Womens E-Mail", CONTROL_SEGMENT];

const NUMERIC_COLUMNS: [&str; 5] = ["recency", "history", "mens", "womens", "newbie"];
const CATEGORICAL_COLUMNS: [&str; 3] = ["history_segment", "zip_code", "channel"];

/// Deterministic description of the encoded feature space: column names
/// in output order plus the min/max used for scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMetadata {
    pub columns: Vec<String>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub rows_kept: usize,
    pub rows_dropped: usize,
}

struct RawRow {
    numerics: Vec<f64>,
    categoricals: Vec<String>,
    arm: Treatment,
    responded: bool,
}

/// Load the Hillstrom CSV. Feature order: the five numeric columns in
/// schema order, then one-hot blocks for history_segment, zip_code and
/// channel with categories sorted lexicographically. Numerics are min-max
/// scaled to [0, 1] over the kept rows.
pub fn load_hillstrom(
    path: &Path,
    response: ResponseField,
    treatment_arm: TreatmentArm,
) -> Result<(Vec<LabeledExample>, FeatureMetadata), IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);

    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let numeric_idx: Vec<usize> = NUMERIC_COLUMNS
        .iter()
        .map(|c| find(c))
        .collect::<Result<_, _>>()?;
    let categorical_idx: Vec<usize> = CATEGORICAL_COLUMNS
        .iter()
        .map(|c| find(c))
        .collect::<Result<_, _>>()?;
    let segment_idx = find("segment")?;
    let response_idx = match response {
        ResponseField::Visit => find("visit")?,
        ResponseField::Conversion => find("conversion")?,
    };

    let treated_segment = treatment_arm.segment_literal();
    let mut raw_rows = Vec::new();
    let mut dropped = 0usize;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1; // 1-based data row for error messages
        let record = record?;
        let segment = record[segment_idx].trim().to_string();
        if !SEGMENTS.contains(&segment.as_str()) {
            return Err(IngestError::UnknownSegment {
                row,
                value: segment,
            });
        }
        let arm = if segment == treated_segment {
            Treatment::Treated
        } else if segment == CONTROL_SEGMENT {
            Treatment::Control
        } else {
            dropped += 1;
            continue;
        };
        let parse = |idx: usize, column: &str| -> Result<f64, IngestError> {
            let value = record[idx].trim();
            value.parse::<f64>().map_err(|_| IngestError::BadNumber {
                row,
                column: column.to_string(),
                value: value.to_string(),
            })
        };
        let numerics: Vec<f64> = numeric_idx
            .iter()
            .zip(NUMERIC_COLUMNS)
            .map(|(&idx, col)| parse(idx, col))
            .collect::<Result<_, _>>()?;
        let responded = parse(
            response_idx,
            match response {
                ResponseField::Visit => "visit",
                ResponseField::Conversion => "conversion",
            },
        )? != 0.0;
        let categoricals: Vec<String> = categorical_idx
            .iter()
            .map(|&idx| record[idx].trim().to_string())
            .collect();
        raw_rows.push(RawRow {
            numerics,
            categoricals,
            arm,
            responded,
        });
    }
    if raw_rows.is_empty() {
        return Err(IngestError::EmptyAfterFilter);
    }

    // categories observed over the kept rows, sorted for determinism
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); CATEGORICAL_COLUMNS.len()];
    for row in &raw_rows {
        for (slot, value) in categories.iter_mut().zip(&row.categoricals) {
            if !slot.contains(value) {
                slot.push(value.clone());
            }
        }
    }
    for slot in &mut categories {
        slot.sort();
    }

    let mut columns: Vec<String> = NUMERIC_COLUMNS.iter().map(|s| s.to_string()).collect();
    for (name, cats) in CATEGORICAL_COLUMNS.iter().zip(&categories) {
        for cat in cats {
            columns.push(format!("{name}={cat}"));
        }
    }

    let dim = columns.len();
    let mut features: Vec<Vec<f64>> = raw_rows
        .iter()
        .map(|row| {
            let mut v = Vec::with_capacity(dim);
            v.extend_from_slice(&row.numerics);
            for (cats, value) in categories.iter().zip(&row.categoricals) {
                for cat in cats {
                    v.push(if cat == value { 1.0 } else { 0.0 });
                }
            }
            v
        })
        .collect();

    let mut mins = vec![f64::INFINITY; dim];
    let mut maxs = vec![f64::NEG_INFINITY; dim];
    for v in &features {
        for (j, &value) in v.iter().enumerate() {
            mins[j] = mins[j].min(value);
            maxs[j] = maxs[j].max(value);
        }
    }
    for v in &mut features {
        for (j, value) in v.iter_mut().enumerate() {
            let span = maxs[j] - mins[j];
            *value = if span > 0.0 {
                (*value - mins[j]) / span
            } else {
                0.0
            };
        }
    }

    let examples = raw_rows
        .iter()
        .zip(features)
        .map(|(row, v)| LabeledExample {
            x: ContextPoint::new(v),
            arm: row.arm,
            y: Outcome {
                responded: row.responded,
            },
        })
        .collect();
    let metadata = FeatureMetadata {
        columns,
        mins,
        maxs,
        rows_kept: raw_rows.len(),
        rows_dropped: dropped,
    };
    Ok((examples, metadata))
}
