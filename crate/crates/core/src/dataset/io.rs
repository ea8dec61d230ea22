use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Columns of the public Criteo uplift file that are never used as features.
const AUXILIARY_COLUMNS: &[&str] = &["treatment", "conversion", "visit", "exposure"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureColumns {
    /// Every header column except the treatment, outcome and Criteo auxiliary columns.
    Infer,
    Named(Vec<String>),
}

/// Column-name mapping for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: FeatureColumns,
    pub treatment: String,
    pub outcome: String,
}

impl Schema {
    /// `f0`..`f11`, `treatment`, `conversion`.
    pub fn criteo() -> Self {
        Schema {
            features: FeatureColumns::Named((0..12).map(|i| format!("f{i}")).collect()),
            treatment: "treatment".into(),
            outcome: "conversion".into(),
        }
    }

    pub fn inferred() -> Self {
        Schema {
            features: FeatureColumns::Infer,
            treatment: "treatment".into(),
            outcome: "conversion".into(),
        }
    }

    /// Feature columns, plus treatment and outcome columns when `labels` is set.
    fn resolve(&self, header: &[String], labels: bool) -> Result<(Vec<usize>, Option<(usize, usize)>)> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let label_cols = if labels { Some((find(&self.treatment)?, find(&self.outcome)?)) } else { None };
        let features = match &self.features {
            FeatureColumns::Named(names) => names.iter().map(|n| find(n)).collect::<Result<Vec<_>>>()?,
            FeatureColumns::Infer => (0..header.len())
                .filter(|&i| {
                    let h = header[i].as_str();
                    h != self.treatment && h != self.outcome && !AUXILIARY_COLUMNS.contains(&h)
                })
                .collect(),
        };
        if features.is_empty() {
            return Err(Error::InvalidData("schema selects no feature columns".into()));
        }
        Ok((features, label_cols))
    }
}

impl Default for Schema {
    fn default() -> Self {
        Schema::criteo()
    }
}

fn parse_flag(cell: &str, row: usize, column: &str) -> Result<bool> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v == 0.0 => Ok(false),
        Ok(v) if v == 1.0 => Ok(true),
        _ => Err(Error::Cell {
            row,
            column: column.to_string(),
            reason: format!("expected 0 or 1, got `{cell}`"),
        }),
    }
}

type Labels = (Vec<bool>, Vec<bool>);

fn read(path: &Path, schema: &Schema, labels: bool) -> Result<(Matrix, Option<Labels>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let csv_err = |e: csv::Error| Error::Csv { path: path.to_path_buf(), reason: e.to_string() };

    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    let (feature_cols, label_cols) = schema.resolve(&header, labels)?;

    let mut data = Vec::new();
    let mut treatment = Vec::new();
    let mut outcome = Vec::new();
    let mut n_rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::Cell {
                row,
                column: header[c].clone(),
                reason: format!("not a number: `{cell}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell { row, column: header[c].clone(), reason: format!("non-finite value `{cell}`") });
            }
            data.push(v);
        }
        if let Some((t, y)) = label_cols {
            treatment.push(parse_flag(record.get(t).unwrap_or(""), row, &header[t])?);
            outcome.push(parse_flag(record.get(y).unwrap_or(""), row, &header[y])?);
        }
        n_rows += 1;
    }
    let features = Matrix::new(n_rows, feature_cols.len(), data)?;
    Ok((features, label_cols.map(|_| (treatment, outcome))))
}

/// Load a comma-separated file with a header row. Rows keep file order; `row`
/// in cell errors is the 1-based data-row number.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let (features, labels) = read(path.as_ref(), schema, true)?;
    let (treatment, outcome) = labels.expect("labels requested");
    Dataset::new(features, treatment, outcome)
}

/// Feature columns only; treatment and outcome columns may be absent.
pub fn load_features(path: impl AsRef<Path>, schema: &Schema) -> Result<Matrix> {
    Ok(read(path.as_ref(), schema, false)?.0)
}

/// Write `f0..f{d-1},treatment,conversion`. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut header: Vec<String> = (0..ds.n_features()).map(|j| format!("f{j}")).collect();
    header.push("treatment".into());
    header.push("conversion".into());
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for i in 0..ds.n_rows() {
        let mut line = String::new();
        for v in ds.features().row(i) {
            line.push_str(&format!("{v:?},"));
        }
        line.push_str(if ds.treatment()[i] { "1," } else { "0," });
        line.push_str(if ds.outcome()[i] { "1" } else { "0" });
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}
