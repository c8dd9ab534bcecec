//! CSV ingestion and export.
//!
//! Loading infers the schema from a column-type declaration: the label
//! column, an optional list of categorical columns, and everything else
//! numeric. Categorical enumerations and the class list are built from the
//! observed values, sorted for run-to-run stability.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use crate::dataset::{Dataset, FeatureDef, FeatureKind, Schema, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvSchemaConfig {
    pub label_column: String,
    /// Feature columns to treat as categorical; all others parse as f64.
    pub categorical: Vec<String>,
}

impl CsvSchemaConfig {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvSchemaConfig {
            label_column: label_column.into(),
            categorical: Vec::new(),
        }
    }
}

fn data_error(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Data {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|c| c.to_string()).collect());
    }
    Ok((header, rows))
}

/// Loads a CSV with a header row, building the schema from the observed
/// values. Cell errors carry their row (1-based, excluding the header) and
/// column name.
pub fn load_csv(path: impl AsRef<Path>, config: &CsvSchemaConfig) -> Result<Dataset> {
    let path = path.as_ref();
    let (header, records) = read_records(path)?;
    let label_col = header
        .iter()
        .position(|h| *h == config.label_column)
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "label column {} not found in {}",
                config.label_column,
                path.display()
            ))
        })?;
    for cat in &config.categorical {
        if !header.iter().any(|h| h == cat) {
            return Err(Error::InvalidConfig(format!(
                "categorical column {cat} not found in {}",
                path.display()
            )));
        }
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_col).collect();
    let is_categorical: Vec<bool> = feature_cols
        .iter()
        .map(|&c| config.categorical.iter().any(|name| *name == header[c]))
        .collect();

    // First pass: collect enumerations and the class list.
    let mut classes: BTreeSet<String> = BTreeSet::new();
    let mut enums: Vec<BTreeSet<String>> = vec![BTreeSet::new(); feature_cols.len()];
    for record in &records {
        classes.insert(record[label_col].clone());
        for (f, &c) in feature_cols.iter().enumerate() {
            if is_categorical[f] {
                enums[f].insert(record[c].clone());
            }
        }
    }
    let classes: Vec<String> = classes.into_iter().collect();
    let enums: Vec<Vec<String>> = enums.into_iter().map(|s| s.into_iter().collect()).collect();

    let features = feature_cols
        .iter()
        .enumerate()
        .map(|(f, &c)| FeatureDef {
            name: header[c].clone(),
            kind: if is_categorical[f] {
                FeatureKind::Categorical {
                    values: enums[f].clone(),
                }
            } else {
                FeatureKind::Numeric
            },
        })
        .collect();
    let schema = Schema::new(features, classes)?;
    parse_rows(&schema, &header, &records, label_col, &feature_cols)
}

/// Loads a CSV against an existing schema (typically a model's): columns
/// are located by name, categorical values and labels must already be in
/// the schema's enumerations.
pub fn load_csv_with_schema(
    path: impl AsRef<Path>,
    schema: &Arc<Schema>,
    label_column: &str,
) -> Result<Dataset> {
    let path = path.as_ref();
    let (header, records) = read_records(path)?;
    let label_col = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "label column {label_column} not found in {}",
                path.display()
            ))
        })?;
    let feature_cols: Vec<usize> = schema
        .features
        .iter()
        .map(|f| {
            header.iter().position(|h| *h == f.name).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "feature column {} not found in {}",
                    f.name,
                    path.display()
                ))
            })
        })
        .collect::<Result<_>>()?;
    parse_rows(schema, &header, &records, label_col, &feature_cols)
}

fn parse_rows(
    schema: &Arc<Schema>,
    header: &[String],
    records: &[Vec<String>],
    label_col: usize,
    feature_cols: &[usize],
) -> Result<Dataset> {
    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (r, record) in records.iter().enumerate() {
        let row_no = r + 1;
        if record.len() != header.len() {
            return Err(data_error(
                row_no,
                "",
                format!("expected {} cells, got {}", header.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for (f, &c) in feature_cols.iter().enumerate() {
            let cell = &record[c];
            let value = match &schema.features[f].kind {
                FeatureKind::Numeric => {
                    let v: f64 = cell.parse().map_err(|_| {
                        data_error(row_no, &header[c], format!("cannot parse {cell:?} as number"))
                    })?;
                    Value::Num(v)
                }
                FeatureKind::Categorical { values } => {
                    let i = values.iter().position(|v| v == cell).ok_or_else(|| {
                        data_error(
                            row_no,
                            &header[c],
                            format!("value {cell:?} not in the feature's enumeration"),
                        )
                    })?;
                    Value::Cat(i as u32)
                }
            };
            row.push(value);
        }
        let label_cell = &record[label_col];
        let label = schema
            .classes
            .iter()
            .position(|c| c == label_cell)
            .ok_or_else(|| {
                data_error(
                    row_no,
                    &header[label_col],
                    format!("unknown label {label_cell:?}"),
                )
            })?;
        rows.push(row);
        labels.push(label);
    }
    Dataset::new(schema.clone(), rows, labels)
}

/// Writes a dataset as CSV: feature columns by schema name plus a final
/// `label` column holding class names.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let schema = ds.schema();
    let mut header: Vec<String> = schema.features.iter().map(|f| f.name.clone()).collect();
    header.push("label".to_string());
    writer.write_record(&header)?;
    for i in 0..ds.len() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for (f, def) in schema.features.iter().enumerate() {
            match (ds.value(i, f), &def.kind) {
                (Value::Num(v), _) => record.push(format_float(v)),
                (Value::Cat(c), FeatureKind::Categorical { values }) => {
                    record.push(values[c as usize].clone())
                }
                (Value::Cat(_), FeatureKind::Numeric) => unreachable!("validated dataset"),
            }
        }
        record.push(schema.classes[ds.label(i)].clone());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest representation that round-trips the f64 exactly.
fn format_float(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // `{}` on f64 already prints the shortest round-trip form.
    format!("{v}")
}

/// Writes a margin CDF table with the standard two-column header.
pub fn write_margin_cdf(cdf: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["margin", "cum_fraction"])?;
    for (m, f) in cdf {
        writer.write_record([format!("{m}"), format!("{f}")])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn numeric_round_trip_is_bit_exact() {
        let f = write_tmp("x,y,class\n0.1,2.5e-3,a\n-3.25,0.333333333333333314829616256247,b\n");
        let ds = load_csv(f.path(), &CsvSchemaConfig::new("class")).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.value(0, 0), Value::Num(0.1));
        assert_eq!(ds.value(1, 1), Value::Num(0.333333333333333314829616256247));
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, out.path()).unwrap();
        let mut cfg = CsvSchemaConfig::new("label");
        cfg.categorical = vec![];
        let ds2 = load_csv(out.path(), &cfg).unwrap();
        for i in 0..ds.len() {
            assert_eq!(ds.row(i), ds2.row(i));
        }
    }

    #[test]
    fn categorical_enumeration_from_observed_values() {
        let f = write_tmp("color,x,class\nred,1,a\ngreen,2,a\nblue,3,b\nred,4,b\n");
        let mut cfg = CsvSchemaConfig::new("class");
        cfg.categorical = vec!["color".into()];
        let ds = load_csv(f.path(), &cfg).unwrap();
        match &ds.schema().features[0].kind {
            FeatureKind::Categorical { values } => {
                assert_eq!(values, &["blue", "green", "red"]);
            }
            _ => panic!("expected categorical"),
        }
        assert_eq!(ds.schema().class_count(), 2);
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let f = write_tmp("x,y\n1,2\n");
        let err = load_csv(f.path(), &CsvSchemaConfig::new("class")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn unparseable_cell_reports_row_and_column() {
        let f = write_tmp("x,class\n1.0,a\npotato,a\n");
        let err = load_csv(f.path(), &CsvSchemaConfig::new("class")).unwrap_err();
        match err {
            Error::Data { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn schema_bound_load_rejects_unknown_label() {
        let f = write_tmp("x,class\n1.0,a\n2.0,b\n");
        let ds = load_csv(f.path(), &CsvSchemaConfig::new("class")).unwrap();
        let g = write_tmp("x,class\n1.0,c\n");
        let err = load_csv_with_schema(g.path(), ds.schema(), "class").unwrap_err();
        match err {
            Error::Data { row: 1, message, .. } => assert!(message.contains("unknown label")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
