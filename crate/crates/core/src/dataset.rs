//! Binary symptom matrices: schema, records, CSV ingestion and the built-in
//! ten-patient reference table.
//!
//! Record order is significant. Clustering seeds its segments from the first
//! `k` records, so every operation here preserves the order given.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors raised while building or parsing a dataset.
///
/// Row numbers are 1-based line numbers in the source text (the header is
/// row 1). Column numbers are 1-based field positions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("input is empty; expected a header row `id,<feature>,...`")]
    Empty,
    #[error("header must start with `id` followed by at least one feature (row 1)")]
    BadHeader,
    #[error("feature label at column {column} is empty")]
    EmptyFeature { column: usize },
    #[error("feature label `{label}` repeated at column {column}")]
    DuplicateFeature { label: String, column: usize },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: patient id is empty")]
    EmptyId { row: usize },
    #[error("row {row}: duplicate patient id `{id}`")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}, column {column} (`{feature}`): value `{value}` is not 0 or 1")]
    NonBinary {
        row: usize,
        column: usize,
        feature: String,
        value: String,
    },
    #[error("record `{id}` has {found} features, schema has {expected}")]
    ArityMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for DatasetError {
    fn from(e: csv::Error) -> Self {
        DatasetError::Csv(e.to_string())
    }
}

/// Ordered, unique feature labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn new<I, S>(names: I) -> Result<Self, DatasetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(DatasetError::BadHeader);
        }
        let mut seen = HashSet::new();
        for (i, name) in names.iter().enumerate() {
            // column 1 is the id column
            let column = i + 2;
            if name.is_empty() {
                return Err(DatasetError::EmptyFeature { column });
            }
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateFeature {
                    label: name.clone(),
                    column,
                });
            }
        }
        Ok(Self { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }
}

/// One patient: an identifier and a 0/1 symptom vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientRecord {
    pub id: String,
    pub features: Vec<u8>,
}

impl PatientRecord {
    pub fn new(id: impl Into<String>, features: Vec<u8>) -> Self {
        Self {
            id: id.into(),
            features,
        }
    }

    /// Features lifted into the scalar domain.
    pub fn to_point<T: Scalar>(&self) -> Vec<T> {
        self.features.iter().map(|&b| T::from_bit(b)).collect()
    }
}

/// An ordered collection of patient records over one schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<PatientRecord>,
}

impl Dataset {
    /// Builds a dataset, rejecting any record that breaks a type invariant.
    pub fn new(schema: FeatureSchema, records: Vec<PatientRecord>) -> Result<Self, DatasetError> {
        let dataset = Self::new_unchecked(schema, records);
        let mut seen = HashSet::new();
        for (i, record) in dataset.records.iter().enumerate() {
            let row = i + 2;
            if record.id.is_empty() {
                return Err(DatasetError::EmptyId { row });
            }
            if record.features.len() != dataset.schema.arity() {
                return Err(DatasetError::ArityMismatch {
                    id: record.id.clone(),
                    expected: dataset.schema.arity(),
                    found: record.features.len(),
                });
            }
            if let Some(pos) = record.features.iter().position(|&b| b > 1) {
                return Err(DatasetError::NonBinary {
                    row,
                    column: pos + 2,
                    feature: dataset.schema.names[pos].clone(),
                    value: record.features[pos].to_string(),
                });
            }
            if !seen.insert(record.id.as_str()) {
                return Err(DatasetError::DuplicateId {
                    row,
                    id: record.id.clone(),
                });
            }
        }
        Ok(dataset)
    }

    /// Builds a dataset without checking record invariants. Use
    /// [`validate`] to inspect the result.
    pub fn new_unchecked(schema: FeatureSchema, records: Vec<PatientRecord>) -> Self {
        Self { schema, records }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.schema.arity()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<&PatientRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// All records lifted into the scalar domain, in dataset order.
    pub fn points<T: Scalar>(&self) -> Vec<Vec<T>> {
        self.records.iter().map(PatientRecord::to_point).collect()
    }

    /// Serializes back to the CSV ingestion format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for name in &self.schema.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for record in &self.records {
            out.push_str(&record.id);
            for b in &record.features {
                out.push(',');
                out.push(if *b == 0 { '0' } else { '1' });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses `id,<feature1>,...,<featureM>` CSV text into a dataset.
///
/// Cells are trimmed. Blank lines are skipped. Missing values are errors.
pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    if text.trim().is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows = reader.records();
    let header = rows.next().ok_or(DatasetError::Empty)??;
    if header.len() < 2 || &header[0] != "id" {
        return Err(DatasetError::BadHeader);
    }
    let schema = FeatureSchema::new(header.iter().skip(1))?;
    let expected = schema.arity() + 1;

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != expected {
            return Err(DatasetError::Ragged {
                row: line,
                expected,
                found: row.len(),
            });
        }
        let id = row[0].to_string();
        if id.is_empty() {
            return Err(DatasetError::EmptyId { row: line });
        }
        if !seen.insert(id.clone()) {
            return Err(DatasetError::DuplicateId { row: line, id });
        }
        let features = row
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| match cell {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(DatasetError::NonBinary {
                    row: line,
                    column: j + 2,
                    feature: schema.names[j].clone(),
                    value: other.to_string(),
                }),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        records.push(PatientRecord { id, features });
    }
    Ok(Dataset { schema, records })
}

/// Parses a comma-separated 0/1 query vector such as `"0,1,0,1"`.
pub fn parse_binary_vector(text: &str) -> Result<Vec<u8>, DatasetError> {
    text.split(',')
        .map(str::trim)
        .enumerate()
        .map(|(j, cell)| match cell {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(DatasetError::NonBinary {
                row: 1,
                column: j + 1,
                feature: format!("#{}", j + 1),
                value: other.to_string(),
            }),
        })
        .collect()
}

/// Column labels of the reference table.
pub const TABLE1_FEATURES: [&str; 10] = [
    "BP",
    "HB",
    "PR",
    "ECG",
    "left-shoulder-pain",
    "sweating",
    "vomiting",
    "over-weight",
    "chest-pain",
    "breathlessness",
];

/// Rows of the reference table, P1 through P10.
pub const TABLE1_ROWS: [[u8; 10]; 10] = [
    [1, 0, 1, 0, 1, 1, 0, 0, 0, 0],
    [0, 0, 1, 1, 1, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 1, 1, 1, 1, 1, 1, 0],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 1, 1, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 1, 0],
    [0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
];

/// The ten-patient, ten-symptom reference dataset.
pub fn builtin_table1() -> Dataset {
    let schema = FeatureSchema {
        names: TABLE1_FEATURES.iter().map(|s| s.to_string()).collect(),
    };
    let records = TABLE1_ROWS
        .iter()
        .enumerate()
        .map(|(i, row)| PatientRecord::new(format!("P{}", i + 1), row.to_vec()))
        .collect();
    Dataset { schema, records }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyId { index: usize },
    DuplicateId { id: String, indices: Vec<usize> },
    ArityMismatch { id: String, expected: usize, found: usize },
    NonBinary { id: String, feature: String, value: u8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId { index } => write!(f, "record #{index} has an empty id"),
            Violation::DuplicateId { id, indices } => {
                write!(f, "id `{id}` appears at records {indices:?}")
            }
            Violation::ArityMismatch {
                id,
                expected,
                found,
            } => write!(f, "record `{id}` has {found} features, expected {expected}"),
            Violation::NonBinary { id, feature, value } => {
                write!(f, "record `{id}` feature `{feature}` has value {value}")
            }
        }
    }
}

/// Result of [`validate`]: hard violations plus advisory warnings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant violation in `d`.
pub fn validate(d: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    if d.records.is_empty() {
        report.warnings.push("no records".to_string());
    }
    let mut by_id: Vec<(&str, Vec<usize>)> = Vec::new();
    for (index, record) in d.records.iter().enumerate() {
        if record.id.is_empty() {
            report.violations.push(Violation::EmptyId { index });
        } else if let Some(entry) = by_id.iter_mut().find(|(id, _)| *id == record.id) {
            entry.1.push(index);
        } else {
            by_id.push((&record.id, vec![index]));
        }
        if record.features.len() != d.schema.arity() {
            report.violations.push(Violation::ArityMismatch {
                id: record.id.clone(),
                expected: d.schema.arity(),
                found: record.features.len(),
            });
        }
        for (j, &value) in record.features.iter().enumerate() {
            if value > 1 {
                let feature = d
                    .schema
                    .names
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| format!("#{}", j + 1));
                report.violations.push(Violation::NonBinary {
                    id: record.id.clone(),
                    feature,
                    value,
                });
            }
        }
    }
    for (id, indices) in by_id {
        if indices.len() > 1 {
            report.violations.push(Violation::DuplicateId {
                id: id.to_string(),
                indices,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,BP,HB,PR,ECG,left-shoulder-pain,sweating,vomiting,over-weight,chest-pain,breathlessness\n";

    #[test]
    fn builtin_has_ten_by_ten() {
        let d = builtin_table1();
        assert_eq!(d.len(), 10);
        assert_eq!(d.arity(), 10);
        assert_eq!(d.records()[3].id, "P4");
        assert!(d.records()[3].features.iter().all(|&b| b == 0));
        assert!(d.records()[5].features.iter().all(|&b| b == 1));
        assert_eq!(builtin_table1(), d);
    }

    #[test]
    fn parses_table1_csv() {
        let d = parse_dataset(&builtin_table1().to_csv()).unwrap();
        assert_eq!(d, builtin_table1());
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let d = parse_dataset(HEADER).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.arity(), 10);
    }

    #[test]
    fn empty_text_is_rejected() {
        assert_eq!(parse_dataset(""), Err(DatasetError::Empty));
        assert_eq!(parse_dataset("  \n"), Err(DatasetError::Empty));
    }

    #[test]
    fn non_binary_cell_names_position() {
        let err = parse_dataset("id,a,b\nX,0,1\nY,2,0\n").unwrap_err();
        assert_eq!(
            err,
            DatasetError::NonBinary {
                row: 3,
                column: 2,
                feature: "a".into(),
                value: "2".into()
            }
        );
        assert!(err.to_string().contains("row 3, column 2"));
    }

    #[test]
    fn missing_value_is_rejected() {
        let err = parse_dataset("id,a,b\nX,0,\n").unwrap_err();
        assert!(matches!(err, DatasetError::NonBinary { row: 2, column: 3, .. }));
    }

    #[test]
    fn ragged_and_duplicate_rows() {
        assert_eq!(
            parse_dataset("id,a,b\nX,0\n").unwrap_err(),
            DatasetError::Ragged {
                row: 2,
                expected: 3,
                found: 2
            }
        );
        assert_eq!(
            parse_dataset("id,a\nX,0\nX,1\n").unwrap_err(),
            DatasetError::DuplicateId {
                row: 3,
                id: "X".into()
            }
        );
    }

    #[test]
    fn header_must_name_id_and_unique_features() {
        assert_eq!(parse_dataset("name,a\n"), Err(DatasetError::BadHeader));
        assert_eq!(parse_dataset("id\n"), Err(DatasetError::BadHeader));
        assert!(matches!(
            parse_dataset("id,a,a\n"),
            Err(DatasetError::DuplicateFeature { column: 3, .. })
        ));
    }

    #[test]
    fn crlf_and_blank_lines_tolerated() {
        let d = parse_dataset("id,a,b\r\nX,0,1\r\n\r\nY,1,1\r\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records()[1].features, vec![1, 1]);
    }

    #[test]
    fn validate_reports_violations_without_mutating() {
        assert!(validate(&builtin_table1()).is_valid());

        let schema = FeatureSchema::new(["a", "b"]).unwrap();
        let d = Dataset::new_unchecked(
            schema.clone(),
            vec![
                PatientRecord::new("P1", vec![0, 1]),
                PatientRecord::new("P1", vec![1, 1]),
            ],
        );
        let before = d.clone();
        let report = validate(&d);
        assert_eq!(d, before);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].to_string().contains("P1"));

        let empty = Dataset::new_unchecked(schema, vec![]);
        let report = validate(&empty);
        assert!(report.is_valid());
        assert_eq!(report.warnings, vec!["no records".to_string()]);
    }

    #[test]
    fn checked_constructor_rejects_bad_records() {
        let schema = FeatureSchema::new(["a", "b"]).unwrap();
        assert!(matches!(
            Dataset::new(schema.clone(), vec![PatientRecord::new("X", vec![0])]),
            Err(DatasetError::ArityMismatch { .. })
        ));
        assert!(matches!(
            Dataset::new(schema, vec![PatientRecord::new("X", vec![0, 3])]),
            Err(DatasetError::NonBinary { .. })
        ));
    }

    #[test]
    fn query_vector_parsing() {
        assert_eq!(parse_binary_vector("0, 1,1").unwrap(), vec![0, 1, 1]);
        assert!(parse_binary_vector("0,x").is_err());
    }
}
