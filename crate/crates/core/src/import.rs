//! CSV and plain-text import.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use crate::error::{Error, Result};
use crate::ids::{DataSourceId, DocumentId, RowId, TableId};
use crate::model::{
    CellValue, Column, DType, DataSource, OriginDescriptor, Project, SourceKind, SourcePayload, Table,
    TextDocument,
};

/// Parses the ISO-8601 forms accepted for datetime columns. Values without an
/// offset are taken as UTC.
pub fn parse_datetime(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|naive| naive.and_utc())
}

fn parse_float(s: &str) -> Option<f64> {
    // f64::from_str also accepts "inf" and "NaN"; those stay strings.
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    if s.eq_ignore_ascii_case("true") {
        Some(true)
    } else if s.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}

/// First dtype in the cascade int → float → bool → datetime → string that
/// accepts every non-empty value.
pub fn infer_dtype<'a>(values: impl Iterator<Item = &'a str> + Clone) -> DType {
    let mut present = values.filter(|v| !v.is_empty());
    if present.clone().next().is_none() {
        return DType::String;
    }
    if present.clone().all(|v| v.parse::<i64>().is_ok()) {
        DType::Int
    } else if present.clone().all(|v| parse_float(v).is_some()) {
        DType::Float
    } else if present.clone().all(|v| parse_bool(v).is_some()) {
        DType::Bool
    } else if present.all(|v| parse_datetime(v).is_some()) {
        DType::Datetime
    } else {
        DType::String
    }
}

/// Converts raw text to a cell of an already inferred dtype.
pub fn convert(raw: &str, dtype: DType) -> Option<CellValue> {
    if raw.is_empty() {
        return Some(CellValue::Null);
    }
    Some(match dtype {
        DType::Int => CellValue::Int(raw.parse().ok()?),
        DType::Float => CellValue::Float(parse_float(raw)?),
        DType::Bool => CellValue::Bool(parse_bool(raw)?),
        DType::Datetime => CellValue::Datetime(parse_datetime(raw)?),
        DType::String => CellValue::Str(raw.to_owned()),
    })
}

/// Parses RFC 4180 CSV whose first record is the header.
pub fn parse_csv(table_id: TableId, bytes: &[u8]) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let csv_error = |err: csv::Error| {
        let line = err.position().map_or(1, |p| p.line());
        match err.kind() {
            csv::ErrorKind::Utf8 { err, .. } => Error::Encoding { offset: err.valid_up_to() },
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
                line,
                reason: format!("expected {expected_len} fields, found {len}"),
            },
            _ => Error::Parse { line, reason: err.to_string() },
        }
    };

    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse { line: 1, reason: "missing header row".into() });
    }
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(Error::Parse { line: 1, reason: format!("duplicate column name `{name}`") });
        }
    }

    let mut raw_rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        raw_rows.push(record.iter().map(str::to_owned).collect::<Vec<_>>());
    }

    let columns: Vec<Column> = header
        .iter()
        .enumerate()
        .map(|(c, name)| Column::new(name, infer_dtype(raw_rows.iter().map(|r| r[c].as_str()))))
        .collect();
    let rows = raw_rows
        .iter()
        .map(|raw| {
            raw.iter()
                .zip(&columns)
                .map(|(v, col)| convert(v, col.dtype).expect("inferred dtype accepts every value"))
                .collect()
        })
        .collect();
    let row_ids = (1..=raw_rows.len()).map(|i| RowId(format!("r{i}"))).collect();
    Ok(Table { id: table_id, columns, rows, row_ids })
}

fn check_name_free(project: &Project, name: &str) -> Result<()> {
    if name.trim().is_empty() {
        return Err(Error::Validation("source name must not be empty".into()));
    }
    if project.source_by_name(name).is_some() {
        return Err(Error::Conflict(format!("a data source named `{name}` already exists")));
    }
    Ok(())
}

pub fn import_table(
    project: &mut Project,
    name: &str,
    bytes: &[u8],
    origin: OriginDescriptor,
) -> Result<DataSource> {
    check_name_free(project, name)?;
    // Parse before allocating ids so a failed import leaves the project untouched.
    let mut table = parse_csv(TableId::new(""), bytes)?;
    let source_id = DataSourceId(project.fresh_id("src"));
    table.id = TableId(project.fresh_id("tbl"));
    let source = DataSource {
        id: source_id,
        kind: SourceKind::Table,
        name: name.to_owned(),
        origin,
        payload: SourcePayload::Table(table),
    };
    project.data_sources.push(source.clone());
    Ok(source)
}

pub fn import_text(
    project: &mut Project,
    name: &str,
    bytes: &[u8],
    origin: OriginDescriptor,
) -> Result<DataSource> {
    check_name_free(project, name)?;
    let content = std::str::from_utf8(bytes)
        .map_err(|e| Error::Encoding { offset: e.valid_up_to() })?
        .to_owned();
    let source_id = DataSourceId(project.fresh_id("src"));
    let doc = TextDocument::new(DocumentId(project.fresh_id("doc")), content);
    let source = DataSource {
        id: source_id,
        kind: SourceKind::Text,
        name: name.to_owned(),
        origin,
        payload: SourcePayload::Text(doc),
    };
    project.data_sources.push(source.clone());
    Ok(source)
}
