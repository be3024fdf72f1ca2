use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ids::{RowId, TableId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DType {
    String,
    Int,
    Float,
    Bool,
    Datetime,
}

impl DType {
    pub fn is_numeric(self) -> bool {
        matches!(self, DType::Int | DType::Float)
    }

    pub fn is_ordered(self) -> bool {
        matches!(self, DType::Int | DType::Float | DType::Datetime)
    }

    pub fn name(self) -> &'static str {
        match self {
            DType::String => "string",
            DType::Int => "int",
            DType::Float => "float",
            DType::Bool => "bool",
            DType::Datetime => "datetime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub dtype: DType,
}

impl Column {
    pub fn new(name: impl Into<String>, dtype: DType) -> Self {
        Self { name: name.into(), dtype }
    }
}

/// One table cell.
///
/// Serialized as the natural JSON scalar; datetimes are wrapped as
/// `{"datetime": "<rfc3339>"}` so they stay distinguishable from strings.
/// Floats are always finite.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Datetime(DateTime<Utc>),
    Str(String),
}

impl CellValue {
    pub fn is_null(&self) -> bool {
        matches!(self, CellValue::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            CellValue::Int(i) => Some(i as f64),
            CellValue::Float(f) => Some(f),
            _ => None,
        }
    }

    pub fn dtype(&self) -> Option<DType> {
        Some(match self {
            CellValue::Null => return None,
            CellValue::Bool(_) => DType::Bool,
            CellValue::Int(_) => DType::Int,
            CellValue::Float(_) => DType::Float,
            CellValue::Datetime(_) => DType::Datetime,
            CellValue::Str(_) => DType::String,
        })
    }

    pub fn conforms_to(&self, dtype: DType) -> bool {
        match self.dtype() {
            None => true,
            Some(d) => d == dtype,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            CellValue::Null => 0,
            CellValue::Bool(_) => 1,
            CellValue::Int(_) | CellValue::Float(_) => 2,
            CellValue::Datetime(_) => 3,
            CellValue::Str(_) => 4,
        }
    }

    /// Total order: null < bool < number < datetime < string. Ints and floats
    /// compare numerically.
    pub fn total_cmp(&self, other: &CellValue) -> Ordering {
        use CellValue::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Datetime(a), Datetime(b)) => a.cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            (a, b) if a.rank() == 2 && b.rank() == 2 => {
                let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
                x.total_cmp(&y)
            }
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Null => f.write_str("null"),
            CellValue::Bool(b) => write!(f, "{b}"),
            CellValue::Int(i) => write!(f, "{i}"),
            CellValue::Float(x) => write!(f, "{x}"),
            CellValue::Datetime(d) => f.write_str(&format_datetime(d)),
            CellValue::Str(s) => f.write_str(s),
        }
    }
}

pub(crate) fn format_datetime(d: &DateTime<Utc>) -> String {
    d.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CellValue::Null => s.serialize_unit(),
            CellValue::Bool(b) => s.serialize_bool(*b),
            CellValue::Int(i) => s.serialize_i64(*i),
            CellValue::Float(x) => s.serialize_f64(*x),
            CellValue::Str(v) => s.serialize_str(v),
            CellValue::Datetime(d) => {
                use serde::ser::SerializeMap;
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("datetime", &format_datetime(d))?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for CellValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde_json::Value;
        Ok(match Value::deserialize(d)? {
            Value::Null => CellValue::Null,
            Value::Bool(b) => CellValue::Bool(b),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    CellValue::Int(i)
                } else {
                    let x = n.as_f64().ok_or_else(|| D::Error::custom("number out of range"))?;
                    CellValue::Float(x)
                }
            }
            Value::String(s) => CellValue::Str(s),
            Value::Object(map) => {
                let raw = map
                    .get("datetime")
                    .and_then(Value::as_str)
                    .filter(|_| map.len() == 1)
                    .ok_or_else(|| D::Error::custom("expected {\"datetime\": ...}"))?;
                let parsed = DateTime::parse_from_rfc3339(raw).map_err(D::Error::custom)?;
                CellValue::Datetime(parsed.with_timezone(&Utc))
            }
            Value::Array(_) => return Err(D::Error::custom("a cell cannot hold an array")),
        })
    }
}

/// An imported table. Views never renumber rows: `row_ids[i]` names `rows[i]`
/// for the life of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: TableId,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<CellValue>>,
    pub row_ids: Vec<RowId>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row_index(&self, row_id: &RowId) -> Option<usize> {
        self.row_ids.iter().position(|r| r == row_id)
    }

    pub fn cell(&self, row_id: &RowId, column: &str) -> Option<&CellValue> {
        let r = self.row_index(row_id)?;
        let c = self.column_index(column)?;
        self.rows[r].get(c)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
