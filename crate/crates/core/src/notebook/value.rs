use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ids::DocumentId;
use crate::model::CellValue;
use crate::notebook::chart::ChartSpec;
use crate::notebook::frame::{Derivation, Frame};

/// A set of text documents, e.g. the pre-bound `docs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSet {
    pub ids: Vec<DocumentId>,
    pub derivation: Derivation,
}

/// Anything a notebook expression can evaluate to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Record(BTreeMap<String, Value>),
    Table(Box<Frame>),
    Chart(Box<ChartSpec>),
    Docs(DocumentSet),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Record(_) => "record",
            Value::Table(_) => "table",
            Value::Chart(_) => "chart",
            Value::Docs(_) => "documents",
        }
    }

    /// A finite float, or null for NaN/infinite inputs.
    pub fn float(x: f64) -> Value {
        if x.is_finite() {
            Value::Float(x)
        } else {
            Value::Null
        }
    }

    pub fn opt_float(x: Option<f64>) -> Value {
        x.map_or(Value::Null, Value::float)
    }
}

impl From<&CellValue> for Value {
    fn from(cell: &CellValue) -> Self {
        match cell {
            CellValue::Null => Value::Null,
            CellValue::Bool(b) => Value::Bool(*b),
            CellValue::Int(i) => Value::Int(*i),
            CellValue::Float(x) => Value::Float(*x),
            CellValue::Datetime(_) => Value::Str(cell.to_string()),
            CellValue::Str(s) => Value::Str(s.clone()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            Value::Record(fields) => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Table(t) => write!(f, "<table {}x{}>", t.len(), t.columns.len()),
            Value::Chart(c) => write!(f, "<{} chart, {} marks>", c.chart_kind.as_str(), c.marks.len()),
            Value::Docs(d) => write!(f, "<{} documents>", d.ids.len()),
        }
    }
}
