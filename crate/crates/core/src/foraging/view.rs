//! Filter/sort views over tables.
//!
//! Predicates combine by conjunction. Sorting is stable and lexicographic over
//! the sort keys, so the first key dominates and ties keep table order. Nulls
//! never satisfy a predicate and sort last in either direction.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::TableId;
use crate::import::parse_datetime;
use crate::model::{CellValue, Column, DType, Project, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "contains")]
    Contains,
}

impl CompareOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "==" => CompareOp::Eq,
            "!=" => CompareOp::Ne,
            "<" => CompareOp::Lt,
            "<=" => CompareOp::Le,
            ">" => CompareOp::Gt,
            ">=" => CompareOp::Ge,
            "contains" => CompareOp::Contains,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Contains => "contains",
        }
    }

    fn is_ordering(self) -> bool {
        matches!(self, CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: CompareOp,
    pub literal: CellValue,
}

impl Predicate {
    pub fn new(column: impl Into<String>, op: CompareOp, literal: CellValue) -> Self {
        Self { column: column.into(), op, literal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortKey {
    pub column: String,
    #[serde(default)]
    pub direction: Direction,
}

impl SortKey {
    pub fn new(column: impl Into<String>, direction: Direction) -> Self {
        Self { column: column.into(), direction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableView {
    pub table_id: TableId,
    #[serde(default)]
    pub filters: Vec<Predicate>,
    #[serde(default)]
    pub sorts: Vec<SortKey>,
}

pub(crate) struct Compiled {
    column: usize,
    op: CompareOp,
    literal: CellValue,
}

impl Compiled {
    fn matches(&self, row: &[CellValue]) -> bool {
        let cell = &row[self.column];
        if cell.is_null() {
            return false;
        }
        if self.op == CompareOp::Contains {
            return match (cell, &self.literal) {
                (CellValue::Str(hay), CellValue::Str(needle)) => hay.contains(needle.as_str()),
                _ => false,
            };
        }
        let ord = cell.total_cmp(&self.literal);
        match self.op {
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Ge => ord != Ordering::Less,
            CompareOp::Contains => unreachable!(),
        }
    }
}

fn column_position(columns: &[Column], name: &str) -> Result<usize> {
    columns.iter().position(|c| c.name == name).ok_or_else(|| Error::Column(name.to_owned()))
}

fn type_error(pred: &Predicate, dtype: DType) -> Error {
    Error::Type(format!(
        "`{} {} {}` is not applicable to a {} column",
        pred.column,
        pred.op.as_str(),
        pred.literal,
        dtype.name()
    ))
}

/// Checks a predicate against the column dtypes and coerces its literal.
pub(crate) fn compile(columns: &[Column], pred: &Predicate) -> Result<Compiled> {
    let column = column_position(columns, &pred.column)?;
    let dtype = columns[column].dtype;
    let op_ok = match pred.op {
        CompareOp::Contains => dtype == DType::String,
        op if op.is_ordering() => dtype.is_ordered(),
        _ => true,
    };
    if !op_ok {
        return Err(type_error(pred, dtype));
    }
    let literal = match (dtype, &pred.literal) {
        (DType::String, CellValue::Str(_))
        | (DType::Bool, CellValue::Bool(_))
        | (DType::Datetime, CellValue::Datetime(_)) => pred.literal.clone(),
        (DType::Int | DType::Float, CellValue::Int(_) | CellValue::Float(_)) => pred.literal.clone(),
        (DType::Datetime, CellValue::Str(s)) => {
            CellValue::Datetime(parse_datetime(s).ok_or_else(|| type_error(pred, dtype))?)
        }
        _ => return Err(type_error(pred, dtype)),
    };
    Ok(Compiled { column, op: pred.op, literal })
}

/// Indices of rows satisfying every predicate, in table order.
pub(crate) fn filter_indices(
    columns: &[Column],
    rows: &[Vec<CellValue>],
    filters: &[Predicate],
) -> Result<Vec<usize>> {
    let compiled = filters.iter().map(|p| compile(columns, p)).collect::<Result<Vec<_>>>()?;
    Ok((0..rows.len()).filter(|&i| compiled.iter().all(|c| c.matches(&rows[i]))).collect())
}

fn compare_key(a: &CellValue, b: &CellValue, direction: Direction) -> Ordering {
    match (a.is_null(), b.is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => match direction {
            Direction::Asc => a.total_cmp(b),
            Direction::Desc => b.total_cmp(a),
        },
    }
}

/// Stable sort of `indices` by the sort keys.
pub(crate) fn sort_indices(
    columns: &[Column],
    rows: &[Vec<CellValue>],
    indices: &mut [usize],
    sorts: &[SortKey],
) -> Result<()> {
    let keys = sorts
        .iter()
        .map(|k| Ok((column_position(columns, &k.column)?, k.direction)))
        .collect::<Result<Vec<_>>>()?;
    indices.sort_by(|&a, &b| {
        keys.iter()
            .map(|&(col, dir)| compare_key(&rows[a][col], &rows[b][col], dir))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    Ok(())
}

/// Applies a view to a table. The result keeps the original row ids.
pub fn apply_view_to_table(table: &Table, view: &TableView) -> Result<Table> {
    let mut indices = filter_indices(&table.columns, &table.rows, &view.filters)?;
    sort_indices(&table.columns, &table.rows, &mut indices, &view.sorts)?;
    Ok(Table {
        id: table.id.clone(),
        columns: table.columns.clone(),
        rows: indices.iter().map(|&i| table.rows[i].clone()).collect(),
        row_ids: indices.iter().map(|&i| table.row_ids[i].clone()).collect(),
    })
}

pub fn apply_table_view(project: &Project, view: &TableView) -> Result<Table> {
    let (_, table) = project.table(&view.table_id)?;
    apply_view_to_table(table, view)
}
