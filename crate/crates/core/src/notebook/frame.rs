use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{DataSourceId, RowId};
use crate::model::{CellValue, Column, DataSource, DType, Table};
use crate::notebook::lineage::{Lineage, LineageRef};

/// One step of the path from raw data to a result, e.g. `filter(p, ==, P1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStep {
    pub op: String,
    pub args: Vec<String>,
}

impl PipelineStep {
    pub fn new(op: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { op: op.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

/// Which sources a value came from and what was done to them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Derivation {
    pub sources: Vec<DataSourceId>,
    pub pipeline: Vec<PipelineStep>,
}

impl Derivation {
    pub fn imported(sources: &[&DataSource]) -> Self {
        Self {
            sources: sources.iter().map(|s| s.id.clone()).collect(),
            pipeline: vec![PipelineStep::new("import", sources.iter().map(|s| s.name.clone()))],
        }
    }

    pub fn then(&self, step: PipelineStep) -> Self {
        let mut next = self.clone();
        next.pipeline.push(step);
        next
    }

    pub fn ops(&self) -> Vec<&str> {
        self.pipeline.iter().map(|s| s.op.as_str()).collect()
    }
}

/// How an aggregate column was computed from its row lineage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Measure {
    /// Median of `column` over the lineage rows.
    Median { column: String },
    /// Size of the lineage set.
    Count,
}

/// A table value inside the notebook.
///
/// Unlike [`Table`], each row carries its own lineage: for rows of an imported
/// table that is the row itself, for aggregate rows it is every row that
/// contributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<CellValue>>,
    pub row_ids: Vec<RowId>,
    pub lineage: Vec<Lineage>,
    /// Rows are aggregates rather than raw records.
    pub aggregate: bool,
    pub measures: BTreeMap<String, Measure>,
    pub derivation: Derivation,
}

impl Frame {
    pub fn from_table(source: &DataSource, table: &Table) -> Self {
        Self {
            columns: table.columns.clone(),
            rows: table.rows.clone(),
            row_ids: table.row_ids.clone(),
            lineage: table
                .row_ids
                .iter()
                .map(|r| Lineage::from([LineageRef::row(&table.id, r)]))
                .collect(),
            aggregate: false,
            measures: BTreeMap::new(),
            derivation: Derivation::imported(&[source]),
        }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Column(name.to_owned()))
    }

    pub fn numeric_column(&self, name: &str) -> Result<usize> {
        let idx = self.column_index(name)?;
        let dtype = self.columns[idx].dtype;
        if !dtype.is_numeric() {
            return Err(Error::Type(format!(
                "column `{name}` has dtype {}, expected a numeric column",
                dtype.name()
            )));
        }
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keeps the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize], step: PipelineStep) -> Frame {
        Frame {
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
            lineage: indices.iter().map(|&i| self.lineage[i].clone()).collect(),
            aggregate: self.aggregate,
            measures: self.measures.clone(),
            derivation: self.derivation.then(step),
        }
    }

    pub fn dtype_of(&self, name: &str) -> Option<DType> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.dtype)
    }
}
