//! Data summary and aggregation: a notebook whose code cells are written in a
//! small expression language and run against the project's shared variable
//! space.
//!
//! Execution is always sequential. Running one cell first replays every code
//! cell above it in a fresh space, so a cell never sees state from cells that
//! were run out of order.

pub mod chart;
pub mod eval;
pub mod frame;
pub mod lang;
pub mod lineage;
pub mod ops;
pub mod value;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::CellId;
use crate::model::Project;

pub use chart::{ChartKind, ChartSpec, Encoding, Mark, Statistic};
pub use eval::VariableSpace;
pub use frame::{Derivation, Frame, Measure, PipelineStep};
pub use lineage::{Lineage, LineageRef};
pub use value::{DocumentSet, Value};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Notebook {
    pub cells: Vec<Cell>,
}

impl Notebook {
    pub fn cell(&self, id: &CellId) -> Result<&Cell> {
        self.cells.iter().find(|c| &c.id == id).ok_or_else(|| Error::reference("cell", id.as_str()))
    }

    pub fn cell_mut(&mut self, id: &CellId) -> Result<&mut Cell> {
        self.cells.iter_mut().find(|c| &c.id == id).ok_or_else(|| Error::reference("cell", id.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Code,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub kind: CellKind,
    pub source: String,
    pub outputs: Vec<CellOutput>,
    pub execution_count: Option<u64>,
    pub content_hash: String,
}

pub fn source_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

impl Cell {
    pub fn new(id: CellId, kind: CellKind, source: impl Into<String>) -> Self {
        let source = source.into();
        Self { id, kind, content_hash: source_hash(&source), source, outputs: Vec::new(), execution_count: None }
    }

    pub fn set_source(&mut self, source: impl Into<String>) {
        self.source = source.into();
        self.content_hash = source_hash(&self.source);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub line: Option<usize>,
    #[serde(default)]
    pub column: Option<usize>,
}

impl From<&Error> for ErrorInfo {
    fn from(err: &Error) -> Self {
        let (line, column) = match err {
            Error::Syntax { line, column, .. } => (Some(*line), Some(*column)),
            _ => (None, None),
        };
        Self { code: err.code().to_owned(), message: err.to_string(), line, column }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellOutput {
    Value { produced_by: CellId, payload: Value },
    Table { produced_by: CellId, payload: Box<Frame> },
    Chart { produced_by: CellId, payload: Box<ChartSpec> },
    Error { produced_by: CellId, payload: ErrorInfo },
}

impl CellOutput {
    pub fn from_value(cell: &CellId, value: Value) -> Self {
        let produced_by = cell.clone();
        match value {
            Value::Table(t) => CellOutput::Table { produced_by, payload: t },
            Value::Chart(c) => CellOutput::Chart { produced_by, payload: c },
            other => CellOutput::Value { produced_by, payload: other },
        }
    }

    pub fn error(cell: &CellId, err: &Error) -> Self {
        CellOutput::Error { produced_by: cell.clone(), payload: err.into() }
    }

    pub fn produced_by(&self) -> &CellId {
        match self {
            CellOutput::Value { produced_by, .. }
            | CellOutput::Table { produced_by, .. }
            | CellOutput::Chart { produced_by, .. }
            | CellOutput::Error { produced_by, .. } => produced_by,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CellOutput::Value { .. } => "value",
            CellOutput::Table { .. } => "table",
            CellOutput::Chart { .. } => "chart",
            CellOutput::Error { .. } => "error",
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, CellOutput::Error { .. })
    }
}

/// Seam for alternative cell languages. The built-in [`ExprEvaluator`] is the
/// only implementation shipped.
pub trait CellEvaluator: Send + Sync {
    fn evaluate(&self, project: &Project, cell: &Cell, space: &mut VariableSpace) -> Vec<CellOutput>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExprEvaluator;

impl CellEvaluator for ExprEvaluator {
    fn evaluate(&self, project: &Project, cell: &Cell, space: &mut VariableSpace) -> Vec<CellOutput> {
        let result = lang::parse_cell(&cell.source).and_then(|program| eval::run_program(&program, project, space, &cell.id));
        match result {
            Ok(Some(value)) => vec![CellOutput::from_value(&cell.id, value)],
            Ok(None) => Vec::new(),
            Err(err) => vec![CellOutput::error(&cell.id, &err)],
        }
    }
}

/// Execution state that is not persisted: the variable space and the
/// execution counter.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub space: VariableSpace,
    pub execution_counter: u64,
}

/// Runs one code cell after replaying the code cells above it.
pub fn execute_cell(
    project: &mut Project,
    cell_id: &CellId,
    evaluator: &dyn CellEvaluator,
    session: &mut Session,
) -> Result<Vec<CellOutput>> {
    let target = project.notebook.cells.iter().position(|c| &c.id == cell_id).ok_or_else(|| Error::reference("cell", cell_id.as_str()))?;
    if project.notebook.cells[target].kind != CellKind::Code {
        return Err(Error::Validation(format!("cell `{cell_id}` is not a code cell")));
    }
    let mut space = VariableSpace::default();
    for cell in &project.notebook.cells[..target] {
        if cell.kind == CellKind::Code {
            evaluator.evaluate(project, cell, &mut space);
        }
    }
    let outputs = evaluator.evaluate(project, &project.notebook.cells[target], &mut space);
    session.space = space;
    session.execution_counter += 1;
    let cell = &mut project.notebook.cells[target];
    cell.outputs = outputs.clone();
    cell.execution_count = Some(session.execution_counter);
    Ok(outputs)
}

/// Runs every code cell in document order against a fresh space. A failing
/// cell records an error output and later cells still run.
pub fn execute_all(
    project: &mut Project,
    evaluator: &dyn CellEvaluator,
    session: &mut Session,
) -> Vec<(CellId, Vec<CellOutput>)> {
    *session = Session::default();
    let mut results = Vec::new();
    for i in 0..project.notebook.cells.len() {
        if project.notebook.cells[i].kind != CellKind::Code {
            continue;
        }
        let outputs = evaluator.evaluate(project, &project.notebook.cells[i], &mut session.space);
        session.execution_counter += 1;
        let cell = &mut project.notebook.cells[i];
        cell.outputs = outputs.clone();
        cell.execution_count = Some(session.execution_counter);
        results.push((cell.id.clone(), outputs));
    }
    results
}
