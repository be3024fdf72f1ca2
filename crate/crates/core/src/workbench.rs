//! Single-writer facade over a project.
//!
//! A [`Workbench`] owns the project, the notebook session and the canvas undo
//! log. Every mutation goes through `&mut self`, so wrapping one workbench in a
//! mutex gives the ordered single-writer queue the HTTP service needs.

use chrono::{DateTime, Utc};

use crate::canvas::{self, Anchor, Block, BlockDescriptor, BlockInput, Link, Point, Rect, Region, Removed, Size, SyncMode, SyncOutcome, UndoLog, UnwindResult, UpstreamChange, UpstreamRef};
use crate::error::{Error, Result};
use crate::foraging::{self, Selection};
use crate::ids::*;
use crate::import;
use crate::model::{Annotation, CellValue, Code, DataSource, OriginDescriptor, Project, SourceKind, SourcePayload, Span};
use crate::notebook::{self, Cell, CellEvaluator, CellKind, CellOutput, ExprEvaluator, Session};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always reports the same instant. Useful for reproducible files and tests.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

/// Result of running cells: what each cell produced and how the canvas
/// followed.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub cells: Vec<(CellId, Vec<CellOutput>)>,
    pub sync: SyncOutcome,
}

pub struct Workbench {
    project: Project,
    session: Session,
    undo: UndoLog,
    evaluator: Box<dyn CellEvaluator>,
    clock: Box<dyn Clock>,
}

impl Workbench {
    pub fn new(project: Project, clock: Box<dyn Clock>) -> Self {
        Self { project, session: Session::default(), undo: UndoLog::default(), evaluator: Box::new(ExprEvaluator), clock }
    }

    pub fn with_evaluator(mut self, evaluator: Box<dyn CellEvaluator>) -> Self {
        self.evaluator = evaluator;
        self
    }

    pub fn create(id: impl Into<ProjectId>, name: &str, clock: Box<dyn Clock>) -> Self {
        let project = Project::new(id.into(), name, clock.now());
        Self::new(project, clock)
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn into_project(self) -> Project {
        self.project
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Replaces the whole project, e.g. after an upload. The session and undo
    /// log start over.
    pub fn replace_project(&mut self, project: Project) -> Result<()> {
        crate::model::validate(&project)?;
        self.project = project;
        self.session = Session::default();
        self.undo = UndoLog::default();
        Ok(())
    }

    fn touch(&mut self) {
        self.project.modified_at = self.clock.now();
    }

    fn commit<T>(&mut self, result: Result<T>) -> Result<T> {
        if result.is_ok() {
            self.touch();
        }
        result
    }

    pub fn rename(&mut self, name: &str) -> Result<()> {
        if name.trim().is_empty() {
            return Err(Error::Validation("project name cannot be empty".into()));
        }
        self.project.name = name.to_owned();
        self.touch();
        Ok(())
    }

    pub fn set_join_key(&mut self, column: &str) -> Result<()> {
        if column.is_empty() {
            return Err(Error::Validation("join key cannot be empty".into()));
        }
        self.project.settings.join_key = column.to_owned();
        self.touch();
        Ok(())
    }

    // Foraging

    pub fn import_source(&mut self, kind: SourceKind, name: &str, bytes: &[u8], origin: OriginDescriptor) -> Result<DataSource> {
        let r = match kind {
            SourceKind::Text => import::import_text(&mut self.project, name, bytes, origin),
            SourceKind::Table => import::import_table(&mut self.project, name, bytes, origin),
        };
        self.commit(r)
    }

    pub fn create_code(&mut self, label: &str, color: Option<&str>) -> Result<Code> {
        let r = foraging::create_code(&mut self.project, label, color);
        self.commit(r)
    }

    pub fn annotate(
        &mut self,
        document_id: &DocumentId,
        span: Span,
        code_ids: &[CodeId],
        note: &str,
        author: &str,
    ) -> Result<Annotation> {
        let now = self.clock.now();
        let r = foraging::annotate(&mut self.project, document_id, span, code_ids, note, author, now);
        self.commit(r)
    }

    /// Overwrites one table cell, then reruns the notebook and brings the
    /// canvas up to date.
    pub fn edit_table_cell(&mut self, source_id: &DataSourceId, row_id: &RowId, column: &str, value: CellValue) -> Result<Execution> {
        let source = self.project.source_mut(source_id)?;
        let SourcePayload::Table(table) = &mut source.payload else {
            return Err(Error::Validation(format!("source `{source_id}` is not a table")));
        };
        let c = table.column_index(column).ok_or_else(|| Error::Column(column.to_owned()))?;
        let r = table.row_index(row_id).ok_or_else(|| Error::reference("row", row_id.as_str()))?;
        let dtype = table.columns[c].dtype;
        let value = match value {
            CellValue::Int(i) if dtype == crate::model::DType::Float => CellValue::Float(i as f64),
            v => v,
        };
        if !value.conforms_to(dtype) {
            return Err(Error::Type(format!("column `{column}` holds {} values", dtype.name())));
        }
        table.rows[r][c] = value;
        let cells = notebook::execute_all(&mut self.project, self.evaluator.as_ref(), &mut self.session);
        let sync = canvas::sync_all(&mut self.project);
        self.touch();
        Ok(Execution { cells, sync })
    }

    // Notebook

    /// Inserts a cell at `index`, or appends it.
    pub fn add_cell(&mut self, kind: CellKind, source: &str, index: Option<usize>) -> Result<Cell> {
        let cells = &self.project.notebook.cells;
        let at = index.unwrap_or(cells.len());
        if at > cells.len() {
            return Err(Error::Validation(format!("cell index {at} is past the end of the notebook")));
        }
        let cell = Cell::new(CellId(self.project.fresh_id("cell")), kind, source);
        self.project.notebook.cells.insert(at, cell.clone());
        self.touch();
        Ok(cell)
    }

    /// Changes a cell's source. Outputs are kept until the cell runs again.
    pub fn update_cell(&mut self, id: &CellId, source: &str) -> Result<Cell> {
        let cell = self.project.notebook.cell_mut(id)?;
        cell.set_source(source);
        let cell = cell.clone();
        self.touch();
        Ok(cell)
    }

    pub fn execute_cell(&mut self, id: &CellId) -> Result<Execution> {
        let outputs = notebook::execute_cell(&mut self.project, id, self.evaluator.as_ref(), &mut self.session)?;
        let sync = canvas::on_upstream_change(&mut self.project, &UpstreamChange { target: UpstreamRef::Cell(id.clone()) });
        self.touch();
        Ok(Execution { cells: vec![(id.clone(), outputs)], sync })
    }

    pub fn execute_all(&mut self) -> Execution {
        let cells = notebook::execute_all(&mut self.project, self.evaluator.as_ref(), &mut self.session);
        let sync = canvas::sync_all(&mut self.project);
        self.touch();
        Execution { cells, sync }
    }

    // Canvas

    pub fn create_block(&mut self, input: &BlockInput, position: Point, sync_mode: SyncMode) -> Result<Block> {
        let r = canvas::create_block(&mut self.project, input, position, sync_mode);
        self.commit(r)
    }

    pub fn extract_block(&mut self, selection: Selection, position: Point, sync_mode: SyncMode) -> Result<Block> {
        self.create_block(&BlockInput::Extract { selection }, position, sync_mode)
    }

    pub fn create_note(&mut self, text: &str, position: Point) -> Result<Block> {
        let r = canvas::create_note(&mut self.project, text, position);
        self.commit(r)
    }

    pub fn move_block(&mut self, id: &BlockId, position: Point) -> Result<Block> {
        let r = canvas::move_block(&mut self.project, id, position);
        self.commit(r)
    }

    pub fn resize_block(&mut self, id: &BlockId, size: Size) -> Result<Block> {
        let r = canvas::resize_block(&mut self.project, id, size);
        self.commit(r)
    }

    pub fn set_sync_mode(&mut self, id: &BlockId, mode: SyncMode) -> Result<Block> {
        let r = canvas::set_sync_mode(&mut self.project, id, mode);
        self.commit(r)
    }

    /// Replaces a snapshot block's payload with the current recomputation and
    /// clears its stale flag. The block stays a snapshot.
    pub fn refresh_block(&mut self, id: &BlockId) -> Result<Block> {
        let block = self.project.canvas.block(id)?;
        let fresh = canvas::materialize(&self.project, &block.source_ref)?;
        let b = self.project.canvas.block_mut(id)?;
        b.upstream_hash = fresh.hash();
        b.payload = fresh.payload;
        b.abstraction_level = fresh.abstraction_level;
        b.stale = false;
        let out = b.clone();
        canvas::refresh_dangling(&mut self.project);
        self.touch();
        Ok(out)
    }

    pub fn delete_block(&mut self, id: &BlockId) -> Result<Removed> {
        let r = canvas::delete_block(&mut self.project, id, &mut self.undo);
        self.commit(r)
    }

    /// Restores the most recently deleted block and its links.
    pub fn undo(&mut self) -> Result<Option<canvas::Removal>> {
        let r = canvas::undo(&mut self.project, &mut self.undo);
        if matches!(r, Ok(Some(_))) {
            self.touch();
        }
        r
    }

    pub fn create_link(&mut self, from: &Anchor, to: &Anchor, label: Option<&str>) -> Result<Link> {
        let r = canvas::create_link(&mut self.project, from, to, label);
        self.commit(r)
    }

    pub fn create_region(&mut self, name: &str, bounds: Rect) -> Result<Region> {
        let r = canvas::create_region(&mut self.project, name, bounds);
        self.commit(r)
    }

    pub fn assign_to_region(&mut self, block: &BlockId, region: &RegionId) -> Result<Region> {
        let r = canvas::assign_to_region(&mut self.project, block, region);
        self.commit(r)
    }

    pub fn unwind(&self, anchor: &Anchor) -> Result<UnwindResult> {
        canvas::unwind(&self.project, anchor)
    }

    pub fn accept_suggestion(
        &mut self,
        parent: &Anchor,
        descriptor: &BlockDescriptor,
        position: Point,
        sync_mode: SyncMode,
    ) -> Result<(Block, Link)> {
        let r = canvas::accept_suggestion(&mut self.project, parent, descriptor, position, sync_mode);
        self.commit(r)
    }
}
