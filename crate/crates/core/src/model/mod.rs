//! The persistent project model.

mod project;
mod table;

use std::collections::BTreeSet;

pub use project::*;
pub use table::{CellValue, Column, DType, Table};

use crate::canvas::{anchor_resolves, BlockSource, SyncMode};
use crate::error::{Error, Result};
use crate::notebook::{CellKind, CellOutput};

/// Checks every cross-reference and structural invariant of a project.
pub fn validate(project: &Project) -> Result<()> {
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut unique = |id: &str| -> Result<()> {
        if !ids.insert(id.to_owned()) {
            return Err(Error::integrity(id, "id is used more than once"));
        }
        Ok(())
    };

    if project.schema_version != SCHEMA_VERSION {
        return Err(Error::integrity(project.id.as_str(), format!("unsupported schema version {}", project.schema_version)));
    }

    let mut names = BTreeSet::new();
    for source in &project.data_sources {
        unique(source.id.as_str())?;
        if !names.insert(source.name.as_str()) {
            return Err(Error::integrity(source.id.as_str(), format!("duplicate source name `{}`", source.name)));
        }
        if !source.payload_matches_kind() {
            return Err(Error::integrity(source.id.as_str(), "payload does not match kind"));
        }
        match &source.payload {
            SourcePayload::Text(doc) => {
                unique(doc.id.as_str())?;
                if doc.content.chars().count() != doc.length {
                    return Err(Error::integrity(doc.id.as_str(), "length does not match content"));
                }
            }
            SourcePayload::Table(table) => validate_table(table, &mut unique)?,
        }
    }

    let mut labels = BTreeSet::new();
    for code in &project.codebook {
        unique(code.id.as_str())?;
        let label = code.label.trim().to_lowercase();
        if label.is_empty() || !labels.insert(label) {
            return Err(Error::integrity(code.id.as_str(), "code labels must be non-empty and unique"));
        }
    }

    for a in &project.annotations {
        unique(a.id.as_str())?;
        let (_, doc) = project
            .document(&a.document_id)
            .map_err(|_| Error::integrity(a.id.as_str(), format!("unknown document `{}`", a.document_id)))?;
        a.span.check(doc.length).map_err(|e| Error::integrity(a.id.as_str(), e.to_string()))?;
        if doc.slice(a.span.start, a.span.end).as_deref() != Some(a.text.as_str()) {
            return Err(Error::integrity(a.id.as_str(), "text does not match the annotated span"));
        }
        for c in &a.code_ids {
            project.code(c).map_err(|_| Error::integrity(a.id.as_str(), format!("unknown code `{c}`")))?;
        }
    }

    for cell in &project.notebook.cells {
        unique(cell.id.as_str())?;
        if cell.kind == CellKind::Markdown && !cell.outputs.is_empty() {
            return Err(Error::integrity(cell.id.as_str(), "markdown cells have no outputs"));
        }
        if cell.content_hash != crate::notebook::source_hash(&cell.source) {
            return Err(Error::integrity(cell.id.as_str(), "content hash does not match source"));
        }
        if cell.outputs.iter().any(|o: &CellOutput| o.produced_by() != &cell.id) {
            return Err(Error::integrity(cell.id.as_str(), "output produced by another cell"));
        }
    }

    let canvas = &project.canvas;
    for block in &canvas.blocks {
        let id = block.id.as_str();
        unique(id)?;
        if block.sync_mode == SyncMode::Live && block.stale {
            return Err(Error::integrity(id, "a live block cannot be stale"));
        }
        if block.provenance.pipeline.is_empty() {
            return Err(Error::integrity(id, "provenance pipeline is empty"));
        }
        if !(block.size.w > 0.0 && block.size.h > 0.0) {
            return Err(Error::integrity(id, "block size must be positive"));
        }
        if !(block.position.x.is_finite() && block.position.y.is_finite()) {
            return Err(Error::integrity(id, "block position must be finite"));
        }
        if block.abstraction_level > 2 {
            return Err(Error::integrity(id, "abstraction level must be 0, 1 or 2"));
        }
        match &block.source_ref {
            BlockSource::Extract { selection } => {
                project.source(&selection.data_source_id).map(|_| ())
            }
            BlockSource::RowHistogram { data_source_id, .. } => project.source(data_source_id).map(|_| ()),
            BlockSource::CellOutput { cell_id, .. } => project.notebook.cell(cell_id).map(|_| ()),
            BlockSource::Note => Ok(()),
        }
        .map_err(|e| Error::integrity(id, e.to_string()))?;
    }
    for link in &canvas.links {
        let id = link.id.as_str();
        unique(id)?;
        if link.from.block_id == link.to.block_id {
            return Err(Error::integrity(id, "a link cannot join a block to itself"));
        }
        for anchor in [&link.from, &link.to] {
            canvas.block(&anchor.block_id).map_err(|e| Error::integrity(id, e.to_string()))?;
            if anchor.dangling == anchor_resolves(canvas, anchor) {
                return Err(Error::integrity(id, "anchor dangling flag is out of date"));
            }
        }
    }
    let mut placed = BTreeSet::new();
    for region in &canvas.regions {
        unique(region.id.as_str())?;
        if !(region.bounds.w > 0.0 && region.bounds.h > 0.0) {
            return Err(Error::integrity(region.id.as_str(), "region bounds must have a positive area"));
        }
        for member in &region.members {
            canvas.block(member).map_err(|e| Error::integrity(region.id.as_str(), e.to_string()))?;
            if !placed.insert(member) {
                return Err(Error::integrity(member.as_str(), "block belongs to more than one region"));
            }
        }
    }
    Ok(())
}

fn validate_table(table: &Table, unique: &mut impl FnMut(&str) -> Result<()>) -> Result<()> {
    unique(table.id.as_str())?;
    if table.rows.len() != table.row_ids.len() {
        return Err(Error::integrity(table.id.as_str(), "row ids and rows differ in length"));
    }
    let mut columns = BTreeSet::new();
    for c in &table.columns {
        if !columns.insert(c.name.as_str()) {
            return Err(Error::integrity(table.id.as_str(), format!("duplicate column `{}`", c.name)));
        }
    }
    let mut rows = BTreeSet::new();
    for (row_id, row) in table.row_ids.iter().zip(&table.rows) {
        if !rows.insert(row_id) {
            return Err(Error::integrity(table.id.as_str(), format!("duplicate row id `{row_id}`")));
        }
        if row.len() != table.columns.len() {
            return Err(Error::integrity(table.id.as_str(), format!("row `{row_id}` has the wrong arity")));
        }
        for (v, c) in row.iter().zip(&table.columns) {
            if !v.conforms_to(c.dtype) {
                return Err(Error::integrity(
                    table.id.as_str(),
                    format!("row `{row_id}` column `{}` is not {}", c.name, c.dtype.name()),
                ));
            }
        }
    }
    Ok(())
}
