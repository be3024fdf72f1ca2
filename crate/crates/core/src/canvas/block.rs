use serde::{Deserialize, Serialize};

use crate::canonical::content_hash;
use crate::error::{Error, Result};
use crate::foraging::{make_extract, ExtractContent, Selection};
use crate::ids::{BlockId, CellId};
use crate::model::{OriginDescriptor, OriginMethod, Project};
use crate::notebook::ops::{default_bins, histogram};
use crate::notebook::{CellOutput, Derivation, Frame, PipelineStep};

use super::{
    refresh_dangling, Block, BlockKind, BlockPayload, BlockSource, Point, ProvenanceStamp, Size,
    SyncMode,
};

/// What the analyst dropped on the canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockInput {
    Extract { selection: Selection },
    CellOutput { cell_id: CellId, output_index: usize },
}

/// A freshly computed payload for a block source.
#[derive(Debug, Clone, PartialEq)]
pub struct Materialized {
    pub kind: BlockKind,
    pub payload: BlockPayload,
    pub abstraction_level: u8,
}

impl Materialized {
    pub fn hash(&self) -> String {
        content_hash(&self.payload)
    }
}

fn default_size(kind: BlockKind) -> Size {
    match kind {
        BlockKind::Quote => Size::new(240.0, 120.0),
        BlockKind::TableSlice => Size::new(320.0, 200.0),
        BlockKind::Datapoint => Size::new(120.0, 80.0),
        BlockKind::Chart => Size::new(360.0, 240.0),
        BlockKind::Note => Size::new(200.0, 120.0),
    }
}

fn table_slice_level(frame: &Frame) -> u8 {
    if frame.aggregate {
        2
    } else {
        1
    }
}

/// Recomputes the payload a source currently yields.
pub fn materialize(project: &Project, source: &BlockSource) -> Result<Materialized> {
    match source {
        BlockSource::Extract { selection } => {
            let extract = make_extract(project, selection)?;
            Ok(match extract.content {
                ExtractContent::Quote { document_id, span, text } => Materialized {
                    kind: BlockKind::Quote,
                    payload: BlockPayload::Quote { document_id, span, text },
                    abstraction_level: 0,
                },
                ExtractContent::TableSlice { table } => {
                    let source = project.source(&selection.data_source_id)?;
                    let mut frame = Frame::from_table(source, &table);
                    frame.derivation = frame.derivation.then(PipelineStep::new("select", table.row_ids.iter().map(|r| r.to_string())));
                    Materialized {
                        kind: BlockKind::TableSlice,
                        abstraction_level: table_slice_level(&frame),
                        payload: BlockPayload::TableSlice { frame: Box::new(frame) },
                    }
                }
                ExtractContent::Datapoint { row_id, column, value } => Materialized {
                    kind: BlockKind::Datapoint,
                    payload: BlockPayload::Datapoint { value: (&value).into(), row_id: Some(row_id), column: Some(column) },
                    abstraction_level: 0,
                },
            })
        }
        BlockSource::CellOutput { cell_id, output_index } => {
            let cell = project.notebook.cell(cell_id)?;
            let output = cell
                .outputs
                .get(*output_index)
                .ok_or_else(|| Error::reference("cell output", format!("{cell_id}[{output_index}]")))?;
            Ok(match output {
                CellOutput::Chart { payload, .. } => Materialized {
                    kind: BlockKind::Chart,
                    abstraction_level: payload.abstraction_level,
                    payload: BlockPayload::Chart { chart: payload.clone() },
                },
                CellOutput::Table { payload, .. } => Materialized {
                    kind: BlockKind::TableSlice,
                    abstraction_level: table_slice_level(payload),
                    payload: BlockPayload::TableSlice { frame: payload.clone() },
                },
                CellOutput::Value { payload, .. } => Materialized {
                    kind: BlockKind::Datapoint,
                    payload: BlockPayload::Datapoint { value: payload.clone(), row_id: None, column: None },
                    abstraction_level: 0,
                },
                CellOutput::Error { .. } => {
                    return Err(Error::Validation(format!("output {output_index} of `{cell_id}` is an error")))
                }
            })
        }
        BlockSource::RowHistogram { data_source_id, column, row_ids, scope } => {
            let source = project.source(data_source_id)?;
            let table = source.table().ok_or_else(|| Error::reference("table", data_source_id.as_str()))?;
            let full = Frame::from_table(source, table);
            let keep: Vec<usize> = row_ids.iter().filter_map(|r| table.row_index(r)).collect();
            let rows = full.select(&keep, PipelineStep::new("select", row_ids.iter().map(|r| r.to_string())));
            let chart = histogram(&rows, column, default_bins(&rows, column), None, scope)?;
            Ok(Materialized {
                kind: BlockKind::Chart,
                abstraction_level: chart.abstraction_level,
                payload: BlockPayload::Chart { chart: Box::new(chart) },
            })
        }
        BlockSource::Note => Err(Error::Validation("notes have no upstream source".into())),
    }
}

/// Provenance for a derivation: origin of the first source, every source name,
/// and the pipeline.
pub(crate) fn stamp_for(project: &Project, derivation: &Derivation) -> ProvenanceStamp {
    let sources: Vec<_> = derivation.sources.iter().filter_map(|id| project.source(id).ok()).collect();
    let origin = sources
        .first()
        .map(|s| s.origin.clone())
        .unwrap_or_else(|| OriginDescriptor::new(OriginMethod::Other));
    let mut pipeline = derivation.pipeline.clone();
    if pipeline.is_empty() {
        pipeline.push(PipelineStep::new("import", sources.iter().map(|s| s.name.clone())));
    }
    ProvenanceStamp::new(origin, pipeline, sources.iter().map(|s| s.name.clone()).collect())
}

fn provenance_for_input(project: &Project, input: &BlockInput) -> Result<ProvenanceStamp> {
    match input {
        BlockInput::Extract { selection } => {
            let source = project.source(&selection.data_source_id)?;
            Ok(ProvenanceStamp::new(
                source.origin.clone(),
                vec![PipelineStep::new("import", [source.name.clone()])],
                vec![source.name.clone()],
            ))
        }
        BlockInput::CellOutput { cell_id, output_index } => {
            let cell = project.notebook.cell(cell_id)?;
            let derivation = match cell.outputs.get(*output_index) {
                Some(CellOutput::Chart { payload, .. }) => payload.derivation.clone(),
                Some(CellOutput::Table { payload, .. }) => payload.derivation.clone(),
                Some(CellOutput::Value { payload: crate::notebook::Value::Docs(d), .. }) => d.derivation.clone(),
                _ => Derivation {
                    sources: Vec::new(),
                    pipeline: vec![PipelineStep::new("cell", [cell_id.to_string()])],
                },
            };
            Ok(stamp_for(project, &derivation))
        }
    }
}

fn check_position(position: Point) -> Result<()> {
    if !(position.x.is_finite() && position.y.is_finite()) {
        return Err(Error::Validation("position must be finite".into()));
    }
    Ok(())
}

pub(crate) fn insert_block(
    project: &mut Project,
    materialized: Materialized,
    source_ref: BlockSource,
    provenance: ProvenanceStamp,
    position: Point,
    sync_mode: SyncMode,
) -> Result<Block> {
    check_position(position)?;
    let upstream_hash = materialized.hash();
    let block = Block {
        id: BlockId(project.fresh_id("blk")),
        kind: materialized.kind,
        size: default_size(materialized.kind),
        payload: materialized.payload,
        source_ref,
        provenance,
        abstraction_level: materialized.abstraction_level,
        position,
        sync_mode,
        stale: false,
        upstream_hash,
    };
    project.canvas.blocks.push(block.clone());
    Ok(block)
}

/// Drops a foraging selection or a cell output onto the canvas.
pub fn create_block(project: &mut Project, input: &BlockInput, position: Point, sync_mode: SyncMode) -> Result<Block> {
    let source_ref = match input.clone() {
        BlockInput::Extract { selection } => BlockSource::Extract { selection },
        BlockInput::CellOutput { cell_id, output_index } => BlockSource::CellOutput { cell_id, output_index },
    };
    let materialized = materialize(project, &source_ref)?;
    let provenance = provenance_for_input(project, input)?;
    insert_block(project, materialized, source_ref, provenance, position, sync_mode)
}

pub fn create_note(project: &mut Project, text: &str, position: Point) -> Result<Block> {
    check_position(position)?;
    let provenance = ProvenanceStamp::new(
        OriginDescriptor::new(OriginMethod::Other),
        vec![PipelineStep::new("note", Vec::<String>::new())],
        Vec::new(),
    );
    let payload = BlockPayload::Note { text: text.to_owned() };
    let block = Block {
        id: BlockId(project.fresh_id("blk")),
        kind: BlockKind::Note,
        upstream_hash: content_hash(&payload),
        payload,
        source_ref: BlockSource::Note,
        provenance,
        abstraction_level: 0,
        position,
        size: default_size(BlockKind::Note),
        sync_mode: SyncMode::Snapshot,
        stale: false,
    };
    project.canvas.blocks.push(block.clone());
    Ok(block)
}

pub fn move_block(project: &mut Project, id: &BlockId, position: Point) -> Result<Block> {
    check_position(position)?;
    let block = project.canvas.block_mut(id)?;
    block.position = position;
    Ok(block.clone())
}

pub fn resize_block(project: &mut Project, id: &BlockId, size: Size) -> Result<Block> {
    let block = project.canvas.block_mut(id)?;
    if !(size.w.is_finite() && size.h.is_finite() && size.w > 0.0 && size.h > 0.0) {
        return Err(Error::Validation(format!("block size must be positive, got ({}, {})", size.w, size.h)));
    }
    block.size = size;
    Ok(block.clone())
}

/// Switching to live re-materialises immediately; switching to snapshot keeps
/// the current payload.
pub fn set_sync_mode(project: &mut Project, id: &BlockId, mode: SyncMode) -> Result<Block> {
    let block = project.canvas.block(id)?.clone();
    if block.sync_mode == mode {
        return Ok(block);
    }
    let fresh = match (&block.source_ref, mode) {
        (BlockSource::Note, SyncMode::Live) => {
            return Err(Error::Validation("note blocks have no source to follow".into()))
        }
        (_, SyncMode::Live) => materialize(project, &block.source_ref).ok(),
        _ => None,
    };
    let b = project.canvas.block_mut(id)?;
    b.sync_mode = mode;
    if let Some(m) = fresh {
        b.upstream_hash = m.hash();
        b.payload = m.payload;
    }
    b.stale = false;
    let out = b.clone();
    refresh_dangling(project);
    Ok(out)
}

pub fn get_provenance(project: &Project, id: &BlockId) -> Result<ProvenanceStamp> {
    Ok(project.canvas.block(id)?.provenance.clone())
}
