//! Data integration and interpretation: a canvas of provenance-stamped blocks,
//! links between whole blocks or parts of them, regions, unwinding of
//! aggregates, and synchronisation with upstream data.
//!
//! Canvas units are abstract floats with the origin at the top left and y
//! growing downwards.

mod block;
mod links;
mod regions;
mod sync;
mod undo;
mod unwind;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foraging::Selection;
use crate::ids::*;
use crate::model::{OriginDescriptor, OriginMethod, Span};
use crate::notebook::{ChartSpec, Frame, PipelineStep, Value};

pub use block::{
    create_block, create_note, get_provenance, materialize, move_block, resize_block, set_sync_mode, BlockInput,
    Materialized,
};
pub use links::{anchor_resolves, chain_paths, create_link, refresh_dangling, ChainPath, MAX_CHAIN_DEPTH};
pub use regions::{assign_to_region, create_region};
pub use sync::{on_upstream_change, sync_all, upstream_hash, BlockUpdate, SyncOutcome, UpstreamChange, UpstreamRef};
pub use undo::{delete_block, undo, Removal, Removed, UndoLog};
pub use unwind::{accept_suggestion, unwind, BlockDescriptor, UnwindFlag, UnwindResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub blocks: Vec<Block>,
    pub links: Vec<Link>,
    pub regions: Vec<Region>,
}

impl Canvas {
    pub fn block(&self, id: &BlockId) -> Result<&Block> {
        self.blocks.iter().find(|b| &b.id == id).ok_or_else(|| Error::reference("block", id.as_str()))
    }

    pub fn block_mut(&mut self, id: &BlockId) -> Result<&mut Block> {
        self.blocks.iter_mut().find(|b| &b.id == id).ok_or_else(|| Error::reference("block", id.as_str()))
    }

    pub fn region_of(&self, block: &BlockId) -> Option<&Region> {
        self.regions.iter().find(|r| r.members.contains(block))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Quote,
    TableSlice,
    Datapoint,
    Chart,
    Note,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Quote => "quote",
            BlockKind::TableSlice => "table_slice",
            BlockKind::Datapoint => "datapoint",
            BlockKind::Chart => "chart",
            BlockKind::Note => "note",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncMode {
    /// Re-materialises whenever its source changes.
    #[default]
    Live,
    /// Keeps its payload and raises `stale` when the source moves on.
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub w: f64,
    pub h: f64,
}

impl Size {
    pub fn new(w: f64, h: f64) -> Self {
        Self { w, h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockPayload {
    Quote { document_id: DocumentId, span: Span, text: String },
    TableSlice { frame: Box<Frame> },
    Datapoint { value: Value, row_id: Option<RowId>, column: Option<String> },
    Chart { chart: Box<ChartSpec> },
    Note { text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceComponent {
    Foraging,
    Notebook,
    Canvas,
}

/// Where a block's payload comes from, precise enough to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockSource {
    Extract { selection: Selection },
    CellOutput { cell_id: CellId, output_index: usize },
    /// A histogram over a fixed set of rows, produced by unwinding an aggregate.
    RowHistogram {
        data_source_id: DataSourceId,
        column: String,
        row_ids: Vec<RowId>,
        scope: String,
    },
    Note,
}

impl BlockSource {
    pub fn component(&self) -> SourceComponent {
        match self {
            BlockSource::Extract { .. } => SourceComponent::Foraging,
            BlockSource::CellOutput { .. } | BlockSource::RowHistogram { .. } => SourceComponent::Notebook,
            BlockSource::Note => SourceComponent::Canvas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStamp {
    pub origin: OriginDescriptor,
    pub pipeline: Vec<PipelineStep>,
    pub source_names: Vec<String>,
    pub icon_key: String,
}

pub fn icon_key(method: OriginMethod) -> &'static str {
    method.as_str()
}

impl ProvenanceStamp {
    pub fn new(origin: OriginDescriptor, pipeline: Vec<PipelineStep>, source_names: Vec<String>) -> Self {
        let icon_key = icon_key(origin.method).to_owned();
        Self { origin, pipeline, source_names, icon_key }
    }

    /// One-line caption, e.g. `interview · P2 — import → unwind`.
    pub fn caption(&self) -> String {
        let mut who = self.origin.method.as_str().replace('_', " ");
        if let Some(p) = &self.origin.participant {
            who.push_str(" · ");
            who.push_str(p);
        }
        let steps: Vec<&str> = self.pipeline.iter().map(|s| s.op.as_str()).collect();
        format!("{who} — {}", steps.join(" → "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub kind: BlockKind,
    pub payload: BlockPayload,
    pub source_ref: BlockSource,
    pub provenance: ProvenanceStamp,
    /// 0 raw datum or quote, 1 per-row mark or slice, 2 aggregate.
    pub abstraction_level: u8,
    pub position: Point,
    pub size: Size,
    pub sync_mode: SyncMode,
    pub stale: bool,
    pub upstream_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Subregion {
    TextRange { start: usize, end: usize },
    Element { element_id: ElementId },
    Cell { row_id: RowId, column: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub block_id: BlockId,
    #[serde(default)]
    pub subregion: Option<Subregion>,
    /// Set when the subregion no longer exists in the block's payload.
    #[serde(default)]
    pub dangling: bool,
}

impl Anchor {
    pub fn block(block_id: impl Into<BlockId>) -> Self {
        Self { block_id: block_id.into(), subregion: None, dangling: false }
    }

    pub fn element(block_id: impl Into<BlockId>, element_id: impl Into<ElementId>) -> Self {
        Self {
            block_id: block_id.into(),
            subregion: Some(Subregion::Element { element_id: element_id.into() }),
            dangling: false,
        }
    }

    pub fn text_range(block_id: impl Into<BlockId>, start: usize, end: usize) -> Self {
        Self { block_id: block_id.into(), subregion: Some(Subregion::TextRange { start, end }), dangling: false }
    }

    pub fn cell(block_id: impl Into<BlockId>, row_id: impl Into<RowId>, column: impl Into<String>) -> Self {
        Self {
            block_id: block_id.into(),
            subregion: Some(Subregion::Cell { row_id: row_id.into(), column: column.into() }),
            dangling: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: Anchor,
    pub to: Anchor,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    pub name: String,
    pub bounds: Rect,
    pub members: Vec<BlockId>,
}
