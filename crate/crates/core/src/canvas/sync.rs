use serde::{Deserialize, Serialize};

use crate::ids::{BlockId, CellId, DataSourceId, LinkId};
use crate::model::Project;

use super::{materialize, refresh_dangling, Block, BlockSource, SyncMode};

/// Something a block can depend on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum UpstreamRef {
    Source(DataSourceId),
    Cell(CellId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpstreamChange {
    pub target: UpstreamRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockUpdate {
    pub block_id: BlockId,
    pub payload_changed: bool,
    pub stale: bool,
    /// Set when the source could no longer be recomputed; the payload is kept.
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncOutcome {
    /// Blocks whose payload or stale flag changed.
    pub updates: Vec<BlockUpdate>,
    /// Links whose dangling flags changed.
    pub dangling_changed: Vec<LinkId>,
}

fn depends_on(block: &Block, target: &UpstreamRef) -> bool {
    match (&block.source_ref, target) {
        (BlockSource::Extract { selection }, UpstreamRef::Source(id)) => &selection.data_source_id == id,
        (BlockSource::RowHistogram { data_source_id, .. }, UpstreamRef::Source(id)) => data_source_id == id,
        (BlockSource::CellOutput { cell_id, .. }, UpstreamRef::Cell(id)) => cell_id == id,
        _ => false,
    }
}

/// Hash of what the block's source yields now, if it still resolves.
pub fn upstream_hash(project: &Project, block: &Block) -> Option<String> {
    materialize(project, &block.source_ref).ok().map(|m| m.hash())
}

fn sync_blocks(project: &mut Project, pick: impl Fn(&Block) -> bool) -> SyncOutcome {
    let mut updates = Vec::new();
    for i in 0..project.canvas.blocks.len() {
        let block = &project.canvas.blocks[i];
        if matches!(block.source_ref, BlockSource::Note) || !pick(block) {
            continue;
        }
        let fresh = materialize(project, &block.source_ref);
        let block = &mut project.canvas.blocks[i];
        let (payload_changed, stale, error) = match (block.sync_mode, fresh) {
            (SyncMode::Live, Ok(m)) => {
                let hash = m.hash();
                let changed = hash != block.upstream_hash;
                block.payload = m.payload;
                block.abstraction_level = m.abstraction_level;
                block.upstream_hash = hash;
                (changed, false, None)
            }
            (SyncMode::Live, Err(e)) => (false, false, Some(e.to_string())),
            (SyncMode::Snapshot, Ok(m)) => (false, m.hash() != block.upstream_hash, None),
            (SyncMode::Snapshot, Err(e)) => (false, true, Some(e.to_string())),
        };
        let stale_changed = block.stale != stale;
        block.stale = stale;
        if payload_changed || stale_changed || error.is_some() {
            updates.push(BlockUpdate { block_id: block.id.clone(), payload_changed, stale, error });
        }
    }
    let dangling_changed = refresh_dangling(project);
    SyncOutcome { updates, dangling_changed }
}

/// Brings the blocks that depend on `change.target` up to date: live blocks
/// take the recomputed payload, snapshot blocks keep theirs and become stale
/// exactly when the recomputation differs from what they hold.
pub fn on_upstream_change(project: &mut Project, change: &UpstreamChange) -> SyncOutcome {
    sync_blocks(project, |b| depends_on(b, &change.target))
}

/// [`on_upstream_change`] for every block on the canvas.
pub fn sync_all(project: &mut Project) -> SyncOutcome {
    sync_blocks(project, |_| true)
}
