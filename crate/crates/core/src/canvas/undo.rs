use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{BlockId, LinkId, RegionId};
use crate::model::Project;

use super::{Block, Link};

const UNDO_DEPTH: usize = 100;

/// Everything one `delete_block` took away, with original positions so that
/// undo restores the exact same canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub block_index: usize,
    pub block: Block,
    pub links: Vec<(usize, Link)>,
    pub memberships: Vec<(RegionId, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UndoLog {
    entries: Vec<Removal>,
}

impl UndoLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ids removed by a delete: the block first, then its links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removed {
    pub block_id: BlockId,
    pub link_ids: Vec<LinkId>,
}

impl Removed {
    pub fn count(&self) -> usize {
        1 + self.link_ids.len()
    }
}

pub fn delete_block(project: &mut Project, id: &BlockId, log: &mut UndoLog) -> Result<Removed> {
    let canvas = &mut project.canvas;
    let block_index =
        canvas.blocks.iter().position(|b| &b.id == id).ok_or_else(|| Error::reference("block", id.as_str()))?;
    let block = canvas.blocks.remove(block_index);

    let mut links = Vec::new();
    let mut kept = Vec::with_capacity(canvas.links.len());
    for (i, link) in std::mem::take(&mut canvas.links).into_iter().enumerate() {
        if &link.from.block_id == id || &link.to.block_id == id {
            links.push((i, link));
        } else {
            kept.push(link);
        }
    }
    canvas.links = kept;

    let mut memberships = Vec::new();
    for region in &mut canvas.regions {
        if let Some(pos) = region.members.iter().position(|m| m == id) {
            region.members.remove(pos);
            memberships.push((region.id.clone(), pos));
        }
    }

    let removed = Removed { block_id: block.id.clone(), link_ids: links.iter().map(|(_, l)| l.id.clone()).collect() };
    if log.entries.len() == UNDO_DEPTH {
        log.entries.remove(0);
    }
    log.entries.push(Removal { block_index, block, links, memberships });
    Ok(removed)
}

/// Reverts the most recent delete. Returns `None` when there is nothing to undo.
pub fn undo(project: &mut Project, log: &mut UndoLog) -> Result<Option<Removal>> {
    let Some(removal) = log.entries.pop() else {
        return Ok(None);
    };
    let canvas = &mut project.canvas;
    if canvas.blocks.iter().any(|b| b.id == removal.block.id) {
        return Err(Error::Conflict(format!("block `{}` already exists", removal.block.id)));
    }
    let at = removal.block_index.min(canvas.blocks.len());
    canvas.blocks.insert(at, removal.block.clone());
    for (i, link) in &removal.links {
        let at = (*i).min(canvas.links.len());
        canvas.links.insert(at, link.clone());
    }
    for (region_id, pos) in &removal.memberships {
        if let Some(region) = canvas.regions.iter_mut().find(|r| &r.id == region_id) {
            let at = (*pos).min(region.members.len());
            region.members.insert(at, removal.block.id.clone());
        }
    }
    super::refresh_dangling(project);
    Ok(Some(removal))
}
