use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{BlockId, LinkId};
use crate::model::Project;

use super::{Anchor, Block, BlockPayload, Canvas, Link, Subregion};

/// Longest chain, in links, that [`chain_paths`] follows.
pub const MAX_CHAIN_DEPTH: usize = 8;

fn subregion_resolves(block: &Block, subregion: &Subregion) -> bool {
    match (subregion, &block.payload) {
        (Subregion::TextRange { start, end }, BlockPayload::Quote { text, .. } | BlockPayload::Note { text }) => {
            start < end && *end <= text.chars().count()
        }
        (Subregion::Element { element_id }, BlockPayload::Chart { chart }) => chart.mark(element_id).is_some(),
        (Subregion::Cell { row_id, column }, BlockPayload::TableSlice { frame }) => {
            frame.row_ids.contains(row_id) && frame.column_index(column).is_ok()
        }
        _ => false,
    }
}

/// Whether the anchor's block exists and its subregion, if any, is present in
/// the block's current payload.
pub fn anchor_resolves(canvas: &Canvas, anchor: &Anchor) -> bool {
    match canvas.block(&anchor.block_id) {
        Ok(block) => anchor.subregion.as_ref().is_none_or(|s| subregion_resolves(block, s)),
        Err(_) => false,
    }
}

fn check_anchor(canvas: &Canvas, anchor: &Anchor) -> Result<Anchor> {
    let block = canvas.block(&anchor.block_id)?;
    if let Some(sub) = &anchor.subregion {
        if !subregion_resolves(block, sub) {
            let what = match sub {
                Subregion::TextRange { start, end } => format!("text range ({start}, {end})"),
                Subregion::Element { element_id } => format!("element `{element_id}`"),
                Subregion::Cell { row_id, column } => format!("cell ({row_id}, {column})"),
            };
            return Err(Error::Anchor(format!("{what} does not exist in block `{}`", block.id)));
        }
    }
    Ok(Anchor { dangling: false, ..anchor.clone() })
}

pub fn create_link(project: &mut Project, from: &Anchor, to: &Anchor, label: Option<&str>) -> Result<Link> {
    let from = check_anchor(&project.canvas, from)?;
    let to = check_anchor(&project.canvas, to)?;
    if from.block_id == to.block_id {
        return Err(Error::Validation(format!("block `{}` cannot link to itself", from.block_id)));
    }
    let link = Link {
        id: LinkId(project.fresh_id("lnk")),
        from,
        to,
        label: label.map(str::to_owned).filter(|l| !l.is_empty()),
    };
    project.canvas.links.push(link.clone());
    Ok(link)
}

/// Recomputes every anchor's dangling flag. Returns the links whose flags
/// changed.
pub fn refresh_dangling(project: &mut Project) -> Vec<LinkId> {
    let canvas = &project.canvas;
    let flags: Vec<(bool, bool)> = canvas
        .links
        .iter()
        .map(|l| (!anchor_resolves(canvas, &l.from), !anchor_resolves(canvas, &l.to)))
        .collect();
    let mut changed = Vec::new();
    for (link, (from, to)) in project.canvas.links.iter_mut().zip(flags) {
        if link.from.dangling != from || link.to.dangling != to {
            link.from.dangling = from;
            link.to.dangling = to;
            changed.push(link.id.clone());
        }
    }
    changed
}

/// A maximal chain of linked blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPath {
    pub blocks: Vec<BlockId>,
    /// `links[i]` joins `blocks[i]` to `blocks[i + 1]`.
    pub links: Vec<LinkId>,
}

/// Every simple path that starts at `start` and cannot be extended, following
/// links in creation order and at most [`MAX_CHAIN_DEPTH`] links deep.
pub fn chain_paths(canvas: &Canvas, start: &BlockId) -> Result<Vec<ChainPath>> {
    canvas.block(start)?;
    let mut outgoing: BTreeMap<&BlockId, Vec<&Link>> = BTreeMap::new();
    for link in &canvas.links {
        outgoing.entry(&link.from.block_id).or_default().push(link);
    }
    let mut paths = Vec::new();
    let mut current = ChainPath { blocks: vec![start.clone()], links: Vec::new() };
    walk(&outgoing, &mut current, &mut paths);
    Ok(paths)
}

fn walk(outgoing: &BTreeMap<&BlockId, Vec<&Link>>, current: &mut ChainPath, out: &mut Vec<ChainPath>) {
    let last = current.blocks.last().expect("path is never empty");
    let next: Vec<&Link> = if current.links.len() < MAX_CHAIN_DEPTH {
        outgoing
            .get(last)
            .map(|links| links.iter().copied().filter(|l| !current.blocks.contains(&l.to.block_id)).collect())
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    if next.is_empty() {
        if !current.links.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    for link in next {
        current.blocks.push(link.to.block_id.clone());
        current.links.push(link.id.clone());
        walk(outgoing, current, out);
        current.blocks.pop();
        current.links.pop();
    }
}
