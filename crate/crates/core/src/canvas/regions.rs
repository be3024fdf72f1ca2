use crate::error::{Error, Result};
use crate::ids::{BlockId, RegionId};
use crate::model::Project;

use super::{Rect, Region};

pub fn create_region(project: &mut Project, name: &str, bounds: Rect) -> Result<Region> {
    let finite = [bounds.x, bounds.y, bounds.w, bounds.h].iter().all(|v| v.is_finite());
    if !finite || bounds.w <= 0.0 || bounds.h <= 0.0 {
        return Err(Error::Validation("region bounds must have a positive area".into()));
    }
    let region = Region { id: RegionId(project.fresh_id("rgn")), name: name.to_owned(), bounds, members: Vec::new() };
    project.canvas.regions.push(region.clone());
    Ok(region)
}

/// Puts a block in a region, taking it out of whichever region held it before.
pub fn assign_to_region(project: &mut Project, block: &BlockId, region: &RegionId) -> Result<Region> {
    project.canvas.block(block)?;
    let target = project
        .canvas
        .regions
        .iter()
        .position(|r| &r.id == region)
        .ok_or_else(|| Error::reference("region", region.as_str()))?;
    for (i, r) in project.canvas.regions.iter_mut().enumerate() {
        if i != target {
            r.members.retain(|m| m != block);
        }
    }
    let r = &mut project.canvas.regions[target];
    if !r.members.contains(block) {
        r.members.push(block.clone());
    }
    Ok(r.clone())
}
