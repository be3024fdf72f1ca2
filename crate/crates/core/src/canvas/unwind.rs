use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foraging::{Selection, SelectionTarget};
use crate::ids::{DocumentId, RowId, TableId};
use crate::model::{Project, Span};
use crate::notebook::{Lineage, LineageRef, Measure, PipelineStep, Statistic};

use super::block::insert_block;
use super::{
    create_link, materialize, Anchor, Block, BlockKind, BlockPayload, BlockSource, Link, Point, ProvenanceStamp,
    Subregion, SyncMode,
};

/// A block the analyst may add, one abstraction level below its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDescriptor {
    pub kind: BlockKind,
    pub payload: BlockPayload,
    pub source_ref: BlockSource,
    pub provenance: ProvenanceStamp,
    pub abstraction_level: u8,
}

/// Why an unwind came back empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UnwindFlag {
    /// The lineage rows' table has no join-key column.
    MissingJoinKey { table_id: TableId, column: String },
    /// No document's participant matches any lineage row.
    NoMatchingDocuments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnwindResult {
    pub descriptors: Vec<BlockDescriptor>,
    #[serde(default)]
    pub flag: Option<UnwindFlag>,
}

struct Target<'a> {
    block: &'a Block,
    key: String,
    lineage: Lineage,
    /// Raw column the anchored value summarises, when known.
    value_column: Option<String>,
}

fn resolve_target<'a>(project: &'a Project, anchor: &Anchor) -> Result<Target<'a>> {
    let block = project.canvas.block(&anchor.block_id)?;
    let none = || Error::NoLineage(anchor.block_id.to_string());
    match (&anchor.subregion, &block.payload) {
        (Some(Subregion::Element { element_id }), BlockPayload::Chart { chart }) => {
            let mark = chart
                .mark(element_id)
                .ok_or_else(|| Error::Anchor(format!("element `{element_id}` does not exist in block `{}`", block.id)))?;
            let value_column = match &chart.statistic {
                Statistic::Median { column } => Some(column.clone()),
                _ => chart.value_column.clone(),
            };
            Ok(Target { block, key: element_id.to_string(), lineage: mark.lineage.clone(), value_column })
        }
        (Some(Subregion::Cell { row_id, column }), BlockPayload::TableSlice { frame }) => {
            let i = frame
                .row_ids
                .iter()
                .position(|r| r == row_id)
                .ok_or_else(|| Error::Anchor(format!("row `{row_id}` does not exist in block `{}`", block.id)))?;
            frame.column_index(column)?;
            let value_column = match frame.measures.get(column) {
                Some(Measure::Median { column }) => Some(column.clone()),
                Some(Measure::Count) => None,
                None => Some(column.clone()),
            };
            Ok(Target { block, key: row_id.to_string(), lineage: frame.lineage[i].clone(), value_column })
        }
        _ => Err(none()),
    }
    .and_then(|t| if t.lineage.is_empty() { Err(none()) } else { Ok(t) })
}

fn child_stamp(parent: &Block, step_arg: &str, origin: crate::model::OriginDescriptor, source_name: &str) -> ProvenanceStamp {
    let mut pipeline = parent.provenance.pipeline.clone();
    pipeline.push(PipelineStep::new("unwind", [step_arg]));
    ProvenanceStamp::new(origin, pipeline, vec![source_name.to_owned()])
}

/// Lineage rows grouped by table, each group in table order.
fn rows_by_table(project: &Project, lineage: &Lineage) -> Result<Vec<(TableId, Vec<RowId>)>> {
    let mut groups: BTreeMap<TableId, Vec<RowId>> = BTreeMap::new();
    for l in lineage {
        if let LineageRef::Row { table_id, row_id } = l {
            groups.entry(table_id.clone()).or_default().push(row_id.clone());
        }
    }
    let mut out = Vec::new();
    for (table_id, mut rows) in groups {
        let (_, table) = project.table(&table_id)?;
        rows.sort_by_key(|r| table.row_index(r).unwrap_or(usize::MAX));
        out.push((table_id, rows));
    }
    Ok(out)
}

fn describe(project: &Project, source_ref: BlockSource, provenance: ProvenanceStamp) -> Result<BlockDescriptor> {
    let m = materialize(project, &source_ref)?;
    Ok(BlockDescriptor {
        kind: m.kind,
        payload: m.payload,
        source_ref,
        provenance,
        abstraction_level: m.abstraction_level,
    })
}

/// Level-2 row lineage: a histogram of the summarised column over exactly
/// the lineage rows, and the rows themselves as a slice.
fn unwind_aggregate(project: &Project, target: &Target) -> Result<Vec<BlockDescriptor>> {
    let mut out = Vec::new();
    for (table_id, row_ids) in rows_by_table(project, &target.lineage)? {
        let (source, table) = project.table(&table_id)?;
        let stamp = child_stamp(target.block, &target.key, source.origin.clone(), &source.name);
        if let Some(column) = &target.value_column {
            let numeric = table.columns.iter().any(|c| &c.name == column && c.dtype.is_numeric());
            if numeric {
                let hist = BlockSource::RowHistogram {
                    data_source_id: source.id.clone(),
                    column: column.clone(),
                    row_ids: row_ids.clone(),
                    scope: format!("{}:{}", target.block.id, target.key),
                };
                out.push(describe(project, hist, stamp.clone())?);
            }
        }
        let slice = BlockSource::Extract {
            selection: Selection { data_source_id: source.id.clone(), target: SelectionTarget::Rows { row_ids } },
        };
        out.push(describe(project, slice, stamp)?);
    }
    Ok(out)
}

fn quote(project: &Project, parent: &Block, key: &str, document_id: &DocumentId, span: Span) -> Result<BlockDescriptor> {
    let (source, _) = project.document(document_id)?;
    let stamp = child_stamp(parent, key, source.origin.clone(), &source.name);
    let selection = Selection {
        data_source_id: source.id.clone(),
        target: SelectionTarget::Span { start: span.start, end: span.end },
    };
    describe(project, BlockSource::Extract { selection }, stamp)
}

/// Quotes for a document: one per annotation, or the whole text when it has
/// none.
fn document_quotes(project: &Project, parent: &Block, key: &str, document_id: &DocumentId, length: usize) -> Result<Vec<BlockDescriptor>> {
    let mut spans: Vec<Span> =
        project.annotations.iter().filter(|a| &a.document_id == document_id).map(|a| a.span).collect();
    spans.sort();
    spans.dedup();
    if spans.is_empty() && length > 0 {
        spans.push(Span::new(0, length));
    }
    spans.into_iter().map(|s| quote(project, parent, key, document_id, s)).collect()
}

/// Level-1 row lineage: join rows to documents through the join key.
fn unwind_rows(project: &Project, target: &Target) -> Result<UnwindResult> {
    let key_column = &project.settings.join_key;
    let mut participants: Vec<String> = Vec::new();
    for (table_id, row_ids) in rows_by_table(project, &target.lineage)? {
        let (_, table) = project.table(&table_id)?;
        if table.column_index(key_column).is_none() {
            return Ok(UnwindResult {
                descriptors: Vec::new(),
                flag: Some(UnwindFlag::MissingJoinKey { table_id, column: key_column.clone() }),
            });
        }
        for row in &row_ids {
            if let Some(v) = table.cell(row, key_column).filter(|v| !v.is_null()) {
                let p = v.to_string();
                if !participants.contains(&p) {
                    participants.push(p);
                }
            }
        }
    }
    let mut descriptors = Vec::new();
    for p in &participants {
        for (source, doc) in project.documents() {
            if source.origin.participant.as_deref() == Some(p.as_str()) {
                descriptors.extend(document_quotes(project, target.block, &target.key, &doc.id, doc.length)?);
            }
        }
    }
    let flag = descriptors.is_empty().then_some(UnwindFlag::NoMatchingDocuments);
    Ok(UnwindResult { descriptors, flag })
}

fn is_boundary(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\n')
}

/// The sentence around `[start, end)`, trimmed of surrounding whitespace.
fn sentence_span(chars: &[char], start: usize, end: usize) -> Span {
    let mut s = start;
    while s > 0 && !is_boundary(chars[s - 1]) {
        s -= 1;
    }
    let mut e = end;
    while e < chars.len() && !is_boundary(chars[e]) {
        e += 1;
    }
    if e < chars.len() && chars[e] != '\n' {
        e += 1;
    }
    while s < e && chars[s].is_whitespace() {
        s += 1;
    }
    while e > s && chars[e - 1].is_whitespace() {
        e -= 1;
    }
    Span::new(s, e)
}

/// Token and annotation lineage points straight at text.
fn unwind_text(project: &Project, target: &Target) -> Result<Vec<BlockDescriptor>> {
    let mut spans: Vec<(DocumentId, Span)> = Vec::new();
    for l in &target.lineage {
        let item = match l {
            LineageRef::Token { document_id, start, end } => {
                let (_, doc) = project.document(document_id)?;
                let chars: Vec<char> = doc.content.chars().collect();
                (document_id.clone(), sentence_span(&chars, *start, (*end).min(chars.len())))
            }
            LineageRef::Annotation { annotation_id } => {
                let a = project
                    .annotations
                    .iter()
                    .find(|a| &a.id == annotation_id)
                    .ok_or_else(|| Error::reference("annotation", annotation_id.as_str()))?;
                (a.document_id.clone(), a.span)
            }
            LineageRef::Row { .. } => continue,
        };
        if item.1.start < item.1.end && !spans.contains(&item) {
            spans.push(item);
        }
    }
    spans.into_iter().map(|(d, s)| quote(project, target.block, &target.key, &d, s)).collect()
}

/// Suggestions one step down the abstraction ladder from a chart mark or a
/// table row. Nothing is added to the canvas until a suggestion is accepted.
pub fn unwind(project: &Project, anchor: &Anchor) -> Result<UnwindResult> {
    let target = resolve_target(project, anchor)?;
    let has_rows = target.lineage.iter().any(|l| matches!(l, LineageRef::Row { .. }));
    let has_text = target.lineage.iter().any(|l| !matches!(l, LineageRef::Row { .. }));
    let mut result = if !has_rows {
        UnwindResult { descriptors: Vec::new(), flag: None }
    } else if target.block.abstraction_level >= 2 {
        UnwindResult { descriptors: unwind_aggregate(project, &target)?, flag: None }
    } else {
        unwind_rows(project, &target)?
    };
    if has_text {
        result.descriptors.extend(unwind_text(project, &target)?);
    }
    let level = target.block.abstraction_level;
    result.descriptors.retain(|d| d.abstraction_level < level);
    Ok(result)
}

/// Adds a suggestion to the canvas and links the anchor it came from to the
/// new block. The payload is recomputed from the descriptor's source.
pub fn accept_suggestion(
    project: &mut Project,
    parent: &Anchor,
    descriptor: &BlockDescriptor,
    position: Point,
    sync_mode: SyncMode,
) -> Result<(Block, Link)> {
    let parent_level = project.canvas.block(&parent.block_id)?.abstraction_level;
    if !super::anchor_resolves(&project.canvas, parent) {
        return Err(Error::Anchor(format!("anchor into block `{}` does not resolve", parent.block_id)));
    }
    if matches!(descriptor.source_ref, BlockSource::Note | BlockSource::CellOutput { .. }) {
        return Err(Error::Validation("a suggestion must come from raw data".into()));
    }
    if descriptor.provenance.pipeline.is_empty() {
        return Err(Error::Validation("a suggestion needs a provenance pipeline".into()));
    }
    let materialized = materialize(project, &descriptor.source_ref)?;
    if materialized.abstraction_level >= parent_level {
        return Err(Error::Validation(format!(
            "suggestion at level {} is not below its parent at level {parent_level}",
            materialized.abstraction_level
        )));
    }
    let block = insert_block(
        project,
        materialized,
        descriptor.source_ref.clone(),
        descriptor.provenance.clone(),
        position,
        sync_mode,
    )?;
    let link = create_link(project, parent, &Anchor::block(block.id.clone()), Some("unwind"))?;
    Ok((block, link))
}
