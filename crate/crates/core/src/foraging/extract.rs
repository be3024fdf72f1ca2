use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{DataSourceId, DocumentId, RowId};
use crate::model::{CellValue, OriginDescriptor, Project, SourcePayload, Span, Table};

/// What the analyst selected in the foraging pane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub data_source_id: DataSourceId,
    pub target: SelectionTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SelectionTarget {
    Span { start: usize, end: usize },
    Rows { row_ids: Vec<RowId> },
    Cell { row_id: RowId, column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractKind {
    Quote,
    TableSlice,
    Datapoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExtractContent {
    Quote { document_id: DocumentId, span: Span, text: String },
    TableSlice { table: Table },
    Datapoint { row_id: RowId, column: String, value: CellValue },
}

/// A snapshot of selected raw data, ready to be dropped on the canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractPayload {
    pub kind: ExtractKind,
    pub content: ExtractContent,
    pub source_ref: Selection,
    pub origin: OriginDescriptor,
}

pub fn make_extract(project: &Project, selection: &Selection) -> Result<ExtractPayload> {
    let source = project.source(&selection.data_source_id)?;
    let (kind, content) = match (&source.payload, &selection.target) {
        (SourcePayload::Text(doc), SelectionTarget::Span { start, end }) => {
            let span = Span::new(*start, *end).check(doc.length)?;
            let text = doc.slice(span.start, span.end).expect("span checked");
            (ExtractKind::Quote, ExtractContent::Quote { document_id: doc.id.clone(), span, text })
        }
        (SourcePayload::Table(table), SelectionTarget::Rows { row_ids }) => {
            if row_ids.is_empty() {
                return Err(Error::Validation("a table slice needs at least one row".into()));
            }
            let mut slice = Table {
                id: table.id.clone(),
                columns: table.columns.clone(),
                rows: Vec::with_capacity(row_ids.len()),
                row_ids: Vec::with_capacity(row_ids.len()),
            };
            for row_id in row_ids {
                let idx = table.row_index(row_id).ok_or_else(|| Error::reference("row", row_id.as_str()))?;
                if slice.row_ids.contains(row_id) {
                    continue;
                }
                slice.rows.push(table.rows[idx].clone());
                slice.row_ids.push(row_id.clone());
            }
            (ExtractKind::TableSlice, ExtractContent::TableSlice { table: slice })
        }
        (SourcePayload::Table(table), SelectionTarget::Cell { row_id, column }) => {
            table.row_index(row_id).ok_or_else(|| Error::reference("row", row_id.as_str()))?;
            let value = table.cell(row_id, column).ok_or_else(|| Error::Column(column.clone()))?;
            (
                ExtractKind::Datapoint,
                ExtractContent::Datapoint { row_id: row_id.clone(), column: column.clone(), value: value.clone() },
            )
        }
        _ => {
            return Err(Error::Validation(format!(
                "selection does not match the kind of source `{}`",
                source.id
            )))
        }
    };
    Ok(ExtractPayload { kind, content, source_ref: selection.clone(), origin: source.origin.clone() })
}
