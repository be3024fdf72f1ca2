//! Lineage: the raw identifiers an aggregate was computed from.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ids::{AnnotationId, DocumentId, RowId, TableId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LineageRef {
    Row { table_id: TableId, row_id: RowId },
    /// One token occurrence, as scalar-value offsets into the document.
    Token { document_id: DocumentId, start: usize, end: usize },
    Annotation { annotation_id: AnnotationId },
}

impl LineageRef {
    pub fn row(table_id: &TableId, row_id: &RowId) -> Self {
        LineageRef::Row { table_id: table_id.clone(), row_id: row_id.clone() }
    }
}

pub type Lineage = BTreeSet<LineageRef>;

/// Rows of a lineage set, in set order.
pub fn rows(lineage: &Lineage) -> impl Iterator<Item = (&TableId, &RowId)> {
    lineage.iter().filter_map(|l| match l {
        LineageRef::Row { table_id, row_id } => Some((table_id, row_id)),
        _ => None,
    })
}
