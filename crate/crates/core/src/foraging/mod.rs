//! Data extraction and preparation: qualitative coding on documents, filter and
//! sort views on tables, and snapshots of selections for the canvas.

mod annotate;
mod codes;
mod extract;
pub mod view;

pub use annotate::{annotate, annotation_text, query_annotations, AnnotationFilter};
pub use codes::{create_code, suggest_codes, PALETTE};
pub use extract::{make_extract, ExtractContent, ExtractKind, ExtractPayload, Selection, SelectionTarget};
pub use view::{apply_table_view, apply_view_to_table, CompareOp, Direction, Predicate, SortKey, TableView};
