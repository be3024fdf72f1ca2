use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AnnotationId, CodeId, DocumentId};
use crate::model::{Annotation, Project, Span};

/// Stores a coded span. Overlapping annotations are allowed.
pub fn annotate(
    project: &mut Project,
    document_id: &DocumentId,
    span: Span,
    code_ids: &[CodeId],
    note: &str,
    author: &str,
    now: DateTime<Utc>,
) -> Result<Annotation> {
    let (_, doc) = project.document(document_id)?;
    let span = span.check(doc.length)?;
    let text = doc.slice(span.start, span.end).expect("span checked");
    for code in code_ids {
        project.code(code)?;
    }
    let mut codes = Vec::with_capacity(code_ids.len());
    for code in code_ids {
        if !codes.contains(code) {
            codes.push(code.clone());
        }
    }
    let annotation = Annotation {
        id: AnnotationId(project.fresh_id("ann")),
        document_id: document_id.clone(),
        span,
        code_ids: codes,
        note: note.to_owned(),
        author: author.to_owned(),
        created_at: now,
        text,
    };
    project.annotations.push(annotation.clone());
    Ok(annotation)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationFilter {
    #[serde(default)]
    pub document_id: Option<DocumentId>,
    #[serde(default)]
    pub code_id: Option<CodeId>,
}

/// Matching annotations ordered by `(document_id, span.start)`.
pub fn query_annotations(project: &Project, filter: &AnnotationFilter) -> Vec<Annotation> {
    let mut found: Vec<Annotation> = project
        .annotations
        .iter()
        .filter(|a| filter.document_id.as_ref().is_none_or(|d| &a.document_id == d))
        .filter(|a| filter.code_id.as_ref().is_none_or(|c| a.code_ids.contains(c)))
        .cloned()
        .collect();
    found.sort_by(|a, b| {
        (&a.document_id, a.span.start, a.span.end, &a.id).cmp(&(&b.document_id, b.span.start, b.span.end, &b.id))
    });
    found
}

/// Re-reads an annotation's span from its document.
pub fn annotation_text(project: &Project, annotation: &Annotation) -> Result<String> {
    let (_, doc) = project.document(&annotation.document_id)?;
    doc.slice(annotation.span.start, annotation.span.end).ok_or(Error::Span {
        start: annotation.span.start,
        end: annotation.span.end,
        length: doc.length,
    })
}
