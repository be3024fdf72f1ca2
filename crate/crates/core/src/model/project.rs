use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize};

use crate::canvas::Canvas;
use crate::error::{Error, Result};
use crate::ids::*;
use crate::model::table::Table;
use crate::notebook::Notebook;

pub const SCHEMA_VERSION: u64 = 1;
pub const DEFAULT_JOIN_KEY: &str = "participant";

/// The root aggregate. Foraging, notebook and canvas all read and write the
/// same project, which is what lets a notebook cell see the documents being
/// coded and lets the canvas trace a chart mark back to raw rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: ProjectId,
    pub name: String,
    pub schema_version: u64,
    pub data_sources: Vec<DataSource>,
    pub codebook: Vec<Code>,
    pub annotations: Vec<Annotation>,
    pub notebook: Notebook,
    pub canvas: Canvas,
    pub settings: ProjectSettings,
    pub created_at: DateTime<Utc>,
    pub modified_at: DateTime<Utc>,
    /// Last value handed out by [`Project::fresh_id`].
    pub id_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSettings {
    /// Table column / document participant field used to bridge rows to quotes.
    pub join_key: String,
}

impl Default for ProjectSettings {
    fn default() -> Self {
        Self { join_key: DEFAULT_JOIN_KEY.to_owned() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Text,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSource {
    pub id: DataSourceId,
    pub kind: SourceKind,
    pub name: String,
    pub origin: OriginDescriptor,
    pub payload: SourcePayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourcePayload {
    Text(TextDocument),
    Table(Table),
}

impl DataSource {
    pub fn document(&self) -> Option<&TextDocument> {
        match &self.payload {
            SourcePayload::Text(doc) => Some(doc),
            SourcePayload::Table(_) => None,
        }
    }

    pub fn table(&self) -> Option<&Table> {
        match &self.payload {
            SourcePayload::Table(t) => Some(t),
            SourcePayload::Text(_) => None,
        }
    }

    pub fn payload_matches_kind(&self) -> bool {
        matches!(
            (self.kind, &self.payload),
            (SourceKind::Text, SourcePayload::Text(_)) | (SourceKind::Table, SourcePayload::Table(_))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginMethod {
    Interview,
    FocusGroup,
    Survey,
    Log,
    Other,
}

impl OriginMethod {
    /// Lenient parse; anything unrecognised is `Other`.
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "interview" => OriginMethod::Interview,
            "focus_group" => OriginMethod::FocusGroup,
            "survey" => OriginMethod::Survey,
            "log" => OriginMethod::Log,
            _ => OriginMethod::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OriginMethod::Interview => "interview",
            OriginMethod::FocusGroup => "focus_group",
            OriginMethod::Survey => "survey",
            OriginMethod::Log => "log",
            OriginMethod::Other => "other",
        }
    }
}

impl<'de> Deserialize<'de> for OriginMethod {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(OriginMethod::parse(&raw))
    }
}

/// How and from whom a data source was collected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginDescriptor {
    pub method: OriginMethod,
    #[serde(default)]
    pub participant: Option<String>,
    #[serde(default)]
    pub collected_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub note: Option<String>,
}

impl OriginDescriptor {
    pub fn new(method: OriginMethod) -> Self {
        Self { method, participant: None, collected_at: None, note: None }
    }

    pub fn with_participant(mut self, participant: impl Into<String>) -> Self {
        self.participant = Some(participant.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextDocument {
    pub id: DocumentId,
    pub content: String,
    /// Number of Unicode scalar values in `content`.
    pub length: usize,
}

impl TextDocument {
    pub fn new(id: DocumentId, content: String) -> Self {
        let length = content.chars().count();
        Self { id, content, length }
    }

    /// Text between two scalar-value offsets, or `None` when out of range.
    pub fn slice(&self, start: usize, end: usize) -> Option<String> {
        if start > end || end > self.length {
            return None;
        }
        Some(self.content.chars().skip(start).take(end - start).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Code {
    pub id: CodeId,
    pub label: String,
    /// `#rrggbb`, lowercase.
    pub color: String,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn check(self, length: usize) -> Result<Self> {
        if self.start >= self.end || self.end > length {
            return Err(Error::Span { start: self.start, end: self.end, length });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: AnnotationId,
    pub document_id: DocumentId,
    pub span: Span,
    pub code_ids: Vec<CodeId>,
    pub note: String,
    pub author: String,
    pub created_at: DateTime<Utc>,
    /// The covered text as it was when the annotation was made.
    pub text: String,
}

impl Project {
    pub fn new(id: ProjectId, name: impl Into<String>, now: DateTime<Utc>) -> Self {
        Self {
            id,
            name: name.into(),
            schema_version: SCHEMA_VERSION,
            data_sources: Vec::new(),
            codebook: Vec::new(),
            annotations: Vec::new(),
            notebook: Notebook::default(),
            canvas: Canvas::default(),
            settings: ProjectSettings::default(),
            created_at: now,
            modified_at: now,
            id_seq: 0,
        }
    }

    pub fn fresh_id(&mut self, prefix: &str) -> String {
        self.id_seq += 1;
        format!("{prefix}_{}", self.id_seq)
    }

    pub fn source(&self, id: &DataSourceId) -> Result<&DataSource> {
        self.data_sources
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| Error::reference("data source", id.as_str()))
    }

    pub fn source_mut(&mut self, id: &DataSourceId) -> Result<&mut DataSource> {
        self.data_sources
            .iter_mut()
            .find(|s| &s.id == id)
            .ok_or_else(|| Error::reference("data source", id.as_str()))
    }

    pub fn source_by_name(&self, name: &str) -> Option<&DataSource> {
        self.data_sources.iter().find(|s| s.name == name)
    }

    /// Finds a text document and the source that owns it.
    pub fn document(&self, id: &DocumentId) -> Result<(&DataSource, &TextDocument)> {
        self.data_sources
            .iter()
            .find_map(|s| s.document().filter(|d| &d.id == id).map(|d| (s, d)))
            .ok_or_else(|| Error::reference("document", id.as_str()))
    }

    pub fn table(&self, id: &TableId) -> Result<(&DataSource, &Table)> {
        self.data_sources
            .iter()
            .find_map(|s| s.table().filter(|t| &t.id == id).map(|t| (s, t)))
            .ok_or_else(|| Error::reference("table", id.as_str()))
    }

    pub fn documents(&self) -> impl Iterator<Item = (&DataSource, &TextDocument)> {
        self.data_sources.iter().filter_map(|s| s.document().map(|d| (s, d)))
    }

    pub fn tables(&self) -> impl Iterator<Item = (&DataSource, &Table)> {
        self.data_sources.iter().filter_map(|s| s.table().map(|t| (s, t)))
    }

    pub fn code(&self, id: &CodeId) -> Result<&Code> {
        self.codebook
            .iter()
            .find(|c| &c.id == id)
            .ok_or_else(|| Error::reference("code", id.as_str()))
    }
}
