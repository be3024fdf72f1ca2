use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the workbench can report.
///
/// Each variant has a stable machine-readable [`Error::code`] that the HTTP
/// layer forwards to clients unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrity violation at `{id}`: {reason}")]
    Integrity { id: String, reason: String },

    #[error("schema version {found} is newer than the supported version {supported}")]
    Version { found: u64, supported: u64 },

    #[error("malformed project stream: {0}")]
    Format(String),

    #[error("CSV parse error on line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("invalid span ({start}, {end}) for a document of length {length}")]
    Span { start: usize, end: usize, length: usize },

    #[error("unknown {kind} `{id}`")]
    Reference { kind: &'static str, id: String },

    #[error("unknown column `{0}`")]
    Column(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("name error: `{0}` is not defined")]
    Name(String),

    #[error("`{0}` is read-only")]
    ReadOnly(String),

    #[error("syntax error at line {line}, column {column}: {reason}")]
    Syntax { line: usize, column: usize, reason: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("anchor error: {0}")]
    Anchor(String),

    #[error("anchor `{0}` has no lineage to unwind")]
    NoLineage(String),

    #[error("no data left in column `{0}` after removing nulls")]
    EmptyData(String),

    #[error("duplicate bar label `{0}`")]
    Label(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn reference(kind: &'static str, id: impl Into<String>) -> Self {
        Error::Reference { kind, id: id.into() }
    }

    pub(crate) fn integrity(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Integrity { id: id.into(), reason: reason.into() }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::Integrity { .. } => "integrity_error",
            Error::Version { .. } => "version_error",
            Error::Format(_) => "format_error",
            Error::Parse { .. } => "parse_error",
            Error::Encoding { .. } => "encoding_error",
            Error::Conflict(_) => "conflict",
            Error::Span { .. } => "span_error",
            Error::Reference { .. } => "not_found",
            Error::Column(_) => "column_error",
            Error::Type(_) => "type_error",
            Error::Name(_) => "name_error",
            Error::ReadOnly(_) => "read_only",
            Error::Syntax { .. } => "syntax_error",
            Error::Validation(_) => "validation_error",
            Error::Anchor(_) => "anchor_error",
            Error::NoLineage(_) => "no_lineage",
            Error::EmptyData(_) => "empty_data",
            Error::Label(_) => "label_error",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
