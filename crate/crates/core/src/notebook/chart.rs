//! Declarative charts with addressable marks.
//!
//! Every mark has an `element_id` that depends only on the producing scope
//! (normally the cell id), the chart kind and the mark's key: the row id for a
//! scatter point, the bin bounds for a histogram bar, the label for a bar, the
//! token for a word. Re-running a cell over unchanged data therefore yields the
//! same ids, and canvas links anchored to a mark survive re-execution.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ids::{CellId, ElementId};
use crate::notebook::frame::Derivation;
use crate::notebook::lineage::Lineage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Scatter,
    Histogram,
    Bar,
    Wordcloud,
}

impl ChartKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Scatter => "scatter",
            ChartKind::Histogram => "histogram",
            ChartKind::Bar => "bar",
            ChartKind::Wordcloud => "wordcloud",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Encoding {
    Point { x: f64, y: f64 },
    /// `[lo, hi)`; the last bin of a chart is closed.
    Bin { lo: f64, hi: f64, count: u64 },
    Bar { label: String, value: f64 },
    Word { token: String, count: u64 },
}

impl Encoding {
    /// The quantity a mark displays, for lineage recomputation.
    pub fn primary_value(&self) -> f64 {
        match *self {
            Encoding::Point { y, .. } => y,
            Encoding::Bin { count, .. } | Encoding::Word { count, .. } => count as f64,
            Encoding::Bar { value, .. } => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub element_id: ElementId,
    pub key: String,
    pub encoding: Encoding,
    pub lineage: Lineage,
}

/// What each mark's value is, as a function of its lineage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Statistic {
    /// Coordinates read from the single lineage row.
    Coordinate { x_column: String, y_column: String },
    /// Number of lineage entries.
    Count,
    /// Median of `column` over the lineage rows.
    Median { column: String },
    /// `column` read from the single lineage row.
    Value { column: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub chart_kind: ChartKind,
    pub marks: Vec<Mark>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub source_cell: Option<CellId>,
    /// 1 when marks stand for raw rows or their distribution, 2 for charts of
    /// aggregates.
    pub abstraction_level: u8,
    pub statistic: Statistic,
    /// The raw numeric column behind the marks, when there is one.
    pub value_column: Option<String>,
    pub derivation: Derivation,
}

impl ChartSpec {
    pub fn mark(&self, element_id: &ElementId) -> Option<&Mark> {
        self.marks.iter().find(|m| &m.element_id == element_id)
    }
}

/// Deterministic digest of `(scope, kind, key)`.
pub fn element_id(scope: &str, kind: ChartKind, key: &str) -> ElementId {
    let mut hasher = Sha256::new();
    hasher.update(scope.as_bytes());
    hasher.update([0]);
    hasher.update(kind.as_str().as_bytes());
    hasher.update([0]);
    hasher.update(key.as_bytes());
    let digest = hasher.finalize();
    ElementId(format!("e{}", &hex::encode(digest)[..16]))
}
