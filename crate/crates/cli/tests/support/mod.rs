//! Helpers for driving the `mmw` binary and inspecting its HTML.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use chrono::{TimeZone, Utc};
use mmw_core::canvas::{Anchor, BlockInput, BlockPayload, Point, SyncMode};
use mmw_core::model::{OriginDescriptor, OriginMethod, Project, SourceKind};
use mmw_core::notebook::CellKind;
use mmw_core::{FixedClock, Workbench};

pub fn mmw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmw")).current_dir(dir).args(args).output().expect("binary runs")
}

/// Start tags per class token, from a small tokenizer that knows only about
/// tags, quoted attribute values and comments.
pub fn class_counts(html: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    let b = html.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'<' {
            i += 1;
            continue;
        }
        if html[i..].starts_with("<!--") {
            i = html[i..].find("-->").map_or(b.len(), |e| i + e + 3);
            continue;
        }
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'/' || b[j] == b'!') {
            i = html[i..].find('>').map_or(b.len(), |e| i + e + 1);
            continue;
        }
        while j < b.len() && b[j].is_ascii_alphanumeric() {
            j += 1;
        }
        // Attributes until the closing '>' outside quotes.
        let mut quote = None;
        let start = j;
        while j < b.len() {
            match (quote, b[j]) {
                (None, b'"' | b'\'') => quote = Some(b[j]),
                (Some(q), c) if c == q => quote = None,
                (None, b'>') => break,
                _ => {}
            }
            j += 1;
        }
        let attrs = &html[start..j.min(b.len())];
        if let Some(value) = attr(attrs, "class") {
            for token in value.split_ascii_whitespace() {
                *counts.entry(token.to_owned()).or_insert(0) += 1;
            }
        }
        i = j + 1;
    }
    counts
}

fn attr<'a>(attrs: &'a str, name: &str) -> Option<&'a str> {
    let mut rest = attrs;
    while let Some(pos) = rest.find(name) {
        let before_ok = pos == 0 || rest.as_bytes()[pos - 1].is_ascii_whitespace();
        let after = &rest[pos + name.len()..];
        if before_ok && after.starts_with("=\"") {
            let v = &after[2..];
            return v.find('"').map(|e| &v[..e]);
        }
        rest = after;
    }
    None
}

/// Text, a table, a median chart, and a 3-block chain: chart → histogram →
/// quote.
pub fn chain_project() -> Project {
    let clock = FixedClock(Utc.with_ymd_and_hms(2024, 5, 6, 7, 8, 9).unwrap());
    let mut wb = Workbench::create("project", "Chain", Box::new(clock));
    let csv = "participant,question,score\nP1,Q1,4\nP2,Q1,2\nP1,Q2,5\nP2,Q2,3\n";
    wb.import_source(SourceKind::Table, "survey", csv.as_bytes(), OriginDescriptor::new(OriginMethod::Survey)).unwrap();
    for p in ["P1", "P2"] {
        let o = OriginDescriptor::new(OriginMethod::Interview).with_participant(p);
        wb.import_source(SourceKind::Text, &format!("interview {p}"), format!("{p} said <it> & it was fine.").as_bytes(), o).unwrap();
    }
    let cell = wb
        .add_cell(CellKind::Code, "m = group_median(tables(\"survey\"), [\"question\"], \"score\")\nbar(m, [\"question\"], \"median\")", None)
        .unwrap();
    wb.execute_cell(&cell.id).unwrap();
    let chart = wb.create_block(&BlockInput::CellOutput { cell_id: cell.id, output_index: 0 }, Point::new(0.0, 0.0), SyncMode::Live).unwrap();
    let BlockPayload::Chart { chart: spec } = &chart.payload else { unreachable!() };
    let bar = Anchor::element(chart.id.clone(), spec.marks[0].element_id.clone());
    let suggestions = wb.unwind(&bar).unwrap();
    let (hist, _) = wb.accept_suggestion(&bar, &suggestions.descriptors[0], Point::new(420.0, 0.0), SyncMode::Live).unwrap();
    let BlockPayload::Chart { chart: hspec } = &hist.payload else { unreachable!() };
    let bin = hspec.marks.iter().find(|m| !m.lineage.is_empty()).unwrap();
    let bin = Anchor::element(hist.id.clone(), bin.element_id.clone());
    let quotes = wb.unwind(&bin).unwrap();
    wb.accept_suggestion(&bin, &quotes.descriptors[0], Point::new(840.0, 0.0), SyncMode::Snapshot).unwrap();
    wb.into_project()
}
