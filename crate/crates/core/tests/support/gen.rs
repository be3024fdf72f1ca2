use chrono::{NaiveDate, NaiveDateTime};
use proptest::prelude::*;

use mmw_core::canvas::{Anchor, BlockInput, BlockPayload, Point, Rect, SyncMode};
use mmw_core::foraging::{CompareOp, Direction, Predicate, Selection, SelectionTarget, SortKey, TableView};
use mmw_core::ids::{BlockId, DataSourceId, RowId, TableId};
use mmw_core::model::{CellValue, OriginDescriptor, OriginMethod, SourceKind, Span};
use mmw_core::notebook::CellKind;
use mmw_core::{FixedClock, Workbench};

pub const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "Über", "café", "naïve", "zeta"];
pub const GROUPS: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub k: String,
    pub g: String,
    pub i: Option<i64>,
    pub x: Option<f64>,
    pub b: Option<bool>,
    pub t: Option<NaiveDateTime>,
}

/// Columns in CSV order with the dtype inference should pick.
pub const COLUMNS: [&str; 6] = ["k", "g", "i", "x", "b", "t"];

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub rows: Vec<RawRow>,
}

impl RawTable {
    pub fn row_id(i: usize) -> RowId {
        RowId(format!("r{}", i + 1))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).unwrap();
        for r in &self.rows {
            w.write_record([
                r.k.clone(),
                r.g.clone(),
                r.i.map(|v| v.to_string()).unwrap_or_default(),
                r.x.map(|v| format!("{v:.3}")).unwrap_or_default(),
                r.b.map(|v| v.to_string()).unwrap_or_default(),
                r.t.map(|v| v.format("%Y-%m-%d %H:%M:%S").to_string()).unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

fn datetime() -> impl Strategy<Value = NaiveDateTime> {
    (1u32..=28, 0u32..24, 0u32..60)
        .prop_map(|(d, h, m)| NaiveDate::from_ymd_opt(2024, 2, d).unwrap().and_hms_opt(h, m, 0).unwrap())
}

fn raw_row() -> impl Strategy<Value = RawRow> {
    (
        prop::sample::select(&WORDS[..]),
        prop::sample::select(&GROUPS[..]),
        prop::option::weighted(0.85, -20i64..20),
        prop::option::weighted(0.85, -50_000i64..50_000),
        prop::option::weighted(0.85, any::<bool>()),
        prop::option::weighted(0.85, datetime()),
    )
        .prop_map(|(k, g, i, x, b, t)| RawRow {
            k: k.to_owned(),
            g: g.to_owned(),
            i,
            x: x.map(|v| v as f64 / 1000.0),
            b,
            t,
        })
}

/// A table whose first row is complete, so every column infers its intended
/// dtype.
pub fn raw_table(rows: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = RawTable> {
    (prop::collection::vec(raw_row(), rows), 0i64..5, 1i64..1000, any::<bool>(), datetime()).prop_map(
        |(mut rows, i, x, b, t)| {
            let first = &mut rows[0];
            first.i.get_or_insert(i);
            first.x.get_or_insert((x + 500) as f64 / 1000.0);
            first.b.get_or_insert(b);
            first.t.get_or_insert(t);
            RawTable { rows }
        },
    )
}

#[derive(Debug, Clone)]
pub enum PredSpec {
    Int(CompareOp, i64),
    Float(CompareOp, f64),
    Word(CompareOp, String),
    Bool(CompareOp, bool),
    Time(CompareOp, NaiveDateTime),
}

const ORDERING: [CompareOp; 6] =
    [CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge];

fn pred_spec() -> impl Strategy<Value = PredSpec> {
    prop_oneof![
        (prop::sample::select(&ORDERING[..]), -20i64..20).prop_map(|(op, v)| PredSpec::Int(op, v)),
        (prop::sample::select(&ORDERING[2..]), -50i64..50).prop_map(|(op, v)| PredSpec::Float(op, v as f64)),
        (
            prop::sample::select(&[CompareOp::Eq, CompareOp::Ne, CompareOp::Contains][..]),
            prop::sample::select(&["alpha", "a", "é", "Ü", "zeta", "et"][..])
        )
            .prop_map(|(op, v)| PredSpec::Word(op, v.to_owned())),
        (prop::sample::select(&[CompareOp::Eq, CompareOp::Ne][..]), any::<bool>())
            .prop_map(|(op, v)| PredSpec::Bool(op, v)),
        (prop::sample::select(&ORDERING[2..]), datetime()).prop_map(|(op, v)| PredSpec::Time(op, v)),
    ]
}

#[derive(Debug, Clone)]
pub struct ViewSpec {
    pub preds: Vec<PredSpec>,
    pub sorts: Vec<(&'static str, bool)>,
}

pub fn view_spec() -> impl Strategy<Value = ViewSpec> {
    (
        prop::collection::vec(pred_spec(), 0..3),
        prop::collection::vec((prop::sample::select(&COLUMNS[..]), any::<bool>()), 0..3),
    )
        .prop_map(|(preds, sorts)| ViewSpec { preds, sorts })
}

impl ViewSpec {
    pub fn to_view(&self, table_id: TableId) -> TableView {
        let filters = self
            .preds
            .iter()
            .map(|p| match p {
                PredSpec::Int(op, v) => Predicate::new("i", *op, CellValue::Int(*v)),
                PredSpec::Float(op, v) => Predicate::new("x", *op, CellValue::Float(*v)),
                PredSpec::Word(op, v) => Predicate::new("k", *op, CellValue::Str(v.clone())),
                PredSpec::Bool(op, v) => Predicate::new("b", *op, CellValue::Bool(*v)),
                PredSpec::Time(op, v) => {
                    Predicate::new("t", *op, CellValue::Str(v.format("%Y-%m-%dT%H:%M:%S").to_string()))
                }
            })
            .collect();
        let sorts = self
            .sorts
            .iter()
            .map(|(c, desc)| SortKey::new(*c, if *desc { Direction::Desc } else { Direction::Asc }))
            .collect();
        TableView { table_id, filters, sorts }
    }
}

/// Random document text drawn from a small vocabulary with mixed case,
/// punctuation and non-ASCII letters.
pub fn text() -> impl Strategy<Value = String> {
    let piece = prop::sample::select(
        &["The", "cat", "CAT", "sat", "on", "the", "mat", "Über", "über", "42", "naïve", "x2", "—", ", ", ". ", "\n", "  ", "'s"][..],
    );
    prop::collection::vec(piece, 0..40).prop_map(|p| p.join(" "))
}

/// Everything needed to build one randomized project.
#[derive(Debug, Clone)]
pub struct Recipe {
    pub texts: Vec<String>,
    pub table: RawTable,
    pub codes: usize,
    /// (doc, start fraction, len fraction, code mask)
    pub annotations: Vec<(usize, f64, f64, u8)>,
    pub cells: Vec<usize>,
    /// (kind selector, sync flag, x, y)
    pub blocks: Vec<(u8, bool, f64, f64)>,
    /// (from, to, anchor selector)
    pub links: Vec<(usize, usize, u8)>,
    pub region: bool,
    pub edit: Option<(usize, i64)>,
    pub delete: Option<usize>,
}

pub const CELL_TEMPLATES: [&str; 9] = [
    "t = tables(\"data\")\nlen(t)",
    "m = group_median(tables(\"data\"), [\"g\"], \"x\")\nbar(m, [\"g\"], \"median\")",
    "histogram(tables(\"data\"), \"i\", \"integer\")",
    "scatter(tables(\"data\"), \"i\", \"x\")",
    "wordcloud(docs())",
    "stats(tables(\"data\"), \"x\")",
    "code_freq()",
    "# comment only\nx = 1",
    "undefined_name",
];

pub fn recipe() -> impl Strategy<Value = Recipe> {
    (
        prop::collection::vec(text(), 1..4),
        raw_table(1..=12),
        1usize..4,
        prop::collection::vec((0usize..4, 0.0f64..1.0, 0.0f64..1.0, 1u8..8), 0..5),
        prop::collection::vec(0usize..CELL_TEMPLATES.len(), 0..5),
        prop::collection::vec((0u8..6, any::<bool>(), -1e4f64..1e4, -1e4f64..1e4), 0..7),
        prop::collection::vec((0usize..8, 0usize..8, 0u8..4), 0..6),
        any::<bool>(),
        prop::option::of((0usize..12, -5i64..5)),
        prop::option::of(0usize..8),
    )
        .prop_map(|(texts, table, codes, annotations, cells, blocks, links, region, edit, delete)| Recipe {
            texts,
            table,
            codes,
            annotations,
            cells,
            blocks,
            links,
            region,
            edit,
            delete,
        })
}

pub fn clock() -> Box<FixedClock> {
    use chrono::TimeZone;
    Box::new(FixedClock(chrono::Utc.with_ymd_and_hms(2024, 6, 1, 8, 30, 0).unwrap()))
}

/// Documents, codes and annotations only.
pub fn build_coded(texts: &[String], codes: usize, annotations: &[(usize, f64, f64, u8)]) -> (Workbench, Vec<(DataSourceId, usize)>) {
    let mut wb = Workbench::create("gen", "generated", clock());
    let methods = [OriginMethod::Interview, OriginMethod::FocusGroup, OriginMethod::Other];
    let mut docs: Vec<(DataSourceId, usize)> = Vec::new();
    for (n, t) in texts.iter().enumerate() {
        let origin = OriginDescriptor::new(methods[n % 3]).with_participant(format!("P{n}"));
        let src = wb.import_source(SourceKind::Text, &format!("doc {n}"), t.as_bytes(), origin).unwrap();
        docs.push((src.id.clone(), src.document().unwrap().length));
    }
    let codes: Vec<_> = (0..codes).map(|c| wb.create_code(&format!("code {c}"), None).unwrap().id).collect();
    for &(d, s, l, mask) in annotations {
        let (src, len) = &docs[d % docs.len()];
        if *len == 0 {
            continue;
        }
        let start = ((s * *len as f64) as usize).min(len - 1);
        let end = (start + 1 + (l * (len - start) as f64) as usize).min(*len);
        let picked: Vec<_> = codes.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, c)| c.clone()).collect();
        let doc_id = wb.project().source(src).unwrap().document().unwrap().id.clone();
        wb.annotate(&doc_id, Span::new(start, end), &picked, "note", "gen").unwrap();
    }
    (wb, docs)
}

/// Builds a project through the public API. Operations the recipe gets wrong
/// (out-of-range spans, invalid anchors) are skipped, just as a UI would
/// reject them.
pub fn build(recipe: &Recipe) -> Workbench {
    let (mut wb, docs) = build_coded(&recipe.texts, recipe.codes, &recipe.annotations);
    let table = wb
        .import_source(SourceKind::Table, "data", recipe.table.to_csv().as_bytes(), OriginDescriptor::new(OriginMethod::Survey))
        .unwrap();
    for &c in &recipe.cells {
        wb.add_cell(CellKind::Code, CELL_TEMPLATES[c], None).unwrap();
    }
    wb.add_cell(CellKind::Markdown, "## Notes", None).unwrap();
    wb.execute_all();

    let outputs: Vec<BlockInput> = wb
        .project()
        .notebook
        .cells
        .iter()
        .filter(|c| c.outputs.first().is_some_and(|o| !o.is_error()))
        .map(|c| BlockInput::CellOutput { cell_id: c.id.clone(), output_index: 0 })
        .collect();
    let mut blocks: Vec<BlockId> = Vec::new();
    for (n, &(kind, live, x, y)) in recipe.blocks.iter().enumerate() {
        let mode = if live { SyncMode::Live } else { SyncMode::Snapshot };
        let pos = Point::new(x, y);
        let (src, len) = &docs[n % docs.len()];
        let made = match kind {
            0 if *len > 0 => wb.extract_block(
                Selection { data_source_id: src.clone(), target: SelectionTarget::Span { start: 0, end: (*len).min(5) } },
                pos,
                mode,
            ),
            1 => wb.extract_block(
                Selection {
                    data_source_id: table.id.clone(),
                    target: SelectionTarget::Rows { row_ids: vec![RawTable::row_id(0)] },
                },
                pos,
                mode,
            ),
            2 => wb.extract_block(
                Selection {
                    data_source_id: table.id.clone(),
                    target: SelectionTarget::Cell { row_id: RawTable::row_id(0), column: "x".into() },
                },
                pos,
                mode,
            ),
            3 | 4 if !outputs.is_empty() => wb.create_block(&outputs[n % outputs.len()], pos, mode),
            _ => wb.create_note(&format!("note {n} ✓"), pos),
        };
        blocks.push(made.unwrap().id);
    }
    for &(a, b, sel) in &recipe.links {
        if blocks.len() < 2 {
            break;
        }
        let (a, b) = (&blocks[a % blocks.len()], &blocks[b % blocks.len()]);
        let to = sub_anchor(&wb, b, sel);
        let _ = wb.create_link(&Anchor::block(a.clone()), &to, Some("gen"));
    }
    if recipe.region && !blocks.is_empty() {
        let r = wb.create_region("RQ", Rect { x: 0.0, y: 0.0, w: 500.0, h: 500.0 }).unwrap();
        wb.assign_to_region(&blocks[0], &r.id).unwrap();
    }
    if let Some((row, v)) = recipe.edit {
        let row = RawTable::row_id(row % recipe.table.rows.len());
        wb.edit_table_cell(&table.id, &row, "i", CellValue::Int(v)).unwrap();
    }
    if let Some(d) = recipe.delete {
        if !blocks.is_empty() {
            wb.delete_block(&blocks[d % blocks.len()]).unwrap();
        }
    }
    wb
}

/// A subregion anchor into `block` when its payload offers one.
pub fn sub_anchor(wb: &Workbench, block: &BlockId, sel: u8) -> Anchor {
    let b = wb.project().canvas.block(block).unwrap();
    match (&b.payload, sel) {
        (BlockPayload::Chart { chart }, 1..) if !chart.marks.is_empty() => {
            Anchor::element(block.clone(), chart.marks[sel as usize % chart.marks.len()].element_id.clone())
        }
        (BlockPayload::Quote { text, .. }, 1..) if !text.is_empty() => Anchor::text_range(block.clone(), 0, 1),
        (BlockPayload::TableSlice { frame }, 1..) if !frame.is_empty() => {
            Anchor::cell(block.clone(), frame.row_ids[0].clone(), frame.columns[0].name.clone())
        }
        _ => Anchor::block(block.clone()),
    }
}

/// (texts, code count, annotations) for codebook-only projects.
pub type Coded = (Vec<String>, usize, Vec<(usize, f64, f64, u8)>);

pub fn coded() -> impl Strategy<Value = Coded> {
    (
        prop::collection::vec(text(), 1..4),
        1usize..5,
        prop::collection::vec((0usize..4, 0.0f64..1.0, 0.0f64..1.0, 0u8..16), 0..8),
    )
}
