//! One function per property. Each returns `Err(reason)` on the first
//! disagreement between the library and its oracle.

use mmw_core::canvas::BlockPayload;
use mmw_core::foraging::apply_table_view;
use mmw_core::model::{OriginDescriptor, OriginMethod, SourceKind};
use mmw_core::notebook::{ops, CellOutput, ChartKind, ChartSpec, Derivation, DocumentSet, Frame, Value};
use mmw_core::{load_project, save_project, Workbench};

use super::close;
use super::gen::{self, Coded, RawTable, Recipe, ViewSpec};
use super::oracle;

fn table_workbench(table: &RawTable) -> Workbench {
    let mut wb = Workbench::create("t", "table", gen::clock());
    wb.import_source(SourceKind::Table, "data", table.to_csv().as_bytes(), OriginDescriptor::new(OriginMethod::Survey))
        .unwrap();
    wb
}

fn raw_frame(wb: &Workbench) -> Frame {
    let (src, table) = wb.project().tables().next().unwrap();
    Frame::from_table(src, table)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn view(table: &RawTable, spec: &ViewSpec) -> Result<(), String> {
    let wb = table_workbench(table);
    let table_id = wb.project().tables().next().unwrap().1.id.clone();
    let got = apply_table_view(wb.project(), &spec.to_view(table_id)).map_err(|e| e.to_string())?;
    let want = oracle::view(table, spec);
    ensure(got.row_ids == want, || format!("view {spec:?}: got {:?}, want {want:?}", got.row_ids))
}

pub fn word_freq(texts: &[String], stop: &[&str]) -> Result<(), String> {
    let (wb, _) = gen::build_coded(texts, 1, &[]);
    let p = wb.project();
    let docs = DocumentSet {
        ids: p.documents().map(|(_, d)| d.id.clone()).collect(),
        derivation: Derivation::imported(&p.documents().map(|(s, _)| s).collect::<Vec<_>>()),
    };
    let stop_owned: Vec<String> = stop.iter().map(|s| s.to_string()).collect();
    let frame = ops::word_freq(p, &docs, &stop_owned).map_err(|e| e.to_string())?;
    let got: Vec<(String, usize)> = frame.rows.iter().map(|r| (r[0].to_string(), r[1].as_f64().unwrap() as usize)).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let want = oracle::word_freq(&refs, stop);
    ensure(got == want, || format!("word_freq: got {got:?}, want {want:?}"))?;
    for (row, l) in frame.rows.iter().zip(&frame.lineage) {
        let n = row[1].as_f64().unwrap() as usize;
        ensure(l.len() == n, || format!("token {} has {} lineage entries for count {n}", row[0], l.len()))?;
    }
    Ok(())
}

pub fn code_freq(input: &Coded) -> Result<(), String> {
    let (wb, _) = gen::build_coded(&input.0, input.1, &input.2);
    let frame = ops::code_freq(wb.project());
    let got: Vec<(String, usize)> = frame.rows.iter().map(|r| (r[0].to_string(), r[1].as_f64().unwrap() as usize)).collect();
    let want = oracle::code_freq(wb.project());
    ensure(got == want, || format!("code_freq: got {got:?}, want {want:?}"))
}

pub fn group_median(table: &RawTable) -> Result<(), String> {
    let wb = table_workbench(table);
    let frame = ops::group_median(&raw_frame(&wb), &["g".to_owned()], "x").map_err(|e| e.to_string())?;
    let want = oracle::group_median_x_by_g(table);
    ensure(frame.len() == want.len(), || format!("{} groups, want {}", frame.len(), want.len()))?;
    for ((row, lineage), (g, (m, rows))) in frame.rows.iter().zip(&frame.lineage).zip(&want) {
        ensure(&row[0].to_string() == g, || format!("group {} where {g} expected", row[0]))?;
        let got = row[1].as_f64().unwrap();
        ensure(close(got, *m), || format!("median of {g}: got {got}, want {m}"))?;
        let got_rows: std::collections::BTreeSet<_> =
            mmw_core::notebook::lineage::rows(lineage).map(|(_, r)| r.clone()).collect();
        ensure(&got_rows == rows, || format!("lineage of {g}: got {got_rows:?}, want {rows:?}"))?;
    }
    Ok(())
}

fn bin_rows(chart: &ChartSpec) -> Vec<std::collections::BTreeSet<mmw_core::ids::RowId>> {
    chart
        .marks
        .iter()
        .map(|m| mmw_core::notebook::lineage::rows(&m.lineage).map(|(_, r)| r.clone()).collect())
        .collect()
}

pub fn histogram(table: &RawTable, bins: usize) -> Result<(), String> {
    let wb = table_workbench(table);
    let frame = raw_frame(&wb);
    let chart = ops::histogram(&frame, "x", ops::Bins::Count(bins), None, "h").map_err(|e| e.to_string())?;
    let want = oracle::histogram_x(table, bins);
    let got = bin_rows(&chart);
    ensure(got == want, || format!("float bins: got {got:?}, want {want:?}"))?;

    let chart = ops::histogram(&frame, "i", ops::Bins::Integer, None, "h").map_err(|e| e.to_string())?;
    let want = oracle::histogram_i(table);
    ensure(chart.marks.len() == want.len(), || format!("{} integer bins, want {}", chart.marks.len(), want.len()))?;
    for (m, (k, rows)) in chart.marks.iter().zip(&want) {
        ensure(m.key == k.to_string(), || format!("bin {} where {k} expected", m.key))?;
        let got: std::collections::BTreeSet<_> =
            mmw_core::notebook::lineage::rows(&m.lineage).map(|(_, r)| r.clone()).collect();
        ensure(&got == rows, || format!("integer bin {k}: got {got:?}, want {rows:?}"))?;
    }
    Ok(())
}

pub fn stats(table: &RawTable) -> Result<(), String> {
    let wb = table_workbench(table);
    let Value::Record(got) = ops::stats(&raw_frame(&wb), "x").map_err(|e| e.to_string())? else {
        return Err("stats did not return a record".into());
    };
    let xs: Vec<f64> = table.rows.iter().filter_map(|r| r.x).collect();
    let (n, mean, median, sd) = oracle::stats(&xs);
    ensure(got["n"] == Value::Int(n as i64), || format!("n: got {:?}, want {n}", got["n"]))?;
    for (name, want) in [("mean", mean), ("median", median), ("sd", sd)] {
        let ok = match (&got[name], want) {
            (Value::Float(a), Some(b)) => close(*a, b),
            (Value::Null, None) => true,
            _ => false,
        };
        ensure(ok, || format!("{name}: got {:?}, want {want:?}", got[name]))?;
    }
    Ok(())
}

fn lineage_of_chart(wb: &Workbench, chart: &ChartSpec) -> Result<(), String> {
    oracle::check_marks(wb.project(), chart)?;
    if chart.chart_kind == ChartKind::Histogram {
        oracle::check_partition(wb.project(), chart, chart.value_column.as_deref().unwrap())?;
    }
    Ok(())
}

/// Lineage invariants over every chart a randomized project holds: cell
/// outputs and up-to-date chart blocks. Returns the number of charts checked.
pub fn lineage(recipe: &Recipe) -> Result<usize, String> {
    let wb = gen::build(recipe);
    let mut checked = 0;
    for cell in &wb.project().notebook.cells {
        for out in &cell.outputs {
            if let CellOutput::Chart { payload, .. } = out {
                lineage_of_chart(&wb, payload)?;
                checked += 1;
            }
        }
    }
    for block in &wb.project().canvas.blocks {
        if let BlockPayload::Chart { chart } = &block.payload {
            if !block.stale {
                lineage_of_chart(&wb, chart)?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// `load(save(p)) == p` and saving the loaded project gives the same bytes.
pub fn roundtrip(recipe: &Recipe) -> Result<(), String> {
    let wb = gen::build(recipe);
    let bytes = save_project(wb.project()).map_err(|e| e.to_string())?;
    let loaded = load_project(&bytes).map_err(|e| e.to_string())?;
    ensure(&loaded == wb.project(), || "loaded project differs".into())?;
    let again = save_project(&loaded).map_err(|e| e.to_string())?;
    ensure(again == bytes, || "re-save is not byte-identical".into())
}
