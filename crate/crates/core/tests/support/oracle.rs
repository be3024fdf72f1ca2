use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use mmw_core::foraging::CompareOp;
use mmw_core::ids::RowId;
use mmw_core::model::{CellValue, Project};
use mmw_core::notebook::{ChartSpec, Encoding, LineageRef, Statistic};

use super::close;
use super::gen::{PredSpec, RawRow, RawTable, ViewSpec};

fn test<T: PartialOrd>(op: CompareOp, a: &T, b: &T) -> bool {
    match op {
        CompareOp::Eq => a == b,
        CompareOp::Ne => a != b,
        CompareOp::Lt => a < b,
        CompareOp::Le => a <= b,
        CompareOp::Gt => a > b,
        CompareOp::Ge => a >= b,
        CompareOp::Contains => unreachable!(),
    }
}

fn keep(row: &RawRow, p: &PredSpec) -> bool {
    match p {
        PredSpec::Int(op, v) => row.i.is_some_and(|x| test(*op, &x, v)),
        PredSpec::Float(op, v) => row.x.is_some_and(|x| test(*op, &x, v)),
        PredSpec::Word(CompareOp::Contains, v) => row.k.contains(v.as_str()),
        PredSpec::Word(op, v) => test(*op, &row.k, v),
        PredSpec::Bool(op, v) => row.b.is_some_and(|x| test(*op, &x, v)),
        PredSpec::Time(op, v) => row.t.is_some_and(|x| test(*op, &x, v)),
    }
}

fn nulls_last<T: PartialOrd>(a: Option<T>, b: Option<T>, desc: bool) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => {
            let o = x.partial_cmp(&y).unwrap();
            if desc {
                o.reverse()
            } else {
                o
            }
        }
    }
}

/// Filter row by row, then insertion-sort (stable) by the keys.
pub fn view(table: &RawTable, spec: &ViewSpec) -> Vec<RowId> {
    let mut rows: Vec<usize> =
        (0..table.rows.len()).filter(|&i| spec.preds.iter().all(|p| keep(&table.rows[i], p))).collect();
    let cmp = |a: &RawRow, b: &RawRow| {
        for &(col, desc) in &spec.sorts {
            let o = match col {
                "k" => nulls_last(Some(&a.k), Some(&b.k), desc),
                "g" => nulls_last(Some(&a.g), Some(&b.g), desc),
                "i" => nulls_last(a.i, b.i, desc),
                "x" => nulls_last(a.x, b.x, desc),
                "b" => nulls_last(a.b, b.b, desc),
                "t" => nulls_last(a.t, b.t, desc),
                _ => unreachable!(),
            };
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    };
    for n in 1..rows.len() {
        let mut j = n;
        while j > 0 && cmp(&table.rows[rows[j - 1]], &table.rows[rows[j]]) == Ordering::Greater {
            rows.swap(j - 1, j);
            j -= 1;
        }
    }
    rows.into_iter().map(RawTable::row_id).collect()
}

/// Lowercased maximal runs of letters and digits, counted and ordered by
/// (count desc, token asc).
pub fn word_freq(texts: &[&str], stop: &[&str]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in texts {
        for w in t.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
            let w = w.to_lowercase();
            if !stop.contains(&w.as_str()) {
                *counts.entry(w).or_default() += 1;
            }
        }
    }
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Annotation count per code label, ordered by (count desc, label asc).
pub fn code_freq(project: &Project) -> Vec<(String, usize)> {
    let mut v = Vec::new();
    for code in &project.codebook {
        let n = project.annotations.iter().filter(|a| a.code_ids.contains(&code.id)).count();
        if n > 0 {
            v.push((code.label.clone(), n));
        }
    }
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

pub fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Median of `x` per `g`, with the contributing rows.
pub fn group_median_x_by_g(table: &RawTable) -> BTreeMap<String, (f64, BTreeSet<RowId>)> {
    let mut groups: BTreeMap<String, Vec<(f64, RowId)>> = BTreeMap::new();
    for (i, r) in table.rows.iter().enumerate() {
        if let Some(x) = r.x {
            groups.entry(r.g.clone()).or_default().push((x, RawTable::row_id(i)));
        }
    }
    groups
        .into_iter()
        .map(|(g, v)| {
            let xs: Vec<f64> = v.iter().map(|p| p.0).collect();
            (g, (median(&xs), v.into_iter().map(|p| p.1).collect()))
        })
        .collect()
}

/// Rows per bin for `n` equal-width bins over the non-null `x` values.
pub fn histogram_x(table: &RawTable, n: usize) -> Vec<BTreeSet<RowId>> {
    let vals: Vec<(f64, RowId)> =
        table.rows.iter().enumerate().filter_map(|(i, r)| r.x.map(|x| (x, RawTable::row_id(i)))).collect();
    let lo = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![vals.into_iter().map(|v| v.1).collect()];
    }
    let edge = |i: usize| if i == n { hi } else { lo + (hi - lo) * (i as f64) / (n as f64) };
    let mut bins = vec![BTreeSet::new(); n];
    for (x, id) in vals {
        let slot = (0..n).find(|&i| x >= edge(i) && (x < edge(i + 1) || i == n - 1)).unwrap();
        bins[slot].insert(id);
    }
    bins
}

/// One bin per integer between min and max of `i`, in order.
pub fn histogram_i(table: &RawTable) -> Vec<(i64, BTreeSet<RowId>)> {
    let vals: Vec<(i64, RowId)> =
        table.rows.iter().enumerate().filter_map(|(i, r)| r.i.map(|v| (v, RawTable::row_id(i)))).collect();
    let lo = vals.iter().map(|v| v.0).min().unwrap();
    let hi = vals.iter().map(|v| v.0).max().unwrap();
    (lo..=hi).map(|k| (k, vals.iter().filter(|v| v.0 == k).map(|v| v.1.clone()).collect())).collect()
}

/// (n, mean, median, sample sd) with the two-pass formula.
pub fn stats(values: &[f64]) -> (usize, Option<f64>, Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (0, None, None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        None
    } else {
        Some((values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt())
    };
    (n, Some(mean), Some(median(values)), sd)
}

fn raw_number(project: &Project, l: &LineageRef, column: &str) -> Option<f64> {
    let LineageRef::Row { table_id, row_id } = l else { return None };
    let (_, table) = project.table(table_id).ok()?;
    table.cell(row_id, column).and_then(CellValue::as_f64)
}

/// Recomputes a mark's displayed value from its lineage, reading raw rows.
pub fn mark_value(project: &Project, chart: &ChartSpec, lineage: &mmw_core::notebook::Lineage) -> Option<(f64, f64)> {
    match &chart.statistic {
        Statistic::Count => Some((lineage.len() as f64, 0.0)),
        Statistic::Median { column } => {
            let xs: Vec<f64> = lineage.iter().filter_map(|l| raw_number(project, l, column)).collect();
            (!xs.is_empty()).then(|| (median(&xs), 0.0))
        }
        Statistic::Coordinate { x_column, y_column } => {
            let l = lineage.iter().next()?;
            Some((raw_number(project, l, y_column)?, raw_number(project, l, x_column)?))
        }
        Statistic::Value { column } => {
            let l = lineage.iter().next()?;
            Some((raw_number(project, l, column)?, 0.0))
        }
    }
}

/// Checks that every mark's value follows from its lineage. Returns a
/// description of the first mismatch.
pub fn check_marks(project: &Project, chart: &ChartSpec) -> Result<(), String> {
    for m in &chart.marks {
        let encoded = match m.encoding {
            Encoding::Point { x, y } => (y, x),
            _ => (m.encoding.primary_value(), 0.0),
        };
        if m.lineage.is_empty() {
            if matches!(m.encoding, Encoding::Bin { count: 0, .. }) {
                continue;
            }
            return Err(format!("mark {} has no lineage", m.key));
        }
        let Some(recomputed) = mark_value(project, chart, &m.lineage) else {
            return Err(format!("mark {} cannot be recomputed", m.key));
        };
        if !close(recomputed.0, encoded.0) || !close(recomputed.1, encoded.1) {
            return Err(format!("mark {}: encoded {encoded:?}, recomputed {recomputed:?}", m.key));
        }
    }
    Ok(())
}

/// Histogram lineages are pairwise disjoint and together cover exactly the
/// rows where `column` is non-null.
pub fn check_partition(project: &Project, chart: &ChartSpec, column: &str) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for m in &chart.marks {
        for l in &m.lineage {
            if !seen.insert(l.clone()) {
                return Err(format!("{l:?} is in two bins"));
            }
        }
    }
    let mut expected = BTreeSet::new();
    for (_, table) in project.tables() {
        let Some(c) = table.column_index(column) else { continue };
        for (rid, row) in table.row_ids.iter().zip(&table.rows) {
            if !row[c].is_null() {
                expected.insert(LineageRef::row(&table.id, rid));
            }
        }
    }
    if seen != expected {
        return Err(format!("bins cover {} rows, expected {}", seen.len(), expected.len()));
    }
    Ok(())
}
