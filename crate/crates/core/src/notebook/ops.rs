//! Aggregations and chart builders.
//!
//! Nulls are excluded from every aggregation. Each output row or mark carries
//! the lineage of the inputs it was computed from, so the canvas can unwind it.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::ids::{CellId, RowId};
use crate::model::{CellValue, Column, DType, Project};
use crate::notebook::chart::{element_id, ChartKind, ChartSpec, Encoding, Mark, Statistic};
use crate::notebook::frame::{Derivation, Frame, Measure, PipelineStep};
use crate::notebook::lineage::{Lineage, LineageRef};
use crate::notebook::value::{DocumentSet, Value};

/// Lowercased word tokens with their scalar-value offsets in `text`.
///
/// Tokens are maximal runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut count = 0;
    for (i, c) in text.chars().enumerate() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                start = i;
            }
            current.push(c);
        } else if !current.is_empty() {
            out.push((std::mem::take(&mut current).to_lowercase(), start, i));
        }
        count = i + 1;
    }
    if !current.is_empty() {
        out.push((current.to_lowercase(), start, count));
    }
    out
}

fn mark_scope(cell: Option<&CellId>, scope: &str) -> String {
    cell.map_or_else(|| scope.to_owned(), |c| c.to_string())
}

/// Token counts over a set of documents, sorted by count desc then token.
pub fn word_freq(project: &Project, docs: &DocumentSet, stopwords: &[String]) -> Result<Frame> {
    if docs.ids.is_empty() {
        return Err(Error::Validation("word_freq needs at least one document".into()));
    }
    let stop: Vec<String> = stopwords.iter().map(|s| s.to_lowercase()).collect();
    let mut counts: HashMap<String, Lineage> = HashMap::new();
    for doc_id in &docs.ids {
        let (_, doc) = project.document(doc_id)?;
        for (token, start, end) in tokenize(&doc.content) {
            if stop.contains(&token) {
                continue;
            }
            counts.entry(token).or_default().insert(LineageRef::Token {
                document_id: doc_id.clone(),
                start,
                end,
            });
        }
    }
    let mut entries: Vec<(String, Lineage)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));

    Ok(Frame {
        columns: vec![Column::new("token", DType::String), Column::new("count", DType::Int)],
        rows: entries
            .iter()
            .map(|(t, l)| vec![CellValue::Str(t.clone()), CellValue::Int(l.len() as i64)])
            .collect(),
        row_ids: entries.iter().map(|(t, _)| RowId(format!("tok:{t}"))).collect(),
        lineage: entries.into_iter().map(|(_, l)| l).collect(),
        aggregate: true,
        measures: BTreeMap::from([("count".to_owned(), Measure::Count)]),
        derivation: docs.derivation.then(PipelineStep::new("word_freq", stop)),
    })
}

/// Number of annotations per code; codes that were never applied are omitted.
pub fn code_freq(project: &Project) -> Frame {
    let mut per_code: Vec<(String, Lineage)> = project
        .codebook
        .iter()
        .map(|code| {
            let lineage = project
                .annotations
                .iter()
                .filter(|a| a.code_ids.contains(&code.id))
                .map(|a| LineageRef::Annotation { annotation_id: a.id.clone() })
                .collect::<Lineage>();
            (code.label.clone(), lineage)
        })
        .filter(|(_, l)| !l.is_empty())
        .collect();
    per_code.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));

    let annotated: Vec<_> = project
        .documents()
        .filter(|(_, d)| project.annotations.iter().any(|a| a.document_id == d.id))
        .map(|(s, _)| s)
        .collect();
    Frame {
        columns: vec![Column::new("code_label", DType::String), Column::new("count", DType::Int)],
        rows: per_code
            .iter()
            .map(|(label, l)| vec![CellValue::Str(label.clone()), CellValue::Int(l.len() as i64)])
            .collect(),
        row_ids: per_code.iter().map(|(label, _)| RowId(format!("code:{label}"))).collect(),
        lineage: per_code.into_iter().map(|(_, l)| l).collect(),
        aggregate: true,
        measures: BTreeMap::from([("count".to_owned(), Measure::Count)]),
        derivation: Derivation::imported(&annotated).then(PipelineStep::new("code_freq", Vec::<String>::new())),
    }
}

/// Median of two sorted middles for even counts. `values` must be non-empty.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn compare_keys(a: &[CellValue], b: &[CellValue]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// One row per distinct group tuple, ordered by the tuple, with the median of
/// `value_column`. Groups without any non-null value are dropped.
pub fn group_median(frame: &Frame, group_columns: &[String], value_column: &str) -> Result<Frame> {
    let value_idx = frame.numeric_column(value_column)?;
    let group_idx = group_columns
        .iter()
        .map(|c| frame.column_index(c))
        .collect::<Result<Vec<_>>>()?;
    if group_columns.iter().any(|c| c == "median") {
        return Err(Error::Validation("a group column cannot be named `median`".into()));
    }

    let mut order: Vec<usize> = (0..frame.len()).collect();
    let key_of = |i: usize| group_idx.iter().map(|&c| frame.rows[i][c].clone()).collect::<Vec<_>>();
    order.sort_by(|&a, &b| compare_keys(&key_of(a), &key_of(b)));

    let mut out = Frame {
        columns: group_idx
            .iter()
            .map(|&c| frame.columns[c].clone())
            .chain([Column::new("median", DType::Float)])
            .collect(),
        rows: Vec::new(),
        row_ids: Vec::new(),
        lineage: Vec::new(),
        aggregate: true,
        measures: BTreeMap::new(),
        derivation: frame.derivation.then(PipelineStep::new(
            "group_median",
            group_columns.iter().cloned().chain([value_column.to_owned()]),
        )),
    };
    if !frame.aggregate {
        out.measures.insert("median".into(), Measure::Median { column: value_column.to_owned() });
    }

    let mut i = 0;
    while i < order.len() {
        let key = key_of(order[i]);
        let mut j = i;
        let mut values = Vec::new();
        let mut lineage = Lineage::new();
        while j < order.len() && compare_keys(&key_of(order[j]), &key).is_eq() {
            let row = order[j];
            if let Some(v) = frame.rows[row][value_idx].as_f64() {
                values.push(v);
                lineage.extend(frame.lineage[row].iter().cloned());
            }
            j += 1;
        }
        if !values.is_empty() {
            let m = median(&mut values);
            out.row_ids.push(RowId(format!("grp:{}", serde_json::to_string(&key).expect("cells serialize"))));
            out.rows.push(key.into_iter().chain([CellValue::Float(m)]).collect());
            out.lineage.push(lineage);
        }
        i = j;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bins {
    /// Equal-width bins over `[min, max]`.
    Count(usize),
    /// One bin per integer value.
    Integer,
}

/// Integer columns get one bin per value (Likert items); floats get Sturges' rule.
pub fn default_bins(frame: &Frame, column: &str) -> Bins {
    match frame.dtype_of(column) {
        Some(DType::Int) => Bins::Integer,
        _ => {
            let n = frame.len().max(1) as f64;
            Bins::Count(n.log2().ceil() as usize + 1)
        }
    }
}

const MAX_INTEGER_BINS: i64 = 10_000;

/// Lower edge of bin `i` of `n` equal-width bins over `[min, max]`.
pub fn bin_edge(min: f64, max: f64, n: usize, i: usize) -> f64 {
    if i == n {
        max
    } else {
        min + (max - min) * (i as f64) / (n as f64)
    }
}

fn locate_bin(v: f64, min: f64, max: f64, n: usize) -> usize {
    let mut i = (((v - min) / (max - min)) * n as f64).floor().clamp(0.0, (n - 1) as f64) as usize;
    // Nudge across edges so membership always agrees with the edge comparisons.
    while i > 0 && v < bin_edge(min, max, n, i) {
        i -= 1;
    }
    while i + 1 < n && v >= bin_edge(min, max, n, i + 1) {
        i += 1;
    }
    i
}

fn chart_level(frame: &Frame) -> u8 {
    if frame.aggregate {
        2
    } else {
        1
    }
}

pub fn histogram(frame: &Frame, column: &str, bins: Bins, cell: Option<&CellId>, scope: &str) -> Result<ChartSpec> {
    let idx = frame.numeric_column(column)?;
    let points: Vec<(f64, &Lineage)> = frame
        .rows
        .iter()
        .zip(&frame.lineage)
        .filter_map(|(row, l)| row[idx].as_f64().map(|v| (v, l)))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyData(column.to_owned()));
    }
    let min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);

    // (key, lo, hi, lineage)
    let mut bars: Vec<(String, f64, f64, Lineage)> = Vec::new();
    match bins {
        Bins::Integer => {
            let (first, last) = (min.floor() as i64, max.floor() as i64);
            if last - first >= MAX_INTEGER_BINS {
                return Err(Error::Validation(format!("integer bins would span {} values", last - first + 1)));
            }
            for k in first..=last {
                bars.push((k.to_string(), k as f64, (k + 1) as f64, Lineage::new()));
            }
            for (v, l) in &points {
                let slot = (v.floor() as i64 - first) as usize;
                bars[slot].3.extend(l.iter().cloned());
            }
        }
        Bins::Count(0) => return Err(Error::Validation("histogram needs at least one bin".into())),
        Bins::Count(_) if min == max => {
            let all = points.iter().flat_map(|(_, l)| l.iter().cloned()).collect();
            bars.push((format!("{min}..{max}"), min, max, all));
        }
        Bins::Count(n) => {
            for i in 0..n {
                let (lo, hi) = (bin_edge(min, max, n, i), bin_edge(min, max, n, i + 1));
                bars.push((format!("{lo}..{hi}"), lo, hi, Lineage::new()));
            }
            for (v, l) in &points {
                bars[locate_bin(*v, min, max, n)].3.extend(l.iter().cloned());
            }
        }
    }

    let scope = mark_scope(cell, scope);
    let bins_arg = match bins {
        Bins::Integer => "integer".to_owned(),
        Bins::Count(n) => n.to_string(),
    };
    Ok(ChartSpec {
        chart_kind: ChartKind::Histogram,
        marks: bars
            .into_iter()
            .map(|(key, lo, hi, lineage)| Mark {
                element_id: element_id(&scope, ChartKind::Histogram, &key),
                key,
                encoding: Encoding::Bin { lo, hi, count: lineage.len() as u64 },
                lineage,
            })
            .collect(),
        title: format!("Distribution of {column}"),
        x_label: column.to_owned(),
        y_label: "count".to_owned(),
        source_cell: cell.cloned(),
        abstraction_level: chart_level(frame),
        statistic: Statistic::Count,
        value_column: Some(column.to_owned()),
        derivation: frame.derivation.then(PipelineStep::new("histogram", [column.to_owned(), bins_arg])),
    })
}

pub fn scatter(frame: &Frame, x_column: &str, y_column: &str, cell: Option<&CellId>, scope: &str) -> Result<ChartSpec> {
    let xi = frame.numeric_column(x_column)?;
    let yi = frame.numeric_column(y_column)?;
    let scope = mark_scope(cell, scope);
    let marks = frame
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let (x, y) = (row[xi].as_f64()?, row[yi].as_f64()?);
            let key = frame.row_ids[i].to_string();
            Some(Mark {
                element_id: element_id(&scope, ChartKind::Scatter, &key),
                key,
                encoding: Encoding::Point { x, y },
                lineage: frame.lineage[i].clone(),
            })
        })
        .collect();
    Ok(ChartSpec {
        chart_kind: ChartKind::Scatter,
        marks,
        title: format!("{y_column} by {x_column}"),
        x_label: x_column.to_owned(),
        y_label: y_column.to_owned(),
        source_cell: cell.cloned(),
        abstraction_level: chart_level(frame),
        statistic: Statistic::Coordinate { x_column: x_column.to_owned(), y_column: y_column.to_owned() },
        value_column: Some(y_column.to_owned()),
        derivation: frame.derivation.then(PipelineStep::new("scatter", [x_column, y_column])),
    })
}

/// One bar per row. Several label columns are joined with `" / "`.
pub fn bar(
    frame: &Frame,
    label_columns: &[String],
    value_column: &str,
    cell: Option<&CellId>,
    scope: &str,
) -> Result<ChartSpec> {
    let vi = frame.numeric_column(value_column)?;
    if label_columns.is_empty() {
        return Err(Error::Validation("bar needs a label column".into()));
    }
    let li = label_columns.iter().map(|c| frame.column_index(c)).collect::<Result<Vec<_>>>()?;
    let scope = mark_scope(cell, scope);
    let mut marks: Vec<Mark> = Vec::new();
    for (i, row) in frame.rows.iter().enumerate() {
        let label = li.iter().map(|&c| row[c].to_string()).collect::<Vec<_>>().join(" / ");
        if marks.iter().any(|m| m.key == label) {
            return Err(Error::Label(label));
        }
        let Some(value) = row[vi].as_f64() else { continue };
        marks.push(Mark {
            element_id: element_id(&scope, ChartKind::Bar, &label),
            encoding: Encoding::Bar { label: label.clone(), value },
            key: label,
            lineage: frame.lineage[i].clone(),
        });
    }
    let (statistic, value_col) = match frame.measures.get(value_column) {
        Some(Measure::Median { column }) => (Statistic::Median { column: column.clone() }, column.clone()),
        Some(Measure::Count) => (Statistic::Count, value_column.to_owned()),
        None => (Statistic::Value { column: value_column.to_owned() }, value_column.to_owned()),
    };
    Ok(ChartSpec {
        chart_kind: ChartKind::Bar,
        marks,
        title: format!("{value_column} by {}", label_columns.join(", ")),
        x_label: label_columns.join(" / "),
        y_label: value_column.to_owned(),
        source_cell: cell.cloned(),
        abstraction_level: chart_level(frame),
        statistic,
        value_column: Some(value_col),
        derivation: frame.derivation.then(PipelineStep::new(
            "bar",
            label_columns.iter().cloned().chain([value_column.to_owned()]),
        )),
    })
}

/// Word cloud over a `(token, count)` table such as [`word_freq`] produces.
pub fn wordcloud(frame: &Frame, cell: Option<&CellId>, scope: &str) -> Result<ChartSpec> {
    let ti = frame.column_index("token")?;
    let ci = frame.numeric_column("count")?;
    let scope = mark_scope(cell, scope);
    let marks = frame
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let token = row[ti].to_string();
            let count = row[ci].as_f64()? as u64;
            Some(Mark {
                element_id: element_id(&scope, ChartKind::Wordcloud, &token),
                key: token.clone(),
                encoding: Encoding::Word { token, count },
                lineage: frame.lineage[i].clone(),
            })
        })
        .collect();
    Ok(ChartSpec {
        chart_kind: ChartKind::Wordcloud,
        marks,
        title: "Word cloud".to_owned(),
        x_label: "token".to_owned(),
        y_label: "count".to_owned(),
        source_cell: cell.cloned(),
        abstraction_level: 2,
        statistic: Statistic::Count,
        value_column: None,
        derivation: frame.derivation.then(PipelineStep::new("wordcloud", Vec::<String>::new())),
    })
}

/// `{n, mean, median, sd}` with the sample standard deviation.
pub fn stats(frame: &Frame, column: &str) -> Result<Value> {
    let idx = frame.numeric_column(column)?;
    let mut values: Vec<f64> = frame.rows.iter().filter_map(|r| r[idx].as_f64()).collect();
    let n = values.len();
    let (mean, med, sd) = if n == 0 {
        (None, None, None)
    } else {
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = (n >= 2).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        (Some(mean), Some(median(&mut values)), sd)
    };
    Ok(Value::Record(BTreeMap::from([
        ("n".to_owned(), Value::Int(n as i64)),
        ("mean".to_owned(), Value::opt_float(mean)),
        ("median".to_owned(), Value::opt_float(med)),
        ("sd".to_owned(), Value::opt_float(sd)),
    ])))
}
