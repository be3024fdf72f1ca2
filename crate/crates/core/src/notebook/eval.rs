//! Evaluation of parsed cells against the shared variable space.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ids::CellId;
use crate::model::{CellValue, Project};
use crate::notebook::frame::{Derivation, Frame, PipelineStep};
use crate::notebook::lang::ast::{Expr, Literal, Program, Stmt};
use crate::notebook::ops::{self, Bins};
use crate::notebook::value::{DocumentSet, Value};
use crate::foraging::view::{filter_indices, sort_indices, CompareOp, Direction, Predicate, SortKey};

/// Names bound by the workbench itself. They can be read but never assigned.
pub const PREBOUND: [&str; 4] = ["docs", "tables", "annotations", "codebook"];

/// User bindings created by assignments. Pre-bound names are resolved from the
/// project on every read, so they always reflect the current data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableSpace {
    bindings: BTreeMap<String, Value>,
}

impl VariableSpace {
    pub fn get(&self, project: &Project, name: &str) -> Result<Value> {
        match name {
            "docs" => Ok(Value::Docs(all_docs(project))),
            "tables" => Ok(Value::Record(
                project
                    .tables()
                    .map(|(s, t)| (s.name.clone(), Value::Table(Box::new(Frame::from_table(s, t)))))
                    .collect(),
            )),
            "annotations" => Ok(Value::List(
                project
                    .annotations
                    .iter()
                    .map(|a| {
                        let codes = a
                            .code_ids
                            .iter()
                            .filter_map(|c| project.code(c).ok())
                            .map(|c| Value::Str(c.label.clone()))
                            .collect();
                        Value::Record(BTreeMap::from([
                            ("id".to_owned(), Value::Str(a.id.to_string())),
                            ("document_id".to_owned(), Value::Str(a.document_id.to_string())),
                            ("start".to_owned(), Value::Int(a.span.start as i64)),
                            ("end".to_owned(), Value::Int(a.span.end as i64)),
                            ("codes".to_owned(), Value::List(codes)),
                            ("note".to_owned(), Value::Str(a.note.clone())),
                            ("author".to_owned(), Value::Str(a.author.clone())),
                            ("text".to_owned(), Value::Str(a.text.clone())),
                        ]))
                    })
                    .collect(),
            )),
            "codebook" => Ok(Value::List(
                project
                    .codebook
                    .iter()
                    .map(|c| {
                        Value::Record(BTreeMap::from([
                            ("id".to_owned(), Value::Str(c.id.to_string())),
                            ("label".to_owned(), Value::Str(c.label.clone())),
                            ("color".to_owned(), Value::Str(c.color.clone())),
                        ]))
                    })
                    .collect(),
            )),
            _ => self.bindings.get(name).cloned().ok_or_else(|| Error::Name(name.to_owned())),
        }
    }

    pub fn set(&mut self, name: &str, value: Value) -> Result<()> {
        if PREBOUND.contains(&name) {
            return Err(Error::ReadOnly(name.to_owned()));
        }
        self.bindings.insert(name.to_owned(), value);
        Ok(())
    }

    pub fn user_names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }
}

fn all_docs(project: &Project) -> DocumentSet {
    let sources: Vec<_> = project.documents().map(|(s, _)| s).collect();
    DocumentSet {
        ids: project.documents().map(|(_, d)| d.id.clone()).collect(),
        derivation: Derivation::imported(&sources),
    }
}

/// Runs one parsed program. Assignments made before a failing statement stay
/// in `space`. Returns the value of the final statement when it is a bare
/// expression.
pub fn run_program(program: &Program, project: &Project, space: &mut VariableSpace, cell: &CellId) -> Result<Option<Value>> {
    let mut interp = Interp { project, space, cell };
    let mut last = None;
    for (i, stmt) in program.stmts.iter().enumerate() {
        match stmt {
            Stmt::Assign { name, expr, .. } => {
                let value = interp.eval(expr)?;
                interp.space.set(name, value)?;
            }
            Stmt::Expr { expr } => {
                let value = interp.eval(expr)?;
                if i + 1 == program.stmts.len() {
                    last = Some(value);
                }
            }
        }
    }
    Ok(last)
}

struct Interp<'a> {
    project: &'a Project,
    space: &'a mut VariableSpace,
    cell: &'a CellId,
}

fn type_err(msg: impl Into<String>) -> Error {
    Error::Type(msg.into())
}

struct Args<'v> {
    name: &'v str,
    values: Vec<Value>,
}

impl Args<'_> {
    fn arity(&self, min: usize, max: usize) -> Result<()> {
        let n = self.values.len();
        if n < min || n > max {
            let wanted = if min == max { min.to_string() } else { format!("{min} to {max}") };
            return Err(type_err(format!("{}() takes {wanted} arguments, got {n}", self.name)));
        }
        Ok(())
    }

    fn mismatch(&self, i: usize, wanted: &str) -> Error {
        type_err(format!(
            "argument {} of {}() must be {wanted}, got {}",
            i + 1,
            self.name,
            self.values[i].type_name()
        ))
    }

    fn table(&self, i: usize) -> Result<&Frame> {
        match &self.values[i] {
            Value::Table(t) => Ok(t),
            _ => Err(self.mismatch(i, "a table")),
        }
    }

    fn string(&self, i: usize) -> Result<&str> {
        match &self.values[i] {
            Value::Str(s) => Ok(s),
            _ => Err(self.mismatch(i, "a string")),
        }
    }

    fn strings(&self, i: usize) -> Result<Vec<String>> {
        match &self.values[i] {
            Value::Str(s) => Ok(vec![s.clone()]),
            Value::List(items) => items
                .iter()
                .map(|v| match v {
                    Value::Str(s) => Ok(s.clone()),
                    _ => Err(self.mismatch(i, "a list of strings")),
                })
                .collect(),
            _ => Err(self.mismatch(i, "a string or list of strings")),
        }
    }

    fn docs(&self, i: usize) -> Result<&DocumentSet> {
        match &self.values[i] {
            Value::Docs(d) => Ok(d),
            _ => Err(self.mismatch(i, "documents")),
        }
    }
}

impl Interp<'_> {
    fn eval(&mut self, expr: &Expr) -> Result<Value> {
        match expr {
            Expr::Literal { value, .. } => Ok(match value {
                Literal::Str(s) => Value::Str(s.clone()),
                Literal::Int(i) => Value::Int(*i),
                Literal::Float(x) => Value::Float(*x),
                Literal::Bool(b) => Value::Bool(*b),
            }),
            Expr::List { items, .. } => Ok(Value::List(items.iter().map(|e| self.eval(e)).collect::<Result<_>>()?)),
            Expr::Ident { name, .. } => self.space.get(self.project, name),
            Expr::Call { name, args, .. } => {
                let values = args.iter().map(|e| self.eval(e)).collect::<Result<Vec<_>>>()?;
                self.call(name, Args { name, values })
            }
        }
    }

    fn call(&mut self, name: &str, a: Args<'_>) -> Result<Value> {
        let cell = Some(self.cell);
        let chart = |c: crate::notebook::chart::ChartSpec| Value::Chart(Box::new(c));
        let table = |f: Frame| Value::Table(Box::new(f));
        match name {
            "tables" => {
                a.arity(1, 1)?;
                let wanted = a.string(0)?;
                let (source, t) = self
                    .project
                    .tables()
                    .find(|(s, _)| s.name == wanted)
                    .ok_or_else(|| Error::reference("table", wanted))?;
                Ok(table(Frame::from_table(source, t)))
            }
            "docs" => {
                if a.values.is_empty() {
                    return Ok(Value::Docs(all_docs(self.project)));
                }
                let mut sources = Vec::new();
                for i in 0..a.values.len() {
                    for wanted in a.strings(i)? {
                        let s = self
                            .project
                            .documents()
                            .find(|(s, _)| s.name == wanted)
                            .ok_or_else(|| Error::reference("document", wanted.as_str()))?;
                        sources.push(s);
                    }
                }
                Ok(Value::Docs(DocumentSet {
                    ids: sources.iter().map(|(_, d)| d.id.clone()).collect(),
                    derivation: Derivation::imported(&sources.iter().map(|(s, _)| *s).collect::<Vec<_>>()),
                }))
            }
            "filter" => {
                a.arity(4, 4)?;
                let frame = a.table(0)?;
                let column = a.string(1)?;
                let op_text = a.string(2)?;
                let op = CompareOp::parse(op_text).ok_or_else(|| type_err(format!("unknown operator `{op_text}`")))?;
                let literal = match &a.values[3] {
                    Value::Str(s) => CellValue::Str(s.clone()),
                    Value::Int(i) => CellValue::Int(*i),
                    Value::Float(x) => CellValue::Float(*x),
                    Value::Bool(b) => CellValue::Bool(*b),
                    _ => return Err(a.mismatch(3, "a scalar")),
                };
                let step = PipelineStep::new("filter", [column.to_owned(), op_text.to_owned(), literal.to_string()]);
                let keep = filter_indices(&frame.columns, &frame.rows, &[Predicate::new(column, op, literal)])?;
                Ok(table(frame.select(&keep, step)))
            }
            "sort" => {
                a.arity(2, 3)?;
                let frame = a.table(0)?;
                let column = a.string(1)?;
                let direction = match a.values.get(2) {
                    None => Direction::Asc,
                    Some(Value::Str(s)) if s == "asc" => Direction::Asc,
                    Some(Value::Str(s)) if s == "desc" => Direction::Desc,
                    Some(_) => return Err(a.mismatch(2, "\"asc\" or \"desc\"")),
                };
                let mut order: Vec<usize> = (0..frame.len()).collect();
                sort_indices(&frame.columns, &frame.rows, &mut order, &[SortKey::new(column, direction)])?;
                let dir = if direction == Direction::Asc { "asc" } else { "desc" };
                Ok(table(frame.select(&order, PipelineStep::new("sort", [column, dir]))))
            }
            "word_freq" => {
                a.arity(1, 2)?;
                let stop = if a.values.len() == 2 { a.strings(1)? } else { Vec::new() };
                Ok(table(ops::word_freq(self.project, a.docs(0)?, &stop)?))
            }
            "code_freq" => {
                a.arity(0, 0)?;
                Ok(table(ops::code_freq(self.project)))
            }
            "group_median" => {
                a.arity(3, 3)?;
                Ok(table(ops::group_median(a.table(0)?, &a.strings(1)?, a.string(2)?)?))
            }
            "histogram" => {
                a.arity(2, 3)?;
                let frame = a.table(0)?;
                let column = a.string(1)?;
                let bins = match a.values.get(2) {
                    Some(Value::Int(n)) if *n >= 1 => Bins::Count(*n as usize),
                    Some(Value::Str(s)) if s == "integer" => Bins::Integer,
                    Some(_) => return Err(a.mismatch(2, "a positive int or \"integer\"")),
                    None => ops::default_bins(frame, column),
                };
                Ok(chart(ops::histogram(frame, column, bins, cell, "")?))
            }
            "scatter" => {
                a.arity(3, 3)?;
                Ok(chart(ops::scatter(a.table(0)?, a.string(1)?, a.string(2)?, cell, "")?))
            }
            "bar" => {
                a.arity(3, 3)?;
                Ok(chart(ops::bar(a.table(0)?, &a.strings(1)?, a.string(2)?, cell, "")?))
            }
            "wordcloud" => {
                a.arity(1, 2)?;
                let freq = match &a.values[0] {
                    Value::Table(t) if a.values.len() == 1 => (**t).clone(),
                    Value::Docs(d) => {
                        let stop = if a.values.len() == 2 { a.strings(1)? } else { Vec::new() };
                        ops::word_freq(self.project, d, &stop)?
                    }
                    _ => return Err(a.mismatch(0, "documents or a word_freq table")),
                };
                Ok(chart(ops::wordcloud(&freq, cell, "")?))
            }
            "stats" => {
                a.arity(2, 2)?;
                ops::stats(a.table(0)?, a.string(1)?)
            }
            "len" => {
                a.arity(1, 1)?;
                let n = match &a.values[0] {
                    Value::Str(s) => s.chars().count(),
                    Value::List(l) => l.len(),
                    Value::Record(r) => r.len(),
                    Value::Table(t) => t.len(),
                    Value::Chart(c) => c.marks.len(),
                    Value::Docs(d) => d.ids.len(),
                    _ => return Err(a.mismatch(0, "a collection")),
                };
                Ok(Value::Int(n as i64))
            }
            other => Err(Error::Name(other.to_owned())),
        }
    }
}
