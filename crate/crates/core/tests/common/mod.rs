#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use mmw_core::canvas::{BlockInput, Point, SyncMode};
use mmw_core::ids::{BlockId, CellId, DataSourceId};
use mmw_core::model::{CellValue, OriginDescriptor, OriginMethod, SourceKind};
use mmw_core::notebook::{CellKind, CellOutput};
use mmw_core::{FixedClock, Workbench};

pub const PARTICIPANTS: [&str; 4] = ["P1", "P2", "P3", "P4"];
pub const QUESTIONS: [&str; 2] = ["Q1", "Q2"];
pub const CONDITIONS: [&str; 2] = ["A", "B"];

pub fn clock() -> Box<FixedClock> {
    Box::new(FixedClock(Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()))
}

pub fn score(p: usize, q: usize, c: usize) -> i64 {
    ((p * 7 + q * 3 + c * 5) % 5) as i64 + 1
}

/// participant × question × condition, one Likert score each.
pub fn survey_csv() -> String {
    let mut out = String::from("participant,question,condition,score\n");
    for (p, pid) in PARTICIPANTS.iter().enumerate() {
        for (q, qid) in QUESTIONS.iter().enumerate() {
            for (c, cid) in CONDITIONS.iter().enumerate() {
                out.push_str(&format!("{pid},{qid},{cid},{}\n", score(p, q, c)));
            }
        }
    }
    out
}

pub fn interview(pid: &str) -> String {
    format!(
        "Interviewer: How did the task go?\n{pid}: The first layout confused me. \
         I liked the second one because the labels were clear. Overall it was fine."
    )
}

pub struct Scenario {
    pub wb: Workbench,
    pub survey: DataSourceId,
    pub interviews: Vec<DataSourceId>,
    pub cell: CellId,
    pub chart: BlockId,
}

pub const MEDIAN_CELL: &str = "survey = tables(\"survey\")\n\
    m = group_median(survey, [\"question\", \"condition\"], \"score\")\n\
    bar(m, [\"question\", \"condition\"], \"median\")";

/// One survey table, one coded interview per participant, a median bar chart
/// on the canvas.
pub fn scenario() -> Scenario {
    let mut wb = Workbench::create("study", "Layout study", clock());
    let survey = wb
        .import_source(SourceKind::Table, "survey", survey_csv().as_bytes(), OriginDescriptor::new(OriginMethod::Survey))
        .unwrap()
        .id;
    let code = wb.create_code("confusion", None).unwrap().id;
    let mut interviews = Vec::new();
    for pid in PARTICIPANTS {
        let origin = OriginDescriptor::new(OriginMethod::Interview).with_participant(pid);
        let src = wb.import_source(SourceKind::Text, &format!("interview {pid}"), interview(pid).as_bytes(), origin).unwrap();
        let doc = src.document().unwrap().clone();
        let start = doc.content.find("The first").unwrap();
        let start = doc.content[..start].chars().count();
        let span = mmw_core::model::Span::new(start, start + "The first layout confused me.".len());
        wb.annotate(&doc.id, span, &[code.clone()], "", "analyst").unwrap();
        interviews.push(src.id);
    }
    let cell = wb.add_cell(CellKind::Code, MEDIAN_CELL, None).unwrap().id;
    let run = wb.execute_cell(&cell).unwrap();
    assert!(matches!(run.cells[0].1[0], CellOutput::Chart { .. }), "{:?}", run.cells[0].1);
    let chart = wb
        .create_block(&BlockInput::CellOutput { cell_id: cell.clone(), output_index: 0 }, Point::new(0.0, 0.0), SyncMode::Live)
        .unwrap()
        .id;
    Scenario { wb, survey, interviews, cell, chart }
}

/// Raw survey rows, straight from the CSV text.
pub fn raw_rows() -> Vec<(String, String, String, i64)> {
    survey_csv()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_owned(), f[1].to_owned(), f[2].to_owned(), f[3].parse().unwrap())
        })
        .collect()
}

pub fn int(v: i64) -> CellValue {
    CellValue::Int(v)
}
