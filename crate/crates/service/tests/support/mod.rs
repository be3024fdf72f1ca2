//! In-process client and a random mutation driver, shared with the CLI's
//! acceptance suite.

#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use mmw_core::{FixedClock, Workbench};
use mmw_service::Service;
use serde_json::{json, Value};
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub body: Value,
    pub seq: Option<u64>,
}

pub fn service() -> Service {
    let clock = FixedClock(Utc.with_ymd_and_hms(2024, 4, 2, 10, 0, 0).unwrap());
    Service::new(Workbench::create("p", "Study", Box::new(clock)))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let seq = resp.headers().get("x-event-seq").map(|v| v.to_str().unwrap().parse().unwrap());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    Reply { status, body, seq }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    call(app, Method::POST, uri, Some(body)).await
}

pub const CELLS: [&str; 6] = [
    "histogram(tables(\"t0\"), \"score\", \"integer\")",
    "m = group_median(tables(\"t0\"), [\"question\"], \"score\")\nbar(m, [\"question\"], \"median\")",
    "scatter(tables(\"t0\"), \"score\", \"score\")",
    "wordcloud(docs())",
    "code_freq()",
    "nope(",
];

fn table_csv(n: u32) -> String {
    let mut s = String::from("participant,question,score\n");
    for p in 0..4 {
        for q in 0..2 {
            s.push_str(&format!("P{p},Q{q},{}\n", (p * 3 + q + n) % 5 + 1));
        }
    }
    s
}

/// Cycles through `words` to pick operations and their arguments.
struct Dice<'a> {
    words: &'a [u32],
    at: usize,
}

impl Dice<'_> {
    fn roll(&mut self, n: usize) -> usize {
        let w = self.words[self.at % self.words.len()];
        self.at += 1;
        if n == 0 {
            0
        } else {
            w as usize % n
        }
    }

    fn pick<'v>(&mut self, items: &'v [Value]) -> Option<&'v Value> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.roll(items.len())])
        }
    }
}

fn ids(v: &Value) -> Vec<Value> {
    v.as_array().map(|a| a.iter().map(|e| e["id"].clone()).collect()).unwrap_or_default()
}

/// Applies `count` random mutations through the API. Some of them fail
/// (bad spans, dangling anchors, snapshot refresh on a live block); those
/// must leave the event log consistent too. Returns how many succeeded.
pub async fn random_mutations(app: &Router, words: &[u32], count: usize) -> usize {
    let mut dice = Dice { words, at: 0 };
    let mut ok = 0;
    let mut tables = 0;
    let mut docs = 0;
    for step in 0..count {
        let p = get(app, "/api/v1/projects/p").await.body;
        let blocks = p["canvas"]["blocks"].as_array().cloned().unwrap_or_default();
        let cells = ids(&p["notebook"]["cells"]);
        let block_ids = ids(&p["canvas"]["blocks"]);
        let sources = p["data_sources"].as_array().cloned().unwrap_or_default();
        let doc_ids: Vec<Value> = sources.iter().filter(|s| s["kind"] == "text").map(|s| s["payload"]["id"].clone()).collect();
        let table_srcs: Vec<Value> = sources.iter().filter(|s| s["kind"] == "table").map(|s| s["id"].clone()).collect();
        let codes = ids(&p["codebook"]);
        let op = if step < 2 { step } else { dice.roll(16) };
        let r = match op {
            0 => {
                docs += 1;
                post(app, "/api/v1/projects/p/sources", json!({
                    "kind": "text", "name": format!("interview {docs}"),
                    "origin": {"method": "interview", "participant": format!("P{}", dice.roll(4))},
                    "text": "I liked it. The layout confused me at first."
                })).await
            }
            1 if tables == 0 => {
                tables += 1;
                post(app, "/api/v1/projects/p/sources", json!({
                    "kind": "table", "name": "t0", "origin": {"method": "survey"}, "text": table_csv(0)
                })).await
            }
            1 | 2 => post(app, "/api/v1/codes", json!({"label": format!("code {}", dice.roll(6))})).await,
            3 => match dice.pick(&doc_ids) {
                Some(d) => {
                    let start = dice.roll(40);
                    let end = start + dice.roll(12);
                    let code: Vec<Value> = dice.pick(&codes).cloned().into_iter().collect();
                    post(app, &format!("/api/v1/documents/{}/annotations", d.as_str().unwrap()), json!({
                        "span": {"start": start, "end": end}, "code_ids": code, "author": "a"
                    })).await
                }
                None => continue,
            },
            4 => post(app, "/api/v1/notebook/cells", json!({"source": CELLS[dice.roll(CELLS.len())]})).await,
            5 => match dice.pick(&cells) {
                Some(c) => call(app, Method::PUT, &format!("/api/v1/cells/{}", c.as_str().unwrap()),
                    Some(json!({"source": CELLS[dice.roll(CELLS.len())]}))).await,
                None => continue,
            },
            6 => match dice.pick(&cells) {
                Some(c) => post(app, &format!("/api/v1/cells/{}/execute", c.as_str().unwrap()), json!(null)).await,
                None => continue,
            },
            7 => post(app, "/api/v1/notebook/execute_all", json!(null)).await,
            8 => {
                let mode = if dice.roll(2) == 0 { "live" } else { "snapshot" };
                let pos = json!({"x": dice.roll(900), "y": dice.roll(600)});
                let body = match (dice.roll(3), dice.pick(&cells), dice.pick(&doc_ids)) {
                    (0, Some(c), _) => json!({"input": {"type": "cell_output", "cell_id": c, "output_index": 0}, "position": pos, "sync_mode": mode}),
                    (1, _, Some(_)) => {
                        let src = sources.iter().find(|s| s["kind"] == "text").unwrap()["id"].clone();
                        json!({"input": {"type": "extract", "selection": {"data_source_id": src, "target": {"type": "span", "start": 0, "end": 10}}}, "position": pos, "sync_mode": mode})
                    }
                    _ => json!({"note": "remember this", "position": pos}),
                };
                post(app, "/api/v1/canvas/blocks", body).await
            }
            9 => match dice.pick(&block_ids) {
                Some(b) => {
                    let body = match dice.roll(4) {
                        0 => json!({"position": {"x": dice.roll(500), "y": 3.5}}),
                        1 => json!({"sync_mode": "snapshot"}),
                        2 => json!({"sync_mode": "live"}),
                        _ => json!({"refresh": true, "size": {"w": 100, "h": 80}}),
                    };
                    call(app, Method::PATCH, &format!("/api/v1/canvas/blocks/{}", b.as_str().unwrap()), Some(body)).await
                }
                None => continue,
            },
            10 => match dice.pick(&block_ids) {
                Some(b) => call(app, Method::DELETE, &format!("/api/v1/canvas/blocks/{}", b.as_str().unwrap()), None).await,
                None => continue,
            },
            11 => post(app, "/api/v1/canvas/undo", json!(null)).await,
            12 => {
                if block_ids.len() < 2 {
                    continue;
                }
                let (a, b) = (dice.pick(&block_ids).unwrap().clone(), dice.pick(&block_ids).unwrap().clone());
                post(app, "/api/v1/canvas/links", json!({"from": {"block_id": a}, "to": {"block_id": b}, "label": "supports"})).await
            }
            13 => {
                let regions = ids(&p["canvas"]["regions"]);
                match (dice.pick(&regions), dice.pick(&block_ids)) {
                    (Some(r), Some(b)) => post(app, &format!("/api/v1/canvas/regions/{}/members", r.as_str().unwrap()), json!({"block_id": b})).await,
                    _ => post(app, "/api/v1/canvas/regions", json!({"name": "RQ1", "bounds": {"x": 0, "y": 0, "w": 400, "h": 300}})).await,
                }
            }
            14 => match dice.pick(&table_srcs) {
                Some(t) => call(app, Method::PATCH, &format!("/api/v1/sources/{}/rows/r{}", t.as_str().unwrap(), dice.roll(8) + 1),
                    Some(json!({"column": "score", "value": dice.roll(5) + 1}))).await,
                None => continue,
            },
            _ => {
                let charts: Vec<&Value> = blocks.iter().filter(|b| b["kind"] == "chart" && !b["payload"]["chart"]["marks"].as_array().unwrap().is_empty()).collect();
                let Some(b) = charts.first() else { continue };
                let marks = b["payload"]["chart"]["marks"].as_array().unwrap();
                let anchor = json!({"block_id": b["id"], "subregion": {"type": "element", "element_id": marks[dice.roll(marks.len())]["element_id"]}});
                let u = post(app, "/api/v1/canvas/unwind", json!({"anchor": anchor})).await;
                match u.body["descriptors"].as_array().and_then(|d| d.first()) {
                    Some(d) if u.status == StatusCode::OK => post(app, "/api/v1/canvas/unwind/accept", json!({
                        "parent": anchor, "descriptor": d, "position": {"x": 10, "y": 20}
                    })).await,
                    _ => u,
                }
            }
        };
        if r.status.is_success() {
            ok += 1;
        } else {
            assert!(r.body["error"]["code"].is_string(), "error body without a code: {:?}", r.body);
        }
    }
    ok
}

/// Rebuilds the project from `snapshot` (taken at `seq`) plus the event log and
/// compares it with a fresh GET.
pub async fn replay_matches(app: &Router, snapshot: &Value, seq: u64) -> Result<(), String> {
    let log = get(app, &format!("/api/v1/events?since={seq}")).await.body;
    let events: Vec<mmw_service::ApiEvent> = serde_json::from_value(log["events"].clone()).map_err(|e| e.to_string())?;
    let mut rebuilt = snapshot.clone();
    mmw_service::replay(&mut rebuilt, seq, &events);
    let fresh = get(app, "/api/v1/projects/p").await.body;
    if rebuilt == fresh {
        Ok(())
    } else {
        Err(format!("replayed {} events; state differs from GET", events.len()))
    }
}
