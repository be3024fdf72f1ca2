use std::collections::HashMap;
use std::convert::Infallible;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::Router;
use base64::Engine;
use mmw_core::canvas::{
    self, Anchor, BlockDescriptor, BlockInput, Point, Rect, Size, SyncMode,
};
use mmw_core::foraging::{self, AnnotationFilter, Predicate, SortKey, TableView};
use mmw_core::ids::*;
use mmw_core::model::{CellValue, OriginDescriptor, OriginMethod, Project, SourceKind, Span};
use mmw_core::notebook::CellKind;
use mmw_core::{Execution, Workbench};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::{canonical_response, ApiError, ApiEvent, Emit, EventKind, Service};

type ApiResult = Result<Response, ApiError>;

pub(crate) fn router(service: Service) -> Router {
    let api = Router::new()
        .route("/projects", post(create_project))
        .route("/projects/{id}", get(get_project).put(put_project))
        .route("/projects/{id}/sources", post(import_source))
        .route("/sources/{id}", get(get_source))
        .route("/sources/{id}/rows/{row}", patch(edit_row))
        .route("/documents/{id}/annotations", post(annotate))
        .route("/annotations", get(list_annotations))
        .route("/codes", post(create_code).get(suggest_codes))
        .route("/tables/{id}/view", post(table_view))
        .route("/notebook/cells", post(add_cell))
        .route("/cells/{id}", put(update_cell))
        .route("/cells/{id}/execute", post(execute_cell))
        .route("/notebook/execute_all", post(execute_all))
        .route("/canvas/blocks", post(create_block))
        .route("/canvas/blocks/{id}", get(get_block).patch(patch_block).delete(delete_block))
        .route("/canvas/blocks/{id}/provenance", get(provenance))
        .route("/canvas/blocks/{id}/chains", get(chains))
        .route("/canvas/undo", post(undo))
        .route("/canvas/links", post(create_link))
        .route("/canvas/regions", post(create_region))
        .route("/canvas/regions/{id}/members", post(assign_region))
        .route("/canvas/unwind", post(unwind))
        .route("/canvas/unwind/accept", post(accept))
        .route("/events", get(events))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(service);
    Router::new().nest("/api/v1", api)
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text = std::str::from_utf8(body).map_err(|e| ApiError::from(mmw_core::Error::Encoding { offset: e.valid_up_to() }))?;
    serde_json::from_str(text).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn ok<T: serde::Serialize>(body: &T) -> ApiResult {
    Ok(canonical_response(StatusCode::OK, body))
}

fn created<T: serde::Serialize>(body: &T) -> ApiResult {
    Ok(canonical_response(StatusCode::CREATED, body))
}

fn one(kind: EventKind, id: impl ToString) -> Emit {
    vec![(kind, vec![id.to_string()])]
}

fn execution_json(run: &Execution) -> serde_json::Value {
    let cells: Vec<_> = run.cells.iter().map(|(id, outputs)| json!({"cell_id": id, "outputs": outputs})).collect();
    json!({"cells": cells, "sync": run.sync})
}

/// `cell_executed` per cell, then one event per block the sync touched.
fn execution_events(run: &Execution) -> Emit {
    let mut emit: Emit = run.cells.iter().map(|(id, _)| (EventKind::CellExecuted, vec![id.to_string()])).collect();
    for u in &run.sync.updates {
        let kind = if u.stale { EventKind::BlockStale } else { EventKind::BlockUpdated };
        emit.push((kind, vec![u.block_id.to_string()]));
    }
    emit
}

fn check_project(wb: &Workbench, id: &str) -> Result<(), ApiError> {
    if wb.project().id.as_str() != id {
        return Err(ApiError::not_found("project", id));
    }
    Ok(())
}

// Projects

#[derive(Deserialize)]
struct NewProject {
    #[serde(default)]
    id: Option<String>,
    name: String,
}

async fn create_project(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewProject = parse(&body)?;
    if req.name.trim().is_empty() {
        return Err(ApiError::bad_request("project name cannot be empty"));
    }
    let project = s.mutate(|wb| {
        let id = req.id.unwrap_or_else(|| "project".to_owned());
        let p = Project::new(ProjectId(id.clone()), &req.name, wb.now());
        wb.replace_project(p)?;
        Ok((wb.project().clone(), one(EventKind::ProjectReplaced, id)))
    })?;
    created(&project)
}

async fn get_project(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    let inner = s.lock();
    check_project(&inner.wb, &id)?;
    let mut resp = canonical_response(StatusCode::OK, inner.wb.project());
    resp.headers_mut().insert("x-event-seq", HeaderValue::from(inner.log.last_seq()));
    Ok(resp)
}

async fn put_project(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let project: Project = parse(&body)?;
    if project.id.as_str() != id {
        return Err(ApiError::bad_request(format!("body id `{}` does not match the path", project.id)));
    }
    let project = s.mutate(|wb| {
        wb.replace_project(project)?;
        Ok((wb.project().clone(), one(EventKind::ProjectReplaced, id)))
    })?;
    ok(&project)
}

// Foraging

#[derive(Deserialize)]
struct NewSource {
    kind: SourceKind,
    name: String,
    #[serde(default)]
    origin: Option<OriginDescriptor>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    base64: Option<String>,
}

async fn import_source(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: NewSource = parse(&body)?;
    let bytes = match (req.text, req.base64) {
        (Some(t), None) => t.into_bytes(),
        (None, Some(b)) => base64::engine::general_purpose::STANDARD
            .decode(b)
            .map_err(|e| ApiError::bad_request(format!("invalid base64: {e}")))?,
        _ => return Err(ApiError::bad_request("give exactly one of `text` and `base64`")),
    };
    let origin = req.origin.unwrap_or_else(|| OriginDescriptor::new(OriginMethod::Other));
    let src = s.mutate(|wb| {
        check_project(wb, &id)?;
        let src = wb.import_source(req.kind, &req.name, &bytes, origin)?;
        let emit = one(EventKind::SourceImported, &src.id);
        Ok((src, emit))
    })?;
    created(&src)
}

async fn get_source(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    s.with_workbench(|wb| ok(wb.project().source(&DataSourceId(id))?))
}

#[derive(Deserialize)]
struct RowEdit {
    column: String,
    value: CellValue,
}

async fn edit_row(State(s): State<Service>, Path((id, row)): Path<(String, String)>, body: Bytes) -> ApiResult {
    let req: RowEdit = parse(&body)?;
    let run = s.mutate(|wb| {
        let run = wb.edit_table_cell(&DataSourceId(id.clone()), &RowId(row.clone()), &req.column, req.value)?;
        let mut emit = vec![(EventKind::TableEdited, vec![id, row])];
        emit.extend(execution_events(&run));
        Ok((run, emit))
    })?;
    ok(&execution_json(&run))
}

#[derive(Deserialize)]
struct NewAnnotation {
    span: Span,
    #[serde(default)]
    code_ids: Vec<CodeId>,
    #[serde(default)]
    note: String,
    #[serde(default)]
    author: String,
}

async fn annotate(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: NewAnnotation = parse(&body)?;
    let ann = s.mutate(|wb| {
        let a = wb.annotate(&DocumentId(id), req.span, &req.code_ids, &req.note, &req.author)?;
        let emit = one(EventKind::AnnotationAdded, &a.id);
        Ok((a, emit))
    })?;
    created(&ann)
}

async fn list_annotations(State(s): State<Service>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let filter = AnnotationFilter {
        document_id: q.get("doc").filter(|v| !v.is_empty()).map(|v| DocumentId(v.clone())),
        code_id: q.get("code").filter(|v| !v.is_empty()).map(|v| CodeId(v.clone())),
    };
    s.with_workbench(|wb| ok(&foraging::query_annotations(wb.project(), &filter)))
}

#[derive(Deserialize)]
struct NewCode {
    label: String,
    #[serde(default)]
    color: Option<String>,
}

async fn create_code(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewCode = parse(&body)?;
    let code = s.mutate(|wb| {
        let c = wb.create_code(&req.label, req.color.as_deref())?;
        let emit = one(EventKind::CodeCreated, &c.id);
        Ok((c, emit))
    })?;
    created(&code)
}

async fn suggest_codes(State(s): State<Service>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let prefix = q.get("prefix").map(String::as_str).unwrap_or("");
    s.with_workbench(|wb| ok(&foraging::suggest_codes(wb.project(), prefix)))
}

#[derive(Deserialize)]
struct ViewBody {
    #[serde(default)]
    filters: Vec<Predicate>,
    #[serde(default)]
    sorts: Vec<SortKey>,
}

async fn table_view(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: ViewBody = parse(&body)?;
    let view = TableView { table_id: TableId(id), filters: req.filters, sorts: req.sorts };
    s.with_workbench(|wb| ok(&foraging::apply_table_view(wb.project(), &view)?))
}

// Notebook

#[derive(Deserialize)]
struct NewCell {
    #[serde(default = "code_kind")]
    kind: CellKind,
    source: String,
    #[serde(default)]
    index: Option<usize>,
}

fn code_kind() -> CellKind {
    CellKind::Code
}

async fn add_cell(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewCell = parse(&body)?;
    let cell = s.mutate(|wb| {
        let c = wb.add_cell(req.kind, &req.source, req.index)?;
        let emit = one(EventKind::CellAdded, &c.id);
        Ok((c, emit))
    })?;
    created(&cell)
}

#[derive(Deserialize)]
struct CellSource {
    source: String,
}

async fn update_cell(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: CellSource = parse(&body)?;
    let cell = s.mutate(|wb| {
        let c = wb.update_cell(&CellId(id), &req.source)?;
        let emit = one(EventKind::CellUpdated, &c.id);
        Ok((c, emit))
    })?;
    ok(&cell)
}

async fn execute_cell(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    let run = s.mutate(|wb| {
        let run = wb.execute_cell(&CellId(id))?;
        let emit = execution_events(&run);
        Ok((run, emit))
    })?;
    ok(&execution_json(&run))
}

async fn execute_all(State(s): State<Service>) -> ApiResult {
    let run = s.mutate(|wb| {
        let run = wb.execute_all();
        let emit = execution_events(&run);
        Ok((run, emit))
    })?;
    ok(&execution_json(&run))
}

// Canvas

#[derive(Deserialize)]
struct NewBlock {
    #[serde(default)]
    input: Option<BlockInput>,
    #[serde(default)]
    note: Option<String>,
    position: Point,
    #[serde(default)]
    sync_mode: SyncMode,
}

async fn create_block(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewBlock = parse(&body)?;
    let block = s.mutate(|wb| {
        let b = match (req.input, req.note) {
            (Some(input), None) => wb.create_block(&input, req.position, req.sync_mode)?,
            (None, Some(text)) => wb.create_note(&text, req.position)?,
            _ => return Err(ApiError::bad_request("give exactly one of `input` and `note`")),
        };
        let emit = one(EventKind::BlockCreated, &b.id);
        Ok((b, emit))
    })?;
    created(&block)
}

async fn get_block(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    s.with_workbench(|wb| ok(wb.project().canvas.block(&BlockId(id))?))
}

#[derive(Deserialize)]
struct BlockPatch {
    #[serde(default)]
    position: Option<Point>,
    #[serde(default)]
    size: Option<Size>,
    #[serde(default)]
    sync_mode: Option<SyncMode>,
    /// Re-materialize a snapshot block and clear its stale flag.
    #[serde(default)]
    refresh: bool,
}

async fn patch_block(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: BlockPatch = parse(&body)?;
    let id = BlockId(id);
    let block = s.mutate(|wb| {
        let mut block = wb.project().canvas.block(&id)?.clone();
        if let Some(mode) = req.sync_mode {
            block = wb.set_sync_mode(&id, mode)?;
        }
        if let Some(p) = req.position {
            block = wb.move_block(&id, p)?;
        }
        if let Some(size) = req.size {
            block = wb.resize_block(&id, size)?;
        }
        if req.refresh {
            block = wb.refresh_block(&id)?;
        }
        Ok((block, one(EventKind::BlockUpdated, &id)))
    })?;
    ok(&block)
}

async fn delete_block(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    let removed = s.mutate(|wb| {
        let r = wb.delete_block(&BlockId(id))?;
        let ids = std::iter::once(r.block_id.to_string()).chain(r.link_ids.iter().map(ToString::to_string)).collect();
        Ok((r, vec![(EventKind::BlockDeleted, ids)]))
    })?;
    ok(&removed)
}

async fn provenance(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    s.with_workbench(|wb| {
        let stamp = canvas::get_provenance(wb.project(), &BlockId(id))?;
        ok(&json!({"stamp": stamp, "caption": stamp.caption()}))
    })
}

async fn chains(State(s): State<Service>, Path(id): Path<String>) -> ApiResult {
    s.with_workbench(|wb| ok(&canvas::chain_paths(&wb.project().canvas, &BlockId(id))?))
}

async fn undo(State(s): State<Service>) -> ApiResult {
    let restored = s.mutate(|wb| {
        let r = wb.undo()?;
        let emit = match &r {
            Some(r) => {
                let ids = std::iter::once(r.block.id.to_string()).chain(r.links.iter().map(|(_, l)| l.id.to_string())).collect();
                vec![(EventKind::BlockRestored, ids)]
            }
            None => Vec::new(),
        };
        Ok((r, emit))
    })?;
    ok(&json!({"restored": restored}))
}

#[derive(Deserialize)]
struct NewLink {
    from: Anchor,
    to: Anchor,
    #[serde(default)]
    label: Option<String>,
}

async fn create_link(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewLink = parse(&body)?;
    let link = s.mutate(|wb| {
        let l = wb.create_link(&req.from, &req.to, req.label.as_deref())?;
        let emit = one(EventKind::LinkCreated, &l.id);
        Ok((l, emit))
    })?;
    created(&link)
}

#[derive(Deserialize)]
struct NewRegion {
    name: String,
    bounds: Rect,
}

async fn create_region(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: NewRegion = parse(&body)?;
    let region = s.mutate(|wb| {
        let r = wb.create_region(&req.name, req.bounds)?;
        let emit = one(EventKind::RegionCreated, &r.id);
        Ok((r, emit))
    })?;
    created(&region)
}

#[derive(Deserialize)]
struct Member {
    block_id: BlockId,
}

async fn assign_region(State(s): State<Service>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: Member = parse(&body)?;
    let region = s.mutate(|wb| {
        let r = wb.assign_to_region(&req.block_id, &RegionId(id))?;
        let emit = vec![(EventKind::RegionUpdated, vec![r.id.to_string(), req.block_id.to_string()])];
        Ok((r, emit))
    })?;
    ok(&region)
}

#[derive(Deserialize)]
struct UnwindBody {
    anchor: Anchor,
}

async fn unwind(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: UnwindBody = parse(&body)?;
    s.with_workbench(|wb| ok(&wb.unwind(&req.anchor)?))
}

#[derive(Deserialize)]
struct Accept {
    parent: Anchor,
    descriptor: BlockDescriptor,
    position: Point,
    #[serde(default)]
    sync_mode: SyncMode,
}

async fn accept(State(s): State<Service>, body: Bytes) -> ApiResult {
    let req: Accept = parse(&body)?;
    let (block, link) = s.mutate(|wb| {
        let (b, l) = wb.accept_suggestion(&req.parent, &req.descriptor, req.position, req.sync_mode)?;
        let emit = vec![(EventKind::BlockCreated, vec![b.id.to_string()]), (EventKind::LinkCreated, vec![l.id.to_string()])];
        Ok(((b, l), emit))
    })?;
    created(&json!({"block": block, "link": link}))
}

// Events

fn kind_name(kind: EventKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn sse_event(e: &ApiEvent) -> Event {
    let data = mmw_core::canonical::to_canonical_string(e).unwrap_or_default();
    Event::default().id(e.seq.to_string()).event(kind_name(e.kind)).data(data)
}

/// `?since=n` (or `Last-Event-ID`). With `Accept: text/event-stream` the
/// buffered events are replayed and the connection stays open for new ones;
/// otherwise the buffered events are returned as one JSON document.
async fn events(State(s): State<Service>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let raw = q
        .get("since")
        .map(String::as_str)
        .or_else(|| headers.get("last-event-id").and_then(|v| v.to_str().ok()))
        .unwrap_or("0");
    let since: u64 = raw.trim().parse().map_err(|_| ApiError::bad_request(format!("`since` must be a non-negative integer, got `{raw}`")))?;
    let wants_stream = headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("text/event-stream"));

    // Subscribe while holding the lock so nothing falls between the buffer
    // and the live feed.
    let (buffered, rx, last_seq) = {
        let inner = s.lock();
        let buffered = inner.log.since(since).ok_or_else(|| {
            ApiError::new(StatusCode::GONE, "events_evicted", format!("events after {since} are no longer buffered; fetch the project again"))
        })?;
        (buffered, s.subscribe(), inner.log.last_seq())
    };
    if !wants_stream {
        return ok(&json!({"events": buffered, "last_seq": last_seq}));
    }
    let stream = futures::stream::unfold((buffered.into_iter(), rx, since), |(mut buf, mut rx, last)| async move {
        loop {
            let e = match buf.next() {
                Some(e) => e,
                None => match rx.recv().await {
                    Ok(e) => e,
                    // A lagging client reconnects with its last seq.
                    Err(RecvError::Lagged(_) | RecvError::Closed) => return None,
                },
            };
            if e.seq > last {
                let seq = e.seq;
                return Some((Ok::<_, Infallible>(sse_event(&e)), (buf, rx, seq)));
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()).into_response())
}
