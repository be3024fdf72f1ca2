//! Local HTTP API over one [`Workbench`], with a server-sent event stream.
//!
//! All routes live under `/api/v1`. Request and response bodies are the
//! canonical JSON form (sorted keys, UTF-8). Mutations run one at a time under
//! a lock; each commit appends its events to the log before the lock is
//! released, so event order is mutation order.
//!
//! ```
//! use mmw_core::{SystemClock, Workbench};
//! use mmw_service::Service;
//!
//! let service = Service::new(Workbench::create("p", "Study", Box::new(SystemClock)));
//! let app = service.router();
//! # let _ = app;
//! ```

pub mod error;
pub mod events;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Router;
use mmw_core::canonical::{to_canonical_string, to_canonical_value};
use mmw_core::{save_project, Workbench};
use serde::Serialize;
use tokio::sync::broadcast;

pub use error::ApiError;
pub use events::{replay, ApiEvent, Change, Collection, EventKind, EventLog};

pub const DEFAULT_PORT: u16 = 8787;

/// Serializes `body` canonically.
pub fn canonical_response<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    match to_canonical_string(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json; charset=utf-8")], text).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

pub(crate) struct Inner {
    pub wb: Workbench,
    pub log: EventLog,
    persist: Option<PathBuf>,
}

struct Shared {
    inner: Mutex<Inner>,
    tx: broadcast::Sender<ApiEvent>,
}

/// Cheap to clone; all clones share the session.
#[derive(Clone)]
pub struct Service {
    shared: Arc<Shared>,
}

/// Events to emit for a mutation: kind plus the ids it touched.
pub(crate) type Emit = Vec<(EventKind, Vec<String>)>;

impl Service {
    pub fn new(wb: Workbench) -> Self {
        Self::with_capacity(wb, events::DEFAULT_CAPACITY)
    }

    pub fn with_capacity(wb: Workbench, capacity: usize) -> Self {
        let (tx, _) = broadcast::channel(capacity.max(16));
        let inner = Inner { wb, log: EventLog::new(capacity), persist: None };
        Self { shared: Arc::new(Shared { inner: Mutex::new(inner), tx }) }
    }

    /// Saves the project to `path` after every committed mutation.
    pub fn persist_to(self, path: impl Into<PathBuf>) -> Self {
        self.lock().persist = Some(path.into());
        self
    }

    pub fn router(&self) -> Router {
        routes::router(self.clone())
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, Inner> {
        self.shared.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub(crate) fn subscribe(&self) -> broadcast::Receiver<ApiEvent> {
        self.shared.tx.subscribe()
    }

    /// Runs `f` against the workbench and records what it changed. The
    /// project delta rides on the first event; a failed call that still
    /// changed something is reported as `project_updated`.
    pub(crate) fn mutate<T>(&self, f: impl FnOnce(&mut Workbench) -> Result<(T, Emit), ApiError>) -> Result<T, ApiError> {
        let mut inner = self.lock();
        let before = to_canonical_value(inner.wb.project())?;
        let result = f(&mut inner.wb);
        let after = to_canonical_value(inner.wb.project())?;
        let mut changes = events::diff(&before, &after);
        let (value, mut emit) = match result {
            Ok((v, emit)) => (Ok(v), emit),
            Err(e) => (Err(e), Vec::new()),
        };
        if emit.is_empty() && !changes.is_empty() {
            emit.push((EventKind::ProjectUpdated, Vec::new()));
        }
        for (kind, ids) in emit {
            let e = inner.log.push(kind, ids, std::mem::take(&mut changes));
            let _ = self.shared.tx.send(e);
        }
        if let Some(path) = &inner.persist {
            if before != after {
                if let Err(e) = save_project(inner.wb.project()).and_then(|b| Ok(std::fs::write(path, b)?)) {
                    eprintln!("warning: could not save {}: {e}", path.display());
                }
            }
        }
        value
    }

    /// Canonical project value with the seq it reflects.
    pub fn snapshot(&self) -> (serde_json::Value, u64) {
        let inner = self.lock();
        let v = to_canonical_value(inner.wb.project()).expect("projects serialize");
        (v, inner.log.last_seq())
    }

    pub fn events_since(&self, since: u64) -> Option<Vec<ApiEvent>> {
        self.lock().log.since(since)
    }

    /// Calls `f` with the workbench under the lock, for reads.
    pub fn with_workbench<T>(&self, f: impl FnOnce(&Workbench) -> T) -> T {
        f(&self.lock().wb)
    }
}

/// Serves until the process is stopped. Only loopback addresses are accepted.
pub async fn serve(service: Service, addr: SocketAddr) -> std::io::Result<()> {
    if !addr.ip().is_loopback() {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("{addr} is not a loopback address")));
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, service.router()).await
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/service.md")]
mod guide {}
