//! Session events and the deltas they carry.
//!
//! Every committed mutation appends one or more events. The first event of a
//! mutation carries the entity-level difference between the project before
//! and after it, so a client holding a snapshot at seq `s` reaches the current
//! state by applying the changes of every event after `s` with [`replay`].

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SourceImported,
    AnnotationAdded,
    CodeCreated,
    TableEdited,
    CellAdded,
    CellUpdated,
    CellExecuted,
    BlockCreated,
    BlockUpdated,
    BlockStale,
    BlockDeleted,
    BlockRestored,
    LinkCreated,
    RegionCreated,
    RegionUpdated,
    ProjectReplaced,
    ProjectUpdated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    DataSources,
    Codebook,
    Annotations,
    Cells,
    Blocks,
    Links,
    Regions,
}

impl Collection {
    pub const ALL: [Collection; 7] = [
        Collection::DataSources,
        Collection::Codebook,
        Collection::Annotations,
        Collection::Cells,
        Collection::Blocks,
        Collection::Links,
        Collection::Regions,
    ];

    fn path(self) -> (&'static str, Option<&'static str>) {
        match self {
            Collection::DataSources => ("data_sources", None),
            Collection::Codebook => ("codebook", None),
            Collection::Annotations => ("annotations", None),
            Collection::Cells => ("notebook", Some("cells")),
            Collection::Blocks => ("canvas", Some("blocks")),
            Collection::Links => ("canvas", Some("links")),
            Collection::Regions => ("canvas", Some("regions")),
        }
    }

    fn get(self, project: &Value) -> &[Value] {
        let (outer, inner) = self.path();
        let mut v = &project[outer];
        if let Some(inner) = inner {
            v = &v[inner];
        }
        v.as_array().map(Vec::as_slice).unwrap_or(&[])
    }

    fn get_mut(self, project: &mut Value) -> Option<&mut Vec<Value>> {
        let (outer, inner) = self.path();
        let mut v = project.get_mut(outer)?;
        if let Some(inner) = inner {
            v = v.get_mut(inner)?;
        }
        v.as_array_mut()
    }
}

/// One step of a delta against the canonical JSON form of a project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Change {
    /// A top-level field other than the entity collections.
    Set { field: String, value: Value },
    /// Insert or replace the entity with this id so it ends up at `index`.
    Upsert { collection: Collection, index: usize, entity: Value },
    Remove { collection: Collection, id: String },
    Replace { collection: Collection, items: Vec<Value> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEvent {
    pub seq: u64,
    pub kind: EventKind,
    pub ids: Vec<String>,
    #[serde(default)]
    pub changes: Vec<Change>,
}

const CONTAINERS: [&str; 5] = ["data_sources", "codebook", "annotations", "notebook", "canvas"];

fn entity_id(v: &Value) -> &str {
    v["id"].as_str().unwrap_or_default()
}

fn diff_collection(c: Collection, before: &[Value], after: &[Value], out: &mut Vec<Change>) {
    let old: BTreeMap<&str, &Value> = before.iter().map(|v| (entity_id(v), v)).collect();
    let new_ids: HashSet<&str> = after.iter().map(entity_id).collect();
    let kept_before: Vec<&str> = before.iter().map(entity_id).filter(|id| new_ids.contains(id)).collect();
    let kept_after: Vec<&str> = after.iter().map(entity_id).filter(|id| old.contains_key(id)).collect();
    if kept_before != kept_after {
        out.push(Change::Replace { collection: c, items: after.to_vec() });
        return;
    }
    for v in before {
        if !new_ids.contains(entity_id(v)) {
            out.push(Change::Remove { collection: c, id: entity_id(v).to_owned() });
        }
    }
    for (index, v) in after.iter().enumerate() {
        if old.get(entity_id(v)) != Some(&v) {
            out.push(Change::Upsert { collection: c, index, entity: v.clone() });
        }
    }
}

/// Changes that turn `before` into `after`. Both are canonical project values.
pub fn diff(before: &Value, after: &Value) -> Vec<Change> {
    let mut out = Vec::new();
    let empty = serde_json::Map::new();
    let (b, a) = (before.as_object().unwrap_or(&empty), after.as_object().unwrap_or(&empty));
    for (field, value) in a {
        if !CONTAINERS.contains(&field.as_str()) && b.get(field) != Some(value) {
            out.push(Change::Set { field: field.clone(), value: value.clone() });
        }
    }
    for c in Collection::ALL {
        diff_collection(c, c.get(before), c.get(after), &mut out);
    }
    out
}

/// Applies one change in place. Unknown ids in removals are ignored so
/// replaying an event twice is harmless.
pub fn apply(project: &mut Value, change: &Change) {
    match change {
        Change::Set { field, value } => {
            if let Some(obj) = project.as_object_mut() {
                obj.insert(field.clone(), value.clone());
            }
        }
        Change::Upsert { collection, index, entity } => {
            if let Some(items) = collection.get_mut(project) {
                items.retain(|v| entity_id(v) != entity_id(entity));
                let at = (*index).min(items.len());
                items.insert(at, entity.clone());
            }
        }
        Change::Remove { collection, id } => {
            if let Some(items) = collection.get_mut(project) {
                items.retain(|v| entity_id(v) != id);
            }
        }
        Change::Replace { collection, items } => {
            if let Some(slot) = collection.get_mut(project) {
                *slot = items.clone();
            }
        }
    }
}

/// Applies every event with `seq > since`, in order, skipping duplicates.
/// Returns the last seq applied.
pub fn replay<'a>(project: &mut Value, since: u64, events: impl IntoIterator<Item = &'a ApiEvent>) -> u64 {
    let mut last = since;
    for e in events {
        if e.seq <= last {
            continue;
        }
        for c in &e.changes {
            apply(project, c);
        }
        last = e.seq;
    }
    last
}

/// Bounded in-memory buffer of recent events.
#[derive(Debug)]
pub struct EventLog {
    events: VecDeque<ApiEvent>,
    capacity: usize,
    last_seq: u64,
}

pub const DEFAULT_CAPACITY: usize = 4096;

impl EventLog {
    pub fn new(capacity: usize) -> Self {
        Self { events: VecDeque::new(), capacity: capacity.max(1), last_seq: 0 }
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn push(&mut self, kind: EventKind, ids: Vec<String>, changes: Vec<Change>) -> ApiEvent {
        self.last_seq += 1;
        let e = ApiEvent { seq: self.last_seq, kind, ids, changes };
        if self.events.len() == self.capacity {
            self.events.pop_front();
        }
        self.events.push_back(e.clone());
        e
    }

    /// Buffered events after `since`, or `None` when some were already evicted.
    pub fn since(&self, since: u64) -> Option<Vec<ApiEvent>> {
        let oldest = self.events.front().map_or(self.last_seq + 1, |e| e.seq);
        if since + 1 < oldest && since < self.last_seq {
            return None;
        }
        Some(self.events.iter().filter(|e| e.seq > since).cloned().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn project(blocks: Value) -> Value {
        json!({"name": "p", "data_sources": [], "codebook": [], "annotations": [],
               "notebook": {"cells": []}, "canvas": {"blocks": blocks, "links": [], "regions": []}})
    }

    fn roundtrip(before: Value, after: Value) {
        let mut v = before.clone();
        for c in diff(&before, &after) {
            apply(&mut v, &c);
        }
        assert_eq!(v, after);
    }

    #[test]
    fn insert_in_the_middle_and_edit() {
        roundtrip(
            project(json!([{"id": "a"}, {"id": "c", "x": 1}])),
            project(json!([{"id": "a"}, {"id": "b"}, {"id": "c", "x": 2}])),
        );
    }

    #[test]
    fn removal_and_reorder() {
        roundtrip(project(json!([{"id": "a"}, {"id": "b"}, {"id": "c"}])), project(json!([{"id": "c"}, {"id": "a"}])));
    }

    #[test]
    fn scalar_fields() {
        let mut after = project(json!([]));
        after["name"] = json!("q");
        let d = diff(&project(json!([])), &after);
        assert_eq!(d, vec![Change::Set { field: "name".into(), value: json!("q") }]);
    }

    #[test]
    fn log_reports_eviction() {
        let mut log = EventLog::new(3);
        for _ in 0..5 {
            log.push(EventKind::ProjectUpdated, vec![], vec![]);
        }
        assert_eq!(log.since(0), None);
        assert_eq!(log.since(1), None);
        assert_eq!(log.since(2).unwrap().len(), 3);
        assert!(log.since(5).unwrap().is_empty());
        assert!(log.since(9).unwrap().is_empty());
    }
}
