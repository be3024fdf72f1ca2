//! Canonical serialization: compact UTF-8 JSON with object keys sorted
//! lexicographically. Equal values always produce identical bytes, which makes
//! project files diffable and lets content hashes stand in for equality.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{validate, Project, SCHEMA_VERSION};

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn to_canonical_value<T: Serialize + ?Sized>(value: &T) -> Result<Value> {
    let raw = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    Ok(sort_keys(raw))
}

pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = to_canonical_value(value)?;
    serde_json::to_string(&v).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_canonical_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

/// SHA-256 of the canonical form, hex encoded.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let text = to_canonical_string(value).expect("workbench values always serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Validates and serializes a project. Fails with an integrity error when a
/// cross-reference does not resolve.
pub fn save_project(project: &Project) -> Result<Vec<u8>> {
    validate(project)?;
    Ok(to_canonical_string(project)?.into_bytes())
}

pub fn load_project(bytes: &[u8]) -> Result<Project> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Encoding { offset: e.valid_up_to() })?;
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let version = raw
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Format("missing schema_version".into()))?;
    if version > SCHEMA_VERSION {
        return Err(Error::Version { found: version, supported: SCHEMA_VERSION });
    }
    let project: Project = serde_json::from_value(raw).map_err(|e| Error::Format(e.to_string()))?;
    validate(&project)?;
    Ok(project)
}
