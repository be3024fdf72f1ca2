mod support;

use mmw_core::model::SCHEMA_VERSION;
use mmw_core::{load_project, save_project, Error};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use support::{checks, gen};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn save_then_load_is_identity(recipe in gen::recipe()) {
        checks::roundtrip(&recipe).map_err(TestCaseError::fail)?;
    }
}

fn saved() -> Vec<u8> {
    let recipe = gen::recipe()
        .new_tree(&mut proptest::test_runner::TestRunner::deterministic())
        .unwrap()
        .current();
    save_project(gen::build(&recipe).project()).unwrap()
}

#[test]
fn newer_schema_is_refused() {
    let mut v: serde_json::Value = serde_json::from_slice(&saved()).unwrap();
    v["schema_version"] = (SCHEMA_VERSION + 1).into();
    let err = load_project(v.to_string().as_bytes()).unwrap_err();
    assert_eq!(err, Error::Version { found: SCHEMA_VERSION + 1, supported: SCHEMA_VERSION });
}

#[test]
fn invalid_utf8_reports_offset() {
    let mut bytes = saved();
    bytes.insert(3, 0xff);
    assert_eq!(load_project(&bytes).unwrap_err(), Error::Encoding { offset: 3 });
}

#[test]
fn dangling_reference_is_an_integrity_error() {
    let mut v: serde_json::Value = serde_json::from_slice(&saved()).unwrap();
    v["annotations"] = serde_json::json!([{
        "id": "ann_x", "document_id": "doc_missing", "span": {"start": 0, "end": 1},
        "code_ids": [], "note": "", "author": "a", "created_at": "2024-01-01T00:00:00Z", "text": "x"
    }]);
    let err = load_project(v.to_string().as_bytes()).unwrap_err();
    assert_eq!(err.code(), "integrity_error", "{err}");
}

#[test]
fn garbage_is_a_format_error() {
    assert_eq!(load_project(b"{not json").unwrap_err().code(), "format_error");
    assert_eq!(load_project(b"{}").unwrap_err().code(), "format_error");
}
