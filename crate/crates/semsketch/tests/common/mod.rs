#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use tower::ServiceExt;

use semsketch::api::{router, Service};
use semsketch_core::contrastive::AffinityWeights;
use semsketch_core::fixtures::sample_corpus;
use semsketch_core::model::Config;
use semsketch_core::pipeline::{build_sketch_set, ingest_records, pair_sets};
use semsketch_core::store::{save_sketch_set, SketchSet};

/// The sample corpus built, split by language and paired.
pub fn sample_set() -> SketchSet {
    let c = sample_corpus();
    let report = ingest_records(c.records.into_iter().map(Ok), c.hierarchy, c.sentences, 5);
    let (set, _) = build_sketch_set(&report.bundle, &Config::default()).unwrap();
    let (en, ru): (Vec<_>, Vec<_>) = set
        .sketches
        .iter()
        .cloned()
        .partition(|s| s.lexeme.language == "en");
    let mut left = set.clone();
    left.sketches = en;
    let mut right = set;
    right.sketches = ru;
    pair_sets(&left, &right, None, 0.5, AffinityWeights::default()).unwrap()
}

/// Saves the sample set under `dir` and returns a router over it.
pub fn sample_router(dir: &Path) -> Router {
    save_sketch_set(dir, &sample_set()).unwrap();
    router(Arc::new(Service::open(dir).unwrap()))
}

pub fn enc(segment: &str) -> String {
    utf8_percent_encode(segment, NON_ALPHANUMERIC).to_string()
}

pub async fn get_raw(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, serde_json::Value) {
    let (status, bytes) = get_raw(app, uri).await;
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|e| panic!("{uri}: non-JSON body ({e}): {}", String::from_utf8_lossy(&bytes)));
    (status, value)
}
