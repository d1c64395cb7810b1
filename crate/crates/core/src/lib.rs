//! Semantic sketches: per-sense summaries of a verb's semantic dependencies,
//! built from semantically annotated link corpora, plus cross-language
//! pairing and comparison of those sketches.

pub mod aggregate;
pub mod ingest;
pub mod model;
pub mod contrastive;
pub mod sketch;
pub mod pipeline;
pub mod store;
pub mod fixtures;
