//! Command line and HTTP front end for semantic sketch stores.
//!
//! The HTTP service is read-only: it loads one store at startup and answers
//! every request from that immutable copy.

pub mod api;
pub mod cli;
