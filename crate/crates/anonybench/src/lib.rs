//! File formats, run configuration, the command-line subcommands and the
//! local HTTP API around `anonybench-core`.
//!
//! The CLI and the API go through the same [`engine::Session`], so a node
//! applied over HTTP exports exactly the CSV the `anonymize` command writes.

pub mod api;
pub mod commands;
pub mod config;
pub mod demo;
pub mod engine;
pub mod io;

pub use config::RunConfig;
pub use engine::{build_report, RunReport, Session};
