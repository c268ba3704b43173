//! File formats, configuration, run manifests, a thread-pool executor and the
//! `sqg` command line, on top of `sqg-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod format;
pub mod manifest;

pub use error::{Error, Result};
