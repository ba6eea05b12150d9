//! Pipeline orchestration for the `newsbot` binary: configuration loading,
//! per-stage file I/O, the full `run` sequence and its manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod stages;
