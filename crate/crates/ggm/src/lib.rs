//! File formats, experiment harness and CLI plumbing on top of `ggm-core`.

pub mod commands;
pub mod formats;
pub mod harness;

pub use ggm_core as core;
