//! Estimation toolkit around the `cgra-core` models: file formats,
//! run orchestration, reports, and plots. The `cgra-estim` binary is a
//! thin CLI over this library.

pub mod error;
pub mod files;
pub mod pipeline;
pub mod report;
pub mod svg;
