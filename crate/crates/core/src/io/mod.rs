//! Configuration, presets, run artifacts and batches.

pub mod batch;
pub mod config;
pub mod output;
pub mod presets;
