//! CLI and simulation harness over the spike-train depth library.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod recipes;
