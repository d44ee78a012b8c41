//! Command-line companion to `twedge-core`: configuration, the state cache,
//! CSV/JSON output and the `tabulate`, `density`, `sample`, `compare` and
//! `verify` commands.

pub mod cache;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
