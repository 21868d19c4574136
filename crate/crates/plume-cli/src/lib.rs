//! Operational shell around the `plume` solver library: scenario
//! configuration files, batch commands, and CSV/VTK writers.
//!
//! The binary exposes three commands:
//!
//! - `run <config>` — solve the flow problem, march the transport scheme,
//!   and write concentration/flux snapshots, the stability ledger, and a
//!   human-readable report;
//! - `darcy-study <config>` — manufactured-solution convergence study of
//!   the flow solver;
//! - `verify [--filter <suite>]` — the library's seeded property suites,
//!   one pass/fail line per module.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver/runtime error,
//! 4 verification failure.

pub mod commands;
pub mod config;
pub mod output;
