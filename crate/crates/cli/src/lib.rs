//! Configuration, orchestration and artifact emission for frame
//! discretization runs.
//!
//! Commands: [`run::run_discretize`], [`run::run_selector_bench`] and
//! [`run::emit_constants`]. Each returns [`artifacts::RunArtifacts`]:
//! a JSON report, a plain-text summary and CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod models;
pub mod run;
