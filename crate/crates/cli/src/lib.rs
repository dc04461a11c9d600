//! Configuration, orchestration and reproducible artifacts for the
//! `fracshape` experiments, plus the bounds audit.
//!
//! The binary is a thin layer over [`cli::main_with_args`]; everything else
//! is usable as a library.

pub mod audit;
pub mod cli;
pub mod config;
pub mod error;
pub mod run;

pub use audit::{bounds_audit, AuditReport, CheckResult, CHECKS};
pub use config::{parse_config_file, validate, Experiment, ExperimentConfig, Kind, MaskSpec, Task};
pub use error::{CliError, FieldError};
pub use run::{compute, run_batch, run_experiment, ReportBundle, MANIFEST};

/// The numerical library, re-exported.
pub use fracshape_core;
