//! Experiment runner behind the `fieldroad` binary: JSON configurations in,
//! CSV tables with JSON sidecars out.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod run;
pub mod spec;

pub use error::{CliError, Result};
pub use output::{render_csv, render_sidecar, sidecar_path, write_outputs};
pub use run::{execute, probe_points, Cell, Outcome, Table};
pub use spec::{parse_config, Command, ExperimentSpec, KernelChoice, Probes, SimSettings, Sweep};
