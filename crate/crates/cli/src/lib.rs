//! Experiment harness for the quadratic-penalty solvers: grid files,
//! a parallel cell runner, CSV tables and trajectory dumps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;
pub mod grid;
pub mod run;
pub mod trajectory;

pub use emit::{emit_csv, format_sci};
pub use grid::{ExperimentGrid, Family, Method};
pub use run::{run_cell, run_grid, CellResult, CellStatus};
pub use trajectory::{dump_circle_point, dump_trajectory};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Solver(#[from] malm::Error),
}
