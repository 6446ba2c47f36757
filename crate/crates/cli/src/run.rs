//! Runs grid cells, in parallel, one independent solve per cell.

use malm::{
    malm_solve, metrics_circle, metrics_ocp, ocp_instance, qpm_solve, Circle, CircleReference, MalmConfig,
    PenaltyProblem, SolveReport, SolveStatus, TrmConfig,
};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::grid::{ExperimentGrid, Family, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Converged,
    NotConverged,
    /// The penalty method has no meaning at `ω = 0`.
    NotApplicable,
    /// A subproblem or an evaluation failed; see `CellResult::detail`.
    Failed,
}

impl CellStatus {
    pub fn label(self) -> &'static str {
        match self {
            CellStatus::Converged => "conv",
            CellStatus::NotConverged => "n.c.",
            CellStatus::NotApplicable => "n.a.",
            CellStatus::Failed => "fail",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub row: usize,
    pub col: usize,
    pub omega: f64,
    /// `ε` for the circle, `N` for the control problem.
    pub column: f64,
    pub method: Method,
    pub status: CellStatus,
    pub detail: String,
    pub outer_iters: usize,
    pub inner_iters: usize,
    /// `(e_A, e_B)` for the circle, `(J − J*, ‖c‖₂)` for the control problem.
    pub metrics: Option<(f64, f64)>,
    pub x: Option<DVector<f64>>,
    pub lambda: Option<DVector<f64>>,
}

impl CellResult {
    /// File name of the dumped limit point, relative to the output directory.
    pub fn limit_point_file(&self) -> Option<String> {
        self.x
            .as_ref()
            .map(|_| format!("points/{}_r{}_c{}.csv", self.method.name(), self.row, self.col))
    }
}

fn solver_configs(grid: &ExperimentGrid, omega: f64) -> (TrmConfig, MalmConfig) {
    let k_max = grid.k_max();
    let tol = grid.tol.unwrap_or(1e-8);
    let trm = TrmConfig {
        max_iters: k_max - 1,
        ..TrmConfig::default().with_tol(tol)
    };
    let malm = MalmConfig {
        omega,
        tol,
        k_max,
        inner_budget: Some(k_max),
        trm: TrmConfig::default().with_tol(tol),
        ..MalmConfig::default()
    };
    (trm, malm)
}

fn finish(
    mut cell: CellResult,
    report: malm::Result<SolveReport>,
    metrics: impl FnOnce(&DVector<f64>) -> (f64, f64),
) -> CellResult {
    match report {
        Ok(rep) => {
            cell.status = match rep.status {
                SolveStatus::Converged => CellStatus::Converged,
                SolveStatus::NotConverged => CellStatus::NotConverged,
                SolveStatus::SubproblemFailure { outer, trm } => {
                    cell.detail = format!("outer {outer}: {trm:?}");
                    CellStatus::Failed
                }
            };
            cell.outer_iters = rep.outer_iters;
            cell.inner_iters = rep.inner_iters_total;
            cell.metrics = Some(metrics(&rep.x));
            cell.x = Some(rep.x);
            cell.lambda = Some(rep.lambda);
        }
        Err(malm::Error::NotApplicable(_)) => cell.status = CellStatus::NotApplicable,
        Err(e) => {
            cell.status = CellStatus::Failed;
            cell.detail = e.to_string();
        }
    }
    cell
}

/// Solves one cell. Errors never escape; they end up in the cell status.
pub fn run_cell(grid: &ExperimentGrid, row: usize, col: usize, method: Method) -> CellResult {
    let omega = grid.omegas[row];
    let cell = CellResult {
        row,
        col,
        omega,
        column: grid.column_value(col),
        method,
        status: CellStatus::NotApplicable,
        detail: String::new(),
        outer_iters: 0,
        inner_iters: 0,
        metrics: None,
        x: None,
        lambda: None,
    };
    let (trm, malm_cfg) = solver_configs(grid, omega);
    match grid.family {
        Family::Circle => {
            let p = Circle::new(grid.eps[col]);
            let x0 = CircleReference::x0();
            let rep = match method {
                Method::Qpm => qpm_solve(&p, omega, &trm, &x0),
                Method::Malm => malm_solve(&p, &malm_cfg, &x0, &CircleReference::lambda0()),
            };
            finish(cell, rep, metrics_circle)
        }
        Family::Ocp => {
            let trans = match ocp_instance(grid.elements[col]) {
                Ok(t) => t,
                Err(e) => {
                    return CellResult {
                        status: CellStatus::Failed,
                        detail: e.to_string(),
                        ..cell
                    }
                }
            };
            let n = grid.elements[col];
            let x0 = DVector::zeros(2 * n + 1);
            let rep = match method {
                Method::Qpm => qpm_solve(&trans, omega, &trm, &x0),
                Method::Malm => malm_solve(&trans, &malm_cfg, &x0, &DVector::zeros(trans.num_residuals())),
            };
            finish(cell, rep, |x| metrics_ocp(&trans, x))
        }
    }
}

/// Runs every cell of the grid. The output order is that of
/// [`ExperimentGrid::cells`] regardless of scheduling.
pub fn run_grid(grid: &ExperimentGrid) -> Vec<CellResult> {
    grid.cells()
        .into_par_iter()
        .map(|(row, col, method)| run_cell(grid, row, col, method))
        .collect()
}
