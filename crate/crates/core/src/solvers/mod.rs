//! Outer methods for quadratic-penalty programs.
//!
//! * [`malm_solve`]: modified augmented Lagrangian method. Converges to a minimizer
//!   of `Φ_ω` for the prescribed `ω`; with `ω = 0` it is the classical method of
//!   multipliers.
//! * [`qpm_solve`]: the quadratic penalty method, one trust-region solve on `Φ_ω`.
//! * [`kkt_residual`]: stationarity and feasibility of `(x, λ)` for a given `ω`.

mod kkt;
mod malm;
mod qpm;

pub use kkt::{kkt_residual, KktResidual};
pub use malm::{alm_solve, malm_solve, DualState, MalmConfig};
pub use qpm::qpm_solve;

use nalgebra::DVector;

use crate::trm::TrmStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration limit or inner-iteration budget exhausted.
    NotConverged,
    /// The inner trust-region solve at outer iteration `outer` failed.
    SubproblemFailure {
        outer: usize,
        trm: TrmStatus,
    },
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, Self::Converged)
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    /// Counted inner iterations of this subproblem solve.
    pub inner_iters: usize,
    /// Penalty parameter used for the subproblem.
    pub rho: f64,
    /// `‖c(x_k) + ωλ_k‖_∞` after the multiplier update; `‖c(x)‖_∞` for the penalty method.
    pub feasibility: f64,
    /// Subproblem objective at the subproblem solution.
    pub merit: f64,
    pub trm_status: TrmStatus,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: DVector<f64>,
    /// Final multipliers. For the penalty method this is the diagnostic `−c(x)/ω`.
    pub lambda: DVector<f64>,
    pub outer_iters: usize,
    /// Sum of counted inner iterations over all subproblem solves.
    pub inner_iters_total: usize,
    pub status: SolveStatus,
    pub history: Vec<OuterRecord>,
}
