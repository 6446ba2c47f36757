//! Solvers for unconstrained quadratic-penalty programs
//!
//! ```text
//! min_x  f(x) + ‖c(x)‖² / (2ω)
//! ```
//!
//! by the quadratic penalty method, the classical augmented Lagrangian method and
//! a modified augmented Lagrangian method whose multiplier update targets the
//! penalty minimizer at the prescribed `ω`. All three run on a shifted-Newton
//! trust-region inner solver. The crate also builds penalty problems from scalar
//! optimal control problems by an integral-penalty finite-element transcription.
//!
//! ```
//! use malm::{malm_solve, Circle, CircleReference, MalmConfig};
//!
//! let problem = Circle::new(0.0);
//! let cfg = MalmConfig::with_omega(1e-2);
//! let report = malm_solve(&problem, &cfg, &CircleReference::x0(), &CircleReference::lambda0()).unwrap();
//! assert!(report.status.is_converged());
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod quadrature;
pub mod solvers;
pub mod transcription;
pub mod trm;

pub use error::{Error, EvalError, Evaluator, Result};
pub use linalg::{HessianLayout, Jacobian, SymMatrix};
pub use problem::{
    check_derivatives, check_objective, AugLagObjective, DerivativeReport, Evaluation, Order, PenaltyObjective,
    PenaltyProblem, SmoothObjective,
};
pub use problems::{
    metrics_circle, metrics_ocp, ocp_instance, reference_control, reference_state, BenchmarkOcp, Circle,
    CircleReference, J_STAR,
};
pub use quadrature::GaussLegendre;
pub use solvers::{
    alm_solve, kkt_residual, malm_solve, qpm_solve, DualState, KktResidual, MalmConfig, OuterRecord, SolveReport,
    SolveStatus,
};
pub use transcription::{eval_basis, Mesh, Partials2, ScalarOcp, Transcription};
pub use trm::{trm_minimize, TrmConfig, TrmReport, TrmStatus};
