use nalgebra::DVector;

use crate::error::{check_len, Result};
use crate::problem::PenaltyProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// `‖∇f(x) − J(x)ᵀλ‖_∞`
    pub stationarity: f64,
    /// `‖c(x) + ωλ‖_∞`
    pub feasibility: f64,
}

/// Residuals of the optimality system `∇f − Jᵀλ = 0`, `c + ωλ = 0`.
///
/// `ω = 0` gives the system of the equality-constrained program; `ω > 0` the
/// one of the penalty program, where `λ = −c/ω`.
pub fn kkt_residual<P>(problem: &P, x: &DVector<f64>, lambda: &DVector<f64>, omega: f64) -> Result<KktResidual>
where
    P: PenaltyProblem + ?Sized,
{
    check_len("x", problem.num_variables(), x.len())?;
    check_len("lambda", problem.num_residuals(), lambda.len())?;
    let stationarity = (problem.objective_gradient(x) - problem.jacobian(x).tr_mul_vec(lambda)).amax();
    let feasibility = (problem.residuals(x) + lambda * omega).amax();
    Ok(KktResidual {
        stationarity,
        feasibility,
    })
}
