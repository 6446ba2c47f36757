use nalgebra::DVector;

use super::{OuterRecord, SolveReport, SolveStatus};
use crate::error::{check_len, Error, Result};
use crate::problem::{PenaltyObjective, PenaltyProblem};
use crate::trm::{trm_minimize, TrmConfig, TrmStatus};

/// Quadratic penalty method: minimizes `Φ_ω` directly with the trust-region method.
///
/// Rejects `ω <= 0`, where the penalty function is undefined.
pub fn qpm_solve<P>(problem: &P, omega: f64, trm: &TrmConfig, x0: &DVector<f64>) -> Result<SolveReport>
where
    P: PenaltyProblem + ?Sized,
{
    if !(omega > 0.0) {
        return Err(Error::NotApplicable(omega));
    }
    trm.validate()?;
    check_len("x0", problem.num_variables(), x0.len())?;
    let phi = PenaltyObjective::new(problem, omega)?;
    let rep = trm_minimize(&phi, x0, trm)?;

    let c = problem.residuals(&rep.x);
    let lambda = -&c / omega;
    let status = match rep.status {
        TrmStatus::Converged => SolveStatus::Converged,
        TrmStatus::MaxIters | TrmStatus::Stalled => SolveStatus::NotConverged,
        other => SolveStatus::SubproblemFailure { outer: 1, trm: other },
    };
    let record = OuterRecord {
        inner_iters: rep.counted_iterations(),
        rho: omega,
        feasibility: c.amax(),
        merit: rep.value,
        trm_status: rep.status,
    };
    Ok(SolveReport {
        x: rep.x,
        lambda,
        outer_iters: 1,
        inner_iters_total: record.inner_iters,
        status,
        history: vec![record],
    })
}
