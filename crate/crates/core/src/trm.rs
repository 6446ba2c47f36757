//! Simplified trust-region Newton method.
//!
//! Each iteration solves `(H + σI) d = −g` for a growing ladder of shifts
//! `σ = σ₀·γ, σ₀·γ², …` and takes the first step that strictly decreases the
//! objective. There is no radius, ratio test or line search: the shift alone
//! controls the step.

use nalgebra::DVector;

use crate::error::{Error, EvalError, Result};
use crate::problem::{Order, SmoothObjective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrmConfig {
    /// Stop when `‖∇φ‖_∞ <= tol`.
    pub tol: f64,
    pub sigma0: f64,
    pub sigma_growth: f64,
    /// Largest shift tried before the iteration gives up.
    pub sigma_max: f64,
    /// Cap on accepted steps.
    pub max_iters: usize,
    /// A failed shift ladder counts as a round-off stall when no attempted step
    /// promised a decrease larger than `stall_factor · ε · max(|φ|, 1)`.
    pub stall_factor: f64,
}

impl Default for TrmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            sigma0: 1e-11,
            sigma_growth: 10.0,
            sigma_max: 1e30,
            max_iters: 10_000,
            stall_factor: 64.0,
        }
    }
}

impl TrmConfig {
    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.tol > 0.0) {
            return bad("trm tol must be positive");
        }
        if !(self.sigma0 > 0.0) {
            return bad("sigma0 must be positive");
        }
        if !(self.sigma_growth > 1.0) {
            return bad("sigma_growth must exceed 1");
        }
        if !(self.sigma_max > self.sigma0) {
            return bad("sigma_max must exceed sigma0");
        }
        if !(self.stall_factor >= 0.0) {
            return bad("stall_factor must be nonnegative");
        }
        Ok(())
    }

    /// Shifts attempted within one iteration, in order.
    pub fn shift_ladder(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::successors(Some(self.sigma0 * self.sigma_growth), move |s| {
            Some(s * self.sigma_growth)
        })
        .take_while(move |&s| s <= self.sigma_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrmStatus {
    Converged,
    MaxIters,
    /// Every shift up to `sigma_max` was solvable but none produced a decrease.
    ShiftOverflow,
    /// `H + σI` was singular for every shift tried.
    LinearSolveFailure,
    /// The gradient test failed but no representable decrease remained:
    /// the iterate is stationary to within the rounding error of `φ`.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct TrmReport {
    pub x: DVector<f64>,
    /// Accepted steps.
    pub iterations: usize,
    pub linear_solves: usize,
    pub status: TrmStatus,
    pub value: f64,
    pub gradient_norm: f64,
    /// `φ` at every iterate, starting with `x0`.
    pub values: Vec<f64>,
    /// Shift that produced each accepted step.
    pub shifts: Vec<f64>,
}

impl TrmReport {
    /// Gradient tests performed: accepted steps plus the final test.
    ///
    /// This is the per-call iteration count that the tabulated totals add up.
    pub fn counted_iterations(&self) -> usize {
        self.iterations + 1
    }
}

/// Minimizes `phi` from `x0`.
///
/// Non-finite objective values abort the solve with an [`EvalError`]; every other
/// outcome is reported through [`TrmReport::status`].
pub fn trm_minimize<O>(phi: &O, x0: &DVector<f64>, cfg: &TrmConfig) -> Result<TrmReport, EvalError>
where
    O: SmoothObjective + ?Sized,
{
    assert_eq!(x0.len(), phi.dim(), "starting point has wrong dimension");
    let mut x = x0.clone();
    let mut report = TrmReport {
        x: x0.clone(),
        iterations: 0,
        linear_solves: 0,
        status: TrmStatus::Converged,
        value: f64::NAN,
        gradient_norm: f64::NAN,
        values: Vec::new(),
        shifts: Vec::new(),
    };

    loop {
        let at = phi.evaluate(&x, Order::Hessian)?;
        let g = at.gradient.expect("gradient requested");
        report.value = at.value;
        report.gradient_norm = g.amax();
        report.values.push(at.value);
        report.x = x.clone();

        if report.gradient_norm <= cfg.tol {
            report.status = TrmStatus::Converged;
            return Ok(report);
        }
        if report.iterations >= cfg.max_iters {
            report.status = TrmStatus::MaxIters;
            return Ok(report);
        }
        let h = at.hessian.expect("hessian requested");

        let mut accepted = None;
        let mut solved_any = false;
        let mut best_predicted = f64::NEG_INFINITY;
        for sigma in cfg.shift_ladder() {
            let Ok(d) = h.shifted_solve(&g, sigma) else {
                continue;
            };
            report.linear_solves += 1;
            solved_any = true;
            let predicted = -(g.dot(&d) + 0.5 * d.dot(&h.mul_vec(&d)));
            best_predicted = best_predicted.max(predicted);
            let trial = &x + &d;
            if phi.value(&trial)? < at.value {
                accepted = Some((trial, sigma));
                break;
            }
        }

        match accepted {
            Some((next, sigma)) => {
                x = next;
                report.iterations += 1;
                report.shifts.push(sigma);
            }
            None => {
                let noise = cfg.stall_factor * f64::EPSILON * at.value.abs().max(1.0);
                report.status = if !solved_any {
                    TrmStatus::LinearSolveFailure
                } else if best_predicted <= noise {
                    TrmStatus::Stalled
                } else {
                    TrmStatus::ShiftOverflow
                };
                return Ok(report);
            }
        }
    }
}
