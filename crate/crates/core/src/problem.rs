//! Smooth penalty problems and the two merit functions built from them.
//!
//! A [`PenaltyProblem`] supplies an objective `f: Rⁿ → R` and residuals
//! `c: Rⁿ → Rᵐ` with exact first and second derivatives. From it we build
//!
//! * [`PenaltyObjective`]: `Φ_ω(x) = f(x) + ‖c(x)‖² / (2ω)`
//! * [`AugLagObjective`]: `Ψ(x) = f(x) − λᵀc(x) + ‖c(x) + ωλ‖² / (2(ω + ρ))`
//!
//! Both implement [`SmoothObjective`], the interface the trust-region method consumes.

use nalgebra::DVector;

use crate::error::{check_len, Error, EvalError, Evaluator, Result};
use crate::linalg::{HessianLayout, Jacobian, SymMatrix};

/// Objective and residual evaluators with exact derivatives.
///
/// Implementations must be deterministic and free of side effects. The
/// residual Hessian is requested in weighted form, `H_c(x, w) = Σᵢ wᵢ ∇²cᵢ(x)`,
/// and must be linear in `w`.
pub trait PenaltyProblem: Send + Sync {
    fn num_variables(&self) -> usize;
    fn num_residuals(&self) -> usize;

    /// Storage the solvers should use for Hessians of this problem.
    fn hessian_layout(&self) -> HessianLayout {
        HessianLayout::Dense
    }

    fn objective(&self, x: &DVector<f64>) -> f64;
    fn objective_gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Adds `∇²f(x)` into `h`.
    fn add_objective_hessian(&self, x: &DVector<f64>, h: &mut SymMatrix);

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `m × n` matrix whose rows are `∇cᵢ(x)ᵀ`.
    fn jacobian(&self, x: &DVector<f64>) -> Jacobian;
    /// Adds `Σᵢ wᵢ ∇²cᵢ(x)` into `h`.
    fn add_residual_hessian(&self, x: &DVector<f64>, weights: &DVector<f64>, h: &mut SymMatrix);

    fn objective_hessian(&self, x: &DVector<f64>) -> SymMatrix {
        let mut h = SymMatrix::zeros(self.num_variables(), &self.hessian_layout());
        self.add_objective_hessian(x, &mut h);
        h
    }

    fn residual_hessian(&self, x: &DVector<f64>, weights: &DVector<f64>) -> SymMatrix {
        let mut h = SymMatrix::zeros(self.num_variables(), &self.hessian_layout());
        self.add_residual_hessian(x, weights, &mut h);
        h
    }
}

/// Highest derivative an evaluation should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Option<DVector<f64>>,
    pub hessian: Option<SymMatrix>,
}

/// A twice differentiable scalar function, as consumed by [`crate::trm`].
pub trait SmoothObjective {
    fn dim(&self) -> usize;

    fn hessian_layout(&self) -> HessianLayout {
        HessianLayout::Dense
    }

    fn evaluate(&self, x: &DVector<f64>, order: Order) -> Result<Evaluation, EvalError>;

    fn value(&self, x: &DVector<f64>) -> Result<f64, EvalError> {
        self.evaluate(x, Order::Value).map(|e| e.value)
    }
}

fn finite_scalar(v: f64, evaluator: Evaluator) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError { evaluator })
    }
}

fn finite_vec(v: DVector<f64>, evaluator: Evaluator) -> Result<DVector<f64>, EvalError> {
    if v.iter().all(|e| e.is_finite()) {
        Ok(v)
    } else {
        Err(EvalError { evaluator })
    }
}

fn finite_jacobian(j: Jacobian) -> Result<Jacobian, EvalError> {
    let ok = (0..j.nrows()).all(|i| j.row(i).all(|(_, v)| v.is_finite()));
    if ok {
        Ok(j)
    } else {
        Err(EvalError {
            evaluator: Evaluator::Jacobian,
        })
    }
}

/// Everything about `f` and `c` at one point that the merit functions need.
struct PointData {
    f: f64,
    c: DVector<f64>,
    grad_f: Option<DVector<f64>>,
    jac: Option<Jacobian>,
}

fn evaluate_point<P>(problem: &P, x: &DVector<f64>, order: Order) -> Result<PointData, EvalError>
where
    P: PenaltyProblem + ?Sized,
{
    let f = finite_scalar(problem.objective(x), Evaluator::Objective)?;
    let c = finite_vec(problem.residuals(x), Evaluator::Residual)?;
    let (grad_f, jac) = if order >= Order::Gradient {
        (
            Some(finite_vec(problem.objective_gradient(x), Evaluator::ObjectiveGradient)?),
            Some(finite_jacobian(problem.jacobian(x))?),
        )
    } else {
        (None, None)
    };
    Ok(PointData { f, c, grad_f, jac })
}

/// `∇²f + H_c(x, w) + scale·JᵀJ`, checking each contribution.
fn assemble_hessian<P>(
    problem: &P,
    x: &DVector<f64>,
    weights: &DVector<f64>,
    jac: &Jacobian,
    gram_scale: f64,
) -> Result<SymMatrix, EvalError>
where
    P: PenaltyProblem + ?Sized,
{
    let mut h = SymMatrix::zeros(problem.num_variables(), &problem.hessian_layout());
    problem.add_objective_hessian(x, &mut h);
    if !h.is_finite() {
        return Err(EvalError {
            evaluator: Evaluator::ObjectiveHessian,
        });
    }
    problem.add_residual_hessian(x, weights, &mut h);
    if !h.is_finite() {
        return Err(EvalError {
            evaluator: Evaluator::ResidualHessian,
        });
    }
    jac.add_gram(gram_scale, &mut h);
    Ok(h)
}

/// The quadratic penalty function `Φ_ω(x) = f(x) + ‖c(x)‖² / (2ω)`.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyObjective<'a, P: ?Sized> {
    problem: &'a P,
    omega: f64,
}

impl<'a, P: PenaltyProblem + ?Sized> PenaltyObjective<'a, P> {
    pub fn new(problem: &'a P, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty weight omega must be positive, got {omega}"
            )));
        }
        Ok(Self { problem, omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn problem(&self) -> &'a P {
        self.problem
    }
}

impl<P: PenaltyProblem + ?Sized> SmoothObjective for PenaltyObjective<'_, P> {
    fn dim(&self) -> usize {
        self.problem.num_variables()
    }

    fn hessian_layout(&self) -> HessianLayout {
        self.problem.hessian_layout()
    }

    fn evaluate(&self, x: &DVector<f64>, order: Order) -> Result<Evaluation, EvalError> {
        let p = evaluate_point(self.problem, x, order)?;
        let value = p.f + 0.5 * p.c.norm_squared() / self.omega;
        let mut eval = Evaluation {
            value,
            gradient: None,
            hessian: None,
        };
        if let (Some(grad_f), Some(jac)) = (p.grad_f, p.jac) {
            let weights = &p.c / self.omega;
            eval.gradient = Some(grad_f + jac.tr_mul_vec(&weights));
            if order == Order::Hessian {
                let scale = 1.0 / self.omega;
                eval.hessian = Some(assemble_hessian(self.problem, x, &weights, &jac, scale)?);
            }
        }
        Ok(eval)
    }
}

/// The augmented Lagrangian subproblem objective
/// `Ψ(x) = f(x) − λᵀc(x) + ‖c(x) + ωλ‖² / (2(ω + ρ))` for a fixed multiplier `λ`.
#[derive(Debug, Clone)]
pub struct AugLagObjective<'a, P: ?Sized> {
    problem: &'a P,
    omega: f64,
    rho: f64,
    lambda: DVector<f64>,
}

impl<'a, P: PenaltyProblem + ?Sized> AugLagObjective<'a, P> {
    pub fn new(problem: &'a P, omega: f64, rho: f64, lambda: DVector<f64>) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "omega must be finite and nonnegative, got {omega}"
            )));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("rho must be positive, got {rho}")));
        }
        check_len("lambda", problem.num_residuals(), lambda.len())?;
        if lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be finite".into()));
        }
        Ok(Self {
            problem,
            omega,
            rho,
            lambda,
        })
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    /// `λ − (c(x) + ωλ) / (ω + ρ)`, the multiplier estimate implied by `x`.
    pub fn shifted_multiplier(&self, c: &DVector<f64>) -> DVector<f64> {
        let denom = self.omega + self.rho;
        &self.lambda - (c + &self.lambda * self.omega) / denom
    }
}

impl<P: PenaltyProblem + ?Sized> SmoothObjective for AugLagObjective<'_, P> {
    fn dim(&self) -> usize {
        self.problem.num_variables()
    }

    fn hessian_layout(&self) -> HessianLayout {
        self.problem.hessian_layout()
    }

    fn evaluate(&self, x: &DVector<f64>, order: Order) -> Result<Evaluation, EvalError> {
        let p = evaluate_point(self.problem, x, order)?;
        let denom = self.omega + self.rho;
        let shifted = &p.c + &self.lambda * self.omega;
        let value = p.f - self.lambda.dot(&p.c) + 0.5 * shifted.norm_squared() / denom;
        let mut eval = Evaluation {
            value,
            gradient: None,
            hessian: None,
        };
        if let (Some(grad_f), Some(jac)) = (p.grad_f, p.jac) {
            let multiplier = &self.lambda - shifted / denom;
            eval.gradient = Some(grad_f - jac.tr_mul_vec(&multiplier));
            if order == Order::Hessian {
                let weights = -multiplier;
                eval.hessian = Some(assemble_hessian(self.problem, x, &weights, &jac, 1.0 / denom)?);
            }
        }
        Ok(eval)
    }
}

/// Largest relative discrepancies between analytic derivatives and central differences.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DerivativeReport {
    pub gradient: f64,
    pub jacobian: f64,
    pub objective_hessian: f64,
    pub residual_hessian: f64,
}

impl DerivativeReport {
    pub fn max(&self) -> f64 {
        self.gradient
            .max(self.jacobian)
            .max(self.objective_hessian)
            .max(self.residual_hessian)
    }
}

fn rel_err(analytic: f64, approx: f64) -> f64 {
    (analytic - approx).abs() / approx.abs().max(1.0)
}

/// Fixed weights used to probe `H_c`; nonuniform so sign errors in single terms show up.
pub fn probe_weights(m: usize) -> DVector<f64> {
    DVector::from_fn(m, |i, _| 1.0 + 0.5 * ((i + 1) as f64).sin())
}

/// Compares `∇f`, `J`, `∇²f` and `H_c` against central finite differences at `x`.
///
/// Errors are measured as `|a − b| / max(|b|, 1)`, the mixed absolute/relative
/// criterion that stays meaningful for entries near zero.
pub fn check_derivatives<P>(problem: &P, x: &DVector<f64>, step: f64) -> DerivativeReport
where
    P: PenaltyProblem + ?Sized,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let n = problem.num_variables();
    let weights = probe_weights(problem.num_residuals());
    let grad = problem.objective_gradient(x);
    let jac = problem.jacobian(x).to_dense();
    let hf = problem.objective_hessian(x);
    let hc = problem.residual_hessian(x, &weights);

    let mut report = DerivativeReport::default();
    for k in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += step;
        xm[k] -= step;
        let h2 = 2.0 * step;

        let df = (problem.objective(&xp) - problem.objective(&xm)) / h2;
        report.gradient = report.gradient.max(rel_err(grad[k], df));

        let dc = (problem.residuals(&xp) - problem.residuals(&xm)) / h2;
        for i in 0..dc.len() {
            report.jacobian = report.jacobian.max(rel_err(jac[(i, k)], dc[i]));
        }

        let dg = (problem.objective_gradient(&xp) - problem.objective_gradient(&xm)) / h2;
        let dj = (problem.jacobian(&xp).tr_mul_vec(&weights) - problem.jacobian(&xm).tr_mul_vec(&weights)) / h2;
        for i in 0..n {
            report.objective_hessian = report.objective_hessian.max(rel_err(hf.get(i, k), dg[i]));
            report.residual_hessian = report.residual_hessian.max(rel_err(hc.get(i, k), dj[i]));
        }
    }
    report
}

/// Gradient and Hessian discrepancies of a merit function against central differences.
pub fn check_objective<O>(objective: &O, x: &DVector<f64>, step: f64) -> Result<(f64, f64), EvalError>
where
    O: SmoothObjective + ?Sized,
{
    let at = objective.evaluate(x, Order::Hessian)?;
    let grad = at.gradient.expect("requested gradient");
    let hess = at.hessian.expect("requested hessian");
    let (mut grad_err, mut hess_err) = (0.0_f64, 0.0_f64);
    for k in 0..objective.dim() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += step;
        xm[k] -= step;
        let ep = objective.evaluate(&xp, Order::Gradient)?;
        let em = objective.evaluate(&xm, Order::Gradient)?;
        grad_err = grad_err.max(rel_err(grad[k], (ep.value - em.value) / (2.0 * step)));
        let dg = (ep.gradient.unwrap() - em.gradient.unwrap()) / (2.0 * step);
        for i in 0..objective.dim() {
            hess_err = hess_err.max(rel_err(hess.get(i, k), dg[i]));
        }
    }
    Ok((grad_err, hess_err))
}
