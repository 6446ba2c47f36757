use nalgebra::DVector;

use super::{OuterRecord, SolveReport, SolveStatus};
use crate::error::{check_len, Error, Result};
use crate::problem::{AugLagObjective, PenaltyProblem};
use crate::trm::{trm_minimize, TrmConfig, TrmStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MalmConfig {
    /// Penalty weight of the program being solved. `0` gives the classical method.
    pub omega: f64,
    /// Outer feasibility tolerance, also passed to every inner solve.
    pub tol: f64,
    pub rho0: f64,
    /// Factor applied to `ρ` after every unsuccessful outer iteration.
    pub c_rho: f64,
    pub k_max: usize,
    pub rho_min: f64,
    /// Cap on the total counted inner iterations; exceeding it ends the run unconverged.
    pub inner_budget: Option<usize>,
    pub trm: TrmConfig,
}

impl Default for MalmConfig {
    fn default() -> Self {
        Self {
            omega: 0.0,
            tol: 1e-8,
            rho0: 0.1,
            c_rho: 0.1,
            k_max: 100,
            rho_min: 1e-12,
            inner_budget: None,
            trm: TrmConfig::default(),
        }
    }
}

impl MalmConfig {
    pub fn with_omega(omega: f64) -> Self {
        Self {
            omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be finite and nonnegative, got {}", self.omega));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return bad(format!("rho0 must be positive, got {}", self.rho0));
        }
        if !(self.c_rho > 0.0 && self.c_rho < 1.0) {
            return bad(format!("c_rho must lie in (0, 1), got {}", self.c_rho));
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho0) {
            return bad(format!("rho_min must lie in (0, rho0], got {}", self.rho_min));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        self.trm.with_tol(self.tol).validate()
    }
}

/// Multiplier estimate and proximal penalty carried between outer iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: DVector<f64>,
    pub rho: f64,
}

impl DualState {
    /// `λ ← λ − (c + ωλ) / (ω + ρ)`
    pub fn update(&mut self, c: &DVector<f64>, omega: f64) {
        let step = (c + &self.lambda * omega) / (omega + self.rho);
        self.lambda -= step;
    }

    /// `ρ ← max(c_ρ ρ, ρ_min)`
    pub fn decrease_rho(&mut self, c_rho: f64, rho_min: f64) {
        self.rho = (c_rho * self.rho).max(rho_min);
    }

    /// `‖c + ωλ‖_∞`
    pub fn feasibility(&self, c: &DVector<f64>, omega: f64) -> f64 {
        (c + &self.lambda * omega).amax()
    }
}

/// Modified augmented Lagrangian method.
///
/// Alternates an inner trust-region minimization of the augmented Lagrangian
/// `Ψ(x) = f − λᵀc + ‖c + ωλ‖²/(2(ω + ρ))` with the multiplier update
/// `λ ← λ − (c + ωλ)/(ω + ρ)`, and stops once `‖c + ωλ‖_∞ <= tol`. Each
/// unsuccessful outer iteration shrinks `ρ` by `c_ρ`.
pub fn malm_solve<P>(problem: &P, cfg: &MalmConfig, x0: &DVector<f64>, lambda0: &DVector<f64>) -> Result<SolveReport>
where
    P: PenaltyProblem + ?Sized,
{
    cfg.validate()?;
    check_len("x0", problem.num_variables(), x0.len())?;
    check_len("lambda0", problem.num_residuals(), lambda0.len())?;

    let omega = cfg.omega;
    let mut x = x0.clone();
    let mut dual = DualState {
        lambda: lambda0.clone(),
        rho: cfg.rho0,
    };
    let mut inner_total = 0;
    let mut history = Vec::new();
    let mut status = SolveStatus::NotConverged;

    for k in 1..=cfg.k_max {
        let mut trm = cfg.trm.with_tol(cfg.tol);
        if let Some(budget) = cfg.inner_budget {
            if inner_total >= budget {
                break;
            }
            // one counted iteration is the final gradient test
            trm.max_iters = trm.max_iters.min(budget - inner_total - 1);
        }

        let psi = AugLagObjective::new(problem, omega, dual.rho, dual.lambda.clone())?;
        let inner = trm_minimize(&psi, &x, &trm)?;
        inner_total += inner.counted_iterations();
        x = inner.x;

        match inner.status {
            TrmStatus::Converged | TrmStatus::Stalled => {}
            TrmStatus::MaxIters => {
                history.push(OuterRecord {
                    inner_iters: inner.iterations + 1,
                    rho: dual.rho,
                    feasibility: f64::NAN,
                    merit: inner.value,
                    trm_status: inner.status,
                });
                break;
            }
            failed => {
                status = SolveStatus::SubproblemFailure { outer: k, trm: failed };
                history.push(OuterRecord {
                    inner_iters: inner.iterations + 1,
                    rho: dual.rho,
                    feasibility: f64::NAN,
                    merit: inner.value,
                    trm_status: failed,
                });
                break;
            }
        }

        let c = problem.residuals(&x);
        let rho_used = dual.rho;
        dual.update(&c, omega);
        let feasibility = dual.feasibility(&c, omega);
        history.push(OuterRecord {
            inner_iters: inner.iterations + 1,
            rho: rho_used,
            feasibility,
            merit: inner.value,
            trm_status: inner.status,
        });
        if feasibility <= cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        dual.decrease_rho(cfg.c_rho, cfg.rho_min);
    }

    Ok(SolveReport {
        x,
        lambda: dual.lambda,
        outer_iters: history.len(),
        inner_iters_total: inner_total,
        status,
        history,
    })
}

/// The classical augmented Lagrangian method: [`malm_solve`] with `ω = 0`.
pub fn alm_solve<P>(problem: &P, cfg: &MalmConfig, x0: &DVector<f64>, lambda0: &DVector<f64>) -> Result<SolveReport>
where
    P: PenaltyProblem + ?Sized,
{
    let cfg = MalmConfig { omega: 0.0, ..*cfg };
    malm_solve(problem, &cfg, x0, lambda0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_update_with_zero_omega_is_first_order_update() {
        let mut dual = DualState {
            lambda: DVector::from_vec(vec![1.0, -2.0]),
            rho: 0.5,
        };
        let c = DVector::from_vec(vec![0.25, 0.5]);
        dual.update(&c, 0.0);
        assert_eq!(dual.lambda.as_slice(), &[0.5, -3.0]);
    }

    #[test]
    fn dual_update_zeroes_shifted_residual_of_auxiliary_system() {
        // z solving c + ωλ + (ω + ρ) z = 0, then λ + z
        let lambda = DVector::from_vec(vec![0.3, -0.7, 1.1]);
        let c = DVector::from_vec(vec![0.02, -0.05, 0.4]);
        let (omega, rho) = (1e-2, 0.1);
        let z = -(&c + &lambda * omega) / (omega + rho);
        let mut dual = DualState {
            lambda: lambda.clone(),
            rho,
        };
        dual.update(&c, omega);
        assert!((dual.lambda - (lambda + &z)).amax() < 1e-16);
        let residual = &c + &(DVector::from_vec(vec![0.3, -0.7, 1.1]) * omega) + &z * (omega + rho);
        assert!(residual.amax() < 1e-16);
    }

    #[test]
    fn rho_schedule_is_geometric_with_floor() {
        let cfg = MalmConfig::default();
        let mut dual = DualState {
            lambda: DVector::zeros(1),
            rho: cfg.rho0,
        };
        for k in 1..=20 {
            dual.decrease_rho(cfg.c_rho, cfg.rho_min);
            let expected = (cfg.rho0 * cfg.c_rho.powi(k)).max(cfg.rho_min);
            assert!((dual.rho - expected).abs() <= 1e-12 * expected);
        }
        assert_eq!(dual.rho, cfg.rho_min);
    }

    #[test]
    fn config_validation() {
        assert!(MalmConfig::default().validate().is_ok());
        assert!(MalmConfig::with_omega(-1.0).validate().is_err());
        assert!(MalmConfig {
            c_rho: 1.0,
            ..MalmConfig::default()
        }
        .validate()
        .is_err());
        assert!(MalmConfig {
            rho0: 0.0,
            ..MalmConfig::default()
        }
        .validate()
        .is_err());
        assert!(MalmConfig {
            k_max: 0,
            ..MalmConfig::default()
        }
        .validate()
        .is_err());
        assert!(MalmConfig {
            tol: 0.0,
            ..MalmConfig::default()
        }
        .validate()
        .is_err());
    }
}
