use std::f64::consts::{FRAC_PI_8, SQRT_2};

use nalgebra::{DMatrix, DVector};

use crate::linalg::{Jacobian, SymMatrix};
use crate::problem::PenaltyProblem;

/// Two perturbed copies of the radius-`√2` circle constraint:
///
/// ```text
/// min −x₁ − x₂   s.t.   (x₁ + ε)² + x₂² = 2,   (x₁ − ε)² + x₂² = 2
/// ```
///
/// For `ε > 0` the constraints only meet on the `x₂` axis; the penalty
/// minimizer stays near `[1, 1]` while the constrained solution is near `[0, √2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub epsilon: f64,
}

impl Circle {
    pub fn new(epsilon: f64) -> Self {
        assert!(epsilon >= 0.0, "epsilon must be nonnegative");
        Self { epsilon }
    }
}

impl PenaltyProblem for Circle {
    fn num_variables(&self) -> usize {
        2
    }

    fn num_residuals(&self) -> usize {
        2
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        -x[0] - x[1]
    }

    fn objective_gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(2, -1.0)
    }

    fn add_objective_hessian(&self, _x: &DVector<f64>, _h: &mut SymMatrix) {}

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let e = self.epsilon;
        let r2 = x[1] * x[1] - 2.0;
        DVector::from_vec(vec![(x[0] + e).powi(2) + r2, (x[0] - e).powi(2) + r2])
    }

    fn jacobian(&self, x: &DVector<f64>) -> Jacobian {
        let e = self.epsilon;
        Jacobian::from_dense(&DMatrix::from_row_slice(
            2,
            2,
            &[2.0 * (x[0] + e), 2.0 * x[1], 2.0 * (x[0] - e), 2.0 * x[1]],
        ))
    }

    fn add_residual_hessian(&self, _x: &DVector<f64>, weights: &DVector<f64>, h: &mut SymMatrix) {
        let s = 2.0 * (weights[0] + weights[1]);
        h.add(0, 0, s);
        h.add(1, 1, s);
    }
}

/// Reference points and starting values of the circle experiments.
pub struct CircleReference;

impl CircleReference {
    /// Constrained solution for `ε → 0⁺`.
    pub fn x_a() -> DVector<f64> {
        DVector::from_vec(vec![0.0, SQRT_2])
    }

    /// Limit of the penalty minimizers as `ε, ω → 0`.
    pub fn x_b() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 1.0])
    }

    pub fn x0() -> DVector<f64> {
        let a = 3.0 * FRAC_PI_8;
        DVector::from_vec(vec![SQRT_2 * a.cos(), SQRT_2 * a.sin()])
    }

    pub fn lambda0() -> DVector<f64> {
        DVector::from_element(2, 0.4619)
    }
}

/// `(‖x − x_A‖₂, ‖x − x_B‖₂)`
pub fn metrics_circle(x: &DVector<f64>) -> (f64, f64) {
    ((x - CircleReference::x_a()).norm(), (x - CircleReference::x_b()).norm())
}
