use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use crate::error::Result;
use crate::problem::PenaltyProblem;
use crate::transcription::{Partials2, ScalarOcp, Transcription};

/// Optimal value of the continuous problem.
pub const J_STAR: f64 = -0.2569969625;

pub const QUADRATURE_POINTS: usize = 8;

/// `min ∫₀^{π/2} y² + cos(t) u dt`  s.t.  `ẏ = ½y² + u`, `y(0) = 0`.
///
/// The solution is `y*(t) = sin t / (cos t − 2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BenchmarkOcp;

impl ScalarOcp for BenchmarkOcp {
    fn horizon(&self) -> f64 {
        FRAC_PI_2
    }

    fn initial_state(&self) -> f64 {
        0.0
    }

    fn running_cost(&self, t: f64, y: f64, u: f64) -> Partials2 {
        let cos_t = t.cos();
        Partials2 {
            value: y * y + cos_t * u,
            dy: 2.0 * y,
            du: cos_t,
            dyy: 2.0,
            ..Partials2::default()
        }
    }

    fn dynamics(&self, _t: f64, y: f64, u: f64) -> Partials2 {
        Partials2 {
            value: 0.5 * y * y + u,
            dy: y,
            du: 1.0,
            dyy: 1.0,
            ..Partials2::default()
        }
    }
}

pub fn reference_state(t: f64) -> f64 {
    t.sin() / (t.cos() - 2.0)
}

/// `u* = ẏ* − ½ y*²`
pub fn reference_control(t: f64) -> f64 {
    let d = t.cos() - 2.0;
    let ydot = (1.0 - 2.0 * t.cos()) / (d * d);
    let y = reference_state(t);
    ydot - 0.5 * y * y
}

/// The benchmark transcribed on `elements` elements with eight Gauss points each.
pub fn ocp_instance(elements: usize) -> Result<Transcription<BenchmarkOcp>> {
    Transcription::new(BenchmarkOcp, elements, QUADRATURE_POINTS)
}

/// `(f(x) − J*, ‖c(x)‖₂)`
pub fn metrics_ocp<O: ScalarOcp>(trans: &Transcription<O>, x: &DVector<f64>) -> (f64, f64) {
    (trans.objective(x) - J_STAR, trans.residuals(x).norm())
}
