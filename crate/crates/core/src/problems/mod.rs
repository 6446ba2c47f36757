//! Benchmark instances.

mod circle;
mod ocp;

pub use circle::{metrics_circle, Circle, CircleReference};
pub use ocp::{metrics_ocp, ocp_instance, reference_control, reference_state, BenchmarkOcp, J_STAR, QUADRATURE_POINTS};
