//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 64;

/// A `q`-point Gauss–Legendre rule on the reference interval `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Returns `(P_q(x), P_q'(x))` by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if q == 0 { 1.0 } else { p1 };
    let dp = if q == 0 {
        0.0
    } else {
        q as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

impl GaussLegendre {
    pub fn new(q: usize) -> Result<Self> {
        if !(1..=MAX_POINTS).contains(&q) {
            return Err(Error::InvalidConfig(format!(
                "quadrature order must lie in 1..={MAX_POINTS}, got {q}"
            )));
        }
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let qf = q as f64;
        for i in 0..q.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ascending nodes in `[−1, 1]`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.on(a, b).map(|(t, w)| w * f(t)).sum()
    }
}
