//! Integral-penalty finite-element transcription of scalar optimal control problems.
//!
//! For `min ∫₀ᵀ L(t, y, u) dt` subject to `ẏ = g(t, y, u)`, `y(0) = y₀`, the state
//! and control are approximated by continuous piecewise-linear functions on a
//! uniform mesh of `N` elements. With Gauss–Legendre points `τⱼ` and weights `αⱼ`
//! (`q` per element) the transcription is the penalty problem
//!
//! ```text
//! f(x)  = Σⱼ αⱼ L(τⱼ, y_h(τⱼ), u_h(τⱼ))
//! cⱼ(x) = √αⱼ (−ẏ_h(τⱼ) + g(τⱼ, y_h(τⱼ), u_h(τⱼ)))
//! ```
//!
//! so `‖c(x)‖₂` is the quadrature value of the L² norm of the dynamics residual.
//! The unknowns are `x = [y_h(h), …, y_h(Nh), u_h(0), …, u_h(Nh)]`; `y_h(0) = y₀` is fixed.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::linalg::{HessianLayout, Jacobian, SymMatrix};
use crate::problem::PenaltyProblem;
use crate::quadrature::GaussLegendre;

/// Value and partial derivatives up to second order of a function of `(y, u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Partials2 {
    pub value: f64,
    pub dy: f64,
    pub du: f64,
    pub dyy: f64,
    pub dyu: f64,
    pub duu: f64,
}

/// Scalar-state, scalar-control optimal control problem on `[0, T]`.
pub trait ScalarOcp: Send + Sync {
    fn horizon(&self) -> f64;
    fn initial_state(&self) -> f64;
    /// Running cost `L(t, y, u)`.
    fn running_cost(&self, t: f64, y: f64, u: f64) -> Partials2;
    /// Right-hand side `g(t, y, u)` of `ẏ = g`.
    fn dynamics(&self, t: f64, y: f64, u: f64) -> Partials2;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    elements: usize,
    horizon: f64,
}

impl Mesh {
    pub fn uniform(elements: usize, horizon: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidConfig("mesh needs at least one element".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { elements, horizon })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn width(&self) -> f64 {
        self.horizon / self.elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.elements {
            self.horizon
        } else {
            i as f64 * self.width()
        }
    }

    /// Element containing `t`; the right end belongs to the last element.
    pub fn element_of(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::InvalidConfig(format!(
                "time {t} lies outside [0, {}]",
                self.horizon
            )));
        }
        Ok(((t / self.width()) as usize).min(self.elements - 1))
    }
}

/// Value and slope at `t` of the piecewise-linear function with the given nodal values.
pub fn eval_basis(mesh: &Mesh, nodal: &[f64], t: f64) -> Result<(f64, f64)> {
    check_len("nodal values", mesh.elements() + 1, nodal.len())?;
    let e = mesh.element_of(t)?;
    let h = mesh.width();
    let s = (t - mesh.node(e)) / h;
    let (a, b) = (nodal[e], nodal[e + 1]);
    Ok((a + s * (b - a), (b - a) / h))
}

#[derive(Debug, Clone, Copy)]
struct QuadPoint {
    element: usize,
    t: f64,
    alpha: f64,
    sqrt_alpha: f64,
    /// weight of the element's right node in the interpolant
    s: f64,
}

/// Pieces of a basis combination: up to two `(variable, coefficient)` pairs.
type Stencil = [(Option<usize>, f64); 2];

#[derive(Debug, Clone)]
pub struct Transcription<O> {
    ocp: O,
    mesh: Mesh,
    rule: GaussLegendre,
    points: Vec<QuadPoint>,
    banded: bool,
}

impl<O: ScalarOcp> Transcription<O> {
    /// Transcription with `elements` elements and `q` quadrature points per element.
    pub fn new(ocp: O, elements: usize, q: usize) -> Result<Self> {
        let mesh = Mesh::uniform(elements, ocp.horizon())?;
        let rule = GaussLegendre::new(q)?;
        let h = mesh.width();
        let mut points = Vec::with_capacity(elements * q);
        for e in 0..elements {
            let a = mesh.node(e);
            for (t, alpha) in rule.on(a, mesh.node(e + 1)) {
                points.push(QuadPoint {
                    element: e,
                    t,
                    alpha,
                    sqrt_alpha: alpha.sqrt(),
                    s: (t - a) / h,
                });
            }
        }
        Ok(Self {
            ocp,
            mesh,
            rule,
            points,
            banded: true,
        })
    }

    /// Selects banded (default) or dense Hessian storage.
    pub fn with_banded(mut self, banded: bool) -> Self {
        self.banded = banded;
        self
    }

    pub fn ocp(&self) -> &O {
        &self.ocp
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn quadrature(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Mapped quadrature points `(τⱼ, αⱼ)` in residual order.
    pub fn quadrature_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().map(|p| (p.t, p.alpha))
    }

    /// Index in `x` of the state value at node `i`, `None` for the fixed initial node.
    pub fn state_index(&self, node: usize) -> Option<usize> {
        node.checked_sub(1)
    }

    pub fn control_index(&self, node: usize) -> usize {
        self.mesh.elements() + node
    }

    /// Nodal state values `y_h(t₀), …, y_h(t_N)` including the fixed initial value.
    pub fn state_nodes(&self, x: &DVector<f64>) -> Vec<f64> {
        let n = self.mesh.elements();
        std::iter::once(self.ocp.initial_state())
            .chain(x.rows(0, n).iter().copied())
            .collect()
    }

    pub fn control_nodes(&self, x: &DVector<f64>) -> Vec<f64> {
        let n = self.mesh.elements();
        x.rows(n, n + 1).iter().copied().collect()
    }

    /// Coefficient vector interpolating the given state and control functions at the nodes.
    pub fn interpolate<Y, U>(&self, y: Y, u: U) -> DVector<f64>
    where
        Y: Fn(f64) -> f64,
        U: Fn(f64) -> f64,
    {
        let n = self.mesh.elements();
        DVector::from_fn(2 * n + 1, |k, _| {
            if k < n {
                y(self.mesh.node(k + 1))
            } else {
                u(self.mesh.node(k - n))
            }
        })
    }

    /// `(t, y_h(t), u_h(t))` at `samples` evenly spaced times covering `[0, T]`.
    pub fn sample(&self, x: &DVector<f64>, samples: usize) -> Result<Vec<(f64, f64, f64)>> {
        check_len("x", self.num_variables(), x.len())?;
        if samples < 2 {
            return Err(Error::InvalidConfig("trajectory needs at least two samples".into()));
        }
        let ys = self.state_nodes(x);
        let us = self.control_nodes(x);
        let t_end = self.mesh.horizon();
        (0..samples)
            .map(|k| {
                let t = if k + 1 == samples {
                    t_end
                } else {
                    t_end * k as f64 / (samples - 1) as f64
                };
                Ok((t, eval_basis(&self.mesh, &ys, t)?.0, eval_basis(&self.mesh, &us, t)?.0))
            })
            .collect()
    }

    fn y_stencil(&self, p: &QuadPoint) -> Stencil {
        let e = p.element;
        [(self.state_index(e), 1.0 - p.s), (self.state_index(e + 1), p.s)]
    }

    fn ydot_stencil(&self, p: &QuadPoint) -> Stencil {
        let e = p.element;
        let inv_h = 1.0 / self.mesh.width();
        [(self.state_index(e), -inv_h), (self.state_index(e + 1), inv_h)]
    }

    fn u_stencil(&self, p: &QuadPoint) -> Stencil {
        let e = p.element;
        [
            (Some(self.control_index(e)), 1.0 - p.s),
            (Some(self.control_index(e + 1)), p.s),
        ]
    }

    fn state_at(&self, x: &DVector<f64>, p: &QuadPoint) -> (f64, f64, f64) {
        let e = p.element;
        let y_left = self.state_index(e).map_or(self.ocp.initial_state(), |i| x[i]);
        let y_right = x[e];
        let u_left = x[self.control_index(e)];
        let u_right = x[self.control_index(e + 1)];
        let y = y_left + p.s * (y_right - y_left);
        let u = u_left + p.s * (u_right - u_left);
        let ydot = (y_right - y_left) / self.mesh.width();
        (y, ydot, u)
    }

    /// Adds `scale · ∇²F` for `F(y_h(τ), u_h(τ))` with second partials `d`.
    fn add_point_hessian(&self, p: &QuadPoint, d: &Partials2, scale: f64, h: &mut SymMatrix) {
        let ys = self.y_stencil(p);
        let us = self.u_stencil(p);
        for (a, &(ia, ya)) in ys.iter().enumerate() {
            let Some(ia) = ia else { continue };
            for &(ib, yb) in &ys[a..] {
                let Some(ib) = ib else { continue };
                h.add(ia, ib, scale * d.dyy * ya * yb);
            }
            // state and control indices never coincide, so `add` mirrors every cross term
            for &(ib, ub) in &us {
                h.add(ia, ib.unwrap(), scale * d.dyu * ya * ub);
            }
        }
        for (a, &(ia, ua)) in us.iter().enumerate() {
            let ia = ia.unwrap();
            for &(ib, ub) in &us[a..] {
                h.add(ia, ib.unwrap(), scale * d.duu * ua * ub);
            }
        }
    }
}

impl<O: ScalarOcp> PenaltyProblem for Transcription<O> {
    fn num_variables(&self) -> usize {
        2 * self.mesh.elements() + 1
    }

    fn num_residuals(&self) -> usize {
        self.points.len()
    }

    /// Interleaved order `u₀, y₁, u₁, y₂, u₂, …` gives half bandwidth 3.
    fn hessian_layout(&self) -> HessianLayout {
        if !self.banded {
            return HessianLayout::Dense;
        }
        let n = self.mesh.elements();
        let order = (0..=2 * n)
            .map(|p| if p % 2 == 1 { p / 2 } else { n + p / 2 })
            .collect();
        HessianLayout::Banded {
            half_bandwidth: 3,
            order,
        }
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let (y, _, u) = self.state_at(x, p);
                p.alpha * self.ocp.running_cost(p.t, y, u).value
            })
            .sum()
    }

    fn objective_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.num_variables());
        for p in &self.points {
            let (y, _, u) = self.state_at(x, p);
            let d = self.ocp.running_cost(p.t, y, u);
            for (i, c) in self.y_stencil(p) {
                if let Some(i) = i {
                    g[i] += p.alpha * d.dy * c;
                }
            }
            for (i, c) in self.u_stencil(p) {
                g[i.unwrap()] += p.alpha * d.du * c;
            }
        }
        g
    }

    fn add_objective_hessian(&self, x: &DVector<f64>, h: &mut SymMatrix) {
        for p in &self.points {
            let (y, _, u) = self.state_at(x, p);
            let d = self.ocp.running_cost(p.t, y, u);
            self.add_point_hessian(p, &d, p.alpha, h);
        }
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.points.len(),
            self.points.iter().map(|p| {
                let (y, ydot, u) = self.state_at(x, p);
                p.sqrt_alpha * (-ydot + self.ocp.dynamics(p.t, y, u).value)
            }),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> Jacobian {
        let mut jac = Jacobian::with_capacity(self.num_variables(), self.points.len(), 4 * self.points.len());
        for p in &self.points {
            let (y, _, u) = self.state_at(x, p);
            let d = self.ocp.dynamics(p.t, y, u);
            let ys = self.y_stencil(p);
            let yd = self.ydot_stencil(p);
            let entries = (0..2)
                .filter_map(|k| ys[k].0.map(|i| (i, p.sqrt_alpha * (d.dy * ys[k].1 - yd[k].1))))
                .chain(
                    self.u_stencil(p)
                        .into_iter()
                        .map(|(i, c)| (i.unwrap(), p.sqrt_alpha * d.du * c)),
                );
            jac.push_row(entries);
        }
        jac
    }

    fn add_residual_hessian(&self, x: &DVector<f64>, weights: &DVector<f64>, h: &mut SymMatrix) {
        for (p, &w) in self.points.iter().zip(weights.iter()) {
            let (y, _, u) = self.state_at(x, p);
            let d = self.ocp.dynamics(p.t, y, u);
            self.add_point_hessian(p, &d, w * p.sqrt_alpha, h);
        }
    }
}
