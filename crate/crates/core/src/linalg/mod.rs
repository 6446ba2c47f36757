//! Matrix storage for Hessians and Jacobians, and the shifted Newton solve.

mod banded;
mod dense;

pub use banded::BandLu;
pub use dense::Ldlt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("matrix is numerically singular")]
pub struct SingularMatrix;

/// How a problem's Hessians are stored and factored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HessianLayout {
    Dense,
    /// Symmetric band: after reordering, entry `(p, q)` is zero when `|p - q| > half_bandwidth`.
    /// `order[p]` is the variable stored at band position `p`.
    Banded {
        half_bandwidth: usize,
        order: Vec<usize>,
    },
}

/// Symmetric matrix in either dense or banded storage.
#[derive(Debug, Clone)]
pub enum SymMatrix {
    Dense(DMatrix<f64>),
    Banded(BandedSym),
}

#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    /// band position -> variable
    order: Vec<usize>,
    /// variable -> band position
    position: Vec<usize>,
    /// row-major, `n` rows of width `2 * bw + 1`, column offset `q - p + bw`
    band: Vec<f64>,
}

impl BandedSym {
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (p, q) = (self.position[i], self.position[j]);
        (p.abs_diff(q) <= self.bw).then(|| p * (2 * self.bw + 1) + (q + self.bw - p))
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }
}

impl SymMatrix {
    pub fn zeros(n: usize, layout: &HessianLayout) -> Self {
        match layout {
            HessianLayout::Dense => Self::Dense(DMatrix::zeros(n, n)),
            HessianLayout::Banded { half_bandwidth, order } => {
                assert_eq!(order.len(), n, "band ordering must cover every variable");
                let mut position = vec![usize::MAX; n];
                for (p, &v) in order.iter().enumerate() {
                    position[v] = p;
                }
                assert!(
                    position.iter().all(|&p| p != usize::MAX),
                    "band ordering must be a permutation"
                );
                Self::Banded(BandedSym {
                    n,
                    bw: *half_bandwidth,
                    order: order.clone(),
                    position,
                    band: vec![0.0; n * (2 * half_bandwidth + 1)],
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Banded(b) => b.n,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Dense(m) => m[(i, j)],
            Self::Banded(b) => b.slot(i, j).map_or(0.0, |s| b.band[s]),
        }
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)` (once when `i == j`).
    ///
    /// Panics if the banded layout cannot hold the entry.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        match self {
            Self::Dense(m) => {
                m[(i, j)] += v;
                if i != j {
                    m[(j, i)] += v;
                }
            }
            Self::Banded(b) => {
                let s = b
                    .slot(i, j)
                    .unwrap_or_else(|| panic!("entry ({i}, {j}) lies outside the declared Hessian band"));
                b.band[s] += v;
                if i != j {
                    let t = b.slot(j, i).expect("band is symmetric");
                    b.band[t] += v;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::Dense(m) => m.iter().all(|v| v.is_finite()),
            Self::Banded(b) => b.band.iter().all(|v| v.is_finite()),
        }
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.dim() {
            self.add(i, i, v);
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Dense(m) => m * x,
            Self::Banded(b) => {
                let mut y = DVector::zeros(b.n);
                let w = 2 * b.bw + 1;
                for p in 0..b.n {
                    let row = &b.band[p * w..(p + 1) * w];
                    let mut acc = 0.0;
                    for (off, &v) in row.iter().enumerate() {
                        if v == 0.0 {
                            continue;
                        }
                        let q = p + off;
                        if q < b.bw || q - b.bw >= b.n {
                            continue;
                        }
                        acc += v * x[b.order[q - b.bw]];
                    }
                    y[b.order[p]] = acc;
                }
                y
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Banded(_) => {
                let n = self.dim();
                DMatrix::from_fn(n, n, |i, j| self.get(i, j))
            }
        }
    }

    /// Largest absolute asymmetry `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Solves `(A + σI) d = -g`.
    pub fn shifted_solve(&self, g: &DVector<f64>, sigma: f64) -> Result<DVector<f64>, SingularMatrix> {
        let n = self.dim();
        assert_eq!(g.len(), n, "gradient has wrong length");
        let d = match self {
            Self::Dense(m) => {
                let mut a = m.clone();
                for i in 0..n {
                    a[(i, i)] += sigma;
                }
                Ldlt::factor(&a)?.solve(&(-g))
            }
            Self::Banded(b) => {
                let w = 2 * b.bw + 1;
                let lu = BandLu::factor(n, b.bw, b.bw, |p, q| {
                    let v = b.band[p * w + (q + b.bw - p)];
                    if p == q {
                        v + sigma
                    } else {
                        v
                    }
                })?;
                let rhs = DVector::from_fn(n, |p, _| -g[b.order[p]]);
                let sol = lu.solve(&rhs);
                let mut d = DVector::zeros(n);
                for p in 0..n {
                    d[b.order[p]] = sol[p];
                }
                d
            }
        };
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(SingularMatrix)
        }
    }
}

/// Compressed sparse row Jacobian `J = ∇c(x)ᵀ`, one row per residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    ncols: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl Jacobian {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_start: vec![0],
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(ncols: usize, rows: usize, nonzeros: usize) -> Self {
        let mut row_start = Vec::with_capacity(rows + 1);
        row_start.push(0);
        Self {
            ncols,
            row_start,
            cols: Vec::with_capacity(nonzeros),
            values: Vec::with_capacity(nonzeros),
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut jac = Self::with_capacity(m.ncols(), m.nrows(), m.len());
        for i in 0..m.nrows() {
            jac.push_row((0..m.ncols()).map(|j| (j, m[(i, j)])));
        }
        jac
    }

    /// Appends a row given as `(column, value)` pairs. Repeated columns are summed.
    pub fn push_row<I>(&mut self, entries: I)
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let start = *self.row_start.last().unwrap();
        for (c, v) in entries {
            assert!(c < self.ncols, "column {c} out of range");
            if let Some(k) = self.cols[start..].iter().position(|&e| e == c) {
                self.values[start + k] += v;
            } else {
                self.cols.push(c);
                self.values.push(v);
            }
        }
        self.row_start.push(self.cols.len());
    }

    pub fn nrows(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `J x`
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.nrows(), |i, _| self.row(i).map(|(c, v)| v * x[c]).sum())
    }

    /// `Jᵀ y`
    pub fn tr_mul_vec(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ncols);
        for i in 0..self.nrows() {
            let yi = y[i];
            for (c, v) in self.row(i) {
                out[c] += v * yi;
            }
        }
        out
    }

    /// Adds `scale · JᵀJ` into `h`.
    pub fn add_gram(&self, scale: f64, h: &mut SymMatrix) {
        for i in 0..self.nrows() {
            let r = self.row_start[i]..self.row_start[i + 1];
            let (cols, vals) = (&self.cols[r.clone()], &self.values[r]);
            for a in 0..cols.len() {
                h.add(cols[a], cols[a], scale * vals[a] * vals[a]);
                for b in 0..a {
                    h.add(cols[a], cols[b], scale * vals[a] * vals[b]);
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols);
        for i in 0..self.nrows() {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }

    /// Largest absolute row sum, `‖J‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn band_layout(n: usize, bw: usize) -> HessianLayout {
        HessianLayout::Banded {
            half_bandwidth: bw,
            order: (0..n).rev().collect(),
        }
    }

    #[test]
    fn shifted_identity_solve() {
        let mut h = SymMatrix::zeros(2, &HessianLayout::Dense);
        h.add_diagonal(1.0);
        let d = h.shifted_solve(&DVector::from_vec(vec![2.0, 0.0]), 0.0).unwrap();
        assert_eq!(d.as_slice(), &[-2.0, 0.0]);
    }

    #[test]
    fn shifted_diagonal_indefinite() {
        let mut h = SymMatrix::zeros(2, &HessianLayout::Dense);
        h.add(0, 0, 1.0);
        h.add(1, 1, -1.0);
        let d = h.shifted_solve(&DVector::from_vec(vec![1.0, 1.0]), 2.0).unwrap();
        assert_relative_eq!(d[0], -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn banded_and_dense_agree() {
        let n = 9;
        let layout = band_layout(n, 2);
        let mut banded = SymMatrix::zeros(n, &layout);
        let mut dense = SymMatrix::zeros(n, &HessianLayout::Dense);
        for i in 0..n {
            for j in 0..=i {
                // entries within reversed-order band |i - j| <= 2
                if i - j <= 2 {
                    let v = ((i * 7 + j * 3) % 5) as f64 - 2.0;
                    banded.add(i, j, v);
                    dense.add(i, j, v);
                }
            }
        }
        assert_eq!(banded.to_dense(), dense.to_dense());
        let x = DVector::from_fn(n, |i, _| 0.5 + i as f64);
        assert!((banded.mul_vec(&x) - dense.mul_vec(&x)).amax() < 1e-13);
        let g = DVector::from_fn(n, |i, _| (i as f64).cos());
        let a = banded.shifted_solve(&g, 0.3).unwrap();
        let b = dense.shifted_solve(&g, 0.3).unwrap();
        assert!((a - b).amax() < 1e-10);
    }

    #[test]
    #[should_panic(expected = "outside the declared Hessian band")]
    fn band_violation_panics() {
        let mut h = SymMatrix::zeros(5, &band_layout(5, 1));
        h.add(0, 4, 1.0);
    }

    #[test]
    fn jacobian_products_and_gram() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, -1.0, 3.0, 0.5]);
        let j = Jacobian::from_dense(&m);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let y = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        assert!((j.mul_vec(&x) - &m * &x).amax() < 1e-15);
        assert!((j.tr_mul_vec(&y) - m.transpose() * &y).amax() < 1e-15);
        let mut h = SymMatrix::zeros(2, &HessianLayout::Dense);
        j.add_gram(2.0, &mut h);
        assert!((h.to_dense() - 2.0 * m.transpose() * &m).amax() < 1e-14);
        assert_relative_eq!(j.norm_inf(), 3.5);
    }

    #[test]
    fn push_row_merges_duplicates() {
        let mut j = Jacobian::new(3);
        j.push_row([(1, 1.0), (2, 0.5), (1, 2.0)]);
        assert_eq!(j.row(0).collect::<Vec<_>>(), vec![(1, 3.0), (2, 0.5)]);
    }
}
