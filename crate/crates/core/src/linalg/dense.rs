//! Dense symmetric indefinite factorization (Bunch-Kaufman `P A Pᵀ = L D Lᵀ`).
//!
//! `D` is block diagonal with 1×1 and 2×2 blocks; `L` is unit lower triangular.
//! The factorization works on a full symmetric copy of the matrix, so row and
//! column interchanges are plain swaps.

use nalgebra::{DMatrix, DVector};

use super::SingularMatrix;

/// Pivot growth bound, `(1 + √17) / 8`.
const ALPHA: f64 = 0.640_388_203_202_208_4;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Block {
    One,
    Two,
}

/// A completed `L D Lᵀ` factorization.
#[derive(Debug, Clone)]
pub struct Ldlt {
    /// Strictly lower part holds `L`; diagonal and first subdiagonal of 2×2 blocks hold `D`.
    factors: DMatrix<f64>,
    /// Interchange applied at each elimination step, in order.
    swaps: Vec<(usize, usize)>,
    /// Block kind starting at each column (`Two` is recorded on the first column only).
    blocks: Vec<(usize, Block)>,
}

impl Ldlt {
    /// Factors a symmetric matrix. Only the lower triangle of `a` is read.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self, SingularMatrix> {
        assert!(a.is_square(), "symmetric factorization needs a square matrix");
        let n = a.nrows();
        let mut m = a.clone();
        for j in 0..n {
            for i in j + 1..n {
                m[(j, i)] = m[(i, j)];
            }
        }
        let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if !scale.is_finite() {
            return Err(SingularMatrix);
        }
        let tiny = f64::EPSILON * scale * n.max(1) as f64;

        let mut swaps = Vec::with_capacity(n);
        let mut blocks = Vec::with_capacity(n);
        let mut k = 0;
        while k < n {
            let akk = m[(k, k)].abs();
            let (imax, colmax) =
                (k + 1..n)
                    .map(|i| (i, m[(i, k)].abs()))
                    .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

            if akk.max(colmax) <= tiny {
                return Err(SingularMatrix);
            }

            let (block, pivot) = if akk >= ALPHA * colmax {
                (Block::One, k)
            } else {
                let rowmax = (k..n)
                    .filter(|&j| j != imax)
                    .map(|j| m[(imax, j)].abs())
                    .fold(0.0, f64::max);
                if akk * rowmax >= ALPHA * colmax * colmax {
                    (Block::One, k)
                } else if m[(imax, imax)].abs() >= ALPHA * rowmax {
                    (Block::One, imax)
                } else {
                    (Block::Two, imax)
                }
            };

            let target = if block == Block::One { k } else { k + 1 };
            if pivot != target {
                m.swap_rows(target, pivot);
                m.swap_columns(target, pivot);
            }
            swaps.push((target, pivot));

            match block {
                Block::One => {
                    let d = m[(k, k)];
                    if d.abs() <= tiny {
                        return Err(SingularMatrix);
                    }
                    for i in k + 1..n {
                        m[(i, k)] /= d;
                    }
                    for j in k + 1..n {
                        let ljd = m[(j, k)] * d;
                        if ljd == 0.0 {
                            continue;
                        }
                        for i in j..n {
                            m[(i, j)] -= m[(i, k)] * ljd;
                        }
                    }
                    for j in k + 1..n {
                        for i in j + 1..n {
                            m[(j, i)] = m[(i, j)];
                        }
                    }
                    blocks.push((k, Block::One));
                    k += 1;
                }
                Block::Two => {
                    let (d11, d21, d22) = (m[(k, k)], m[(k + 1, k)], m[(k + 1, k + 1)]);
                    let det = d11 * d22 - d21 * d21;
                    if det.abs() <= tiny * scale || !det.is_finite() {
                        return Err(SingularMatrix);
                    }
                    // W = rows below the block; L = W D⁻¹; trailing -= W D⁻¹ Wᵀ
                    let mut l = vec![(0.0, 0.0); n];
                    for (i, li) in l.iter_mut().enumerate().skip(k + 2) {
                        let (w1, w2) = (m[(i, k)], m[(i, k + 1)]);
                        *li = ((d22 * w1 - d21 * w2) / det, (d11 * w2 - d21 * w1) / det);
                    }
                    for j in k + 2..n {
                        let (w1, w2) = (m[(j, k)], m[(j, k + 1)]);
                        for i in j..n {
                            m[(i, j)] -= l[i].0 * w1 + l[i].1 * w2;
                        }
                    }
                    for (i, li) in l.iter().enumerate().skip(k + 2) {
                        m[(i, k)] = li.0;
                        m[(i, k + 1)] = li.1;
                    }
                    for j in k + 2..n {
                        for i in j + 1..n {
                            m[(j, i)] = m[(i, j)];
                        }
                    }
                    blocks.push((k, Block::Two));
                    k += 2;
                }
            }
        }
        Ok(Self {
            factors: m,
            swaps,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.nrows()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let m = &self.factors;
        let mut x = b.clone();
        for &(a, p) in &self.swaps {
            x.swap_rows(a, p);
        }
        // L y = P b
        for &(k, block) in &self.blocks {
            match block {
                Block::One => {
                    let xk = x[k];
                    for i in k + 1..n {
                        x[i] -= m[(i, k)] * xk;
                    }
                }
                Block::Two => {
                    let (x1, x2) = (x[k], x[k + 1]);
                    for i in k + 2..n {
                        x[i] -= m[(i, k)] * x1 + m[(i, k + 1)] * x2;
                    }
                }
            }
        }
        // D z = y
        for &(k, block) in &self.blocks {
            match block {
                Block::One => x[k] /= m[(k, k)],
                Block::Two => {
                    let (d11, d21, d22) = (m[(k, k)], m[(k + 1, k)], m[(k + 1, k + 1)]);
                    let det = d11 * d22 - d21 * d21;
                    let (y1, y2) = (x[k], x[k + 1]);
                    x[k] = (d22 * y1 - d21 * y2) / det;
                    x[k + 1] = (d11 * y2 - d21 * y1) / det;
                }
            }
        }
        // Lᵀ w = z
        for &(k, block) in self.blocks.iter().rev() {
            let cols: &[usize] = match block {
                Block::One => &[k][..],
                Block::Two => &[k, k + 1][..],
            };
            let start = k + cols.len();
            for &c in cols {
                let mut acc = x[c];
                for i in start..n {
                    acc -= m[(i, c)] * x[i];
                }
                x[c] = acc;
            }
        }
        for &(a, p) in self.swaps.iter().rev() {
            x.swap_rows(a, p);
        }
        x
    }

    /// Number of negative eigenvalues of the factored matrix (Sylvester inertia).
    pub fn negative_eigenvalues(&self) -> usize {
        let m = &self.factors;
        self.blocks
            .iter()
            .map(|&(k, block)| match block {
                Block::One => usize::from(m[(k, k)] < 0.0),
                Block::Two => {
                    let det = m[(k, k)] * m[(k + 1, k + 1)] - m[(k + 1, k)].powi(2);
                    if det < 0.0 {
                        1
                    } else if m[(k, k)] + m[(k + 1, k + 1)] < 0.0 {
                        2
                    } else {
                        0
                    }
                }
            })
            .sum()
    }
}
