//! Banded storage and LU with partial pivoting for matrices of small bandwidth.

use nalgebra::DVector;

use super::SingularMatrix;

/// Square band matrix in LAPACK-style column storage with room for pivoting fill.
///
/// Entry `(i, j)` lives at row `kl + ku + i - j` of column `j`, valid for
/// `j - ku <= i <= j + kl` before factorization and `j - ku - kl <= i` after.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn ldab(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.kl + self.ku >= j && i <= j + self.kl);
        (self.kl + self.ku + i - j) + j * Self::ldab(self.kl, self.ku)
    }

    /// Builds the matrix from an entry callback restricted to the band and factors it.
    pub fn factor<F>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self, SingularMatrix>
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut lu = Self {
            n,
            kl,
            ku,
            ab: vec![0.0; Self::ldab(kl, ku) * n],
            pivots: vec![0; n],
        };
        let mut scale = 0.0_f64;
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n.saturating_sub(1)) {
                let v = entry(i, j);
                scale = scale.max(v.abs());
                let k = lu.at(i, j);
                lu.ab[k] = v;
            }
        }
        if !scale.is_finite() {
            return Err(SingularMatrix);
        }
        let tiny = f64::EPSILON * scale * n.max(1) as f64;
        let kv = kl + ku;
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let last_col = (j + kv).min(n - 1);
            let mut p = j;
            let mut best = lu.ab[lu.at(j, j)].abs();
            for i in j + 1..=last_row {
                let v = lu.ab[lu.at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(SingularMatrix);
            }
            lu.pivots[j] = p;
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (lu.at(j, c), lu.at(p, c));
                    lu.ab.swap(a, b);
                }
            }
            let pivot = lu.ab[lu.at(j, j)];
            for i in j + 1..=last_row {
                let idx = lu.at(i, j);
                let l = lu.ab[idx] / pivot;
                lu.ab[idx] = l;
                if l == 0.0 {
                    continue;
                }
                for c in j + 1..=last_col {
                    let u = lu.ab[lu.at(j, c)];
                    let t = lu.at(i, c);
                    lu.ab[t] -= l * u;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let mut x = b.clone();
        for j in 0..n {
            x.swap_rows(j, self.pivots[j]);
            let xj = x[j];
            for i in j + 1..=(j + self.kl).min(n - 1) {
                x[i] -= self.ab[self.at(i, j)] * xj;
            }
        }
        let kv = self.kl + self.ku;
        for j in (0..n).rev() {
            let mut acc = x[j];
            for c in j + 1..=(j + kv).min(n - 1) {
                acc -= self.ab[self.at(j, c)] * x[c];
            }
            x[j] = acc / self.ab[self.at(j, j)];
        }
        x
    }
}
