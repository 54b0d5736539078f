//! Direct solvers used by the grid oracle.

use crate::error::{Error, Result};

/// Solves a tridiagonal system in place by Thomas elimination.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`. Intended for diagonally dominant or SPD systems; no
/// pivoting is performed.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    assert_eq!(lower.len() + 1, n);
    assert_eq!(upper.len() + 1, n);
    let mut c = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::NotPositiveDefinite { pivot: 0 });
    }
    rhs[0] /= pivot;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Lower-triangular Cholesky factor of a dense symmetric matrix, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` (row-major, `n x n`); fails unless `a` is positive definite.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        for j in 0..n {
            let (done, rest) = a.split_at_mut(j * n);
            let row_j = &mut rest[..n];
            // Diagonal and row j of L, computed from rows above.
            for k in 0..j {
                let row_k = &done[k * n..k * n + k];
                let dot: f64 = row_j[..k].iter().zip(row_k).map(|(x, y)| x * y).sum();
                row_j[k] = (row_j[k] - dot) / done[k * n + k];
            }
            let d = row_j[j] - row_j[..j].iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            row_j[j] = d.sqrt();
            for x in row_j[j + 1..].iter_mut() {
                *x = 0.0;
            }
        }
        Ok(Cholesky { n, l: a })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let dot: f64 = row.iter().zip(&b[..i]).map(|(x, y)| x * y).sum();
            b[i] = (b[i] - dot) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let tail: f64 = (i + 1..n)
                .zip(&b[i + 1..])
                .map(|(k, y)| self.l[k * n + i] * y)
                .sum();
            b[i] = (b[i] - tail) / self.l[i * n + i];
        }
    }
}
