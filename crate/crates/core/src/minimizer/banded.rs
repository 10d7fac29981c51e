//! Symmetric banded matrices and their Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix with `bw` off-diagonals, stored by rows as `diag[i][k] = a[i][i+k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    rows: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            rows: vec![vec![0.0; bw + 1]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j - i > self.bw {
            0.0
        } else {
            self.rows[i][j - i]
        }
    }

    /// Adds `v` to entries (i, j) and (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j - i <= self.bw, "entry ({i}, {j}) outside the band");
        self.rows[i][j - i] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.rows[i][0] * x[i];
            for k in 1..=self.bw {
                let j = i + k;
                if j >= self.n {
                    break;
                }
                let a = self.rows[i][k];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// x·(A y).
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Linear combination Σ cₖ Aₖ of matrices of the same size.
    pub fn combine(parts: &[(f64, &SymBanded)]) -> Self {
        let n = parts[0].1.n;
        let bw = parts.iter().map(|p| p.1.bw).max().unwrap_or(0);
        let mut out = Self::zeros(n, bw);
        for (c, m) in parts {
            assert_eq!(m.n, n, "matrix sizes differ");
            for i in 0..n {
                for k in 0..=m.bw {
                    out.rows[i][k] += c * m.rows[i][k];
                }
            }
        }
        out
    }

    /// Dense copy, for tests and small reference eigensolves.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// L Lᵀ factor of a symmetric positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // l[i][k] = L[i][i−k]
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    pub fn factor(a: &SymBanded) -> Result<Self> {
        let n = a.n;
        let bw = a.bw;
        let mut l = vec![vec![0.0; bw + 1]; n];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = a.get(j, i);
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Singular(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][i - j] = s / l[j][0];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i][i - k] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..n).rev() {
            let hi = (i + self.bw).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.l[k][k - i] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}
