//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! The Hill matrices this crate builds are real symmetric and modest in size
//! (a few hundred rows), where Jacobi is simple, robust and gives
//! machine-accurate eigenpairs without pivot-order sensitivity.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Row-major dense symmetric matrix storage.
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    #[inline]
    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Eigenvalues (unsorted by magnitude, ascending by value) and the matrix of
/// column eigenvectors, `A = V diag(w) V^T`.
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column-major: `vectors[k]` is the k-th eigenvector.
    pub vectors: Vec<Vec<f64>>,
}

pub fn eigh(a: &SymMatrix) -> EigenDecomposition {
    let n = a.n;
    let mut m = a.data.clone();
    // v starts as identity, accumulates rotations; stored row-major
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[i * n + j] * m[i * n + j];
            }
        }
        s
    };

    let scale: f64 = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1.0);
    let tol = (1e-15 * scale) * (1e-15 * scale) * (n * n) as f64;

    for _sweep in 0..60 {
        if off_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e15 {
                    1.0 / (2.0 * theta)
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // rows/cols p and q of m
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());

    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    EigenDecomposition { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_spectrum() {
        // tridiagonal with known eigenvalues 2 - 2cos(k pi / (n+1))
        let n = 12;
        let mut a = SymMatrix::zeros(n);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        let d = eigh(&a);
        for (k, &w) in d.values.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * core::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((w - want).abs() < 1e-12, "k={k}: {w} vs {want}");
        }
        // residual check A v = w v
        for k in 0..n {
            for i in 0..n {
                let mut av = 0.0;
                for j in 0..n {
                    av += a.get(i, j) * d.vectors[k][j];
                }
                assert!((av - d.values[k] * d.vectors[k][i]).abs() < 1e-12);
            }
        }
    }
}
