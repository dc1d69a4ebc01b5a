//! Small dense vectors and matrices for low-dimensional closed-loop simulation.
//!
//! Dimensions are tiny here (the shipped plants have m = 2, the interface is
//! meant for m up to ~16), so everything is computed directly: Gaussian
//! elimination with partial pivoting for inverses, closed forms or cyclic
//! Jacobi sweeps for symmetric eigenvalues. No external solver dependence.

use smallvec::SmallVec;
use thiserror::Error;

/// Determinant threshold factor for declaring a matrix numerically singular:
/// `|det A| < SINGULARITY_FACTOR * (max |a_ij|)^m`.
pub const SINGULARITY_FACTOR: f64 = 1e-12;

/// Numerical failure in a dense-matrix operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (|det| = {det:.3e} < {threshold:.3e})")]
    SingularMatrix { det: f64, threshold: f64 },
}

/// Column vector in R^m. Storage is inline for m <= 4.
#[derive(Debug, Clone, PartialEq)]
pub struct VecM {
    data: SmallVec<[f64; 4]>,
}

impl VecM {
    pub fn zeros(m: usize) -> Self {
        Self {
            data: SmallVec::from_elem(0.0, m),
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            data: SmallVec::from_slice(v),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &VecM) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, a: f64) -> VecM {
        VecM {
            data: self.data.iter().map(|x| a * x).collect(),
        }
    }

    pub fn add(&self, other: &VecM) -> VecM {
        debug_assert_eq!(self.dim(), other.dim());
        VecM {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &VecM) -> VecM {
        debug_assert_eq!(self.dim(), other.dim());
        VecM {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self += a * other`, the Euler-update primitive.
    pub fn add_scaled_assign(&mut self, a: f64, other: &VecM) {
        debug_assert_eq!(self.dim(), other.dim());
        for (s, o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += a * o;
        }
    }
}

impl std::ops::Index<usize> for VecM {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for VecM {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Row-major square matrix in R^{m x m}. Storage is inline for m <= 4.
#[derive(Debug, Clone, PartialEq)]
pub struct MatM {
    m: usize,
    data: SmallVec<[f64; 16]>,
}

impl MatM {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: SmallVec::from_elem(0.0, m * m),
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Self::zeros(m);
        for i in 0..m {
            a.set(i, i, 1.0);
        }
        a
    }

    /// Build from row-major data; `data.len()` must be `m * m`.
    pub fn from_row_major(m: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), m * m, "row-major data length must be m*m");
        Self {
            m,
            data: SmallVec::from_slice(data),
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> MatM {
        let mut t = MatM::zeros(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, v: &VecM) -> VecM {
        debug_assert_eq!(self.m, v.dim());
        let mut out = VecM::zeros(self.m);
        for i in 0..self.m {
            let mut acc = 0.0;
            for j in 0..self.m {
                acc += self.at(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn matmul(&self, other: &MatM) -> MatM {
        debug_assert_eq!(self.m, other.m);
        let mut out = MatM::zeros(self.m);
        for i in 0..self.m {
            for k in 0..self.m {
                let aik = self.at(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..self.m {
                    out.set(i, j, out.at(i, j) + aik * other.at(k, j));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &MatM) -> MatM {
        debug_assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(other.data.iter()) {
            *o += b;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Induced infinity norm: maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.at(i, j).abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Inverse via Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails with [`LinalgError::SingularMatrix`] when
    /// `|det A| < 1e-12 * (max |a_ij|)^m`; full rank is assumed everywhere by
    /// the closed-loop model, so this only guards numerical pathology.
    pub fn invert(&self) -> Result<MatM, LinalgError> {
        let m = self.m;
        let threshold = SINGULARITY_FACTOR * self.max_abs().powi(m as i32);
        let mut a = self.clone();
        let mut inv = MatM::identity(m);
        let mut det = 1.0;
        for col in 0..m {
            let mut pivot_row = col;
            let mut pivot_abs = a.at(col, col).abs();
            for r in (col + 1)..m {
                let v = a.at(r, col).abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_abs == 0.0 {
                return Err(LinalgError::SingularMatrix {
                    det: 0.0,
                    threshold,
                });
            }
            if pivot_row != col {
                for j in 0..m {
                    let (x, y) = (a.at(col, j), a.at(pivot_row, j));
                    a.set(col, j, y);
                    a.set(pivot_row, j, x);
                    let (x, y) = (inv.at(col, j), inv.at(pivot_row, j));
                    inv.set(col, j, y);
                    inv.set(pivot_row, j, x);
                }
                det = -det;
            }
            let pivot = a.at(col, col);
            det *= pivot;
            let inv_pivot = 1.0 / pivot;
            for j in 0..m {
                a.set(col, j, a.at(col, j) * inv_pivot);
                inv.set(col, j, inv.at(col, j) * inv_pivot);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let factor = a.at(r, col);
                if factor == 0.0 {
                    continue;
                }
                for j in 0..m {
                    a.set(r, j, a.at(r, j) - factor * a.at(col, j));
                    inv.set(r, j, inv.at(r, j) - factor * inv.at(col, j));
                }
            }
        }
        if det.abs() < threshold {
            return Err(LinalgError::SingularMatrix {
                det: det.abs(),
                threshold,
            });
        }
        Ok(inv)
    }

    /// Smallest eigenvalue of the symmetric part `(A + A^T) / 2`.
    pub fn min_eig_sym_part(&self) -> f64 {
        let m = self.m;
        let mut s = MatM::zeros(m);
        for i in 0..m {
            for j in 0..m {
                s.set(i, j, 0.5 * (self.at(i, j) + self.at(j, i)));
            }
        }
        match m {
            0 => 0.0,
            1 => s.at(0, 0),
            2 => {
                let (a, b, d) = (s.at(0, 0), s.at(0, 1), s.at(1, 1));
                let mean = 0.5 * (a + d);
                let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                mean - radius
            }
            _ => jacobi_min_eig(s),
        }
    }
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix; returns the
/// smallest eigenvalue. Converges quadratically for the small m used here.
fn jacobi_min_eig(mut s: MatM) -> f64 {
    let m = s.dim();
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off = off.max(s.at(p, q).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let spq = s.at(p, q);
                if spq.abs() <= tol {
                    continue;
                }
                let theta = (s.at(q, q) - s.at(p, p)) / (2.0 * spq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s.at(k, p);
                    let skq = s.at(k, q);
                    s.set(k, p, c * skp - sn * skq);
                    s.set(k, q, sn * skp + c * skq);
                }
                for k in 0..m {
                    let spk = s.at(p, k);
                    let sqk = s.at(q, k);
                    s.set(p, k, c * spk - sn * sqk);
                    s.set(q, k, sn * spk + c * sqk);
                }
            }
        }
    }
    (0..m).map(|i| s.at(i, i)).fold(f64::INFINITY, f64::min)
}
