//! Dense complex linear algebra: matrices, LU solves, eigendecomposition,
//! singular values, matrix exponential and the analytic flow function.

mod eigen;
mod functions;
mod svd;

pub use eigen::Eigen;
pub use functions::{mat_exp, mat_phi, phi1, scalar_phi};
pub use svd::Svd;

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub type C64 = Complex64;

/// Machine epsilon for f64.
pub const EPS: f64 = f64::EPSILON;

/// Combined absolute/relative comparison tolerance.
///
/// Two scalars pass when `|a - b| <= abs + rel * max(|a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn close(&self, a: C64, b: C64) -> bool {
        (a - b).norm() <= self.abs + self.rel * a.norm().max(b.norm())
    }
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    /// Build from row-major data. Entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(entries: &[C64]) -> Self {
        CMatrix { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    /// Row vector from a slice.
    pub fn row_vec(entries: &[C64]) -> Self {
        CMatrix { rows: 1, cols: entries.len(), data: entries.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Max-modulus entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn get_block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row0 + i, col0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Entrywise comparison under the combined tolerance.
    pub fn approx_eq(&self, other: &CMatrix, tol: &Tolerance) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(&a, &b)| tol.close(a, b))
    }

    /// Integer matrix power by repeated squaring.
    pub fn pow(&self, k: usize) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("pow requires a square matrix".into()));
        }
        let mut result = CMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// LU factorisation with partial pivoting.
    pub fn lu(&self) -> Result<Lu> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("LU requires a square matrix".into()));
        }
        let n = self.rows;
        let scale = self.norm_max();
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularMatrix(format!(
                    "pivot {:.3e} below threshold at step {}",
                    best, k
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[k * n + j];
                    lu[i * n + j] -= sub;
                }
            }
        }
        Ok(Lu { n, lu, perm, sign })
    }

    /// Inverse with an explicit conditioning guard.
    ///
    /// Fails when a pivot falls below `1e-14 * norm_max` or when the one-norm
    /// condition estimate exceeds `1 / (100 * eps)`.
    pub fn inverse(&self) -> Result<CMatrix> {
        let lu = self.lu()?;
        let inv = lu.solve_matrix(&CMatrix::identity(self.rows))?;
        let cond = self.norm_one() * inv.norm_one();
        if cond > 1.0 / (100.0 * EPS) {
            return Err(Error::SingularMatrix(format!(
                "condition estimate {:.3e} too large",
                cond
            )));
        }
        Ok(inv)
    }

    pub fn det(&self) -> Result<C64> {
        match self.lu() {
            Ok(lu) => Ok(lu.det()),
            Err(Error::SingularMatrix(_)) => Ok(C64::new(0.0, 0.0)),
            Err(e) => Err(e),
        }
    }

    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.lu()?.solve_matrix(rhs)
    }

    /// Eigendecomposition; see [`Eigen`].
    pub fn eig(&self) -> Result<Eigen> {
        eigen::eig(self)
    }

    /// Singular value decomposition by one-sided Jacobi; see [`Svd`].
    pub fn svd(&self) -> Result<Svd> {
        svd::svd(self)
    }

    /// Number of singular values above `tol.rel * sigma_max`.
    pub fn numerical_rank(&self, tol: &Tolerance) -> Result<usize> {
        let sv = self.svd()?;
        let smax = sv.s.first().copied().unwrap_or(0.0);
        Ok(sv.s.iter().filter(|&&s| s > tol.rel * smax).count())
    }
}

/// LU factors of a square matrix.
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn det(&self) -> C64 {
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for k in 0..i {
                let sub = self.lu[i * n + k] * x[k];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let sub = self.lu[i * n + k] * x[k];
                x[i] -= sub;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    pub fn solve_matrix(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.rows() != self.n {
            return Err(Error::ShapeMismatch("rhs row count mismatch".into()));
        }
        let mut out = CMatrix::zeros(self.n, rhs.cols());
        for j in 0..rhs.cols() {
            let col = rhs.column(j);
            let x = self.solve_vec(&col);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * rhs[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }
}

/// Convenience constructor for complex scalars.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real scalar as a complex number.
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverse() {
        let id = CMatrix::identity(3);
        let inv = id.inverse().unwrap();
        assert!(inv.approx_eq(&id, &Tolerance::default()));
    }

    #[test]
    fn diagonal_inverse() {
        let d = CMatrix::diag(&[cr(2.0), cr(4.0)]);
        let inv = d.inverse().unwrap();
        let expect = CMatrix::diag(&[cr(0.5), cr(0.25)]);
        assert!(inv.approx_eq(&expect, &Tolerance::default()));
    }

    #[test]
    fn inverse_multiply_back() {
        let mut rng = crate::sampling::test_rng(7);
        let m = crate::sampling::random_matrix(&mut rng, 5, 5, 1.0);
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        let resid = (&prod - &CMatrix::identity(5)).norm_max();
        assert!(resid <= 1e-10 * m.norm_max().max(1.0), "residual {resid}");
    }

    #[test]
    fn singular_matrix_detected() {
        let m = CMatrix::new(2, 2, vec![cr(1.0), cr(2.0), cr(2.0), cr(4.0)]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let r = CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn det_of_product() {
        let mut rng = crate::sampling::test_rng(11);
        let a = crate::sampling::random_matrix(&mut rng, 4, 4, 1.0);
        let b = crate::sampling::random_matrix(&mut rng, 4, 4, 1.0);
        let lhs = (&a * &b).det().unwrap();
        let rhs = a.det().unwrap() * b.det().unwrap();
        assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerance::default();
        assert_eq!(CMatrix::zeros(3, 3).numerical_rank(&tol).unwrap(), 0);
        assert_eq!(CMatrix::identity(4).numerical_rank(&tol).unwrap(), 4);
        let v = CMatrix::col_vec(&[cr(1.0), c(2.0, 1.0), cr(-0.5)]);
        let w = CMatrix::row_vec(&[c(0.3, -0.2), cr(1.5), cr(2.0)]);
        let outer = &v * &w;
        assert_eq!(outer.numerical_rank(&tol).unwrap(), 1);
    }

    #[test]
    fn tolerance_is_symmetric_and_reflexive() {
        let tol = Tolerance::new(0.0, 0.0);
        let a = c(1.25, -0.5);
        assert!(tol.close(a, a));
        let tol = Tolerance::default();
        let b = c(1.25 + 1e-13, -0.5);
        assert_eq!(tol.close(a, b), tol.close(b, a));
    }
}
