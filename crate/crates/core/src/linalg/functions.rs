//! Matrix functions: exponential by scaling and squaring, and the entire
//! function phi(z) = (exp(-t z^k) - 1) / z that integrates the flows in
//! closed form. phi is evaluated through an eigendecomposition when the
//! eigenvector basis is well conditioned, otherwise through the entire
//! function phi1(z) = (e^z - 1)/z on an augmented block matrix.

use super::{CMatrix, C64, EPS};
use crate::error::{Error, Result};

const MAX_SERIES_TERMS: usize = 1000;

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn mat_exp(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("mat_exp requires a square matrix".into()));
    }
    let n = m.rows();
    let nrm = m.norm_one();
    let s = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(C64::new(0.5f64.powi(s as i32), 0.0));
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for j in 1..=64usize {
        term = (&term * &scaled).scale(C64::new(1.0 / j as f64, 0.0));
        sum = &sum + &term;
        if term.norm_max() <= 0.25 * EPS * sum.norm_max() {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..s {
        result = &result * &result;
    }
    if !result.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(result)
}

/// phi1(A) = A^{-1}(e^A - 1), evaluated for any A (including singular)
/// through the exponential of the augmented matrix [[A, I], [0, 0]].
pub fn phi1(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("phi1 requires a square matrix".into()));
    }
    let n = a.rows();
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.set_block(0, 0, a);
    aug.set_block(0, n, &CMatrix::identity(n));
    let e = mat_exp(&aug)?;
    Ok(e.get_block(0, n, n, n))
}

/// Scalar phi(z) = z^{-1}(exp(-t z^k) - 1), stable for small arguments.
pub fn scalar_phi(z: C64, k: usize, t: C64) -> Result<C64> {
    let zk = z.powu(k as u32);
    let w = t * zk;
    if w.norm() >= 0.25 && z.norm() > 0.0 {
        return Ok(((-w).exp() - 1.0) / z);
    }
    // series: sum_{j>=1} (-t)^j z^{jk-1} / j!
    let zk1 = if k >= 1 { z.powu((k - 1) as u32) } else { C64::new(1.0, 0.0) };
    let mut term = -t * zk1;
    let mut sum = term;
    for j in 1..MAX_SERIES_TERMS {
        term = term * (-t) * zk / (j as f64 + 1.0);
        sum += term;
        if term.norm() <= 0.25 * EPS * sum.norm().max(1e-300) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(MAX_SERIES_TERMS))
}

/// Condition threshold beyond which the eigenvector path is abandoned.
const EIGVEC_COND_LIMIT: f64 = 1e8;

/// phi(M) for phi(z) = z^{-1}(exp(-t z^k) - 1), well defined for singular M.
pub fn mat_phi(m: &CMatrix, k: usize, t: C64) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("mat_phi requires a square matrix".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("mat_phi requires k >= 1".into()));
    }
    let n = m.rows();
    if let Ok(e) = m.eig() {
        if let Ok(s_inv) = e.vectors.inverse() {
            let cond = e.vectors.norm_one() * s_inv.norm_one();
            if cond <= EIGVEC_COND_LIMIT {
                let mut d = CMatrix::zeros(n, n);
                for (i, &lambda) in e.values.iter().enumerate() {
                    d[(i, i)] = scalar_phi(lambda, k, t)?;
                }
                return Ok(&(&e.vectors * &d) * &s_inv);
            }
        }
    }
    // fallback: phi(M) = -t M^{k-1} phi1(-t M^k)
    let mk = m.pow(k)?;
    let p1 = phi1(&mk.scale(-t))?;
    Ok((&m.pow(k - 1)? * &p1).scale(-t))
}
