//! Singular value decomposition by one-sided Jacobi rotations.

use super::{CMatrix, C64, EPS};
use crate::error::{Error, Result};

/// A = U diag(s) V^H with s sorted descending. Columns of U beyond the
/// numerical rank may be zero (they are not completed to a unitary basis).
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub vt: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::ShapeMismatch("svd of an empty matrix".into()));
    }
    if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        let t = svd_tall(&m.hermitian())?;
        // A^H = U S V^H  =>  A = V S U^H
        Ok(Svd { u: t.vt.hermitian(), s: t.s, vt: t.u.hermitian() })
    }
}

fn svd_tall(a: &CMatrix) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    let mut u = a.clone();
    let mut v = CMatrix::identity(n);
    let tol = EPS * (m as f64).sqrt();
    for _sweep in 0..60 {
        let mut converged = true;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..m {
                    app += u[(i, p)].norm_sqr();
                    aqq += u[(i, q)].norm_sqr();
                    apq += u[(i, p)].conj() * u[(i, q)];
                }
                let off = apq.norm();
                if off <= tol * (app * aqq).sqrt() || off == 0.0 {
                    continue;
                }
                converged = false;
                // phase that makes the cross term real positive
                let phase = apq / off;
                let tau = (aqq - app) / (2.0 * off);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = diag(1, conj(phase)) * [[cs, sn], [-sn, cs]]
                let j21 = -phase.conj() * sn;
                let j22 = phase.conj() * cs;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = up * cs + uq * j21;
                    u[(i, q)] = up * sn + uq * j22;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * cs + vq * j21;
                    v[(i, q)] = vp * sn + vq * j22;
                }
            }
        }
        if converged {
            break;
        }
    }
    // singular values are the column norms
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let s = (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            (s, j)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let smax = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let mut uu = CMatrix::zeros(m, n);
    let mut vv = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (col, &(sig, j)) in pairs.iter().enumerate() {
        s.push(sig);
        if sig > smax * EPS * 1e-2 && sig > 0.0 {
            for i in 0..m {
                uu[(i, col)] = u[(i, j)] / sig;
            }
        }
        for i in 0..n {
            vv[(i, col)] = v[(i, j)];
        }
    }
    Ok(Svd { u: uu, s, vt: vv.hermitian() })
}
