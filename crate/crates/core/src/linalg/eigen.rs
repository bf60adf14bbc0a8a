//! Nonsymmetric complex eigendecomposition: Householder reduction to
//! Hessenberg form followed by shifted QR with deflation, then eigenvectors
//! by back-substitution on the triangular factor.

use super::{CMatrix, C64, EPS};
use crate::error::{Error, Result};

/// Eigenvalues and (right) eigenvectors. `vectors` holds unit-norm
/// eigenvectors as columns, in the same order as `values`.
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// Reorder eigenpairs lexicographically by (re, im) of the eigenvalue.
    pub fn sorted_lex(self) -> Eigen {
        let n = self.values.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            let (za, zb) = (self.values[a], self.values[b]);
            za.re
                .partial_cmp(&zb.re)
                .unwrap()
                .then(za.im.partial_cmp(&zb.im).unwrap())
        });
        let values = idx.iter().map(|&i| self.values[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| self.vectors[(r, idx[c])]);
        Eigen { values, vectors }
    }
}

/// Givens rotation G = [[c, s], [-conj(s), c]] with c real, c^2 + |s|^2 = 1,
/// such that G * [x, y]^T = [r, 0]^T.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let t = (ax * ax + ay * ay).sqrt();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let c = ax / t;
    let s = (x / ax) * (y.conj() / t);
    (c, s)
}

/// Householder reduction to upper Hessenberg form. Returns (H, Q) with
/// M = Q H Q^H and Q unitary.
fn hessenberg(m: &CMatrix) -> (CMatrix, CMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // reflector annihilating h[k+2.., k]
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x <= EPS * h.norm_max() {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * norm_x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- P H, rows k+1..n
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let dot2 = dot * 2.0;
            for i in 0..v.len() {
                let sub = v[i] * dot2;
                h[(k + 1 + i, j)] -= sub;
            }
        }
        // H <- H P, cols k+1..n
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            let dot2 = dot * 2.0;
            for j in 0..v.len() {
                let sub = dot2 * v[j].conj();
                h[(i, k + 1 + j)] -= sub;
            }
        }
        // Q <- Q P
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| q[(i, k + 1 + j)] * v[j]).sum();
            let dot2 = dot * 2.0;
            for j in 0..v.len() {
                let sub = dot2 * v[j].conj();
                q[(i, k + 1 + j)] -= sub;
            }
        }
    }
    // clean below the first subdiagonal
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Eigenvalues of the trailing 2x2 of the active block; returns the one
/// closer to the bottom-right entry (Wilkinson shift).
fn wilkinson_shift(h: &CMatrix, hi: usize) -> C64 {
    let a = h[(hi - 2, hi - 2)];
    let b = h[(hi - 2, hi - 1)];
    let c = h[(hi - 1, hi - 2)];
    let d = h[(hi - 1, hi - 1)];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Single explicit-shift QR sweep on the active block [lo, hi).
fn qr_step(h: &mut CMatrix, q: &mut CMatrix, lo: usize, hi: usize, shift: C64) {
    let n = h.rows();
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi - 1 {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        rots.push((c, s));
        for j in i..n {
            let a = h[(i, j)];
            let b = h[(i + 1, j)];
            h[(i, j)] = a * c + s * b;
            h[(i + 1, j)] = -s.conj() * a + b * c;
        }
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        let top = (i + 2).min(n);
        for r in 0..top {
            let a = h[(r, i)];
            let b = h[(r, i + 1)];
            h[(r, i)] = a * c + s.conj() * b;
            h[(r, i + 1)] = -s * a + b * c;
        }
        for r in 0..n {
            let a = q[(r, i)];
            let b = q[(r, i + 1)];
            q[(r, i)] = a * c + s.conj() * b;
            q[(r, i + 1)] = -s * a + b * c;
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}

/// Schur form: M = Q T Q^H with T upper triangular.
fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.rows();
    let (mut h, mut q) = hessenberg(m);
    let scale = h.norm_max().max(f64::MIN_POSITIVE);
    let mut hi = n;
    let mut iters_since_deflation = 0usize;
    let max_total = 60 * n.max(1);
    let mut total = 0usize;
    while hi > 1 {
        // locate the start of the active block
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[(lo, lo - 1)].norm() <= EPS * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            hi -= 1;
            iters_since_deflation = 0;
            continue;
        }
        total += 1;
        iters_since_deflation += 1;
        if total > max_total {
            return Err(Error::NonConvergence(max_total));
        }
        let shift = if iters_since_deflation % 16 == 0 {
            // exceptional shift to break limit cycles
            let extra = h[(hi - 1, hi - 2)].norm()
                + if hi >= 3 { h[(hi - 2, hi - 3)].norm() } else { 0.0 };
            h[(hi - 1, hi - 1)] + C64::new(0.75 * extra, 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, &mut q, lo, hi, shift);
    }
    // zero out the subdiagonal remnants
    for i in 1..n {
        h[(i, i - 1)] = C64::new(0.0, 0.0);
    }
    Ok((h, q))
}

/// Eigenvectors of an upper triangular T by back-substitution, mapped back
/// through Q. Near-defective pivots are perturbed at machine precision.
fn triangular_vectors(t: &CMatrix, q: &CMatrix) -> CMatrix {
    let n = t.rows();
    let scale = t.norm_max().max(f64::MIN_POSITIVE);
    let mut vecs = CMatrix::zeros(n, n);
    for col in 0..n {
        let lambda = t[(col, col)];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[col] = C64::new(1.0, 0.0);
        for j in (0..col).rev() {
            let mut num = C64::new(0.0, 0.0);
            for k in j + 1..=col {
                num += t[(j, k)] * y[k];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < EPS * scale {
                den = C64::new(EPS * scale, 0.0);
            }
            y[j] = -num / den;
        }
        // v = Q y, normalized
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=col {
                acc += q[(i, k)] * y[k];
            }
            v[i] = acc;
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            vecs[(i, col)] = v[i] / nrm;
        }
    }
    vecs
}

pub fn eig(m: &CMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("eig requires a square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    if n == 1 {
        return Ok(Eigen { values: vec![m[(0, 0)]], vectors: CMatrix::identity(1) });
    }
    let (t, q) = schur(m)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let vectors = triangular_vectors(&t, &q);
    Ok(Eigen { values, vectors })
}
