//! Log-canonical charts: positions x and momenta sigma parametrise both the
//! tadpole and cyclic representation spaces through a Cauchy-type Lax matrix.
//! The dual chart (z, theta) diagonalises the Lax matrix instead and carries
//! the inverse parameter.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Tolerance, C64};
use crate::quiver::{rank_one_factor, xi_lift, CyclicData, QuiverParams, TadpoleData};

const REG_TOL: f64 = 1e-10;

fn check_regular(x: &[C64], t: C64, label: &str) -> Result<()> {
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for (i, xi) in x.iter().enumerate() {
        if xi.norm() <= REG_TOL * scale {
            return Err(Error::RegularityViolation(format!("{label}_{i} is zero")));
        }
        for (j, xj) in x.iter().enumerate() {
            if i != j {
                if (xi - xj).norm() <= REG_TOL * xi.norm().max(xj.norm()) {
                    return Err(Error::RegularityViolation(format!(
                        "{label}_{i} collides with {label}_{j}"
                    )));
                }
                let txj = t * xj;
                if (xi - txj).norm() <= REG_TOL * xi.norm().max(txj.norm()) {
                    return Err(Error::RegularityViolation(format!(
                        "{label}_{i} collides with t*{label}_{j}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// A point (x, sigma) of the log-canonical chart with parameter t: positions
/// are pairwise distinct, nonzero and avoid the t-shifted diagonal.
#[derive(Debug, Clone)]
pub struct DarbouxPoint {
    pub x: Vec<C64>,
    pub sigma: Vec<C64>,
    pub t: C64,
}

impl DarbouxPoint {
    pub fn new(x: Vec<C64>, sigma: Vec<C64>, t: C64) -> Result<Self> {
        if x.len() != sigma.len() || x.is_empty() {
            return Err(Error::ShapeMismatch("x and sigma must have equal nonzero length".into()));
        }
        check_regular(&x, t, "x")?;
        let sscale = sigma.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for (i, s) in sigma.iter().enumerate() {
            if s.norm() <= REG_TOL * sscale {
                return Err(Error::RegularityViolation(format!("sigma_{i} is zero")));
            }
        }
        Ok(DarbouxPoint { x, sigma, t })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Simultaneously permute positions and momenta.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let x = perm.iter().map(|&i| self.x[i]).collect();
        let sigma = perm.iter().map(|&i| self.sigma[i]).collect();
        DarbouxPoint::new(x, sigma, self.t)
    }
}

/// A point of the dual chart: positions z (or w) diagonalise the Lax matrix
/// and the regular locus uses the inverse parameter.
#[derive(Debug, Clone)]
pub struct DualPoint {
    pub pos: Vec<C64>,
    pub mom: Vec<C64>,
    pub t: C64,
}

impl DualPoint {
    pub fn new(pos: Vec<C64>, mom: Vec<C64>, t: C64) -> Result<Self> {
        if pos.len() != mom.len() || pos.is_empty() {
            return Err(Error::ShapeMismatch("pos and mom must have equal nonzero length".into()));
        }
        check_regular(&pos, t.inv(), "z")?;
        let sscale = mom.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for (i, s) in mom.iter().enumerate() {
            if s.norm() <= REG_TOL * sscale {
                return Err(Error::RegularityViolation(format!("mom_{i} is zero")));
            }
        }
        Ok(DualPoint { pos, mom, t })
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }
}

/// The Cauchy-type Lax matrix of the chart:
/// B_ij = sigma_j (t-1)/(t - x_i/x_j) prod_{k != j} (1 - t x_j/x_k)/(1 - x_j/x_k).
pub fn cauchy_b(pt: &DarbouxPoint) -> CMatrix {
    let n = pt.n();
    let t = pt.t;
    let mut prod_j = vec![C64::new(1.0, 0.0); n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let r = pt.x[j] / pt.x[k];
                prod_j[j] *= (C64::new(1.0, 0.0) - t * r) / (C64::new(1.0, 0.0) - r);
            }
        }
    }
    CMatrix::from_fn(n, n, |i, j| {
        pt.sigma[j] * (t - 1.0) / (t - pt.x[i] / pt.x[j]) * prod_j[j]
    })
}

/// sigma_i = nu_i prod_{j != i} (1 - x_i/x_j)/(1 - t x_i/x_j).
pub fn sigma_from_nu(x: &[C64], nu: &[C64], t: C64) -> Result<Vec<C64>> {
    check_regular(x, t, "x")?;
    let n = x.len();
    if nu.len() != n {
        return Err(Error::ShapeMismatch("nu length mismatch".into()));
    }
    Ok((0..n)
        .map(|i| {
            let mut p = nu[i];
            for j in 0..n {
                if j != i {
                    let r = x[i] / x[j];
                    p *= (C64::new(1.0, 0.0) - r) / (C64::new(1.0, 0.0) - t * r);
                }
            }
            p
        })
        .collect())
}

/// Inverse of [`sigma_from_nu`].
pub fn nu_from_sigma(x: &[C64], sigma: &[C64], t: C64) -> Result<Vec<C64>> {
    check_regular(x, t, "x")?;
    let n = x.len();
    if sigma.len() != n {
        return Err(Error::ShapeMismatch("sigma length mismatch".into()));
    }
    Ok((0..n)
        .map(|i| {
            let mut p = sigma[i];
            for j in 0..n {
                if j != i {
                    let r = x[i] / x[j];
                    p *= (C64::new(1.0, 0.0) - t * r) / (C64::new(1.0, 0.0) - r);
                }
            }
            p
        })
        .collect())
}

/// Tadpole point of the chart: X = diag(x), Z the Cauchy matrix, Y = Z - X^{-1},
/// and V, W factoring the rank-one defect q0 (1+YX)(1+XY)^{-1} - Id.
pub fn build_tadpole_point(pt: &DarbouxPoint, q0: C64) -> Result<TadpoleData> {
    if (pt.t - q0).norm() > 1e-12 * q0.norm().max(1.0) {
        return Err(Error::InvalidInput("chart parameter differs from q0".into()));
    }
    let n = pt.n();
    let x = CMatrix::diag(&pt.x);
    let z = cauchy_b(pt);
    let x_inv = x.inverse()?;
    let y = &z - &x_inv;
    let id = CMatrix::identity(n);
    // 1 + YX = ZX and 1 + XY = XZ
    let zx = &z * &x;
    let xz = &x * &z;
    let defect = &(&zx * &xz.inverse()?).scale(q0) - &id;
    let (v, w) = rank_one_factor(&defect, &Tolerance::default())?;
    TadpoleData::new(x, y, v, w)
}

/// Cyclic point of the chart: A = diag(x), B the Cauchy matrix with t the
/// full product of the q_i, lifted through xi_lift.
pub fn build_cyclic_point(pt: &DarbouxPoint, p: &QuiverParams) -> Result<CyclicData> {
    if p.m() < 2 {
        return Err(Error::InvalidInput("cyclic charts require m >= 2".into()));
    }
    if (pt.t - p.t()).norm() > 1e-12 * p.t().norm().max(1.0) {
        return Err(Error::InvalidInput("chart parameter differs from t".into()));
    }
    let a = CMatrix::diag(&pt.x);
    let b = cauchy_b(pt);
    xi_lift(&a, &b, p)
}

/// Tadpole point built from the dual chart: Z = diag(z) and X takes the
/// Cauchy form with the inverse parameter.
pub fn build_from_dual(dp: &DualPoint, q0: C64) -> Result<TadpoleData> {
    if (dp.t - q0).norm() > 1e-12 * q0.norm().max(1.0) {
        return Err(Error::InvalidInput("chart parameter differs from q0".into()));
    }
    let n = dp.n();
    let dual_pt = DarbouxPoint::new(dp.pos.clone(), dp.mom.clone(), q0.inv())?;
    let x = cauchy_b(&dual_pt);
    let z = CMatrix::diag(&dp.pos);
    let x_inv = x.inverse()?;
    let y = &z - &x_inv;
    let id = CMatrix::identity(n);
    let zx = &z * &x;
    let xz = &x * &z;
    let defect = &(&zx * &xz.inverse()?).scale(q0) - &id;
    let (v, w) = rank_one_factor(&defect, &Tolerance::default())?;
    TadpoleData::new(x, y, v, w)
}

/// Threshold below which the extracted chart is rejected.
const CHART_RESIDUAL_LIMIT: f64 = 1e-8;

/// Read the dual coordinates off a tadpole point: diagonalise Z = Y + X^{-1},
/// sort its spectrum lexicographically, and fit X in the Z-eigenbasis against
/// the Cauchy form with the inverse parameter. The scaling freedom of the
/// eigenbasis is fixed by a diagonal fit; the remaining mismatch is returned
/// as the chart residual.
pub fn dual_chart_extract(d: &TadpoleData, q0: C64) -> Result<(DualPoint, f64)> {
    let n = d.n();
    let z = d.z()?;
    let eig = z.eig()?.sorted_lex();
    let zs = eig.values.clone();
    // simple-spectrum guard
    if n > 1 {
        let mut gap = f64::INFINITY;
        let mut spread: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let dist = (zs[i] - zs[j]).norm();
                gap = gap.min(dist);
                spread = spread.max(dist);
            }
        }
        if gap < 1e-8 * spread.max(1e-300) {
            return Err(Error::DegenerateSpectrum { gap, spread });
        }
    }
    let s_inv = eig.vectors.inverse()?;
    let x_in_basis = &(&s_inv * &d.x) * &eig.vectors;
    // theta from the (conjugation-invariant) diagonal
    let qinv = q0.inv();
    let one = C64::new(1.0, 0.0);
    let mut theta = Vec::with_capacity(n);
    for j in 0..n {
        let mut prod = one;
        for k in 0..n {
            if k != j {
                let r = zs[j] / zs[k];
                prod *= (one - qinv * r) / (one - r);
            }
        }
        theta.push(x_in_basis[(j, j)] / prod);
    }
    let dp = DualPoint::new(zs.clone(), theta.clone(), q0)?;
    // residual against the Cauchy form, modulo the diagonal scaling freedom
    let dual_pt = DarbouxPoint::new(zs, theta, qinv)?;
    let cform = cauchy_b(&dual_pt);
    let mut scale_d = vec![one; n];
    for j in 1..n {
        if cform[(0, j)].norm() > 1e-300 {
            scale_d[j] = x_in_basis[(0, j)] / cform[(0, j)];
        }
    }
    let norm = x_in_basis.norm_max().max(1e-300);
    let mut resid: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = cform[(i, j)] * scale_d[j] / scale_d[i];
            resid = resid.max((x_in_basis[(i, j)] - expect).norm());
        }
    }
    resid /= norm;
    if resid > CHART_RESIDUAL_LIMIT {
        return Err(Error::ChartMismatch(resid));
    }
    Ok((dp, resid))
}
