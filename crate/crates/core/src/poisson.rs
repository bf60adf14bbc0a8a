//! Numerical Poisson brackets in the log-canonical chart
//! {x_i, sigma_j} = delta_ij x_i sigma_j. Derivatives are central
//! differences along the real axis of each complex coordinate (valid for
//! holomorphic evaluators), Richardson-extrapolated over two step sizes.

use crate::darboux::{build_cyclic_point, build_tadpole_point, dual_chart_extract, DarbouxPoint};
use crate::error::{Error, Result};
use crate::flows::min_displacement_assignment;
use crate::hamiltonians::{ham_trace, Family};
use crate::linalg::{CMatrix, C64};
use crate::quiver::{Point, QuiverParams, Residuals};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A named holomorphic function of a chart point.
pub struct ChartFunction {
    pub name: String,
    eval: Box<dyn Fn(&DarbouxPoint) -> Result<C64> + Send + Sync>,
}

impl ChartFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&DarbouxPoint) -> Result<C64> + Send + Sync + 'static,
    ) -> Self {
        ChartFunction { name: name.into(), eval: Box::new(eval) }
    }

    pub fn eval(&self, pt: &DarbouxPoint) -> Result<C64> {
        (self.eval)(pt)
    }

    /// Coordinate function x_i.
    pub fn coord_x(i: usize) -> Self {
        Self::new(format!("x_{i}"), move |pt| Ok(pt.x[i]))
    }

    /// Coordinate function sigma_i.
    pub fn coord_sigma(i: usize) -> Self {
        Self::new(format!("sigma_{i}"), move |pt| Ok(pt.sigma[i]))
    }

    /// nu_i recovered from sigma through the product formula.
    pub fn coord_nu(i: usize) -> Self {
        Self::new(format!("nu_{i}"), move |pt| {
            Ok(crate::darboux::nu_from_sigma(&pt.x, &pt.sigma, pt.t)?[i])
        })
    }

    /// Pointwise product f * g.
    pub fn product(f: ChartFunction, g: ChartFunction) -> Self {
        let name = format!("{}*{}", f.name, g.name);
        Self::new(name, move |pt| Ok(f.eval(pt)? * g.eval(pt)?))
    }
}

fn perturbed(pt: &DarbouxPoint, coord: usize, delta: f64) -> Result<DarbouxPoint> {
    let n = pt.n();
    let mut x = pt.x.clone();
    let mut sigma = pt.sigma.clone();
    if coord < n {
        x[coord] += delta;
    } else {
        sigma[coord - n] += delta;
    }
    DarbouxPoint::new(x, sigma, pt.t)
}

/// Central-difference gradient (d/dx_i, d/dsigma_i) at one step size.
fn gradient(f: &ChartFunction, pt: &DarbouxPoint, h_rel: f64) -> Result<Vec<C64>> {
    let n = pt.n();
    let mut grad = Vec::with_capacity(2 * n);
    for coord in 0..2 * n {
        let scale = if coord < n { pt.x[coord].norm() } else { pt.sigma[coord - n].norm() };
        let h = h_rel * scale.max(1e-8);
        let fp = f.eval(&perturbed(pt, coord, h)?)?;
        let fm = f.eval(&perturbed(pt, coord, -h)?)?;
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

fn bracket_from_gradients(pt: &DarbouxPoint, gf: &[C64], gg: &[C64]) -> C64 {
    let n = pt.n();
    let mut b = C64::new(0.0, 0.0);
    for i in 0..n {
        b += pt.x[i] * pt.sigma[i] * (gf[i] * gg[n + i] - gf[n + i] * gg[i]);
    }
    b
}

/// A bracket value with its Richardson error estimate.
#[derive(Debug, Clone, Copy)]
pub struct BracketValue {
    pub value: C64,
    pub error_estimate: f64,
}

/// {f, g} = sum_i x_i sigma_i (df/dx_i dg/dsigma_i - df/dsigma_i dg/dx_i),
/// estimated at steps h and h/2 and extrapolated.
pub fn canonical_bracket(
    f: &ChartFunction,
    g: &ChartFunction,
    pt: &DarbouxPoint,
    h_rel: f64,
) -> Result<BracketValue> {
    let b1 = {
        let gf = gradient(f, pt, h_rel)?;
        let gg = gradient(g, pt, h_rel)?;
        bracket_from_gradients(pt, &gf, &gg)
    };
    let b2 = {
        let gf = gradient(f, pt, h_rel / 2.0)?;
        let gg = gradient(g, pt, h_rel / 2.0)?;
        bracket_from_gradients(pt, &gf, &gg)
    };
    let gap = (b1 - b2).norm();
    let scale = b1.norm().max(b2.norm()).max(f.eval(pt)?.norm() * g.eval(pt)?.norm()).max(1.0);
    if gap > 100.0 * 1e-2 * scale {
        return Err(Error::NonHolomorphic(gap));
    }
    Ok(BracketValue { value: (b2 * 4.0 - b1) / 3.0, error_estimate: gap / 3.0 })
}

/// Max normalised |{f_i, f_j}| over all pairs in the family and all points.
pub fn verify_involution(
    family: &[ChartFunction],
    pts: &[DarbouxPoint],
    h_rel: f64,
) -> Result<Residuals> {
    let mut res = Residuals::default();
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let mut worst = 0.0f64;
            let mut worst_pt = 0usize;
            for (k, pt) in pts.iter().enumerate() {
                let fv = family[i].eval(pt)?;
                let gv = family[j].eval(pt)?;
                let b = canonical_bracket(&family[i], &family[j], pt, h_rel)?;
                let normalised = b.value.norm() / (1.0 + fv.norm() * gv.norm());
                if normalised > worst {
                    worst = normalised;
                    worst_pt = k;
                }
            }
            res.push(
                format!("{{{},{}}}@pt{}", family[i].name, family[j].name, worst_pt),
                worst,
                1.0,
            );
        }
    }
    Ok(res)
}

/// Pullbacks of the four trace families to chart functions.
pub fn family_functions(p: &QuiverParams, fam: Family, js: &[i64]) -> Vec<ChartFunction> {
    js.iter()
        .map(|&j| {
            let p = p.clone();
            let name = format!("{fam:?}_{j}");
            ChartFunction::new(name, move |pt| {
                let point = chart_point(pt, &p)?;
                ham_trace(&point, fam, j)
            })
        })
        .collect()
}

fn chart_point(pt: &DarbouxPoint, p: &QuiverParams) -> Result<Point> {
    if p.m() == 1 {
        Ok(Point::Tadpole(build_tadpole_point(pt, p.q()[0])?))
    } else {
        Ok(Point::Cyclic(build_cyclic_point(pt, p)?))
    }
}

/// Report of the Poisson property of the block-coordinate pullbacks
/// f_a = tr X^{am}, g_b = tr(Z X^{1+bm}).
pub fn verify_xi_poisson(
    p: &QuiverParams,
    pts: &[DarbouxPoint],
    h_rel: f64,
) -> Result<Residuals> {
    if p.m() < 2 {
        return Err(Error::InvalidInput("xi checks need m >= 2".into()));
    }
    let m = p.m();
    let mut res = Residuals::default();
    let f_fn = |alpha: usize| {
        let p = p.clone();
        ChartFunction::new(format!("f_{alpha}"), move |pt| {
            let d = build_cyclic_point(pt, &p)?;
            Ok(d.big_x().pow(alpha * p.m())?.trace())
        })
    };
    let g_fn = |beta: usize| {
        let p = p.clone();
        ChartFunction::new(format!("g_{beta}"), move |pt| {
            let d = build_cyclic_point(pt, &p)?;
            Ok((&d.big_z() * &d.big_x().pow(1 + beta * p.m())?).trace())
        })
    };
    let tau: C64 = (0..m).map(|s| p.t_s(s)).sum();

    // exact pullback identities (no differentiation):
    // f_a = m tr A^a and g_b = tau tr(B A^b)
    for pt in pts {
        let a_mat = CMatrix::diag(&pt.x);
        let b_mat = crate::darboux::cauchy_b(pt);
        for alpha in 1..=2usize {
            let lhs = f_fn(alpha).eval(pt)?;
            let rhs = a_mat.pow(alpha)?.trace() * m as f64;
            res.push(
                format!("pullback-f_{alpha}"),
                (lhs - rhs).norm() / rhs.norm().max(1.0),
                1.0,
            );
        }
        for beta in 0..=1usize {
            let lhs = g_fn(beta).eval(pt)?;
            let rhs = (&b_mat * &a_mat.pow(beta)?).trace() * tau;
            res.push(
                format!("pullback-g_{beta}"),
                (lhs - rhs).norm() / rhs.norm().max(1.0),
                1.0,
            );
        }
    }

    // finite-difference brackets: {f_a, f_b} = 0 and {f_a, g_b} = a m g_{a+b}
    for pt in pts {
        let f1 = f_fn(1);
        let f2 = f_fn(2);
        let b = canonical_bracket(&f1, &f2, pt, h_rel)?;
        let scale = 1.0 + f1.eval(pt)?.norm() * f2.eval(pt)?.norm();
        res.push("{f_1,f_2}", b.value.norm() / scale, 1.0);
        for alpha in 1..=2usize {
            for beta in 0..=1usize {
                let f = f_fn(alpha);
                let g = g_fn(beta);
                let b = canonical_bracket(&f, &g, pt, h_rel)?;
                let expect = g_fn(alpha + beta).eval(pt)? * (alpha * m) as f64;
                let resid = (b.value - expect).norm() / expect.norm().max(1.0);
                res.push(format!("{{f_{alpha},g_{beta}}}"), resid, 1.0);
            }
        }
    }
    Ok(res)
}

/// Direct-evaluation check of the quadratic pullback identity
/// sum_{r=bm}^{cm-1} h_{r,(b+c)m-r} = tau^2 sum_{p=b}^{c-1} tr(B A^p B A^{b+c-p})
/// with h_{r,s} = tr(Z X^{1+r} Z X^{1+s}).
pub fn verify_h_sum_identity(
    p: &QuiverParams,
    pts: &[DarbouxPoint],
    beta: usize,
    gamma: usize,
) -> Result<Residuals> {
    if beta >= gamma {
        return Err(Error::InvalidInput("need beta < gamma".into()));
    }
    let m = p.m();
    let tau: C64 = (0..m).map(|s| p.t_s(s)).sum();
    let mut res = Residuals::default();
    for (k, pt) in pts.iter().enumerate() {
        let d = build_cyclic_point(pt, p)?;
        let big_x = d.big_x();
        let big_z = d.big_z();
        let mut lhs = C64::new(0.0, 0.0);
        for r in beta * m..gamma * m {
            let s = (beta + gamma) * m - r;
            let zr = &big_z * &big_x.pow(1 + r)?;
            let zs = &big_z * &big_x.pow(1 + s)?;
            lhs += (&zr * &zs).trace();
        }
        let a_mat = CMatrix::diag(&pt.x);
        let b_mat = crate::darboux::cauchy_b(pt);
        let mut rhs = C64::new(0.0, 0.0);
        for q in beta..gamma {
            let left = &b_mat * &a_mat.pow(q)?;
            let right = &b_mat * &a_mat.pow(beta + gamma - q)?;
            rhs += (&left * &right).trace();
        }
        rhs *= tau * tau;
        res.push(
            format!("h-sum-{beta}-{gamma}@pt{k}"),
            (lhs - rhs).norm() / rhs.norm().max(1.0),
            1.0,
        );
    }
    Ok(res)
}

/// Brackets of the dual coordinates (z, theta) as functions of (x, sigma):
/// {z_i, z_j} and {theta_i, theta_j} vanish and {z_i, theta_j} = -delta_ij
/// z_i theta_j. Extraction is aligned against the base ordering so the
/// finite differences stay on one branch.
pub fn verify_duality(pt: &DarbouxPoint, q0: C64, h_rel: f64) -> Result<Residuals> {
    let n = pt.n();
    let extract = |p: &DarbouxPoint, reference: Option<&[C64]>| -> Result<(Vec<C64>, Vec<C64>)> {
        let d = build_tadpole_point(p, q0)?;
        let (dp, _) = dual_chart_extract(&d, q0)?;
        match reference {
            None => Ok((dp.pos, dp.mom)),
            Some(r) => {
                let assign = min_displacement_assignment(r, &dp.pos);
                Ok((
                    assign.iter().map(|&i| dp.pos[i]).collect(),
                    assign.iter().map(|&i| dp.mom[i]).collect(),
                ))
            }
        }
    };
    let (z0, th0) = extract(pt, None)?;

    // gradients of every z_i, theta_i in one sweep per perturbation
    let grad_at = |h_rel: f64| -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
        let mut gz = vec![vec![C64::new(0.0, 0.0); 2 * n]; n];
        let mut gth = vec![vec![C64::new(0.0, 0.0); 2 * n]; n];
        for coord in 0..2 * n {
            let scale = if coord < n { pt.x[coord].norm() } else { pt.sigma[coord - n].norm() };
            let h = h_rel * scale.max(1e-8);
            let (zp, tp) = extract(&perturbed(pt, coord, h)?, Some(&z0))?;
            let (zm, tm) = extract(&perturbed(pt, coord, -h)?, Some(&z0))?;
            for i in 0..n {
                gz[i][coord] = (zp[i] - zm[i]) / (2.0 * h);
                gth[i][coord] = (tp[i] - tm[i]) / (2.0 * h);
            }
        }
        Ok((gz, gth))
    };
    let (gz1, gth1) = grad_at(h_rel)?;
    let (gz2, gth2) = grad_at(h_rel / 2.0)?;
    let richardson = |a: &[Vec<C64>], b: &[Vec<C64>], i: usize, j: usize, other_a: &[Vec<C64>], other_b: &[Vec<C64>]| {
        let c1 = bracket_from_gradients(pt, &a[i], &other_a[j]);
        let c2 = bracket_from_gradients(pt, &b[i], &other_b[j]);
        (c2 * 4.0 - c1) / 3.0
    };
    let mut res = Residuals::default();
    for i in 0..n {
        for j in 0..n {
            if i < j {
                let bzz = richardson(&gz1, &gz2, i, j, &gz1, &gz2);
                res.push(
                    format!("{{z_{i},z_{j}}}"),
                    bzz.norm() / (1.0 + z0[i].norm() * z0[j].norm()),
                    1.0,
                );
                let btt = richardson(&gth1, &gth2, i, j, &gth1, &gth2);
                res.push(
                    format!("{{theta_{i},theta_{j}}}"),
                    btt.norm() / (1.0 + th0[i].norm() * th0[j].norm()),
                    1.0,
                );
            }
            let bzt = richardson(&gz1, &gz2, i, j, &gth1, &gth2);
            let expect = if i == j { -z0[i] * th0[j] } else { C64::new(0.0, 0.0) };
            res.push(
                format!("{{z_{i},theta_{j}}}"),
                (bzt - expect).norm() / (1.0 + z0[i].norm() * th0[j].norm()),
                1.0,
            );
        }
    }
    Ok(res)
}
