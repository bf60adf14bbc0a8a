//! The four commuting families evaluated on representation data (as traces
//! of powers of the total-space operators) and in the log-canonical and dual
//! coordinates, together with the constants relating the two.

use crate::darboux::{cauchy_b, DarbouxPoint, DualPoint};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quiver::{Point, QuiverParams};

/// The commuting families: E = tr X^{jm}, F = tr (1+XY)^j,
/// G = tr (Y + X^{-1})^{jm}, H = tr Y^{jm}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    E,
    F,
    G,
    H,
}

fn pow_i(m: &CMatrix, j: i64) -> Result<CMatrix> {
    if j >= 0 {
        m.pow(j as usize)
    } else {
        m.inverse()?.pow((-j) as usize)
    }
}

/// Trace of the indicated family member on a representation point.
pub fn ham_trace(point: &Point, family: Family, j: i64) -> Result<C64> {
    let m = point.m();
    match family {
        Family::E => {
            if j < 1 {
                return Err(Error::InvalidInput("E family requires j >= 1".into()));
            }
            Ok(point.big_x().pow(j as usize * m)?.trace())
        }
        Family::F => {
            let x = point.big_x();
            let y = point.big_y()?;
            let one_xy = &CMatrix::identity(x.rows()) + &(&x * &y);
            Ok(pow_i(&one_xy, j)?.trace())
        }
        Family::G => {
            let z = point.big_z()?;
            Ok(pow_i(&z.pow(m)?, j)?.trace())
        }
        Family::H => {
            if j < 1 {
                return Err(Error::InvalidInput("H family requires j >= 1".into()));
            }
            Ok(point.big_y()?.pow(j as usize * m)?.trace())
        }
    }
}

/// Constant relating ham_trace on a lifted point to the (A, B) reductions:
/// E: m tr A^j, F: sum_s t_s^j tr B^j (returned as that sum),
/// G and H: m (t_0...t_{m-1})^j times tr (A^{-1}B^m)^j resp. tr (A^{-1}P(B))^j.
pub fn reduction_constant(family: Family, p: &QuiverParams, j: i64) -> C64 {
    let m = p.m();
    let t_prod: C64 = (0..m).map(|s| p.t_s(s)).product();
    match family {
        Family::E => C64::new(m as f64, 0.0),
        Family::F => (0..m).map(|s| p.t_s(s).powi(j as i32)).sum(),
        Family::G | Family::H => t_prod.powi(j as i32) * m as f64,
    }
}

/// Upsilon_ij = (1 - t x_i/x_j)/(1 - x_i/x_j) products, one per index.
fn upsilon_products(pt: &DarbouxPoint) -> Vec<C64> {
    let n = pt.n();
    let one = C64::new(1.0, 0.0);
    (0..n)
        .map(|i| {
            let mut p = one;
            for a in 0..n {
                if a != i {
                    let r = pt.x[i] / pt.x[a];
                    p *= (one - pt.t * r) / (one - r);
                }
            }
            p
        })
        .collect()
}

/// The coordinate form of tr(A^{-1} B^m): a sum over index tuples
/// (j_0, ..., j_{m-1}) with the cyclic convention j_m = j_0. For m = 0 this
/// degenerates to sum_i x_i^{-1}.
pub fn coord_g(pt: &DarbouxPoint, m: usize) -> Result<C64> {
    let n = pt.n();
    let one = C64::new(1.0, 0.0);
    if m == 0 {
        return Ok(pt.x.iter().map(|x| x.inv()).sum());
    }
    let ups = upsilon_products(pt);
    let t = pt.t;
    let mut total = C64::new(0.0, 0.0);
    let mut tuple = vec![0usize; m];
    loop {
        let mut term = pt.x[tuple[0]].inv();
        for s in 0..m {
            let js = tuple[s];
            let jn = tuple[(s + 1) % m];
            term *= pt.sigma[js] * (t - one) / (t - pt.x[js] / pt.x[jn]);
            term *= ups[js];
        }
        total += term;
        // advance the tuple odometer
        let mut pos = 0;
        loop {
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
            if pos == m {
                return Ok(total);
            }
        }
    }
}

/// The two-line closed form of the quadratic Hamiltonian, coded separately
/// from [`coord_g`] as an independent route to the same value.
pub fn coord_g2_explicit(pt: &DarbouxPoint) -> Result<C64> {
    let n = pt.n();
    let one = C64::new(1.0, 0.0);
    let t = pt.t;
    let ups = |i: usize, j: usize| {
        let r = pt.x[i] / pt.x[j];
        (one - t * r) / (one - r)
    };
    let mut total = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut term = pt.sigma[i] * pt.sigma[i] * pt.x[i].inv();
        for a in 0..n {
            if a != i {
                let u = ups(i, a);
                term *= u * u;
            }
        }
        total += term;
    }
    for i in 0..n {
        for j in i + 1..n {
            let rij = pt.x[i] / pt.x[j];
            let rji = pt.x[j] / pt.x[i];
            let mut term = pt.sigma[i] * pt.sigma[j] * (t - one) * (t - one)
                * (pt.x[i].inv() + pt.x[j].inv())
                / ((one - rij) * (one - rji));
            for a in 0..n {
                if a != i && a != j {
                    term *= ups(i, a) * ups(j, a);
                }
            }
            total += term;
        }
    }
    Ok(total)
}

/// The cubic Hamiltonian in closed form (single, double and triple index
/// patterns), again an independent coding of [`coord_g`] at m = 3.
pub fn coord_g3_explicit(pt: &DarbouxPoint) -> Result<C64> {
    let n = pt.n();
    let one = C64::new(1.0, 0.0);
    let t = pt.t;
    let ups = |i: usize, j: usize| {
        let r = pt.x[i] / pt.x[j];
        (one - t * r) / (one - r)
    };
    let ups_prod = upsilon_products(pt);
    let tm1 = t - one;
    let mut total = C64::new(0.0, 0.0);
    for i in 0..n {
        total += pt.sigma[i].powu(3) * pt.x[i].inv() * ups_prod[i].powu(3);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let term = pt.sigma[i] * pt.sigma[j] * pt.sigma[j]
                * tm1 * tm1
                * (pt.x[i].inv() + pt.x[j].inv() * 2.0)
                / ((t - pt.x[i] / pt.x[j]) * (t - pt.x[j] / pt.x[i]))
                * ups_prod[i]
                * ups_prod[j].powu(2);
            total += term;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let term = pt.sigma[i] * pt.sigma[j] * pt.sigma[k]
                    * tm1.powu(3)
                    * pt.x[i].inv()
                    / ((t - pt.x[i] / pt.x[j]) * (t - pt.x[j] / pt.x[k]) * (t - pt.x[k] / pt.x[i]))
                    * ups_prod[i]
                    * ups_prod[j]
                    * ups_prod[k];
                total += term;
            }
        }
    }
    Ok(total)
}

/// Elementary symmetric polynomials e_0..e_k of the given values.
fn elementary_symmetric(values: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); values.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (count, &v) in values.iter().enumerate() {
        for k in (1..=count + 1).rev() {
            let add = e[k - 1] * v;
            e[k] += add;
        }
    }
    e
}

/// Normalised coordinate form of tr(A^{-1} prod_s (B - t_s^{-1})): the
/// expansion in elementary symmetric polynomials of the inverse partial
/// products,
/// H = sum_{l=0..m} (-1)^{m-l} e_{m-l}(t_0^{-1}, ..., t_{m-1}^{-1}) G_l.
pub fn coord_h(pt: &DarbouxPoint, p: &QuiverParams) -> Result<C64> {
    if (pt.t - p.t()).norm() > 1e-12 * p.t().norm().max(1.0) {
        return Err(Error::InvalidInput("chart parameter differs from t".into()));
    }
    let m = p.m();
    let inv_ts: Vec<C64> = (0..m).map(|s| p.t_s(s).inv()).collect();
    let e = elementary_symmetric(&inv_ts);
    let mut total = C64::new(0.0, 0.0);
    for l in 0..=m {
        let sign = if (m - l) % 2 == 0 { 1.0 } else { -1.0 };
        total += e[m - l] * sign * coord_g(pt, l)?;
    }
    Ok(total)
}

/// The three dual-chart Hamiltonians at a point (w, u):
/// E1 = sum_i u_i prod_{j != i} (1 - t^{-1} w_i/w_j)/(1 - w_i/w_j),
/// F_j = sum_i w_i^j (j = 1..=3),
/// H1 = sum_i u_i^{-1} prod_{j != i} (1 - t w_i/w_j)/(1 - w_i/w_j)
///        prod_{k < m} (w_i - t_k^{-1}).
#[derive(Debug, Clone)]
pub struct DualHams {
    pub e1: C64,
    pub f: Vec<C64>,
    pub h1: C64,
}

pub fn dual_coord_hams(dp: &DualPoint, p: &QuiverParams, m: usize) -> Result<DualHams> {
    if m > p.m() {
        return Err(Error::InvalidInput("m exceeds the parameter count".into()));
    }
    let n = dp.n();
    let one = C64::new(1.0, 0.0);
    let t = p.t();
    let tinv = t.inv();
    let mut e1 = C64::new(0.0, 0.0);
    let mut h1 = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut pe = dp.mom[i];
        let mut ph = dp.mom[i].inv();
        for j in 0..n {
            if j != i {
                let r = dp.pos[i] / dp.pos[j];
                pe *= (one - tinv * r) / (one - r);
                ph *= (one - t * r) / (one - r);
            }
        }
        for k in 0..m {
            ph *= dp.pos[i] - p.t_s(k).inv();
        }
        e1 += pe;
        h1 += ph;
    }
    let f = (1..=3)
        .map(|j| dp.pos.iter().map(|w| w.powu(j)).sum())
        .collect();
    Ok(DualHams { e1, f, h1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::build_cyclic_point;
    use crate::linalg::cr;
    use crate::quiver::{xi_lift, TadpoleData};
    use crate::sampling;

    #[test]
    fn scalar_tadpole_family_values() {
        // n = 1 tadpole with X = 2, Y = 2.5: F1 = 6, E1 = 2, H1 = 2.5, G1 = 3
        let d = TadpoleData::new(
            CMatrix::diag(&[cr(2.0)]),
            CMatrix::diag(&[cr(2.5)]),
            CMatrix::col_vec(&[cr(2.0)]),
            CMatrix::row_vec(&[cr(2.0)]),
        )
        .unwrap();
        let p = Point::Tadpole(d);
        assert!((ham_trace(&p, Family::F, 1).unwrap() - cr(6.0)).norm() < 1e-14);
        assert!((ham_trace(&p, Family::E, 1).unwrap() - cr(2.0)).norm() < 1e-14);
        assert!((ham_trace(&p, Family::H, 1).unwrap() - cr(2.5)).norm() < 1e-14);
        assert!((ham_trace(&p, Family::G, 1).unwrap() - cr(3.0)).norm() < 1e-14);
    }

    #[test]
    fn lifted_point_reductions() {
        // on xi_lift(A, B) points the families reduce to (A, B) traces with
        // the documented constants
        let mut rng = sampling::test_rng(97);
        for m in [2usize, 3] {
            let n = 3;
            let p = sampling::random_regular_params(&mut rng, m, n);
            let a = sampling::random_invertible(&mut rng, n);
            // B built from a chart so the rank-one condition holds
            let pt = sampling::random_darboux_point(&mut rng, n, p.t());
            let a = {
                let _ = a;
                CMatrix::diag(&pt.x)
            };
            let b = cauchy_b(&pt);
            let d = Point::Cyclic(xi_lift(&a, &b, &p).unwrap());
            for j in 1..=2i64 {
                let e = ham_trace(&d, Family::E, j).unwrap();
                let expect = a.pow(j as usize).unwrap().trace() * reduction_constant(Family::E, &p, j);
                assert!((e - expect).norm() <= 1e-12 * expect.norm().max(1.0), "E j={j}");

                let f = ham_trace(&d, Family::F, j).unwrap();
                let expect = b.pow(j as usize).unwrap().trace() * reduction_constant(Family::F, &p, j);
                assert!((f - expect).norm() <= 1e-11 * expect.norm().max(1.0), "F j={j}");

                let g = ham_trace(&d, Family::G, j).unwrap();
                let core = &a.inverse().unwrap() * &b.pow(m).unwrap();
                let expect = core.pow(j as usize).unwrap().trace()
                    * reduction_constant(Family::G, &p, j);
                assert!((g - expect).norm() <= 1e-10 * expect.norm().max(1.0), "G j={j}");

                let h = ham_trace(&d, Family::H, j).unwrap();
                let mut poly = CMatrix::identity(n);
                for s in 0..m {
                    let shifted = &b - &CMatrix::identity(n).scale(p.t_s(s).inv());
                    poly = &poly * &shifted;
                }
                let core = &a.inverse().unwrap() * &poly;
                let expect = core.pow(j as usize).unwrap().trace()
                    * reduction_constant(Family::H, &p, j);
                assert!((h - expect).norm() <= 1e-10 * expect.norm().max(1.0), "H j={j}");
            }
        }
    }

    #[test]
    fn coord_g_degenerate_and_scalar() {
        // m = 0: sum of inverse positions
        let pt = DarbouxPoint::new(vec![cr(1.0), cr(3.0)], vec![cr(1.0), cr(1.0)], cr(2.0)).unwrap();
        let g0 = coord_g(&pt, 0).unwrap();
        assert!((g0 - cr(4.0 / 3.0)).norm() < 1e-14);
        // m = 1, n = 1: sigma/x
        let pt1 = DarbouxPoint::new(vec![cr(2.0)], vec![cr(3.0)], cr(5.0)).unwrap();
        assert!((coord_g(&pt1, 1).unwrap() - cr(1.5)).norm() < 1e-14);
    }

    #[test]
    fn coord_g_matches_matrix_trace() {
        let mut rng = sampling::test_rng(101);
        for _ in 0..10 {
            let t = sampling::random_annulus(&mut rng, 0.6, 1.5);
            let n = 4;
            let pt = sampling::random_darboux_point(&mut rng, n, t);
            let a = CMatrix::diag(&pt.x);
            let b = cauchy_b(&pt);
            let a_inv = a.inverse().unwrap();
            for m in 0..=3usize {
                let lhs = coord_g(&pt, m).unwrap();
                let rhs = (&a_inv * &b.pow(m).unwrap()).trace();
                assert!(
                    (lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0),
                    "m={m}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn explicit_quadratic_and_cubic_forms_agree() {
        let mut rng = sampling::test_rng(103);
        for _ in 0..10 {
            let t = sampling::random_annulus(&mut rng, 0.6, 1.5);
            let pt = sampling::random_darboux_point(&mut rng, 4, t);
            let g2a = coord_g(&pt, 2).unwrap();
            let g2b = coord_g2_explicit(&pt).unwrap();
            assert!((g2a - g2b).norm() <= 1e-12 * g2a.norm().max(1.0), "{g2a} vs {g2b}");
            let g3a = coord_g(&pt, 3).unwrap();
            let g3b = coord_g3_explicit(&pt).unwrap();
            assert!((g3a - g3b).norm() <= 1e-12 * g3a.norm().max(1.0), "{g3a} vs {g3b}");
        }
    }

    #[test]
    fn coord_h_quadratic_combination() {
        // m = 2: H = G_2 - (t0^{-1} + t1^{-1}) G_1 + (t0 t1)^{-1} G_0
        let mut rng = sampling::test_rng(107);
        let p = sampling::random_regular_params(&mut rng, 2, 3);
        let pt = sampling::random_darboux_point(&mut rng, 3, p.t());
        let lhs = coord_h(&pt, &p).unwrap();
        let t0 = p.t_s(0);
        let t1 = p.t_s(1);
        let rhs = coord_g(&pt, 2).unwrap() - (t0.inv() + t1.inv()) * coord_g(&pt, 1).unwrap()
            + (t0 * t1).inv() * coord_g(&pt, 0).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn coord_h_matches_trace_normalised() {
        let mut rng = sampling::test_rng(109);
        for m in [2usize, 3, 4] {
            let n = 3;
            let p = sampling::random_regular_params(&mut rng, m, n);
            let pt = sampling::random_darboux_point(&mut rng, n, p.t());
            let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
            let raw = ham_trace(&d, Family::H, 1).unwrap();
            let normalised = raw / reduction_constant(Family::H, &p, 1);
            let coord = coord_h(&pt, &p).unwrap();
            assert!(
                (normalised - coord).norm() <= 1e-10 * coord.norm().max(1.0),
                "m={m}: {normalised} vs {coord}"
            );
        }
    }

    #[test]
    fn coord_h_large_t_limit_is_coord_g() {
        // as the partial products grow, H approaches G_m
        let x = vec![cr(1.0), cr(3.1)];
        let sigma = vec![cr(0.8), cr(1.3)];
        let q0 = cr(4.0e4);
        let q1 = cr(2.5e4);
        let p = QuiverParams::new(2, 2, vec![q0, q1]).unwrap();
        let pt = DarbouxPoint::new(x, sigma, p.t()).unwrap();
        let h = coord_h(&pt, &p).unwrap();
        let g = coord_g(&pt, 2).unwrap();
        assert!((h - g).norm() <= 2e-4 * g.norm(), "{h} vs {g}");
    }

    #[test]
    fn dual_hams_scalar() {
        // n = 1: E = u, F_j = w^j, H = prod_k (w - t_k^{-1}) / u
        let p = QuiverParams::new(2, 1, vec![cr(2.0), cr(3.0)]).unwrap();
        let dp = DualPoint::new(vec![cr(1.7)], vec![cr(0.6)], p.t()).unwrap();
        let h = dual_coord_hams(&dp, &p, 2).unwrap();
        assert!((h.e1 - cr(0.6)).norm() < 1e-14);
        assert!((h.f[1] - cr(1.7 * 1.7)).norm() < 1e-14);
        let expect = (cr(1.7) - cr(0.5)) * (cr(1.7) - cr(1.0 / 6.0)) / cr(0.6);
        assert!((h.h1 - expect).norm() < 1e-14);
    }

    #[test]
    fn dual_hams_match_matrix_traces() {
        let mut rng = sampling::test_rng(113);
        let m = 2;
        let n = 2;
        let p = sampling::random_regular_params(&mut rng, m, n);
        let t = p.t();
        // dual chart point: positions w regular for t^{-1}
        let base = sampling::random_darboux_point(&mut rng, n, t.inv());
        let dp = DualPoint::new(base.x.clone(), base.sigma.clone(), t).unwrap();
        let hams = dual_coord_hams(&dp, &p, m).unwrap();
        // A from the Cauchy form with inverse parameter, B diagonal
        let a = cauchy_b(&base);
        let b = CMatrix::diag(&dp.pos);
        let d = Point::Cyclic(xi_lift(&a, &b, &p).unwrap());
        let e_mat = ham_trace(&d, Family::E, 1).unwrap() / reduction_constant(Family::E, &p, 1);
        assert!((e_mat - hams.e1).norm() <= 1e-9 * hams.e1.norm().max(1.0));
        let h_mat = ham_trace(&d, Family::H, 1).unwrap() / reduction_constant(Family::H, &p, 1);
        assert!((h_mat - hams.h1).norm() <= 1e-9 * hams.h1.norm().max(1.0));
        let f_mat = ham_trace(&d, Family::F, 2).unwrap() / reduction_constant(Family::F, &p, 2);
        assert!((f_mat - hams.f[1]).norm() <= 1e-9 * hams.f[1].norm().max(1.0));
    }

    #[test]
    fn dual_hams_empty_product() {
        let p = QuiverParams::new(2, 2, vec![cr(2.0), cr(3.0)]).unwrap();
        let dp = DualPoint::new(vec![cr(1.0), cr(2.3)], vec![cr(0.5), cr(1.1)], p.t()).unwrap();
        let h = dual_coord_hams(&dp, &p, 0).unwrap();
        // m = 0: H = sum_i u_i^{-1} prod_{j != i} (...) with no polynomial factor
        let one = cr(1.0);
        let mut expect = C64::new(0.0, 0.0);
        for i in 0..2 {
            let mut term = dp.mom[i].inv();
            for j in 0..2 {
                if j != i {
                    let r = dp.pos[i] / dp.pos[j];
                    term *= (one - p.t() * r) / (one - r);
                }
            }
            expect += term;
        }
        assert!((h.h1 - expect).norm() < 1e-14);
    }

    #[test]
    fn gauge_invariance_of_family_values() {
        let mut rng = sampling::test_rng(127);
        let p = sampling::random_regular_params(&mut rng, 2, 3);
        let pt = sampling::random_darboux_point(&mut rng, 3, p.t());
        let d = build_cyclic_point(&pt, &p).unwrap();
        let gs: Vec<CMatrix> = (0..2).map(|_| sampling::random_invertible(&mut rng, 3)).collect();
        let dg = d.gauge_transform(&gs).unwrap();
        for fam in [Family::E, Family::F, Family::G, Family::H] {
            let a = ham_trace(&Point::Cyclic(d.clone()), fam, 1).unwrap();
            let b = ham_trace(&Point::Cyclic(dg.clone()), fam, 1).unwrap();
            assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "{fam:?}: {a} vs {b}");
        }
    }

    #[test]
    fn coord_g_permutation_symmetry() {
        let mut rng = sampling::test_rng(131);
        let t = sampling::random_annulus(&mut rng, 0.7, 1.4);
        let pt = sampling::random_darboux_point(&mut rng, 4, t);
        let perm = vec![3usize, 0, 2, 1];
        let pt2 = pt.permuted(&perm).unwrap();
        for m in 1..=3usize {
            let a = coord_g(&pt, m).unwrap();
            let b = coord_g(&pt2, m).unwrap();
            assert!((a - b).norm() <= 1e-11 * a.norm().max(1.0));
        }
    }
}
