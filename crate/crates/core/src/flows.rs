//! Closed-form integration of the commuting flows. The degree-k flow of the
//! H family moves X by X(t) = e^{-tY^k} X(0) + Y^{-1}(e^{-tY^k} - 1) with Y,
//! V, W frozen; the G family moves X by X(t) = e^{-tZ^k} X(0) with Z frozen.
//! Every snapshot is evaluated from the initial point, never by stepping.

use crate::error::{Error, Result};
use crate::hamiltonians::{ham_trace, Family};
use crate::linalg::{mat_exp, mat_phi, phi1, CMatrix, Tolerance, C64};
use crate::quiver::{CyclicData, Point, QuiverParams, TadpoleData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowFamily {
    H,
    G,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowSpec {
    pub family: FlowFamily,
    pub k: usize,
}

fn check_multiple(k: usize, m: usize) -> Result<()> {
    if k == 0 || k % m != 0 {
        return Err(Error::BadMultiple { k, m });
    }
    Ok(())
}

/// Rebuild a point from a new big X, keeping Y (hence Z for the cyclic case)
/// and the framing fixed.
fn with_new_x(point: &Point, new_big_x: &CMatrix) -> Result<Point> {
    match point {
        Point::Tadpole(d) => Ok(Point::Tadpole(TadpoleData::new(
            new_big_x.clone(),
            d.y.clone(),
            d.v.clone(),
            d.w.clone(),
        )?)),
        Point::Cyclic(d) => {
            let (m, n) = (d.m(), d.n());
            let mut xs = Vec::with_capacity(m);
            let mut zs = Vec::with_capacity(m);
            for s in 0..m {
                let xb = new_big_x.get_block(s * n, ((s + 1) % m) * n, n, n);
                let xb_inv = xb
                    .inverse()
                    .map_err(|_| Error::SingularMatrix(format!("X_{} left the chart", s)))?;
                let z = &d.y_s(s)? + &xb_inv;
                xs.push(xb);
                zs.push(z);
            }
            Ok(Point::Cyclic(CyclicData::new(xs, zs, d.v.clone(), d.w.clone())?))
        }
    }
}

/// Degree-k flow of the H family for time t.
pub fn flow_h(point: &Point, k: usize, t: C64) -> Result<Point> {
    check_multiple(k, point.m())?;
    let y = point.big_y()?;
    let x = point.big_x();
    let e = mat_exp(&y.pow(k)?.scale(-t))?;
    let new_x = &(&e * &x) + &mat_phi(&y, k, t)?;
    with_new_x(point, &new_x)
}

/// Degree-k flow of the G family for time t. Requires X(0) invertible; X
/// then stays invertible for all times.
pub fn flow_g(point: &Point, k: usize, t: C64) -> Result<Point> {
    check_multiple(k, point.m())?;
    let z = point.big_z()?;
    let x = point.big_x();
    x.inverse()
        .map_err(|_| Error::SingularMatrix("G flow requires invertible X".into()))?;
    let e = mat_exp(&z.pow(k)?.scale(-t))?;
    let new_x = &e * &x;
    with_new_x(point, &new_x)
}

/// Superposition of flows: coefficients map degree k -> time t_k. All the
/// degrees must be multiples of m; the combined move uses
/// X -> e^{P} X + Q(Y) phi1(P) with P = -sum t_k Y^k and Q = -sum t_k Y^{k-1}
/// for the H family, and X -> e^{P(Z)} X for the G family.
pub fn flow_multi(point: &Point, coefficients: &[(usize, C64)], family: FlowFamily) -> Result<Point> {
    let m = point.m();
    for &(k, _) in coefficients {
        check_multiple(k, m)?;
    }
    if coefficients.is_empty() {
        return Ok(point.clone());
    }
    let x = point.big_x();
    let dim = x.rows();
    match family {
        FlowFamily::H => {
            let y = point.big_y()?;
            let mut p = CMatrix::zeros(dim, dim);
            let mut q = CMatrix::zeros(dim, dim);
            for &(k, t) in coefficients {
                p = &p - &y.pow(k)?.scale(t);
                q = &q - &y.pow(k - 1)?.scale(t);
            }
            let e = mat_exp(&p)?;
            let new_x = &(&e * &x) + &(&q * &phi1(&p)?);
            with_new_x(point, &new_x)
        }
        FlowFamily::G => {
            let z = point.big_z()?;
            let mut p = CMatrix::zeros(dim, dim);
            for &(k, t) in coefficients {
                p = &p - &z.pow(k)?.scale(t);
            }
            let e = mat_exp(&p)?;
            with_new_x(point, &(&e * &x))
        }
    }
}

/// Max-norm residual of the H-family vector field at step h:
/// ||(X(h) - X(0))/h + Y^{k-1} + Y^k X(0)||, expected O(h).
pub fn ode_residual(point: &Point, k: usize, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let x0 = point.big_x();
    let moved = flow_h(point, k, C64::new(h, 0.0))?;
    let xh = moved.big_x();
    let y = point.big_y()?;
    let diff = (&xh - &x0).scale(C64::new(1.0 / h, 0.0));
    let field = &y.pow(k - 1)? + &(&y.pow(k)? * &x0);
    Ok((&diff + &field).norm_max())
}

/// Gauge-invariant particle positions: the spectrum of X for the tadpole and
/// of the cycle monodromy X_0 ... X_{m-1} for cyclic data.
pub fn positions(point: &Point) -> Result<Vec<C64>> {
    let mat = match point {
        Point::Tadpole(d) => d.x.clone(),
        Point::Cyclic(d) => d.cycle_product_x(),
    };
    Ok(mat.eig()?.sorted_lex().values)
}

/// Permutation of `next` minimising total displacement to `prev`
/// (exhaustive for n <= 8, greedy beyond), with a lexicographic tie-break.
pub fn min_displacement_assignment(prev: &[C64], next: &[C64]) -> Vec<usize> {
    let n = prev.len();
    assert_eq!(n, next.len());
    if n <= 8 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permute_search(&mut perm, 0, prev, next, &mut best);
        best.map(|(_, p)| p).unwrap_or_else(|| (0..n).collect())
    } else {
        let mut taken = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for &p in prev {
            let mut bi = usize::MAX;
            let mut bd = f64::INFINITY;
            for (i, &q) in next.iter().enumerate() {
                if !taken[i] {
                    let d = (p - q).norm();
                    if d < bd {
                        bd = d;
                        bi = i;
                    }
                }
            }
            taken[bi] = true;
            out.push(bi);
        }
        out
    }
}

fn permute_search(
    perm: &mut Vec<usize>,
    depth: usize,
    prev: &[C64],
    next: &[C64],
    best: &mut Option<(f64, Vec<usize>)>,
) {
    let n = perm.len();
    if depth == n {
        let cost: f64 = (0..n).map(|i| (prev[i] - next[perm[i]]).norm()).sum();
        let better = match best {
            None => true,
            Some((c, p)) => cost < *c - 1e-15 || (cost < *c + 1e-15 && perm < p),
        };
        if better {
            *best = Some((cost, perm.clone()));
        }
        return;
    }
    for i in depth..n {
        perm.swap(depth, i);
        permute_search(perm, depth + 1, prev, next, best);
        perm.swap(depth, i);
    }
}

/// A sampled flow: snapshots, tracked eigenvalue curves and conserved values.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// positions[ti][curve]: curve-tracked spectrum along the flow.
    pub positions: Vec<Vec<C64>>,
    /// conserved[ti][idx]: one value per configured (family, j) pair.
    pub conserved: Vec<Vec<C64>>,
    pub moment_residuals: Vec<f64>,
    /// Grid indices where two tracked curves came within 1e-10 of each other.
    pub ambiguous_times: Vec<usize>,
}

/// Evaluate the flow at every grid time from the initial point and track the
/// particle curves between consecutive times.
pub fn trajectory(
    point: &Point,
    params: &QuiverParams,
    spec: FlowSpec,
    grid: &[f64],
    conserved: &[(Family, i64)],
) -> Result<Trajectory> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be monotone".into()));
    }
    let tol = Tolerance::default();
    let mut out = Trajectory {
        times: grid.to_vec(),
        points: Vec::with_capacity(grid.len()),
        positions: Vec::with_capacity(grid.len()),
        conserved: Vec::with_capacity(grid.len()),
        moment_residuals: Vec::with_capacity(grid.len()),
        ambiguous_times: Vec::new(),
    };
    let mut prev_pos: Option<Vec<C64>> = None;
    for (ti, &time) in grid.iter().enumerate() {
        let snap = match spec.family {
            FlowFamily::H => flow_h(point, spec.k, C64::new(time, 0.0))?,
            FlowFamily::G => flow_g(point, spec.k, C64::new(time, 0.0))?,
        };
        let raw = positions(&snap)?;
        let tracked = match &prev_pos {
            None => raw,
            Some(prev) => {
                let assign = min_displacement_assignment(prev, &raw);
                assign.iter().map(|&i| raw[i]).collect()
            }
        };
        let n = tracked.len();
        'amb: for i in 0..n {
            for j in i + 1..n {
                if (tracked[i] - tracked[j]).norm() < 1e-10 {
                    out.ambiguous_times.push(ti);
                    break 'amb;
                }
            }
        }
        let values: Vec<C64> = conserved
            .iter()
            .map(|&(fam, j)| ham_trace(&snap, fam, j))
            .collect::<Result<_>>()?;
        let resid = snap.moment_residuals(params, &tol)?.max_residual();
        prev_pos = Some(tracked.clone());
        out.points.push(snap);
        out.positions.push(tracked);
        out.conserved.push(values);
        out.moment_residuals.push(resid);
    }
    Ok(out)
}

impl Trajectory {
    /// CSV with columns time, re(pos_1), im(pos_1), ..., re(c_1), im(c_1), ...
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let npos = self.positions.first().map_or(0, |p| p.len());
        let ncons = self.conserved.first().map_or(0, |c| c.len());
        s.push_str("time");
        for i in 1..=npos {
            s.push_str(&format!(",re_pos_{i},im_pos_{i}"));
        }
        for i in 1..=ncons {
            s.push_str(&format!(",re_h_{i},im_h_{i}"));
        }
        s.push('\n');
        for ti in 0..self.times.len() {
            s.push_str(&format!("{:.16e}", self.times[ti]));
            for z in &self.positions[ti] {
                s.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
            }
            for z in &self.conserved[ti] {
                s.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{build_cyclic_point, build_tadpole_point};
    use crate::linalg::cr;
    use crate::quiver::TadpoleData;
    use crate::sampling;

    fn tadpole_with_y(y: CMatrix) -> Point {
        let n = y.rows();
        Point::Tadpole(
            TadpoleData::new(
                CMatrix::from_fn(n, n, |i, j| cr(0.3 + (i + 2 * j) as f64 * 0.21)),
                y,
                CMatrix::col_vec(&vec![cr(0.4); n]),
                CMatrix::row_vec(&vec![cr(0.2); n]),
            )
            .unwrap(),
        )
    }

    #[test]
    fn zero_y_flows() {
        // Y = 0, k = 1 (m = 1): X(t) = X(0) - t Id; k >= 2: X(t) = X(0)
        let p0 = tadpole_with_y(CMatrix::zeros(3, 3));
        let t = cr(0.7);
        let moved = flow_h(&p0, 1, t).unwrap();
        let expect = &p0.big_x() - &CMatrix::identity(3).scale(t);
        assert!((&moved.big_x() - &expect).norm_max() < 1e-12);
        let still = flow_h(&p0, 2, t).unwrap();
        assert!((&still.big_x() - &p0.big_x()).norm_max() < 1e-12);
    }

    #[test]
    fn diagonal_y_scalar_formula() {
        // Y = diag(l_i): X(t)_ij = e^{-t l_i^k} X(0)_ij + delta_ij (e^{-t l_i^k} - 1)/l_i
        let lambda = [cr(0.8), cr(-1.1), cr(0.4)];
        let y = CMatrix::diag(&lambda);
        let p0 = tadpole_with_y(y);
        let k = 2;
        let t = cr(0.5);
        let moved = flow_h(&p0, k, t).unwrap();
        let x0 = p0.big_x();
        for i in 0..3 {
            let decay = (-t * lambda[i].powu(k as u32)).exp();
            for j in 0..3 {
                let mut expect = decay * x0[(i, j)];
                if i == j {
                    expect += (decay - 1.0) / lambda[i];
                }
                assert!((moved.big_x()[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn h_flow_conserves_h_family_and_moment() {
        let mut rng = sampling::test_rng(137);
        let p = sampling::random_regular_params(&mut rng, 2, 3);
        let pt = sampling::random_darboux_point(&mut rng, 3, p.t());
        let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
        let before: Vec<C64> = (1..=3)
            .map(|j| ham_trace(&d, Family::H, j).unwrap())
            .collect();
        let moved = flow_h(&d, 2, crate::linalg::c(0.4, 0.3)).unwrap();
        for (j, b) in (1..=3).zip(&before) {
            let a = ham_trace(&moved, Family::H, j).unwrap();
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "j={j}: {a} vs {b}");
        }
        let res = moved
            .moment_residuals(&p, &Tolerance::default())
            .unwrap()
            .max_residual();
        assert!(res <= 1e-8, "moment residual {res}");
    }

    #[test]
    fn g_flow_semigroup() {
        let mut rng = sampling::test_rng(139);
        let q0 = sampling::random_annulus(&mut rng, 0.7, 1.4);
        let pt = sampling::random_darboux_point(&mut rng, 3, q0);
        let d = Point::Tadpole(build_tadpole_point(&pt, q0).unwrap());
        let t1 = crate::linalg::c(0.3, -0.2);
        let t2 = crate::linalg::c(0.15, 0.4);
        let one_step = flow_g(&d, 1, t1 + t2).unwrap();
        let two_step = flow_g(&flow_g(&d, 1, t1).unwrap(), 1, t2).unwrap();
        let diff = (&one_step.big_x() - &two_step.big_x()).norm_max();
        assert!(diff <= 1e-9, "semigroup gap {diff}");
        // t = 0 is the identity
        let frozen = flow_g(&d, 1, cr(0.0)).unwrap();
        assert!((&frozen.big_x() - &d.big_x()).norm_max() < 1e-13);
    }

    #[test]
    fn scalar_g_flow() {
        // n = 1, m = 1: x(t) = e^{-t z^k} x(0), z constant
        let pt = crate::darboux::DarbouxPoint::new(vec![cr(2.0)], vec![cr(3.0)], cr(5.0)).unwrap();
        let d = Point::Tadpole(build_tadpole_point(&pt, cr(5.0)).unwrap());
        let z = d.big_z().unwrap()[(0, 0)];
        let t = cr(0.2);
        let moved = flow_g(&d, 1, t).unwrap();
        let expect = (-t * z).exp() * cr(2.0);
        assert!((moved.big_x()[(0, 0)] - expect).norm() < 1e-12);
        assert!((moved.big_z().unwrap()[(0, 0)] - z).norm() < 1e-12);
    }

    #[test]
    fn multi_flow_matches_composition_and_commutes() {
        let mut rng = sampling::test_rng(149);
        let p = sampling::random_regular_params(&mut rng, 2, 2);
        let pt = sampling::random_darboux_point(&mut rng, 2, p.t());
        let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
        let t1 = crate::linalg::c(0.3, 0.1);
        let t2 = crate::linalg::c(-0.2, 0.25);
        let multi = flow_multi(&d, &[(2, t1), (4, t2)], FlowFamily::H).unwrap();
        let ab = flow_h(&flow_h(&d, 2, t1).unwrap(), 4, t2).unwrap();
        let ba = flow_h(&flow_h(&d, 4, t2).unwrap(), 2, t1).unwrap();
        assert!((&multi.big_x() - &ab.big_x()).norm_max() <= 1e-9);
        assert!((&ab.big_x() - &ba.big_x()).norm_max() <= 1e-9);
        // single-entry map is flow_h; empty map is the identity
        let single = flow_multi(&d, &[(2, t1)], FlowFamily::H).unwrap();
        let direct = flow_h(&d, 2, t1).unwrap();
        assert!((&single.big_x() - &direct.big_x()).norm_max() <= 1e-10);
        let nothing = flow_multi(&d, &[], FlowFamily::H).unwrap();
        assert!((&nothing.big_x() - &d.big_x()).norm_max() == 0.0);
    }

    #[test]
    fn bad_multiple_rejected() {
        let mut rng = sampling::test_rng(151);
        let p = sampling::random_regular_params(&mut rng, 3, 1);
        let pt = sampling::random_darboux_point(&mut rng, 1, p.t());
        let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
        assert!(matches!(flow_h(&d, 2, cr(0.1)), Err(Error::BadMultiple { k: 2, m: 3 })));
    }

    #[test]
    fn ode_residual_first_order() {
        let mut rng = sampling::test_rng(157);
        let q0 = sampling::random_annulus(&mut rng, 0.7, 1.4);
        let pt = sampling::random_darboux_point(&mut rng, 3, q0);
        let d = Point::Tadpole(build_tadpole_point(&pt, q0).unwrap());
        let r1 = ode_residual(&d, 1, 1e-4).unwrap();
        let r2 = ode_residual(&d, 1, 5e-5).unwrap();
        let ratio = r1 / r2;
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
        // zero field for Y = 0, k >= 2
        let flat = tadpole_with_y(CMatrix::zeros(3, 3));
        assert!(ode_residual(&flat, 2, 1e-5).unwrap() < 1e-12);
    }

    #[test]
    fn invertibility_factor_transport() {
        // det(1 + Y X(t)) e^{t tr Y^k} = det(1 + Y X(0))
        let mut rng = sampling::test_rng(163);
        let p = sampling::random_regular_params(&mut rng, 2, 2);
        let pt = sampling::random_darboux_point(&mut rng, 2, p.t());
        let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
        let y = d.big_y().unwrap();
        let id = CMatrix::identity(4);
        let det0 = (&id + &(&y * &d.big_x())).det().unwrap();
        let t = crate::linalg::c(0.3, 0.2);
        let moved = flow_h(&d, 2, t).unwrap();
        let det_t = (&id + &(&y * &moved.big_x())).det().unwrap();
        let growth = (y.pow(2).unwrap().trace() * t).exp();
        assert!(
            (det_t * growth - det0).norm() <= 1e-8 * det0.norm().max(1.0),
            "{det_t} * {growth} vs {det0}"
        );
    }

    #[test]
    fn trajectory_conservation_and_tracking() {
        let mut rng = sampling::test_rng(167);
        let p = sampling::random_regular_params(&mut rng, 2, 4);
        let pt = sampling::random_darboux_point(&mut rng, 4, p.t());
        let d = Point::Cyclic(build_cyclic_point(&pt, &p).unwrap());
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.02).collect();
        let traj = trajectory(
            &d,
            &p,
            FlowSpec { family: FlowFamily::H, k: 2 },
            &grid,
            &[(Family::H, 1), (Family::H, 2)],
        )
        .unwrap();
        let first = &traj.conserved[0];
        for row in &traj.conserved {
            for (a, b) in row.iter().zip(first.iter()) {
                assert!((a - b).norm() <= 1e-8 * b.norm().max(1.0));
            }
        }
        for r in &traj.moment_residuals {
            assert!(*r <= 1e-8);
        }
        // constant grid of zeros leaves the positions constant
        let frozen = trajectory(
            &d,
            &p,
            FlowSpec { family: FlowFamily::H, k: 2 },
            &[0.0, 0.0, 0.0],
            &[],
        )
        .unwrap();
        for row in &frozen.positions {
            for (a, b) in row.iter().zip(frozen.positions[0].iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_has_expected_shape() {
        let mut rng = sampling::test_rng(173);
        let q0 = sampling::random_annulus(&mut rng, 0.7, 1.4);
        let pt = sampling::random_darboux_point(&mut rng, 2, q0);
        let d = Point::Tadpole(build_tadpole_point(&pt, q0).unwrap());
        let p = QuiverParams::tadpole(2, q0).unwrap();
        let traj = trajectory(
            &d,
            &p,
            FlowSpec { family: FlowFamily::G, k: 1 },
            &[0.0, 0.1, 0.2],
            &[(Family::G, 1)],
        )
        .unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "time,re_pos_1,im_pos_1,re_pos_2,im_pos_2,re_h_1,im_h_1");
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
