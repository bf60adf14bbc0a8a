//! q-difference operators quantising the commuting Hamiltonians: the
//! gauge-transformed twisted operator with double shifts, its deformation
//! with lower-order terms, and the first Macdonald-Ruijsenaars operator as a
//! reference. Coefficients are kept as inspectable expression trees (ratios
//! of binomial factors and monomials) so the q -> 1 symbol is an honest
//! evaluation, not a closure limit.

use crate::darboux::DarbouxPoint;
use crate::error::{Error, Result};
use crate::hamiltonians::coord_g;
use crate::linalg::C64;
use rand::Rng;

const POLE_TOL: f64 = 1e-10;

/// A multiplicative factor in a coefficient prefactor product.
#[derive(Debug, Clone, Copy)]
pub enum PrefFactor {
    /// q^k
    QPow(i32),
    /// q^{1/2} (principal branch)
    QHalf,
    /// t^k
    TPow(i32),
    /// (t - 1)
    TMinusOne,
    /// (t - q)
    TMinusQ,
    /// fixed complex constant
    Const(C64),
}

/// Binomial factor (1 - q^cq t^ct x_i / x_j).
#[derive(Debug, Clone, Copy)]
pub struct Binom {
    pub cq: i32,
    pub ct: i32,
    pub i: usize,
    pub j: usize,
}

/// One product term of a coefficient: prefactors, a monomial in x, and a
/// ratio of binomial products. Poles are exactly the denominator binomials.
#[derive(Debug, Clone)]
pub struct CoeffTerm {
    pub prefactors: Vec<PrefFactor>,
    pub x_powers: Vec<(usize, i32)>,
    /// optional symmetric half-power factor sqrt(x_i/x_j) + sqrt(x_j/x_i)
    pub half_sym: Option<(usize, usize)>,
    pub numer: Vec<Binom>,
    pub denom: Vec<Binom>,
}

impl CoeffTerm {
    fn new() -> Self {
        CoeffTerm {
            prefactors: Vec::new(),
            x_powers: Vec::new(),
            half_sym: None,
            numer: Vec::new(),
            denom: Vec::new(),
        }
    }

    pub fn eval(&self, x: &[C64], q: C64, t: C64) -> Result<C64> {
        let mut val = C64::new(1.0, 0.0);
        for pf in &self.prefactors {
            val *= match *pf {
                PrefFactor::QPow(k) => q.powi(k),
                PrefFactor::QHalf => q.sqrt(),
                PrefFactor::TPow(k) => t.powi(k),
                PrefFactor::TMinusOne => t - 1.0,
                PrefFactor::TMinusQ => t - q,
                PrefFactor::Const(c) => c,
            };
        }
        for &(i, e) in &self.x_powers {
            val *= x[i].powi(e);
        }
        if let Some((i, j)) = self.half_sym {
            let r = (x[i] / x[j]).sqrt();
            val *= r + r.inv();
        }
        for b in &self.numer {
            val *= C64::new(1.0, 0.0) - q.powi(b.cq) * t.powi(b.ct) * x[b.i] / x[b.j];
        }
        for b in &self.denom {
            let f = C64::new(1.0, 0.0) - q.powi(b.cq) * t.powi(b.ct) * x[b.i] / x[b.j];
            if f.norm() <= POLE_TOL {
                return Err(Error::PoleProximity(f.norm()));
            }
            val /= f;
        }
        Ok(val)
    }
}

/// One shift term: coefficient (a sum of [`CoeffTerm`]) times the shift
/// x_i -> q^{mu_i} x_i.
#[derive(Debug, Clone)]
pub struct OpTerm {
    pub shift: Vec<i32>,
    pub coeff: Vec<CoeffTerm>,
}

/// A difference operator sum_mu c_mu(x) f(q^mu . x) acting in multiplicative
/// shift form.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    pub n: usize,
    pub q: C64,
    pub t: C64,
    pub terms: Vec<OpTerm>,
}

impl DiffOperator {
    pub fn coeff_at(&self, term: usize, x: &[C64]) -> Result<C64> {
        self.terms[term]
            .coeff
            .iter()
            .try_fold(C64::new(0.0, 0.0), |acc, ct| Ok(acc + ct.eval(x, self.q, self.t)?))
    }
}

/// Test function with a caller-declared symmetry flag.
pub struct TestFunction {
    pub name: String,
    pub symmetric: bool,
    eval: Box<dyn Fn(&[C64]) -> C64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        symmetric: bool,
        eval: impl Fn(&[C64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction { name: name.into(), symmetric, eval: Box::new(eval) }
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        (self.eval)(x)
    }

    /// Power sum p_k = sum x_i^k.
    pub fn power_sum(k: u32) -> Self {
        Self::new(format!("p_{k}"), true, move |x| x.iter().map(|z| z.powu(k)).sum())
    }

    /// Elementary symmetric polynomial e_k.
    pub fn elementary(k: usize) -> Self {
        Self::new(format!("e_{k}"), true, move |x| {
            let mut e = vec![C64::new(0.0, 0.0); k + 1];
            e[0] = C64::new(1.0, 0.0);
            for &v in x {
                for idx in (1..=k).rev() {
                    let add = e[idx - 1] * v;
                    e[idx] += add;
                }
            }
            e[k]
        })
    }

    /// Spot-check the declared symmetry at a few random transpositions.
    pub fn spot_check_symmetry(&self, n: usize, rng: &mut impl Rng) -> bool {
        if !self.symmetric || n < 2 {
            return true;
        }
        for _ in 0..3 {
            let x: Vec<C64> = (0..n)
                .map(|_| crate::sampling::random_annulus(rng, 0.5, 1.5))
                .collect();
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            let mut y = x.clone();
            y.swap(a, b);
            let fx = self.eval(&x);
            let fy = self.eval(&y);
            if (fx - fy).norm() > 1e-9 * fx.norm().max(1.0) {
                return false;
            }
        }
        true
    }
}

/// Apply the operator: sum_mu c_mu(x) f(q^mu . x).
pub fn apply(d: &DiffOperator, f: &TestFunction, x: &[C64]) -> Result<C64> {
    if x.len() != d.n {
        return Err(Error::ShapeMismatch("point dimension mismatch".into()));
    }
    let mut total = C64::new(0.0, 0.0);
    for (idx, term) in d.terms.iter().enumerate() {
        let c = d.coeff_at(idx, x)?;
        let shifted: Vec<C64> = x
            .iter()
            .zip(&term.shift)
            .map(|(&xi, &mu)| xi * d.q.powi(mu))
            .collect();
        total += c * f.eval(&shifted);
    }
    Ok(total)
}

fn check_params(n: usize, q: C64, t: C64) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParameters("n must be positive".into()));
    }
    if q.norm() == 0.0 || t.norm() == 0.0 {
        return Err(Error::BadParameters("q and t must be nonzero".into()));
    }
    for k in 1..=(2 * n as i32 + 2) {
        if (q.powi(k) - 1.0).norm() < 1e-10 {
            return Err(Error::BadParameters(format!("q is a root of unity of order {k}")));
        }
    }
    Ok(())
}

fn unit_shift(n: usize, entries: &[(usize, i32)]) -> Vec<i32> {
    let mut mu = vec![0i32; n];
    for &(i, v) in entries {
        mu[i] += v;
    }
    mu
}

/// The gauge-transformed double-shift operator
/// sum_i a_i T_i^2 + sum_{i<j} b_ij T_i T_j with
/// a_i = (q x_i)^{-1} prod_{j != i} (1 - t x_i/x_j)(1 - qt x_i/x_j)
///        / ((1 - x_i/x_j)(1 - q x_i/x_j)),
/// b_ij = (t-1)(t-q)(x_i^{-1} + x_j^{-1}) / ((1 - q x_i/x_j)(1 - q x_j/x_i))
///          prod_{l != i,j} (1 - t x_i/x_l)(1 - t x_j/x_l)
///          / ((1 - x_i/x_l)(1 - x_j/x_l)).
pub fn op_dtilde21(n: usize, q: C64, t: C64) -> Result<DiffOperator> {
    check_params(n, q, t)?;
    let mut terms = Vec::new();
    for i in 0..n {
        let mut ct = CoeffTerm::new();
        ct.prefactors.push(PrefFactor::QPow(-1));
        ct.x_powers.push((i, -1));
        for j in 0..n {
            if j != i {
                ct.numer.push(Binom { cq: 0, ct: 1, i, j });
                ct.numer.push(Binom { cq: 1, ct: 1, i, j });
                ct.denom.push(Binom { cq: 0, ct: 0, i, j });
                ct.denom.push(Binom { cq: 1, ct: 0, i, j });
            }
        }
        terms.push(OpTerm { shift: unit_shift(n, &[(i, 2)]), coeff: vec![ct] });
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut parts = Vec::new();
            for inv_idx in [i, j] {
                let mut ct = CoeffTerm::new();
                ct.prefactors.push(PrefFactor::TMinusOne);
                ct.prefactors.push(PrefFactor::TMinusQ);
                ct.x_powers.push((inv_idx, -1));
                ct.denom.push(Binom { cq: 1, ct: 0, i, j });
                ct.denom.push(Binom { cq: 1, ct: 0, i: j, j: i });
                for l in 0..n {
                    if l != i && l != j {
                        ct.numer.push(Binom { cq: 0, ct: 1, i, j: l });
                        ct.numer.push(Binom { cq: 0, ct: 1, i: j, j: l });
                        ct.denom.push(Binom { cq: 0, ct: 0, i, j: l });
                        ct.denom.push(Binom { cq: 0, ct: 0, i: j, j: l });
                    }
                }
                parts.push(ct);
            }
            terms.push(OpTerm { shift: unit_shift(n, &[(i, 1), (j, 1)]), coeff: parts });
        }
    }
    Ok(DiffOperator { n, q, t, terms })
}

/// Deformation with lower-order terms:
/// op_dtilde21 + alpha sum_i prod_{k != i} (1 - t x_i/x_k)/(1 - x_i/x_k)
/// x_i^{-1} T_i + beta sum_i x_i^{-1}.
pub fn op_htilde21(n: usize, q: C64, t: C64, alpha: C64, beta: C64) -> Result<DiffOperator> {
    let mut op = op_dtilde21(n, q, t)?;
    for i in 0..n {
        let mut ct = CoeffTerm::new();
        ct.prefactors.push(PrefFactor::Const(alpha));
        ct.x_powers.push((i, -1));
        for k in 0..n {
            if k != i {
                ct.numer.push(Binom { cq: 0, ct: 1, i, j: k });
                ct.denom.push(Binom { cq: 0, ct: 0, i, j: k });
            }
        }
        op.terms.push(OpTerm { shift: unit_shift(n, &[(i, 1)]), coeff: vec![ct] });
    }
    let zero_order: Vec<CoeffTerm> = (0..n)
        .map(|i| {
            let mut ct = CoeffTerm::new();
            ct.prefactors.push(PrefFactor::Const(beta));
            ct.x_powers.push((i, -1));
            ct
        })
        .collect();
    op.terms.push(OpTerm { shift: vec![0; n], coeff: zero_order });
    Ok(op)
}

/// The first Macdonald-Ruijsenaars operator
/// sum_i prod_{j != i} (1 - t x_i/x_j)/(1 - x_i/x_j) T_i.
pub fn op_macdonald(n: usize, q: C64, t: C64) -> Result<DiffOperator> {
    check_params(n, q, t)?;
    let mut terms = Vec::new();
    for i in 0..n {
        let mut ct = CoeffTerm::new();
        for j in 0..n {
            if j != i {
                ct.numer.push(Binom { cq: 0, ct: 1, i, j });
                ct.denom.push(Binom { cq: 0, ct: 0, i, j });
            }
        }
        terms.push(OpTerm { shift: unit_shift(n, &[(i, 1)]), coeff: vec![ct] });
    }
    Ok(DiffOperator { n, q, t, terms })
}

/// The untransformed double-shift operator (derived form; its mixed
/// coefficients carry half powers evaluated on the principal branch).
/// It differs from [`op_dtilde21`] by the gauge factor
/// b_ij = btilde_ij q^{1/2} (x_i x_j)^{1/2}.
pub fn op_d21(n: usize, q: C64, t: C64) -> Result<DiffOperator> {
    check_params(n, q, t)?;
    let mut terms = Vec::new();
    for i in 0..n {
        let mut ct = CoeffTerm::new();
        for j in 0..n {
            if j != i {
                ct.numer.push(Binom { cq: 0, ct: 1, i, j });
                ct.numer.push(Binom { cq: 1, ct: 1, i, j });
                ct.denom.push(Binom { cq: 0, ct: 0, i, j });
                ct.denom.push(Binom { cq: 1, ct: 0, i, j });
            }
        }
        terms.push(OpTerm { shift: unit_shift(n, &[(i, 2)]), coeff: vec![ct] });
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut ct = CoeffTerm::new();
            ct.prefactors.push(PrefFactor::QHalf);
            ct.prefactors.push(PrefFactor::TMinusOne);
            ct.prefactors.push(PrefFactor::TMinusQ);
            ct.half_sym = Some((i, j));
            ct.denom.push(Binom { cq: 1, ct: 0, i, j });
            ct.denom.push(Binom { cq: 1, ct: 0, i: j, j: i });
            for l in 0..n {
                if l != i && l != j {
                    ct.numer.push(Binom { cq: 0, ct: 1, i, j: l });
                    ct.numer.push(Binom { cq: 0, ct: 1, i: j, j: l });
                    ct.denom.push(Binom { cq: 0, ct: 0, i, j: l });
                    ct.denom.push(Binom { cq: 0, ct: 0, i: j, j: l });
                }
            }
            terms.push(OpTerm { shift: unit_shift(n, &[(i, 1), (j, 1)]), coeff: vec![ct] });
        }
    }
    Ok(DiffOperator { n, q, t, terms })
}

/// Classical symbol: substitute T_i -> sigma_i and evaluate the coefficients
/// at q = 1 (each coefficient is regular there: no (1 - q r) factor sits
/// alone in a denominator at a chart point).
pub fn classical_symbol(d: &DiffOperator, pt: &DarbouxPoint) -> Result<C64> {
    if pt.n() != d.n {
        return Err(Error::ShapeMismatch("point dimension mismatch".into()));
    }
    let one = C64::new(1.0, 0.0);
    let mut total = C64::new(0.0, 0.0);
    for term in &d.terms {
        let mut c = C64::new(0.0, 0.0);
        for ct in &term.coeff {
            c += ct.eval(&pt.x, one, d.t)?;
        }
        let mut sig = one;
        for (i, &mu) in term.shift.iter().enumerate() {
            sig *= pt.sigma[i].powi(mu);
        }
        total += c * sig;
    }
    Ok(total)
}

/// Outcome of the shift-coincidence check: for g = D f and every sample with
/// x_a = x_b, the values (T_a^j g)(x) and (T_b^j g)(x) are compared for
/// j = 1..=m_order.
#[derive(Debug, Clone)]
pub struct QuasiInvarianceReport {
    pub max_relative_gap: f64,
    pub per_sample: Vec<f64>,
    pub pass: bool,
    pub tolerance: f64,
}

/// Evaluate the coincidence conditions. The operator preserves them exactly
/// when t = q^{-m_order}; with other parameters the report is expected to
/// fail (useful as a negative control).
pub fn quasi_invariance_check(
    d: &DiffOperator,
    m_order: usize,
    f: &TestFunction,
    samples: &[Vec<C64>],
    tolerance: f64,
) -> Result<QuasiInvarianceReport> {
    let n = d.n;
    if n < 2 {
        return Err(Error::BadParameters("need at least two variables".into()));
    }
    let mut per_sample = Vec::with_capacity(samples.len());
    let mut max_gap = 0.0f64;
    for x in samples {
        if x.len() != n {
            return Err(Error::ShapeMismatch("sample dimension mismatch".into()));
        }
        // locate coinciding pairs
        let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                if (x[a] - x[b]).norm() > 1e-12 * scale {
                    continue;
                }
                for j in 1..=m_order {
                    let qj = d.q.powi(j as i32);
                    let mut xa = x.clone();
                    xa[a] *= qj;
                    let mut xb = x.clone();
                    xb[b] *= qj;
                    let ga = apply(d, f, &xa)?;
                    let gb = apply(d, f, &xb)?;
                    let gap = (ga - gb).norm() / ga.norm().max(gb.norm()).max(1.0);
                    worst = worst.max(gap);
                }
            }
        }
        per_sample.push(worst);
        max_gap = max_gap.max(worst);
    }
    Ok(QuasiInvarianceReport {
        max_relative_gap: max_gap,
        per_sample,
        pass: max_gap <= tolerance,
        tolerance,
    })
}

/// Random sample with x_a = x_b and the rest generic.
pub fn coincident_sample(rng: &mut impl Rng, n: usize, a: usize, b: usize) -> Vec<C64> {
    loop {
        let x: Vec<C64> = (0..n)
            .map(|_| crate::sampling::random_annulus(rng, 0.5, 1.8))
            .collect();
        let mut x = x;
        x[b] = x[a];
        // keep the non-coincident pairs separated
        let mut ok = true;
        for i in 0..n {
            for j in i + 1..n {
                if (i, j) != (a.min(b), a.max(b))
                    && (x[i] - x[j]).norm() < 0.15 * x[i].norm().max(x[j].norm())
                {
                    ok = false;
                }
            }
        }
        if ok {
            return x;
        }
    }
}
