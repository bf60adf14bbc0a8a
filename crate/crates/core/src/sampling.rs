//! Deterministic pseudo-random generation of matrices, regular quiver
//! parameters and chart points. Everything is seeded so that suites are
//! reproducible from a CLI config.

use crate::darboux::DarbouxPoint;
use crate::linalg::{CMatrix, C64};
use crate::quiver::QuiverParams;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SuiteRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed-stream rng for unit tests.
pub fn test_rng(salt: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt)
}

/// Complex number uniform in the disk of the given radius.
pub fn random_c64(rng: &mut impl Rng, radius: f64) -> C64 {
    loop {
        let re = rng.gen_range(-radius..radius);
        let im = rng.gen_range(-radius..radius);
        if re * re + im * im <= radius * radius {
            return C64::new(re, im);
        }
    }
}

/// Complex number with modulus in [r_min, r_max] and uniform phase.
pub fn random_annulus(rng: &mut impl Rng, r_min: f64, r_max: f64) -> C64 {
    let r = rng.gen_range(r_min..r_max);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    C64::from_polar(r, phi)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, radius: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_c64(rng, radius))
}

/// Random invertible matrix (resampled until the inverse is comfortable).
pub fn random_invertible(rng: &mut impl Rng, n: usize) -> CMatrix {
    loop {
        let m = random_matrix(rng, n, n, 1.0);
        if let Ok(inv) = m.inverse() {
            if m.norm_one() * inv.norm_one() < 1e6 {
                return m;
            }
        }
    }
}

/// Regular quiver parameters with moduli near 1; resampled until the
/// regularity certificate holds.
pub fn random_regular_params(rng: &mut impl Rng, m: usize, n: usize) -> QuiverParams {
    loop {
        let q: Vec<C64> = (0..m).map(|_| random_annulus(rng, 0.85, 1.2)).collect();
        if let Ok(p) = QuiverParams::new(m, n, q) {
            if p.is_regular() {
                return p;
            }
        }
    }
}

/// Chart point in the regular locus with well-separated positions.
///
/// Positions get moduli log-spread in [0.5, 2] and are resampled until all
/// pairwise separations |x_i - x_j| and |x_i - t x_j| clear a fixed margin,
/// which keeps the Cauchy matrices well conditioned across the suites.
pub fn random_darboux_point(rng: &mut impl Rng, n: usize, t: C64) -> DarbouxPoint {
    'outer: loop {
        let x: Vec<C64> = (0..n).map(|_| random_annulus(rng, 0.5, 2.0)).collect();
        let margin = 0.12;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let scale = x[i].norm().max(x[j].norm());
                    if (x[i] - x[j]).norm() < margin * scale {
                        continue 'outer;
                    }
                    if (x[i] - t * x[j]).norm() < margin * scale {
                        continue 'outer;
                    }
                }
            }
        }
        let sigma: Vec<C64> = (0..n).map(|_| random_annulus(rng, 0.5, 2.0)).collect();
        if let Ok(pt) = DarbouxPoint::new(x, sigma, t) {
            return pt;
        }
    }
}
