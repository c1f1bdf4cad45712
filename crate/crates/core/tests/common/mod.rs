#![allow(dead_code)]

pub mod strategies;

use miura::numeric::{c64, polynomial_roots, CMatrix, PotentialSpec, RationalFunction, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c64(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

pub fn poly(coeffs: &[f64]) -> RationalFunction {
    RationalFunction::polynomial(coeffs.iter().map(|&x| c64(x, 0.0)).collect())
}

/// Rank-`n` potential whose fields are quadratic over `(z − p)` with
/// `|p| <= inner` or `outer <= |p| <= outer + 0.5`.
pub fn random_rational_potential(rng: &mut ChaCha8Rng, n: usize, inner: f64, outer: f64) -> PotentialSpec {
    let w = (0..n - 1)
        .map(|_| {
            let num: Vec<C64> = (0..3).map(|_| random_c64(rng, 1.0)).collect();
            let radius = if rng.random_bool(0.5) {
                rng.random_range(0.0..inner)
            } else {
                rng.random_range(outer..outer + 0.5)
            };
            let pole = C64::from_polar(radius, rng.random_range(0.0..std::f64::consts::TAU));
            RationalFunction::new(num, vec![-pole, c64(1.0, 0.0)]).unwrap()
        })
        .collect();
    PotentialSpec::new(n, w).unwrap()
}

/// Coefficients of `det(λ − M)`, ascending, by Faddeev–LeVerrier.
pub fn char_poly(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    let mut coeffs = vec![c64(0.0, 0.0); n + 1];
    coeffs[n] = c64(1.0, 0.0);
    let mut mk = CMatrix::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + CMatrix::identity(n, n) * coeffs[n - k + 1];
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    coeffs
}

pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    polynomial_roots(&char_poly(m))
}

/// Largest distance in an optimal greedy matching of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut left: Vec<C64> = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        left.swap_remove(k);
    }
    worst
}

/// Classical fixed-step RK4 for a scalar complex ODE along a straight line.
pub fn rk4_line(f: impl Fn(C64, C64) -> C64, z0: C64, z1: C64, y0: C64, steps: usize) -> Vec<(C64, C64)> {
    let h = (z1 - z0) / steps as f64;
    let mut out = vec![(z0, y0)];
    let (mut z, mut y) = (z0, y0);
    for k in 0..steps {
        let k1 = f(z, y);
        let k2 = f(z + h / 2.0, y + h / 2.0 * k1);
        let k3 = f(z + h / 2.0, y + h / 2.0 * k2);
        let k4 = f(z + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        z = z0 + (z1 - z0) * ((k + 1) as f64 / steps as f64);
        out.push((z, y));
    }
    out
}
