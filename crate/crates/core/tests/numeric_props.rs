mod common;

use common::*;
use miura::diffalg::{DiffPoly, JetVar};
use miura::numeric::{
    c64, free_fields_along_path, gauss_factorize, integrate_fundamental, monodromy,
    verify_miura_numeric, CMatrix, FreeFieldOptions, IntegrationOptions, NumericError, Path,
    PotentialSpec, RationalFunction, C64,
};
use proptest::prelude::*;

/// With `M11 = a1`, `M21 = a2` as stand-ins, `a = M21/M11` and
/// `M' = s·A·M`, the numerator of `a' − (a² − T)` over `M11²`.
fn riccati_defect(s: i64) -> DiffPoly {
    let (m11, m21, t) = (JetVar::a(1), JetVar::a(2), JetVar::w(2));
    let var = DiffPoly::var;
    let flow = |v: &JetVar| {
        if *v == m11.derived().unwrap() {
            Some(&DiffPoly::int(s) * &var(m21))
        } else if *v == m21.derived().unwrap() {
            Some(&(&DiffPoly::int(s) * &var(t)) * &var(m11))
        } else {
            None
        }
    };
    let quotient_rule = &(&var(m21).total_derive().unwrap() * &var(m11))
        - &(&var(m21) * &var(m11).total_derive().unwrap());
    let numerator = quotient_rule.substitute(flow);
    let target = &var(m21).pow(2) - &(&var(t) * &var(m11).pow(2));
    numerator - target
}

#[test]
fn only_the_minus_sign_gives_the_riccati_equation() {
    assert!(riccati_defect(-1).is_zero());
    assert!(!riccati_defect(1).is_zero());
    assert_eq!(riccati_defect(1).to_string(), "-2*a2^2 + 2*a1^2*w2");
}

#[test]
fn integrator_uses_the_minus_sign() {
    // T ≡ c: M11 = cosh(√c z), M21 = −√c sinh(√c z), a = −√c tanh(√c z).
    let c = c64(0.7, 0.2);
    let pot = PotentialSpec::new(2, vec![RationalFunction::constant(c)]).unwrap();
    let path = Path::segment(c64(0.0, 0.0), c64(0.8, 0.3), 32).unwrap();
    let trace =
        free_fields_along_path(&pot, &path, &CMatrix::identity(2, 2), &FreeFieldOptions::default()).unwrap();
    let r = c.sqrt();
    for s in &trace.samples {
        let want = -r * (r * s.z).tanh();
        assert!((s.a.as_ref().unwrap()[0] - want).norm() < 1e-9, "z = {}", s.z);
    }
    let report =
        verify_miura_numeric(&pot, &path, &CMatrix::identity(2, 2), &FreeFieldOptions::default()).unwrap();
    assert!(report.worst() < 1e-8);
}

#[test]
fn airy_free_field_matches_an_independent_riccati_solve() {
    let pot = PotentialSpec::new(2, vec![poly(&[0.0, 1.0])]).unwrap();
    let (z0, z1) = (c64(0.0, 0.2), c64(1.0, 0.2));
    let path = Path::segment(z0, z1, 16).unwrap();
    let trace =
        free_fields_along_path(&pot, &path, &CMatrix::identity(2, 2), &FreeFieldOptions::default()).unwrap();
    // M0 = I gives a(z0) = 0; solve a' = a² − z with fine fixed steps.
    let oracle = rk4_line(|z, a| a * a - z, z0, z1, c64(0.0, 0.0), 16 * 256);
    for (k, s) in trace.samples.iter().enumerate() {
        let (z, a) = oracle[k * 256];
        assert!((z - s.z).norm() < 1e-14);
        assert!((a - s.a.as_ref().unwrap()[0]).norm() < 1e-10);
    }
}

#[test]
fn shear_frame_leaves_the_big_cell_at_one() {
    let pot = PotentialSpec::zero(2).unwrap();
    let path = Path::segment(c64(0.0, 0.0), c64(2.0, 0.0), 64).unwrap();
    let m0 = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)]);
    let trace = free_fields_along_path(&pot, &path, &m0, &FreeFieldOptions::default()).unwrap();
    for s in &trace.samples {
        // M(z) = exp(−Az)·M0 = [[1 − z, −z], [1, 1]].
        assert!((s.minors[0] - (1.0 - s.z)).norm() < 1e-12);
        if let Some(a) = &s.a {
            assert!((a[0] - 1.0 / (1.0 - s.z)).norm() < 1e-9 * (1.0 / (1.0 - s.z)).norm().max(1.0));
        }
    }
    let flagged: Vec<C64> = trace.violations().map(|s| s.z).collect();
    assert_eq!(flagged.len(), 1);
    assert!((flagged[0] - 1.0).norm() < 1e-3);
    assert!(matches!(
        verify_miura_numeric(&pot, &path, &m0, &FreeFieldOptions::default()),
        Err(NumericError::BigCellViolation { .. })
    ));
}

#[test]
fn flags_are_exactly_the_small_minors() {
    let pot = PotentialSpec::zero(2).unwrap();
    let path = Path::segment(c64(0.0, 0.0), c64(2.0, 0.0), 64).unwrap();
    let m0 = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)]);
    let opts = FreeFieldOptions { minor_tol: 0.05, ..Default::default() };
    let trace = free_fields_along_path(&pot, &path, &m0, &opts).unwrap();
    for s in &trace.samples {
        assert_eq!(s.in_big_cell, s.minors.iter().all(|m| m.norm() > 0.05));
        assert_eq!(s.a.is_some(), s.in_big_cell);
    }
    assert_eq!(trace.violations().count(), 3);
}

#[test]
fn residual_converges_at_least_quadratically() {
    let pot = PotentialSpec::new(2, vec![poly(&[0.0, 1.0])]).unwrap();
    for half_width in [1usize, 2] {
        let residual = |hint: usize| {
            let path = Path::segment(c64(0.0, 0.2), c64(1.0, 0.2), hint).unwrap();
            let opts = FreeFieldOptions { stencil_half_width: half_width, ..Default::default() };
            verify_miura_numeric(&pot, &path, &CMatrix::identity(2, 2), &opts).unwrap().worst()
        };
        let (coarse, fine) = (residual(16), residual(32));
        let order = (coarse / fine).log2();
        assert!(order >= 2.0 - 0.1, "half width {half_width}: order {order}");
    }
}

#[test]
fn halving_rtol_moves_the_endpoint_by_less_than_ten_tolerances() {
    let mut rng = rng(7);
    for _ in 0..5 {
        let pot = random_rational_potential(&mut rng, 3, 0.3, 2.0);
        let path = Path::new(vec![c64(-1.0, 0.5), c64(0.2, 0.9), c64(1.0, 0.6)], 16).unwrap();
        for rtol in [1e-6, 1e-8, 1e-10] {
            let run = |tol: f64| {
                let opts = IntegrationOptions { rtol: tol, ..Default::default() };
                integrate_fundamental(&pot, &path, &CMatrix::identity(3, 3), &opts).unwrap().end().m.clone()
            };
            let (coarse, fine) = (run(rtol), run(rtol / 2.0));
            assert!((&coarse - &fine).norm() / fine.norm() < 10.0 * rtol, "rtol {rtol}");
        }
    }
}

#[test]
fn zero_potential_monodromy_is_identity() {
    for n in 2..=4 {
        let pot = PotentialSpec::zero(n).unwrap();
        let lp = Path::new(vec![c64(0.0, 0.0), c64(2.0, 1.0), c64(-1.0, 3.0), c64(0.0, 0.0)], 8).unwrap();
        let m = monodromy(&pot, &lp, &IntegrationOptions::default()).unwrap();
        assert!((&m.matrix - CMatrix::identity(n, n)).norm() < 1e-9);
    }
}

#[test]
fn inverse_square_potential_has_trivial_monodromy() {
    // Exponents s(s − 1) = 2 give s = 2, −1: single-valued solutions.
    let pot = PotentialSpec::new(2, vec![RationalFunction::new(vec![c64(2.0, 0.0)], vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap()]).unwrap();
    let lp = Path::circle(c64(0.0, 0.0), 1.0, 32, 0.0, 8).unwrap();
    let m = monodromy(&pot, &lp, &IntegrationOptions::default()).unwrap();
    assert!((&m.matrix - CMatrix::identity(2, 2)).norm() < 1e-7);
}

#[test]
fn monodromy_trace_matches_the_indicial_exponents() {
    // T = c/z²: exponents s(s − 1) = c, eigenvalues e^{±2πi s}.
    for c in [0.3, -0.2, 1.5] {
        let pot = PotentialSpec::new(2, vec![RationalFunction::new(vec![c64(c, 0.0)], vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap()]).unwrap();
        let lp = Path::circle(c64(0.0, 0.0), 1.0, 24, 0.1, 8).unwrap();
        let m = monodromy(&pot, &lp, &IntegrationOptions::default()).unwrap();
        let s = (1.0 + (1.0 + 4.0 * c64(c, 0.0)).sqrt()) / 2.0;
        let want = 2.0 * (std::f64::consts::TAU * s).cos();
        assert!((m.matrix.trace() - want).norm() < 1e-7, "c = {c}");
    }
}

#[test]
fn monodromy_is_conjugation_invariant_under_base_point_change() {
    // Euler-type singularity at 0 plus a random regular part: distinct
    // eigenvalues, so the multiset comparison is well conditioned.
    let mut rng = rng(11);
    for _ in 0..4 {
        let (c2, c3) = (random_c64(&mut rng, 0.5), random_c64(&mut rng, 0.5));
        let (b2, b3) = (random_c64(&mut rng, 0.5), random_c64(&mut rng, 0.5));
        let zero = c64(0.0, 0.0);
        let w2 = RationalFunction::new(vec![c2, b2], vec![zero, zero, c64(1.0, 0.0)]).unwrap();
        let w3 = RationalFunction::new(vec![c3, zero, b3], vec![zero, zero, zero, c64(1.0, 0.0)]).unwrap();
        let pot = PotentialSpec::new(3, vec![w2, w3]).unwrap();
        let lp = Path::circle(c64(0.0, 0.0), 1.0, 12, 0.0, 8).unwrap();
        let a = monodromy(&pot, &lp, &IntegrationOptions::default()).unwrap();
        let b = monodromy(&pot, &lp.rotated(5).unwrap(), &IntegrationOptions::default()).unwrap();
        let (ea, eb) = (eigenvalues(&a.matrix), eigenvalues(&b.matrix));
        assert!(multiset_distance(&ea, &eb) < 1e-6, "{ea:?} vs {eb:?}");
        assert!((a.det - 1.0).norm() < 1e-8 && (b.det - 1.0).norm() < 1e-8);
    }
}

fn complex_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
        .prop_map(move |v| CMatrix::from_row_slice(n, n, &v.into_iter().map(|(re, im)| c64(re, im)).collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn factorization_roundtrip(n in 2usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = CMatrix::from_fn(n, n, |_, _| random_c64(&mut r, 2.0));
        let g = gauss_factorize(&m, 1e-9);
        prop_assert_eq!(g.in_big_cell, g.minors.iter().all(|d| d.norm() > 1e-9));
        if g.in_big_cell {
            let (l, u) = (g.n_minus.unwrap(), g.b_plus.unwrap());
            // Pivots near zero amplify rounding; the bound is on well-posed cases.
            let growth = l.norm() * u.norm() / m.norm();
            prop_assume!(growth < 1e3);
            prop_assert!((&l * &u - &m).norm() / m.norm() < 1e-12);
            for i in 0..n {
                prop_assert_eq!(l[(i, i)], c64(1.0, 0.0));
                for j in i + 1..n {
                    prop_assert_eq!(l[(i, j)], c64(0.0, 0.0));
                    prop_assert_eq!(u[(j, i)], c64(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn singular_leading_block_is_never_in_the_big_cell(m in complex_matrix(3)) {
        let mut m = m;
        // Make the leading 2×2 block rank one.
        let (r0, r1) = (m[(0, 0)], m[(0, 1)]);
        m[(1, 0)] = r0 * 2.0;
        m[(1, 1)] = r1 * 2.0;
        let g = gauss_factorize(&m, 1e-9);
        prop_assert!(!g.in_big_cell);
        prop_assert!(g.minors[1].norm() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn determinant_is_conserved(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let pot = random_rational_potential(&mut r, n, 0.4, 2.5);
        let path = Path::new(vec![c64(-1.0, -1.0), c64(1.0, -0.9), c64(0.9, 1.0), c64(-1.1, 0.8)], 8).unwrap();
        let m0 = CMatrix::identity(n, n) + CMatrix::from_fn(n, n, |_, _| random_c64(&mut r, 0.3));
        let sol = integrate_fundamental(&pot, &path, &m0, &IntegrationOptions::default()).unwrap();
        prop_assert!(sol.max_det_drift() < 1e-9, "drift {}", sol.max_det_drift());
    }

    #[test]
    fn random_rational_monodromy_is_unimodular(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let pot = random_rational_potential(&mut r, n, 0.6, 1.5);
        let lp = Path::circle(c64(0.0, 0.0), 1.0, 16, 0.3, 8).unwrap();
        let m = monodromy(&pot, &lp, &IntegrationOptions::default()).unwrap();
        prop_assert!((m.det - 1.0).norm() < 1e-8, "det {}", m.det);
    }
}

#[test]
fn sheared_frame_residual_shrinks_with_sampling() {
    // Same Airy potential; the frame only moves where Δ1 gets small.
    let pot = PotentialSpec::new(2, vec![RationalFunction::polynomial(vec![c64(0.0, 0.0), c64(1.0, 0.0)])]).unwrap();
    let m0 = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)]);
    let worst = |hint| {
        let path = Path::segment(c64(0.0, 0.2), c64(1.0, 0.2), hint).unwrap();
        verify_miura_numeric(&pot, &path, &m0, &FreeFieldOptions::default()).unwrap().worst()
    };
    let (coarse, fine) = (worst(64), worst(256));
    assert!(coarse > 1e-6, "{coarse}");
    assert!(fine < 1e-6 && fine < coarse / 1000.0, "{coarse} -> {fine}");
}
