use miura::diffalg::{DiffPoly, Exponents, Family, JetVar};
use miura::foliation::{
    coordinate_positions, foliation_vector_field, leaf_derivative, omega_minus,
    partial_connection_matrix, sigma_minus, verify_miura_graph,
};
use miura::gauge::{
    companion_matrix, diagonal_matrix, gauge_transform, miura_eliminate, GaugeMatrix,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

#[test]
fn gauge_roundtrip_for_ranks_two_to_six() {
    for n in 2..=6 {
        let m = miura_eliminate(n).unwrap();
        assert!(m.n_minus.is_lower_unipotent());
        assert_eq!(gauge_transform(&m.companion(), &m.n_minus).unwrap(), diagonal_matrix(n).unwrap(), "n = {n}");
    }
}

#[test]
fn free_fields_at_zero_give_zero_potential() {
    for n in 2..=6 {
        let m = miura_eliminate(n).unwrap();
        let zero = |v: &JetVar| (v.family() == Family::FreeField).then(DiffPoly::zero);
        for w in &m.w {
            assert!(w.substitute(zero).is_zero());
        }
        assert_eq!(m.n_minus.substitute(zero), GaugeMatrix::identity(n));
    }
}

#[test]
fn jet_order_and_degree_bounds() {
    for n in 2..=6 {
        let m = miura_eliminate(n).unwrap();
        for i in 2..=n {
            let w = m.w_i(i);
            assert!(w.max_jet_order().unwrap() <= (i - 1) as u32, "w{i} at n = {n}");
            assert!(w.total_degree().unwrap() <= i as u32, "w{i} at n = {n}");
            // w_i is homogeneous of weight i with a = weight 1, ∂ = weight 1.
            for t in w.terms() {
                let weight: u32 = t.exponents.iter().map(|(v, k)| (1 + v.order()) * k).sum();
                assert_eq!(weight, i as u32);
            }
        }
    }
}

#[test]
fn trace_is_preserved() {
    for n in 2..=6 {
        let m = miura_eliminate(n).unwrap();
        let a = companion_matrix(n, true).unwrap();
        assert_eq!(gauge_transform(&a, &m.n_minus).unwrap().trace(), a.trace());
        assert!(diagonal_matrix(n).unwrap().trace().is_zero());
    }
}

#[test]
fn foliation_counts_and_triangularity() {
    for n in 2..=6 {
        let sys = omega_minus(n).unwrap();
        assert_eq!(sys.forms.len(), n * (n - 1) / 2);
        assert_eq!(sys.positions, coordinate_positions(n));
        sys.check_triangular().unwrap();
        assert!(sigma_minus(n).unwrap().is_lower_unipotent());
    }
}

#[test]
fn graph_check_is_exact_for_ranks_two_to_five() {
    for n in 2..=5 {
        let r = verify_miura_graph(n).unwrap();
        assert!(r.is_exact(), "n = {n}: {:?}", r.residuals);
        assert_eq!(r.residuals.len(), n * (n - 1) / 2);
    }
}

#[test]
fn partial_connection_is_the_diagonal_gauge_after_renaming() {
    for n in 2..=6 {
        let positions = coordinate_positions(n);
        // u at (j+1, j) plays the role of a_{j+1}.
        let rename = |v: &JetVar| {
            if v.family() != Family::Coordinate {
                return None;
            }
            let (i, j) = positions[v.index() as usize - 1];
            (i == j + 1).then(|| DiffPoly::var(JetVar::a(j as u32 + 1)))
        };
        let p = partial_connection_matrix(n).unwrap().substitute(rename);
        assert_eq!(p, diagonal_matrix(n).unwrap(), "n = {n}");
    }
}

#[test]
fn leaf_derivative_of_coordinates_is_the_field() {
    for n in 2..=4 {
        let sys = omega_minus(n).unwrap();
        let field = foliation_vector_field(&sys).unwrap();
        for m in 1..=sys.forms.len() {
            let u = DiffPoly::var(JetVar::u(m as u32));
            assert_eq!(leaf_derivative(&u, &field).unwrap(), field.component(m));
            // Every form annihilates the field.
            assert!(sys.forms[m - 1].contract(&field).is_zero());
        }
    }
}

fn lower_unipotent(n: usize) -> impl Strategy<Value = GaugeMatrix> {
    let entry = prop::collection::vec(
        ((-3i64..=3), prop::collection::vec(((1u32..=2), (0u32..=1), (1u32..=2)), 0..=2)),
        0..=2,
    )
    .prop_map(|terms| {
        DiffPoly::from_terms(terms.into_iter().map(|(c, vars)| {
            let e = Exponents::from_pairs(vars.into_iter().map(|(j, k, p)| (JetVar::a_jet(j, k), p)));
            (BigRational::from_integer(BigInt::from(c)), e)
        }))
    });
    prop::collection::vec(entry, n * (n - 1) / 2).prop_map(move |entries| {
        let mut m = GaugeMatrix::identity(n);
        for (e, (i, j)) in entries.into_iter().zip(coordinate_positions(n)) {
            m.set(i, j, e);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauge_action_composes(n1 in lower_unipotent(3), n2 in lower_unipotent(3)) {
        let a = companion_matrix(3, true).unwrap();
        let step = gauge_transform(&gauge_transform(&a, &n1).unwrap(), &n2).unwrap();
        let once = gauge_transform(&a, &n1.mul(&n2).unwrap()).unwrap();
        prop_assert_eq!(step, once);
    }

    #[test]
    fn inverse_gauge_undoes(n1 in lower_unipotent(3)) {
        let a = companion_matrix(3, true).unwrap();
        let inv = n1.unitriangular_inverse().unwrap();
        prop_assert_eq!(gauge_transform(&gauge_transform(&a, &n1).unwrap(), &inv).unwrap(), a);
    }
}
