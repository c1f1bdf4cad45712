use miura::diffalg::{DiffPoly, Exponents, JetVar};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

pub const CASES: u32 = 10_000;

pub fn field_var() -> impl Strategy<Value = JetVar> {
    prop_oneof![
        (1u32..=3, 0u32..=2).prop_map(|(j, k)| JetVar::a_jet(j, k)),
        (2u32..=3, 0u32..=1).prop_map(|(i, k)| JetVar::w_jet(i, k)),
    ]
}

pub fn any_var() -> impl Strategy<Value = JetVar> {
    prop_oneof![4 => field_var(), 1 => (1u32..=3).prop_map(JetVar::u)]
}

pub fn rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

pub fn poly_from(var: impl Strategy<Value = JetVar>) -> impl Strategy<Value = DiffPoly> {
    let monomial = prop::collection::vec((var, 1u32..=2), 0..=3).prop_map(Exponents::from_pairs);
    prop::collection::vec((rational(), monomial), 0..=4).prop_map(DiffPoly::from_terms)
}

pub fn poly() -> impl Strategy<Value = DiffPoly> {
    poly_from(any_var())
}

pub fn field_poly() -> impl Strategy<Value = DiffPoly> {
    poly_from(field_var())
}

pub fn config() -> ProptestConfig {
    ProptestConfig::with_cases(CASES)
}
