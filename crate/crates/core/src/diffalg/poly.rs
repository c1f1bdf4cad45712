use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{DiffAlgError, JetVar};

/// Exponent map of a monomial, kept sorted by variable with no zero entries.
///
/// Ordered graded-lexicographically: total degree first, then the sorted
/// variable sequences (each variable repeated by its exponent) compared
/// lexicographically. So `Da1 < a1^2 < a1*a2 < a2^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Exponents(Vec<(JetVar, u32)>);

impl Exponents {
    pub fn one() -> Self {
        Exponents(Vec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Exponents(vec![(v, 1)])
    }

    /// Builds from arbitrary `(var, exp)` pairs, merging duplicates and
    /// dropping zero exponents.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (JetVar, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Exponents(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(JetVar, u32)> {
        self.0.iter()
    }

    pub fn exponent(&self, v: &JetVar) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    fn expanded(&self) -> impl Iterator<Item = &JetVar> + '_ {
        self.0.iter().flat_map(|(v, e)| std::iter::repeat_n(v, *e as usize))
    }

    fn mul(&self, other: &Exponents) -> Exponents {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Exponents(out)
    }

    /// Lowers the exponent of the variable at `pos` by one.
    fn lowered(&self, pos: usize) -> Exponents {
        let mut out = self.0.clone();
        if out[pos].1 == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Exponents(out)
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One term of a [`DiffPoly`]: a nonzero rational coefficient times a monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub exponents: Exponents,
}

/// Complex values for jet variables, used by [`DiffPoly::evaluate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JetAssignment {
    values: BTreeMap<JetVar, Complex64>,
}

impl JetAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: JetVar, value: Complex64) -> Self {
        self.values.insert(v, value);
        self
    }

    pub fn insert(&mut self, v: JetVar, value: Complex64) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: &JetVar) -> Option<Complex64> {
        self.values.get(v).copied()
    }
}

impl FromIterator<(JetVar, Complex64)> for JetAssignment {
    fn from_iter<I: IntoIterator<Item = (JetVar, Complex64)>>(iter: I) -> Self {
        JetAssignment { values: iter.into_iter().collect() }
    }
}

/// Polynomial with exact rational coefficients in jet and coordinate variables.
///
/// Always in normal form: one entry per distinct monomial, no zero
/// coefficients, terms iterated in graded-lex order. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Exponents, BigRational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Exponents::one())
    }

    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: JetVar) -> Self {
        Self::term(BigRational::one(), Exponents::var(v))
    }

    pub fn term(coeff: BigRational, exponents: Exponents) -> Self {
        let mut p = Self::zero();
        p.add_term(exponents, coeff);
        p
    }

    /// Builds a polynomial from unnormalized terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (BigRational, Exponents)>) -> Self {
        let mut p = Self::zero();
        for (c, e) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exponents: Exponents, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|(e, c)| e.is_one() && c.is_one())
    }

    /// The value if this is a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(e, _)| e.is_one())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Terms in canonical (ascending graded-lex) order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = Monomial> + '_ {
        self.terms
            .iter()
            .map(|(e, c)| Monomial { coeff: c.clone(), exponents: e.clone() })
    }

    pub(crate) fn raw_terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    /// Re-normalizes; the result equals `self` since the invariant is kept by
    /// every constructor.
    pub fn normalize(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (c.clone(), e.clone())))
    }

    pub fn variables(&self) -> BTreeSet<JetVar> {
        self.terms
            .keys()
            .flat_map(|e| e.iter().map(|&(v, _)| v))
            .collect()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponents::degree).max()
    }

    /// Highest derivative order among field jets, `None` if there are none.
    pub fn max_jet_order(&self) -> Option<u32> {
        self.variables()
            .iter()
            .filter(|v| !v.is_coordinate())
            .map(JetVar::order)
            .max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Formal total derivative `∂`: a derivation with `∂(∂^k x) = ∂^{k+1} x`.
    pub fn total_derive(&self) -> Result<Self, DiffAlgError> {
        if let Some(u) = self.variables().into_iter().find(JetVar::is_coordinate) {
            return Err(DiffAlgError::CoordinateInDerivative(u));
        }
        self.derive_fields()
    }

    /// Total derivative acting on field jets only, with coordinates held
    /// constant.
    pub(crate) fn derive_fields(&self) -> Result<Self, DiffAlgError> {
        let mut out = Self::zero();
        for (exps, coeff) in &self.terms {
            for (pos, &(v, e)) in exps.iter().enumerate() {
                if v.is_coordinate() {
                    continue;
                }
                let dv = v.derived()?;
                let c = coeff * BigRational::from_integer(BigInt::from(e));
                out.add_term(exps.lowered(pos).mul(&Exponents::var(dv)), c);
            }
        }
        Ok(out)
    }

    /// Ordinary partial derivative in `u_m`; jets are constants here.
    pub fn partial_u(&self, m: u32) -> Self {
        self.partial(&JetVar::u(m))
    }

    /// Ordinary partial derivative with respect to any single variable.
    pub fn partial(&self, var: &JetVar) -> Self {
        let mut out = Self::zero();
        for (exps, coeff) in &self.terms {
            if let Some(pos) = exps.iter().position(|(v, _)| v == var) {
                let e = exps.0[pos].1;
                out.add_term(
                    exps.lowered(pos),
                    coeff * BigRational::from_integer(BigInt::from(e)),
                );
            }
        }
        out
    }

    /// Numeric value under `sigma`; coefficients are converted to `f64` last.
    pub fn evaluate(&self, sigma: &JetAssignment) -> Result<Complex64, DiffAlgError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (exps, coeff) in &self.terms {
            let mut value = Complex64::new(rational_to_f64(coeff), 0.0);
            for &(v, e) in exps.iter() {
                let x = sigma.get(&v).ok_or(DiffAlgError::MissingAssignment(v))?;
                value *= x.powu(e);
            }
            total += value;
        }
        Ok(total)
    }

    /// Replaces variables by polynomials. `f` returns `None` to keep a
    /// variable as is.
    pub fn substitute<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&JetVar) -> Option<DiffPoly>,
    {
        let mut cache: BTreeMap<JetVar, Option<DiffPoly>> = BTreeMap::new();
        let mut out = Self::zero();
        for (exps, coeff) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = DiffPoly::constant(coeff.clone());
            for &(v, e) in exps.iter() {
                let image = cache.entry(v).or_insert_with(|| f(&v));
                match image {
                    Some(p) => factor = &factor * &p.pow(e),
                    None => kept.push((v, e)),
                }
            }
            let kept = Exponents(kept);
            for (e, c) in factor.terms {
                out.add_term(e.mul(&kept), c);
            }
        }
        out
    }

    /// Coefficient of `v^k` when viewed as a polynomial in `v`.
    pub fn coefficient_of(&self, v: &JetVar, k: u32) -> Self {
        let mut out = Self::zero();
        for (exps, coeff) in &self.terms {
            if exps.exponent(v) == k {
                let rest = exps.iter().filter(|(w, _)| w != v).copied();
                out.add_term(Exponents(rest.collect()), coeff.clone());
            }
        }
        out
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Outside f64 range: saturate with the right sign.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl From<JetVar> for DiffPoly {
    fn from(v: JetVar) -> Self {
        DiffPoly::var(v)
    }
}

impl From<i64> for DiffPoly {
    fn from(c: i64) -> Self {
        DiffPoly::int(c)
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), c.clone());
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), -c.clone());
        }
    }
}

impl Add<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<DiffPoly> for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly { (&self).$m(&rhs) }
        }
        impl $tr<&DiffPoly> for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: &DiffPoly) -> DiffPoly { (&self).$m(rhs) }
        }
        impl $tr<DiffPoly> for &DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}
