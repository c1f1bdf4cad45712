//! Connection matrices in the Drinfel'd–Sokolov (companion) and diagonal
//! gauges, triangular gauge conjugation, and the triangular elimination that
//! produces the Miura transformation.
//!
//! Conventions: `∇ = ∂ + A dz`, and a gauge change by `N` acts as
//! `A ↦ N⁻¹∂N + N⁻¹AN`. With these, rank 2 gives `w2 = -Da1 + a1^2`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffalg::{DiffAlgError, DiffPoly, JetVar};

/// Largest rank accepted by [`miura_eliminate`].
pub const DEFAULT_RANK_GUARD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaugeError {
    #[error("rank {0} is too small, need n >= 2")]
    RankTooSmall(usize),
    #[error("rank {n} exceeds the guard {guard}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("gauge matrix is not unit triangular")]
    NotUnipotent,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    DiffAlg(#[from] DiffAlgError),
}

/// Square matrix of differential polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaugeMatrix {
    n: usize,
    entries: Vec<DiffPoly>,
}

impl GaugeMatrix {
    pub fn zero(n: usize) -> Self {
        GaugeMatrix { n, entries: vec![DiffPoly::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, DiffPoly::one());
        }
        m
    }

    /// From rows; panics if the rows are not square.
    pub fn from_rows(rows: Vec<Vec<DiffPoly>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "gauge matrix rows must be square");
        GaugeMatrix { n, entries: rows.into_iter().flatten().collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &DiffPoly {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: DiffPoly) {
        self.entries[i * self.n + j] = p;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[DiffPoly]> {
        self.entries.chunks(self.n)
    }

    pub fn map(&self, mut f: impl FnMut(&DiffPoly) -> DiffPoly) -> Self {
        GaugeMatrix { n: self.n, entries: self.entries.iter().map(&mut f).collect() }
    }

    pub fn try_map<E>(&self, f: impl FnMut(&DiffPoly) -> Result<DiffPoly, E>) -> Result<Self, E> {
        Ok(GaugeMatrix {
            n: self.n,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn trace(&self) -> DiffPoly {
        let mut t = DiffPoly::zero();
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    /// Entrywise total derivative.
    pub fn derive(&self) -> Result<Self, DiffAlgError> {
        self.try_map(DiffPoly::total_derive)
    }

    /// `(self · rhs)[i][j]` without forming the whole product.
    pub fn product_entry(&self, rhs: &GaugeMatrix, i: usize, j: usize) -> DiffPoly {
        let mut acc = DiffPoly::zero();
        for k in 0..self.n {
            let (l, r) = (self.get(i, k), rhs.get(k, j));
            if !l.is_zero() && !r.is_zero() {
                acc += &(l * r);
            }
        }
        acc
    }

    pub fn mul(&self, rhs: &GaugeMatrix) -> Result<Self, GaugeError> {
        self.check_dim(rhs)?;
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.product_entry(rhs, i, j));
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &GaugeMatrix) -> Result<Self, GaugeError> {
        self.check_dim(rhs)?;
        Ok(GaugeMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, rhs: &GaugeMatrix) -> Result<Self, GaugeError> {
        self.check_dim(rhs)?;
        Ok(GaugeMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        })
    }

    fn check_dim(&self, rhs: &GaugeMatrix) -> Result<(), GaugeError> {
        if self.n == rhs.n {
            Ok(())
        } else {
            Err(GaugeError::DimensionMismatch(self.n, rhs.n))
        }
    }

    /// Strictly lower part, everything on and above the diagonal zeroed.
    pub fn strictly_lower(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in i..self.n {
                out.set(i, j, DiffPoly::zero());
            }
        }
        out
    }

    /// Upper part including the diagonal.
    pub fn upper(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..i {
                out.set(i, j, DiffPoly::zero());
            }
        }
        out
    }

    pub fn is_lower_unipotent(&self) -> bool {
        (0..self.n).all(|i| {
            self.get(i, i).is_one() && (i + 1..self.n).all(|j| self.get(i, j).is_zero())
        })
    }

    pub fn is_upper_unipotent(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero()))
    }

    /// Companion pattern: superdiagonal 1s, bottom row `(w_n, ..., w_2, 0)`
    /// given by arbitrary polynomials, zeros elsewhere.
    pub fn is_companion(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let e = self.get(i, j);
                if j == i + 1 {
                    e.is_one()
                } else if i == n - 1 {
                    j == n - 1 && e.is_zero() || j < n - 1
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Diagonal plus superdiagonal 1s with trace identically zero.
    pub fn is_diagonal_gauge(&self) -> bool {
        let n = self.n;
        let shape = (0..n).all(|i| {
            (0..n).all(|j| {
                let e = self.get(i, j);
                if j == i + 1 {
                    e.is_one()
                } else if j == i {
                    true
                } else {
                    e.is_zero()
                }
            })
        });
        shape && self.trace().is_zero()
    }

    /// Inverse of a unit lower- or upper-triangular matrix; polynomial since
    /// the diagonal is 1.
    pub fn unitriangular_inverse(&self) -> Result<Self, GaugeError> {
        if self.is_lower_unipotent() {
            Ok(lower_unipotent_inverse(self))
        } else if self.is_upper_unipotent() {
            Ok(lower_unipotent_inverse(&self.transpose()).transpose())
        } else {
            Err(GaugeError::NotUnipotent)
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Rows of canonical strings, the JSON and golden-file form.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows().map(|r| r.iter().map(DiffPoly::to_string).collect()).collect()
    }

    pub fn substitute<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&JetVar) -> Option<DiffPoly>,
    {
        self.map(|p| p.substitute(&mut f))
    }
}

fn lower_unipotent_inverse(l: &GaugeMatrix) -> GaugeMatrix {
    let n = l.n;
    let mut x = GaugeMatrix::identity(n);
    for j in 0..n {
        for i in j + 1..n {
            let mut acc = DiffPoly::zero();
            for k in j..i {
                let lik = l.get(i, k);
                if !lik.is_zero() && !x.get(k, j).is_zero() {
                    acc -= &(lik * x.get(k, j));
                }
            }
            x.set(i, j, acc);
        }
    }
    x
}

impl fmt::Display for GaugeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(DiffPoly::to_string).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn check_rank(n: usize) -> Result<(), GaugeError> {
    if n < 2 {
        Err(GaugeError::RankTooSmall(n))
    } else {
        Ok(())
    }
}

/// Companion matrix with bottom row `(w[n-2], ..., w[0], 0)`, where `w[0]`
/// plays the role of `w_2`.
pub fn companion_with(w: &[DiffPoly]) -> Result<GaugeMatrix, GaugeError> {
    let n = w.len() + 1;
    check_rank(n)?;
    let mut m = GaugeMatrix::zero(n);
    for i in 0..n - 1 {
        m.set(i, i + 1, DiffPoly::one());
    }
    // A[n-1][k] = w_{n-k}
    for k in 0..n - 1 {
        m.set(n - 1, k, w[n - k - 2].clone());
    }
    Ok(m)
}

/// Drinfel'd–Sokolov gauge with symbolic W-fields `w_2, ..., w_n` when
/// `symbolic` is set, otherwise with a zero bottom row.
pub fn companion_matrix(n: usize, symbolic: bool) -> Result<GaugeMatrix, GaugeError> {
    check_rank(n)?;
    let w: Vec<DiffPoly> = (2..=n as u32)
        .map(|i| if symbolic { DiffPoly::var(JetVar::w(i)) } else { DiffPoly::zero() })
        .collect();
    companion_with(&w)
}

/// Diagonal gauge `diag(a1, a2 - a1, ..., -a_{n-1})` plus superdiagonal 1s.
pub fn diagonal_matrix(n: usize) -> Result<GaugeMatrix, GaugeError> {
    check_rank(n)?;
    let a = |j: usize| DiffPoly::var(JetVar::a(j as u32));
    let mut m = GaugeMatrix::zero(n);
    for i in 0..n {
        let p = if i == 0 {
            a(1)
        } else if i == n - 1 {
            -a(n - 1)
        } else {
            a(i + 1) - a(i)
        };
        m.set(i, i, p);
        if i + 1 < n {
            m.set(i, i + 1, DiffPoly::one());
        }
    }
    Ok(m)
}

/// `N⁻¹(∂N) + N⁻¹AN` for unit triangular `N`.
pub fn gauge_transform(a: &GaugeMatrix, n: &GaugeMatrix) -> Result<GaugeMatrix, GaugeError> {
    a.check_dim(n)?;
    let inv = n.unitriangular_inverse()?;
    let dn = n.derive()?;
    inv.mul(&dn)?.add(&inv.mul(&a.mul(n)?)?)
}

/// The rank-`n` Miura transformation together with the gauge matrix `N₋`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraResult {
    pub n: usize,
    /// `w_2, ..., w_n` as polynomials in the `a`-jets.
    pub w: Vec<DiffPoly>,
    /// Lower unipotent, first subdiagonal `(a_1, ..., a_{n-1})`.
    pub n_minus: GaugeMatrix,
}

impl MiuraResult {
    /// `w_i` for `2 <= i <= n`.
    pub fn w_i(&self, i: usize) -> &DiffPoly {
        &self.w[i - 2]
    }

    pub fn companion(&self) -> GaugeMatrix {
        companion_with(&self.w).expect("rank checked at construction")
    }

    pub fn to_json(&self) -> MiuraJson {
        MiuraJson {
            n: self.n,
            w: self.w.iter().map(DiffPoly::to_string).collect(),
            n_minus: self.n_minus.to_strings(),
        }
    }

    /// One `w_i = ...` line per field, then the starred entries of `N₋`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, w) in self.w.iter().enumerate() {
            out.push_str(&format!("w{} = {}\n", k + 2, w));
        }
        out.push_str("N_minus:\n");
        for i in 0..self.n {
            for j in 0..i {
                out.push_str(&format!("  [{},{}] = {}\n", i + 1, j + 1, self.n_minus.get(i, j)));
            }
        }
        out
    }
}

/// Serialized form: `{ "n": n, "w": [...], "N_minus": [[...]] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiuraJson {
    pub n: usize,
    pub w: Vec<String>,
    #[serde(rename = "N_minus")]
    pub n_minus: Vec<Vec<String>>,
}

/// `(N·D − ∂N − A·N)[i][j]`, the defining residual of `N⁻¹∇N = ∂ + D`.
fn residual_entry(
    n_minus: &GaugeMatrix,
    diag: &GaugeMatrix,
    a: &GaugeMatrix,
    i: usize,
    j: usize,
) -> Result<DiffPoly, GaugeError> {
    let nd = n_minus.product_entry(diag, i, j);
    let dn = n_minus.get(i, j).total_derive()?;
    let an = a.product_entry(n_minus, i, j);
    Ok(nd - dn - an)
}

/// Rank-`n` Miura transformation with the default guard.
pub fn miura_eliminate(n: usize) -> Result<MiuraResult, GaugeError> {
    miura_eliminate_with_guard(n, DEFAULT_RANK_GUARD)
}

/// Solves `N·D = ∂N + A·N` for the starred entries of `N₋` and the fields
/// `w_i`, with `D = diagonal_matrix(n)` known.
///
/// Unknowns are kept at zero until solved. Entry `(i, j)`, `j < i < n-1`,
/// contains `N[i+1][j]` with coefficient −1 and otherwise only rows `<= i`;
/// entry `(n-1, j)` contains `w_{n-j}` with coefficient −1 and otherwise
/// only `w_k` for `k < n-j`. So each residual, evaluated with its pivot at
/// zero, is the pivot's value.
pub fn miura_eliminate_with_guard(n: usize, guard: usize) -> Result<MiuraResult, GaugeError> {
    check_rank(n)?;
    if n > guard {
        return Err(GaugeError::GuardExceeded { n, guard });
    }
    let diag = diagonal_matrix(n)?;
    let mut n_minus = GaugeMatrix::identity(n);
    for j in 0..n - 1 {
        n_minus.set(j + 1, j, DiffPoly::var(JetVar::a(j as u32 + 1)));
    }
    let mut w = vec![DiffPoly::zero(); n - 1];

    // Rows 2..n-1 of N₋ below the first subdiagonal, from the rows above.
    let a_known = companion_with(&w)?;
    for i in 1..n - 1 {
        for j in 0..i {
            let value = residual_entry(&n_minus, &diag, &a_known, i, j)?;
            n_minus.set(i + 1, j, value);
        }
    }

    // Bottom row: w_2 from column n-2, then leftwards up to w_n.
    for j in (0..n - 1).rev() {
        let a = companion_with(&w)?;
        let value = residual_entry(&n_minus, &diag, &a, n - 1, j)?;
        w[n - j - 2] = value;
    }

    Ok(MiuraResult { n, w, n_minus })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> DiffPoly {
        s.parse().unwrap()
    }

    fn m(rows: &[&[&str]]) -> GaugeMatrix {
        GaugeMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect())
    }

    #[test]
    fn companion_examples() {
        assert_eq!(companion_matrix(2, true).unwrap(), m(&[&["0", "1"], &["w2", "0"]]));
        let c3 = companion_matrix(3, true).unwrap();
        assert_eq!(c3, m(&[&["0", "1", "0"], &["0", "0", "1"], &["w3", "w2", "0"]]));
        assert!(c3.is_companion());
        assert_eq!(companion_matrix(1, true), Err(GaugeError::RankTooSmall(1)));
        assert!(!diagonal_matrix(3).unwrap().is_companion());
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diagonal_matrix(2).unwrap(), m(&[&["a1", "1"], &["0", "-a1"]]));
        assert_eq!(
            diagonal_matrix(3).unwrap(),
            m(&[&["a1", "1", "0"], &["0", "a2 - a1", "1"], &["0", "0", "-a2"]])
        );
        let d5 = diagonal_matrix(5).unwrap();
        assert!(d5.trace().is_zero());
        assert!(d5.is_diagonal_gauge());
        assert_eq!(diagonal_matrix(0), Err(GaugeError::RankTooSmall(0)));
    }

    #[test]
    fn gauge_transform_examples() {
        let a = companion_matrix(2, true).unwrap();
        assert_eq!(gauge_transform(&a, &GaugeMatrix::identity(2)).unwrap(), a);
        // Hand product: N⁻¹ = [[1,0],[-a,1]], N⁻¹AN = [[a,1],[w2-a²,-a]], N⁻¹∂N = [[0,0],[∂a,0]].
        let n = m(&[&["1", "0"], &["a1", "1"]]);
        assert_eq!(
            gauge_transform(&a, &n).unwrap(),
            m(&[&["a1", "1"], &["w2 - a1^2 + Da1", "-a1"]])
        );
        let not_unit = m(&[&["2", "0"], &["a1", "1"]]);
        assert_eq!(gauge_transform(&a, &not_unit), Err(GaugeError::NotUnipotent));
    }

    #[test]
    fn inverse_law_with_upper_and_lower() {
        let a = companion_matrix(3, true).unwrap();
        let lower = m(&[&["1", "0", "0"], &["a1*a2", "1", "0"], &["Da2 - 3", "a1^2", "1"]]);
        let upper = lower.transpose();
        for g in [lower, upper] {
            let there = gauge_transform(&a, &g).unwrap();
            let back = gauge_transform(&there, &g.unitriangular_inverse().unwrap()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn miura_rank_two() {
        let r = miura_eliminate(2).unwrap();
        assert_eq!(r.w, vec![p("-Da1 + a1^2")]);
        assert_eq!(r.n_minus, m(&[&["1", "0"], &["a1", "1"]]));
        assert_eq!(r.to_text().lines().next(), Some("w2 = -Da1 + a1^2"));
    }

    #[test]
    fn miura_rank_three_matches_closed_form() {
        let r = miura_eliminate(3).unwrap();
        let w2 = p("-Da1 + a1^2 - Da2 + a2^2 - a1*a2");
        // ∂(∂a1 − a1²) + a1(∂a2 − a2²) + a1²a2
        let inner = p("Da1 - a1^2");
        let w3 = inner.total_derive().unwrap() + p("a1") * p("Da2 - a2^2") + p("a1^2*a2");
        assert_eq!(r.w_i(2), &w2);
        assert_eq!(r.w_i(3), &w3);
        assert_eq!(r.n_minus.get(2, 0), &p("a1^2 - Da1"));
    }

    #[test]
    fn roundtrip_rank_four() {
        let r = miura_eliminate(4).unwrap();
        let back = gauge_transform(&r.companion(), &r.n_minus).unwrap();
        assert_eq!(back, diagonal_matrix(4).unwrap());
        assert!(r.n_minus.is_lower_unipotent());
    }

    #[test]
    fn guard() {
        assert_eq!(
            miura_eliminate(9),
            Err(GaugeError::GuardExceeded { n: 9, guard: DEFAULT_RANK_GUARD })
        );
        assert_eq!(miura_eliminate(1), Err(GaugeError::RankTooSmall(1)));
        assert!(miura_eliminate_with_guard(3, 2).is_err());
    }

    #[test]
    fn json_shape() {
        let json = serde_json::to_string(&miura_eliminate(2).unwrap().to_json()).unwrap();
        assert_eq!(json, r#"{"n":2,"w":["-Da1 + a1^2"],"N_minus":[["1","0"],["a1","1"]]}"#);
    }
}
