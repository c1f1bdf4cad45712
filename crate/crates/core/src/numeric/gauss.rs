use super::{CMatrix, C64};

/// `M = N₋ B₊` with `N₋` lower unipotent and `B₊` upper triangular.
///
/// The factorization exists exactly on the big cell, where every leading
/// principal minor is nonzero. Off the big cell the minors are still
/// reported and both factors are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussResult {
    pub n_minus: Option<CMatrix>,
    pub b_plus: Option<CMatrix>,
    /// Leading principal minors `Δ_1, ..., Δ_n`.
    pub minors: Vec<C64>,
    pub in_big_cell: bool,
}

impl GaussResult {
    /// First subdiagonal of `N₋`: the free fields `a_1, ..., a_{n−1}`.
    pub fn free_fields(&self) -> Option<Vec<C64>> {
        let n = self.n_minus.as_ref()?;
        Some((0..n.nrows() - 1).map(|j| n[(j + 1, j)]).collect())
    }

    /// Index (1-based) of the first minor at or below `tol`.
    pub fn first_vanishing_minor(&self, tol: f64) -> Option<usize> {
        self.minors.iter().position(|m| m.norm() <= tol).map(|k| k + 1)
    }
}

/// Leading principal minors, each from its own determinant.
pub fn leading_minors(m: &CMatrix) -> Vec<C64> {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).into_owned().determinant()).collect()
}

/// Doolittle elimination without pivoting. `tol` is an absolute threshold on
/// `|Δ_k|`.
pub fn gauss_factorize(m: &CMatrix, tol: f64) -> GaussResult {
    assert!(m.is_square(), "gauss_factorize needs a square matrix");
    let n = m.nrows();
    let minors = leading_minors(m);
    let in_big_cell = minors.iter().all(|d| d.norm() > tol);
    if !in_big_cell {
        return GaussResult { n_minus: None, b_plus: None, minors, in_big_cell };
    }

    let mut lower = CMatrix::identity(n, n);
    let mut upper = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = m[(i, j)];
            for k in 0..i {
                s -= lower[(i, k)] * upper[(k, j)];
            }
            upper[(i, j)] = s;
        }
        for r in i + 1..n {
            let mut s = m[(r, i)];
            for k in 0..i {
                s -= lower[(r, k)] * upper[(k, i)];
            }
            lower[(r, i)] = s / upper[(i, i)];
        }
    }
    GaussResult { n_minus: Some(lower), b_plus: Some(upper), minors, in_big_cell }
}
