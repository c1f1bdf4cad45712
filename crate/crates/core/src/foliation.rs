//! Foliation forms on the big cell.
//!
//! Fiber coordinates `u_m` parametrize lower unipotent matrices `σ₋(u)`. The
//! flat connection pulled back along `(z, u) ↦ σ₋(u)` gives
//!
//! ```text
//! Ã = σ₋⁻¹dσ₋ + σ₋⁻¹Aσ₋ dz
//! ```
//!
//! whose strictly lower part `ω⁻` cuts out the rank-one horizontal foliation
//! and whose remaining dz-part is the diagonal gauge in the `u` variables.
//! The Miura solution `u = N₋(a)` is an integral graph of `ω⁻ = 0`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffalg::{DiffAlgError, DiffPoly, Family, JetVar};
use crate::gauge::{
    companion_matrix, miura_eliminate, GaugeError, GaugeMatrix, MiuraResult,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoliationError {
    #[error("form {0} breaks the triangular du structure")]
    NotTriangular(usize),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    DiffAlg(#[from] DiffAlgError),
}

/// Strictly lower positions `(row, col)` (0-based) in coordinate order:
/// by distance from the diagonal, then by column. Coordinate `u_m` sits at
/// index `m - 1`. For n = 3 this is `u1 = (2,1)`, `u2 = (3,2)`, `u3 = (3,1)`
/// in 1-based labels.
pub fn coordinate_positions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for offset in 1..n {
        for j in 0..n - offset {
            out.push((j + offset, j));
        }
    }
    out
}

fn check_rank(n: usize) -> Result<(), FoliationError> {
    if n < 2 {
        Err(GaugeError::RankTooSmall(n).into())
    } else {
        Ok(())
    }
}

/// Lower unipotent matrix with `u_m` at the `m`-th coordinate position.
pub fn sigma_minus(n: usize) -> Result<GaugeMatrix, FoliationError> {
    check_rank(n)?;
    let mut s = GaugeMatrix::identity(n);
    for (m, &(i, j)) in coordinate_positions(n).iter().enumerate() {
        s.set(i, j, DiffPoly::var(JetVar::u(m as u32 + 1)));
    }
    Ok(s)
}

/// A 1-form `f dz + Σ g_m du_m` with polynomial coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OneForm {
    pub dz: DiffPoly,
    /// Absent indices are zero.
    pub du: BTreeMap<usize, DiffPoly>,
}

impl OneForm {
    pub fn du_coefficient(&self, m: usize) -> DiffPoly {
        self.du.get(&m).cloned().unwrap_or_default()
    }

    /// Contraction with `∂_z + Σ g_m ∂_{u_m}`.
    pub fn contract(&self, field: &VectorField) -> DiffPoly {
        let mut acc = self.dz.clone();
        for (m, c) in &self.du {
            if let Some(g) = field.components.get(m) {
                acc += &(c * g);
            }
        }
        acc
    }

    fn insert_du(&mut self, m: usize, c: DiffPoly) {
        if !c.is_zero() {
            let slot = self.du.entry(m).or_default();
            *slot += &c;
            if slot.is_zero() {
                self.du.remove(&m);
            }
        }
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (m, c) in &self.du {
            if c.is_one() {
                parts.push(format!("du{m}"));
            } else {
                parts.push(format!("({c}) du{m}"));
            }
        }
        if !self.dz.is_zero() {
            parts.push(format!("({}) dz", self.dz));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// The n(n−1)/2 forms `ω⁻`, one per coordinate, in coordinate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoliationSystem {
    pub n: usize,
    pub positions: Vec<(usize, usize)>,
    pub forms: Vec<OneForm>,
}

impl FoliationSystem {
    /// 1-based coordinate index of a 0-based strictly lower position.
    pub fn u_index(&self, i: usize, j: usize) -> Option<usize> {
        self.positions.iter().position(|&p| p == (i, j)).map(|k| k + 1)
    }

    /// Form `m` (1-based) has `du_m` coefficient 1 and otherwise only
    /// earlier `du`'s.
    pub fn check_triangular(&self) -> Result<(), FoliationError> {
        for (k, form) in self.forms.iter().enumerate() {
            let m = k + 1;
            let ok = form.du_coefficient(m).is_one() && form.du.keys().all(|&l| l <= m);
            if !ok {
                return Err(FoliationError::NotTriangular(m));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, form) in self.forms.iter().enumerate() {
            let (i, j) = self.positions[k];
            out.push_str(&format!("omega{} [{},{}] = {}\n", k + 1, i + 1, j + 1, form));
        }
        out
    }

    pub fn to_json(&self) -> FoliationJson {
        FoliationJson {
            n: self.n,
            coordinates: self
                .positions
                .iter()
                .enumerate()
                .map(|(k, &(i, j))| CoordinateJson { u: k + 1, row: i + 1, col: j + 1 })
                .collect(),
            forms: self
                .forms
                .iter()
                .map(|f| FormJson {
                    du: f.du.iter().map(|(m, c)| (format!("u{m}"), c.to_string())).collect(),
                    dz: f.dz.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateJson {
    pub u: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub du: BTreeMap<String, String>,
    pub dz: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoliationJson {
    pub n: usize,
    pub coordinates: Vec<CoordinateJson>,
    pub forms: Vec<FormJson>,
}

/// `σ₋⁻¹ A σ₋` for the symbolic companion matrix.
fn conjugated_companion(n: usize) -> Result<GaugeMatrix, FoliationError> {
    let sigma = sigma_minus(n)?;
    let inv = sigma.unitriangular_inverse()?;
    let a = companion_matrix(n, true)?;
    Ok(inv.mul(&a.mul(&sigma)?)?)
}

/// The forms `ω⁻ = σ₋⁻¹dσ₋ + (σ₋⁻¹Aσ₋)⁻ dz`.
pub fn omega_minus(n: usize) -> Result<FoliationSystem, FoliationError> {
    check_rank(n)?;
    let positions = coordinate_positions(n);
    let sigma = sigma_minus(n)?;
    let inv = sigma.unitriangular_inverse()?;
    let conj = conjugated_companion(n)?;
    let index_of = |i: usize, j: usize| positions.iter().position(|&p| p == (i, j)).unwrap() + 1;

    let forms = positions
        .iter()
        .map(|&(i, j)| {
            let mut form = OneForm { dz: conj.get(i, j).clone(), du: BTreeMap::new() };
            // (σ⁻¹ dσ)[i][j] = Σ_{j<k<=i} σ⁻¹[i][k] du_{(k,j)}
            for k in j + 1..=i {
                form.insert_du(index_of(k, j), inv.get(i, k).clone());
            }
            form
        })
        .collect();
    Ok(FoliationSystem { n, positions, forms })
}

/// The dz-part of `Ã` once `ω⁻` is killed: `diag(u1, u2 − u1, ..., −u_{n−1})`
/// plus superdiagonal 1s.
pub fn partial_connection_matrix(n: usize) -> Result<GaugeMatrix, FoliationError> {
    Ok(conjugated_companion(n)?.upper())
}

/// Components `g_m` of the vector field `∂_z + Σ g_m ∂_{u_m}` spanning the
/// foliation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VectorField {
    pub components: BTreeMap<usize, DiffPoly>,
}

impl VectorField {
    pub fn component(&self, m: usize) -> DiffPoly {
        self.components.get(&m).cloned().unwrap_or_default()
    }
}

/// Back-substitution through the triangular `du` structure: form `m` gives
/// `g_m = −f_m − Σ_{l<m} c_{ml} g_l`.
pub fn foliation_vector_field(sys: &FoliationSystem) -> Result<VectorField, FoliationError> {
    sys.check_triangular()?;
    let mut field = VectorField::default();
    for (k, form) in sys.forms.iter().enumerate() {
        let m = k + 1;
        let mut g = -&form.dz;
        for (&l, c) in &form.du {
            if l != m {
                g -= &(c * &field.component(l));
            }
        }
        field.components.insert(m, g);
    }
    Ok(field)
}

/// Derivative along the leaves: `∂_z f + Σ g_m ∂f/∂u_m`, with `∂_z` acting
/// on field jets only.
pub fn leaf_derivative(f: &DiffPoly, field: &VectorField) -> Result<DiffPoly, FoliationError> {
    let mut out = f.derive_fields()?;
    for (&m, g) in &field.components {
        let du = f.partial_u(m as u32);
        if !du.is_zero() {
            out += &(&du * g);
        }
    }
    Ok(out)
}

/// Substitution `u_m ↦ N₋[position m]`, `w_i ↦ w_i(a)`.
fn graph_map<'a>(
    sys: &'a FoliationSystem,
    n_minus: &'a GaugeMatrix,
    w: &'a [DiffPoly],
) -> impl FnMut(&JetVar) -> Option<DiffPoly> + 'a {
    move |v: &JetVar| match v.family() {
        Family::Coordinate => sys
            .positions
            .get(v.index() as usize - 1)
            .map(|&(i, j)| n_minus.get(i, j).clone()),
        Family::WField if v.order() == 0 => w.get(v.index() as usize - 2).cloned(),
        _ => None,
    }
}

/// Pulls each form back along `u = N₋(a)`, `w = w(a)`, with
/// `du_m ↦ ∂(N₋[position m]) dz`, and returns the dz-coefficients.
pub fn graph_residuals(
    sys: &FoliationSystem,
    n_minus: &GaugeMatrix,
    w: &[DiffPoly],
) -> Result<Vec<DiffPoly>, FoliationError> {
    let slopes = sys
        .positions
        .iter()
        .map(|&(i, j)| n_minus.get(i, j).total_derive())
        .collect::<Result<Vec<_>, _>>()?;
    sys.forms
        .iter()
        .map(|form| {
            let mut acc = form.dz.substitute(graph_map(sys, n_minus, w));
            for (&m, c) in &form.du {
                acc += &(&c.substitute(graph_map(sys, n_minus, w)) * &slopes[m - 1]);
            }
            Ok(acc)
        })
        .collect()
}

/// Result of [`verify_miura_graph`]: both lists vanish identically when the
/// Miura solution is an integral graph of the foliation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphReport {
    pub n: usize,
    /// Pulled-back forms, one per coordinate.
    pub residuals: Vec<DiffPoly>,
    /// `g_m(graph) − ∂N₋[position m]`: tangency of the graph to the
    /// vector field, a second route to the same statement.
    pub tangent_residuals: Vec<DiffPoly>,
}

impl GraphReport {
    pub fn is_exact(&self) -> bool {
        self.residuals.iter().chain(&self.tangent_residuals).all(DiffPoly::is_zero)
    }
}

pub fn graph_report(
    sys: &FoliationSystem,
    miura: &MiuraResult,
) -> Result<GraphReport, FoliationError> {
    let residuals = graph_residuals(sys, &miura.n_minus, &miura.w)?;
    let field = foliation_vector_field(sys)?;
    let tangent_residuals = sys
        .positions
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let g = field.component(k + 1).substitute(graph_map(sys, &miura.n_minus, &miura.w));
            Ok(g - miura.n_minus.get(i, j).total_derive()?)
        })
        .collect::<Result<Vec<_>, FoliationError>>()?;
    Ok(GraphReport { n: sys.n, residuals, tangent_residuals })
}

/// Checks symbolically that the rank-`n` Miura solution solves `ω⁻ = 0`.
pub fn verify_miura_graph(n: usize) -> Result<GraphReport, FoliationError> {
    let miura = miura_eliminate(n)?;
    graph_report(&omega_minus(n)?, &miura)
}
