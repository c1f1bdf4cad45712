//! Transition matrices of the rank-2 and rank-3 bundles over Möbius chart
//! changes, and a numeric check of the cocycle identity
//! `φ_αβ(z_β) φ_βγ(z_γ) = φ_αγ(z_γ)`.
//!
//! A chart change `f` sends the source coordinate `z_β` to `z_α = f(z_β)`.
//! Its data are `k = (dz_α/dz_β)⁻¹`, `σ = ∂ log k^{1/2}` and `∂²k`, all
//! differentiated in `z_β`. For `f = (az+b)/(cz+d)` with `ad − bc = 1`
//! this gives `k = (cz+d)²`, `σ = c/(cz+d)` and `∂²k = 2c²`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{c64, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CocycleError {
    #[error("k = {k} lies on the square-root branch cut at z = {z}")]
    BranchCut { z: C64, k: C64 },
    #[error("square-root branches are inconsistent at z = {z}")]
    InconsistentBranch { z: C64 },
    #[error("z = {z} is a pole of the chart change")]
    OutsideDomain { z: C64 },
    #[error("degenerate Möbius coefficients (ad − bc = 0)")]
    Degenerate,
    #[error("unsupported rank {0}, expected 2 or 3")]
    UnsupportedRank(usize),
    #[error("invalid chart file: {0}")]
    InvalidInput(String),
}

/// `z ↦ (az + b)/(cz + d)`, normalized to `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusChart {
    a: C64,
    b: C64,
    c: C64,
    d: C64,
}

impl MobiusChart {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self, CocycleError> {
        let det = a * d - b * c;
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(CocycleError::Degenerate);
        }
        let s = det.sqrt();
        Ok(MobiusChart { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        let (one, zero) = (c64(1.0, 0.0), c64(0.0, 0.0));
        MobiusChart { a: one, b: zero, c: zero, d: one }
    }

    /// `z ↦ z + t`.
    pub fn translation(t: C64) -> Self {
        MobiusChart { b: t, ..Self::identity() }
    }

    /// `z ↦ λz`.
    pub fn scaling(lambda: C64) -> Result<Self, CocycleError> {
        Self::new(lambda, c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0))
    }

    pub fn coefficients(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    fn denominator(&self, z: C64) -> Result<C64, CocycleError> {
        let q = self.c * z + self.d;
        if q.norm() == 0.0 {
            Err(CocycleError::OutsideDomain { z })
        } else {
            Ok(q)
        }
    }

    pub fn apply(&self, z: C64) -> Result<C64, CocycleError> {
        Ok((self.a * z + self.b) / self.denominator(z)?)
    }

    /// `f'(z) = 1/(cz+d)²`.
    pub fn derivative(&self, z: C64) -> Result<C64, CocycleError> {
        let q = self.denominator(z)?;
        Ok(1.0 / (q * q))
    }

    /// `f'' = −2c/(cz+d)³`.
    pub fn second_derivative(&self, z: C64) -> Result<C64, CocycleError> {
        let q = self.denominator(z)?;
        Ok(-2.0 * self.c / (q * q * q))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusChart) -> MobiusChart {
        MobiusChart {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }
}

/// Which square root of `k` the rank-2 matrix uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqrtBranch {
    #[default]
    Principal,
    Negated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionData {
    pub k: C64,
    pub k_sqrt: C64,
    pub sigma: C64,
    pub d2k: C64,
}

fn on_cut(k: C64) -> bool {
    k.im == 0.0 && k.re <= 0.0
}

pub fn transition_data(
    chart: &MobiusChart,
    z: C64,
    branch: SqrtBranch,
) -> Result<TransitionData, CocycleError> {
    let q = chart.denominator(z)?;
    let k = q * q;
    if on_cut(k) {
        return Err(CocycleError::BranchCut { z, k });
    }
    let root = k.sqrt();
    let k_sqrt = match branch {
        SqrtBranch::Principal => root,
        SqrtBranch::Negated => -root,
    };
    Ok(TransitionData { k, k_sqrt, sigma: chart.c / q, d2k: 2.0 * chart.c * chart.c })
}

/// `[[k^{-1/2}, 0], [∂k^{1/2}, k^{1/2}]]` at `z`.
pub fn transition_rank2(
    chart: &MobiusChart,
    z: C64,
    branch: SqrtBranch,
) -> Result<CMatrix, CocycleError> {
    let t = transition_data(chart, z, branch)?;
    // ∂k^{1/2} = k'/(2 k^{1/2}) = σ k^{1/2}.
    let zero = c64(0.0, 0.0);
    Ok(CMatrix::from_row_slice(2, 2, &[1.0 / t.k_sqrt, zero, t.sigma * t.k_sqrt, t.k_sqrt]))
}

/// `[[k⁻¹, 0, 0], [2σ, 1, 0], [∂²k, 2kσ, k]]` at `z`.
pub fn transition_rank3(chart: &MobiusChart, z: C64) -> Result<CMatrix, CocycleError> {
    let q = chart.denominator(z)?;
    let k = q * q;
    let sigma = chart.c / q;
    let d2k = 2.0 * chart.c * chart.c;
    let (zero, one) = (c64(0.0, 0.0), c64(1.0, 0.0));
    Ok(CMatrix::from_row_slice(
        3,
        3,
        &[1.0 / k, zero, zero, 2.0 * sigma, one, zero, d2k, 2.0 * k * sigma, k],
    ))
}

/// Diagonal of the rank-`r` transition as powers of `k^{1/2}`.
pub fn diagonal_half_powers(rank: usize) -> Result<Vec<i32>, CocycleError> {
    match rank {
        2 => Ok(vec![-1, 1]),
        3 => Ok(vec![-2, 0, 2]),
        r => Err(CocycleError::UnsupportedRank(r)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDeviation {
    /// Point in the `γ` chart.
    pub z: [f64; 2],
    pub deviation: f64,
    /// Largest `|det φ − 1|` among the three matrices.
    pub det_error: f64,
    /// Largest strictly upper entry among the three matrices.
    pub upper_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleReport {
    pub rank: usize,
    pub branches: [SqrtBranch; 3],
    pub tol: f64,
    pub max_deviation: f64,
    pub max_det_error: f64,
    pub max_upper: f64,
    pub passed: bool,
    pub points: Vec<PointDeviation>,
}

fn upper_max(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Checks `φ_αβ(f_bg(p)) φ_βγ(p) = φ_αγ(p)` with `f_ag = f_ab ∘ f_bg` at each
/// point `p` of the `γ` chart. In rank 2, `branches` picks the roots for
/// `φ_αβ`, `φ_βγ`, `φ_αγ` in that order; they must satisfy
/// `√k_αβ √k_βγ = √k_αγ`.
pub fn verify_cocycle(
    rank: usize,
    f_ab: &MobiusChart,
    f_bg: &MobiusChart,
    points: &[C64],
    branches: [SqrtBranch; 3],
    tol: f64,
) -> Result<CocycleReport, CocycleError> {
    if rank != 2 && rank != 3 {
        return Err(CocycleError::UnsupportedRank(rank));
    }
    let f_ag = f_ab.compose(f_bg);
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        let zb = f_bg.apply(p)?;
        let (ab, bg, ag) = if rank == 2 {
            let (dab, dbg, dag) = (
                transition_data(f_ab, zb, branches[0])?,
                transition_data(f_bg, p, branches[1])?,
                transition_data(&f_ag, p, branches[2])?,
            );
            // The two products agree up to sign; the wrong sign means the
            // points sit on different sheets.
            let prod = dab.k_sqrt * dbg.k_sqrt;
            if (prod + dag.k_sqrt).norm() < (prod - dag.k_sqrt).norm() {
                return Err(CocycleError::InconsistentBranch { z: p });
            }
            (
                transition_rank2(f_ab, zb, branches[0])?,
                transition_rank2(f_bg, p, branches[1])?,
                transition_rank2(&f_ag, p, branches[2])?,
            )
        } else {
            (transition_rank3(f_ab, zb)?, transition_rank3(f_bg, p)?, transition_rank3(&f_ag, p)?)
        };
        let deviation = (&ab * &bg - &ag).norm();
        let one = c64(1.0, 0.0);
        let det_error = [&ab, &bg, &ag]
            .iter()
            .map(|m| (m.determinant() - one).norm())
            .fold(0.0, f64::max);
        let upper = [&ab, &bg, &ag].iter().map(|m| upper_max(m)).fold(0.0, f64::max);
        out.push(PointDeviation { z: [p.re, p.im], deviation, det_error, upper_max: upper });
    }
    let max_of = |f: fn(&PointDeviation) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max_deviation = max_of(|d| d.deviation);
    let max_det_error = max_of(|d| d.det_error);
    let max_upper = max_of(|d| d.upper_max);
    Ok(CocycleReport {
        rank,
        branches,
        tol,
        max_deviation,
        max_det_error,
        max_upper,
        passed: max_deviation < tol,
        points: out,
    })
}

/// Chart-change file: two Möbius maps as `[a, b, c, d]` of `[re, im]` pairs
/// and the evaluation points in the `γ` chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartFile {
    pub f_ab: [[f64; 2]; 4],
    pub f_bg: [[f64; 2]; 4],
    pub points: Vec<[f64; 2]>,
    /// Roots for `φ_αβ`, `φ_βγ`, `φ_αγ`; all principal when absent.
    #[serde(default)]
    pub branches: [SqrtBranch; 3],
}

impl ChartFile {
    pub fn from_json(s: &str) -> Result<Self, CocycleError> {
        let file: ChartFile =
            serde_json::from_str(s).map_err(|e| CocycleError::InvalidInput(e.to_string()))?;
        if file.points.is_empty() {
            return Err(CocycleError::InvalidInput("no evaluation points".into()));
        }
        Ok(file)
    }

    pub fn charts(&self) -> Result<(MobiusChart, MobiusChart), CocycleError> {
        let chart = |c: &[[f64; 2]; 4]| {
            let [a, b, cc, d] = c.map(|[re, im]| c64(re, im));
            MobiusChart::new(a, b, cc, d)
        };
        Ok((chart(&self.f_ab)?, chart(&self.f_bg)?))
    }

    pub fn points(&self) -> Vec<C64> {
        self.points.iter().map(|&[re, im]| c64(re, im)).collect()
    }
}
