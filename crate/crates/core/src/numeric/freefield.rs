use serde::Serialize;

use super::fd::central_weights;
use super::{
    gauss_factorize, integrate_fundamental, CMatrix, IntegrationOptions, NumericError, Path,
    PotentialSpec, C64,
};
use crate::diffalg::{JetAssignment, JetVar};
use crate::gauge::miura_eliminate;

/// Settings for the free-field pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeFieldOptions {
    pub integration: IntegrationOptions,
    /// Absolute threshold on `|Δ_k|` below which a sample is off the big cell.
    pub minor_tol: f64,
    /// Half width `r` of the central stencil `-r..=r` used for jets of `a_j`.
    pub stencil_half_width: usize,
}

impl Default for FreeFieldOptions {
    fn default() -> Self {
        FreeFieldOptions {
            integration: IntegrationOptions::default(),
            minor_tol: 1e-9,
            stencil_half_width: 4,
        }
    }
}

/// Free fields at one sample; `a` is `None` off the big cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeFieldSample {
    pub z: C64,
    pub segment: usize,
    pub t: f64,
    pub minors: Vec<C64>,
    pub a: Option<Vec<C64>>,
    pub in_big_cell: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeFieldTrace {
    pub n: usize,
    pub samples: Vec<FreeFieldSample>,
    /// Relative drift of `det M` along the integration.
    pub det_drift: f64,
}

impl FreeFieldTrace {
    /// Samples with some `|Δ_k| <= minor_tol`.
    pub fn violations(&self) -> impl Iterator<Item = &FreeFieldSample> {
        self.samples.iter().filter(|s| !s.in_big_cell)
    }
}

/// Integrates the flat frame from `m0` and Gauss-factorizes it at every
/// sample; `a_j` is read off the first subdiagonal of `N₋`.
pub fn free_fields_along_path(
    pot: &PotentialSpec,
    path: &Path,
    m0: &CMatrix,
    opts: &FreeFieldOptions,
) -> Result<FreeFieldTrace, NumericError> {
    let sol = integrate_fundamental(pot, path, m0, &opts.integration)?;
    let samples = sol
        .samples
        .iter()
        .map(|s| {
            let g = gauss_factorize(&s.m, opts.minor_tol);
            FreeFieldSample {
                z: s.z,
                segment: s.segment,
                t: s.t,
                a: g.free_fields(),
                in_big_cell: g.in_big_cell,
                minors: g.minors,
            }
        })
        .collect();
    Ok(FreeFieldTrace { n: pot.n(), samples, det_drift: sol.max_det_drift() })
}

/// Miura residuals at one interior sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub z: [f64; 2],
    /// `|w_i(a) − w_i(z)| / max(1, |w_i(z)|)` for `i = 2..=n`.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiuraNumericReport {
    pub n: usize,
    /// Largest residual per `w_i`, `i = 2..=n`.
    pub max_residual: Vec<f64>,
    pub points: Vec<ResidualPoint>,
    pub det_drift: f64,
}

impl MiuraNumericReport {
    pub fn worst(&self) -> f64 {
        self.max_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the symbolic Miura map on numerically obtained free fields and
/// compares with the potential.
///
/// Jets `∂^k a_j`, `k <= n−1`, come from central differences within each
/// segment (the parameter is uniform there, `d/dz = (1/Δz) d/dt`), so only
/// samples at least `r` steps from both segment ends are checked.
pub fn verify_miura_numeric(
    pot: &PotentialSpec,
    path: &Path,
    m0: &CMatrix,
    opts: &FreeFieldOptions,
) -> Result<MiuraNumericReport, NumericError> {
    let n = pot.n();
    let trace = free_fields_along_path(pot, path, m0, opts)?;
    if let Some(bad) = trace.violations().next() {
        return Err(NumericError::BigCellViolation { z: bad.z });
    }
    let miura = miura_eliminate(n)?;
    let max_order = n - 1;
    let r = opts.stencil_half_width;
    if 2 * r < max_order {
        return Err(NumericError::InsufficientSamples(format!(
            "a stencil of half width {r} cannot resolve derivatives of order {max_order}"
        )));
    }
    let weights = central_weights(r, max_order);
    let hint = path.samples_hint() as f64;
    let vertices = path.vertices();

    let mut points = Vec::new();
    let mut max_residual = vec![0.0f64; n - 1];
    for segment in 0..vertices.len() - 1 {
        let dz = vertices[segment + 1] - vertices[segment];
        if dz.norm() == 0.0 {
            continue;
        }
        // Uniform samples of this segment including both ends.
        let seg: Vec<&FreeFieldSample> = trace
            .samples
            .iter()
            .filter(|s| {
                (s.segment == segment && (s.t > 0.0 || segment == 0))
                    || (segment > 0 && s.segment == segment - 1 && s.t == 1.0)
            })
            .collect();
        if seg.len() < 2 * r + 1 {
            continue;
        }
        let step = dz / hint;
        for idx in r..seg.len() - r {
            let mut sigma = JetAssignment::new();
            for j in 0..n - 1 {
                let value = |s: &FreeFieldSample| s.a.as_ref().expect("checked in big cell")[j];
                sigma.insert(JetVar::a(j as u32 + 1), value(seg[idx]));
                for (k, w) in weights.iter().enumerate().skip(1) {
                    let mut acc = C64::new(0.0, 0.0);
                    for (off, c) in w.iter().enumerate() {
                        acc += value(seg[idx + off - r]) * *c;
                    }
                    sigma.insert(JetVar::a_jet(j as u32 + 1, k as u32), acc / step.powu(k as u32));
                }
            }
            let z = seg[idx].z;
            let mut residuals = Vec::with_capacity(n - 1);
            for i in 2..=n {
                let computed = miura.w_i(i).evaluate(&sigma)?;
                let expected = pot.w_at(i, z);
                let res = (computed - expected).norm() / expected.norm().max(1.0);
                max_residual[i - 2] = max_residual[i - 2].max(res);
                residuals.push(res);
            }
            points.push(ResidualPoint { z: [z.re, z.im], residuals });
        }
    }
    if points.is_empty() {
        return Err(NumericError::InsufficientSamples(format!(
            "no segment has the {} samples a stencil of half width {r} needs",
            2 * r + 1
        )));
    }
    Ok(MiuraNumericReport { n, max_residual, points, det_drift: trace.det_drift })
}
