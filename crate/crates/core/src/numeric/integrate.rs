//! Flat sections `dM/dz = −A(z)·M` along a polygonal path.
//!
//! Each segment `z(t) = z0 + t (z1 − z0)`, `t ∈ [0, 1]`, is integrated with
//! the Dormand–Prince 5(4) pair in the real parameter `t`. Steps are clipped
//! so that every sample point is hit exactly; values between samples come
//! from cubic Hermite interpolation.

use super::{c64, CMatrix, NumericError, Path, PotentialSpec, C64};

/// Integration settings.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationOptions {
    /// Local relative tolerance; the absolute floor uses the same value.
    pub rtol: f64,
    /// Pole-exclusion radius as a fraction of the path's bounding diameter.
    pub exclusion_factor: f64,
    /// Step budget over the whole path.
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { rtol: 1e-10, exclusion_factor: 1e-3, max_steps: 2_000_000 }
    }
}

/// `M` at one sample point.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub z: C64,
    /// Segment index and local parameter `t ∈ [0, 1]`.
    pub segment: usize,
    pub t: f64,
    pub m: CMatrix,
}

/// Flat frame sampled along a path; the first and last samples are the
/// path endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalSolution {
    pub path: Path,
    pub samples: Vec<Sample>,
    /// Accepted integration steps.
    pub steps: usize,
}

impl FundamentalSolution {
    pub fn start(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn end(&self) -> &Sample {
        self.samples.last().expect("at least one sample")
    }

    /// Largest `|det M(z) − det M0| / |det M0|` over the samples.
    pub fn max_det_drift(&self) -> f64 {
        let d0 = self.start().m.determinant();
        self.samples
            .iter()
            .map(|s| (s.m.determinant() - d0).norm() / d0.norm())
            .fold(0.0, f64::max)
    }

    /// Cubic Hermite value at parameter `t` of `segment`, using `M` and
    /// `dM/dt` at the two bracketing samples.
    pub fn dense_at(&self, pot: &PotentialSpec, segment: usize, t: f64) -> Option<CMatrix> {
        let on_segment: Vec<&Sample> = self
            .samples
            .iter()
            .filter(|s| s.segment == segment || (s.segment + 1 == segment && s.t == 1.0))
            .collect();
        let (z0, z1) = (self.path.vertices()[segment], self.path.vertices()[segment + 1]);
        let dz = z1 - z0;
        let param = |s: &Sample| if s.segment == segment { s.t } else { 0.0 };
        let pair = on_segment.windows(2).find(|w| param(w[0]) <= t && t <= param(w[1]))?;
        let (s0, s1) = (pair[0], pair[1]);
        let (t0, t1) = (param(s0), param(s1));
        let h = t1 - t0;
        if h == 0.0 {
            return Some(s0.m.clone());
        }
        let slope = |s: &Sample| -(pot.connection_matrix(s.z) * &s.m) * dz;
        let x = (t - t0) / h;
        let h00 = 2.0 * x.powi(3) - 3.0 * x.powi(2) + 1.0;
        let h10 = x.powi(3) - 2.0 * x.powi(2) + x;
        let h01 = -2.0 * x.powi(3) + 3.0 * x.powi(2);
        let h11 = x.powi(3) - x.powi(2);
        Some(
            &s0.m * c64(h00, 0.0)
                + slope(s0) * c64(h10 * h, 0.0)
                + &s1.m * c64(h01, 0.0)
                + slope(s1) * c64(h11 * h, 0.0),
        )
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Segment<'a> {
    pot: &'a PotentialSpec,
    z0: C64,
    dz: C64,
}

impl Segment<'_> {
    fn z(&self, t: f64) -> C64 {
        self.z0 + self.dz * t
    }

    fn rhs(&self, t: f64, y: &CMatrix) -> CMatrix {
        -(self.pot.connection_matrix(self.z(t)) * y) * self.dz
    }
}

fn combo(y: &CMatrix, h: f64, ks: &[&CMatrix], coeffs: &[f64]) -> CMatrix {
    let mut out = y.clone();
    for (k, &a) in ks.iter().zip(coeffs) {
        if a != 0.0 {
            out += *k * c64(h * a, 0.0);
        }
    }
    out
}

/// Integrates `dM/dz = −A(z)·M` from `m0` along `path`.
pub fn integrate_fundamental(
    pot: &PotentialSpec,
    path: &Path,
    m0: &CMatrix,
    opts: &IntegrationOptions,
) -> Result<FundamentalSolution, NumericError> {
    let n = pot.n();
    if m0.nrows() != n || m0.ncols() != n {
        return Err(NumericError::InvalidFrame(format!(
            "initial frame is {}x{}, rank is {n}",
            m0.nrows(),
            m0.ncols()
        )));
    }
    let det0 = m0.determinant();
    if !(det0.norm() > 0.0 && det0.is_finite()) {
        return Err(NumericError::InvalidFrame("initial frame is singular".into()));
    }
    if opts.rtol.is_nan() || opts.rtol <= 0.0 {
        return Err(NumericError::InvalidFrame("rtol must be positive".into()));
    }
    path.check_clearance(&pot.poles(), opts.exclusion_factor)?;

    let vertices = path.vertices();
    let hint = path.samples_hint();
    let mut samples =
        vec![Sample { z: vertices[0], segment: 0, t: 0.0, m: m0.clone() }];
    let mut y = m0.clone();
    let mut steps = 0usize;

    for (s, pair) in vertices.windows(2).enumerate() {
        let seg = Segment { pot, z0: pair[0], dz: pair[1] - pair[0] };
        if seg.dz == c64(0.0, 0.0) {
            samples.push(Sample { z: pair[1], segment: s, t: 1.0, m: y.clone() });
            continue;
        }
        let mut t = 0.0;
        let mut h = (1.0 / hint as f64).min(0.05);
        let mut k1 = seg.rhs(0.0, &y);
        for k in 1..=hint {
            let target = k as f64 / hint as f64;
            while t < target {
                if steps >= opts.max_steps {
                    return Err(NumericError::StepUnderflow { z: seg.z(t) });
                }
                let clipped = t + h >= target;
                let step = if clipped { target - t } else { h };
                let k2 = seg.rhs(t + C[1] * step, &combo(&y, step, &[&k1], &A2));
                let k3 = seg.rhs(t + C[2] * step, &combo(&y, step, &[&k1, &k2], &A3));
                let k4 = seg.rhs(t + C[3] * step, &combo(&y, step, &[&k1, &k2, &k3], &A4));
                let k5 =
                    seg.rhs(t + C[4] * step, &combo(&y, step, &[&k1, &k2, &k3, &k4], &A5));
                let k6 = seg.rhs(
                    t + C[5] * step,
                    &combo(&y, step, &[&k1, &k2, &k3, &k4, &k5], &A6),
                );
                let y_new = combo(&y, step, &[&k1, &k2, &k3, &k4, &k5, &k6], &B);
                let k7 = seg.rhs(t + step, &y_new);
                let err_vec = combo(
                    &CMatrix::zeros(n, n),
                    step,
                    &[&k1, &k2, &k3, &k4, &k5, &k6, &k7],
                    &E,
                );

                let mut sum = 0.0;
                for ((e, a), b) in err_vec.iter().zip(y.iter()).zip(y_new.iter()) {
                    let scale = opts.rtol * (1.0 + a.norm().max(b.norm()));
                    sum += (e.norm() / scale).powi(2);
                }
                let err = (sum / (n * n) as f64).sqrt();
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };

                if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                    t = if clipped { target } else { t + step };
                    y = y_new;
                    k1 = k7;
                    steps += 1;
                    let proposal = step * factor;
                    h = if clipped { h.max(proposal) } else { proposal };
                } else {
                    h = step * factor.min(0.9);
                }
                if h < 1e-14 {
                    return Err(NumericError::StepUnderflow { z: seg.z(t) });
                }
            }
            samples.push(Sample { z: seg.z(target), segment: s, t: target, m: y.clone() });
        }
        // Land exactly on the vertex.
        if let Some(last) = samples.last_mut() {
            last.z = pair[1];
        }
    }

    log::debug!("integrated {} samples in {steps} steps", samples.len());
    Ok(FundamentalSolution { path: path.clone(), samples, steps })
}
