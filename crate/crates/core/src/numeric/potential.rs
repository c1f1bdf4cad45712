use serde::{Deserialize, Serialize};

use super::{c64, CMatrix, NumericError, C64};

/// Complex polynomial, coefficients in ascending powers.
fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn trimmed(coeffs: &[C64]) -> &[C64] {
    let len = coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0)).map_or(0, |k| k + 1);
    &coeffs[..len]
}

/// All complex roots of a polynomial (ascending coefficients) by the
/// Aberth–Ehrlich iteration, followed by one Newton polish per root.
pub fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let p = trimmed(coeffs);
    if p.len() <= 1 {
        return Vec::new();
    }
    let degree = p.len() - 1;
    let lead = p[degree];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    let dp: Vec<C64> = monic.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();

    // Cauchy bound for the initial circle.
    let radius = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            C64::from_polar(0.5 * radius, theta)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let z = roots[i];
            let pz = horner(&monic, z);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / horner(&dp, z);
            let repulsion: C64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z - roots[j];
                    if d.norm() == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                roots[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + roots[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for r in &mut roots {
        let d = horner(&dp, *r);
        if d.norm() > 0.0 {
            let step = horner(&monic, *r) / d;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    roots
}

/// Quotient of complex polynomials in `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    num: Vec<C64>,
    den: Vec<C64>,
}

impl RationalFunction {
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self, NumericError> {
        if trimmed(&den).is_empty() {
            return Err(NumericError::InvalidPotential(
                "denominator is identically zero".into(),
            ));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(NumericError::InvalidPotential("non-finite coefficient".into()));
        }
        Ok(RationalFunction { num, den })
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        RationalFunction { num: coeffs, den: vec![c64(1.0, 0.0)] }
    }

    pub fn constant(c: C64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(c64(0.0, 0.0))
    }

    pub fn numerator(&self) -> &[C64] {
        &self.num
    }

    pub fn denominator(&self) -> &[C64] {
        &self.den
    }

    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    /// Roots of the denominator. Common factors with the numerator are not
    /// cancelled, so removable singularities count as poles.
    pub fn poles(&self) -> Vec<C64> {
        polynomial_roots(&self.den)
    }
}

/// Companion connection `A(z)` of rank `n` with concrete `w_2(z), ..., w_n(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    n: usize,
    w: Vec<RationalFunction>,
}

impl PotentialSpec {
    /// `w[0]` is `w_2`.
    pub fn new(n: usize, w: Vec<RationalFunction>) -> Result<Self, NumericError> {
        if n < 2 {
            return Err(NumericError::InvalidPotential(format!("rank {n} is too small")));
        }
        if w.len() != n - 1 {
            return Err(NumericError::InvalidPotential(format!(
                "rank {n} needs {} fields, got {}",
                n - 1,
                w.len()
            )));
        }
        Ok(PotentialSpec { n, w })
    }

    /// All fields zero.
    pub fn zero(n: usize) -> Result<Self, NumericError> {
        Self::new(n, vec![RationalFunction::zero(); n.saturating_sub(1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self, i: usize) -> &RationalFunction {
        &self.w[i - 2]
    }

    pub fn fields(&self) -> &[RationalFunction] {
        &self.w
    }

    /// `w_i(z)` for `2 <= i <= n`.
    pub fn w_at(&self, i: usize, z: C64) -> C64 {
        self.w[i - 2].eval(z)
    }

    pub fn poles(&self) -> Vec<C64> {
        self.w.iter().flat_map(RationalFunction::poles).collect()
    }

    /// Superdiagonal 1s and bottom row `(w_n(z), ..., w_2(z), 0)`.
    pub fn connection_matrix(&self, z: C64) -> CMatrix {
        let n = self.n;
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = c64(1.0, 0.0);
        }
        for k in 0..n - 1 {
            a[(n - 1, k)] = self.w_at(n - k, z);
        }
        a
    }

    pub fn from_json(s: &str) -> Result<Self, NumericError> {
        let file: PotentialFile = serde_json::from_str(s)
            .map_err(|e| NumericError::InvalidPotential(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PotentialFile::from(self)).expect("plain data serializes")
    }
}

/// `{"num": [[re, im], ...], "den": [[re, im], ...]}`, ascending powers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalFile {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

/// `{"n": 3, "w": [w_2, ..., w_n]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialFile {
    pub n: usize,
    pub w: Vec<RationalFile>,
}

fn to_c(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| c64(re, im)).collect()
}

fn from_c(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

impl TryFrom<PotentialFile> for PotentialSpec {
    type Error = NumericError;

    fn try_from(file: PotentialFile) -> Result<Self, Self::Error> {
        let w = file
            .w
            .iter()
            .map(|r| RationalFunction::new(to_c(&r.num), to_c(&r.den)))
            .collect::<Result<Vec<_>, _>>()?;
        PotentialSpec::new(file.n, w)
    }
}

impl From<&PotentialSpec> for PotentialFile {
    fn from(p: &PotentialSpec) -> Self {
        PotentialFile {
            n: p.n,
            w: p.w.iter().map(|r| RationalFile { num: from_c(&r.num), den: from_c(&r.den) }).collect(),
        }
    }
}
