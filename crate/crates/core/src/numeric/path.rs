use serde::{Deserialize, Serialize};

use super::{c64, NumericError, C64};

/// Default number of uniform subintervals per path segment.
pub const DEFAULT_SAMPLES_HINT: usize = 64;

/// Polygonal path in the z-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    vertices: Vec<C64>,
    samples_hint: usize,
}

impl Path {
    /// At least two vertices; `samples_hint` is the number of uniform
    /// subintervals sampled on each segment.
    pub fn new(vertices: Vec<C64>, samples_hint: usize) -> Result<Self, NumericError> {
        if vertices.len() < 2 {
            return Err(NumericError::InvalidPath("a path needs at least two vertices".into()));
        }
        if samples_hint == 0 {
            return Err(NumericError::InvalidPath("samples_hint must be positive".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::InvalidPath("non-finite vertex".into()));
        }
        Ok(Path { vertices, samples_hint })
    }

    pub fn segment(from: C64, to: C64, samples_hint: usize) -> Result<Self, NumericError> {
        Self::new(vec![from, to], samples_hint)
    }

    /// Closed regular polygon around `center`, starting at angle `phase`.
    pub fn circle(
        center: C64,
        radius: f64,
        sides: usize,
        phase: f64,
        samples_hint: usize,
    ) -> Result<Self, NumericError> {
        let mut vertices: Vec<C64> = (0..sides)
            .map(|k| {
                let theta = phase + 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
                center + C64::from_polar(radius, theta)
            })
            .collect();
        vertices.push(vertices[0]);
        Self::new(vertices, samples_hint)
    }

    pub fn vertices(&self) -> &[C64] {
        &self.vertices
    }

    pub fn samples_hint(&self) -> usize {
        self.samples_hint
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    /// Same closed loop traversed from vertex `k`.
    pub fn rotated(&self, k: usize) -> Result<Self, NumericError> {
        if !self.is_closed() {
            return Err(NumericError::NotClosed);
        }
        let body = &self.vertices[..self.vertices.len() - 1];
        let k = k % body.len();
        let mut vertices: Vec<C64> = body[k..].iter().chain(&body[..k]).copied().collect();
        vertices.push(vertices[0]);
        Self::new(vertices, self.samples_hint)
    }

    pub fn bounding_diameter(&self) -> f64 {
        let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo_re = lo_re.min(v.re);
            hi_re = hi_re.max(v.re);
            lo_im = lo_im.min(v.im);
            hi_im = hi_im.max(v.im);
        }
        (hi_re - lo_re).hypot(hi_im - lo_im)
    }

    /// Shortest distance from `p` to the polygon.
    pub fn distance_to(&self, p: C64) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| segment_distance(w[0], w[1], p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Fails if any pole lies within `factor × bounding diameter` of the path.
    pub fn check_clearance(&self, poles: &[C64], factor: f64) -> Result<(), NumericError> {
        let radius = factor * self.bounding_diameter();
        for &pole in poles {
            let distance = self.distance_to(pole);
            if distance <= radius {
                return Err(NumericError::PoleTooClose { pole, distance, radius });
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, NumericError> {
        let file: PathFile =
            serde_json::from_str(s).map_err(|e| NumericError::InvalidPath(e.to_string()))?;
        Path::new(
            file.vertices.iter().map(|&[re, im]| c64(re, im)).collect(),
            file.samples_hint,
        )
    }

    pub fn to_json(&self) -> String {
        let file = PathFile {
            vertices: self.vertices.iter().map(|v| [v.re, v.im]).collect(),
            samples_hint: self.samples_hint,
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }
}

fn segment_distance(a: C64, b: C64, p: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// `{"vertices": [[re, im], ...], "samples_hint": 64}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathFile {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default = "default_hint")]
    pub samples_hint: usize,
}

fn default_hint() -> usize {
    DEFAULT_SAMPLES_HINT
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Path::new(vec![c64(0.0, 0.0)], 4).is_err());
        assert!(Path::segment(c64(0.0, 0.0), c64(1.0, 0.0), 0).is_err());
        let p = Path::from_json(r#"{"vertices": [[0, 0.2], [1, 0.2]]}"#).unwrap();
        assert_eq!(p.samples_hint(), DEFAULT_SAMPLES_HINT);
        assert_eq!(Path::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn clearance() {
        let p = Path::segment(c64(0.0, 0.0), c64(2.0, 0.0), 10).unwrap();
        assert!((p.distance_to(c64(1.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((p.distance_to(c64(3.0, 0.0)) - 1.0).abs() < 1e-15);
        // radius = 1e-3 * 2
        assert!(p.check_clearance(&[c64(1.0, 0.0021)], 1e-3).is_ok());
        assert!(matches!(
            p.check_clearance(&[c64(1.0, 0.0019)], 1e-3),
            Err(NumericError::PoleTooClose { .. })
        ));
    }

    #[test]
    fn loops() {
        let c = Path::circle(c64(0.0, 0.0), 1.0, 8, 0.0, 4).unwrap();
        assert!(c.is_closed());
        let r = c.rotated(3).unwrap();
        assert!(r.is_closed());
        assert_eq!(r.vertices()[0], c.vertices()[3]);
        assert!(Path::segment(c64(0.0, 0.0), c64(1.0, 0.0), 1).unwrap().rotated(1).is_err());
    }
}
