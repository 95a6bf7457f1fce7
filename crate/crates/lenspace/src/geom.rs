//! Points, rectangles and parameterized polyline curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the planar ambient space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Euclidean (ambient) distance to `other`.
    pub fn euclid(&self, other: Point) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn lerp(&self, other: Point, t: f64) -> Point {
        Point::new(
            self.x1 + t * (other.x1 - self.x1),
            self.x2 + t * (other.x2 - self.x2),
        )
    }
}

/// An axis-aligned open rectangle, the computable domain kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
}

impl Rect {
    pub fn new(x1_lo: f64, x1_hi: f64, x2_lo: f64, x2_hi: f64) -> Result<Self> {
        if !(x1_lo.is_finite() && x1_hi.is_finite() && x2_lo.is_finite() && x2_hi.is_finite()) {
            return Err(Error::Argument("rectangle bounds must be finite".into()));
        }
        if x1_lo >= x1_hi || x2_lo >= x2_hi {
            return Err(Error::Argument(format!(
                "degenerate rectangle ({x1_lo}, {x1_hi}) x ({x2_lo}, {x2_hi})"
            )));
        }
        Ok(Rect { x1_lo, x1_hi, x2_lo, x2_hi })
    }

    pub fn unit_square() -> Self {
        Rect { x1_lo: 0.0, x1_hi: 1.0, x2_lo: 0.0, x2_hi: 1.0 }
    }

    /// Strict interior membership (the domain is open).
    pub fn contains(&self, p: Point) -> bool {
        p.x1 > self.x1_lo && p.x1 < self.x1_hi && p.x2 > self.x2_lo && p.x2 < self.x2_hi
    }

    /// Closure membership.
    pub fn contains_closure(&self, p: Point) -> bool {
        p.x1 >= self.x1_lo && p.x1 <= self.x1_hi && p.x2 >= self.x2_lo && p.x2 <= self.x2_hi
    }

    pub fn width(&self) -> f64 {
        self.x1_hi - self.x1_lo
    }

    pub fn height(&self) -> f64 {
        self.x2_hi - self.x2_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// The closed rectangle shrunk inward by `margin` on every side.
    /// Returns `None` when the inset is empty.
    pub fn inset(&self, margin: f64) -> Option<Rect> {
        let r = Rect {
            x1_lo: self.x1_lo + margin,
            x1_hi: self.x1_hi - margin,
            x2_lo: self.x2_lo + margin,
            x2_hi: self.x2_hi - margin,
        };
        (r.x1_lo < r.x1_hi && r.x2_lo < r.x2_hi).then_some(r)
    }

    /// Distance from `p` to the boundary (positive inside).
    pub fn boundary_margin(&self, p: Point) -> f64 {
        let m1 = (p.x1 - self.x1_lo).min(self.x1_hi - p.x1);
        let m2 = (p.x2 - self.x2_lo).min(self.x2_hi - p.x2);
        m1.min(m2)
    }

    /// Project `p` onto the closed rectangle, componentwise.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x1.clamp(self.x1_lo, self.x1_hi),
            p.x2.clamp(self.x2_lo, self.x2_hi),
        )
    }
}

/// A Lipschitz curve stored as a parameterized polyline on `[0, 1]`:
/// samples `(t_i, p_i)` with strictly increasing parameters, `t_0 = 0`,
/// `t_last = 1`, piecewise-linear interpolation in the parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    samples: Vec<(f64, Point)>,
}

impl Curve {
    pub fn new(samples: Vec<(f64, Point)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Curve("curve needs at least 2 samples".into()));
        }
        if samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
            return Err(Error::Curve("curve parameters must start at 0 and end at 1".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Curve("curve parameters must be strictly increasing".into()));
            }
        }
        if samples.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::Curve("curve samples must be finite".into()));
        }
        Ok(Curve { samples })
    }

    /// Polyline through `points` with uniformly spaced parameters.
    pub fn polyline(points: &[Point]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Curve("polyline needs at least 2 points".into()));
        }
        let k = points.len() - 1;
        let samples = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as f64 / k as f64, p))
            .collect();
        Curve::new(samples)
    }

    /// The straight segment from `a` to `b`.
    pub fn segment(a: Point, b: Point) -> Self {
        Curve { samples: vec![(0.0, a), (1.0, b)] }
    }

    /// The constant curve at `p`.
    pub fn constant(p: Point) -> Self {
        Curve { samples: vec![(0.0, p), (1.0, p)] }
    }

    pub fn samples(&self) -> &[(f64, Point)] {
        &self.samples
    }

    pub fn start(&self) -> Point {
        self.samples[0].1
    }

    pub fn end(&self) -> Point {
        self.samples[self.samples.len() - 1].1
    }

    /// Evaluate by piecewise-linear interpolation in the parameter.
    pub fn eval(&self, t: f64) -> Point {
        let t = t.clamp(0.0, 1.0);
        // binary search for the segment containing t
        let idx = match self
            .samples
            .binary_search_by(|(ti, _)| ti.partial_cmp(&t).unwrap())
        {
            Ok(i) => return self.samples[i].1,
            Err(i) => i,
        };
        let (t0, p0) = self.samples[idx - 1];
        let (t1, p1) = self.samples[idx];
        p0.lerp(p1, (t - t0) / (t1 - t0))
    }

    /// Euclidean length of the polyline.
    pub fn euclid_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].1.euclid(w[1].1))
            .sum()
    }

    /// Lipschitz constant with respect to the ambient Euclidean distance.
    pub fn euclid_lipschitz(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].1.euclid(w[1].1) / (w[1].0 - w[0].0))
            .fold(0.0, f64::max)
    }

    /// Uniform (sup over shared sample parameters) Euclidean deviation
    /// between `self` and `other`.
    pub fn sup_deviation(&self, other: &Curve) -> f64 {
        let mut dev: f64 = 0.0;
        for &(t, p) in &self.samples {
            dev = dev.max(p.euclid(other.eval(t)));
        }
        for &(t, p) in &other.samples {
            dev = dev.max(p.euclid(self.eval(t)));
        }
        dev
    }

    /// Serialize to the wire format: a JSON array of `[t, x1, x2]` triples.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.samples
                .iter()
                .map(|&(t, p)| serde_json::json!([t, p.x1, p.x2]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let triples: Vec<[f64; 3]> = serde_json::from_value(value.clone())?;
        Curve::new(triples.iter().map(|&[t, x1, x2]| (t, Point::new(x1, x2))).collect())
    }
}
