//! The distance-oracle interface and its closed-form implementations.
//!
//! Every metric in the crate sits behind [`DistanceOracle`]; the length
//! functional, the energy functionals and the convergence harnesses only see
//! this trait. Grid-solver-backed oracles live in [`crate::solver`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};

/// A symmetric, nonnegative distance on a planar domain.
///
/// Contract: `dist(x, y) = dist(y, x)`, `dist(x, x) = 0`, and the triangle
/// inequality holds on every triple within `tri_tol()`. Closed-form oracles
/// are exact; grid-backed oracles certify the inequality only up to the
/// off-grid terminal handling, which is why the tolerance is part of the
/// interface.
pub trait DistanceOracle: Send + Sync {
    fn dist(&self, x: Point, y: Point) -> Result<f64>;

    /// Domain descriptor; `None` means the whole plane.
    fn domain(&self) -> Option<Rect> {
        None
    }

    fn contains(&self, p: Point) -> bool {
        self.domain().is_none_or(|r| r.contains(p))
    }

    /// `(w_min, w_max)` with `w_min * |x - y| <= dist(x, y)` and, along
    /// straight stencil-aligned segments, `dist <= w_max * |x - y|`.
    fn euclid_bounds(&self) -> (f64, f64);

    /// Tolerance within which the triangle inequality is certified.
    fn tri_tol(&self) -> f64 {
        1e-9
    }

    /// Hint that many queries from these source points are coming. Solver
    /// oracles build and cache dense fields; closed-form oracles ignore it.
    fn prepare_sources(&self, sources: &[Point]) {
        let _ = sources;
    }

    fn name(&self) -> String;
}

impl<T: DistanceOracle + ?Sized> DistanceOracle for Arc<T> {
    fn dist(&self, x: Point, y: Point) -> Result<f64> {
        (**self).dist(x, y)
    }
    fn domain(&self) -> Option<Rect> {
        (**self).domain()
    }
    fn contains(&self, p: Point) -> bool {
        (**self).contains(p)
    }
    fn euclid_bounds(&self) -> (f64, f64) {
        (**self).euclid_bounds()
    }
    fn tri_tol(&self) -> f64 {
        (**self).tri_tol()
    }
    fn prepare_sources(&self, sources: &[Point]) {
        (**self).prepare_sources(sources)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// The ambient Euclidean distance on the whole plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanOracle;

impl DistanceOracle for EuclideanOracle {
    fn dist(&self, x: Point, y: Point) -> Result<f64> {
        Ok(x.euclid(y))
    }
    fn euclid_bounds(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
    fn name(&self) -> String {
        "euclid".into()
    }
}

/// A constant multiple of the Euclidean distance, optionally restricted to a
/// rectangle. `ScaledEuclidean::new(2.0, Some(rect))` is the distance the
/// collapsing-strip family fails to reach.
#[derive(Clone, Copy, Debug)]
pub struct ScaledEuclidean {
    factor: f64,
    domain: Option<Rect>,
}

impl ScaledEuclidean {
    pub fn new(factor: f64, domain: Option<Rect>) -> Result<Self> {
        if factor <= 0.0 || !factor.is_finite() {
            return Err(Error::Argument(format!("scale factor must be positive, got {factor}")));
        }
        Ok(ScaledEuclidean { factor, domain })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl DistanceOracle for ScaledEuclidean {
    fn dist(&self, x: Point, y: Point) -> Result<f64> {
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::OutsideDomain(p));
            }
        }
        Ok(self.factor * x.euclid(y))
    }
    fn domain(&self) -> Option<Rect> {
        self.domain
    }
    fn euclid_bounds(&self) -> (f64, f64) {
        (self.factor, self.factor)
    }
    fn name(&self) -> String {
        format!("{}*euclid", self.factor)
    }
}
