//! The energy functional over atomic measures, the 1-Lipschitz indicator,
//! inf-convolution regularization, and the McShane representation gap.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geom::{Point, Rect};
use crate::oracle::DistanceOracle;
use crate::sampling::{halton_pairs, lattice_neighbor_pairs, lattice_points};

/// A finite nonnegative atomic measure on pairs of domain points: the
/// computable slice of the measure space the energy functional acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Point, Point, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(Point, Point, f64)>) -> Result<Self> {
        for &(x, y, w) in &atoms {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::Argument(format!("atom weight must be >= 0 and finite, got {w}")));
            }
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Argument("atom points must be finite".into()));
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn empty() -> Self {
        DiscreteMeasure { atoms: Vec::new() }
    }

    /// The Dirac measure at `(x, y)`.
    pub fn dirac(x: Point, y: Point) -> Self {
        DiscreteMeasure { atoms: vec![(x, y, 1.0)] }
    }

    pub fn atoms(&self) -> &[(Point, Point, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.2).sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DiscreteMeasure::new(self.atoms.iter().map(|&(x, y, w)| (x, y, w * factor)).collect())
    }

    /// Concatenation of two atomic measures (atom lists appended).
    pub fn concat(&self, other: &DiscreteMeasure) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        DiscreteMeasure { atoms }
    }

    /// Wire format: JSON list of `[x1, x2, y1, y2, w]` rows, one per atom,
    /// where `(x1, x2)` is the first point and `(y1, y2)` the second.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.atoms
                .iter()
                .map(|&(x, y, w)| serde_json::json!([x.x1, x.x2, y.x1, y.x2, w]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rows: Vec<[f64; 5]> = serde_json::from_value(value.clone())?;
        DiscreteMeasure::new(
            rows.iter()
                .map(|&[x1, x2, y1, y2, w]| (Point::new(x1, x2), Point::new(y1, y2), w))
                .collect(),
        )
    }
}

/// `J_d(mu) = sum_i w_i d(x_i, y_i)`: linear in the measure, monotone in the
/// metric.
pub fn eval_j(d: &dyn DistanceOracle, mu: &DiscreteMeasure) -> Result<f64> {
    let mut total = 0.0;
    for &(x, y, w) in mu.atoms() {
        for p in [x, y] {
            if !d.contains(p) {
                return Err(Error::OutsideDomain(p));
            }
        }
        total += w * d.dist(x, y)?;
    }
    Ok(total)
}

/// A finite set of evaluation pairs for Lipschitz estimation.
#[derive(Clone, Debug)]
pub struct PairSet {
    pairs: Vec<(Point, Point)>,
}

impl PairSet {
    pub fn new(pairs: Vec<(Point, Point)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Argument("pair set must be nonempty".into()));
        }
        Ok(PairSet { pairs })
    }

    /// The canonical sampling: all axis-neighbor pairs of an `m x m` lattice
    /// over `rect` (where Lipschitz bounds are attained for coordinate-like
    /// functions) plus `far` low-discrepancy far pairs.
    pub fn neighbors_and_far(rect: Rect, m: usize, far: usize) -> Self {
        let mut pairs = lattice_neighbor_pairs(rect, m);
        pairs.extend(halton_pairs(rect, far, 1));
        PairSet { pairs }
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }
}

/// Sampled Lipschitz constant of `u` with respect to `d`: the max of
/// `|u(x) - u(y)| / d(x, y)` over the pair set, a certified lower bound of
/// the true constant. Pairs at zero distance are skipped.
pub fn lipschitz_constant(
    u: &dyn ScalarField,
    d: &dyn DistanceOracle,
    pairs: &PairSet,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    let mut usable = 0;
    for &(x, y) in pairs.pairs() {
        let dist = d.dist(x, y)?;
        if dist <= 0.0 {
            continue;
        }
        usable += 1;
        best = best.max((u.eval(x) - u.eval(y)).abs() / dist);
    }
    if usable == 0 {
        return Err(Error::Argument("pair set contains no pair at positive distance".into()));
    }
    Ok(best)
}

/// Verdict of the 1-Lipschitz indicator functional.
#[derive(Clone, Debug, Serialize)]
pub enum FVerdict {
    /// `u` is 1-Lipschitz on the sampled pairs (within `tol`).
    Zero,
    /// The indicator is infinite: `u(x) - u(y) > (1 + tol) d(x, y)` at the
    /// witness pair.
    Infinite { witness: (Point, Point), excess: f64 },
}

impl FVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, FVerdict::Zero)
    }
}

/// Evaluate the indicator functional on the sampled pairs: zero when the
/// sampled Lipschitz constant stays below `1 + tol`, otherwise the witness
/// pair with the largest relative excess.
pub fn eval_f(
    d: &dyn DistanceOracle,
    u: &dyn ScalarField,
    pairs: &PairSet,
    tol: f64,
) -> Result<FVerdict> {
    let mut worst: Option<((Point, Point), f64)> = None;
    for &(x, y) in pairs.pairs() {
        let dist = d.dist(x, y)?;
        if dist <= 0.0 {
            continue;
        }
        let diff = u.eval(x) - u.eval(y);
        let ratio = diff.abs() / dist;
        if ratio > 1.0 + tol && worst.is_none_or(|(_, r)| ratio > r) {
            let witness = if diff >= 0.0 { (x, y) } else { (y, x) };
            worst = Some((witness, ratio));
        }
    }
    Ok(match worst {
        None => FVerdict::Zero,
        Some((witness, ratio)) => FVerdict::Infinite { witness, excess: ratio - 1.0 },
    })
}

/// The inf-convolution regularization `x -> min_{y in K_h} (u(y) + d(x, y))`
/// over a finite lattice of the compact set: 1-Lipschitz with respect to `d`
/// up to lattice tolerance, below `u` on the lattice, and equal to `u` there
/// whenever `u` is itself 1-Lipschitz.
pub struct InfConvolution {
    u: Arc<dyn ScalarField>,
    d: Arc<dyn DistanceOracle>,
    lattice: Vec<Point>,
    spacing: f64,
}

impl InfConvolution {
    pub fn lattice(&self) -> &[Point] {
        &self.lattice
    }

    /// Lattice spacing, the resolution of the minimization.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

impl ScalarField for InfConvolution {
    fn eval(&self, x: Point) -> f64 {
        self.lattice
            .iter()
            .map(|&y| {
                self.u.eval(y)
                    + self.d.dist(x, y).expect("inf-convolution evaluated outside the oracle domain")
            })
            .fold(f64::INFINITY, f64::min)
    }
    fn describe(&self) -> String {
        format!("infconv[{} pts] of {}", self.lattice.len(), self.u.describe())
    }
}

/// Build the inf-convolution of `u` against `d` over the `m x m` lattice of
/// the compact rectangle `k`.
pub fn inf_convolution(
    u: Arc<dyn ScalarField>,
    d: Arc<dyn DistanceOracle>,
    k: Rect,
    m: usize,
) -> Result<InfConvolution> {
    if m < 2 {
        return Err(Error::Argument("inf-convolution lattice needs m >= 2".into()));
    }
    let lattice = lattice_points(k, m);
    d.prepare_sources(&lattice);
    let spacing = (k.width() / (m - 1) as f64).max(k.height() / (m - 1) as f64);
    Ok(InfConvolution { u, d, lattice, spacing })
}

/// McShane representation gap at `(x, y)`:
/// `d(x, y) - max_g |d(x, g) - d(y, g)|`, the slack of the best generator
/// witness (`u = +-d(., g)` are 1-Lipschitz). Nonnegative up to numerics,
/// exactly zero when either endpoint is a generator, and non-increasing as
/// the generator set grows.
pub fn mcshane_gap(
    d: &dyn DistanceOracle,
    x: Point,
    y: Point,
    generators: &[Point],
) -> Result<f64> {
    if generators.is_empty() {
        return Err(Error::Argument("generator set must be nonempty".into()));
    }
    let dxy = d.dist(x, y)?;
    let mut best = f64::NEG_INFINITY;
    for &g in generators {
        best = best.max((d.dist(x, g)? - d.dist(y, g)?).abs());
    }
    Ok(dxy - best)
}
