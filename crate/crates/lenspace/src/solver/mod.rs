//! Grid shortest-path solver for the length distance induced by a conformal
//! weight on an open rectangle.
//!
//! The graph has one node per interior grid point and an edge per stencil
//! offset, weighted by the segment length times the trapezoid average of the
//! weight at its endpoints. Rectangles are convex, so every edge segment stays
//! inside the domain. Off-grid query terminals are linked to every
//! stencil-visible node (and to each other when mutually visible) at exact
//! local segment cost, which avoids the order-`h` bias of snapping.

mod grid;
mod membership;
mod search;
mod stencil;

pub use grid::GridGeom;
pub use membership::{validate_membership, MembershipReport};
pub use stencil::StencilOrder;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::fields::{BuiltWeight, ScalarField};
use crate::geom::{Curve, Point, Rect};
use crate::oracle::DistanceOracle;

use search::{Graph, Scratch, NO_PRED};

/// A conformal Riemannian metric `phi(x) |v|`: a scalar weight with certified
/// bounds `0 < w_min <= phi <= w_max`.
pub struct ConformalMetric {
    weight: Arc<dyn ScalarField>,
    w_min: f64,
    w_max: f64,
}

impl ConformalMetric {
    pub fn new(weight: Arc<dyn ScalarField>, w_min: f64, w_max: f64) -> Result<Self> {
        if !(w_min > 0.0 && w_min <= w_max && w_max.is_finite()) {
            return Err(Error::Argument(format!(
                "conformal weight bounds must satisfy 0 < w_min <= w_max, got ({w_min}, {w_max})"
            )));
        }
        Ok(ConformalMetric { weight, w_min, w_max })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Arc::new(crate::fields::ConstantField(c)), c, c)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.w_min, self.w_max)
    }

    pub fn weight(&self) -> &Arc<dyn ScalarField> {
        &self.weight
    }

    /// Weight at an off-grid point, clamped into the certified bounds.
    fn eval_clamped(&self, p: Point) -> f64 {
        self.weight.eval(p).clamp(self.w_min, self.w_max)
    }
}

impl From<BuiltWeight> for ConformalMetric {
    fn from(w: BuiltWeight) -> Self {
        ConformalMetric { weight: w.field, w_min: w.w_min, w_max: w.w_max }
    }
}

/// A-priori model of the discretization error of solver distances:
/// `d_true <= d_grid + additive_bound` and
/// `d_grid <= (1 + anisotropy_bound) d_true + additive_bound`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ErrorModel {
    /// Worst-case relative overestimate from the finite direction stencil.
    pub anisotropy_bound: f64,
    /// Additive slack for off-grid terminal handling (`2 h w_max`).
    pub additive_bound: f64,
    /// Nominal order of grid convergence toward the stencil limit.
    pub order_estimate: f64,
}

/// Dense shortest-path field from one source terminal.
pub struct SourceField {
    pub source: Point,
    pub dist: Vec<f64>,
}

/// Result of a continuous extension query on the closed rectangle.
#[derive(Clone, Copy, Debug)]
pub struct ClosureDistance {
    pub value: f64,
    /// Whether the inward-snap sequence was Cauchy within the Lipschitz
    /// modulus `2 alpha (inward shift)`.
    pub converged: bool,
}

/// Immutable grid shortest-path structure answering distance and geodesic
/// queries for the induced length distance. Queries are read-only and safe
/// concurrently; the per-source field cache is lock-protected, so a query
/// never observes a partially built cache entry.
pub struct DistanceSolver {
    geom: GridGeom,
    metric: ConformalMetric,
    stencil: StencilOrder,
    /// weight at every node, id-ordered
    phi: Vec<f64>,
    /// (di, dj, segment length) per stencil offset
    offsets: Vec<(i32, i32, f64)>,
    cache: Mutex<HashMap<u32, Arc<SourceField>>>,
    cache_cap: usize,
    scratch_pool: Mutex<Vec<Scratch>>,
}

/// Build the solver graph: at least 8 grid cells per side, weight validated
/// against its certified bounds at every node.
pub fn build_solver(
    domain: Rect,
    metric: ConformalMetric,
    h: f64,
    stencil: StencilOrder,
) -> Result<DistanceSolver> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::SolverBuild(format!("grid step must be positive, got {h}")));
    }
    if domain.width() / h < 8.0 || domain.height() / h < 8.0 {
        return Err(Error::SolverBuild(format!(
            "h = {h} too coarse: need at least 8 cells per side on {domain:?}"
        )));
    }
    let geom = GridGeom::new(domain, h);
    let n = geom.node_count();
    let mut phi = Vec::with_capacity(n);
    let slack = 1e-9 * metric.w_max;
    for id in 0..n as u32 {
        let v = metric.weight.eval(geom.point_of(id));
        if !(v >= metric.w_min - slack && v <= metric.w_max + slack) {
            let p = geom.point_of(id);
            return Err(Error::SolverBuild(format!(
                "weight {v} at ({}, {}) violates bounds [{}, {}]",
                p.x1, p.x2, metric.w_min, metric.w_max
            )));
        }
        phi.push(v);
    }
    let offsets: Vec<(i32, i32, f64)> = stencil
        .offsets()
        .iter()
        .map(|&(di, dj)| (di, dj, h * (di as f64).hypot(dj as f64)))
        .collect();
    // cache budget: about 2^25 field entries total
    let cache_cap = ((1usize << 25) / n.max(1)).clamp(1, 64);
    Ok(DistanceSolver {
        geom,
        metric,
        stencil,
        phi,
        offsets,
        cache: Mutex::new(HashMap::new()),
        cache_cap,
        scratch_pool: Mutex::new(Vec::new()),
    })
}

impl DistanceSolver {
    pub fn grid(&self) -> &GridGeom {
        &self.geom
    }

    pub fn h(&self) -> f64 {
        self.geom.h
    }

    pub fn stencil(&self) -> StencilOrder {
        self.stencil
    }

    pub fn metric(&self) -> &ConformalMetric {
        &self.metric
    }

    pub fn error_model(&self) -> ErrorModel {
        ErrorModel {
            anisotropy_bound: self.stencil.anisotropy_bound(),
            additive_bound: 2.0 * self.geom.h * self.metric.w_max,
            order_estimate: 1.0,
        }
    }

    /// Certified enclosure `[lo, hi]` of the continuum distance given a grid
    /// value, from the error model.
    pub fn enclosure(&self, grid_value: f64) -> (f64, f64) {
        let m = self.error_model();
        let lo = ((grid_value - m.additive_bound) / (1.0 + m.anisotropy_bound)).max(0.0);
        (lo, grid_value + m.additive_bound)
    }

    /// Grid point nearest to `p`.
    pub fn nearest_node_point(&self, p: Point) -> Point {
        self.geom.point_of(self.geom.nearest_node(p))
    }

    /// Undirected edges `(u, v, weight)`, each listed once in deterministic
    /// order. Intended for audits; iterating a fine grid is expensive.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let positive: Vec<(i32, i32, f64)> = self
            .offsets
            .iter()
            .copied()
            .filter(|&(di, dj, _)| di > 0 || (di == 0 && dj > 0))
            .collect();
        (0..self.geom.node_count() as u32).flat_map(move |u| {
            let (i, j) = self.geom.ij(u);
            positive
                .clone()
                .into_iter()
                .filter_map(move |(di, dj, seg)| {
                    let (ni, nj) = (i as isize + di as isize, j as isize + dj as isize);
                    if ni < 0 || nj < 0 || ni >= self.geom.nx as isize || nj >= self.geom.ny as isize
                    {
                        return None;
                    }
                    let v = self.geom.id(ni as usize, nj as usize);
                    let w = seg * 0.5 * (self.phi[u as usize] + self.phi[v as usize]);
                    Some((u, v, w))
                })
        })
    }

    fn check_interior(&self, p: Point) -> Result<()> {
        if self.geom.rect.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(p))
        }
    }

    /// Exact conformal cost of a short straight segment (trapezoid rule).
    fn segment_cost(&self, a: Point, b: Point) -> f64 {
        a.euclid(b) * 0.5 * (self.terminal_weight(a) + self.terminal_weight(b))
    }

    fn terminal_weight(&self, p: Point) -> f64 {
        match self.geom.node_at(p) {
            Some(id) => self.phi[id as usize],
            None => self.metric.eval_clamped(p),
        }
    }

    /// Terminal links of a query point: the node it coincides with at cost 0,
    /// or every stencil-visible node at exact segment cost.
    fn links(&self, p: Point) -> Result<Vec<(u32, f64)>> {
        if let Some(id) = self.geom.node_at(p) {
            return Ok(vec![(id, 0.0)]);
        }
        let near = self.geom.nodes_near(p, self.stencil.reach());
        if near.is_empty() {
            return Err(Error::UnreachableTerminal(p));
        }
        Ok(near
            .into_iter()
            .map(|id| (id, self.segment_cost(p, self.geom.point_of(id))))
            .collect())
    }

    /// Direct terminal-to-terminal segment, admitted when the pair is
    /// mutually stencil-visible (matching the graph's edge range).
    fn direct_candidate(&self, x: Point, y: Point) -> f64 {
        let reach = self.stencil.reach() as f64 * self.geom.h * (1.0 + 1e-9);
        if (x.x1 - y.x1).abs() <= reach && (x.x2 - y.x2).abs() <= reach {
            self.segment_cost(x, y)
        } else {
            f64::INFINITY
        }
    }

    fn graph(&self) -> Graph<'_> {
        Graph {
            geom: &self.geom,
            phi: &self.phi,
            offsets: &self.offsets,
            w_min: self.metric.w_min,
        }
    }

    fn with_scratch<T>(&self, f: impl FnOnce(&mut Scratch) -> T) -> T {
        let mut scratch = {
            let mut pool = self.scratch_pool.lock().unwrap();
            pool.pop().unwrap_or_else(|| Scratch::new(self.geom.node_count()))
        };
        let out = f(&mut scratch);
        self.scratch_pool.lock().unwrap().push(scratch);
        out
    }

    fn cached_field(&self, p: Point) -> Option<Arc<SourceField>> {
        let id = self.geom.node_at(p)?;
        self.cache.lock().unwrap().get(&id).cloned()
    }

    fn field_value(&self, field: &SourceField, to: Point) -> Result<f64> {
        let direct = self.direct_candidate(field.source, to);
        let mut best = direct;
        for (node, cost) in self.links(to)? {
            let via = field.dist[node as usize] + cost;
            if via < best {
                best = via;
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::UnreachableTerminal(to))
        }
    }

    /// Induced distance between two points of the open domain.
    pub fn distance(&self, x: Point, y: Point) -> Result<f64> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        if x == y {
            return Ok(0.0);
        }
        if let Some(field) = self.cached_field(x) {
            return self.field_value(&field, y);
        }
        if let Some(field) = self.cached_field(y) {
            return self.field_value(&field, x);
        }
        let sources = self.links(x)?;
        let targets = self.links(y)?;
        let direct = self.direct_candidate(x, y);
        let (best, _) = self.with_scratch(|scratch| {
            self.graph().search(scratch, &sources, &targets, Some(y), direct)
        });
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::UnreachableTerminal(y))
        }
    }

    /// Dense distance field from `source` (cached when the source is a grid
    /// node). `field.dist[id]` is the induced distance from `source` to node
    /// `id`.
    pub fn field_from(&self, source: Point) -> Result<Arc<SourceField>> {
        self.check_interior(source)?;
        let key = self.geom.node_at(source);
        if let Some(id) = key {
            if let Some(f) = self.cache.lock().unwrap().get(&id) {
                return Ok(f.clone());
            }
        }
        let sources = self.links(source)?;
        let field = self.with_scratch(|scratch| {
            self.graph().search(scratch, &sources, &[], None, f64::INFINITY);
            SourceField { source, dist: scratch.to_field() }
        });
        let field = Arc::new(field);
        if let Some(id) = key {
            let mut cache = self.cache.lock().unwrap();
            if cache.len() < self.cache_cap || cache.contains_key(&id) {
                cache.insert(id, field.clone());
            }
        }
        Ok(field)
    }

    /// Shortest path as a constant-speed polyline: the predecessor chain of
    /// the terminal search, parameterized by cumulative conformal cost, with
    /// exact endpoints.
    pub fn geodesic(&self, x: Point, y: Point) -> Result<Curve> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        if x == y {
            return Ok(Curve::constant(x));
        }
        let sources = self.links(x)?;
        let targets = self.links(y)?;
        let direct = self.direct_candidate(x, y);
        let pts = self.with_scratch(|scratch| -> Result<Vec<Point>> {
            let (best, best_node) =
                self.graph().search(scratch, &sources, &targets, Some(y), direct);
            if !best.is_finite() {
                return Err(Error::UnreachableTerminal(y));
            }
            let mut pts = vec![y];
            match best_node {
                None => {} // direct terminal-terminal segment won
                Some(mut node) => {
                    // guard: the direct candidate may tie the link route; the
                    // search reports the link node only when it attained best
                    loop {
                        pts.push(self.geom.point_of(node));
                        let p = scratch.pred(node);
                        if p == NO_PRED {
                            break;
                        }
                        node = p;
                    }
                }
            }
            pts.push(x);
            pts.reverse();
            Ok(pts)
        })?;
        self.polyline_by_cost(pts)
    }

    fn polyline_by_cost(&self, pts: Vec<Point>) -> Result<Curve> {
        let mut cum = vec![0.0];
        let mut nodes = vec![pts[0]];
        for w in pts.windows(2) {
            if w[1] == w[0] {
                continue; // duplicate node (on-grid terminal)
            }
            cum.push(cum.last().unwrap() + self.segment_cost(w[0], w[1]));
            nodes.push(w[1]);
        }
        let total = *cum.last().unwrap();
        if total <= 0.0 {
            return Ok(Curve::constant(nodes[0]));
        }
        let last = nodes.len() - 1;
        let samples = nodes
            .into_iter()
            .enumerate()
            .map(|(k, p)| (if k == last { 1.0 } else { cum[k] / total }, p))
            .collect();
        Curve::new(samples)
    }

    /// Continuous extension of the induced distance to the closed rectangle:
    /// the limit of interior values along points snapped inward by `k` grid
    /// steps, checked Cauchy against the `2 alpha shift` modulus.
    pub fn extend_closure(&self, x: Point, y: Point) -> Result<ClosureDistance> {
        let rect = self.geom.rect;
        for p in [x, y] {
            if !rect.contains_closure(p) {
                return Err(Error::OutsideDomain(p));
            }
        }
        if rect.contains(x) && rect.contains(y) {
            return Ok(ClosureDistance { value: self.distance(x, y)?, converged: true });
        }
        let h = self.geom.h;
        let snaps: Vec<(f64, Point, Point)> = [4.0, 2.0, 1.0]
            .iter()
            .filter_map(|&k| {
                let inset = rect.inset(k * h)?;
                Some((k, inset.clamp(x), inset.clamp(y)))
            })
            .collect();
        if snaps.is_empty() {
            return Err(Error::ExtensionUnconverged("domain too small for inward snapping".into()));
        }
        let mut values = Vec::with_capacity(snaps.len());
        for &(_, xk, yk) in &snaps {
            values.push(self.distance(xk, yk)?);
        }
        let m = self.error_model();
        let alpha_eff = self.metric.w_max * (1.0 + m.anisotropy_bound);
        let (_, x1, y1) = snaps[snaps.len() - 1];
        let v1 = values[values.len() - 1];
        let mut converged = true;
        for (idx, &(_, xk, yk)) in snaps.iter().enumerate() {
            let shift = xk.euclid(x1) + yk.euclid(y1);
            if (values[idx] - v1).abs() > 2.0 * alpha_eff * shift + 2.0 * m.additive_bound {
                converged = false;
            }
        }
        // the snapped values approach the boundary limit linearly in the
        // shift; extrapolate the two innermost steps to shift zero
        let value = if values.len() >= 2 {
            let (k2, k1) = (snaps[snaps.len() - 2].0, snaps[snaps.len() - 1].0);
            let v2 = values[values.len() - 2];
            (v1 + (v1 - v2) * k1 / (k2 - k1)).max(0.0)
        } else {
            v1
        };
        Ok(ClosureDistance { value, converged })
    }
}

impl DistanceOracle for DistanceSolver {
    fn dist(&self, x: Point, y: Point) -> Result<f64> {
        self.distance(x, y)
    }
    fn domain(&self) -> Option<Rect> {
        Some(self.geom.rect)
    }
    fn euclid_bounds(&self) -> (f64, f64) {
        self.metric.bounds()
    }
    fn tri_tol(&self) -> f64 {
        self.error_model().additive_bound
    }
    fn prepare_sources(&self, sources: &[Point]) {
        for &p in sources {
            if self.geom.node_at(p).is_some() {
                let _ = self.field_from(p);
            }
        }
    }
    fn name(&self) -> String {
        format!(
            "conformal({}, h=2^{:.0}, stencil={})",
            self.metric.weight.describe(),
            self.geom.h.log2(),
            self.stencil.order()
        )
    }
}

/// The unique continuous extension of a solver metric to the closed
/// rectangle, as an oracle. Unconverged extension queries surface as errors.
pub struct ClosureOracle {
    solver: Arc<DistanceSolver>,
}

impl ClosureOracle {
    pub fn new(solver: Arc<DistanceSolver>) -> Self {
        ClosureOracle { solver }
    }
}

impl DistanceOracle for ClosureOracle {
    fn dist(&self, x: Point, y: Point) -> Result<f64> {
        let c = self.solver.extend_closure(x, y)?;
        if !c.converged {
            return Err(Error::ExtensionUnconverged(format!(
                "extension at ({}, {})-({}, {})",
                x.x1, x.x2, y.x1, y.x2
            )));
        }
        Ok(c.value)
    }
    fn domain(&self) -> Option<Rect> {
        // closure: contains() is overridden below
        Some(self.solver.geom.rect)
    }
    fn contains(&self, p: Point) -> bool {
        self.solver.geom.rect.contains_closure(p)
    }
    fn euclid_bounds(&self) -> (f64, f64) {
        self.solver.metric.bounds()
    }
    fn tri_tol(&self) -> f64 {
        self.solver.tri_tol()
    }
    fn name(&self) -> String {
        format!("closure of {}", self.solver.name())
    }
}
