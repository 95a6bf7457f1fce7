//! The partition-supremum length functional and its companions.
//!
//! `curve_length` evaluates `sup_P sum_i d(gamma_{t_i}, gamma_{t_{i-1}})` over
//! dyadic refinements of the curve's own sample grid. Refinement sums are
//! non-decreasing for any true metric (triangle inequality), so the estimate
//! converges from below and every reported value is a certified lower bound.

use crate::error::{Error, Result};
use crate::geom::{Curve, Point};
use crate::oracle::DistanceOracle;

/// Controls the dyadic refinement of partition sums.
///
/// Level `l` splits every inter-sample segment of the curve into
/// `initial_partition_size * 2^l` equal parameter pieces. Refinement stops
/// when the increment between successive levels drops below `stop_tol`, or
/// after `max_levels` evaluated levels (flagged unconverged).
#[derive(Clone, Copy, Debug)]
pub struct RefinementPolicy {
    pub initial_partition_size: usize,
    pub stop_tol: f64,
    pub max_levels: u32,
}

impl Default for RefinementPolicy {
    fn default() -> Self {
        RefinementPolicy { initial_partition_size: 1, stop_tol: 1e-4, max_levels: 12 }
    }
}

impl RefinementPolicy {
    pub fn new(initial_partition_size: usize, stop_tol: f64, max_levels: u32) -> Result<Self> {
        if initial_partition_size < 1 {
            return Err(Error::Argument("initial_partition_size must be >= 1".into()));
        }
        if stop_tol <= 0.0 || stop_tol.is_nan() {
            return Err(Error::Argument("stop_tol must be positive".into()));
        }
        if max_levels < 1 {
            return Err(Error::Argument("max_levels must be >= 1".into()));
        }
        Ok(RefinementPolicy { initial_partition_size, stop_tol, max_levels })
    }

    pub fn with_stop_tol(mut self, stop_tol: f64) -> Self {
        self.stop_tol = stop_tol;
        self
    }
}

/// Result of a partition-sum refinement.
#[derive(Clone, Debug)]
pub struct LengthEstimate {
    /// Supremum over the evaluated partitions (a certified lower bound of the
    /// true length).
    pub value: f64,
    /// Whether the successive-level increment dropped below `stop_tol`.
    pub converged: bool,
    /// Partition sums per evaluated level, coarsest first.
    pub history: Vec<f64>,
}

/// Parameters of the refined partition at a given level, including every
/// original sample parameter.
fn level_params(curve: &Curve, policy: &RefinementPolicy, level: u32) -> Vec<f64> {
    let pieces = policy.initial_partition_size << level;
    let samples = curve.samples();
    let mut params = Vec::with_capacity((samples.len() - 1) * pieces + 1);
    params.push(samples[0].0);
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].0, w[1].0);
        for j in 1..=pieces {
            let t = if j == pieces {
                t1
            } else {
                t0 + (t1 - t0) * (j as f64 / pieces as f64)
            };
            params.push(t);
        }
    }
    params
}

fn partition_sum(d: &dyn DistanceOracle, curve: &Curve, params: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut prev = curve.eval(params[0]);
    check_in_domain(d, prev)?;
    for &t in &params[1..] {
        let p = curve.eval(t);
        check_in_domain(d, p)?;
        sum += d.dist(prev, p)?;
        prev = p;
    }
    Ok(sum)
}

fn check_in_domain(d: &dyn DistanceOracle, p: Point) -> Result<()> {
    if d.contains(p) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(p))
    }
}

/// Length of `curve` under the metric `d`: the supremum of partition sums over
/// dyadic refinements of the curve's sample grid.
pub fn curve_length(
    d: &dyn DistanceOracle,
    curve: &Curve,
    policy: &RefinementPolicy,
) -> Result<LengthEstimate> {
    let mut history = Vec::new();
    let mut best = 0.0_f64;
    let mut converged = false;
    for level in 0..policy.max_levels {
        let params = level_params(curve, policy, level);
        let sum = partition_sum(d, curve, &params)?;
        best = best.max(sum);
        let increment = sum - history.last().copied().unwrap_or(0.0);
        history.push(sum);
        if level > 0 && increment < policy.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(LengthEstimate { value: best, converged, history })
}

/// Partition sum of `curve` over an explicit parameter partition. Exposed for
/// the convergence harnesses, which pin partitions shared between two metrics.
pub fn chord_sum(d: &dyn DistanceOracle, curve: &Curve, params: &[f64]) -> Result<f64> {
    if params.len() < 2 {
        return Err(Error::Argument("partition needs at least 2 parameters".into()));
    }
    partition_sum(d, curve, params)
}

/// Parameters of the finest partition `curve_length` evaluated before
/// stopping: the partition whose sum realizes the reported length estimate.
pub fn refined_partition(
    d: &dyn DistanceOracle,
    curve: &Curve,
    policy: &RefinementPolicy,
) -> Result<Vec<f64>> {
    let est = curve_length(d, curve, policy)?;
    let level = (est.history.len() as u32).saturating_sub(1);
    Ok(level_params(curve, policy, level))
}

/// Cumulative arclength table along the refined partition at the level where
/// the refinement converged (or the last evaluated level).
fn arclength_table(
    d: &dyn DistanceOracle,
    curve: &Curve,
    policy: &RefinementPolicy,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let params = refined_partition(d, curve, policy)?;
    let mut cum = Vec::with_capacity(params.len());
    cum.push(0.0);
    let mut prev = curve.eval(params[0]);
    let mut acc = 0.0;
    for &t in &params[1..] {
        let p = curve.eval(t);
        acc += d.dist(prev, p)?;
        cum.push(acc);
        prev = p;
    }
    Ok((params, cum))
}

/// Constant-speed reparameterization: same endpoints and image, with the
/// d-arclength proportional to the parameter. Zero-length curves collapse to
/// the constant curve at the start point.
pub fn constant_speed_reparam(
    d: &dyn DistanceOracle,
    curve: &Curve,
    policy: &RefinementPolicy,
) -> Result<Curve> {
    let (params, cum) = arclength_table(d, curve, policy)?;
    let total = *cum.last().expect("nonempty table");
    if total <= 0.0 {
        return Ok(Curve::constant(curve.start()));
    }
    let mut samples: Vec<(f64, Point)> = Vec::with_capacity(params.len());
    for (j, &t) in params.iter().enumerate() {
        let s = if j == params.len() - 1 { 1.0 } else { cum[j] / total };
        let p = curve.eval(t);
        match samples.last() {
            // collapse stretches the metric cannot see
            Some(&(s_prev, _)) if s <= s_prev => continue,
            _ => samples.push((s, p)),
        }
    }
    if samples.len() < 2 {
        return Ok(Curve::constant(curve.start()));
    }
    Curve::new(simplify_collinear(samples))
}

/// Drop interior samples that the piecewise-linear interpolation already
/// reproduces, so curves that were constant-speed to begin with come back
/// with their original nodes.
fn simplify_collinear(samples: Vec<(f64, Point)>) -> Vec<(f64, Point)> {
    if samples.len() <= 2 {
        return samples;
    }
    let mut kept: Vec<(f64, Point)> = vec![samples[0]];
    for j in 1..samples.len() - 1 {
        let (s_prev, p_prev) = *kept.last().unwrap();
        let (s_next, p_next) = samples[j + 1];
        let (s, p) = samples[j];
        let w = (s - s_prev) / (s_next - s_prev);
        let interp = p_prev.lerp(p_next, w);
        if interp.euclid(p) > 1e-12 {
            kept.push((s, p));
        }
    }
    kept.push(*samples.last().unwrap());
    kept
}

/// Largest measured gap `L_d(curve|[t,s]) - d(curve_t, curve_s)` over a
/// lattice of sub-interval pairs, clamped at zero. Zero (up to tolerance) iff
/// the curve is a geodesic up to sampling; the value is a certified lower
/// bound of the true defect.
pub fn geodesic_defect(
    curve: &Curve,
    d: &dyn DistanceOracle,
    policy: &RefinementPolicy,
) -> Result<f64> {
    // lattice of pair endpoints over the refined nodes, |pairs| <= 2^12
    const MAX_LATTICE: usize = 33;
    let (params, cum) = arclength_table(d, curve, policy)?;
    let n = params.len();
    let m = MAX_LATTICE.min(n);
    let idx: Vec<usize> = (0..m).map(|j| j * (n - 1) / (m - 1)).collect();
    let pts: Vec<Point> = idx.iter().map(|&j| curve.eval(params[j])).collect();
    let mut worst = f64::NEG_INFINITY;
    for ai in 0..m {
        for bi in ai + 1..m {
            let sub_len = cum[idx[bi]] - cum[idx[ai]];
            let chord = d.dist(pts[ai], pts[bi])?;
            worst = worst.max(sub_len - chord);
        }
    }
    Ok(worst.max(0.0))
}
