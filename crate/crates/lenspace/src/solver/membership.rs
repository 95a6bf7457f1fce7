//! Membership validation for the class of length distances sandwiched
//! between `alpha^-1` and `alpha` times the ambient Euclidean distance.
//!
//! The report quantifies, over a low-discrepancy pair sample, (1) how far the
//! solver distance leaves the certified sandwich, and (2) the length-property
//! gap between `d(x, y)` and the measured length of the solver geodesic. The
//! discrete solver realizes the length property only up to grid error, so the
//! gap is compared against twice the error-model bound and no claim of exact
//! membership is made.

use std::sync::Arc;

use serde::Serialize;

use crate::length::{curve_length, RefinementPolicy};
use crate::sampling::halton_pairs;

use super::DistanceSolver;

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub alpha: f64,
    pub pair_samples: usize,
    pub tol: f64,
    /// Max over samples of the sandwich violation, relative to the ambient
    /// distance of the pair, after discounting the certified grid enclosure.
    pub sandwich_max_violation_rel: f64,
    pub sandwich_pass: bool,
    /// Pairs used for the geodesic length-property check.
    pub length_pairs: usize,
    /// Max over pairs of `|d(x, y) - L_d(geodesic(x, y))|`.
    pub length_gap_max: f64,
    /// Max over pairs of gap / (2 * grid error bound of the pair).
    pub length_gap_ratio_max: f64,
    pub length_pass: bool,
    pub pass: bool,
}

/// Validate the sandwich and length properties of a solver metric at `alpha`
/// over `pair_samples` low-discrepancy pairs (the geodesic check runs on the
/// first `min(64, pair_samples)` of them).
pub fn validate_membership(
    solver: &Arc<DistanceSolver>,
    alpha: f64,
    pair_samples: usize,
    tol: f64,
) -> crate::Result<MembershipReport> {
    if alpha <= 1.0 || alpha.is_nan() {
        return Err(crate::Error::Argument(format!("alpha must exceed 1, got {alpha}")));
    }
    let rect = solver.grid().rect;
    let model = solver.error_model();
    // keep terminals a couple of grid steps inside the open domain
    let sample_rect = rect
        .inset(2.0 * solver.h())
        .ok_or_else(|| crate::Error::Argument("domain too small for pair sampling".into()))?;
    let pairs = halton_pairs(sample_rect, pair_samples, 1);

    let mut sandwich_max: f64 = 0.0;
    for &(x, y) in &pairs {
        let ambient = x.euclid(y);
        if ambient == 0.0 {
            continue;
        }
        let d = solver.distance(x, y)?;
        let (lo, hi) = solver.enclosure(d);
        let viol = (ambient / alpha - hi).max(lo - alpha * ambient).max(0.0);
        sandwich_max = sandwich_max.max(viol / ambient);
    }
    let sandwich_pass = sandwich_max <= tol;

    let length_pairs = pairs.len().min(64);
    let policy = RefinementPolicy {
        initial_partition_size: 1,
        stop_tol: (0.5 * model.additive_bound).max(1e-9),
        max_levels: 3,
    };
    let mut gap_max: f64 = 0.0;
    let mut ratio_max: f64 = 0.0;
    for &(x, y) in pairs.iter().take(length_pairs) {
        let d = solver.distance(x, y)?;
        let geo = solver.geodesic(x, y)?;
        let len = curve_length(solver.as_ref(), &geo, &policy)?.value;
        let gap = (d - len).abs();
        let allowance = 2.0 * (model.anisotropy_bound * d + model.additive_bound);
        gap_max = gap_max.max(gap);
        ratio_max = ratio_max.max(gap / allowance);
    }
    let length_pass = ratio_max <= 1.0;

    Ok(MembershipReport {
        alpha,
        pair_samples,
        tol,
        sandwich_max_violation_rel: sandwich_max,
        sandwich_pass,
        length_pairs,
        length_gap_max: gap_max,
        length_gap_ratio_max: ratio_max,
        length_pass,
        pass: sandwich_pass && length_pass,
    })
}
