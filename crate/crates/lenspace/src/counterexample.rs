//! The collapsing-strip weight family and the non-compactness experiment.
//!
//! `ProfileFamily` puts weight 2 everywhere except a strip of height
//! `2^-n` above the bottom edge, inside which the weight ramps monotonically
//! down to 1. The induced distances increase with `n` but stay below `11/8`
//! between the probe points `a` and `b`, while the constant-2 metric gives
//! `7/4`: the family converges to a strictly smaller limit that no length
//! distance attains, which `verify_not_length` certifies by measuring curve
//! lengths against the proxy distance.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geom::{Curve, Point, Rect};
use crate::length::{curve_length, RefinementPolicy};
use crate::oracle::DistanceOracle;
use crate::parallel::parallel_map;
use crate::solver::{build_solver, ConformalMetric, DistanceSolver, StencilOrder};
use crate::tolerances as tols;

/// Left probe point `a = (1/16, 1/8)`.
pub const POINT_A: Point = Point { x1: 1.0 / 16.0, x2: 1.0 / 8.0 };
/// Right probe point `b = (15/16, 1/8)`.
pub const POINT_B: Point = Point { x1: 15.0 / 16.0, x2: 1.0 / 8.0 };

/// Monotone C^2 ramp: 1 for `s <= 1`, 2 for `s >= 2`, quintic smoothstep and
/// strictly increasing in between.
pub fn smoothstep_ramp(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        2.0
    } else {
        let u = s - 1.0;
        1.0 + u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// The weight `phi_n(x) = ramp(2^(n+1) x2)`: exactly 2 for `x2 >= 2^-n`,
/// exactly 1 for `x2 <= 2^-(n+1)`, pointwise non-decreasing in `n`.
#[derive(Clone, Copy, Debug)]
pub struct ProfileFamily {
    n: u32,
}

impl ProfileFamily {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("profile index must be >= 2, got {n}")));
        }
        Ok(ProfileFamily { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Height below which the weight is exactly 1.
    pub fn strip_height(&self) -> f64 {
        2f64.powi(-(self.n as i32 + 1))
    }
}

impl ScalarField for ProfileFamily {
    fn eval(&self, p: Point) -> f64 {
        smoothstep_ramp(p.x2 * 2f64.powi(self.n as i32 + 1))
    }
    fn describe(&self) -> String {
        format!("profile n={}", self.n)
    }
}

/// Profile weight value; `n >= 2`, points taken in the unit square.
pub fn phi_profile(n: u32, p: Point) -> f64 {
    debug_assert!(n >= 2);
    smoothstep_ramp(p.x2 * 2f64.powi(n as i32 + 1))
}

/// The three-piece staircase from `a` down into the cheap strip and back up
/// to `b`, with pieces on parameter thirds.
pub fn staircase_curve(n: u32) -> Curve {
    let y = 2f64.powi(-(n as i32 + 1));
    Curve::new(vec![
        (0.0, POINT_A),
        (1.0 / 3.0, Point::new(POINT_A.x1, y)),
        (2.0 / 3.0, Point::new(POINT_B.x1, y)),
        (1.0, POINT_B),
    ])
    .expect("staircase parameters are valid")
}

/// Builder for the family's solvers on one shared grid, so monotonicity
/// comparisons are exact at the graph level.
#[derive(Clone, Copy, Debug)]
pub struct CounterexampleFamily {
    pub h: f64,
    pub stencil: StencilOrder,
}

impl CounterexampleFamily {
    pub fn new(h: f64, stencil: StencilOrder) -> Self {
        CounterexampleFamily { h, stencil }
    }

    pub fn domain(&self) -> Rect {
        Rect::unit_square()
    }

    /// Largest profile index whose strip is resolved by at least
    /// `STRIP_MIN_CELLS` grid cells.
    pub fn max_resolved_n(h: f64) -> u32 {
        let mut n = 2;
        while 2f64.powi(-(n as i32 + 2)) >= tols::STRIP_MIN_CELLS * h {
            n += 1;
        }
        n
    }

    pub fn check_resolved(&self, n: u32) -> Result<()> {
        let required = 2f64.powi(-(n as i32 + 1)) / tols::STRIP_MIN_CELLS;
        if self.h > required {
            return Err(Error::StripUnresolved { n, h: self.h, required });
        }
        Ok(())
    }

    pub fn solver(&self, n: u32) -> Result<Arc<DistanceSolver>> {
        self.check_resolved(n)?;
        let profile = ProfileFamily::new(n)?;
        let metric = ConformalMetric::new(Arc::new(profile), 1.0, 2.0)?;
        Ok(Arc::new(build_solver(self.domain(), metric, self.h, self.stencil)?))
    }

    /// The constant weight 2 solver: the metric the family fails to reach.
    pub fn reference_solver(&self) -> Result<Arc<DistanceSolver>> {
        Ok(Arc::new(build_solver(
            self.domain(),
            ConformalMetric::constant(2.0)?,
            self.h,
            self.stencil,
        )?))
    }

    /// Proxy for the limit distance: the largest resolved profile index. The
    /// limit is not induced by any conformal weight (it is not a length
    /// distance), so it is only reachable through the family's tail.
    pub fn proxy_solver(&self) -> Result<Arc<DistanceSolver>> {
        self.solver(Self::max_resolved_n(self.h))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleRow {
    pub n: u32,
    pub d_ab: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub h: f64,
    pub stencil: u32,
    pub tol: f64,
    pub rows: Vec<CounterexampleRow>,
    pub reference_d_ab: f64,
    pub reference_ok: bool,
    pub monotone_ok: bool,
    /// Geometric-tail estimate of the family limit from the last increments.
    pub limit_estimate: f64,
    /// Distance at the largest computed index, the limit proxy.
    pub proxy_value: f64,
    pub limit_ok: bool,
    pub pass: bool,
}

pub struct CounterexampleRun {
    pub report: CounterexampleReport,
    /// `(n, geodesic a -> b)` per requested index, for plots.
    pub geodesics: Vec<(u32, Curve)>,
}

#[derive(Clone, Debug)]
pub struct CounterexampleOptions {
    pub n_values: Vec<u32>,
    pub h: f64,
    pub tol: f64,
    pub stencil: StencilOrder,
    pub threads: usize,
    pub collect_geodesics: bool,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions {
            n_values: tols::COUNTEREXAMPLE_N_VALUES.to_vec(),
            h: tols::COUNTEREXAMPLE_H,
            tol: tols::COUNTEREXAMPLE_BOUND_SLACK,
            stencil: StencilOrder::Two,
            threads: 1,
            collect_geodesics: false,
        }
    }
}

fn geometric_tail_estimate(values: &[f64]) -> f64 {
    let k = values.len();
    if k < 3 {
        return values[k - 1];
    }
    let d1 = values[k - 1] - values[k - 2];
    let d0 = values[k - 2] - values[k - 3];
    if d0 <= 0.0 || d1 <= 0.0 {
        return values[k - 1];
    }
    let rho = (d1 / d0).clamp(0.0, 0.9);
    values[k - 1] + d1 * rho / (1.0 - rho)
}

/// Run the collapsing-strip experiment with defaults (16-neighbor stencil,
/// single worker): a distance table over `n_values`, the constant-2 reference
/// run, monotonicity and staircase-bound verdicts, and a tail estimate of the
/// limit checked against the proxy value.
pub fn run_counterexample(n_values: &[u32], h: f64, tol: f64) -> Result<CounterexampleReport> {
    let opts = CounterexampleOptions {
        n_values: n_values.to_vec(),
        h,
        tol,
        ..CounterexampleOptions::default()
    };
    Ok(run_counterexample_with(&opts)?.report)
}

pub fn run_counterexample_with(opts: &CounterexampleOptions) -> Result<CounterexampleRun> {
    if opts.n_values.is_empty() {
        return Err(Error::Argument("counterexample needs at least one profile index".into()));
    }
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(Error::Argument("counterexample tol must be positive".into()));
    }
    let mut n_values = opts.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    let family = CounterexampleFamily::new(opts.h, opts.stencil);
    for &n in &n_values {
        family.check_resolved(n)?;
    }

    let reference = family.reference_solver()?;
    let reference_d_ab = reference.distance(POINT_A, POINT_B)?;
    drop(reference);
    let reference_ok =
        (reference_d_ab - tols::REFERENCE_D_AB).abs() <= tols::REFERENCE_REL_TOL * tols::REFERENCE_D_AB;

    let per_n = parallel_map(&n_values, opts.threads, |&n| -> Result<(f64, Option<Curve>)> {
        let solver = family.solver(n)?;
        let d = solver.distance(POINT_A, POINT_B)?;
        let geo = if opts.collect_geodesics {
            Some(solver.geodesic(POINT_A, POINT_B)?)
        } else {
            None
        };
        Ok((d, geo))
    });

    let mut rows = Vec::with_capacity(n_values.len());
    let mut geodesics = Vec::new();
    let mut values = Vec::with_capacity(n_values.len());
    for (&n, item) in n_values.iter().zip(per_n) {
        let (d, geo) = item?;
        values.push(d);
        rows.push(CounterexampleRow {
            n,
            d_ab: d,
            within_bound: d <= tols::COUNTEREXAMPLE_BOUND + opts.tol,
        });
        if let Some(g) = geo {
            geodesics.push((n, g));
        }
    }

    let monotone_ok = values.windows(2).all(|w| w[1] >= w[0] - opts.tol);
    let proxy_value = *values.last().unwrap();
    let limit_estimate = geometric_tail_estimate(&values);
    let limit_ok = (limit_estimate - proxy_value).abs() <= opts.tol;
    let pass = reference_ok
        && monotone_ok
        && limit_ok
        && rows.iter().all(|r| r.within_bound);

    Ok(CounterexampleRun {
        report: CounterexampleReport {
            h: opts.h,
            stencil: opts.stencil.order(),
            tol: opts.tol,
            rows,
            reference_d_ab,
            reference_ok,
            monotone_ok,
            limit_estimate,
            proxy_value,
            limit_ok,
            pass,
        },
        geodesics,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NotLengthReport {
    pub candidate_lengths: Vec<f64>,
    pub all_converged: bool,
    pub min_length: f64,
    pub proxy_distance: f64,
    pub gap: f64,
    pub min_length_ok: bool,
    pub proxy_ok: bool,
    pub gap_ok: bool,
    pub pass: bool,
}

/// Certify that the limit proxy is not a length distance: every candidate
/// curve joining the probe points has measured length near `7/4`, while the
/// proxy distance stays near the staircase bound `11/8`. Candidates should
/// live at heights the proxy already prices like the limit (well above the
/// proxy's own cheap strip).
pub fn verify_not_length(
    d_proxy: &dyn DistanceOracle,
    candidate_curves: &[Curve],
    policy: &RefinementPolicy,
) -> Result<NotLengthReport> {
    if candidate_curves.len() < 3 {
        return Err(Error::Argument("need at least 3 candidate curves".into()));
    }
    let (a, b) = (candidate_curves[0].start(), candidate_curves[0].end());
    for c in candidate_curves {
        if c.start() != a || c.end() != b {
            return Err(Error::Argument("candidate curves must share endpoints".into()));
        }
    }
    let mut lengths = Vec::with_capacity(candidate_curves.len());
    let mut all_converged = true;
    for c in candidate_curves {
        let est = curve_length(d_proxy, c, policy)?;
        all_converged &= est.converged;
        lengths.push(est.value);
    }
    let min_length = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let proxy_distance = d_proxy.dist(a, b)?;
    let gap = min_length - proxy_distance;
    let min_length_ok = min_length >= tols::NOT_LENGTH_MIN_LENGTH;
    let proxy_ok = proxy_distance <= tols::COUNTEREXAMPLE_BOUND + tols::COUNTEREXAMPLE_BOUND_SLACK;
    let gap_ok = gap >= tols::NOT_LENGTH_MIN_GAP;
    Ok(NotLengthReport {
        candidate_lengths: lengths,
        all_converged,
        min_length,
        proxy_distance,
        gap,
        min_length_ok,
        proxy_ok,
        gap_ok,
        pass: min_length_ok && proxy_ok && gap_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_exact_on_the_plateaus() {
        // weight 2 from the strip top upward
        assert_eq!(phi_profile(3, Point::new(0.5, 0.5)), 2.0);
        assert_eq!(phi_profile(3, Point::new(0.5, 0.125)), 2.0);
        // weight 1 in the cheap strip
        assert_eq!(phi_profile(3, Point::new(0.5, 1.0 / 32.0)), 1.0);
        assert_eq!(phi_profile(3, Point::new(0.5, 1.0 / 16.0)), 1.0);
        // strictly between on the ramp
        let v = phi_profile(3, Point::new(0.5, 3.0 / 32.0));
        assert!(v > 1.0 && v < 2.0);
    }

    #[test]
    fn profile_monotone_in_n_and_ramp_monotone() {
        for k in 0..200 {
            let x2 = (k as f64 + 0.5) / 200.0;
            for n in 2..9 {
                let p = Point::new(0.3, x2);
                assert!(
                    phi_profile(n + 1, p) >= phi_profile(n, p),
                    "monotonicity fails at x2={x2} n={n}"
                );
            }
        }
        let mut prev = smoothstep_ramp(1.0);
        for k in 1..=100 {
            let v = smoothstep_ramp(1.0 + k as f64 / 100.0);
            assert!(v > prev, "ramp must be strictly increasing");
            prev = v;
        }
    }

    #[test]
    fn ramp_is_c1_at_the_junctions() {
        let eps = 1e-6;
        for s in [1.0, 2.0] {
            let slope_in = (smoothstep_ramp(s + eps) - smoothstep_ramp(s - eps)) / (2.0 * eps);
            assert!(slope_in.abs() < 1e-4, "ramp derivative at {s} should vanish, got {slope_in}");
        }
    }

    #[test]
    fn staircase_geometry() {
        for n in [2u32, 5, 9] {
            let c = staircase_curve(n);
            assert_eq!(c.start(), POINT_A);
            assert_eq!(c.end(), POINT_B);
            let expected = 7.0 / 8.0 + 2.0 * (1.0 / 8.0 - 2f64.powi(-(n as i32 + 1)));
            assert!((c.euclid_length() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_guard_rejects_coarse_grids() {
        let fam = CounterexampleFamily::new(2f64.powi(-8), StencilOrder::Two);
        assert!(fam.check_resolved(5).is_ok());
        assert!(matches!(fam.check_resolved(6), Err(Error::StripUnresolved { n: 6, .. })));
        assert_eq!(CounterexampleFamily::max_resolved_n(2f64.powi(-8)), 5);
        assert_eq!(CounterexampleFamily::max_resolved_n(2f64.powi(-12)), 9);
    }

    #[test]
    fn tail_estimate_extends_geometric_tables() {
        // geometric approach to 2.0 with ratio 1/2
        let values = [1.0, 1.5, 1.75, 1.875];
        let est = geometric_tail_estimate(&values);
        assert!((est - 2.0).abs() < 1e-12, "got {est}");
        assert_eq!(geometric_tail_estimate(&[1.0, 1.0, 1.0]), 1.0);
        assert_eq!(geometric_tail_estimate(&[3.0]), 3.0);
    }
}
