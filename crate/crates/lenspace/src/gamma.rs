//! Sequential convergence certificates for the length, energy and indicator
//! functionals along families of solver metrics.
//!
//! Full variational convergence quantifies over all approaching sequences,
//! which is not finitely checkable; these harnesses evaluate the constructive
//! inequality chains on supplied families plus the recovery devices
//! (piecewise-geodesic interpolation, localized Dirac measures,
//! inf-convolution), with every slack term certified by the metric bounds.
//! All margins vanish identically for a constant sequence, the brute-force
//! equivalence baseline.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::functionals::{eval_f, eval_j, inf_convolution, DiscreteMeasure, FVerdict, PairSet};
use crate::geom::{Curve, Point, Rect};
use crate::length::{chord_sum, curve_length, refined_partition, RefinementPolicy};
use crate::oracle::DistanceOracle;
use crate::sampling::{halton_pairs, lattice_points};
use crate::solver::{validate_membership, DistanceSolver, MembershipReport};

/// Closed rectangles `K_j` = domain shrunk inward by `2^-j`, an exhaustion of
/// the open domain: `K_j` grows with `j` and absorbs every compact subset.
#[derive(Clone, Copy, Debug)]
pub struct CompactExhaustion {
    domain: Rect,
}

impl CompactExhaustion {
    pub fn new(domain: Rect) -> Self {
        CompactExhaustion { domain }
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// `K_j`, when nonempty.
    pub fn rect(&self, j: u32) -> Option<Rect> {
        self.domain.inset(2f64.powi(-(j as i32)))
    }

    /// Smallest index with a nonempty member.
    pub fn first_index(&self) -> u32 {
        let mut j = 0;
        while self.rect(j).is_none() {
            j += 1;
            assert!(j < 64, "degenerate exhaustion domain");
        }
        j
    }

    /// Smallest index whose member contains all `points` (with a small
    /// interior margin so jittered companions stay inside).
    pub fn absorbing_index(&self, points: impl IntoIterator<Item = Point>) -> Result<u32> {
        let mut margin = f64::INFINITY;
        for p in points {
            margin = margin.min(self.domain.boundary_margin(p));
        }
        if margin <= 0.0 || margin.is_nan() {
            return Err(Error::Argument(
                "points must lie strictly inside the domain to be absorbed".into(),
            ));
        }
        let mut j = self.first_index();
        while 2f64.powi(-(j as i32)) > margin {
            j += 1;
            if j >= 60 {
                return Err(Error::Argument("points too close to the boundary to absorb".into()));
            }
        }
        Ok(j)
    }
}

/// Max of `|d1 - d2|` over a deterministic sample of `K_j x K_j`: an `m x m`
/// lattice (all pairs, which includes every lattice-neighbor pair) plus
/// `samples` low-discrepancy far pairs, accumulated over all indices up to
/// `j` so the estimate is monotone non-decreasing in `j` by construction.
pub fn sup_gap_on_compact(
    d1: &dyn DistanceOracle,
    d2: &dyn DistanceOracle,
    exhaustion: &CompactExhaustion,
    j: u32,
    samples: usize,
) -> Result<f64> {
    const LATTICE_M: usize = 5;
    let j0 = exhaustion.first_index();
    if exhaustion.rect(j).is_none() {
        return Err(Error::Argument(format!("exhaustion member {j} is empty")));
    }
    let mut gap: f64 = 0.0;
    for jj in j0..=j.max(j0) {
        let rect = match exhaustion.rect(jj) {
            Some(r) => r,
            None => continue,
        };
        let lattice = lattice_points(rect, LATTICE_M);
        d1.prepare_sources(&lattice);
        d2.prepare_sources(&lattice);
        for (ai, &a) in lattice.iter().enumerate() {
            for &b in lattice.iter().skip(ai + 1) {
                gap = gap.max((d1.dist(a, b)? - d2.dist(a, b)?).abs());
            }
        }
        for (a, b) in halton_pairs(rect, samples, 1) {
            gap = gap.max((d1.dist(a, b)? - d2.dist(a, b)?).abs());
        }
    }
    Ok(gap)
}

/// Piecewise-geodesic interpolation of `curve` at the parameters `i / r`:
/// the recovery device for the length functional. The output agrees with
/// `curve` at every interpolation parameter and each piece is a solver
/// geodesic.
pub fn recovery_curve(curve: &Curve, solver: &DistanceSolver, r: usize) -> Result<Curve> {
    if r < 1 {
        return Err(Error::Argument("recovery interpolation needs r >= 1".into()));
    }
    let mut samples: Vec<(f64, Point)> = Vec::new();
    for i in 1..=r {
        let (t0, t1) = ((i - 1) as f64 / r as f64, i as f64 / r as f64);
        let piece = solver.geodesic(curve.eval(t0), curve.eval(t1))?;
        for &(tau, p) in piece.samples() {
            let t = if i == r && tau == 1.0 { 1.0 } else { t0 + tau * (t1 - t0) };
            if let Some(&(t_prev, _)) = samples.last() {
                if t <= t_prev {
                    continue;
                }
            }
            samples.push((t, p));
        }
    }
    Curve::new(samples)
}

/// A `[0, 1]`-valued cutoff on pairs of points.
pub trait PairCutoff: Send + Sync {
    fn eval(&self, x: Point, y: Point) -> f64;
}

/// Product ball `{(x, y) : |x - cx| <= r and |y - cy| <= r}`, the compact
/// region a localization concentrates on.
#[derive(Clone, Copy, Debug)]
pub struct PairBall {
    pub center_x: Point,
    pub center_y: Point,
    pub radius: f64,
}

impl PairBall {
    pub fn contains(&self, x: Point, y: Point) -> bool {
        x.euclid(self.center_x) <= self.radius && y.euclid(self.center_y) <= self.radius
    }
}

/// Smooth product bump supported on a pair ball, equal to 1 at the center.
#[derive(Clone, Copy, Debug)]
pub struct BumpCutoff {
    pub ball: PairBall,
}

fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s
    }
}

impl PairCutoff for BumpCutoff {
    fn eval(&self, x: Point, y: Point) -> f64 {
        bump(x.euclid(self.ball.center_x) / self.ball.radius)
            * bump(y.euclid(self.ball.center_y) / self.ball.radius)
    }
}

/// Localize an atomic measure: reweight by the cutoff and normalize to a
/// probability measure supported inside the ball. Atoms the cutoff kills are
/// dropped; a vanishing cutoff mass is an error.
pub fn localized_measure(
    mu: &DiscreteMeasure,
    eta: &dyn PairCutoff,
    ball: &PairBall,
) -> Result<DiscreteMeasure> {
    let mut weighted: Vec<(Point, Point, f64)> = Vec::new();
    let mut lambda = 0.0;
    for &(x, y, w) in mu.atoms() {
        let e = eta.eval(x, y);
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Argument(format!("cutoff value {e} outside [0, 1]")));
        }
        let we = w * e;
        if we > 0.0 {
            if !ball.contains(x, y) {
                return Err(Error::Argument(
                    "cutoff does not vanish outside the localization ball".into(),
                ));
            }
            weighted.push((x, y, we));
            lambda += we;
        }
    }
    if lambda <= 0.0 {
        return Err(Error::DegenerateLocalization);
    }
    DiscreteMeasure::new(weighted.into_iter().map(|(x, y, w)| (x, y, w / lambda)).collect())
}

/// An indexed family of solver metrics inside one sandwich class.
pub struct MetricSequence {
    solvers: Vec<Arc<DistanceSolver>>,
    alpha: f64,
}

impl MetricSequence {
    pub fn new(solvers: Vec<Arc<DistanceSolver>>, alpha: f64) -> Result<Self> {
        if solvers.is_empty() {
            return Err(Error::Argument("metric sequence must be nonempty".into()));
        }
        if alpha <= 1.0 || alpha.is_nan() {
            return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
        }
        let domain = solvers[0].grid().rect;
        if solvers.iter().any(|s| s.grid().rect != domain) {
            return Err(Error::Argument("sequence entries must share the domain".into()));
        }
        Ok(MetricSequence { solvers, alpha })
    }

    pub fn solvers(&self) -> &[Arc<DistanceSolver>] {
        &self.solvers
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn domain(&self) -> Rect {
        self.solvers[0].grid().rect
    }

    /// Class-membership reports for every entry.
    pub fn validate(&self, pair_samples: usize, tol: f64) -> Result<Vec<MembershipReport>> {
        self.solvers
            .iter()
            .map(|s| validate_membership(s, self.alpha, pair_samples, tol))
            .collect()
    }

    /// Default interpolation schedule `r_n = floor(1 / sqrt(gap_n))` clamped
    /// to `[1, 64]`, which keeps `r_n * gap_n -> 0` whenever the gaps vanish.
    pub fn default_r_schedule(gaps: &[f64]) -> Vec<usize> {
        gaps.iter()
            .map(|&g| {
                if g <= 0.0 {
                    64
                } else {
                    (1.0 / g.sqrt()).floor().clamp(1.0, 64.0) as usize
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaLRow {
    pub n_index: usize,
    pub sup_gap: f64,
    pub r: usize,
    /// `max(0, S_lim(curve) - S_n(jittered) - certified slack)` on the shared
    /// refined partition.
    pub liminf_margin: f64,
    /// `max(0, L_n(recovery) - r * gap - L_lim(curve))`.
    pub limsup_margin: f64,
    /// Sup deviation of the recovery curve from the original.
    pub recovery_dev: f64,
    /// `(lambda + alpha L_D(curve)) / r` plus two grid steps.
    pub recovery_dev_bound: f64,
    pub recovery_dev_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaLCurveReport {
    pub curve_index: usize,
    pub length_limit: f64,
    pub rows: Vec<GammaLRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaLReport {
    pub per_curve: Vec<GammaLCurveReport>,
    pub max_liminf_margin: f64,
    pub max_limsup_margin: f64,
    pub recovery_dev_all_ok: bool,
}

impl GammaLReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_liminf_margin <= tol && self.max_limsup_margin <= tol && self.recovery_dev_all_ok
    }
}

/// Sequential convergence certificate for the length functional: per curve
/// and per sequence entry, a liminf margin from certified perturbation
/// moduli on a shared refined partition, and a limsup margin from the
/// piecewise-geodesic recovery device.
pub fn gamma_l_check(
    seq: &MetricSequence,
    limit: &dyn DistanceOracle,
    test_curves: &[Curve],
    r_schedule: Option<&[usize]>,
    seed: u64,
) -> Result<GammaLReport> {
    if test_curves.is_empty() {
        return Err(Error::Argument("need at least one test curve".into()));
    }
    if let Some(sched) = r_schedule {
        if sched.len() != seq.solvers.len() {
            return Err(Error::Argument("r schedule length must match the sequence".into()));
        }
    }
    let exhaustion = CompactExhaustion::new(seq.domain());
    let policy = RefinementPolicy { initial_partition_size: 1, stop_tol: 1e-4, max_levels: 7 };
    let mut per_curve = Vec::new();
    let mut max_liminf: f64 = 0.0;
    let mut max_limsup: f64 = 0.0;
    let mut dev_all_ok = true;

    for (ci, curve) in test_curves.iter().enumerate() {
        let j = exhaustion.absorbing_index(curve.samples().iter().map(|&(_, p)| p))?;
        let l_limit = curve_length(limit, curve, &policy)?.value;
        let params = refined_partition(limit, curve, &policy)?;
        let lambda = curve.euclid_lipschitz();
        let l_ambient = curve.euclid_length();

        let mut rows = Vec::new();
        for (ni, solver) in seq.solvers.iter().enumerate() {
            let sampled_gap = sup_gap_on_compact(solver, limit, &exhaustion, j, 16)?;
            let r = match r_schedule {
                Some(s) => s[ni],
                None => MetricSequence::default_r_schedule(&[sampled_gap])[0],
            };

            // recovery device and its interpolation partition
            let rec = recovery_curve(curve, solver, r)?;
            let r_params: Vec<f64> = (0..=r).map(|i| i as f64 / r as f64).collect();
            let mut l_rec = 0.0;
            let mut gap = sampled_gap;
            for w in r_params.windows(2) {
                let (p, q) = (curve.eval(w[0]), curve.eval(w[1]));
                let dn = solver.distance(p, q)?;
                let dl = limit.dist(p, q)?;
                l_rec += dn;
                gap = gap.max((dn - dl).abs());
            }
            // report the limit length improved by the same-partition sum: any
            // partition sum is a certified lower bound of the length
            let l_lim_reported = l_limit.max(chord_sum(limit, curve, &r_params)?);
            let limsup_margin = (l_rec - r as f64 * gap - l_lim_reported).max(0.0);

            let recovery_dev = rec.sup_deviation(curve);
            let recovery_dev_bound =
                (lambda + seq.alpha * l_ambient) / r as f64 + 2.0 * solver.h();
            let recovery_dev_ok = recovery_dev <= recovery_dev_bound;

            // liminf side, on the node-snapped companion of the refined
            // partition: at grid nodes the solver metric is an exact graph
            // metric, so the perturbation modulus and the per-chord metric
            // gap are computable instead of bounded
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((ci as u64) << 32) ^ ni as u64);
            let q_steps = ((sampled_gap / solver.h()).floor() as i32).min(2);
            let grid = solver.grid();
            let snapped: Vec<Point> = params
                .iter()
                .map(|&t| grid.point_of(grid.nearest_node(curve.eval(t))))
                .collect();
            let jittered: Vec<Point> = snapped
                .iter()
                .map(|&p| {
                    let (i, jj) = grid.ij(grid.nearest_node(p));
                    let (di, dj): (i32, i32) = match rng.gen_range(0..4u8) {
                        0 => (q_steps, 0),
                        1 => (-q_steps, 0),
                        2 => (0, q_steps),
                        _ => (0, -q_steps),
                    };
                    let (i2, j2) = (i as i32 + di, jj as i32 + dj);
                    if i2 >= 0 && j2 >= 0 && (i2 as usize) < grid.nx && (j2 as usize) < grid.ny {
                        grid.point(i2 as usize, j2 as usize)
                    } else {
                        p
                    }
                })
                .collect();
            let mut s_lim_snap = 0.0;
            let mut s_n_jit = 0.0;
            let mut chord_gap_sum = 0.0;
            let mut move_sum = 0.0;
            for w in snapped.windows(2) {
                let dl = limit.dist(w[0], w[1])?;
                let dn = solver.distance(w[0], w[1])?;
                s_lim_snap += dl;
                chord_gap_sum += (dl - dn).abs();
            }
            for w in jittered.windows(2) {
                s_n_jit += solver.distance(w[0], w[1])?;
            }
            for (p, pj) in snapped.iter().zip(&jittered) {
                if p != pj {
                    // each node appears in two chords
                    move_sum += 2.0 * solver.distance(*p, *pj)?;
                }
            }
            let slack = chord_gap_sum + move_sum + 1e-11 * params.len() as f64;
            let liminf_margin = (s_lim_snap - s_n_jit - slack).max(0.0);

            max_liminf = max_liminf.max(liminf_margin);
            max_limsup = max_limsup.max(limsup_margin);
            dev_all_ok &= recovery_dev_ok;
            rows.push(GammaLRow {
                n_index: ni,
                sup_gap: gap,
                r,
                liminf_margin,
                limsup_margin,
                recovery_dev,
                recovery_dev_bound,
                recovery_dev_ok,
            });
        }
        per_curve.push(GammaLCurveReport { curve_index: ci, length_limit: l_limit, rows });
    }
    Ok(GammaLReport {
        per_curve,
        max_liminf_margin: max_liminf,
        max_limsup_margin: max_limsup,
        recovery_dev_all_ok: dev_all_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaJRow {
    pub n_index: usize,
    /// `J_{d_n}` of the Dirac at the pair, i.e. `d_n(x, y)`.
    pub j_value: f64,
    /// `J_{d_n}` of the localized recovery measure.
    pub recovery_value: f64,
    /// Certified localization slack `2 alpha r_ball + grid terms`.
    pub recovery_slack: f64,
    pub recovery_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaJPairReport {
    pub x: Point,
    pub y: Point,
    pub j_limit: f64,
    /// Infimum over the deepest tail (last quarter) of the sequence values.
    pub liminf_estimate: f64,
    /// `max(0, j_limit - liminf_estimate)`: positive when the family's limit
    /// undershoots the claimed limit at this pair.
    pub liminf_margin: f64,
    pub rows: Vec<GammaJRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaJReport {
    pub per_pair: Vec<GammaJPairReport>,
    pub max_liminf_margin: f64,
    pub max_recovery_margin: f64,
}

impl GammaJReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_liminf_margin <= tol && self.max_recovery_margin <= tol
    }
}

/// Sequential convergence certificate for the energy functional on Dirac
/// measures and their localizations.
pub fn gamma_j_check(
    seq: &MetricSequence,
    limit: &dyn DistanceOracle,
    atom_pairs: &[(Point, Point)],
) -> Result<GammaJReport> {
    if atom_pairs.is_empty() {
        return Err(Error::Argument("need at least one atom pair".into()));
    }
    let domain = seq.domain();
    let mut per_pair = Vec::new();
    let mut max_liminf: f64 = 0.0;
    let mut max_recovery: f64 = 0.0;
    for &(x, y) in atom_pairs {
        for p in [x, y] {
            if !domain.contains(p) {
                return Err(Error::OutsideDomain(p));
            }
        }
        let j_limit = eval_j(limit, &DiscreteMeasure::dirac(x, y))?;
        let margin_to_bdry = domain.boundary_margin(x).min(domain.boundary_margin(y));
        let r_ball = (0.05 * domain.diameter()).min(0.5 * margin_to_bdry);
        let ball = PairBall { center_x: x, center_y: y, radius: r_ball };
        let cutoff = BumpCutoff { ball };
        // fixed far atom the cutoff must kill
        let far = Point::new(
            domain.x1_lo + 0.9 * domain.width(),
            domain.x2_lo + 0.9 * domain.height(),
        );

        let mut rows = Vec::new();
        let mut values = Vec::with_capacity(seq.solvers.len());
        for (ni, solver) in seq.solvers.iter().enumerate() {
            let j_value = solver.distance(x, y)?;
            values.push(j_value);
            // weak* approaching measures: the Dirac, a companion atom
            // drifting in at the scale of the value gap, and far mass
            let rho = (j_value - j_limit).abs().min(0.5 * r_ball);
            let drift = (Point::new(x.x1 + rho, x.x2), Point::new(y.x1, y.x2 + rho));
            let mu = DiscreteMeasure::new(vec![
                (x, y, 1.0),
                (drift.0, drift.1, 0.5),
                (far, far, rho),
            ])?;
            let nu = localized_measure(&mu, &cutoff, &ball)?;
            let recovery_value = eval_j(solver, &nu)?;
            let model = solver.error_model();
            let recovery_slack = 2.0 * seq.alpha * (1.0 + model.anisotropy_bound) * r_ball
                + 2.0 * model.additive_bound;
            let recovery_margin = ((recovery_value - j_value).abs() - recovery_slack).max(0.0);
            max_recovery = max_recovery.max(recovery_margin);
            rows.push(GammaJRow { n_index: ni, j_value, recovery_value, recovery_slack, recovery_margin });
        }
        // finite proxy for the liminf: the infimum over the deepest tail
        let tail = (values.len() / 4).max(1);
        let liminf_estimate = values[values.len() - tail..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let liminf_margin = (j_limit - liminf_estimate).max(0.0);
        max_liminf = max_liminf.max(liminf_margin);
        per_pair.push(GammaJPairReport { x, y, j_limit, liminf_estimate, liminf_margin, rows });
    }
    Ok(GammaJReport { per_pair, max_liminf_margin: max_liminf, max_recovery_margin: max_recovery })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaFWitness {
    pub function_index: usize,
    pub witness: (Point, Point),
    /// First sequence index from which the witness violates 1-Lipschitzness
    /// under every later entry; `None` when it never stabilizes.
    pub stable_from: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaFRecoveryRow {
    pub function_index: usize,
    pub exhaustion_index: u32,
    pub n_index: usize,
    /// `sup_lattice |u - u_{n,i}|`.
    pub sup_u_gap: f64,
    /// `sup over lattice pairs |d_n - d_limit|`.
    pub sup_d_gap: f64,
    /// `max(0, sup_u_gap - sup_d_gap - float slack)`: the certified
    /// inf-convolution inequality.
    pub margin: f64,
    /// Indicator verdict of the recovery function at the lattice tolerance.
    pub f_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaFReport {
    pub witnesses: Vec<GammaFWitness>,
    pub recovery_rows: Vec<GammaFRecoveryRow>,
    /// Per (function, exhaustion index): first n with `sup_u_gap <= 1/i`.
    pub diagonal: Vec<(usize, u32, Option<usize>)>,
    pub max_recovery_margin: f64,
    pub all_f_zero: bool,
}

impl GammaFReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_recovery_margin <= tol
            && self.all_f_zero
            && self.diagonal.iter().all(|(_, _, n)| n.is_some())
    }
}

/// Sequential convergence certificate for the Lipschitz indicator: witnesses
/// that super-Lipschitz functions stay violated along the family, and
/// inf-convolution recovery functions whose sup-distance to the target is
/// bounded by the metric gap on each exhaustion member.
pub fn gamma_f_check(
    seq: &MetricSequence,
    limit: &dyn DistanceOracle,
    test_functions: &[Arc<dyn ScalarField>],
    exhaustion: &CompactExhaustion,
    lattice_m: usize,
) -> Result<GammaFReport> {
    if test_functions.is_empty() {
        return Err(Error::Argument("need at least one test function".into()));
    }
    let j0 = exhaustion.first_index() + 1;
    let indices: Vec<u32> = (j0..j0 + 3).collect();
    let base_rect = exhaustion
        .rect(*indices.last().unwrap())
        .ok_or_else(|| Error::Argument("exhaustion too shallow for the test domain".into()))?;
    let witness_pairs = PairSet::neighbors_and_far(base_rect, lattice_m.max(4), 32);

    let mut witnesses = Vec::new();
    let mut recovery_rows = Vec::new();
    let mut diagonal = Vec::new();
    let mut max_margin: f64 = 0.0;
    let mut all_f_zero = true;

    for (ui, u) in test_functions.iter().enumerate() {
        match eval_f(limit, u.as_ref(), &witness_pairs, 1e-9)? {
            FVerdict::Infinite { witness, .. } => {
                // liminf side: the violation must persist along the family
                let mut stable_from = None;
                for start in 0..seq.solvers.len() {
                    let mut all = true;
                    for solver in &seq.solvers[start..] {
                        let d = solver.distance(witness.0, witness.1)?;
                        if u.eval(witness.0) - u.eval(witness.1) <= d {
                            all = false;
                            break;
                        }
                    }
                    if all {
                        stable_from = Some(start);
                        break;
                    }
                }
                witnesses.push(GammaFWitness { function_index: ui, witness, stable_from });
            }
            FVerdict::Zero => {
                // limsup side: inf-convolution recovery over the exhaustion
                for &i in &indices {
                    let k_rect = exhaustion.rect(i).expect("index chosen nonempty");
                    let lattice = lattice_points(k_rect, lattice_m);
                    let mut first_n_within = None;
                    for (ni, solver) in seq.solvers.iter().enumerate() {
                        let oracle: Arc<dyn DistanceOracle> = solver.clone();
                        let conv = inf_convolution(u.clone(), oracle, k_rect, lattice_m)?;
                        let mut sup_u_gap: f64 = 0.0;
                        for &p in &lattice {
                            sup_u_gap = sup_u_gap.max((u.eval(p) - conv.eval(p)).abs());
                        }
                        let mut sup_d_gap: f64 = 0.0;
                        for (ai, &a) in lattice.iter().enumerate() {
                            for &b in lattice.iter().skip(ai + 1) {
                                sup_d_gap =
                                    sup_d_gap.max((solver.distance(a, b)? - limit.dist(a, b)?).abs());
                            }
                        }
                        let margin = (sup_u_gap - sup_d_gap - 1e-9).max(0.0);
                        let f_tol = 2.0 * conv.spacing() * seq.alpha;
                        let pairs_i = PairSet::neighbors_and_far(k_rect, lattice_m, 16);
                        let f_zero = eval_f(solver, &conv, &pairs_i, f_tol)?.is_zero();
                        if first_n_within.is_none() && sup_u_gap <= 1.0 / i as f64 {
                            first_n_within = Some(ni);
                        }
                        max_margin = max_margin.max(margin);
                        all_f_zero &= f_zero;
                        recovery_rows.push(GammaFRecoveryRow {
                            function_index: ui,
                            exhaustion_index: i,
                            n_index: ni,
                            sup_u_gap,
                            sup_d_gap,
                            margin,
                            f_zero,
                        });
                    }
                    diagonal.push((ui, i, first_n_within));
                }
            }
        }
    }
    Ok(GammaFReport {
        witnesses,
        recovery_rows,
        diagonal,
        max_recovery_margin: max_margin,
        all_f_zero,
    })
}
