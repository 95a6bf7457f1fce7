//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (run with `--nocapture` to see them all).
//!
//! Every tolerance is pinned in `lenspace::tolerances`; nothing here is
//! calibrated after the fact. Expected oracle values are computed inside the
//! tests by independent routes (1-D refraction minimization, analytic chord
//! sums), never read back from the implementation under test.

use std::sync::{Arc, OnceLock};

use lenspace::config::{Command, ExperimentConfig};
use lenspace::counterexample::{
    run_counterexample_with, staircase_curve, verify_not_length, CounterexampleFamily,
    CounterexampleOptions, CounterexampleReport, POINT_A, POINT_B,
};
use lenspace::experiment::run_experiment;
use lenspace::fields::{DistanceToPoint, ScalarField, ScaledField};
use lenspace::functionals::{eval_f, inf_convolution, mcshane_gap, PairSet};
use lenspace::gamma::{
    gamma_f_check, gamma_j_check, gamma_l_check, sup_gap_on_compact, CompactExhaustion,
    MetricSequence,
};
use lenspace::geom::{Curve, Point, Rect};
use lenspace::length::RefinementPolicy;
use lenspace::oracle::DistanceOracle;
use lenspace::sampling::{halton_pairs, halton_points, lattice_points};
use lenspace::solver::{validate_membership, DistanceSolver, StencilOrder};
use lenspace::tolerances as tols;

const PRODUCTION_H_EXP: i32 = -12;
/// Coarser suites: validation families resolved at these steps.
const SUITE_H8: i32 = -8;
const SUITE_H9: i32 = -9;

fn family(h_exp: i32) -> CounterexampleFamily {
    CounterexampleFamily::new(2f64.powi(h_exp), StencilOrder::Two)
}

/// The production distance table (criterions 1 and 2 share it).
fn production_table() -> &'static CounterexampleReport {
    static TABLE: OnceLock<CounterexampleReport> = OnceLock::new();
    TABLE.get_or_init(|| {
        let opts = CounterexampleOptions {
            n_values: tols::COUNTEREXAMPLE_N_VALUES.to_vec(),
            h: 2f64.powi(PRODUCTION_H_EXP),
            tol: tols::COUNTEREXAMPLE_BOUND_SLACK,
            stencil: StencilOrder::Two,
            threads: 2,
            collect_geodesics: false,
        };
        run_counterexample_with(&opts).expect("production run").report
    })
}

/// Validation family at 2^-8: every strip the grid resolves.
fn suite8() -> &'static Vec<(u32, Arc<DistanceSolver>)> {
    static SOLVERS: OnceLock<Vec<(u32, Arc<DistanceSolver>)>> = OnceLock::new();
    SOLVERS.get_or_init(|| {
        let fam = family(SUITE_H8);
        let n_max = CounterexampleFamily::max_resolved_n(2f64.powi(SUITE_H8));
        (2..=n_max).map(|n| (n, fam.solver(n).unwrap())).collect()
    })
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("acceptance {criterion}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion} failed: {detail}");
}

/// Criterion 1: counterexample reproduction at h = 2^-12 with the 16-neighbor
/// stencil: monotone within 1e-3, every value at most 11/8 + 0.007, the
/// constant-2 reference within 1% of 7/4.
#[test]
fn criterion_1_counterexample_reproduction() {
    let rep = production_table();
    assert_eq!(rep.rows.len(), 8);
    let values: Vec<f64> = rep.rows.iter().map(|r| r.d_ab).collect();
    let monotone = values.windows(2).all(|w| w[1] >= w[0] - tols::MONOTONE_SLACK);
    let bounded = values
        .iter()
        .all(|&v| v <= tols::COUNTEREXAMPLE_BOUND + tols::COUNTEREXAMPLE_BOUND_SLACK);
    let reference_ok = (rep.reference_d_ab - tols::REFERENCE_D_AB).abs()
        <= tols::REFERENCE_REL_TOL * tols::REFERENCE_D_AB;
    verdict(
        "criterion 1 (counterexample reproduction)",
        monotone && bounded && reference_ok,
        &format!(
            "d_n(a,b) = {values:?}, reference = {} (7/4 within 1%: {reference_ok})",
            rep.reference_d_ab
        ),
    );
}

/// Independent derivation of the limit value: minimize the layered-medium
/// cost f(s) = 4 sqrt(s^2 + 1/64) + 7/8 - 2 s by golden-section search.
fn refraction_oracle() -> f64 {
    let f = |s: f64| 4.0 * (s * s + 1.0 / 64.0).sqrt() + 7.0 / 8.0 - 2.0 * s;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 7.0 / 16.0);
    while hi - lo > 1e-13 {
        let m1 = hi - inv_phi * (hi - lo);
        let m2 = lo + inv_phi * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let value = f(0.5 * (lo + hi));
    // self-check against the closed form of the stationarity condition
    assert!((value - (7.0 / 8.0 + 3f64.sqrt() / 4.0)).abs() < 1e-10);
    assert!((0.5 * (lo + hi) - 1.0 / (8.0 * 3f64.sqrt())).abs() < 1e-6);
    value
}

/// Criterion 2: the proxy d_9(a,b) lands within 1.5% of the refraction
/// oracle, and an h/2 = 2^-13 grid run agrees with the oracle within 0.5%.
#[test]
fn criterion_2_limit_value_against_the_refraction_oracle() {
    let oracle = refraction_oracle();
    let rep = production_table();
    let d9 = rep.rows.last().unwrap().d_ab;
    let main_ok = (d9 - oracle).abs() <= tols::LIMIT_REL_TOL * oracle;

    let fine = CounterexampleFamily::new(2f64.powi(PRODUCTION_H_EXP - 1), StencilOrder::Two)
        .solver(9)
        .unwrap();
    let d9_fine = fine.distance(POINT_A, POINT_B).unwrap();
    let fine_ok = (d9_fine - oracle).abs() <= tols::LIMIT_CROSS_CHECK_REL_TOL * oracle;

    verdict(
        "criterion 2 (limit value)",
        main_ok && fine_ok,
        &format!(
            "oracle = {oracle:.6}, d_9 = {d9:.6} ({:+.3}%), d_9 at h/2 = {d9_fine:.6} ({:+.3}%)",
            (d9 - oracle) / oracle * 100.0,
            (d9_fine - oracle) / oracle * 100.0
        ),
    );
}

/// Criterion 3: not-a-length-distance certificate. Three candidate curves
/// joining a to b all measure near 7/4 under the limit proxy while the proxy
/// distance stays near 11/8: certified gap at least 0.34.
#[test]
fn criterion_3_not_a_length_distance_certificate() {
    let proxy = family(PRODUCTION_H_EXP).proxy_solver().unwrap();
    let candidates =
        vec![Curve::segment(POINT_A, POINT_B), staircase_curve(3), staircase_curve(4)];
    let policy = RefinementPolicy { initial_partition_size: 1, stop_tol: 1e-3, max_levels: 6 };
    let rep = verify_not_length(proxy.as_ref(), &candidates, &policy).unwrap();
    verdict(
        "criterion 3 (not a length distance)",
        rep.pass && rep.all_converged,
        &format!(
            "min length = {:.6} (>= {:.2}), proxy d(a,b) = {:.6} (<= {:.4}), gap = {:.4} (>= {})",
            rep.min_length,
            tols::NOT_LENGTH_MIN_LENGTH,
            rep.proxy_distance,
            tols::COUNTEREXAMPLE_BOUND + tols::COUNTEREXAMPLE_BOUND_SLACK,
            rep.gap,
            tols::NOT_LENGTH_MIN_GAP
        ),
    );
}

/// Criterion 4: class membership of every resolved profile metric at
/// alpha = 2: sandwich within 1e-6 relative over 512 pairs, geodesic
/// length-property gap within twice the grid error bound on 64 pairs.
#[test]
fn criterion_4_membership_suite() {
    let mut all = true;
    let mut lines = Vec::new();
    for (n, solver) in suite8() {
        let rep = validate_membership(
            solver,
            tols::MEMBERSHIP_ALPHA,
            tols::MEMBERSHIP_PAIRS,
            tols::MEMBERSHIP_REL_TOL,
        )
        .unwrap();
        assert_eq!(rep.length_pairs, 64);
        all &= rep.pass;
        lines.push(format!(
            "n={n}: sandwich {:.2e}, gap ratio {:.3}",
            rep.sandwich_max_violation_rel, rep.length_gap_ratio_max
        ));
    }
    verdict("criterion 4 (membership suite)", all, &lines.join("; "));
}

/// Criterion 5: equi-Lipschitz estimate on 1024 quadruples per metric:
/// |d(x,y) - d(xs,ys)| <= 2 (|x-xs| + |y-ys|) + 1e-6, perturbations along
/// stencil directions where the alpha bound is certified.
#[test]
fn criterion_5_equi_lipschitz() {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut all = true;
    for (_, solver) in suite8() {
        let g = solver.grid();
        let offsets = solver.stencil().offsets();
        let band = 16usize;
        let span_x = (g.nx - 2 * band - 14) as f64;
        let span_y = (g.ny - 2 * band - 14) as f64;
        let mut quads = 0;
        for s in 0..32u64 {
            let i = band + (lenspace::sampling::radical_inverse(s + 1, 2) * span_x) as usize;
            let j = band + (lenspace::sampling::radical_inverse(s + 1, 3) * span_y) as usize;
            let (di, dj) = offsets[(s % offsets.len() as u64) as usize];
            let m = 1 + (s % 7) as isize;
            let shift = |base: usize, d: i32| (base as isize + m * d as isize) as usize;
            let x = g.point(i, j);
            let xs = g.point(shift(i, di), shift(j, dj));
            let fx = solver.field_from(x).unwrap();
            let fxs = solver.field_from(xs).unwrap();
            for t in 0..32u64 {
                let ti = band
                    + (lenspace::sampling::radical_inverse(97 + s * 37 + t, 2) * span_x) as usize;
                let tj = band
                    + (lenspace::sampling::radical_inverse(97 + s * 37 + t, 3) * span_y) as usize;
                let (ei, ej) = offsets[(t % offsets.len() as u64) as usize];
                let mt = 1 + (t % 7) as isize;
                let tshift = |base: usize, d: i32| (base as isize + mt * d as isize) as usize;
                let y = g.point(ti, tj);
                let ys = g.point(tshift(ti, ei), tshift(tj, ej));
                let d_xy = fx.dist[g.node_at(y).unwrap() as usize];
                let d_xsys = fxs.dist[g.node_at(ys).unwrap() as usize];
                let lhs = (d_xy - d_xsys).abs();
                let rhs = 2.0 * (x.euclid(xs) + y.euclid(ys)) + tols::EQUI_LIPSCHITZ_SLACK;
                worst = worst.max(lhs - rhs);
                all &= lhs <= rhs;
                quads += 1;
            }
        }
        assert_eq!(quads, tols::EQUI_LIPSCHITZ_QUADS);
    }
    verdict(
        "criterion 5 (equi-Lipschitz)",
        all,
        &format!("worst excess over the bound: {worst:.3e}"),
    );
}

/// Criterion 6: recovery-curve chain for the straight a-b segment against
/// the profile family with its tail proxy: the limsup inequality holds at
/// tolerance 1e-6 for every n, and the interpolation deviation bound is
/// respected within two grid steps.
#[test]
fn criterion_6_recovery_curve_bound() {
    let fam = family(SUITE_H9);
    let n_max = CounterexampleFamily::max_resolved_n(2f64.powi(SUITE_H9));
    let solvers: Vec<Arc<DistanceSolver>> =
        (2..n_max).map(|n| fam.solver(n).unwrap()).collect();
    let seq = MetricSequence::new(solvers, 2.0).unwrap();
    let proxy: Arc<dyn DistanceOracle> = fam.solver(n_max).unwrap();
    let curve = Curve::segment(POINT_A, POINT_B);
    let rep = gamma_l_check(&seq, &proxy, &[curve], None, 11).unwrap();
    let rows = &rep.per_curve[0].rows;
    // the schedule keeps r_n * gap_n under the vanishing ceiling sqrt(gap_n)
    let ceilings: Vec<f64> = rows.iter().map(|r| r.sup_gap.sqrt()).collect();
    let ceiling_decays = ceilings.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let products_ok = rows
        .iter()
        .all(|r| r.r as f64 * r.sup_gap <= r.sup_gap.sqrt() + 1e-12);
    verdict(
        "criterion 6 (recovery-curve bound)",
        rep.max_limsup_margin <= 1e-6 && rep.recovery_dev_all_ok && ceiling_decays && products_ok,
        &format!(
            "limsup margin {:.3e}, dev ok {}, r*gap = {:?}",
            rep.max_limsup_margin,
            rep.recovery_dev_all_ok,
            rows.iter().map(|r| r.r as f64 * r.sup_gap).collect::<Vec<_>>()
        ),
    );
}

/// Criterion 7: inf-convolution suite. For the 1-Lipschitz distance-to-point
/// of the proxy metric, the recovery functions track it within the metric
/// gap on each exhaustion lattice, and each one passes the indicator at the
/// lattice tolerance.
#[test]
fn criterion_7_inf_convolution_suite() {
    let fam = family(SUITE_H9);
    let n_max = CounterexampleFamily::max_resolved_n(2f64.powi(SUITE_H9));
    let proxy = fam.solver(n_max).unwrap();
    let base = proxy.nearest_node_point(Point::new(0.5, 0.5));
    proxy.prepare_sources(&[base]);
    let proxy_oracle: Arc<dyn DistanceOracle> = proxy.clone();
    let u: Arc<dyn ScalarField> =
        Arc::new(DistanceToPoint { oracle: proxy_oracle.clone(), base });
    let exhaustion = CompactExhaustion::new(Rect::unit_square());
    let m = 5usize;
    let mut worst_gap_excess = f64::NEG_INFINITY;
    let mut all = true;
    for n in 2..n_max {
        let solver = fam.solver(n).unwrap();
        for i in [3u32, 4, 5] {
            let k_rect = exhaustion.rect(i).unwrap();
            let lattice = lattice_points(k_rect, m);
            let oracle: Arc<dyn DistanceOracle> = solver.clone();
            let conv = inf_convolution(u.clone(), oracle, k_rect, m).unwrap();
            let mut sup_u = 0.0f64;
            for &p in &lattice {
                sup_u = sup_u.max((u.eval(p) - conv.eval(p)).abs());
            }
            let mut sup_d = 0.0f64;
            for (ai, &a) in lattice.iter().enumerate() {
                for &b in lattice.iter().skip(ai + 1) {
                    sup_d =
                        sup_d.max((solver.distance(a, b).unwrap() - proxy.distance(a, b).unwrap()).abs());
                }
            }
            worst_gap_excess = worst_gap_excess.max(sup_u - sup_d);
            all &= sup_u <= sup_d + 1e-9;
            let pairs = PairSet::neighbors_and_far(k_rect, m, 16);
            let f_tol = 2.0 * conv.spacing() * tols::MEMBERSHIP_ALPHA;
            all &= eval_f(solver.as_ref(), &conv, &pairs, f_tol).unwrap().is_zero();
        }
    }
    verdict(
        "criterion 7 (inf-convolution suite)",
        all,
        &format!("max(sup|u - u_ni| - sup|d_n - d|) = {worst_gap_excess:.3e}"),
    );
}

/// Criterion 8: McShane representation. The gap vanishes whenever the target
/// is a generator, and it is non-increasing under generator-set growth on
/// 100 nested trials.
#[test]
fn criterion_8_mcshane_representation() {
    let solver = family(SUITE_H9).solver(4).unwrap();
    let inset = Rect::unit_square().inset(0.1).unwrap();
    let generators: Vec<Point> = halton_points(inset, 32, 200)
        .into_iter()
        .map(|p| solver.nearest_node_point(p))
        .collect();
    solver.prepare_sources(&generators);
    // trial points on grid nodes: there the graph metric is exact, so the
    // 1e-9 gap floor is meaningful (off-grid terminals would re-import the
    // documented terminal-linking slack)
    let trials: Vec<(Point, Point)> =
        halton_pairs(Rect::unit_square().inset(0.05).unwrap(), tols::MCSHANE_TRIALS, 1)
            .into_iter()
            .map(|(x, y)| (solver.nearest_node_point(x), solver.nearest_node_point(y)))
            .collect();
    let mut all_zero = true;
    let mut all_monotone = true;
    let mut worst_zero: f64 = 0.0;
    for (k, &(x, y)) in trials.iter().enumerate() {
        // nested growth: gaps can only shrink
        let g8 = mcshane_gap(solver.as_ref(), x, y, &generators[..8]).unwrap();
        let g16 = mcshane_gap(solver.as_ref(), x, y, &generators[..16]).unwrap();
        let g32 = mcshane_gap(solver.as_ref(), x, y, &generators).unwrap();
        all_monotone &= g16 <= g8 + 1e-12 && g32 <= g16 + 1e-12;
        assert!(g32 >= -1e-9, "gap must stay nonnegative, got {g32}");
        // target equal to a generator: exact representation
        let target = generators[k % generators.len()];
        let gz = mcshane_gap(solver.as_ref(), x, target, &generators).unwrap();
        worst_zero = worst_zero.max(gz.abs());
        all_zero &= gz.abs() <= tols::MCSHANE_TOL;
    }
    verdict(
        "criterion 8 (McShane representation)",
        all_zero && all_monotone,
        &format!("max |gap| at generator targets: {worst_zero:.3e}, monotone: {all_monotone}"),
    );
}

/// Criterion 9: degenerate baseline. For a constant sequence all three
/// convergence checks report margins at most 1e-9, on two different solvers.
#[test]
fn criterion_9_degenerate_gamma_baseline() {
    let mut all = true;
    let mut lines = Vec::new();
    let profile = family(SUITE_H8).solver(4).unwrap();
    let flat = Arc::new(
        lenspace::solver::build_solver(
            Rect::unit_square(),
            lenspace::solver::ConformalMetric::constant(1.0).unwrap(),
            2f64.powi(SUITE_H8),
            StencilOrder::Two,
        )
        .unwrap(),
    );
    for (tag, solver) in [("profile-4", profile), ("constant-1", flat)] {
        let seq = MetricSequence::new(vec![solver.clone(); 4], 2.0).unwrap();
        let limit: Arc<dyn DistanceOracle> = solver;
        let curves = [Curve::segment(POINT_A, POINT_B), staircase_curve(3)];
        let l = gamma_l_check(&seq, &limit, &curves, None, 3).unwrap();
        let pairs = [(POINT_A, POINT_B), (Point::new(0.3, 0.6), Point::new(0.7, 0.4))];
        let j = gamma_j_check(&seq, &limit, &pairs).unwrap();
        let u1: Arc<dyn ScalarField> =
            Arc::new(DistanceToPoint { oracle: limit.clone(), base: Point::new(0.5, 0.5) });
        let u2: Arc<dyn ScalarField> = Arc::new(ScaledField { inner: u1.clone(), factor: 2.0 });
        let f = gamma_f_check(
            &seq,
            &limit,
            &[u1, u2],
            &CompactExhaustion::new(Rect::unit_square()),
            4,
        )
        .unwrap();
        let ok = l.passes(tols::GAMMA_DEGENERATE_TOL)
            && j.passes(tols::GAMMA_DEGENERATE_TOL)
            && f.passes(tols::GAMMA_DEGENERATE_TOL);
        all &= ok;
        lines.push(format!(
            "{tag}: L ({:.1e}, {:.1e}), J ({:.1e}, {:.1e}), F {:.1e}",
            l.max_liminf_margin,
            l.max_limsup_margin,
            j.max_liminf_margin,
            j.max_recovery_margin,
            f.max_recovery_margin
        ));
    }
    verdict("criterion 9 (degenerate baseline)", all, &lines.join("; "));
}

/// Criterion 10: determinism. Two runs of the counterexample pipeline with
/// the same seed produce byte-identical CSV and JSON artifacts.
#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut artifacts = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let cfg = ExperimentConfig {
            command: Some(Command::Counterexample),
            h: Some(2f64.powi(SUITE_H9)),
            n_values: Some(vec![2, 3, 4, 5]),
            seed: 2024,
            threads: 2,
            out_dir: out.clone(),
            ..ExperimentConfig::default()
        };
        run_experiment(&cfg).unwrap();
        artifacts.push((
            std::fs::read(out.join("counterexample.csv")).unwrap(),
            std::fs::read(out.join("counterexample.json")).unwrap(),
        ));
    }
    let pass = artifacts[0] == artifacts[1];
    verdict(
        "criterion 10 (determinism)",
        pass,
        &format!(
            "csv {} bytes, json {} bytes, byte-identical: {pass}",
            artifacts[0].0.len(),
            artifacts[0].1.len()
        ),
    );
}

/// Companion check to the recovery criterion: the sup-gap Cauchy table of
/// the production family decays, tying the r-schedule precondition to data.
#[test]
fn recovery_schedule_precondition_gap_table() {
    let fam = family(SUITE_H9);
    let exhaustion = CompactExhaustion::new(Rect::unit_square());
    let n_max = CounterexampleFamily::max_resolved_n(2f64.powi(SUITE_H9));
    let proxy = fam.solver(n_max).unwrap();
    let mut gaps = Vec::new();
    for n in 2..n_max {
        let s = fam.solver(n).unwrap();
        gaps.push(sup_gap_on_compact(&s, &proxy, &exhaustion, 4, 16).unwrap());
    }
    let decays = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    verdict(
        "criterion 6 companion (gap table)",
        decays,
        &format!("sup gaps vs proxy: {gaps:?}"),
    );
}
