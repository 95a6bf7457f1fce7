//! Convergence-harness integration tests on real solver families at coarse
//! grid resolution.

use std::sync::Arc;

use lenspace::counterexample::{staircase_curve, CounterexampleFamily, POINT_A, POINT_B};
use lenspace::fields::{DistanceToPoint, ScalarField, ScaledField};
use lenspace::gamma::{
    gamma_f_check, gamma_j_check, gamma_l_check, recovery_curve, sup_gap_on_compact,
    CompactExhaustion, MetricSequence,
};
use lenspace::geom::{Curve, Point, Rect};
use lenspace::oracle::{DistanceOracle, ScaledEuclidean};
use lenspace::solver::{DistanceSolver, StencilOrder};

fn family(h_exp: i32) -> CounterexampleFamily {
    CounterexampleFamily::new(2f64.powi(h_exp), StencilOrder::Two)
}

fn solvers(h_exp: i32, ns: &[u32]) -> Vec<Arc<DistanceSolver>> {
    let fam = family(h_exp);
    ns.iter().map(|&n| fam.solver(n).unwrap()).collect()
}

fn test_curves() -> Vec<Curve> {
    vec![Curve::segment(POINT_A, POINT_B), staircase_curve(3)]
}

fn test_functions(limit: Arc<dyn DistanceOracle>) -> Vec<Arc<dyn ScalarField>> {
    let u1: Arc<dyn ScalarField> =
        Arc::new(DistanceToPoint { oracle: limit, base: Point::new(0.5, 0.5) });
    let u2: Arc<dyn ScalarField> = Arc::new(ScaledField { inner: u1.clone(), factor: 2.0 });
    vec![u1, u2]
}

#[test]
fn constant_sequence_reports_zero_margins_everywhere() {
    let solver = family(-7).solver(3).unwrap();
    let seq = MetricSequence::new(vec![solver.clone(); 4], 2.0).unwrap();
    let limit: Arc<dyn DistanceOracle> = solver;

    let l = gamma_l_check(&seq, &limit, &test_curves(), None, 42).unwrap();
    assert!(l.max_liminf_margin <= 1e-9, "liminf margin {}", l.max_liminf_margin);
    assert!(l.max_limsup_margin <= 1e-9, "limsup margin {}", l.max_limsup_margin);
    assert!(l.recovery_dev_all_ok);

    let pairs = [(POINT_A, POINT_B), (Point::new(0.25, 0.5), Point::new(0.75, 0.5))];
    let j = gamma_j_check(&seq, &limit, &pairs).unwrap();
    assert!(j.max_liminf_margin <= 1e-9, "J liminf {}", j.max_liminf_margin);
    assert!(j.max_recovery_margin <= 1e-9, "J recovery {}", j.max_recovery_margin);

    let exhaustion = CompactExhaustion::new(Rect::unit_square());
    let f = gamma_f_check(&seq, &limit, &test_functions(limit.clone()), &exhaustion, 4).unwrap();
    assert!(f.passes(1e-9), "F margins {} f_zero {}", f.max_recovery_margin, f.all_f_zero);
    // the doubled distance function is flagged with a persistent witness
    assert_eq!(f.witnesses.len(), 1);
    assert_eq!(f.witnesses[0].stable_from, Some(0));
}

#[test]
fn recovery_of_a_solver_geodesic_reproduces_it() {
    let solver = family(-7).solver(3).unwrap();
    let geo = solver.geodesic(Point::new(0.2, 0.6), Point::new(0.8, 0.3)).unwrap();
    for r in [1usize, 3, 4] {
        let rec = recovery_curve(&geo, &solver, r).unwrap();
        assert_eq!(rec.start(), geo.start());
        assert_eq!(rec.end(), geo.end());
        // interpolation property at the partition
        for i in 0..=r {
            let t = i as f64 / r as f64;
            assert!(rec.eval(t).euclid(geo.eval(t)) <= 1e-9, "interpolation at {t}");
        }
        assert!(
            rec.sup_deviation(&geo) <= 4.0 * solver.h(),
            "geodesic pieces of a geodesic stray: {}",
            rec.sup_deviation(&geo)
        );
    }
}

#[test]
fn recovery_with_r_one_is_the_single_geodesic() {
    let solver = family(-7).solver(2).unwrap();
    let (x, y) = (Point::new(0.3, 0.4), Point::new(0.7, 0.7));
    let rec = recovery_curve(&Curve::segment(x, y), &solver, 1).unwrap();
    let geo = solver.geodesic(x, y).unwrap();
    assert_eq!(rec.samples().len(), geo.samples().len());
    for (a, b) in rec.samples().iter().zip(geo.samples()) {
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn recovery_deviation_respects_the_interpolation_bound() {
    let solver = family(-8).solver(4).unwrap();
    let curve = Curve::segment(POINT_A, POINT_B);
    let lambda = curve.euclid_lipschitz();
    let l_ambient = curve.euclid_length();
    for r in [1usize, 2, 4, 8, 16] {
        let rec = recovery_curve(&curve, &solver, r).unwrap();
        let dev = rec.sup_deviation(&curve);
        let bound = (lambda + 2.0 * l_ambient) / r as f64 + 2.0 * solver.h();
        assert!(dev <= bound, "r={r}: dev {dev} > bound {bound}");
    }
}

#[test]
fn profile_family_gamma_l_passes_against_the_double_euclid_limit() {
    // the lemma's content: lengths converge even though distances do not
    let seq = MetricSequence::new(solvers(-7, &[2, 3, 4]), 2.0).unwrap();
    let limit: Arc<dyn DistanceOracle> =
        Arc::new(ScaledEuclidean::new(2.0, Some(Rect::unit_square())).unwrap());
    let l = gamma_l_check(&seq, &limit, &test_curves(), None, 7).unwrap();
    assert!(
        l.passes(0.05),
        "liminf {} limsup {} dev_ok {}",
        l.max_liminf_margin,
        l.max_limsup_margin,
        l.recovery_dev_all_ok
    );
}

#[test]
fn profile_family_gamma_j_fails_against_the_double_euclid_limit() {
    // the same family does not converge to 2 * Euclid at the level of
    // distances: the energy check must flag the probe pair
    let seq = MetricSequence::new(solvers(-7, &[2, 3, 4]), 2.0).unwrap();
    let limit: Arc<dyn DistanceOracle> =
        Arc::new(ScaledEuclidean::new(2.0, Some(Rect::unit_square())).unwrap());
    let j = gamma_j_check(&seq, &limit, &[(POINT_A, POINT_B)]).unwrap();
    assert!(!j.passes(0.1), "must fail, margin {}", j.max_liminf_margin);
    let d4 = seq.solvers()[2].distance(POINT_A, POINT_B).unwrap();
    let expected = 1.75 - d4;
    assert!(
        (j.max_liminf_margin - expected).abs() <= 0.02,
        "margin {} vs expected {expected}",
        j.max_liminf_margin
    );
}

#[test]
fn profile_family_gamma_j_margin_shrinks_against_the_proxy_limit() {
    // Cauchy table: the mismatch against the family's own tail proxy decays
    let fam = family(-8);
    let mut margins = Vec::new();
    for proxy_n in [4u32, 5] {
        let ns: Vec<u32> = (2..proxy_n).collect();
        let seq = MetricSequence::new(solvers(-8, &ns), 2.0).unwrap();
        let limit = fam.solver(proxy_n).unwrap();
        let j = gamma_j_check(&seq, &limit, &[(POINT_A, POINT_B)]).unwrap();
        // the localized-recovery estimate chain is certified even while the
        // family drifts: recovery stays within the 2 alpha r slack
        assert!(j.max_recovery_margin <= 1e-9, "recovery margin {}", j.max_recovery_margin);
        margins.push(j.max_liminf_margin);
    }
    assert!(margins[1] < margins[0], "margins must decay: {margins:?}");
    assert!(margins[1] > 0.0);
}

#[test]
fn profile_family_gamma_f_recovery_certified_against_the_proxy_limit() {
    let seq = MetricSequence::new(solvers(-8, &[3, 4]), 2.0).unwrap();
    let limit = family(-8).solver(5).unwrap();
    let limit_oracle: Arc<dyn DistanceOracle> = limit;
    let exhaustion = CompactExhaustion::new(Rect::unit_square());
    let f = gamma_f_check(&seq, &limit_oracle, &test_functions(limit_oracle.clone()), &exhaustion, 4)
        .unwrap();
    // the inf-convolution inequality is certified regardless of convergence
    assert!(f.max_recovery_margin <= 1e-9, "margin {}", f.max_recovery_margin);
    assert!(f.all_f_zero);
    assert_eq!(f.witnesses.len(), 1, "the doubled function is a witness");
}

#[test]
fn sup_gap_cauchy_table_decays_along_the_family() {
    let fam = family(-8);
    let exhaustion = CompactExhaustion::new(Rect::unit_square());
    let mut gaps = Vec::new();
    for n in [2u32, 3, 4] {
        let a = fam.solver(n).unwrap();
        let b = fam.solver(n + 1).unwrap();
        gaps.push(sup_gap_on_compact(&a, &b, &exhaustion, 4, 16).unwrap());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps must decay: {gaps:?}");
    // consistent with the pointwise monotonicity of the family
    assert!(gaps.iter().all(|&g| g > 0.0));
}

#[test]
fn metric_sequence_validates_membership_of_every_entry() {
    let seq = MetricSequence::new(solvers(-7, &[2, 3]), 2.0).unwrap();
    let reports = seq.validate(64, 1e-6).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r.pass));
    assert!(MetricSequence::new(vec![], 2.0).is_err());
    assert!(MetricSequence::new(solvers(-7, &[2]), 1.0).is_err());
}
