//! Experiment dispatch: build the configured solver(s), run the requested
//! check, emit reports. Exit status is the conjunction of the report
//! verdicts: no partial-success zero exits.

use std::path::PathBuf;
use std::sync::Arc;

use serde_json::json;

use crate::config::{Command, ExperimentConfig, GammaLimit, GammaSequence};
use crate::counterexample::{
    run_counterexample_with, staircase_curve, CounterexampleFamily, CounterexampleOptions,
};
use crate::error::{Error, Result};
use crate::fields::{DistanceToPoint, ScalarField, ScaledField, WeightRegistry};
use crate::gamma::{gamma_f_check, gamma_j_check, gamma_l_check, CompactExhaustion, MetricSequence};
use crate::geom::{Curve, Point, Rect};
use crate::oracle::{DistanceOracle, ScaledEuclidean};
use crate::report;
use crate::solver::{build_solver, validate_membership, ConformalMetric, DistanceSolver};
use crate::tolerances as tols;

pub struct RunOutcome {
    pub pass: bool,
    pub summary: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

fn build_from_config(cfg: &ExperimentConfig) -> Result<Arc<DistanceSolver>> {
    // collapsing-strip weights refuse grids that cannot resolve their strip,
    // so an ad-hoc query cannot silently flatten the cheap channel away
    if cfg.weight.kind == "profile" {
        if let Some(n) = cfg.weight.params.get("n").and_then(|v| v.as_u64()) {
            CounterexampleFamily::new(cfg.effective_h(), cfg.stencil_order()?)
                .check_resolved(n as u32)?;
        }
    }
    let registry = WeightRegistry::builtin();
    let weight = registry.resolve(&cfg.weight)?;
    let metric = ConformalMetric::from(weight);
    Ok(Arc::new(build_solver(
        cfg.domain_rect()?,
        metric,
        cfg.effective_h(),
        cfg.stencil_order()?,
    )?))
}

fn rel_point(rect: Rect, fx: f64, fy: f64) -> Point {
    Point::new(rect.x1_lo + fx * rect.width(), rect.x2_lo + fy * rect.height())
}

fn query_points(cfg: &ExperimentConfig) -> Result<(Point, Point)> {
    let x = cfg.x.ok_or_else(|| Error::config("x", "missing query point"))?;
    let y = cfg.y.ok_or_else(|| Error::config("y", "missing query point"))?;
    Ok((Point::new(x[0], x[1]), Point::new(y[0], y[1])))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    match cfg.command.expect("validated") {
        Command::Distance => run_distance(cfg),
        Command::Geodesic => run_geodesic(cfg),
        Command::Membership => run_membership(cfg),
        Command::Counterexample => run_counterexample_cmd(cfg),
        Command::Gamma => run_gamma(cfg),
    }
}

fn run_distance(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let solver = build_from_config(cfg)?;
    let (x, y) = query_points(cfg)?;
    let rect = solver.grid().rect;
    let (value, converged) = if rect.contains(x) && rect.contains(y) {
        (solver.distance(x, y)?, true)
    } else {
        let c = solver.extend_closure(x, y)?;
        (c.value, c.converged)
    };
    let (lo, hi) = solver.enclosure(value);
    let path = cfg.out_dir.join("distance.json");
    report::write_json(
        &path,
        &json!({
            "command": "distance",
            "oracle": solver.name(),
            "x": [x.x1, x.x2],
            "y": [y.x1, y.x2],
            "value": value,
            "converged": converged,
            "enclosure": [lo, hi],
        }),
    )?;
    Ok(RunOutcome {
        pass: converged,
        summary: vec![format!("distance({:?} -> {:?}) = {value} (enclosure [{lo}, {hi}])", (x.x1, x.x2), (y.x1, y.x2))],
        artifacts: vec![path],
    })
}

fn run_geodesic(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let solver = build_from_config(cfg)?;
    let (x, y) = query_points(cfg)?;
    let value = solver.distance(x, y)?;
    let curve = solver.geodesic(x, y)?;
    let path = cfg.out_dir.join("geodesic.json");
    report::write_json(
        &path,
        &json!({
            "command": "geodesic",
            "oracle": solver.name(),
            "value": value,
            "curve": curve.to_json(),
        }),
    )?;
    let mut artifacts = vec![path];
    if cfg.plots {
        let svg = cfg.out_dir.join("geodesic.svg");
        report::svg_curves(&svg, solver.grid().rect, &[("geodesic".into(), &curve)])?;
        artifacts.push(svg);
    }
    Ok(RunOutcome {
        pass: true,
        summary: vec![format!("geodesic length {value} through {} nodes", curve.samples().len())],
        artifacts,
    })
}

fn run_membership(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let solver = build_from_config(cfg)?;
    let alpha = cfg.alpha.unwrap_or(tols::MEMBERSHIP_ALPHA);
    let pairs = cfg.pair_samples.unwrap_or(tols::MEMBERSHIP_PAIRS);
    let rep = validate_membership(&solver, alpha, pairs, cfg.effective_tol())?;
    let path = cfg.out_dir.join("membership.json");
    report::write_json(&path, &rep)?;
    Ok(RunOutcome {
        pass: rep.pass,
        summary: vec![format!(
            "membership alpha={alpha}: sandwich violation {:.3e} (pass={}), length gap {:.3e} (pass={})",
            rep.sandwich_max_violation_rel, rep.sandwich_pass, rep.length_gap_max, rep.length_pass
        )],
        artifacts: vec![path],
    })
}

fn run_counterexample_cmd(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let opts = CounterexampleOptions {
        n_values: cfg.effective_n_values(),
        h: cfg.effective_h(),
        tol: cfg.effective_tol(),
        stencil: cfg.stencil_order()?,
        threads: cfg.threads,
        collect_geodesics: cfg.plots,
    };
    let run = run_counterexample_with(&opts)?;
    let rep = &run.report;

    let csv_path = cfg.out_dir.join("counterexample.csv");
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.d_ab.to_string(), r.within_bound.to_string()])
        .collect();
    report::write_csv(
        &csv_path,
        "lenspace counterexample table v1",
        &["n", "d_ab", "within_bound"],
        &rows,
    )?;
    let json_path = cfg.out_dir.join("counterexample.json");
    report::write_json(&json_path, rep)?;
    let mut artifacts = vec![csv_path, json_path];

    if cfg.plots && !run.geodesics.is_empty() {
        let svg = cfg.out_dir.join("counterexample_geodesics.svg");
        let labeled: Vec<(String, &Curve)> = run
            .geodesics
            .iter()
            .map(|(n, c)| (format!("n={n}"), c))
            .collect();
        report::svg_curves(&svg, cfg.domain_rect()?, &labeled)?;
        artifacts.push(svg);
    }

    let mut summary = vec![format!(
        "counterexample: reference d(a,b) = {} (ok={}), monotone={}, limit est {} vs proxy {} (ok={})",
        rep.reference_d_ab, rep.reference_ok, rep.monotone_ok, rep.limit_estimate, rep.proxy_value, rep.limit_ok
    )];
    for r in &rep.rows {
        summary.push(format!("  n={}: d_n(a,b) = {} (<= 11/8 + tol: {})", r.n, r.d_ab, r.within_bound));
    }
    Ok(RunOutcome { pass: rep.pass, summary, artifacts })
}

fn run_gamma(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let rect = cfg.domain_rect()?;
    let sequence_kind = cfg.sequence.unwrap_or(GammaSequence::Constant);
    let limit_kind = cfg.limit.unwrap_or(match sequence_kind {
        GammaSequence::Constant => GammaLimit::SelfLimit,
        GammaSequence::Profile => GammaLimit::Proxy,
    });
    let h = cfg.effective_h();
    let stencil = cfg.stencil_order()?;

    let (solvers, alpha): (Vec<Arc<DistanceSolver>>, f64) = match sequence_kind {
        GammaSequence::Constant => {
            let s = build_from_config(cfg)?;
            let len = cfg.n_values.as_ref().map_or(4, Vec::len).max(2);
            (vec![s; len], 2.0)
        }
        GammaSequence::Profile => {
            if rect != Rect::unit_square() {
                return Err(Error::config("domain", "the profile family lives on the unit square"));
            }
            let family = CounterexampleFamily::new(h, stencil);
            let ns = cfg.effective_n_values();
            let mut out = Vec::new();
            for n in ns {
                out.push(family.solver(n)?);
            }
            (out, 2.0)
        }
    };
    let limit: Arc<dyn DistanceOracle> = match limit_kind {
        GammaLimit::SelfLimit => {
            if sequence_kind != GammaSequence::Constant {
                return Err(Error::config("limit", "self limit requires the constant sequence"));
            }
            solvers[0].clone()
        }
        GammaLimit::DoubleEuclid => Arc::new(ScaledEuclidean::new(2.0, Some(rect))?),
        GammaLimit::Proxy => {
            let family = CounterexampleFamily::new(h, stencil);
            family.proxy_solver()?
        }
    };
    let seq = MetricSequence::new(solvers, alpha)?;

    // test objects scaled into the domain
    let a = rel_point(rect, 1.0 / 16.0, 1.0 / 8.0);
    let b = rel_point(rect, 15.0 / 16.0, 1.0 / 8.0);
    let mut curves = vec![Curve::segment(a, b)];
    if rect == Rect::unit_square() {
        curves.push(staircase_curve(3));
    } else {
        curves.push(
            Curve::polyline(&[a, rel_point(rect, 0.5, 0.4), b]).expect("bent path is valid"),
        );
    }
    let base = rel_point(rect, 0.5, 0.5);
    let u1: Arc<dyn ScalarField> = Arc::new(DistanceToPoint { oracle: limit.clone(), base });
    let u2: Arc<dyn ScalarField> = Arc::new(ScaledField { inner: u1.clone(), factor: 2.0 });
    let atom_pairs = vec![(a, b), (rel_point(rect, 0.25, 0.5), rel_point(rect, 0.75, 0.5))];
    let exhaustion = CompactExhaustion::new(rect);

    let l_rep = gamma_l_check(&seq, &limit, &curves, None, cfg.seed)?;
    let j_rep = gamma_j_check(&seq, &limit, &atom_pairs)?;
    let f_rep = gamma_f_check(&seq, &limit, &[u1, u2], &exhaustion, 4)?;

    let tol = cfg.effective_tol();
    let pass = l_rep.passes(tol) && j_rep.passes(tol) && f_rep.passes(tol);

    let json_path = cfg.out_dir.join("gamma.json");
    report::write_json(
        &json_path,
        &json!({
            "sequence": sequence_kind,
            "limit": limit_kind,
            "tol": tol,
            "length": l_rep,
            "energy": j_rep,
            "indicator": f_rep,
            "pass": pass,
        }),
    )?;

    let csv_path = cfg.out_dir.join("gamma_margins.csv");
    let mut rows: Vec<Vec<String>> = Vec::new();
    for c in &l_rep.per_curve {
        for r in &c.rows {
            rows.push(vec![
                "L".into(),
                c.curve_index.to_string(),
                r.n_index.to_string(),
                r.sup_gap.to_string(),
                r.liminf_margin.to_string(),
                r.limsup_margin.to_string(),
            ]);
        }
    }
    for (pi, p) in j_rep.per_pair.iter().enumerate() {
        for r in &p.rows {
            rows.push(vec![
                "J".into(),
                pi.to_string(),
                r.n_index.to_string(),
                (r.j_value - p.j_limit).abs().to_string(),
                p.liminf_margin.to_string(),
                r.recovery_margin.to_string(),
            ]);
        }
    }
    for r in &f_rep.recovery_rows {
        rows.push(vec![
            "F".into(),
            format!("{}k{}", r.function_index, r.exhaustion_index),
            r.n_index.to_string(),
            r.sup_d_gap.to_string(),
            r.sup_u_gap.to_string(),
            r.margin.to_string(),
        ]);
    }
    report::write_csv(
        &csv_path,
        "lenspace gamma margins v1",
        &["check", "item", "n_index", "gap", "margin_a", "margin_b"],
        &rows,
    )?;
    let mut artifacts = vec![json_path, csv_path];

    if cfg.plots {
        let svg = cfg.out_dir.join("gamma_margins.svg");
        let series = vec![
            (
                "L limsup".to_string(),
                l_rep.per_curve[0]
                    .rows
                    .iter()
                    .map(|r| (r.n_index as f64, r.limsup_margin))
                    .collect::<Vec<_>>(),
            ),
            (
                "J recovery".to_string(),
                j_rep.per_pair[0]
                    .rows
                    .iter()
                    .map(|r| (r.n_index as f64, r.recovery_margin))
                    .collect::<Vec<_>>(),
            ),
        ];
        report::svg_series(&svg, &series)?;
        artifacts.push(svg);
    }

    Ok(RunOutcome {
        pass,
        summary: vec![
            format!(
                "gamma L: liminf margin {:.3e}, limsup margin {:.3e}, recovery dev ok = {}",
                l_rep.max_liminf_margin, l_rep.max_limsup_margin, l_rep.recovery_dev_all_ok
            ),
            format!(
                "gamma J: liminf margin {:.3e}, recovery margin {:.3e}",
                j_rep.max_liminf_margin, j_rep.max_recovery_margin
            ),
            format!(
                "gamma F: recovery margin {:.3e}, indicators zero = {}, diagonals attained = {}",
                f_rep.max_recovery_margin,
                f_rep.all_f_zero,
                f_rep.diagonal.iter().all(|(_, _, n)| n.is_some())
            ),
            format!("gamma verdict at tol {tol}: pass = {pass}"),
        ],
        artifacts,
    })
}
