//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use flat3::curvature::{reconstruct_riemann, ricci, riemann};
use flat3::families::{build_family, proper_family_exists, sample_spec, validate_spec, FamilySpec, Kind, SHAPES};
use flat3::metric::BoxDomain;
use flat3::numerics::{ode_oracle, Antiderivative, LogSqrt};
use flat3::verify::{fd_crosscheck, flatness_report, perturb, GridSpec};
use flat3::{Bindings, DiagonalMetric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SUITE_SEED: u64 = 20_240_601;
const SUITE_METRICS: usize = 200;
const SUITE_POINTS: usize = 5;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spec(kind: Kind, params: serde_json::Value, domain: &str) -> FamilySpec {
    FamilySpec::new(
        kind,
        params.as_object().expect("object").clone(),
        BoxDomain::parse_cli(domain).expect("box"),
    )
}

/// The seeded random-expression suite shared by the first two criteria.
fn suite() -> Vec<(DiagonalMetric, Vec<[f64; 3]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    (0..SUITE_METRICS)
        .map(|_| {
            let m = common::random_metric(&mut rng);
            let pts = (0..SUITE_POINTS)
                .map(|_| common::interior_point(&mut rng, m.domain()))
                .collect();
            (m, pts)
        })
        .collect()
}

fn formula_transcription() -> Outcome {
    let start = Instant::now();
    let (mut fd_rel, mut sym, mut trace) = (0.0f64, 0.0f64, 0.0f64);
    for (m, pts) in suite() {
        for p in pts {
            let cmp = match fd_crosscheck(&m, p) {
                Ok(c) => c,
                Err(e) => return outcome(false, format!("oracle failed at {p:?}: {e}")),
            };
            fd_rel = fd_rel.max(cmp.max_rel);
            let riem = riemann(&m, p).expect("riemann");
            sym = sym.max(riem.symmetry_defect());
            trace = trace.max(riem.contract().max_diff(&ricci(&m, p).expect("ricci")));
        }
    }
    let t = start.elapsed();
    outcome(
        fd_rel <= 1e-4 && sym <= 1e-10 && trace <= 1e-10 && t < Duration::from_secs(30),
        format!(
            "FD max rel {fd_rel:.2e} (<= 1e-4), symmetry defect {sym:.2e} (<= 1e-10), \
             trace defect {trace:.2e} (<= 1e-10), {:.1} s (< 30 s)",
            t.as_secs_f64()
        ),
    )
}

fn dimension_three_identity() -> Outcome {
    let mut worst = 0.0f64;
    for (m, pts) in suite() {
        for p in pts {
            let riem = riemann(&m, p).expect("riemann");
            let rebuilt = reconstruct_riemann(&ricci(&m, p).expect("ricci"));
            worst = worst.max(riem.max_diff(&rebuilt));
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max |Riem - rebuilt(Ric)| = {worst:.2e} (<= 1e-8)"),
    )
}

fn family_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = GridSpec::new(9);
    let mut worst = (0.0f64, String::new());
    let mut failures = Vec::new();
    for kind in Kind::ALL {
        for _ in 0..20 {
            let s = sample_spec(kind, &mut rng);
            let r = build_family(&s)
                .map_err(|e| e.to_string())
                .and_then(|m| flatness_report(&m, &grid, 1e-7).map_err(|e| e.to_string()));
            match r {
                Ok(r) if r.per_point_errors.is_empty() => {
                    if r.max_ric > worst.0 {
                        worst = (r.max_ric, kind.to_string());
                    }
                    if r.max_ric > 1e-7 {
                        failures.push(format!("{kind} {:?}: {:.2e}", s.params, r.max_ric));
                    }
                }
                Ok(r) => failures.push(format!("{kind}: {}", r.per_point_errors[0].message)),
                Err(e) => failures.push(format!("{kind}: {e}")),
            }
        }
    }
    let t = start.elapsed();
    let pass = failures.is_empty() && t < Duration::from_secs(120);
    let mut detail = format!(
        "{} kinds x 20 samples on 9^3: worst max Ric {:.2e} ({}) (<= 1e-7), {:.1} s (< 120 s)",
        Kind::ALL.len(),
        worst.0,
        worst.1,
        t.as_secs_f64()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(pass, detail)
}

fn worked_examples() -> Outcome {
    let warped = spec(Kind::T3_3, json!({"c1": 1, "c2": 1, "c3": 0}), "0,2:0,2:0,1");
    // f2 = 1/(x1 + m), f3 = 1/((x1 + m) cos(x2 + n)) with m = 1, n = 0
    let sequential = spec(
        Kind::T3_7_6,
        json!({"k2": 1, "k3": 1, "c2": -1, "c3": 0}),
        "0,2:-1.5,1.5:0,1",
    );
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, s) in [("x1 + x2", warped), ("(x1 + 1) cos(x2)", sequential)] {
        let r = flatness_report(&build_family(&s).expect("builds"), &GridSpec::default(), 1e-8).expect("report");
        pass &= r.flat;
        parts.push(format!("{name}: max Ric {:.2e}", r.max_ric));
    }
    outcome(pass, format!("{} (flat at 1e-8, 17^3)", parts.join(", ")))
}

/// `[g, g', g'']` of `g = 1/f` from the jet of `f` along `axis`.
fn reciprocal_jet(m: &DiagonalMetric, index: usize, p: [f64; 3], axis: usize) -> [f64; 3] {
    let j = m.coefficient_jets(p).expect("jets")[index];
    let (f, f1, f2) = (j.value, j.grad[axis], j.hess[axis][axis]);
    [1.0 / f, -f1 / (f * f), -f2 / (f * f) + 2.0 * f1 * f1 / (f * f * f)]
}

fn glued_family() -> Outcome {
    let s = spec(
        Kind::T2_8_6,
        json!({"k1": 1, "k2": 1, "f1": {"z0": 1, "x0": 0}, "f3": {"z0": 1, "eta": 1, "d": 1}}),
        "-0.31,0.31:-0.31,0.31:-0.31,0.31",
    );
    let m = build_family(&s).expect("builds");
    let ode = ode_oracle(1.0, 1.0, 0.0, (-0.3, 0.3), 60_000).expect("oracle");
    let mut oracle_dev = 0.0f64;
    let mut relation = 0.0f64;
    let mut xs: Vec<f64> = (0..=600).map(|i| -0.3 + 0.001 * i as f64).collect();
    xs.extend([-1e-3, -5e-4, -1e-4, -5e-5, -1e-6, 0.0, 1e-6, 5e-5, 1e-4, 5e-4, 1e-3]);
    for x in xs {
        let [g, _, g2] = reciprocal_jet(&m, 0, [0.0, 0.0, x], 2);
        oracle_dev = oracle_dev.max((g - ode.value(x).expect("in span")).abs());
        relation = relation.max((g2 * g + 1.0).abs());
    }
    let box13 = spec(
        Kind::T2_8_6,
        json!({"k1": 1, "k2": 1, "f1": {"z0": 1, "x0": 0}, "f3": {"z0": 1, "eta": 1, "d": 1}}),
        "-0.3,0.3:-0.3,0.3:-0.3,0.3",
    );
    let r = flatness_report(&build_family(&box13).expect("builds"), &GridSpec::new(13), 1e-7).expect("report");
    outcome(
        oracle_dev <= 1e-6 && relation <= 1e-5 && r.flat,
        format!(
            "|g - RK4| {oracle_dev:.2e} (<= 1e-6), |g'' g + 1| {relation:.2e} (<= 1e-5, incl. |x| <= 1e-3), \
             13^3 max Ric {:.2e} (<= 1e-7)",
            r.max_ric
        ),
    )
}

fn negative_controls() -> Outcome {
    let grid = GridSpec::new(9);
    let mut weakest = (f64::INFINITY, String::new());
    for kind in Kind::ALL {
        let mut s = FamilySpec::example(kind);
        if matches!(kind, Kind::T2_8_6 | Kind::T2_9_5) {
            // room for a bump of width 0.3 around the center
            s.domain = BoxDomain::cube(-0.4, 0.4);
        }
        let m = build_family(&s).expect("builds");
        for index in 1..=3 {
            let p = perturb(&m, index, 0.1, s.domain.center(), 0.3).expect("bump fits");
            let r = flatness_report(&p, &grid, 1e-8).expect("report");
            if r.max_ric < weakest.0 {
                weakest = (r.max_ric, format!("{kind} f{index}"));
            }
        }
    }
    let w = DiagonalMetric::from_strs(
        ["1", "1", "1/(x1*x1 + 1)"],
        &Bindings::new(),
        BoxDomain::cube(-3.0, 3.0),
        None,
    )
    .expect("metric");
    let mut dev = 0.0f64;
    for (y, z) in [(0.0, 0.0), (0.5, -1.0), (-2.0, 2.5), (1.7, 0.3)] {
        dev = dev.max((ricci(&w, [1.0, y, z]).expect("ricci").ric[0][0] + 1.0).abs());
    }
    outcome(
        weakest.0 >= 1e-3 && dev <= 1e-6,
        format!(
            "smallest bumped max Ric {:.2e} at {} (>= 1e-3); |Ric(E1,E1) + 1| at x1 = 1: {dev:.2e} (<= 1e-6)",
            weakest.0, weakest.1
        ),
    )
}

fn nonexistence() -> Outcome {
    let r3 = BoxDomain::whole_space();
    let mut problems = Vec::new();
    for (_, name) in SHAPES {
        let e = proper_family_exists(name, &r3).expect("known shape");
        if e.exists || e.obstruction.as_deref().is_none_or(str::is_empty) {
            problems.push(format!("{name} on R^3"));
        }
    }
    let bounded = [
        ("warped_r2xr", "0,2:0,2:0,1"),
        ("sequential", "0,2:-1.5,1.5:0,1"),
        ("sequential", "0,2:-inf,inf:0,1"),
        ("warped_r2xr", "0,inf:-inf,inf:-inf,inf"),
    ];
    let mut witnesses = 0;
    for (name, b) in bounded {
        let domain = BoxDomain::parse_cli(b).expect("box");
        let e = proper_family_exists(name, &domain).expect("known shape");
        let Some(w) = e.witness.filter(|_| e.exists) else {
            problems.push(format!("{name} on {b}: no witness"));
            continue;
        };
        if !validate_spec(&w).expect("validates").is_empty() {
            problems.push(format!("{name} on {b}: witness invalid"));
            continue;
        }
        let m = build_family(&w).expect("builds");
        let grid = GridSpec::new(9)
            .truncate(0, 0.0, 2.0)
            .truncate(1, -2.0, 2.0)
            .truncate(2, 0.0, 1.0);
        let r = flatness_report(&m, &grid, 1e-8).expect("report");
        if !r.flat || !warping_nonconstant(&m, &grid) {
            problems.push(format!("{name} on {b}: witness not flat or not proper"));
            continue;
        }
        witnesses += 1;
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{} shapes refuted on R^3 with obstructions; {witnesses} bounded witnesses verified",
                SHAPES.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

/// The coefficients that the shape lets vary take at least two values on the grid.
fn warping_nonconstant(m: &DiagonalMetric, grid: &GridSpec) -> bool {
    let pts = grid.points(m.domain()).expect("grid");
    let deps = m.declared_deps();
    (0..3).filter(|&i| !deps[i].is_empty()).all(|i| {
        let vals: Vec<f64> = pts
            .iter()
            .map(|p| m.coefficient_values(*p).expect("value")[i])
            .collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        hi - lo > 1e-6
    })
}

fn numerics() -> Outcome {
    let mut round_trip = 0.0f64;
    let mut check = |a: &Antiderivative, lo: f64, hi: f64| {
        for i in 0..100 {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
            let y = a.value(x).expect("value");
            round_trip = round_trip.max((a.invert(y).expect("invert") - x).abs());
        }
    };
    let exp_recip = Antiderivative::new(Arc::new(|t: f64| (-t).exp()), 0.0, (-2.0, 3.0), None).expect("anti");
    check(&exp_recip, -2.0, 3.0);
    let rational = Antiderivative::new(Arc::new(|t: f64| 1.0 / (1.0 + t * t)), 0.5, (-4.0, 4.0), None).expect("anti");
    check(&rational, -4.0, 4.0);
    for (k, z0) in [(1.0, 1.0), (0.5, -1.3), (-1.0, 1.0), (-0.7, -0.9)] {
        let ls = LogSqrt::new(k, z0).expect("log-sqrt");
        let (lo, hi) = ls.domain();
        let (a, b) = if k > 0.0 {
            (lo + 0.05 * (hi - lo), hi - 1e-3 * (hi - lo))
        } else if z0 > 0.0 {
            (z0 * 1.001, z0 * 5.0)
        } else {
            (z0 * 5.0, z0 * 1.001)
        };
        check(ls.antiderivative(), a, b);
    }
    let mut drift = 0.0f64;
    for (k, z0, span) in [
        (1.0, 1.0, (-0.5, 0.5)),
        (-1.0, 1.0, (-2.0, 2.0)),
        (0.5, -2.0, (-1.0, 1.5)),
    ] {
        drift = drift.max(ode_oracle(k, z0, 0.0, span, 20_000).expect("oracle").max_energy_drift());
    }
    outcome(
        round_trip <= 1e-10 && drift <= 1e-6,
        format!(
            "invert(F(x)) round trip {round_trip:.2e} (<= 1e-10) over 6 x 100 points; RK4 drift {drift:.2e} (<= 1e-6)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("formula transcription", formula_transcription),
        ("dimension-three identity", dimension_three_identity),
        ("flat-family soundness", family_soundness),
        ("worked examples", worked_examples),
        ("glued log-sqrt family", glued_family),
        ("negative controls", negative_controls),
        ("nonexistence of proper families", nonexistence),
        ("numerics", numerics),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "[{}] criterion {}: {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
