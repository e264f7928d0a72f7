//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use gradsing_core::analytic::{probe_lattice, subsolution_defect, summarize_residuals, ModelParams};
use gradsing_core::config::{RunConfig, ResolvedRun};
use gradsing_core::initdata::{CutoffCubic, EpsilonProblem};
use gradsing_core::solver::{
    continuation, solve_annulus, ContinuationOutput, GridPolicy, RadialGrid, SchemeConfig, SpacetimeField,
    TimeStepper,
};
use gradsing_core::specfn::{bessel_j, first_zeros, BesselOrder};
use gradsing_core::verify::{self, weak, Tolerances};

/// First zeros of J_1' and J_1 from a 30-digit root finder.
const J1_PRIME_ZERO: f64 = 1.841_183_781_340_659_3;
const J1_ZERO: f64 = 3.831_705_970_207_512_3;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

struct Standard {
    run: ResolvedRun,
    cont: ContinuationOutput,
    scheme: SchemeConfig,
    seconds: f64,
}

impl Standard {
    fn new() -> Self {
        let start = Instant::now();
        let cfg = RunConfig::preset("n2-standard").unwrap();
        let run = cfg.resolve().unwrap();
        assert_eq!(cfg.continuation.grid.intervals, 400);
        assert_eq!(cfg.scheme.dt_initial, 1e-3);
        assert_eq!(run.eps, vec![0.02, 0.01, 0.005, 0.0025]);
        let cont = continuation(
            &run.params,
            &run.datum,
            &run.eps,
            &cfg.continuation.grid,
            run.horizon,
            &cfg.scheme,
            run.window,
        )
        .unwrap();
        assert!(cont.failures.is_empty(), "{:?}", cont.failures);
        Self {
            run,
            cont,
            scheme: cfg.scheme,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    /// ε = 0.02, M = 400, dt = 1e−3.
    fn primary(&self) -> &SpacetimeField {
        &self.cont.fields[0]
    }

    fn finest(&self) -> &SpacetimeField {
        self.cont.fields.last().unwrap()
    }
}

fn resolve_n2_params(n: i64) -> ModelParams {
    ModelParams::with_default_lambda(n, 0.6, 1.0).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    for n in 2..=6 {
        let p = resolve_n2_params(n);
        let s = summarize_residuals(&p, &probe_lattice(&p, 64)).unwrap();
        worst.0 = worst.0.max(s.stationary_relative);
        worst.1 = worst.1.max(s.linearized_scaled);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.0 <= 1e-12 && worst.1 <= 1e-8 && secs < 60.0,
        format!(
            "max stationary residual {:.2e} (<= 1e-12), max linearized residual {:.2e} (<= 1e-8), n = 2..6, {secs:.2} s",
            worst.0, worst.1
        ),
    )
}

fn criterion_2() -> Outcome {
    let half = BesselOrder::new(0.5).unwrap();
    let three_halves = BesselOrder::new(1.5).unwrap();
    let mut err = 0.0f64;
    for i in 1..=4000 {
        let x = 20.0 * i as f64 / 4000.0;
        let c = (2.0 / (PI * x)).sqrt();
        err = err.max((bessel_j(half, x).unwrap() - c * x.sin()).abs());
        err = err.max((bessel_j(three_halves, x).unwrap() - c * (x.sin() / x - x.cos())).abs());
    }
    let z = first_zeros(BesselOrder::new(1.0).unwrap()).unwrap();
    let zero_err = (z.x1 - J1_PRIME_ZERO).abs().max((z.x0 - J1_ZERO).abs());
    let ordered = (2..=6).all(|n| {
        let z = first_zeros(BesselOrder::for_dimension(n).unwrap()).unwrap();
        z.x1 < z.x0
    });
    outcome(
        err <= 1e-10 && zero_err <= 1e-8 && ordered,
        format!("closed-form error {err:.2e} (<= 1e-10), zero error {zero_err:.2e} (<= 1e-8), x1 < x0 for n = 2..6: {ordered}"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for name in ["n2-standard", "n3-weak"] {
        let p = RunConfig::preset(name).unwrap().resolve().unwrap().params;
        for (r, t) in probe_lattice(&p, 64) {
            worst = worst.max(subsolution_defect(&p, r, t).unwrap());
        }
    }
    let p = resolve_n2_params(2);
    let above = ModelParams::new(2, 1.001 * p.radius_bound(), p.lambda, 1.0).unwrap();
    let direct = above.ensure_admissible().is_err() && subsolution_defect(&above, 0.1, 0.0).is_err();
    let cfg = RunConfig::with_overrides(
        gradsing_core::config::preset_source("n2-standard").unwrap(),
        &[("model.radius".into(), "0.62".into())],
    )
    .unwrap();
    let via_config = cfg
        .resolve()
        .err()
        .is_some_and(|e| e.to_string().contains("admissibility gate"));
    outcome(
        worst <= 1e-8 && direct && via_config,
        format!("max defect {worst:.2e} (<= 1e-8) on both presets, gate rejects R above the bound: {}", direct && via_config),
    )
}

fn refined(field: &SpacetimeField, scheme: &SchemeConfig, run: &ResolvedRun) -> SpacetimeField {
    let grid = RadialGrid::graded(field.problem.epsilon, run.params.radius, 800, 2.0).unwrap();
    let problem = Arc::new(EpsilonProblem::new(&run.params, &run.datum, grid).unwrap());
    let fine = SchemeConfig {
        dt_initial: 0.5 * scheme.dt_initial,
        ..*scheme
    };
    solve_annulus(problem, run.horizon, &fine).unwrap()
}

fn criterion_4(s: &Standard) -> Outcome {
    let f = s.primary();
    let h = f.grid().max_spacing();
    let dt = s.scheme.dt_initial;
    let tol = 5.0 * (h * h + dt);
    let (u, l) = verify::sandwich_violations(f).unwrap();
    let coarse = u.max(l);
    let fine_field = refined(f, &s.scheme, &s.run);
    let (fu, fl) = verify::sandwich_violations(&fine_field).unwrap();
    let fine = fu.max(fl);
    outcome(
        coarse <= tol && 3.0 * fine <= coarse && s.seconds < 600.0,
        format!(
            "max violation {coarse:.3e} (<= {tol:.3e}); refined (M = 800, dt = 5e-4) {fine:.3e}, 3x reduction: {}; continuation {:.2} s",
            3.0 * fine <= coarse,
            s.seconds
        ),
    )
}

fn criterion_5(s: &Standard) -> Outcome {
    let f = s.primary();
    let h = f.grid().max_spacing();
    let pos = verify::max_positive_gradient(f);
    let sign_tol = 1e-6 + 10.0 * h * h;
    let p = &f.problem;
    let wide = CutoffCubic::with_support(p.c_star, 2.0 * p.cutoff.support_radius).unwrap();
    let rerun = solve_annulus(Arc::new(p.with_cutoff(wide)), s.run.horizon, &s.scheme).unwrap();
    let check = verify::check_gradient_box(f, Some(&rerun), 1e-10);
    outcome(
        pos <= sign_tol && check.passed(),
        format!(
            "max u_r+ {pos:.2e} (<= {sign_tol:.2e}); sup|u_r| {:.4} vs c* {:.4}; doubled-support rerun difference {:.2e} (<= 1e-10)",
            check.get("sup_abs_gradient").unwrap(),
            p.c_star,
            check.get("rerun_max_difference").unwrap()
        ),
    )
}

fn criterion_6(s: &Standard) -> Outcome {
    let f = s.primary();
    let delta = 0.05 * s.run.params.radius;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [4u32, 28] {
        let c = verify::check_weighted_bernstein(f, p, delta, 0.05).unwrap();
        ok &= c.passed();
        parts.push(format!("p = {p} residual {:.2e} (<= 0.05)", c.get("residual").unwrap()));
    }
    let bound = verify::check_pointwise_gradient(f, 28);
    let stable = verify::check_pointwise_stability(f, &s.cont.fields[1], 28, 0.2);
    ok &= bound.passed() && stable.passed();
    parts.push(format!(
        "|u_r| r^(31/28) <= {:.4} (inner decade {:.4}), change under eps halving {:.2e} (<= 0.2)",
        bound.get("bound").unwrap(),
        bound.get("inner_decade_max").unwrap(),
        stable.get("relative_change").unwrap()
    ));
    outcome(ok, parts.join("; "))
}

fn criterion_7(s: &Standard) -> Outcome {
    let f = s.finest();
    let lam2 = s.run.params.lambda * s.run.params.lambda;
    let tol = Tolerances::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1.0, 2.0, 5.0] {
        let (check, fit) = verify::fit_singularity(f, k / lam2, &tol).unwrap();
        ok &= check.status == verify::Status::Pass;
        let e = fit.fit.map_or((f64::NAN, f64::NAN), |x| (x.exponent, x.r_squared));
        parts.push(format!(
            "t = {k}/lambda^2: exponent {:.4}, r^2 {:.6}, functional {:.3e}",
            e.0, e.1, fit.shape_functional
        ));
    }
    outcome(
        ok,
        format!(
            "eps = {}: {} (exponent in [-0.70, -0.63], r^2 >= 0.99, functional <= {:.4})",
            f.problem.epsilon,
            parts.join("; "),
            1.05 * s.run.params.amplitude
        ),
    )
}

fn criterion_8(s: &Standard) -> Outcome {
    let f = s.primary();
    let h = f.grid().max_spacing();
    let env_tol = 5.0 * (h * h + s.scheme.dt_initial);
    let (check, fit) = verify::fit_decay(f, env_tol, &Tolerances::default()).unwrap();
    let lam2 = s.run.params.lambda * s.run.params.lambda;
    outcome(
        check.passed() && check.status == verify::Status::Pass,
        format!(
            "envelope violation {:.2e} (<= {env_tol:.2e}); fitted rate {:.4} = {:.4} lambda^2 (>= 0.9 lambda^2)",
            check.get("envelope_violation").unwrap(),
            fit.rate,
            fit.rate / lam2
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig::preset("n3-weak").unwrap();
    let run = cfg.resolve().unwrap();
    let scheme = cfg.scheme;
    let levels: Vec<SpacetimeField> = cfg
        .verify
        .weak_levels
        .iter()
        .map(|l| {
            let grid = RadialGrid::graded(l.eps, run.params.radius, l.intervals, 2.0).unwrap();
            let problem = Arc::new(EpsilonProblem::new(&run.params, &run.datum, grid).unwrap());
            let s = SchemeConfig {
                dt_initial: l.dt,
                ..scheme
            };
            solve_annulus(problem, run.horizon, &s).unwrap()
        })
        .collect();
    assert_eq!(levels.len(), 3);
    let policy = GridPolicy {
        eps_scaling: 1.0,
        ..cfg.continuation.grid
    };
    let cont = continuation(&run.params, &run.datum, &run.eps, &policy, run.horizon, &scheme, run.window).unwrap();
    let family = weak::default_family(run.params.radius, run.horizon);
    let level_refs: Vec<&SpacetimeField> = levels.iter().collect();
    let seq: Vec<&SpacetimeField> = cont.fields.iter().collect();
    let (check, study) = verify::check_weak_identity(&level_refs, &seq, &family, &[0.04, 0.02, 0.01]).unwrap();
    let fmt = |rows: &[Vec<f64>], l: usize| -> String {
        rows.iter().map(|r| format!("{:.2e}", r[l])).collect::<Vec<_>>().join(" > ")
    };
    let mut parts = Vec::new();
    for (l, name) in study.test_functions.iter().enumerate() {
        parts.push(format!("{name} levels {}", fmt(&study.refinement, l)));
        if family[l].bump.touches_origin() {
            parts.push(format!("{name} eps {}", fmt(&study.continuation, l)));
        }
    }
    let flux: Vec<String> = study.flux.iter().map(|v| format!("{v:.2e}")).collect();
    parts.push(format!("flux at eps' = 0.04, 0.02, 0.01: {}", flux.join(" > ")));
    outcome(check.status == verify::Status::Pass, parts.join("; "))
}

fn criterion_10(s: &Standard) -> Outcome {
    let f = s.finest();
    let alt = SchemeConfig {
        time_stepper: TimeStepper::ImexCn,
        ..s.scheme
    };
    let other = solve_annulus(f.problem.clone(), s.run.horizon, &alt).unwrap();
    let check = verify::check_uniqueness_surrogate(f, &other, &s.cont.window, 1e-3);
    outcome(
        check.passed(),
        format!(
            "eps = {}: sup |implicit_euler - imex_cn| on [0.1R, R] x [0.5, T] = {:.2e} (<= 1e-3)",
            f.problem.epsilon,
            check.get("sup_difference").unwrap()
        ),
    )
}

fn criterion_11(s: &Standard) -> Outcome {
    let d = &s.cont.differences;
    let check = verify::check_cauchy(d);
    let shown: Vec<String> = d.iter().map(|v| format!("{v:.3e}")).collect();
    outcome(
        check.passed() && d.len() == 3,
        format!("eps = 0.02, 0.01, 0.005, 0.0025: differences {} (strictly decreasing)", shown.join(" > ")),
    )
}

fn main() -> ExitCode {
    let standard = Standard::new();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "analytic residuals", criterion_1()),
        (2, "special functions", criterion_2()),
        (3, "subsolution and gate", criterion_3()),
        (4, "sandwich", criterion_4(&standard)),
        (5, "gradient sign and box", criterion_5(&standard)),
        (6, "Bernstein bounds", criterion_6(&standard)),
        (7, "singularity persistence", criterion_7(&standard)),
        (8, "exponential convergence", criterion_8(&standard)),
        (9, "weak identity", criterion_9()),
        (10, "uniqueness surrogate", criterion_10(&standard)),
        (11, "continuation Cauchy property", criterion_11(&standard)),
    ];
    let mut failed = 0;
    for (k, name, o) in &results {
        let verdict = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} [{verdict}] {name}: {}", o.detail);
        if !o.ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
