//! Acceptance criteria. Run with `cargo test --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::sync::Arc;
use std::time::Instant;

use varwave::cli::run_with;
use varwave::fdsolve::{convergence_order, convergence_study};
use varwave::field::{JetField, SharedField};
use varwave::mappings::{catalog, invert, push_forward_nonlocal, Mapping, MappingError, NonlocalMapping};
use varwave::solutions::{general_solution_quadratic, SolutionPair};
use varwave::verify::{
    check_mapping_equivalence, check_roundtrip, default_source_speed, fd_cases, fd_residual, ivp_error, residual_cases,
    residual_grid, run_suite, run_suites, standard_pool, Defect, Operator, Suite, SuiteConfig, VerifyError, FD_CELLS,
    FD_CFL,
};

const TOL: f64 = 1e-8;
const SEED: u64 = 7;
const TRIALS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["varwave"];
    argv.extend_from_slice(args);
    let code = run_with(argv, &mut out, &mut err);
    (code, out)
}

fn criterion_residuals() -> Outcome {
    let pool = standard_pool(SEED, TRIALS);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, build, grid) in residual_cases() {
        for pair in &pool {
            let u = build(pair.clone());
            let op = u.speed().map(Operator::Wave).unwrap_or(Operator::Characteristic);
            let r = residual_grid(&u, &op, &grid, TOL, name);
            worst = worst.max(r.max_residual);
            if !r.pass {
                failures.push(format!("{name}: {:e}", r.max_residual));
            }
        }
    }
    // oracle: second differences of the plain values agree with the jets
    let mut fd_worst: f64 = 0.0;
    for (name, build, grid) in residual_cases() {
        let u = build(pool[0].clone());
        let Some(speed) = u.speed() else { continue };
        for (x, t) in grid.points().into_iter().step_by(517) {
            match fd_residual(&u, &speed, x, t, 2e-4) {
                Ok(r) => fd_worst = fd_worst.max(r.abs()),
                Err(e) => failures.push(format!("{name} fd oracle: {e}")),
            }
        }
    }
    if fd_worst > 1e-4 {
        failures.push(format!("fd oracle residual {fd_worst:e}"));
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "7 families x {TRIALS} pairs on 64x64, max {worst:.2e} (limit {TOL:e}), fd oracle {fd_worst:.2e}{}",
            join_failures(&failures)
        ),
    )
}

fn criterion_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let maps = catalog();
    for m in &maps {
        let id = m.id();
        match check_mapping_equivalence(m, &default_source_speed(id), TRIALS, SEED, TOL) {
            Ok(r) => {
                worst = worst.max(r.max_residual);
                if !r.pass {
                    failures.push(format!("{id}: {:e}", r.max_residual));
                }
            }
            Err(e) => failures.push(format!("{id}: {e}")),
        }
    }
    Outcome::new(
        maps.len() == 11 && failures.is_empty(),
        format!(
            "{} mappings, {TRIALS} trials, max {worst:.2e}{}",
            maps.len(),
            join_failures(&failures)
        ),
    )
}

/// `d/dT(T^{-e}·u)` by Richardson-extrapolated central differences.
fn relation_lhs_fd(n: &NonlocalMapping, u: &dyn JetField, x: f64, big_t: f64) -> f64 {
    let g = |tt: f64| tt.powf(-n.t_exponent.value()) * u.value_at(x, n.t_of_big_t(tt)).unwrap();
    let d = |h: f64| (g(big_t + h) - g(big_t - h)) / (2.0 * h);
    let h = 1e-2 * big_t;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn criterion_integral() -> Outcome {
    let cfg = SuiteConfig {
        seed: SEED,
        tolerance: TOL,
        trials: TRIALS,
        defect: Defect::None,
    };
    let suite = run_suite(Suite::Integral, &cfg);
    let mut failures: Vec<String> = suite
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {:e}", c.name, c.value))
        .collect();
    let summary: Vec<String> = suite
        .checks
        .iter()
        .map(|c| format!("{} {:.1e}", c.name, c.value))
        .collect();

    // oracle: κ fitted from finite differences of the left side
    let u: SharedField = Arc::new(general_solution_quadratic(
        SolutionPair::parse("sin(s)", "cos(s)").unwrap(),
    ));
    let mut oracle = Vec::new();
    for n in [NonlocalMapping::n1(), NonlocalMapping::n2()] {
        let b = push_forward_nonlocal(&n, u.clone());
        let (lo, hi) = (
            n.big_t_of_t(1.0).min(n.big_t_of_t(3.0)),
            n.big_t_of_t(1.0).max(n.big_t_of_t(3.0)),
        );
        let (mut num, mut den) = (0.0, 0.0);
        for (x, s) in [(0.7, 0.2), (1.1, 0.5), (1.8, 0.8)] {
            let big_t = lo * (hi / lo).powf(s);
            let lhs = relation_lhs_fd(&n, u.as_ref(), x, big_t);
            let base = big_t.powf(n.relation_q.value()) * b.value_at(x, big_t).unwrap();
            num += lhs * base;
            den += base * base;
        }
        let kappa = num / den;
        let rel = ((kappa - n.relation_kappa) / n.relation_kappa).abs();
        if rel > 1e-6 {
            failures.push(format!("{} fd oracle kappa {kappa} vs {}", n.id, n.relation_kappa));
        }
        oracle.push(format!("{} oracle kappa {kappa:.8}", n.id));
    }
    Outcome::new(
        suite.pass && failures.is_empty(),
        format!(
            "{}; {}{}",
            summary.join(", "),
            oracle.join(", "),
            join_failures(&failures)
        ),
    )
}

fn criterion_roundtrip() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut refused = Vec::new();
    for m in catalog() {
        let id = m.id();
        match (&m, check_roundtrip(&m, 100, SEED)) {
            (Mapping::Point(_), Ok(r)) => {
                worst = worst.max(r.max_deviation).max(r.max_multiplier_error);
                if r.max_deviation > 1e-11 || r.max_multiplier_error > 1e-11 {
                    failures.push(format!("{id}: {:e}", r.max_deviation));
                }
            }
            (Mapping::Point(_), Err(e)) => failures.push(format!("{id}: {e}")),
            (_, Err(VerifyError::Mapping(MappingError::NotInvertible(_)))) => refused.push(id.to_string()),
            (_, _) => failures.push(format!("{id}: inversion did not fail")),
        }
        if !matches!(m, Mapping::Point(_)) && !matches!(invert(&m), Err(MappingError::NotInvertible(_))) {
            failures.push(format!("{id}: invert did not error"));
        }
    }
    let expected = ["N1", "N2", "C1", "C2"];
    if refused != expected {
        failures.push(format!("non-invertible set {refused:?}"));
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "7 point mappings x 100 points, max {worst:.2e}; invert errors on {}{}",
            refused.join(", "),
            join_failures(&failures)
        ),
    )
}

fn criterion_fd() -> Outcome {
    let mut failures = Vec::new();
    let mut orders = Vec::new();
    for (name, exact, speed, xb, tb) in fd_cases() {
        match convergence_study(exact.as_ref(), &speed, xb, tb, &FD_CELLS, FD_CFL) {
            Ok(rows) => {
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.max_error)).collect();
                let order = convergence_order(&pts).unwrap_or(f64::NAN);
                let finest = rows[rows.len() - 1].max_error;
                orders.push(format!("{name} {order:.3}"));
                if !(1.8..=2.2).contains(&order) || finest.is_nan() || finest >= 1e-3 {
                    failures.push(format!("{name}: order {order}, finest {finest:e}"));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("orders {}{}", orders.join(", "), join_failures(&failures)),
    )
}

fn criterion_ivp() -> Outcome {
    match (ivp_error(512, Defect::None), ivp_error(1023, Defect::None)) {
        (Ok((e1, h)), Ok((e2, _))) => {
            let ratio = e1 / e2;
            let pass = e1 <= 5.0 * h * h && (3.4..=4.6).contains(&ratio);
            Outcome::new(
                pass,
                format!("error {e1:.3e} <= 5h^2 = {:.3e}, ratio {ratio:.3}", 5.0 * h * h),
            )
        }
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, e),
    }
}

fn criterion_defects() -> Outcome {
    let cfg = |defect| SuiteConfig {
        seed: SEED,
        tolerance: TOL,
        trials: TRIALS,
        defect,
    };
    let mut failures = Vec::new();
    let mut caught = Vec::new();
    let expect: [(Defect, &str, &[Suite]); 3] = [
        (
            Defect::PerturbSolution,
            "perturb",
            &[
                Suite::Solutions,
                Suite::Mappings,
                Suite::Integral,
                Suite::Fd,
                Suite::Ivp,
            ],
        ),
        (Defect::ScaleKappa, "kappa", &[Suite::Integral]),
        (Defect::FlipSign, "flip", &[Suite::Mappings, Suite::Integral]),
    ];
    for (defect, flag, suites) in expect {
        let report = run_suites(suites, &cfg(defect));
        for s in &report.suites {
            if s.pass {
                failures.push(format!("{flag} not caught by {}", s.suite.name()));
            }
        }
        let (code, _) = cli(&["verify", "--inject", flag]);
        if code != 1 {
            failures.push(format!("{flag}: exit {code}"));
        }
        caught.push(format!("{flag} exit {code}"));
    }
    Outcome::new(
        failures.is_empty(),
        format!("{}{}", caught.join(", "), join_failures(&failures)),
    )
}

fn criterion_determinism() -> Outcome {
    let args = ["verify", "--json", "--seed", "7"];
    let (c1, a) = cli(&args);
    let (c2, b) = cli(&args);
    let (_, s1) = cli(&[
        "solve",
        "--family",
        "quad17",
        "--F",
        "sin(s)",
        "--G",
        "exp(s)",
        "--grid",
        "x:1:2:9,t:0:1:9",
    ]);
    let (_, s2) = cli(&[
        "solve",
        "--family",
        "quad17",
        "--F",
        "sin(s)",
        "--G",
        "exp(s)",
        "--grid",
        "x:1:2:9,t:0:1:9",
    ]);
    let pass = c1 == 0 && c2 == 0 && !a.is_empty() && a == b && !s1.is_empty() && s1 == s2;
    Outcome::new(
        pass,
        format!(
            "verify report {} bytes, exit {c1}/{c2}, solve output {} bytes",
            a.len(),
            s1.len()
        ),
    )
}

fn join_failures(f: &[String]) -> String {
    if f.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", f.join("; "))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let criteria: [Criterion; 8] = [
        ("closed-form residuals", criterion_residuals),
        ("mapping equivalence", criterion_equivalence),
        ("integral relation and kappa", criterion_integral),
        ("round trips and inversion errors", criterion_roundtrip),
        ("leapfrog convergence", criterion_fd),
        ("IVP recovery", criterion_ivp),
        ("defect detection", criterion_defects),
        ("determinism", criterion_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("acceptance suite took {elapsed:.1} s");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    assert!(elapsed < 60.0, "acceptance suite took {elapsed:.1} s");
}
