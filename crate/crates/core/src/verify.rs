//! Residual operators and the property suites that check every solution
//! family and mapping against its equation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{Axis, GridSpec};
use crate::expr::{BinOp, EvalError, Expression, JetScalar, Node};
use crate::fdsolve::{convergence_order, convergence_study, FdError};
use crate::field::{field, JetField, SharedField};
use crate::ivp::{solve_ivp_quadratic, InitialData};
use crate::mappings::{
    apply_point, catalog, integral_relation_sides, invert, invert_point, push_forward_nonlocal, CompositeMapping,
    Mapping, MappingError, MappingId, NonlocalMapping, PointMapping,
};
use crate::solutions::{
    dalembert, general_solution_delta, general_solution_n1, general_solution_n2, general_solution_quadratic,
    solution_for_speed, AnalyticSolution, SolutionPair,
};
use crate::speeds::{transformed_speed, DeltaComponent, Ratio, SpeedError, WaveSpeed};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 20;
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("mapping {mapping} is incompatible with speed {speed}: {reason}")]
    Incompatible {
        mapping: MappingId,
        speed: String,
        reason: String,
    },
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The operator whose residual is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    /// `u_tt / c² − u_xx`.
    Wave(WaveSpeed),
    /// `V_ξη`, normalized by `max(|V_ξξ|, |V_ηη|, 1)`.
    Characteristic,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Wave(s) => write!(f, "{s}"),
            Operator::Characteristic => f.write_str("V_xi_eta = 0"),
        }
    }
}

/// Normalized residual `(u_tt/c² − u_xx) / max(|u_tt/c²|, |u_xx|, 1)`.
pub fn residual(u: &dyn JetField, speed: &WaveSpeed, x: f64, t: f64) -> Result<f64, EvalError> {
    let j = u.jet_at(x, t)?;
    let c = speed.value(x, t)?;
    Ok(normalized(j.f_tt() / (c * c), j.f_xx()))
}

fn normalized(a: f64, b: f64) -> f64 {
    (a - b) / a.abs().max(b.abs()).max(1.0)
}

/// Residual of `operator` at `(p, q)`.
pub fn residual_of(u: &dyn JetField, op: &Operator, p: f64, q: f64) -> Result<f64, EvalError> {
    match op {
        Operator::Wave(speed) => residual(u, speed, p, q),
        Operator::Characteristic => {
            let j = u.jet_at(p, q)?;
            Ok(j.f_xt() / j.f_xx().abs().max(j.f_tt().abs()).max(1.0))
        }
    }
}

/// Same residual with second derivatives from central differences of step `h`.
pub fn fd_residual(u: &dyn JetField, speed: &WaveSpeed, x: f64, t: f64, h: f64) -> Result<f64, EvalError> {
    let v = |x, t| u.value_at(x, t);
    let c = speed.value(x, t)?;
    let u0 = v(x, t)?;
    let uxx = (v(x + h, t)? - 2.0 * u0 + v(x - h, t)?) / (h * h);
    let utt = (v(x, t + h)? - 2.0 * u0 + v(x, t - h)?) / (h * h);
    Ok(normalized(utt / (c * c), uxx))
}

/// A point where evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub p: f64,
    pub q: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub subject: String,
    pub operator: String,
    pub grid: String,
    pub tolerance: f64,
    pub points: usize,
    pub max_residual: f64,
    /// Root mean square over evaluated points.
    pub l2_residual: f64,
    pub failures: Vec<PointFailure>,
    pub pass: bool,
}

impl ResidualReport {
    fn empty(subject: &str, op: &Operator, grid: &GridSpec, tolerance: f64) -> ResidualReport {
        ResidualReport {
            subject: subject.to_string(),
            operator: op.to_string(),
            grid: grid.to_string(),
            tolerance,
            points: 0,
            max_residual: 0.0,
            l2_residual: 0.0,
            failures: Vec::new(),
            pass: true,
        }
    }

    /// Folds `other` into `self` (same grid, tolerance).
    fn absorb(&mut self, other: ResidualReport) {
        let sq = self.l2_residual.powi(2) * self.points as f64 + other.l2_residual.powi(2) * other.points as f64;
        self.points += other.points;
        self.l2_residual = if self.points > 0 {
            (sq / self.points as f64).sqrt()
        } else {
            0.0
        };
        self.max_residual = self.max_residual.max(other.max_residual);
        self.failures.extend(other.failures);
        self.pass = self.pass && other.pass;
    }
}

/// At most this many failures are kept per report.
const MAX_RECORDED_FAILURES: usize = 16;

/// Residual of `u` over every grid point.
pub fn residual_grid(
    u: &dyn JetField,
    op: &Operator,
    grid: &GridSpec,
    tolerance: f64,
    subject: &str,
) -> ResidualReport {
    let mut report = ResidualReport::empty(subject, op, grid, tolerance);
    let mut sq = 0.0;
    let mut failed = 0usize;
    for (p, q) in grid.points() {
        match residual_of(u, op, p, q) {
            Ok(r) if r.is_finite() => {
                report.points += 1;
                report.max_residual = report.max_residual.max(r.abs());
                sq += r * r;
            }
            Ok(r) => {
                failed += 1;
                if report.failures.len() < MAX_RECORDED_FAILURES {
                    report.failures.push(PointFailure {
                        p,
                        q,
                        error: format!("non-finite residual {r}"),
                    });
                }
            }
            Err(e) => {
                failed += 1;
                if report.failures.len() < MAX_RECORDED_FAILURES {
                    report.failures.push(PointFailure {
                        p,
                        q,
                        error: e.to_string(),
                    });
                }
            }
        }
    }
    if report.points > 0 {
        report.l2_residual = (sq / report.points as f64).sqrt();
    }
    report.pass = failed == 0 && report.max_residual <= tolerance;
    report
}

// ---------------------------------------------------------------------------
// Random profile pool

/// Templates of the profile pool; each draw is `A·g(k·s + φ)`.
pub const POOL_TEMPLATES: [&str; 8] = [
    "s",
    "s^2",
    "s^3 - 2*s",
    "0.5*s^3 - s^2 + s - 1",
    "sin(s)",
    "cos(s)",
    "exp(s)",
    "tanh(s)",
];

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn random_profile(rng: &mut ChaCha8Rng) -> Expression {
    let template = POOL_TEMPLATES[rng.gen_range(0..POOL_TEMPLATES.len())];
    let amp = round3(rng.gen_range(0.5..=2.0));
    let k = round3(rng.gen_range(0.5..=1.5));
    let phase = round3(rng.gen_range(-1.0..=1.0));
    let inner = Node::Bin(
        BinOp::Add,
        Box::new(Node::Bin(
            BinOp::Mul,
            Box::new(Node::Num(k)),
            Box::new(Node::Var("s".into())),
        )),
        Box::new(Node::Num(phase)),
    );
    let body = Expression::parse(template, &["s"])
        .expect("pool template")
        .substitute("s", &inner);
    Expression::from_node(
        Node::Bin(BinOp::Mul, Box::new(Node::Num(amp)), Box::new(body.root().clone())),
        &["s"],
    )
}

/// `count` seeded (F, G) pairs from the standard pool.
pub fn standard_pool(seed: u64, count: usize) -> Vec<SolutionPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f = random_profile(&mut rng);
            let g = random_profile(&mut rng);
            SolutionPair::new(f, g)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Deliberate defects

/// A deliberate perturbation used to show the suites are not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Defect {
    None,
    /// Adds `0.01·p³q²` to every checked field.
    PerturbSolution,
    /// Uses `1.1·κ` in the integral relation.
    ScaleKappa,
    /// Flips the sign of the exponent in N1's substitution `t = 3T^{-1/3}`.
    FlipSign,
}

impl FromStr for Defect {
    type Err = String;
    fn from_str(s: &str) -> Result<Defect, String> {
        match s {
            "none" => Ok(Defect::None),
            "perturb" | "perturb-solution" => Ok(Defect::PerturbSolution),
            "kappa" | "scale-kappa" => Ok(Defect::ScaleKappa),
            "flip" | "flip-sign" => Ok(Defect::FlipSign),
            other => Err(format!("unknown defect `{other}` (none, perturb, kappa, flip)")),
        }
    }
}

impl Defect {
    pub fn name(&self) -> &'static str {
        match self {
            Defect::None => "none",
            Defect::PerturbSolution => "perturb",
            Defect::ScaleKappa => "kappa",
            Defect::FlipSign => "flip",
        }
    }

    fn perturb(self, u: SharedField) -> SharedField {
        if self != Defect::PerturbSolution {
            return u;
        }
        field(move |p, q| Ok(u.eval(p, q)? + (p * p * p * q * q).scale(0.01)))
    }

    fn perturb_value(self, p: f64, q: f64) -> f64 {
        if self == Defect::PerturbSolution {
            0.01 * p.powi(3) * q * q
        } else {
            0.0
        }
    }

    /// N1 or N2 as used under this defect.
    pub fn nonlocal(self, base: NonlocalMapping) -> NonlocalMapping {
        match (self, base.id) {
            (Defect::FlipSign, MappingId::N1) => NonlocalMapping {
                t_exponent: Ratio::new(1, 3),
                ..base
            },
            (Defect::ScaleKappa, _) => NonlocalMapping {
                relation_kappa: 1.1 * base.relation_kappa,
                ..base
            },
            _ => base,
        }
    }

    fn mapping(self, m: Mapping) -> Mapping {
        match m {
            Mapping::Nonlocal(n) => Mapping::Nonlocal(self.nonlocal(n)),
            Mapping::Composite(c) => Mapping::Composite(CompositeMapping {
                inner: self.nonlocal(c.inner),
                ..c
            }),
            other => other,
        }
    }
}

// ---------------------------------------------------------------------------
// Mapping equivalence

/// Source equation's speed used for each catalog mapping's equivalence check.
pub fn default_source_speed(id: MappingId) -> WaveSpeed {
    match id {
        MappingId::M3 => WaveSpeed::profile_str("1").expect("constant"),
        MappingId::D0 => WaveSpeed::delta(0.0),
        MappingId::DPos => WaveSpeed::delta(1.0),
        MappingId::DNeg => WaveSpeed::delta(-1.0),
        _ => WaveSpeed::quadratic_x(),
    }
}

/// 16×16 grid in the mapping's new coordinates, avoiding singular lines.
pub fn equivalence_grid(id: MappingId) -> GridSpec {
    const N: usize = 16;
    let (first, second) = match id {
        MappingId::M1 => (Axis::linear("X", -2.0, -0.5, N), Axis::linear("t", -1.0, 1.0, N)),
        MappingId::M2 => (Axis::linear("x", 0.5, 2.0, N), Axis::log("T", 0.5, 2.0, N)),
        MappingId::M3 => (Axis::linear("X", -2.0, -0.5, N), Axis::log("T", 0.5, 2.0, N)),
        MappingId::Q => (Axis::linear("xi", 0.5, 2.0, N), Axis::linear("eta", 0.5, 2.0, N)),
        MappingId::D0 => (Axis::linear("xi", 2.5, 3.5, N), Axis::linear("eta", 0.5, 1.5, N)),
        MappingId::DPos => (Axis::linear("xi", -0.5, 0.5, N), Axis::linear("eta", -2.5, -1.5, N)),
        MappingId::DNeg => (Axis::linear("xi", -0.4, 0.4, N), Axis::linear("eta", -0.4, 0.4, N)),
        MappingId::N1 | MappingId::C1 => (Axis::linear("x", 0.5, 2.0, N), Axis::log("T", 1.0, 8.0, N)),
        MappingId::N2 | MappingId::C2 => (Axis::linear("x", 0.5, 2.0, N), Axis::log("T", 0.05, 1.0, N)),
        MappingId::Identity | MappingId::Composite => (Axis::linear("x", 0.5, 2.0, N), Axis::linear("t", 0.5, 2.0, N)),
    };
    GridSpec::new(first, second)
}

fn incompatible(m: &Mapping, speed: &WaveSpeed, reason: impl Into<String>) -> VerifyError {
    VerifyError::Incompatible {
        mapping: m.id(),
        speed: speed.to_string(),
        reason: reason.into(),
    }
}

/// Target operator of `m` applied to the equation with `speed`.
pub fn target_operator(m: &Mapping, speed: &WaveSpeed) -> Result<Operator, VerifyError> {
    let id = match m {
        Mapping::Nonlocal(n) => n.id,
        other => other.id(),
    };
    match transformed_speed(speed, id) {
        Ok(s) => Ok(Operator::Wave(s)),
        Err(SpeedError::CharacteristicTarget(_)) => Ok(Operator::Characteristic),
        Err(e) => Err(incompatible(m, speed, e.to_string())),
    }
}

/// Pushes `trials` pool solutions of the source equation through `m` and
/// measures the target equation's residual on `grid`.
pub fn check_mapping_equivalence_on(
    m: &Mapping,
    speed: &WaveSpeed,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
    tolerance: f64,
    defect: Defect,
) -> Result<ResidualReport, VerifyError> {
    let op = target_operator(m, speed)?;
    let pairs = standard_pool(seed, trials);
    let mut report = ResidualReport::empty(&m.id().to_string(), &op, grid, tolerance);
    for (i, pair) in pairs.into_iter().enumerate() {
        let source: SharedField = match m {
            Mapping::Composite(_) => Arc::new(dalembert(pair)),
            _ => Arc::new(
                solution_for_speed(speed, pair).ok_or_else(|| incompatible(m, speed, "no closed-form solution"))?,
            ),
        };
        let target = defect.perturb(m.push_forward(source));
        report.absorb(residual_grid(
            target.as_ref(),
            &op,
            grid,
            tolerance,
            &format!("{} trial {i}", m.id()),
        ));
    }
    report.subject = m.id().to_string();
    Ok(report)
}

/// [`check_mapping_equivalence_on`] with the mapping's default grid.
pub fn check_mapping_equivalence(
    m: &Mapping,
    speed: &WaveSpeed,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport, VerifyError> {
    check_mapping_equivalence_on(
        m,
        speed,
        &equivalence_grid(m.id()),
        trials,
        seed,
        tolerance,
        Defect::None,
    )
}

// ---------------------------------------------------------------------------
// Round trips

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub mapping: MappingId,
    pub trials: usize,
    /// Worst `|inverse(forward(p)) − p|` (max norm).
    pub max_deviation: f64,
    /// Worst deviation divided by `1 + |p|`.
    pub max_scaled_deviation: f64,
    /// Worst relative error of `μ(p)·(1/μ)(forward(p))` against 1.
    pub max_multiplier_error: f64,
}

/// Box of old coordinates sampled for round trips.
fn roundtrip_box(id: MappingId) -> ((f64, f64), (f64, f64)) {
    match id {
        MappingId::M1 | MappingId::Q => ((0.2, 5.0), (-2.0, 2.0)),
        MappingId::M2 => ((-2.0, 2.0), (-5.0, -0.2)),
        MappingId::M3 => ((0.2, 5.0), (-5.0, -0.2)),
        MappingId::D0 => ((0.2, 5.0), (0.2, 5.0)),
        MappingId::DPos => ((1.1, 5.0), (1.1, 5.0)),
        _ => ((-3.0, 3.0), (-3.0, 3.0)),
    }
}

/// Worst round-trip deviation over `trials` seeded valid points.
pub fn check_roundtrip(m: &Mapping, trials: usize, seed: u64) -> Result<RoundtripReport, VerifyError> {
    let inv = invert(m)?;
    let p = m.as_point().expect("invertible mappings are point mappings");
    let ((x0, x1), (t0, t1)) = roundtrip_box(p.id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RoundtripReport {
        mapping: p.id,
        trials,
        max_deviation: 0.0,
        max_scaled_deviation: 0.0,
        max_multiplier_error: 0.0,
    };
    for _ in 0..trials {
        let (x, t) = (rng.gen_range(x0..x1), rng.gen_range(t0..t1));
        let (a, b) = p.forward(x, t)?;
        let (x2, t2) = inv.forward(a, b)?;
        let dev = (x2 - x).abs().max((t2 - t).abs());
        report.max_deviation = report.max_deviation.max(dev);
        report.max_scaled_deviation = report.max_scaled_deviation.max(dev / (1.0 + x.abs().max(t.abs())));
        let prod = p.multiplier().value_at(x, t)? * inv.multiplier().value_at(a, b)?;
        report.max_multiplier_error = report.max_multiplier_error.max((prod - 1.0).abs());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Solutions,
    Mappings,
    Integral,
    Roundtrip,
    Fd,
    Ivp,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Solutions,
        Suite::Mappings,
        Suite::Integral,
        Suite::Roundtrip,
        Suite::Fd,
        Suite::Ivp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Solutions => "solutions",
            Suite::Mappings => "mappings",
            Suite::Integral => "integral",
            Suite::Roundtrip => "roundtrip",
            Suite::Fd => "fd",
            Suite::Ivp => "ivp",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>, String> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        s.split(',')
            .map(|part| {
                Suite::ALL
                    .iter()
                    .copied()
                    .find(|x| x.name() == part.trim())
                    .ok_or_else(|| {
                        format!("unknown suite `{part}` (all, solutions, mappings, integral, roundtrip, fd, ivp)")
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub trials: usize,
    pub defect: Defect,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            tolerance: DEFAULT_TOL,
            trials: DEFAULT_TRIALS,
            defect: Defect::None,
        }
    }
}

/// One pass/fail measurement: `value` compared against `limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="`, `"<"`, or `"in"` (with `limit` and `upper`).
    pub comparison: &'static str,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            value,
            comparison: "<=",
            limit,
            upper: None,
            pass: value <= limit,
            detail: String::new(),
        }
    }

    fn below(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check {
            comparison: "<",
            pass: value < limit,
            ..Check::at_most(name, value, limit)
        }
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            comparison: "in",
            limit: lo,
            upper: Some(hi),
            pass: value >= lo && value <= hi,
            detail: String::new(),
        }
    }

    fn failed(name: impl Into<String>, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            value: f64::NAN,
            comparison: "<=",
            limit: 0.0,
            upper: None,
            pass: false,
            detail: detail.into(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }

    fn from_residual(name: impl Into<String>, r: &ResidualReport) -> Check {
        let mut c = Check::at_most(name, r.max_residual, r.tolerance);
        if !r.failures.is_empty() {
            c.pass = false;
            c.detail = format!(
                "{} evaluation failures, first: {}",
                r.failures.len(),
                r.failures[0].error
            );
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: &'static str,
    pub seed: u64,
    pub tolerance: f64,
    pub trials: usize,
    pub defect: Defect,
    pub pass: bool,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    /// Fixed-width text table, one line per check.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            for c in &s.checks {
                let bound = match c.upper {
                    Some(u) => format!("in [{}, {}]", c.limit, u),
                    None => format!("{} {:e}", c.comparison, c.limit),
                };
                out.push_str(&format!(
                    "{:<4} {:<10} {:<40} {:>12.4e} {}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    s.suite.name(),
                    c.name,
                    c.value,
                    bound
                ));
            }
        }
        out.push_str(&format!("overall: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

pub fn run_suites(suites: &[Suite], cfg: &SuiteConfig) -> VerifyReport {
    let results: Vec<SuiteResult> = suites.iter().map(|&s| run_suite(s, cfg)).collect();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        trials: cfg.trials,
        defect: cfg.defect,
        pass: results.iter().all(|r| r.pass),
        suites: results,
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> SuiteResult {
    let checks = match suite {
        Suite::Solutions => solutions_suite(cfg),
        Suite::Mappings => mappings_suite(cfg),
        Suite::Integral => integral_suite(cfg),
        Suite::Roundtrip => roundtrip_suite(cfg),
        Suite::Fd => fd_suite(cfg),
        Suite::Ivp => ivp_suite(cfg),
    };
    SuiteResult {
        suite,
        pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
        checks,
    }
}

type Builder = fn(SolutionPair) -> AnalyticSolution;

/// Families, their operators and the 64×64 grids they are checked on.
pub fn residual_cases() -> Vec<(&'static str, Builder, GridSpec)> {
    const N: usize = 64;
    fn delta0(p: SolutionPair) -> AnalyticSolution {
        general_solution_delta(p, 0.0, DeltaComponent::default())
    }
    fn delta_pos(p: SolutionPair) -> AnalyticSolution {
        general_solution_delta(p, 1.0, DeltaComponent::default())
    }
    fn delta_neg(p: SolutionPair) -> AnalyticSolution {
        general_solution_delta(p, -1.0, DeltaComponent::default())
    }
    let lin = Axis::linear;
    vec![
        (
            "CONST15",
            dalembert as Builder,
            GridSpec::new(lin("xi", -2.0, 2.0, N), lin("eta", -2.0, 2.0, N)),
        ),
        (
            "QUAD17",
            general_solution_quadratic,
            GridSpec::new(lin("x", 0.5, 2.0, N), lin("t", -1.0, 1.0, N)),
        ),
        (
            "DELTA0",
            delta0,
            GridSpec::new(lin("x", 0.5, 2.0, N), lin("t", 0.5, 2.0, N)),
        ),
        (
            "DELTA+1",
            delta_pos,
            GridSpec::new(lin("x", 1.2, 3.0, N), lin("t", 1.2, 3.0, N)),
        ),
        (
            "DELTA-1",
            delta_neg,
            GridSpec::new(lin("x", -2.0, 2.0, N), lin("t", -2.0, 2.0, N)),
        ),
        (
            "N1GEN",
            general_solution_n1,
            GridSpec::new(lin("x", 0.5, 2.0, N), Axis::log("T", 0.5, 8.0, N)),
        ),
        (
            "N2GEN",
            general_solution_n2,
            GridSpec::new(lin("x", 0.5, 2.0, N), Axis::log("T", 0.05, 2.0, N)),
        ),
    ]
}

fn operator_for(u: &AnalyticSolution) -> Operator {
    u.speed().map(Operator::Wave).unwrap_or(Operator::Characteristic)
}

fn solutions_suite(cfg: &SuiteConfig) -> Vec<Check> {
    let pairs = standard_pool(cfg.seed, cfg.trials);
    residual_cases()
        .into_iter()
        .map(|(name, build, grid)| {
            let mut total: Option<ResidualReport> = None;
            for pair in &pairs {
                let u = build(pair.clone());
                let op = operator_for(&u);
                let f = cfg.defect.perturb(Arc::new(u));
                let r = residual_grid(f.as_ref(), &op, &grid, cfg.tolerance, name);
                match total.as_mut() {
                    Some(t) => t.absorb(r),
                    None => total = Some(r),
                }
            }
            let total = total.expect("at least one trial");
            Check::from_residual(format!("{name} residual"), &total).with_detail(format!("grid {}", total.grid))
        })
        .collect()
}

fn mappings_suite(cfg: &SuiteConfig) -> Vec<Check> {
    catalog()
        .into_iter()
        .map(|m| {
            let id = m.id();
            let m = cfg.defect.mapping(m);
            let speed = default_source_speed(id);
            let name = format!("{id} equivalence");
            match check_mapping_equivalence_on(
                &m,
                &speed,
                &equivalence_grid(id),
                cfg.trials,
                cfg.seed,
                cfg.tolerance,
                cfg.defect,
            ) {
                Ok(r) => Check::from_residual(name, &r),
                Err(e) => Check::failed(name, e.to_string()),
            }
        })
        .collect()
}

/// Relation residual at a point, normalized by `max(|lhs|, |κ·rhs|, 1)`.
fn relation_residual(
    n: &NonlocalMapping,
    u: &dyn JetField,
    b: &dyn JetField,
    x: f64,
    big_t: f64,
) -> Result<(f64, f64, f64), EvalError> {
    let (lhs, base) = integral_relation_sides(n, u, b, x, big_t)?;
    let rhs = n.relation_kappa * base;
    Ok(((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0), lhs, base))
}

/// `T` range for the relation check: `t ∈ [1, 3]`.
fn relation_range(n: &NonlocalMapping) -> (f64, f64) {
    let (a, b) = (n.big_t_of_t(1.0), n.big_t_of_t(3.0));
    (a.min(b), a.max(b))
}

fn integral_suite(cfg: &SuiteConfig) -> Vec<Check> {
    const POINTS: usize = 50;
    let pairs = standard_pool(cfg.seed, cfg.trials.max(1));
    let mut checks = Vec::new();
    for base in [NonlocalMapping::n1(), NonlocalMapping::n2()] {
        let n = cfg.defect.nonlocal(base);
        let (t_lo, t_hi) = relation_range(&n);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        let mut worst: f64 = 0.0;
        let mut error = None;
        for i in 0..POINTS {
            let x = rng.gen_range(0.5..2.0);
            let big_t = t_lo * (t_hi / t_lo).powf(rng.gen_range(0.0..1.0));
            let u: SharedField = Arc::new(general_solution_quadratic(pairs[i % pairs.len()].clone()));
            let b = push_forward_nonlocal(&n, u.clone());
            let u = cfg.defect.perturb(u);
            match relation_residual(&n, u.as_ref(), b.as_ref(), x, big_t) {
                Ok((r, _, _)) => worst = worst.max(r),
                Err(e) => {
                    error.get_or_insert(e.to_string());
                }
            }
        }
        let mut c = Check::at_most(format!("{} relation", n.id), worst, cfg.tolerance);
        if let Some(e) = error {
            c.pass = false;
            c.detail = e;
        }
        checks.push(c);

        // κ from a least-squares fit at three points against the wired value
        let u: SharedField = Arc::new(general_solution_quadratic(
            SolutionPair::parse("sin(s)", "cos(s)").expect("profiles"),
        ));
        let b = push_forward_nonlocal(&n, u.clone());
        let u = cfg.defect.perturb(u);
        let fit = [(0.7, 0.25), (1.3, 0.5), (1.9, 0.75)]
            .iter()
            .map(|&(x, s)| integral_relation_sides(&n, u.as_ref(), b.as_ref(), x, t_lo * (t_hi / t_lo).powf(s)))
            .collect::<Result<Vec<_>, _>>();
        checks.push(match fit {
            Ok(sides) => {
                let num: f64 = sides.iter().map(|(l, r)| l * r).sum();
                let den: f64 = sides.iter().map(|(_, r)| r * r).sum();
                let kappa = num / den;
                let rel = ((kappa - n.relation_kappa) / n.relation_kappa).abs();
                Check::at_most(format!("{} kappa fit", n.id), rel, 1e-10)
                    .with_detail(format!("fitted {kappa}, wired {}", n.relation_kappa))
            }
            Err(e) => Check::failed(format!("{} kappa fit", n.id), e.to_string()),
        });
    }
    checks
}

const ROUNDTRIP_TRIALS: usize = 100;
const ROUNDTRIP_TOL: f64 = 1e-11;

fn roundtrip_suite(cfg: &SuiteConfig) -> Vec<Check> {
    catalog()
        .into_iter()
        .map(|m| {
            let id = m.id();
            let name = format!("{id} round trip");
            match (&m, check_roundtrip(&m, ROUNDTRIP_TRIALS, cfg.seed)) {
                (Mapping::Point(_), Ok(r)) => {
                    let mut c = Check::at_most(name, r.max_deviation, ROUNDTRIP_TOL);
                    if !(r.max_multiplier_error <= ROUNDTRIP_TOL) {
                        c.pass = false;
                    }
                    c.with_detail(format!("multiplier error {:e}", r.max_multiplier_error))
                }
                (Mapping::Point(_), Err(e)) => Check::failed(name, e.to_string()),
                (_, Err(VerifyError::Mapping(MappingError::NotInvertible(_)))) => Check {
                    name: format!("{id} invert errors"),
                    value: 0.0,
                    comparison: "<=",
                    limit: 0.0,
                    upper: None,
                    pass: true,
                    detail: "non-invertible".into(),
                },
                (_, _) => Check::failed(format!("{id} invert errors"), "inversion did not fail"),
            }
        })
        .collect()
}

/// Leapfrog test case: name, exact solution, speed, x-box, t-box.
pub type FdCase = (&'static str, SharedField, WaveSpeed, (f64, f64), (f64, f64));

pub fn fd_cases() -> Vec<FdCase> {
    let pair = || SolutionPair::parse("sin(s)", "cos(s)").expect("profiles");
    // for Δ = −1, (sin, cos) collapses to the bilinear 1 + x − t − xt
    let doubled = || SolutionPair::parse("sin(2*s)", "cos(2*s)").expect("profiles");
    let q = PointMapping::q();
    let via_q = apply_point(&invert_point(&q), Arc::new(dalembert(pair())));
    let c = DeltaComponent::default();
    let n1 = WaveSpeed::time_power(Ratio::new(-4, 3), WaveSpeed::quadratic_x());
    let n2 = WaveSpeed::time_power(Ratio::new(-2, 3), WaveSpeed::quadratic_x());
    vec![
        ("CONST15 via Q", via_q, WaveSpeed::quadratic_x(), (1.0, 2.0), (0.0, 0.3)),
        (
            "QUAD17",
            Arc::new(general_solution_quadratic(pair())),
            WaveSpeed::quadratic_x(),
            (1.0, 2.0),
            (0.0, 0.3),
        ),
        (
            "DELTA0",
            Arc::new(general_solution_delta(pair(), 0.0, c)),
            WaveSpeed::delta(0.0),
            (1.0, 2.0),
            (1.0, 1.3),
        ),
        (
            "DELTA+1",
            Arc::new(general_solution_delta(pair(), 1.0, c)),
            WaveSpeed::delta(1.0),
            (2.0, 3.0),
            (2.0, 2.3),
        ),
        (
            "DELTA-1",
            Arc::new(general_solution_delta(doubled(), -1.0, c)),
            WaveSpeed::delta(-1.0),
            (0.0, 1.0),
            (0.0, 0.3),
        ),
        (
            "N1GEN",
            Arc::new(general_solution_n1(pair())),
            n1,
            (1.0, 2.0),
            (1.0, 1.3),
        ),
        (
            "N2GEN",
            Arc::new(general_solution_n2(pair())),
            n2,
            (1.0, 2.0),
            (1.0, 1.3),
        ),
    ]
}

pub const FD_CELLS: [usize; 3] = [32, 64, 128];
pub const FD_CFL: f64 = 0.5;

fn fd_suite(cfg: &SuiteConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    for (name, exact, speed, xb, tb) in fd_cases() {
        let exact = cfg.defect.perturb(exact);
        let rows: Result<_, FdError> = convergence_study(exact.as_ref(), &speed, xb, tb, &FD_CELLS, FD_CFL);
        match rows {
            Ok(rows) => {
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.max_error)).collect();
                let order = convergence_order(&pts).unwrap_or(f64::NAN);
                checks.push(Check::within(format!("{name} order"), order, 1.8, 2.2));
                checks.push(Check::below(
                    format!("{name} finest error"),
                    rows[rows.len() - 1].max_error,
                    1e-3,
                ));
            }
            Err(e) => checks.push(Check::failed(format!("{name} leapfrog"), e.to_string())),
        }
    }
    checks
}

/// Max error of the recovered IVP solution on the query grid, and the data spacing.
pub fn ivp_error(samples: usize, defect: Defect) -> Result<(f64, f64), String> {
    let phi = Expression::parse("x*(sin(1/x) + cos(1/x))", &["x"]).expect("phi");
    let psi = Expression::parse("x*(cos(1/x) + sin(1/x))", &["x"]).expect("psi");
    let data = InitialData::from_expressions(&phi, &psi, 1.0, 4.0, 0.0, samples).map_err(|e| e.to_string())?;
    let h = 3.0 / (samples - 1) as f64;
    let sol = solve_ivp_quadratic(&data).map_err(|e| e.to_string())?;
    let exact = general_solution_quadratic(SolutionPair::parse("sin(s)", "cos(s)").expect("profiles"));
    // dense enough to resolve the spline end intervals near the determinacy boundary
    let grid = GridSpec::new(Axis::linear("x", 1.05, 3.95, 291), Axis::linear("t", -0.2, 0.2, 201));
    let mut worst: f64 = 0.0;
    for (x, t) in grid.points() {
        if !sol.contains(x, t) {
            continue;
        }
        let want = exact.value_at(x, t).map_err(|e| e.to_string())? + defect.perturb_value(x, t);
        let got = sol.value(x, t).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
    }
    Ok((worst, h))
}

fn ivp_suite(cfg: &SuiteConfig) -> Vec<Check> {
    match (ivp_error(512, cfg.defect), ivp_error(1023, cfg.defect)) {
        (Ok((e1, h)), Ok((e2, _))) => vec![
            Check::at_most("IVP max error / h^2", e1 / (h * h), 5.0).with_detail(format!("error {e1:e}, h {h:e}")),
            Check::within("IVP refinement ratio", e1 / e2, 3.4, 4.6),
        ],
        (Err(e), _) | (_, Err(e)) => vec![Check::failed("IVP recovery", e)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ExprField;

    fn xt(src: &str) -> ExprField {
        ExprField(Expression::parse(src, &["x", "t"]).unwrap())
    }

    #[test]
    fn residual_examples() {
        let quad = WaveSpeed::quadratic_x();
        assert_eq!(residual(&xt("0"), &quad, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(residual(&xt("x*t"), &quad, 2.0, 1.0).unwrap(), 0.0);
        let u = general_solution_delta(
            SolutionPair::parse("sin(s)", "exp(s)").unwrap(),
            -1.0,
            DeltaComponent::default(),
        );
        let speed = WaveSpeed::delta(-1.0);
        let r = residual(&u, &speed, 0.5, 0.5).unwrap();
        assert!(r.abs() <= 1e-8);
        let fd = fd_residual(&u, &speed, 0.5, 0.5, 1e-4).unwrap();
        assert!(fd.abs() < 1e-5, "{fd}");
    }

    #[test]
    fn residual_grid_examples() {
        let quad = Operator::Wave(WaveSpeed::quadratic_x());
        let grid: GridSpec = "x:1:2:32,t:0:1:32".parse().unwrap();
        let r = residual_grid(&xt("0"), &quad, &grid, 1e-8, "zero");
        assert!(r.pass && r.max_residual == 0.0 && r.points == 1024);
        let grid: GridSpec = "x:1:2:64,t:0:1:64".parse().unwrap();
        let u = general_solution_quadratic(SolutionPair::parse("sin(s)", "cos(s)").unwrap());
        assert!(residual_grid(&u, &quad, &grid, 1e-8, "quad").pass);
        let bad = Defect::PerturbSolution.perturb(Arc::new(u));
        let r = residual_grid(bad.as_ref(), &quad, &grid, 1e-8, "bad");
        assert!(!r.pass && r.max_residual > 1e-4);
    }

    #[test]
    fn domain_failures_fail_the_report() {
        let quad = Operator::Wave(WaveSpeed::quadratic_x());
        let grid: GridSpec = "x:-1:1:8,t:0:1:8".parse().unwrap();
        let u = general_solution_quadratic(SolutionPair::parse("s", "s").unwrap());
        let r = residual_grid(&u, &quad, &grid, 1e-8, "q");
        assert!(!r.pass && !r.failures.is_empty());
    }

    #[test]
    fn pool_is_deterministic() {
        let a = standard_pool(7, 20);
        let b = standard_pool(7, 20);
        assert_eq!(a, b);
        assert_ne!(a, standard_pool(8, 20));
        for p in &a {
            let back = Expression::parse(&p.f.render(), &["s"]).unwrap();
            assert_eq!(back.eval1(0.3).unwrap(), p.f.eval1(0.3).unwrap());
        }
    }

    #[test]
    fn equivalence_examples() {
        for id in [MappingId::Q, MappingId::N1, MappingId::M3] {
            let m = crate::mappings::find(id).unwrap();
            let r = check_mapping_equivalence(&m, &default_source_speed(id), 3, 7, 1e-8).unwrap();
            assert!(r.pass, "{id}: {r:?}");
        }
    }

    #[test]
    fn incompatible_speed_is_an_error() {
        let m = crate::mappings::find(MappingId::C1).unwrap();
        let r = check_mapping_equivalence(&m, &WaveSpeed::delta(0.0), 1, 7, 1e-8);
        assert!(matches!(r, Err(VerifyError::Incompatible { .. })));
    }

    #[test]
    fn roundtrip_examples() {
        let m1 = crate::mappings::find(MappingId::M1).unwrap();
        assert!(check_roundtrip(&m1, 100, 7).unwrap().max_deviation <= 1e-13);
        let dpos = crate::mappings::find(MappingId::DPos).unwrap();
        assert!(check_roundtrip(&dpos, 100, 7).unwrap().max_deviation <= 1e-11);
        let n2 = crate::mappings::find(MappingId::N2).unwrap();
        assert!(matches!(
            check_roundtrip(&n2, 10, 7),
            Err(VerifyError::Mapping(MappingError::NotInvertible(MappingId::N2)))
        ));
    }

    #[test]
    fn defect_parsing() {
        assert_eq!("kappa".parse::<Defect>(), Ok(Defect::ScaleKappa));
        assert!("bogus".parse::<Defect>().is_err());
        assert_eq!(Suite::parse_list("fd,ivp").unwrap(), vec![Suite::Fd, Suite::Ivp]);
        assert_eq!(Suite::parse_list("all").unwrap().len(), 6);
    }
}
