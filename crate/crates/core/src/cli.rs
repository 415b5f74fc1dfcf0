//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation/domain failure or failed checks,
//! 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::domain::{GridSpec, Region};
use crate::expr::Expression;
use crate::fdsolve::{convergence_order, convergence_study};
use crate::field::SharedField;
use crate::ivp::{solve_ivp_quadratic, InitialData, DEFAULT_SAMPLES};
use crate::mappings::{catalog, find, MappingId};
use crate::solutions::{family_from_tag, AnalyticSolution, Family, SolutionPair};
use crate::speeds::{classify, Classification, DeltaComponent};
use crate::verify::{
    check_mapping_equivalence_on, default_source_speed, equivalence_grid, fd_cases, run_suites, Defect, Suite,
    SuiteConfig, DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS, SCHEMA_VERSION,
};

#[derive(Debug, Parser)]
#[command(
    name = "varwave",
    version,
    about = "Variable-speed linear wave equations: solutions, mappings, checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Evaluate a family's general solution on a grid (CSV x,t,u)
    Solve,
    /// Solve the c = x^2 initial value problem (CSV x,t,u)
    Ivp,
    /// Run property suites (exit 0 iff all pass)
    Verify,
    /// Leapfrog convergence study against a closed form (CSV h,max_error,l2_error)
    Compare,
    /// Classify a wave-speed expression
    Classify,
    /// List the mapping catalog
    Catalog,
}

/// Options shared by all commands; a JSON config file may supply any of
/// them under the same names, and flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Settings {
    /// JSON file with default values for any option
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Solution family: CONST15, QUAD17, DELTA, N1GEN, N2GEN, UNIFORM
    #[arg(long, global = true)]
    family: Option<String>,
    /// Mapping id (M1 M2 M3 Q D0 DPOS DNEG N1 N2 C1 C2)
    #[arg(long, global = true)]
    mapping: Option<String>,
    /// Profile F(s)
    #[arg(long = "F", global = true)]
    #[serde(rename = "F")]
    f: Option<String>,
    /// Profile G(s)
    #[arg(long = "G", global = true)]
    #[serde(rename = "G")]
    g: Option<String>,
    /// Wave speed expression in x and t
    #[arg(long, global = true)]
    c: Option<String>,
    /// Grid "x:a:b:n,t:a:b:n[:log]"
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Residual tolerance (default 1e-8)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of the profile pool and sample points (default 7)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; JSON headers go to <out>.json
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON on stdout
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    json: bool,
    /// Δ for the DELTA family
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Δ > 0 component as "xband,tband" with bands above|inside|below
    #[arg(long, global = true)]
    component: Option<String>,
    /// Constant speed for UNIFORM
    #[arg(long, global = true)]
    c0: Option<f64>,
    /// Random trials per check
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Suites: all or a comma list of solutions,mappings,integral,roundtrip,fd,ivp
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Deliberate defect: none, perturb, kappa, flip
    #[arg(long, global = true)]
    inject: Option<String>,
    /// IVP: u(x, t0) as an expression in x
    #[arg(long, global = true)]
    phi: Option<String>,
    /// IVP: u_t(x, t0) as an expression in x
    #[arg(long, global = true)]
    psi: Option<String>,
    /// IVP: CSV file with columns x,phi,psi (instead of --phi/--psi)
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// IVP: left end of the data interval
    #[arg(long, global = true)]
    a: Option<f64>,
    /// IVP: right end of the data interval
    #[arg(long, global = true)]
    b: Option<f64>,
    /// IVP: time of the initial data (default 0)
    #[arg(long, global = true, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// IVP: samples for expression data
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// compare: x range "a:b"
    #[arg(long = "x-range", global = true, allow_hyphen_values = true)]
    #[serde(rename = "x-range")]
    x_range: Option<String>,
    /// compare: t range "t0:t1"
    #[arg(long = "t-range", global = true, allow_hyphen_values = true)]
    #[serde(rename = "t-range")]
    t_range: Option<String>,
    /// compare: cell counts, e.g. "32,64,128"
    #[arg(long, global = true)]
    cells: Option<String>,
    /// compare: CFL number in (0, 1] (default 0.5)
    #[arg(long, global = true)]
    cfl: Option<f64>,
}

impl Settings {
    fn merge(self, file: Settings) -> Settings {
        Settings {
            config: self.config,
            family: self.family.or(file.family),
            mapping: self.mapping.or(file.mapping),
            f: self.f.or(file.f),
            g: self.g.or(file.g),
            c: self.c.or(file.c),
            grid: self.grid.or(file.grid),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            json: self.json || file.json,
            delta: self.delta.or(file.delta),
            component: self.component.or(file.component),
            c0: self.c0.or(file.c0),
            trials: self.trials.or(file.trials),
            suite: self.suite.or(file.suite),
            inject: self.inject.or(file.inject),
            phi: self.phi.or(file.phi),
            psi: self.psi.or(file.psi),
            data: self.data.or(file.data),
            a: self.a.or(file.a),
            b: self.b.or(file.b),
            t0: self.t0.or(file.t0),
            samples: self.samples.or(file.samples),
            x_range: self.x_range.or(file.x_range),
            t_range: self.t_range.or(file.t_range),
            cells: self.cells.or(file.cells),
            cfl: self.cfl.or(file.cfl),
        }
    }

    fn tol(&self) -> Result<f64, String> {
        positive("--tol", self.tol.unwrap_or(DEFAULT_TOL))
    }

    fn trials(&self) -> Result<usize, String> {
        match self.trials.unwrap_or(DEFAULT_TRIALS) {
            0 => Err("--trials must be at least 1".into()),
            n => Ok(n),
        }
    }

    fn grid(&self) -> Result<GridSpec, String> {
        let src = self.grid.as_deref().ok_or("--grid is required")?;
        src.parse().map_err(|e| format!("{e}"))
    }

    fn pair(&self) -> Result<SolutionPair, String> {
        let f = self.f.as_deref().ok_or("--F is required")?;
        let g = self.g.as_deref().ok_or("--G is required")?;
        SolutionPair::parse(f, g).map_err(|e| format!("profile: {e}"))
    }

    fn component(&self) -> Result<DeltaComponent, String> {
        match &self.component {
            None => Ok(DeltaComponent::default()),
            Some(s) => {
                let (x, t) = s.split_once(',').ok_or("--component must be \"xband,tband\"")?;
                Ok(DeltaComponent {
                    x: x.trim().parse().map_err(|e| format!("{e}"))?,
                    t: t.trim().parse().map_err(|e| format!("{e}"))?,
                })
            }
        }
    }

    fn family(&self) -> Result<Family, String> {
        let tag = self.family.as_deref().ok_or("--family is required")?;
        let delta = self.delta.unwrap_or(0.0);
        if !delta.is_finite() {
            return Err("--delta must be finite".into());
        }
        let c0 = self.c0.unwrap_or(1.0);
        family_from_tag(tag, delta, c0, self.component()?).ok_or_else(|| format!("unknown family `{tag}`"))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be positive (got {v})"))
    }
}

fn parse_range(name: &str, s: &str) -> Result<(f64, f64), String> {
    let bad = || format!("{name} must be \"a:b\" with a < b (got `{s}`)");
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if a < b {
        Ok((a, b))
    } else {
        Err(bad())
    }
}

/// Output sinks: main data goes to `--out` or stdout; the JSON header to
/// `<out>.json` or stderr.
struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

fn header_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn emit(io: &mut Io<'_>, out: Option<&Path>, data: &str, header: Option<&str>) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, data).map_err(|e| format!("writing {}: {e}", path.display()))?;
            if let Some(h) = header {
                let hp = header_path(path);
                fs::write(&hp, format!("{h}\n")).map_err(|e| format!("writing {}: {e}", hp.display()))?;
            }
        }
        None => {
            io.stdout.write_all(data.as_bytes()).map_err(|e| e.to_string())?;
            if let Some(h) = header {
                writeln!(io.stderr, "{h}").map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable report")
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    run_with(args, &mut stdout, &mut stderr)
}

/// [`run`] with explicit output streams.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    match execute(cli, &mut io) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            1
        }
    }
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<i32, String> {
    let settings = match &cli.settings.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
            let file: Settings = serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
            cli.settings.clone().merge(file)
        }
        None => cli.settings.clone(),
    };
    match cli.command {
        Command::Solve => solve(&settings, io),
        Command::Ivp => ivp(&settings, io),
        Command::Verify => verify(&settings, io),
        Command::Compare => compare(&settings, io),
        Command::Classify => classify_cmd(&settings, io),
        Command::Catalog => catalog_cmd(&settings, io),
    }
}

#[derive(Serialize)]
struct SolveHeader<'a> {
    schema_version: &'static str,
    command: &'static str,
    family: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mapping: Option<String>,
    #[serde(rename = "F")]
    f: String,
    #[serde(rename = "G")]
    g: String,
    grid: String,
    region: Region,
    points: usize,
    columns: [&'a str; 3],
}

fn solve(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let family = s.family()?;
    let pair = s.pair()?;
    let grid = s.grid()?;
    let solution = AnalyticSolution {
        family,
        pair: pair.clone(),
    };
    let region = solution.region();
    let mut field: SharedField = Arc::new(solution);
    let mut mapping = None;
    if let Some(id) = &s.mapping {
        let id: MappingId = id.parse().map_err(|e| format!("{e}"))?;
        let m = find(id).ok_or_else(|| format!("unknown mapping {id}"))?;
        field = m.push_forward(field);
        mapping = Some(id.to_string());
    }
    let mut csv = String::from("x,t,u\n");
    for (x, t) in grid.points() {
        let u = field.value_at(x, t).map_err(|e| format!("at ({x}, {t}): {e}"))?;
        csv.push_str(&format!("{x},{t},{u}\n"));
    }
    let header = SolveHeader {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        family: family.tag(),
        delta: match family {
            Family::Delta { delta, .. } => Some(delta),
            _ => None,
        },
        c0: match family {
            Family::Uniform { c0 } => Some(c0),
            _ => None,
        },
        mapping,
        f: pair.f.render(),
        g: pair.g.render(),
        grid: grid.to_string(),
        region,
        points: grid.len(),
        columns: ["x", "t", "u"],
    };
    emit(
        io,
        s.out.as_deref(),
        &csv,
        Some(&serde_json::to_string(&header).expect("header")),
    )?;
    Ok(0)
}

type Columns = (Vec<f64>, Vec<f64>, Vec<f64>);

fn read_data_csv(path: &Path) -> Result<Columns, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("data {}: {e}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("data file is empty")?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["x", "phi", "psi"] {
        return Err("data file header must be x,phi,psi".into());
    }
    let (mut xs, mut phi, mut psi) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("data line {}: {e}", i + 2))?;
        if cols.len() != 3 {
            return Err(format!("data line {}: expected 3 columns", i + 2));
        }
        xs.push(cols[0]);
        phi.push(cols[1]);
        psi.push(cols[2]);
    }
    Ok((xs, phi, psi))
}

#[derive(Serialize)]
struct IvpHeader {
    schema_version: &'static str,
    command: &'static str,
    a: f64,
    b: f64,
    t0: f64,
    samples: usize,
    s_min: f64,
    s_max: f64,
    determinacy: &'static str,
    grid: String,
    points: usize,
    outside: usize,
}

fn ivp(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let t0 = s.t0.unwrap_or(0.0);
    let data = match &s.data {
        Some(path) => {
            let (xs, phi, psi) = read_data_csv(path)?;
            InitialData::from_samples(xs, phi, psi, t0).map_err(|e| e.to_string())?
        }
        None => {
            let parse = |name: &str, v: &Option<String>| -> Result<Expression, String> {
                let src = v
                    .as_deref()
                    .ok_or_else(|| format!("--{name} (or --data) is required"))?;
                Expression::parse(src, &["x"]).map_err(|e| format!("--{name}: {e}"))
            };
            let phi = parse("phi", &s.phi)?;
            let psi = parse("psi", &s.psi)?;
            let a = s.a.ok_or("--a is required")?;
            let b = s.b.ok_or("--b is required")?;
            InitialData::from_expressions(&phi, &psi, a, b, t0, s.samples.unwrap_or(DEFAULT_SAMPLES))
                .map_err(|e| e.to_string())?
        }
    };
    let sol = solve_ivp_quadratic(&data).map_err(|e| e.to_string())?;
    let grid = s.grid()?;
    let mut csv = String::from("x,t,u\n");
    let mut outside = 0;
    for (x, t) in grid.points() {
        if !sol.contains(x, t) {
            outside += 1;
            continue;
        }
        let u = sol.value(x, t).map_err(|e| e.to_string())?;
        csv.push_str(&format!("{x},{t},{u}\n"));
    }
    let d = sol.determinacy();
    let (a, b) = data.interval();
    let header = IvpHeader {
        schema_version: SCHEMA_VERSION,
        command: "ivp",
        a,
        b,
        t0,
        samples: data.xs.len(),
        s_min: d.s_min,
        s_max: d.s_max,
        determinacy: "s_min <= 1/x + (t - t0) <= s_max and s_min <= 1/x - (t - t0) <= s_max",
        grid: grid.to_string(),
        points: grid.len() - outside,
        outside,
    };
    emit(
        io,
        s.out.as_deref(),
        &csv,
        Some(&serde_json::to_string(&header).expect("header")),
    )?;
    Ok(0)
}

fn verify(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let cfg = SuiteConfig {
        seed: s.seed.unwrap_or(DEFAULT_SEED),
        tolerance: s.tol()?,
        trials: s.trials()?,
        defect: s.inject.as_deref().unwrap_or("none").parse::<Defect>()?,
    };
    if let Some(id) = &s.mapping {
        return verify_mapping(s, id, &cfg, io);
    }
    let suites = Suite::parse_list(s.suite.as_deref().unwrap_or("all"))?;
    let report = run_suites(&suites, &cfg);
    let json = to_json(&report);
    if let Some(path) = &s.out {
        fs::write(path, format!("{json}\n")).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    let text = if s.json { format!("{json}\n") } else { report.table() };
    io.stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(if report.pass { 0 } else { 1 })
}

fn verify_mapping(s: &Settings, id: &str, cfg: &SuiteConfig, io: &mut Io<'_>) -> Result<i32, String> {
    let id: MappingId = id.parse().map_err(|e| format!("{e}"))?;
    let m = find(id).ok_or_else(|| format!("unknown mapping {id}"))?;
    let speed = match &s.c {
        Some(src) => {
            let e = Expression::parse(src, &["x", "t"]).map_err(|e| format!("--c: {e}"))?;
            crate::speeds::WaveSpeed::from_expression(e)
        }
        None => default_source_speed(id),
    };
    let grid = match &s.grid {
        Some(g) => g.parse().map_err(|e| format!("{e}"))?,
        None => equivalence_grid(id),
    };
    let report = check_mapping_equivalence_on(&m, &speed, &grid, cfg.trials, cfg.seed, cfg.tolerance, cfg.defect)
        .map_err(|e| e.to_string())?;
    #[derive(Serialize)]
    struct Out<'a> {
        schema_version: &'static str,
        seed: u64,
        report: &'a crate::verify::ResidualReport,
    }
    let json = to_json(&Out {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        report: &report,
    });
    if let Some(path) = &s.out {
        fs::write(path, format!("{json}\n")).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    let text = if s.json {
        format!("{json}\n")
    } else {
        format!(
            "{} {} max residual {:e} (tol {:e}) over {} points\n",
            if report.pass { "PASS" } else { "FAIL" },
            id,
            report.max_residual,
            report.tolerance,
            report.points
        )
    };
    io.stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(if report.pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct CompareHeader {
    schema_version: &'static str,
    command: &'static str,
    family: &'static str,
    speed: String,
    x_range: (f64, f64),
    t_range: (f64, f64),
    cells: Vec<usize>,
    cfl: f64,
    order: f64,
    columns: [&'static str; 3],
}

fn compare(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let family = s.family()?;
    let pair = match (&s.f, &s.g) {
        (None, None) => SolutionPair::parse("sin(s)", "cos(s)").expect("profiles"),
        _ => s.pair()?,
    };
    let solution = AnalyticSolution { family, pair };
    let speed = family
        .speed()
        .ok_or("compare needs a family with a wave speed (not CONST15)")?;
    let defaults = fd_cases()
        .into_iter()
        .find(|c| c.0.starts_with(family.tag()))
        .map(|c| (c.3, c.4));
    let x_range = match &s.x_range {
        Some(r) => parse_range("--x-range", r)?,
        None => defaults.ok_or("--x-range is required")?.0,
    };
    let t_range = match &s.t_range {
        Some(r) => parse_range("--t-range", r)?,
        None => defaults.ok_or("--t-range is required")?.1,
    };
    let cells: Vec<usize> = s
        .cells
        .as_deref()
        .unwrap_or("32,64,128")
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|_| format!("--cells: bad count `{c}`"))
        })
        .collect::<Result<_, _>>()?;
    let cfl = s.cfl.unwrap_or(0.5);
    let rows = convergence_study(&solution, &speed, x_range, t_range, &cells, cfl).map_err(|e| e.to_string())?;
    let order = convergence_order(&rows.iter().map(|r| (r.h, r.max_error)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let mut csv = String::from("h,max_error,l2_error\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.h, r.max_error, r.l2_error));
    }
    let header = CompareHeader {
        schema_version: SCHEMA_VERSION,
        command: "compare",
        family: family.tag(),
        speed: speed.to_string(),
        x_range,
        t_range,
        cells,
        cfl,
        order,
        columns: ["h", "max_error", "l2_error"],
    };
    emit(
        io,
        s.out.as_deref(),
        &csv,
        Some(&serde_json::to_string(&header).expect("header")),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ClassifyOut {
    family: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<serde_json::Number>,
}

fn classify_cmd(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let src = s.c.as_deref().ok_or("--c is required")?;
    let e = Expression::parse(src, &["x", "t"]).map_err(|e| format!("--c: {e}"))?;
    let out = match classify(&e) {
        Classification::QuadraticX => ClassifyOut {
            family: "quadratic_x",
            delta: None,
        },
        Classification::Delta(d) => ClassifyOut {
            family: "delta",
            delta: Some(if d.fract() == 0.0 && d.abs() < 1e15 {
                serde_json::Number::from(d as i64)
            } else {
                serde_json::Number::from_f64(d).ok_or("non-finite delta")?
            }),
        },
        Classification::Profile => ClassifyOut {
            family: "profile",
            delta: None,
        },
        Classification::General => ClassifyOut {
            family: "general",
            delta: None,
        },
    };
    let json = serde_json::to_string(&out).expect("classification");
    emit(io, s.out.as_deref(), &format!("{json}\n"), None)?;
    Ok(0)
}

fn catalog_cmd(s: &Settings, io: &mut Io<'_>) -> Result<i32, String> {
    let infos: Vec<_> = catalog().iter().map(|m| m.info()).collect();
    let text = if s.json {
        #[derive(Serialize)]
        struct Out<'a> {
            schema_version: &'static str,
            mappings: &'a [crate::mappings::MappingInfo],
        }
        format!(
            "{}\n",
            to_json(&Out {
                schema_version: SCHEMA_VERSION,
                mappings: &infos,
            })
        )
    } else {
        let mut t = String::new();
        for i in &infos {
            t.push_str(&format!(
                "{:<5} {:<10} {:<28} -> {}\n",
                i.id.to_string(),
                i.kind,
                i.source_equation,
                i.target_equation
            ));
            for f in &i.formulas {
                t.push_str(&format!("      {f}\n"));
            }
        }
        t
    };
    emit(io, s.out.as_deref(), &text, None)?;
    Ok(0)
}
