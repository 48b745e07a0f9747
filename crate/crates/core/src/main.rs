use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use emden_fowler::orbit::{
    constant_orbit, continuation_sequence, decay_slope, find_periodic_with, homoclinic_by_continuation,
    homoclinic_by_tail_shooting, linearized_period, sweep_periods_with, verify_orbit, Check, PeriodicOptions,
    DEFAULT_EPSILON,
};
use emden_fowler::svg::{line_chart, Series};
use emden_fowler::{asymptotics_report, pde_residual, to_radial, Error, Orbit, OrbitKind, Problem};

#[derive(Parser)]
#[command(version, about = "Constant, periodic and homoclinic solutions of v'''' - A v'' + B v = g(v)")]
struct Cli {
    /// Dimension of the underlying biharmonic problem
    #[arg(long, global = true, default_value_t = 8)]
    n: u32,
    /// Nonlinearity: `critical`, `power:<q>`, `hardy:<beta>+power:<q>` or `beta=<v>;mono=<c>,<q>;...`
    #[arg(long, global = true, default_value = "critical")]
    g: String,
    /// Relative tolerance of the shooting integrations
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    out_json: Option<PathBuf>,
    #[arg(long, global = true)]
    out_csv: Option<PathBuf>,
    #[arg(long, global = true)]
    out_svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constants of the ODE
    Constants,
    /// Periodic orbit with minimum `a`, or the constant orbit at `a = a0`
    Orbit {
        #[arg(long)]
        a: f64,
    },
    /// Periods along a geometric sequence of minima
    Sweep {
        #[arg(long)]
        a_min: f64,
        #[arg(long)]
        a_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Homoclinic orbit and its decay diagnostics
    Homoclinic {
        #[arg(long, value_enum, default_value_t = Method::Tail)]
        method: Method,
        /// Tail seed amplitude
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Smallest minimum of the continuation, as a fraction of a0
        #[arg(long, default_value_t = 1e-4)]
        a_min_frac: f64,
        #[arg(long, default_value_t = 25)]
        continuation_steps: usize,
    },
    /// Re-check every invariant of a saved orbit; exits 1 on failure
    Verify {
        #[arg(long)]
        orbit_file: PathBuf,
    },
    /// Radial PDE profile of a saved orbit with its residual
    Radial {
        #[arg(long)]
        orbit_file: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 2000)]
        points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Continuation,
    Tail,
}

enum Failure {
    Config(String),
    Solver(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(tol) = cli.rel_tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Failure::Config(format!("--rel-tol must lie in (0, 1), got {tol}")));
        }
    }
    match &cli.command {
        Command::Constants => cmd_constants(cli),
        Command::Orbit { a } => cmd_orbit(cli, *a),
        Command::Sweep { a_min, a_max, steps } => cmd_sweep(cli, *a_min, *a_max, *steps),
        Command::Homoclinic { method, epsilon, a_min_frac, continuation_steps } => {
            cmd_homoclinic(cli, *method, *epsilon, *a_min_frac, *continuation_steps)
        }
        Command::Verify { orbit_file } => cmd_verify(orbit_file),
        Command::Radial { orbit_file, r_min, r_max, points } => cmd_radial(cli, orbit_file, *r_min, *r_max, *points),
    }
}

fn problem(cli: &Cli) -> CliResult<Problem> {
    Ok(Problem::from_config(cli.n, &cli.g)?)
}

fn periodic_options(cli: &Cli) -> PeriodicOptions {
    let mut opts = PeriodicOptions::default();
    if let Some(tol) = cli.rel_tol {
        opts.integrator.rel_tol = tol;
    }
    opts
}

/// Keys whose numbers rebuild an orbit, or carry its margins, and are
/// written at full precision.
const EXACT_KEYS: [&str; 7] = ["samples", "table", "tail", "c", "theta", "epsilon", "c_adaptive"];

/// Round every number to 12 significant digits, except under [`EXACT_KEYS`].
fn round12(v: Value) -> Value {
    match v {
        Value::Number(x) => match x.as_f64() {
            Some(f) if x.is_f64() => {
                let r: f64 = format!("{f:.11e}").parse().unwrap_or(f);
                json!(r)
            }
            _ => Value::Number(x),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round12).collect()),
        Value::Object(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| if EXACT_KEYS.contains(&k.as_str()) { (k, v) } else { (k, round12(v)) })
                .collect(),
        ),
        other => other,
    }
}

fn to_json<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("serializable output");
    serde_json::to_string_pretty(&round12(v)).expect("json")
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

/// JSON to `--out-json` when given, else stdout.
fn emit_json(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out_json {
        Some(p) => write_file(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_orbit(path: &Path) -> CliResult<(Orbit, Problem)> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let orbit: Orbit = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{} is not an orbit file: {e}", path.display())))?;
    let problem = orbit.problem()?;
    Ok((orbit, problem))
}

fn cmd_constants(cli: &Cli) -> CliResult<()> {
    let p = problem(cli)?;
    let mut v = serde_json::to_value(p.consts).expect("constants");
    v["g"] = json!(p.spec.to_string());
    v["b_over_A"] = json!(p.consts.curvature_ceiling());
    v["sqrt_mu_d"] = json!(p.consts.slow_rate());
    v["linearized_period"] = json!(linearized_period(&p));
    println!("{}", serde_json::to_string_pretty(&round12(v)).expect("json"));
    Ok(())
}

fn orbit_chart(o: &Orbit) -> String {
    let pts = o.times().zip(o.states()).map(|(t, s)| (t, s.v)).collect();
    let title = match o.kind {
        OrbitKind::Constant => "constant orbit".to_string(),
        OrbitKind::Periodic => format!("periodic orbit, a = {}", o.a),
        OrbitKind::Homoclinic => "homoclinic orbit".to_string(),
    };
    line_chart(&title, "t", "v", &[Series::line("v", pts)])
}

fn cmd_orbit(cli: &Cli, a: f64) -> CliResult<()> {
    let p = problem(cli)?;
    let a0 = p.consts.a0;
    let mut orbit = if (a - a0).abs() <= 1e-12 * a0 {
        constant_orbit(&p)
    } else if a > 0.0 && a < a0 {
        find_periodic_with(&p, a, &periodic_options(cli))?
    } else {
        return Err(Failure::Config(format!("--a must lie in (0, a0] with a0 = {a0}, got {a}")));
    };
    let report = verify_orbit(&p, &orbit)?;
    for c in report.failures() {
        eprintln!("warning: invariant {} failed ({:e} vs limit {:e})", c.name, c.value, c.limit);
    }
    orbit.diagnostics.verify = Some(report);
    emit_json(cli, &to_json(&orbit))?;
    if let Some(path) = &cli.out_csv {
        write_file(path, &orbit.to_csv(&p))?;
    }
    if let Some(path) = &cli.out_svg {
        write_file(path, &orbit_chart(&orbit))?;
    }
    Ok(())
}

/// `steps` geometric values from `a_min` to `a_max`.
fn geometric(a_min: f64, a_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a_min],
        _ => (0..steps).map(|k| a_min * (a_max / a_min).powf(k as f64 / (steps - 1) as f64)).collect(),
    }
}

fn cmd_sweep(cli: &Cli, a_min: f64, a_max: f64, steps: usize) -> CliResult<()> {
    let p = problem(cli)?;
    if !(a_min > 0.0 && a_max >= a_min && a_max.is_finite()) {
        return Err(Failure::Config(format!("need 0 < a_min <= a_max, got [{a_min}, {a_max}]")));
    }
    let sweep = sweep_periods_with(&p, &geometric(a_min, a_max, steps), &periodic_options(cli));
    let csv = sweep.to_csv();
    match &cli.out_csv {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &cli.out_json {
        write_file(path, &to_json(&sweep))?;
    }
    if let Some(path) = &cli.out_svg {
        let pts = sweep.rows.iter().filter_map(|r| r.period.map(|l| (r.a, l))).collect();
        write_file(path, &line_chart("period against minimum", "a", "L", &[Series::line("L", pts)]))?;
    }
    let failed = sweep.failures();
    if failed > 0 {
        eprintln!("warning: {failed} of {} rows failed", sweep.rows.len());
        for r in sweep.rows.iter().filter(|r| r.error.is_some()) {
            eprintln!("  a = {}: {}", r.a, r.error.as_deref().unwrap_or(""));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct HomoclinicReport {
    method: &'static str,
    v_max: f64,
    decay_slope: Option<f64>,
    expected_slope: f64,
    decay_limit: f64,
    greens_residual: f64,
    energy: f64,
    verify_passed: bool,
    failed_checks: Vec<Check>,
}

fn cmd_homoclinic(cli: &Cli, method: Method, epsilon: f64, a_min_frac: f64, steps: usize) -> CliResult<()> {
    let p = problem(cli)?;
    let mut orbit = match method {
        Method::Tail => {
            if !(epsilon > 0.0) {
                return Err(Failure::Config(format!("--epsilon must be positive, got {epsilon}")));
            }
            homoclinic_by_tail_shooting(&p, epsilon)?
        }
        Method::Continuation => {
            if !(a_min_frac > 0.0 && a_min_frac < 0.5) {
                return Err(Failure::Config(format!("--a-min-frac must lie in (0, 0.5), got {a_min_frac}")));
            }
            homoclinic_by_continuation(&p, &continuation_sequence(&p, a_min_frac, steps))?
        }
    };
    let samples = orbit.uniform_samples()?;
    let verify = verify_orbit(&p, &orbit)?;
    let report = HomoclinicReport {
        method: match method {
            Method::Tail => "tail",
            Method::Continuation => "continuation",
        },
        v_max: orbit.v_max,
        decay_slope: decay_slope(&orbit),
        expected_slope: -p.consts.slow_rate(),
        decay_limit: p.decay_limit(&samples)?,
        greens_residual: p.greens_fixed_point_residual(&samples)?,
        energy: orbit.energy,
        verify_passed: verify.passed,
        failed_checks: verify.failures().cloned().collect(),
    };
    orbit.diagnostics.verify = Some(verify);
    println!("{}", to_json(&report));
    if let Some(path) = &cli.out_json {
        write_file(path, &to_json(&orbit))?;
    }
    if let Some(path) = &cli.out_csv {
        write_file(path, &orbit.to_csv(&p))?;
    }
    if let Some(path) = &cli.out_svg {
        write_file(path, &tail_chart(&p, &orbit, report.decay_limit))?;
    }
    Ok(())
}

/// `ln v` for `t >= 0` against the line `ln(limit) - sqrt(mu) t`.
fn tail_chart(p: &Problem, o: &Orbit, limit: f64) -> String {
    let rate = p.consts.slow_rate();
    let data: Vec<(f64, f64)> =
        o.times().zip(o.states()).filter(|(t, s)| *t >= 0.0 && s.v > 0.0).map(|(t, s)| (t, s.v.ln())).collect();
    let fit = data.iter().map(|&(t, _)| (t, limit.ln() - rate * t)).collect();
    line_chart("homoclinic tail", "t", "ln v", &[Series::line("ln v", data), Series::dashed("ln L - sqrt(mu) t", fit)])
}

/// Grid wide enough for the asymptotic windows to hold a full period.
fn asymptotic_grid(orbit: &Orbit) -> (f64, usize) {
    let decades = 3.0 * std::f64::consts::LN_10;
    let l = orbit.period.filter(|l| *l > 0.0 && orbit.kind == OrbitKind::Periodic).unwrap_or(0.0);
    let half = decades.max(1.6 * l);
    let dt = if l > 0.0 { (l / 400.0).min(0.005) } else { 0.005 };
    (half, (2.0 * half / dt).ceil() as usize + 1)
}

fn cmd_verify(path: &Path) -> CliResult<()> {
    let (orbit, p) = read_orbit(path)?;
    let mut report = verify_orbit(&p, &orbit)?;
    let prof = to_radial(&p, &orbit, 0.1, 10.0, 2000)?;
    let res = pde_residual(&prof, &p)?;
    report.checks.push(check_at_most("pde_residual", res.residual, 1e-5));
    report.checks.push(check_above("pde_convergence_factor", res.convergence_factor.unwrap_or(0.0), 8.0));
    if orbit.kind != OrbitKind::Constant {
        let (half, points) = asymptotic_grid(&orbit);
        let wide = to_radial(&p, &orbit, (-half).exp(), half.exp(), points)?;
        let asym = asymptotics_report(&wide, &p)?;
        report.checks.push(check_at_most("asymptotics_mismatch", asym.mismatch, 1e-4));
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    println!("{}", to_json(&report));
    if report.passed {
        Ok(())
    } else {
        for c in report.failures() {
            eprintln!("FAIL {}: {:e} (limit {:e})", c.name, c.value, c.limit);
        }
        Err(Failure::Verify)
    }
}

fn check_at_most(name: &str, value: f64, limit: f64) -> Check {
    Check { name: name.into(), value, limit, passed: value <= limit }
}

fn check_above(name: &str, value: f64, limit: f64) -> Check {
    Check { name: name.into(), value, limit, passed: value > limit }
}

fn cmd_radial(cli: &Cli, path: &Path, r_min: f64, r_max: f64, points: usize) -> CliResult<()> {
    let (orbit, p) = read_orbit(path)?;
    let mut prof = to_radial(&p, &orbit, r_min, r_max, points)?;
    let res = pde_residual(&prof, &p)?;
    if let Some(w) = &res.warning {
        eprintln!("warning: {w}");
    }
    prof.residual = Some(res.pointwise.clone());
    let asym = asymptotics_report(&prof, &p);
    let mut out = serde_json::to_value(&res).expect("residual");
    match asym {
        Ok(a) => out["asymptotics"] = serde_json::to_value(a).expect("report"),
        Err(e) => out["asymptotics_error"] = json!(e.to_string()),
    }
    println!("{}", serde_json::to_string_pretty(&round12(out)).expect("json"));
    if let Some(path) = &cli.out_csv {
        write_file(path, &prof.to_csv())?;
    }
    if let Some(path) = &cli.out_svg {
        let k = p.consts.half_gap();
        let pts = prof.r_grid.iter().zip(prof.scaled(k)).map(|(r, v)| (r.ln(), v)).collect();
        write_file(path, &line_chart("radial profile", "ln r", "r^((n-4)/2) u", &[Series::line("v(ln r)", pts)]))?;
    }
    Ok(())
}
