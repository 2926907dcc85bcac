mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgqp::fock::OracleConfig;
use lgqp::series::TruncationConfig;
use lgqp::verify::{self, Case};
use lgqp::{
    evaluate, scan_plane, Controls, Error, Estimate, MeasurementSpec, OffsetFunction, Route,
    Sign, StateSpec, UnitsConfig,
};
use serde_json::json;

/// Two-time Leggett-Garg quasi-probabilities of a harmonic oscillator.
#[derive(Parser)]
#[command(name = "lgqp", version, about)]
struct Cli {
    /// worker threads for scans and minimizations (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate q_{s1,s2}(t1, t2) at one point
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Tabulate q_{s1,s2}(t1, t2) against omega t2
    #[command(allow_negative_numbers = true)]
    Curve(CurveArgs),
    /// Grid scan of min over t2, driven by a TOML config
    Scan(ScanArgs),
    /// Run canned reproduction and consistency checks
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Projector {
    Sign,
    Window,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "1" | "+1" => Ok(Sign::Plus),
        "-1" => Ok(Sign::Minus),
        _ => Err(format!("expected 1 or -1, got {s:?}")),
    }
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Everything that fixes the state, projector and numerics of one evaluation.
/// Times are `omega t` with `omega = 1`.
#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value = "integral", value_parser = parse_route)]
    route: Route,
    #[arg(long, value_parser = parse_sign)]
    s1: Sign,
    #[arg(long, value_parser = parse_sign)]
    s2: Sign,
    #[arg(long, default_value_t = 0.0)]
    t1: f64,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.0)]
    p0: f64,
    /// squeezing magnitude
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// squeezing phase [rad]
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    /// k_B T / (hbar omega)
    #[arg(long, default_value_t = 0.0)]
    temp_ratio: f64,
    #[arg(long, value_enum, default_value = "sign")]
    projector: Projector,
    /// window half-width
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// cut offset: amplitude * cos(omega t - phase) + constant
    #[arg(long, default_value_t = 0.0)]
    offset_amp: f64,
    #[arg(long, default_value_t = 0.0)]
    offset_phase: f64,
    #[arg(long, default_value_t = 0.0)]
    offset_const: f64,
    /// series route: fixed plain partial sum to this order
    #[arg(long)]
    nmax: Option<usize>,
    /// integral route: starting Gauss-Legendre order
    #[arg(long)]
    quad_order: Option<usize>,
    /// oracle route: Fock basis dimension
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long)]
    t2: f64,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 0.0)]
    t2_min: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    t2_max: f64,
    #[arg(long, default_value_t = 0.05)]
    t2_step: f64,
}

#[derive(Args)]
struct ScanArgs {
    /// TOML scan configuration
    config: PathBuf,
    /// directory for `<stem>.csv` and `<stem>.json` (default: next to the config)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// check to run, or `all`
    #[arg(value_parser = parse_case)]
    case: Selection,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
}

#[derive(Clone, Copy)]
enum Selection {
    All,
    One(Case),
}

fn parse_case(s: &str) -> Result<Selection, String> {
    if s == "all" {
        return Ok(Selection::All);
    }
    s.parse().map(Selection::One).map_err(|e: Error| {
        let names: Vec<&str> = Case::ALL.iter().map(|c| c.name()).collect();
        format!("{e}; expected one of: all, {}", names.join(", "))
    })
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Domain(_) | Error::Unsupported(_) | Error::IndexCap { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

struct Point {
    route: Route,
    state: StateSpec,
    meas: MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    controls: Controls,
}

impl PointArgs {
    fn resolve(&self) -> Result<Point, Failure> {
        let n_th = lgqp::state::n_th_from_temp_ratio(self.temp_ratio)?;
        let state = StateSpec::from_x0p0(self.x0, self.p0, self.r, self.theta0, n_th)?;
        let has_offset = self.offset_amp != 0.0 || self.offset_const != 0.0;
        let meas = match (self.projector, self.half_width) {
            (Projector::Sign, None) => MeasurementSpec::Sign {
                offset: OffsetFunction::new(self.offset_amp, self.offset_phase, self.offset_const)?,
            },
            (Projector::Sign, Some(_)) => {
                return Err(Failure::usage("--L only applies to --projector window"))
            }
            (Projector::Window, Some(_)) if has_offset => {
                return Err(Failure::usage("offsets only apply to --projector sign"))
            }
            (Projector::Window, Some(l)) => MeasurementSpec::window(l)?,
            (Projector::Window, None) => {
                return Err(Failure::usage("--projector window needs --L"))
            }
        };
        if !self.route.supports(&state, &meas) {
            return Err(Failure::usage(format!(
                "route {} cannot evaluate this state and projector",
                self.route
            )));
        }
        let mut controls = Controls::default();
        let only = |flag: &str, route: Route| {
            Failure::usage(format!("{flag} only applies to --route {route}"))
        };
        if let Some(n) = self.nmax {
            if self.route != Route::Series {
                return Err(only("--nmax", Route::Series));
            }
            controls.truncation = TruncationConfig::sharp(n);
        }
        if let Some(order) = self.quad_order {
            if self.route != Route::Integral {
                return Err(only("--quad-order", Route::Integral));
            }
            controls.integral.quad_order = order;
            controls.integral.max_order = controls.integral.max_order.max(order);
        }
        if let Some(dim) = self.dim {
            if self.route != Route::Oracle {
                return Err(only("--dim", Route::Oracle));
            }
            controls.oracle = OracleConfig::with_dim(dim);
        }
        Ok(Point {
            route: self.route,
            state,
            meas,
            s1: self.s1,
            s2: self.s2,
            t1: self.t1,
            controls,
        })
    }
}

impl Point {
    fn at(&self, t2: f64) -> lgqp::Result<Estimate> {
        evaluate(
            self.route,
            &self.state,
            &self.meas,
            self.s1,
            self.s2,
            self.t1,
            t2,
            UnitsConfig::default(),
            &self.controls,
        )
    }
}

fn cmd_eval(args: &EvalArgs) -> CmdResult {
    let point = args.point.resolve()?;
    let est = point.at(args.t2)?;
    match args.out {
        OutFormat::Text => {
            println!("q = {:.17e}", est.value);
            println!("error = {:.3e}", est.error);
            println!("converged = {}", est.converged);
            println!("route = {}", point.route);
        }
        OutFormat::Json => {
            let doc = json!({
                "route": point.route,
                "s1": point.s1,
                "s2": point.s2,
                "t1": point.t1,
                "t2": args.t2,
                "state": point.state,
                "measurement": point.meas,
                "q": est.value,
                "error": est.error,
                "converged": est.converged,
                "work": est.work,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }
    Ok(0)
}

fn cmd_curve(args: &CurveArgs) -> CmdResult {
    if !(args.t2_step > 0.0 && args.t2_max >= args.t2_min) {
        return Err(Failure::usage("need --t2-step > 0 and --t2-max >= --t2-min"));
    }
    let point = args.point.resolve()?;
    let steps = ((args.t2_max - args.t2_min) / args.t2_step + 1e-9).floor() as usize;
    println!("wt2,q");
    for k in 0..=steps {
        let t2 = args.t2_min + args.t2_step * k as f64;
        let q = match point.at(t2) {
            Ok(e) => format!("{:.16e}", e.value),
            Err(_) => "nan".into(),
        };
        println!("{:.16e},{q}", t2);
    }
    Ok(0)
}

fn output_paths(config: &Path, out_dir: Option<&Path>) -> (PathBuf, PathBuf) {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scan".into());
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.json")))
}

fn cmd_scan(args: &ScanArgs, threads: Option<usize>) -> CmdResult {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Failure::usage(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let config = config::parse(&text).map_err(|e| {
        Failure::usage(format!("{}: {e}", args.config.display()))
    })?;
    config
        .validate()
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    let start = Instant::now();
    let result = scan_plane(&config)?;
    let seconds = start.elapsed().as_secs_f64();
    let csv = result.to_csv();
    let manifest = manifest::Manifest::new(&config, &text, &csv, &result, threads, seconds);
    let json = manifest::json_twin(&manifest, &result);
    let (csv_path, json_path) = output_paths(&args.config, args.out_dir.as_deref());
    let write = |path: &Path, body: &str| {
        std::fs::write(path, body)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
    };
    write(&csv_path, &csv)?;
    write(&json_path, &json)?;
    eprintln!(
        "{} cells ({} failed) in {:.2} s -> {}",
        result.cells.len(),
        result.failed,
        seconds,
        csv_path.display()
    );
    if let Some(g) = &result.global {
        eprintln!(
            "global min q = {:.6e} at ({}, {}), wt2 = {:.4}",
            g.q_min, g.axis1, g.axis2, g.t2_argmin
        );
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let cases: Vec<Case> = match args.case {
        Selection::One(c) => vec![c],
        Selection::All => Case::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    for case in cases {
        let report = verify::run(case)?;
        if args.out == OutFormat::Text {
            println!("{case}: {}", case.describe());
            for check in &report.checks {
                println!("  {check}");
            }
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            println!("{verdict} {case} ({:.2} s)", report.seconds);
        }
        reports.push(report);
    }
    if args.out == OutFormat::Json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("serializable"));
    }
    Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Scan(a) => cmd_scan(a, cli.threads),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
