//! `wulff`: build Wulff shapes, run verification suites and the stability
//! pipeline from a JSON config.
//!
//! Exit codes: 0 pass, 1 numerical failure or route disagreement, 2 invalid
//! input, 3 positivity or constancy hypothesis violated.

mod config;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wulff_core::anisotropy::{AnisotropyKind, ConvexityReport};
use wulff_core::export::{to_csv, to_off};
use wulff_core::functionals::CurvatureField;
use wulff_core::geometry::SurfaceSpec;
use wulff_core::parallel::with_workers;
use wulff_core::stability::{theorem_pipeline, StabilityProblem, StabilityReport, Verdict};

use config::{ConfigError, Overrides, RunConfig};
use suites::SuiteResult;

#[derive(Parser)]
#[command(name = "wulff", version, about = "Anisotropic curvature identities and Wulff-shape stability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the Wulff shape of the configured anisotropy (CSV, OFF for n = 2).
    Wulffgen(Common),
    /// Run verification suites at two resolutions.
    Verify(VerifyArgs),
    /// Test function, three second-variation routes and a verdict.
    Stability(Common),
    /// Summarize JSON reports written by the other subcommands.
    Report(ReportArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nodes per polar angle (even, at least 16).
    #[arg(long)]
    resolution: Option<usize>,
    /// Output directory for CSV/OFF/JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiplies every tolerance.
    #[arg(long = "tol-scale")]
    tol_scale: Option<f64>,
    /// Hypersurface dimension.
    #[arg(long)]
    n: Option<usize>,
    /// sphere, ellipsoid, wulff or torus.
    #[arg(long)]
    surface: Option<String>,
    /// isotropic, quadric (diag(4,1,...)) or pnorm (p = 4).
    #[arg(long)]
    model: Option<String>,
    /// Lowest order in the weighted functional.
    #[arg(long)]
    r: Option<usize>,
    /// Highest order, at most n - 2.
    #[arg(long)]
    s: Option<usize>,
    /// Comma separated weights a_r..a_s.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    /// Seed for test functions and samples.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Repeatable: traces, maclaurin, discriminant, minkowski, first-variation,
    /// volume, closed-form, symmetry.
    #[arg(long)]
    suite: Vec<String>,
    /// Random samples for the algebra suites.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files; defaults to every `*.json` in `--out`.
    paths: Vec<PathBuf>,
    /// Directory scanned when no paths are given.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] wulff_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("convexity scan failed: min eigenvalue {min:e} at {argmin:?}")]
    NonConvex { min: f64, argmin: Vec<f64> },
}

impl Failure {
    fn code(&self) -> u8 {
        use wulff_core::Error as E;
        match self {
            Failure::Core(E::PositivityHypothesis(_) | E::NotMeanZero(_)) => 3,
            Failure::Core(E::Conditioning(_) | E::InternalConsistency(_)) => 1,
            Failure::Config(ConfigError::Core(E::PositivityHypothesis(_) | E::NotMeanZero(_))) => 3,
            Failure::Config(ConfigError::Core(E::Conditioning(_) | E::InternalConsistency(_))) => 1,
            Failure::Write { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: String,
    resolution: usize,
    passed: bool,
    config: &'a RunConfig,
    result: T,
}

fn envelope<'a, T: Serialize>(command: &'static str, cfg: &'a RunConfig, passed: bool, result: T) -> Envelope<'a, T> {
    Envelope {
        tool: "wulff",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash: cfg.hash(),
        resolution: cfg.resolution,
        passed,
        config: cfg,
        result,
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|source| Failure::Write { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| Failure::Write { path, source })
}

/// Prints the report and writes it to `--out` when given.
fn emit<T: Serialize>(cfg: &RunConfig, name: &str, env: &Envelope<T>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(env).expect("report serializes") + "\n";
    if let Some(dir) = &cfg.output.dir {
        write_file(dir, name, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        resolution: c.resolution,
        out: c.out.clone(),
        workers: c.workers,
        tol_scale: c.tol_scale,
        n: c.n,
        surface: c.surface.clone(),
        model: c.model.clone(),
        r: c.r,
        s: c.s,
        a: c.a.clone(),
        seed: c.seed,
        ..Default::default()
    }
}

fn prepare(common: &Common, extra: impl FnOnce(&mut Overrides)) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    let mut o = overrides(common);
    extra(&mut o);
    cfg.apply(&o)?;
    cfg.validate()?;
    Ok(cfg)
}

fn in_pool<R: Send>(cfg: &RunConfig, op: impl FnOnce() -> R + Send) -> R {
    match cfg.workers {
        Some(w) => with_workers(w, op),
        None => op(),
    }
}

#[derive(Serialize)]
struct WulffGen {
    convexity: ConvexityReport,
    nodes: usize,
    area: f64,
    enclosed_volume: f64,
    /// `max |zᵀQ⁻¹z - 1|` over the samples, quadric models only.
    membership_residual: Option<f64>,
    sf_umbilic_deviation: f64,
    files: Vec<String>,
}

fn cmd_wulffgen(cfg: &RunConfig) -> Result<u8, Failure> {
    let model = cfg.model()?;
    let scan = model.convexity_scan(64)?;
    eprintln!("convexity scan: min eigenvalue {:e} over {} samples", scan.min_eigenvalue, scan.samples);
    if !scan.accepted {
        return Err(Failure::NonConvex { min: scan.min_eigenvalue, argmin: scan.argmin });
    }
    let spec = SurfaceSpec::Wulff { anisotropy: cfg.anisotropy.clone(), scale: 1.0 };
    let imm = in_pool(cfg, || {
        wulff_core::geometry::SampledImmersion::from_spec(&spec, cfg.n, wulff_core::geometry::BuildOptions::new(cfg.resolution))
    })?;
    let field = in_pool(cfg, || CurvatureField::compute(&imm, &model))?;
    let membership_residual = match model.kind() {
        AnisotropyKind::Quadric(q) => {
            let inv = q.clone().try_inverse().expect("SPD quadric inverts");
            let worst = imm.nodes().iter().fold(0.0f64, |w, g| w.max((g.position.dot(&(&inv * &g.position)) - 1.0).abs()));
            eprintln!("membership residual zᵀQ⁻¹z - 1: {worst:e}");
            Some(worst)
        }
        _ => None,
    };
    let mut files = Vec::new();
    if let Some(dir) = &cfg.output.dir {
        let h1 = field.h(1);
        write_file(dir, "wulff.csv", &to_csv(&imm, &[("f_nu", &field.f_nu), ("h1", &h1)])?)?;
        files.push("wulff.csv".to_string());
        if cfg.n == 2 {
            write_file(dir, "wulff.off", &to_off(&imm)?)?;
            files.push("wulff.off".to_string());
        }
    }
    let result = WulffGen {
        convexity: scan,
        nodes: imm.len(),
        area: imm.area(),
        enclosed_volume: imm.enclosed_volume(),
        membership_residual,
        sf_umbilic_deviation: field.sf_deviation(1.0),
        files,
    };
    emit(cfg, "wulffgen.json", &envelope("wulffgen", cfg, true, result))?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig) -> Result<u8, Failure> {
    let names: Vec<String> = if cfg.suites.is_empty() { vec!["minkowski".into()] } else { cfg.suites.clone() };
    let mut results: Vec<SuiteResult> = Vec::new();
    for name in &names {
        let r = in_pool(cfg, || suites::run(name, cfg))?;
        eprintln!("{} {}", if r.passed { "pass" } else { "FAIL" }, r.suite);
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    emit(cfg, "verify.json", &envelope("verify", cfg, passed, &results))?;
    Ok(if passed { 0 } else { 1 })
}

fn stability_code(report: &StabilityReport) -> u8 {
    match report.verdict {
        Verdict::HypothesisViolated => 3,
        _ if !report.routes_agree => 1,
        _ => 0,
    }
}

fn cmd_stability(cfg: &RunConfig) -> Result<u8, Failure> {
    let model = cfg.model()?;
    let imm = in_pool(cfg, || cfg.build(cfg.resolution))?;
    let p = &cfg.problem;
    let problem = in_pool(cfg, || StabilityProblem::new(&imm, &model, p.r, p.s, &p.a))?;
    let report = in_pool(cfg, || theorem_pipeline(&problem, &cfg.tolerances()))?;
    let code = stability_code(&report);
    eprintln!("verdict {}, routes agree: {}", report.verdict, report.routes_agree);
    emit(cfg, "stability.json", &envelope("stability", cfg, code == 0, &report))?;
    Ok(code)
}

fn cmd_report(args: &ReportArgs) -> Result<u8, Failure> {
    let mut paths = args.paths.clone();
    if paths.is_empty() {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let entries = std::fs::read_dir(&dir).map_err(|source| ConfigError::Read { path: dir.clone(), source })?;
        paths = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
        paths.sort();
    }
    if paths.is_empty() {
        return Err(ConfigError::Invalid("no reports found".into()).into());
    }
    let mut all = true;
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(ConfigError::Parse)?;
        let field = |k: &str| v.get(k).cloned().unwrap_or(serde_json::Value::Null);
        let passed = field("passed").as_bool().ok_or_else(|| ConfigError::Invalid(format!("{} is not a wulff report", path.display())))?;
        all &= passed;
        let hash = field("config_hash").as_str().map(|h| h[..12.min(h.len())].to_string()).unwrap_or_default();
        let detail = match field("command").as_str() {
            Some("stability") => format!("verdict {}", v["result"]["verdict"]),
            Some("verify") => {
                let suites: Vec<String> = v["result"]
                    .as_array()
                    .map(|a| a.iter().map(|s| format!("{}={}", s["suite"].as_str().unwrap_or("?"), s["passed"])).collect())
                    .unwrap_or_default();
                suites.join(" ")
            }
            Some("wulffgen") => format!("nodes {}", v["result"]["nodes"]),
            _ => String::new(),
        };
        println!(
            "{} {} {} N={} config {hash} {detail}",
            if passed { "PASS" } else { "FAIL" },
            path.display(),
            field("command").as_str().unwrap_or("?"),
            field("resolution"),
        );
    }
    Ok(if all { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Wulffgen(c) => cmd_wulffgen(&prepare(&c, |_| {})?),
        Command::Stability(c) => cmd_stability(&prepare(&c, |_| {})?),
        Command::Verify(v) => {
            let cfg = prepare(&v.common, |o| {
                o.suites = v.suite.clone();
                o.samples = v.samples;
            })?;
            cmd_verify(&cfg)
        }
        Command::Report(r) => cmd_report(&r),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
