use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wormszego::experiments::{
    decay_experiment, decay_grid, default_log_r, isometry_check, lp_sweep, sobolev_lp_sweep, sobolev_sweep,
    verify_kernels, DecayConfig, SweepReport, Thresholds, SCHEMA,
};
use wormszego::szego::apply_szego;
use wormszego::{LogGrid, WormParams};

mod fieldio;
mod selftest;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "wormszego", version, about = "Szegő projection on the model worm boundary")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Worm parameter, > π.
    #[arg(long, default_value_t = 2.0 * PI)]
    beta: f64,
    /// Report path; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Overrides for the command's default grid.
#[derive(Args, Clone, Default)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
}

impl GridArgs {
    fn resolve(&self, base: LogGrid) -> Result<LogGrid, String> {
        LogGrid::new(
            self.x_min.unwrap_or(base.x_min),
            self.x_max.unwrap_or(base.x_max),
            self.n.unwrap_or(base.n),
            self.m.unwrap_or(base.m),
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply the Szegő projection to a field file.
    Project {
        /// Defaults to the beta in the input sidecar.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Report path; stdout if absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decay of the projected counterexample at 0 and ∞, with the oracle comparison.
    Decay {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.02)]
        slope_tol: f64,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Truncated L^p norms of the projected counterexample.
    SweepLp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_number, default_values = ["1.2", "2", "4"])]
        p: Vec<f64>,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long, default_value_t = 0.05)]
        exponent_tol: f64,
    },
    /// Truncated W^{s,2} seminorms.
    SweepSobolev {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_number, default_values = ["0.05", "0.1", "1/6", "0.25"])]
        s: Vec<f64>,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long, default_value_t = 0.05)]
        exponent_tol: f64,
    },
    /// Truncated W^{s,p} seminorms for s:p pairs.
    SweepSobolevLp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_pair, default_value = "0.1:2,0.1:4,0.05:1.5")]
        pairs: Vec<(f64, f64)>,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long, default_value_t = 0.05)]
        exponent_tol: f64,
    },
    /// Closed-form Fourier pairs and the principal-value tanh transform.
    VerifyKernels {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        pv_tol: f64,
    },
    /// Norm preservation of Λ between the line and the worm boundary.
    Isometry {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', value_parser = parse_number, default_values = ["1.5", "2", "3"])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Invariant suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct LadderArgs {
    /// Truncation radii R.
    #[arg(long = "R", value_delimiter = ',', value_parser = parse_number, conflicts_with = "log_r")]
    r: Vec<f64>,
    /// Truncation levels as log R (default 16,18,…,32).
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    log_r: Vec<f64>,
}

impl LadderArgs {
    fn resolve(&self) -> Result<Vec<f64>, String> {
        if !self.r.is_empty() {
            if let Some(r) = self.r.iter().find(|r| !(**r > 1.0)) {
                return Err(format!("R = {r} must exceed 1"));
            }
            return Ok(self.r.iter().map(|r| r.ln()).collect());
        }
        if !self.log_r.is_empty() {
            return Ok(self.log_r.clone());
        }
        Ok(default_log_r())
    }
}

/// A finite real, or a fraction `a/b`.
fn parse_number(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if !v.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected s:p, got {s:?}"))?;
    Ok((parse_number(a)?, parse_number(b)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<String>,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured: Some(measured), tolerance: Some(tolerance), expected: None, observed: None, pass: measured <= tolerance }
    }

    pub fn label(name: impl Into<String>, expected: String, observed: String) -> Self {
        let pass = expected == observed;
        Self { name: name.into(), measured: None, tolerance: None, expected: Some(expected), observed: Some(observed), pass }
    }
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema: u32,
    command: &'static str,
    beta: f64,
    nu: f64,
    thresholds: Thresholds,
    rescale_ln: f64,
    grid: Option<LogGrid>,
    verdicts: Vec<Check>,
    failures: Vec<String>,
    pass: bool,
    report: T,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<wormszego::Error> for Failure {
    fn from(e: wormszego::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

fn usage<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn params(beta: f64) -> Result<WormParams, Failure> {
    WormParams::new(beta).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit<T: Serialize>(
    command: &'static str,
    p: &WormParams,
    grid: Option<LogGrid>,
    verdicts: Vec<Check>,
    report: T,
    out: Option<&Path>,
) -> Result<bool, Failure> {
    let failures: Vec<String> = verdicts.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    let pass = failures.is_empty();
    let env = Envelope {
        schema: SCHEMA,
        command,
        beta: p.beta,
        nu: p.nu,
        thresholds: Thresholds { lp_lower: p.lp_lower, lp_upper: p.lp_upper, sobolev_l2_sup: p.sobolev_l2_sup },
        rescale_ln: wormszego::experiments::rescale_ln(p),
        grid,
        verdicts,
        failures: failures.clone(),
        pass,
        report,
    };
    let text = serde_json::to_string_pretty(&env).map_err(|e| Failure::Numeric(e.to_string()))?;
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            writeln!(w, "{text}").map_err(|e| Failure::Numeric(e.to_string()))?;
        }
        None => println!("{text}"),
    }
    if !pass {
        eprintln!("{}", serde_json::json!({ "failures": failures }));
    }
    Ok(pass)
}

fn sweep_checks(r: &SweepReport, exponent_tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for pt in &r.points {
        let tag = match pt.s {
            Some(s) => format!("s={s},p={}", pt.p),
            None => format!("p={}", pt.p),
        };
        out.push(Check::label(
            format!("verdict {tag}"),
            verdict_name(pt.predicted_verdict),
            verdict_name(pt.growth.verdict),
        ));
        if let Some(e) = pt.exponent_error {
            out.push(Check::below(format!("growth exponent {tag}"), e, exponent_tol));
        }
        if let Some(c) = pt.r_doubling_change {
            out.push(Check::below(format!("R doubling {tag}"), c, 0.01));
        }
    }
    out
}

fn verdict_name(v: wormszego::norms::Verdict) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Project { beta, input, output, report } => {
            let side = usage(fieldio::read_sidecar(&input))?;
            let p = params(beta.unwrap_or(side.beta))?;
            let grid = usage(side.grid())?;
            let f = usage(fieldio::read_field(&input, grid))?;
            let pf = apply_szego(&f, &p)?;
            let finite = pf.sheets.iter().flatten().all(|v| v.is_finite());
            usage(fieldio::write_field(&output, &pf, p.beta))?;
            let checks = vec![Check {
                name: "finite output".into(),
                measured: Some(pf.max_abs()),
                tolerance: None,
                expected: None,
                observed: None,
                pass: finite,
            }];
            let summary = serde_json::json!({
                "input": input.display().to_string(),
                "output": output.display().to_string(),
                "input_max_abs": f.max_abs(),
                "output_max_abs": pf.max_abs(),
            });
            emit("project", &p, Some(grid), checks, summary, report.as_deref())
        }
        Cmd::Decay { common, grid, slope_tol, no_oracle } => {
            let p = params(common.beta)?;
            let grid = usage(grid.resolve(decay_grid()))?;
            let config = DecayConfig { slope_tolerance: slope_tol, with_oracle: !no_oracle, ..DecayConfig::default() };
            let r = decay_experiment(&p, grid, &config)?;
            let mut checks = vec![
                Check::below("slope at infinity", r.infinity.deviation.abs(), slope_tol),
                Check::below("slope at zero", r.zero.deviation.abs(), slope_tol),
            ];
            if let Some(o) = &r.oracle {
                checks.push(Check::below("shifted-symbol oracle", o.exact_max_rel_dev, o.exact_tolerance));
                checks.push(Check::below("oracle slope at infinity", o.slope_diff_infinity, slope_tol));
                checks.push(Check::below("oracle slope at zero", o.slope_diff_zero, slope_tol));
            }
            emit("decay", &p, Some(grid), checks, r, common.output.as_deref())
        }
        Cmd::SweepLp { common, grid, p: ps, ladder, exponent_tol } => {
            let p = params(common.beta)?;
            let grid = usage(grid.resolve(decay_grid()))?;
            if let Some(bad) = ps.iter().find(|v| **v < 1.0) {
                return Err(Failure::Usage(format!("p = {bad} must be at least 1")));
            }
            let log_r = usage(ladder.resolve())?;
            let r = lp_sweep(&p, grid, &ps, &log_r)?;
            emit("sweep-lp", &p, Some(grid), sweep_checks(&r, exponent_tol), r, common.output.as_deref())
        }
        Cmd::SweepSobolev { common, grid, s, ladder, exponent_tol } => {
            let p = params(common.beta)?;
            let grid = usage(grid.resolve(decay_grid()))?;
            check_s(&s)?;
            let log_r = usage(ladder.resolve())?;
            let r = sobolev_sweep(&p, grid, &s, &log_r)?;
            emit("sweep-sobolev", &p, Some(grid), sweep_checks(&r, exponent_tol), r, common.output.as_deref())
        }
        Cmd::SweepSobolevLp { common, grid, pairs, ladder, exponent_tol } => {
            let p = params(common.beta)?;
            let grid = usage(grid.resolve(decay_grid()))?;
            check_s(&pairs.iter().map(|v| v.0).collect::<Vec<_>>())?;
            if let Some(bad) = pairs.iter().find(|v| v.1 < 1.0) {
                return Err(Failure::Usage(format!("p = {} must be at least 1", bad.1)));
            }
            let log_r = usage(ladder.resolve())?;
            let r = sobolev_lp_sweep(&p, grid, &pairs, &log_r)?;
            emit("sweep-sobolev-lp", &p, Some(grid), sweep_checks(&r, exponent_tol), r, common.output.as_deref())
        }
        Cmd::VerifyKernels { common, tol, pv_tol } => {
            let p = params(common.beta)?;
            let r = verify_kernels(&p)?;
            let mut checks: Vec<Check> =
                r.pairs.iter().map(|k| Check::below(format!("pair {}", k.name), k.max_abs_error, tol)).collect();
            checks.push(Check::below("pv tanh transform", r.pv.max_error, pv_tol));
            emit("verify-kernels", &p, None, checks, r, common.output.as_deref())
        }
        Cmd::Isometry { common, p: ps, tol } => {
            let p = params(common.beta)?;
            if let Some(bad) = ps.iter().find(|v| **v < 1.0) {
                return Err(Failure::Usage(format!("p = {bad} must be at least 1")));
            }
            let r = isometry_check(&p, &ps)?;
            let checks =
                r.rows.iter().map(|row| Check::below(format!("p={} {}", row.p, row.field), row.rel_error, tol)).collect();
            emit("isometry", &p, Some(r.grid), checks, r, common.output.as_deref())
        }
        Cmd::Selftest { common } => {
            let p = params(common.beta)?;
            let checks = selftest::run(&p)?;
            emit("selftest", &p, None, checks, (), common.output.as_deref())
        }
    }
}

fn check_s(s: &[f64]) -> Result<(), Failure> {
    match s.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        Some(bad) => Err(Failure::Usage(format!("s = {bad} must lie in (0, 1)"))),
        None => Ok(()),
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WORMSZEGO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("WORMSZEGO_THREADS = {v:?} is not a count"))?;
    if n == 0 {
        return Err("WORMSZEGO_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERIC),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(io::stderr(), "{}", serde_json::json!({ "failures": [{ "error": msg }] }));
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
