//! Command-line front end: argument parsing, the problem registry and
//! versioned JSON reports.
//!
//! Exit codes: 0 verified, 2 failed, violated, rejected or inconclusive,
//! 1 usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{hexf, parse_crat, parse_rat, CRat};
use crate::certify::{self, Bounds, Certificate, CertifyError, CertifyOptions, Problem};
use crate::fuchsian::{fmt_bi, registry, ParamODE};
use crate::recurrence::{coefficients, derive_recurrence, Mode, Values};
use crate::shooting::{eigen_scan, Rect, ScanOptions, ScanResult};
use crate::shooting::{Settings, Shooter};
use crate::simcoords::{propagator_check, PropagatorReport, SuiteOptions};
use crate::transform::{verify_chain_from, ChainReport, ChainScript};

/// Relative output paths resolve against this directory when it is set.
pub const ARTIFACT_DIR_ENV: &str = "MODESTAB_ARTIFACT_DIR";

pub const CERTIFY_SCHEMA: &str = "modestab.certify/1";
pub const RECHECK_SCHEMA: &str = "modestab.recheck/1";
pub const SCAN_SCHEMA: &str = "modestab.scan/1";
pub const SERIES_SCHEMA: &str = "modestab.series/1";
pub const CHAIN_SCHEMA: &str = "modestab.chain/1";
pub const PROPAGATOR_SCHEMA: &str = "modestab.propagator/1";

/// Everything a named problem needs across subcommands.
#[derive(Clone, Debug)]
pub struct ProblemEntry {
    pub problem: Problem,
    pub bounds: Bounds,
    pub scan_rect: Rect,
    pub scan: ScanOptions,
    pub shooting: Settings,
    /// Equation the shooting scan runs on.
    pub spectral: &'static str,
}

pub fn registry_entries() -> Vec<ProblemEntry> {
    certify::PROBLEMS.iter().filter_map(|n| lookup(n)).collect()
}

pub fn lookup(name: &str) -> Option<ProblemEntry> {
    let problem = certify::problem(name)?;
    Some(ProblemEntry {
        problem,
        bounds: Bounds::default(),
        scan_rect: Rect::new(-0.125, 2.5, -10.0, 10.0),
        scan: ScanOptions::default(),
        shooting: Settings::default(),
        spectral: "spec",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Inconclusive,
    Rejected,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Envelope of every machine artifact. Everything but `timing` is
/// reproducible byte for byte; no randomness is involved anywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<P> {
    pub command: Vec<String>,
    pub schema: String,
    pub status: Status,
    pub payload: P,
    pub timing: Timing,
}

#[derive(Parser, Debug)]
#[command(name = "modestab", version, about = "Mode stability certification for corotational wave maps blowup")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full certification pipeline
    Certify {
        #[arg(long, default_value = "wavemaps-corotational")]
        problem: String,
        /// Also write the bare certificate here
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        m_delta: Option<String>,
        #[arg(long)]
        m_eps: Option<String>,
        #[arg(long)]
        m_c: Option<String>,
        /// Start of the compactified uniform range
        #[arg(long)]
        n0: Option<u64>,
    },
    /// Re-validate a certificate without searching
    Recheck { certificate: PathBuf },
    /// Argument-principle eigenvalue scan of the shooting mismatch
    Scan {
        #[arg(long, default_value = "wavemaps-corotational")]
        problem: String,
        /// re_min,re_max,im_min,im_max
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        rect: Option<Vec<f64>>,
        #[arg(long)]
        rho_m: Option<f64>,
        #[arg(long)]
        min_cell: Option<f64>,
    },
    /// Power series coefficients a_0 .. a_n of the Heun form
    Series {
        #[arg(long, default_value = "wavemaps-corotational")]
        problem: String,
        /// Gaussian rational, e.g. 0, -1/2 or 1+2i
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Verify the transformation chain as exact identities
    TransformChain {
        #[arg(long, default_value = "wavemaps-corotational")]
        problem: String,
        /// Chain script in JSON (default: the registered chain)
        #[arg(long)]
        script: Option<PathBuf>,
        /// Starting equation in JSON (default: the registered one)
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Propagator and similarity-coordinate inequality suite
    PropagatorCheck {
        /// CSV of the τ-sweeps
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        panels: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {detail}")]
    Input { path: String, detail: String },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input { .. } => "input",
            CliError::Certify(_) => "certify",
            CliError::Compute(_) => "compute",
        }
    }
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 1,
            CliError::Certify(CertifyError::UnknownProblem(_)) => 1,
            _ => 2,
        }
    }
    pub fn diagnostic(&self) -> Value {
        serde_json::json!({ "error": self.kind(), "message": self.to_string(), "exit": self.exit_code() })
    }
}

/// Artifact path after applying the artifact directory.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(ARTIFACT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf, CliError> {
    let p = resolve(path);
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input { path: dir.display().to_string(), detail: e.to_string() })?;
    }
    fs::write(&p, text).map_err(|e| CliError::Input { path: p.display().to_string(), detail: e.to_string() })?;
    Ok(p)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let p = resolve(path);
    let text = fs::read_to_string(&p).map_err(|e| CliError::Input { path: p.display().to_string(), detail: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input { path: p.display().to_string(), detail: e.to_string() })
}

fn entry(name: &str) -> Result<ProblemEntry, CliError> {
    lookup(name).ok_or_else(|| CliError::Usage(format!("unknown problem {name:?}; known: {}", certify::PROBLEMS.join(", "))))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

// ---------------------------------------------------------------------------
// Subcommands

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyPayload {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate_path: Option<String>,
    pub certificate: Certificate,
}

fn bounds_with(base: &Bounds, d: &Option<String>, e: &Option<String>, c: &Option<String>) -> Result<Bounds, CliError> {
    let pick = |s: &Option<String>, dflt| match s {
        Some(s) => parse_rat(s).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(dflt),
    };
    Ok(Bounds { delta: pick(d, base.delta.clone())?, eps: pick(e, base.eps.clone())?, c: pick(c, base.c.clone())? })
}

pub fn certify_cmd(problem: &str, bounds: Bounds, n0: Option<u64>, emit: Option<&Path>) -> Result<(Status, CertifyPayload), CliError> {
    let e = entry(problem)?;
    let opts = CertifyOptions { bounds, n0: n0.unwrap_or(CertifyOptions::default().n0), ..Default::default() };
    let cert = certify::certify_with(e.problem.name, &opts)?;
    let status = if cert.is_stable() {
        Status::Ok
    } else if cert.tasks.iter().any(|t| matches!(t.status, certify::AxisStatus::Inconclusive { .. })) {
        Status::Inconclusive
    } else {
        Status::Failed
    };
    let certificate_path = match emit {
        Some(p) => Some(write_text(p, &to_json(&cert))?.display().to_string()),
        None => None,
    };
    Ok((status, CertifyPayload { verdict: cert.verdict.to_string(), certificate_path, certificate: cert }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecheckPayload {
    pub path: String,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<certify::RecheckReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

/// Accepts either a bare certificate or a certify report wrapping one.
fn load_certificate(path: &Path) -> Result<Certificate, CliError> {
    let v: Value = read_json(path)?;
    let inner = match v.get("payload").and_then(|p| p.get("certificate")) {
        Some(c) => c.clone(),
        None => v,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Input { path: path.display().to_string(), detail: e.to_string() })
}

pub fn recheck_cmd(path: &Path) -> Result<(Status, RecheckPayload), CliError> {
    let shown = resolve(path).display().to_string();
    let cert = match load_certificate(path) {
        Ok(c) => c,
        // a file that no longer parses as a certificate is rejected, not a usage error
        Err(CliError::Input { detail, .. }) if resolve(path).exists() => {
            return Ok((Status::Rejected, RecheckPayload { path: shown, accepted: false, report: None, reason: Some(detail) }));
        }
        Err(e) => return Err(e),
    };
    match certify::recheck(&cert) {
        Ok(r) => {
            let status = if cert.is_stable() { Status::Ok } else { Status::Failed };
            Ok((status, RecheckPayload { path: shown, accepted: true, report: Some(r), reason: None }))
        }
        Err(e @ (CertifyError::Rejected(_) | CertifyError::Mismatch(_))) => {
            Ok((Status::Rejected, RecheckPayload { path: shown, accepted: false, report: None, reason: Some(e.to_string()) }))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPayload {
    pub problem: String,
    pub equation: String,
    pub settings: Settings,
    pub options: ScanOptions,
    pub result: ScanResult,
    /// Zeros with `Re λ ≥ 0` other than a simple zero at 1.
    pub unstable: Vec<Complex64>,
    /// Multiplicities of the located zeros add up to the winding number.
    pub accounted: bool,
}

pub fn scan_cmd(problem: &str, rect: Option<Rect>, rho_m: Option<f64>, min_cell: Option<f64>) -> Result<(Status, ScanPayload), CliError> {
    let e = entry(problem)?;
    let mut settings = e.shooting;
    if let Some(m) = rho_m {
        if !(0.0 < m && m < 1.0) {
            return Err(CliError::Usage(format!("--rho-m must lie in (0, 1), got {m}")));
        }
        settings.rho_m = m;
    }
    let mut options = e.scan;
    if let Some(c) = min_cell {
        options.min_cell = c;
    }
    let rect = rect.unwrap_or(e.scan_rect);
    let ode = registry::equation(e.spectral).ok_or_else(|| CliError::Compute(format!("equation {} not registered", e.spectral)))?;
    let shooter = Shooter::for_equation(ode, settings).map_err(|e| CliError::Compute(e.to_string()))?;
    let result = eigen_scan(&shooter, rect, &options).map_err(|e| CliError::Compute(e.to_string()))?;
    let unstable: Vec<Complex64> = result
        .zeros
        .iter()
        .filter(|z| z.lambda.re >= 0.0 && !((z.lambda - 1.0).norm() < 1e-6 && z.multiplicity == 1))
        .map(|z| z.lambda)
        .collect();
    let accounted = result.zeros.iter().map(|z| z.multiplicity).sum::<i64>() == result.winding;
    let status = if !accounted {
        Status::Inconclusive
    } else if unstable.is_empty() {
        Status::Ok
    } else {
        Status::Failed
    };
    Ok((status, ScanPayload { problem: problem.into(), equation: e.spectral.into(), settings, options, result, unstable, accounted }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatCoeff {
    #[serde(with = "hexf")]
    pub re: f64,
    #[serde(with = "hexf")]
    pub im: f64,
    /// Running a-priori rounding error bound.
    #[serde(with = "hexf")]
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "coefficients", rename_all = "lowercase")]
pub enum Coefficients {
    Exact(Vec<CRat>),
    Float(Vec<FloatCoeff>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPayload {
    pub problem: String,
    pub equation: String,
    pub lambda: CRat,
    pub a: String,
    pub b: String,
    pub start: i64,
    pub n: usize,
    #[serde(flatten)]
    pub coefficients: Coefficients,
}

pub fn series_cmd(problem: &str, lambda: &str, n: usize, mode: ModeArg) -> Result<(Status, SeriesPayload), CliError> {
    let e = entry(problem)?;
    let lam = parse_crat(lambda).map_err(|err| CliError::Usage(format!("--lambda: {err}")))?;
    let heun = registry::equation(e.problem.heun).ok_or_else(|| CliError::Compute(format!("equation {} not registered", e.problem.heun)))?;
    let rec = derive_recurrence(&heun).map_err(|e| CliError::Compute(e.to_string()))?;
    let m = match mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    };
    let vals = coefficients(&rec, &lam, n, m).map_err(|e| CliError::Compute(e.to_string()))?;
    let coefficients = match vals {
        Values::Exact(v) => Coefficients::Exact(v),
        Values::Float { values, errors } => {
            Coefficients::Float(values.iter().zip(errors).map(|(v, e)| FloatCoeff { re: v.re, im: v.im, error: e }).collect())
        }
    };
    Ok((
        Status::Ok,
        SeriesPayload { problem: problem.into(), equation: e.problem.heun.into(), lambda: lam, a: fmt_bi(&rec.a, "n"), b: fmt_bi(&rec.b, "n"), start: rec.start, n, coefficients },
    ))
}

pub fn chain_cmd(problem: &str, script: Option<&Path>, start: Option<&Path>) -> Result<(Status, ChainReport), CliError> {
    let e = entry(problem)?;
    let script: ChainScript = match script {
        Some(p) => read_json(p)?,
        None => e.problem.chain.clone(),
    };
    let ode: ParamODE = match start {
        Some(p) => read_json(p)?,
        None => registry::equation(&script.start).ok_or_else(|| CliError::Usage(format!("chain starts at unknown equation {:?}", script.start)))?,
    };
    let rep = verify_chain_from(&ode, &script).map_err(|e| CliError::Compute(e.to_string()))?;
    Ok((if rep.verified { Status::Ok } else { Status::Failed }, rep))
}

pub fn propagator_cmd(panels: Option<usize>, order: Option<usize>, csv: Option<&Path>) -> Result<(Status, PropagatorReport), CliError> {
    let mut opts = SuiteOptions::default();
    if let Some(p) = panels {
        opts.resolution.panels = p;
    }
    if let Some(o) = order {
        opts.resolution.order = o;
    }
    let rep = propagator_check(&opts).map_err(|e| CliError::Compute(e.to_string()))?;
    if let Some(p) = csv {
        write_text(p, &rep.sweep_csv())?;
    }
    Ok((if rep.all_ok { Status::Ok } else { Status::Failed }, rep))
}

// ---------------------------------------------------------------------------
// Driver

fn envelope<P: Serialize>(argv: &[String], schema: &str, started: Instant, r: Result<(Status, P), CliError>) -> Result<(Status, String), CliError> {
    let (status, payload) = r?;
    let rep = Report { command: argv.to_vec(), schema: schema.into(), status, payload, timing: Timing { seconds: started.elapsed().as_secs_f64() } };
    Ok((status, to_json(&rep)))
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<(Status, String), CliError> {
    let t = Instant::now();
    match &cli.command {
        Command::Certify { problem, emit, m_delta, m_eps, m_c, n0 } => {
            let b = bounds_with(&entry(problem)?.bounds, m_delta, m_eps, m_c)?;
            envelope(argv, CERTIFY_SCHEMA, t, certify_cmd(problem, b, *n0, emit.as_deref()))
        }
        Command::Recheck { certificate } => envelope(argv, RECHECK_SCHEMA, t, recheck_cmd(certificate)),
        Command::Scan { problem, rect, rho_m, min_cell } => {
            let rect = match rect.as_deref() {
                None => None,
                Some(&[a, b, c, d]) if a <= b && c <= d => Some(Rect::new(a, b, c, d)),
                Some(v) => return Err(CliError::Usage(format!("--rect expects re_min,re_max,im_min,im_max, got {v:?}"))),
            };
            envelope(argv, SCAN_SCHEMA, t, scan_cmd(problem, rect, *rho_m, *min_cell))
        }
        Command::Series { problem, lambda, n, mode } => envelope(argv, SERIES_SCHEMA, t, series_cmd(problem, lambda, *n, *mode)),
        Command::TransformChain { problem, script, start } => envelope(argv, CHAIN_SCHEMA, t, chain_cmd(problem, script.as_deref(), start.as_deref())),
        Command::PropagatorCheck { csv, panels, order } => envelope(argv, PROPAGATOR_SCHEMA, t, propagator_cmd(*panels, *order, csv.as_deref())),
    }
}

/// Parse, run and write the report. Returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv: Vec<String> = args.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let d = serde_json::json!({ "error": "usage", "kind": format!("{:?}", e.kind()), "message": e.to_string().trim_end(), "exit": 1 });
            eprintln!("{d}");
            return 1;
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("{}", CliError::Usage("--jobs must be positive".into()).diagnostic());
        return 1;
    }
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let work = || dispatch(&cli, &echo);
    let out = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => Err(CliError::Compute(e.to_string())),
        },
        None => work(),
    };
    match out {
        Ok((status, text)) => {
            match &cli.out {
                Some(p) => match write_text(p, &text) {
                    Ok(path) => eprintln!("{}", serde_json::json!({ "status": status, "report": path.display().to_string() })),
                    Err(e) => {
                        eprintln!("{}", e.diagnostic());
                        return e.exit_code();
                    }
                },
                None => {
                    use std::io::Write;
                    let _ = writeln!(std::io::stdout(), "{text}");
                }
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("modestab").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(args("frobnicate")), 1);
        assert_eq!(run(args("series --n 2")), 1);
        assert_eq!(run(args("series --lambda x --n 2")), 1);
        assert_eq!(run(args("scan --problem nope")), 1);
        assert_eq!(run(args("--jobs 0 series --lambda 0 --n 2")), 1);
        assert_eq!(run(args("--help")), 0);
    }

    #[test]
    fn series_at_zero() {
        let (st, p) = series_cmd("wavemaps-corotational", "0", 2, ModeArg::Exact).unwrap();
        assert_eq!(st, Status::Ok);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"3/7\""), "{text}");
        assert!(text.contains("\"2/9\""), "{text}");
        let back: SeriesPayload = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn float_series_roundtrips() {
        let (_, p) = series_cmd("wavemaps-corotational", "1+2i", 6, ModeArg::Float).unwrap();
        let back: SeriesPayload = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn chain_report_roundtrips() {
        let (st, rep) = chain_cmd("wavemaps-corotational", None, None).unwrap();
        assert_eq!(st, Status::Ok);
        let r = Report { command: vec![], schema: CHAIN_SCHEMA.into(), status: st, payload: rep, timing: Timing { seconds: 0.0 } };
        let back: Report<ChainReport> = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bounds_override() {
        let b = bounds_with(&Bounds::default(), &Some("1/10".into()), &None, &None).unwrap();
        assert_eq!(b.delta, crate::algebra::rat(1, 10));
        assert_eq!(b.eps, Bounds::default().eps);
        assert!(bounds_with(&Bounds::default(), &Some("x".into()), &None, &None).is_err());
    }

    #[test]
    fn registry_has_scan_defaults() {
        let e = lookup("wavemaps-corotational").unwrap();
        assert_eq!(e.scan_rect, Rect::new(-0.125, 2.5, -10.0, 10.0));
        assert_eq!(registry_entries().len(), certify::PROBLEMS.len());
    }
}
