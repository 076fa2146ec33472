//! The `loewner` command-line front end.
//!
//! Exit codes: 0 success or "true", 1 verified-false (suite failure, point
//! outside the realized domain, order violated, non-convergence), 2 usage or
//! structural error. Results go to stdout, diagnostics to stderr.

pub mod files;
pub mod hexfloat;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::builders::{BuildOptions, FunctionSpec, DEFAULT_INTERVAL, DEFAULT_NODES};
use crate::error::Error;
use crate::exec::Execution;
use crate::measures::{mean_of_measure, power_mean, stochastic_leq, MeanSpec, OrderVerdict};
use crate::numlin::DEFAULT_PSD_TOL;
use crate::pencil::{EvalOptions, PencilRealization};
use crate::shorted::{shorted_operator, ShortOptions};
use crate::verify::{self, comat_decompose, SuiteConfig, VerificationReport};
use files::{HullCertificateFile, MatrixFile, MeasureFile, OrderCertificateFile, PointFile, RealizationFile, ReportFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Matrix pencil realizations of operator monotone functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shorted operator of a PSD matrix onto its leading block.
    Schur {
        #[arg(long)]
        input: PathBuf,
        /// Size of the kept leading block.
        #[arg(long)]
        pivot_dim: usize,
        #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
        tol: f64,
    },
    /// Build a realization from a function spec and write it as JSON.
    Realize(RealizeArgs),
    /// Evaluate a realization at a point.
    Eval {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        point: PathBuf,
        /// Evaluate at complex points via the analytic continuation.
        #[arg(long)]
        complex: bool,
        #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
        tol: f64,
    },
    /// Run a randomized property suite against a realization.
    Verify(VerifyArgs),
    /// Decide the stochastic order between two measures.
    Order {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        /// Where to write the coupling or upper-set certificate.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
        tol: f64,
    },
    /// Operator mean of a discrete measure.
    Mean {
        /// power:t, arithmetic or harmonic.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        measure: PathBuf,
        /// Largest accepted fixed-point residual for power means.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Certify a PD tuple as a matrix convex combination of positive scalar points.
    Decompose {
        #[arg(long)]
        point: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    /// identity | constant:c | cauchy:λ | sqrt | power:t | harmonic:w1,… |
    /// arithmetic:w1,… | geomean:t | affine:α,β1,… | coord:i,k
    #[arg(long)]
    pub function: String,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Parameter for constant, cauchy, power or geomean when not given inline.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Weights for harmonic or arithmetic when not given inline.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Spectral interval the quadrature targets.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [DEFAULT_INTERVAL.0, DEFAULT_INTERVAL.1])]
    pub interval: Vec<f64>,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Axioms,
    Monotone,
    Concave,
    Jensen,
    Herglotz,
    Hypograph,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub realization: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Spectrum of sampled positive matrices.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub interval: Option<Vec<f64>>,
    /// Run trials on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// A failed command: exit code plus a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn structural(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_ERROR, message: message.into() }
}

fn verdict_false(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_FALSE, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        structural(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}

pub fn execute(command: Command) -> CmdResult {
    match command {
        Command::Schur { input, pivot_dim, tol } => cmd_schur(&input, pivot_dim, tol),
        Command::Realize(args) => cmd_realize(&args),
        Command::Eval { realization, point, complex, tol } => cmd_eval(&realization, &point, complex, tol),
        Command::Verify(args) => cmd_verify(&args),
        Command::Order { mu, nu, certificate, tol } => cmd_order(&mu, &nu, certificate.as_deref(), tol),
        Command::Mean { spec, measure, tol } => cmd_mean(&spec, &measure, tol),
        Command::Decompose { point, output } => cmd_decompose(&point, &output),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| structural(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| structural(format!("cannot parse {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types always serialize");
    s.push('\n');
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    fs::write(path, to_json(value)).map_err(|e| structural(format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(output: Option<&Path>, value: &T) -> Result<(), Failure> {
    match output {
        Some(p) => write_json(p, value),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

fn load_realization(path: &Path) -> Result<PencilRealization, Failure> {
    let file: RealizationFile = read_json(path)?;
    file.to_realization().map_err(|e| structural(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<crate::measures::DiscreteMeasure, Failure> {
    let file: MeasureFile = read_json(path)?;
    file.to_measure().map_err(|e| structural(format!("{}: {e}", path.display())))
}

fn cmd_schur(input: &Path, pivot: usize, tol: f64) -> CmdResult {
    let file: MatrixFile = read_json(input)?;
    let z = file.to_sym().map_err(structural)?;
    let opts = ShortOptions { psd_tol: tol, ..ShortOptions::default() };
    let r = shorted_operator(&z, pivot, &opts)?;
    emit(None, &MatrixFile::from_real(r.short.as_matrix()))?;
    Ok(EXIT_OK)
}

/// Spec text with any `--t` / `--weights` parameter spliced in.
fn realize_spec_text(args: &RealizeArgs) -> Result<String, Failure> {
    let text = args.function.trim();
    let inline = text.contains(':');
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match (inline, args.t, &args.weights) {
        (_, Some(_), Some(_)) => Err(structural("give either --t or --weights, not both")),
        (true, Some(_), _) | (true, _, Some(_)) => Err(structural(format!("'{text}' already has parameters"))),
        (false, Some(t), None) => Ok(format!("{text}:{t}")),
        (false, None, Some(w)) => Ok(format!("{text}:{}", list(w))),
        _ => Ok(text.to_string()),
    }
}

fn cmd_realize(args: &RealizeArgs) -> CmdResult {
    let spec: FunctionSpec = realize_spec_text(args)?.parse()?;
    let opts = BuildOptions { nodes: args.nodes, interval: (args.interval[0], args.interval[1]) };
    let r = spec.build(&opts)?;
    eprintln!("{spec}: k = {}, m = {}", r.arity(), r.aux_dim());
    emit(args.output.as_deref(), &RealizationFile::new(&r, Some(spec.to_string())))?;
    Ok(EXIT_OK)
}

fn cmd_eval(realization: &Path, point: &Path, complex: bool, tol: f64) -> CmdResult {
    let r = load_realization(realization)?;
    let p: PointFile = read_json(point)?;
    if p.items().len() != r.arity() {
        return Err(structural(format!("realization takes {} matrices, point has {}", r.arity(), p.items().len())));
    }
    let outside = |e: Error| match e {
        Error::OutsideDomain(_) | Error::SingularPivot { .. } => verdict_false(e.to_string()),
        other => other.into(),
    };
    let out = if complex {
        let x = p.to_complex().map_err(structural)?;
        MatrixFile::from_complex(&r.eval_complex(&x).map_err(outside)?)
    } else {
        if p.is_complex() {
            return Err(structural("point has imaginary parts; pass --complex"));
        }
        let x = p.to_tuple().map_err(structural)?;
        let opts = EvalOptions { tol, ..EvalOptions::default() };
        MatrixFile::from_real(r.eval(&x, &opts).map_err(outside)?.as_matrix())
    };
    emit(None, &out)?;
    Ok(EXIT_OK)
}

fn run_named_suite(suite: Suite, r: &PencilRealization, cfg: &SuiteConfig) -> crate::Result<VerificationReport> {
    match suite {
        Suite::Axioms => verify::check_free_axioms(r, cfg),
        Suite::Monotone => verify::check_monotone(r, cfg),
        Suite::Concave => verify::check_concave(r, cfg),
        Suite::Jensen => verify::check_jensen_isometry(r, cfg),
        Suite::Herglotz => verify::check_herglotz(r, cfg),
        Suite::Hypograph => verify::check_hypograph_saturation(r, cfg),
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let r = load_realization(&args.realization)?;
    let cfg = SuiteConfig {
        dims: args.dims.clone(),
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
        interval: args.interval.as_ref().map(|v| (v[0], v[1])),
        execution: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let start = Instant::now();
    let report = run_named_suite(args.suite, &r, &cfg)?;
    eprintln!(
        "{}: {} failures, {} skipped, worst {:e}, {:.3}s",
        report.suite,
        report.failures,
        report.skipped,
        report.worst_violation,
        start.elapsed().as_secs_f64()
    );
    emit(args.report.as_deref(), &ReportFile::new(&report))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FALSE })
}

fn cmd_order(mu: &Path, nu: &Path, certificate: Option<&Path>, tol: f64) -> CmdResult {
    let mu = load_measure(mu)?;
    let nu = load_measure(nu)?;
    let verdict = stochastic_leq(&mu, &nu, tol)?;
    let cert = match &verdict {
        OrderVerdict::Leq(c) => OrderCertificateFile::coupling(c),
        OrderVerdict::NotLeq(u) => {
            eprintln!("not ordered: mu(U) = {:e} > nu(U) = {:e}", u.mu_mass, u.nu_mass);
            OrderCertificateFile::upper_set(u)
        }
    };
    emit(certificate, &cert)?;
    Ok(if verdict.holds() { EXIT_OK } else { EXIT_FALSE })
}

fn cmd_mean(spec: &str, measure: &Path, tol: f64) -> CmdResult {
    let spec: MeanSpec = spec.parse()?;
    let mu = load_measure(measure)?;
    let mean = match spec {
        MeanSpec::Power(t) => {
            let r = power_mean(mu.weights(), mu.atoms(), t).map_err(|e| match e {
                Error::NonConvergence { .. } => verdict_false(e.to_string()),
                other => other.into(),
            })?;
            eprintln!("residual {:e} after {} iterations", r.residual, r.iterations);
            if !(r.residual <= tol) {
                return Err(verdict_false(format!("residual {:e} exceeds --tol {tol:e}", r.residual)));
            }
            r.mean
        }
        other => mean_of_measure(other, &mu)?,
    };
    emit(None, &MatrixFile::from_real(mean.as_matrix()))?;
    Ok(EXIT_OK)
}

fn cmd_decompose(point: &Path, output: &Path) -> CmdResult {
    let p: PointFile = read_json(point)?;
    let x = p.to_tuple().map_err(structural)?;
    let cert = comat_decompose(&x)?;
    let check = cert.check(&x)?;
    eprintln!(
        "orthogonality {:e}, reconstruction {:e}, min entry {:e}",
        check.orthogonality, check.reconstruction, check.min_entry
    );
    if !check.passes() {
        return Err(verdict_false("certificate failed its own check; not written"));
    }
    write_json(output, &HullCertificateFile::new(&cert))?;
    Ok(EXIT_OK)
}
