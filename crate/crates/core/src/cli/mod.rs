//! Command-line front end.
//!
//! Exit codes: `0` success, `1` domain error or failure to write the
//! report, `2` usage, parse or validation error. Errors are also written
//! to stderr as one JSON object per line.

pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bases::{lpf_train, spike_fourier_pair, TightnessSummary};
use crate::coherence::analog_coherence;
use crate::decompose::{
    decompose_frame, decompose_rich, decompose_two_onb_constant, detect_constant_structure, DecomposeOptions,
    JointSparseSolution,
};
use crate::linalg::CMat;
use crate::sispace::{
    cross_spectrum, gram_matrix, orthonormality_deviation, riesz_bounds, signal_norm, CoeffSpectra, FrequencyGrid,
    GeneratorBank,
};

pub use report::{write_report, Format, Report};
pub use spec::{load_problem, save_problem, Pipeline, ProblemKind, ProblemSpec};

use report::{BankRiesz, PlotData, SolutionSummary, SynthesisSummary, Timings};
use spec::{to_cx, Instance};

/// Lower Riesz bound below which a bank is reported as not a basis.
pub const RIESZ_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read spec {path}: {message}")]
    SpecRead { path: String, message: String },
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },
    #[error("invalid field {field}: {message}")]
    Validation { field: String, message: String },
    #[error("cannot write report {path}: {message}")]
    ReportWrite { path: String, message: String },
    #[error(transparent)]
    Domain(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::SpecRead { .. } | CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::ReportWrite { .. } | CliError::Domain(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::SpecRead { .. } => "SpecRead",
            CliError::Parse { .. } => "Parse",
            CliError::Validation { .. } => "Validation",
            CliError::ReportWrite { .. } => "ReportWrite",
            CliError::Domain(e) => e.kind(),
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let mut r = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Parse { field, .. } | CliError::Validation { field, .. } => r["field"] = json!(field),
            CliError::SpecRead { path, .. } | CliError::ReportWrite { path, .. } => r["path"] = json!(path),
            _ => {}
        }
        r.to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "sisparse", version, about = "Sparse decompositions in shift-invariant spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analog coherence of a basis pair.
    Coherence(ProblemArgs),
    /// LPF train meeting the uncertainty bound with equality.
    DemoTightness(TightnessArgs),
    /// Sparse decomposition of the samples described by a spec.
    Decompose(SpecArgs),
    /// Riesz bounds of the generator banks.
    RieszCheck(ProblemArgs),
    /// Samples of a planted signal.
    Synth(SpecArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, conflicts_with_all = ["kind", "n", "m", "k", "period", "seed"])]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<ProblemKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TightnessArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

impl ProblemArgs {
    fn resolve(&self) -> Result<ProblemSpec, CliError> {
        if let Some(path) = &self.spec {
            return load_problem(path);
        }
        let (kind, n) = match (self.kind, self.n) {
            (Some(k), Some(n)) => (k, n),
            _ => return Err(CliError::Usage("either --spec or both --kind and --n are required".into())),
        };
        let spec = ProblemSpec {
            m: self.m,
            k: self.k,
            period: self.period.unwrap_or(spec::DEFAULT_PERIOD),
            seed: self.seed,
            ..ProblemSpec::basic(kind, n)
        };
        spec.resolve(spec::default_grid_size()?)
    }
}

/// Runs the command line and returns the exit code, writing the summary to
/// `out` and error records to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let ce = CliError::Usage(e.render().to_string().trim_end().to_string());
            let _ = writeln!(err, "{}", ce.record());
            return ce.exit_code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.record());
            e.exit_code()
        }
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let (mut report, output) = match command {
        Command::Coherence(a) => {
            let spec = a.resolve()?;
            (coherence(spec, a.output.format, out)?, a.output)
        }
        Command::DemoTightness(a) => (demo_tightness(&a, out)?, a.output),
        Command::Decompose(a) => {
            let spec = load_problem(&a.spec)?;
            (decompose(spec, a.output.format, out)?, a.output)
        }
        Command::RieszCheck(a) => {
            let spec = a.resolve()?;
            (riesz_check(spec, out)?, a.output)
        }
        Command::Synth(a) => {
            let spec = load_problem(&a.spec)?;
            (synth(spec, out)?, a.output)
        }
    };
    if output.timings {
        report.timings = Some(Timings { total_seconds: start.elapsed().as_secs_f64() });
    }
    if let Some(path) = &output.out {
        write_report(&report, path, output.format)?;
        let _ = writeln!(out, "report written to {}", path.display());
    }
    Ok(())
}

fn block_labels(spec: &ProblemSpec, inst: &Instance) -> Vec<String> {
    let n = spec.n;
    let (a, b) = match (spec.kind, inst.two_basis) {
        (ProblemKind::SpikeFourier, _) => ("spike", "fourier"),
        (_, true) => ("phi", "psi"),
        (_, false) => ("frame", "frame"),
    };
    let m = inst.dictionary.cols();
    if inst.two_basis {
        (0..m).map(|l| if l < n { a } else { b }.to_string()).collect()
    } else {
        vec![a.to_string(); m]
    }
}

fn coherence(spec: ProblemSpec, format: Format, out: &mut dyn Write) -> Result<Report, CliError> {
    let inst = spec.build()?;
    let rep = analog_coherence(&inst.first, &inst.second, &inst.grid)?;
    let _ = writeln!(
        out,
        "coherence mu = {} at generators {:?} (bounds [{}, {}])",
        rep.mu, rep.argmax_pair, rep.lower_bound, rep.upper_bound
    );
    let mut report = Report::new("coherence", &inst.grid, spec.period);
    if format == Format::Csv {
        let m = cross_spectrum(&inst.first, &inst.second, &inst.grid)?;
        report.plot = Some(PlotData::new(&inst.grid, &m, &CoeffSpectra::zeros(0, &inst.grid), Vec::new()));
    }
    report.coherence = Some(rep);
    report.spec = Some(spec);
    Ok(report)
}

fn demo_tightness(a: &TightnessArgs, out: &mut dyn Write) -> Result<Report, CliError> {
    let k = match a.k {
        Some(k) => k,
        None => spec::fit_grid(spec::default_grid_size()?, a.n.max(1)),
    };
    let grid = FrequencyGrid::new(k)?;
    let period = a.period.unwrap_or(spec::DEFAULT_PERIOD);
    let lpf = lpf_train(a.n, period, &grid)?;
    let check = lpf.uncertainty()?;
    let pair = spike_fourier_pair(a.n, period, &grid)?;
    let coh = analog_coherence(&pair.spike, &pair.fourier, &grid)?;
    let _ = writeln!(
        out,
        "LPF train N = {}: A = {} spike, B = {} Fourier sequences; sqrt(AB) = {}, (A+B)/2 = {}, bound = {}, tight = {}",
        a.n, check.a_count, check.b_count, check.geometric_mean, check.arithmetic_mean, check.bound, check.tight
    );
    let mut report = Report::new("demo-tightness", &grid, period);
    if a.output.format == Format::Csv {
        let m = cross_spectrum(&pair.spike, &pair.fourier, &grid)?;
        let n = a.n;
        let mut g = CMat::zeros(2 * n, k);
        g.rows_mut(0, n).copy_from(lpf.spike_coeffs.values());
        g.rows_mut(n, n).copy_from(lpf.fourier_coeffs.values());
        let labels = (0..2 * n).map(|l| if l < n { "spike" } else { "fourier" }.to_string()).collect();
        report.plot = Some(PlotData::new(&grid, &m, &CoeffSpectra::new(g), labels));
    }
    report.coherence = Some(coh);
    report.tightness = Some(TightnessSummary {
        n: a.n,
        active_fourier: lpf.active_fourier.clone(),
        active_spike: lpf.active_spike.clone(),
        check,
    });
    Ok(report)
}

fn require_samples(inst: &Instance) -> Result<&CoeffSpectra, CliError> {
    inst.samples.as_ref().ok_or_else(|| CliError::Validation {
        field: "planted".into(),
        message: "this command needs planted or samples".into(),
    })
}

fn decompose(spec: ProblemSpec, format: Format, out: &mut dyn Write) -> Result<Report, CliError> {
    let inst = spec.build()?;
    let c = require_samples(&inst)?;
    let opts = DecomposeOptions::with_solver(spec.solver);
    let grid = &inst.grid;
    let pipeline = spec.pipeline.unwrap_or(Pipeline::Constant);
    let sol: JointSparseSolution = match pipeline {
        Pipeline::Constant => decompose_two_onb_constant(&inst.first, &inst.second, c, grid, &opts)?,
        Pipeline::Rich => decompose_rich(
            &inst.dictionary,
            c,
            grid,
            spec.rich_freqs.unwrap_or(2 * spec.n),
            spec.seed.unwrap_or(0),
            &opts,
        )?,
        Pipeline::Frame => decompose_frame(&inst.second, &inst.first, c, grid, &opts)?,
    };
    let mut report = Report::new("decompose", grid, spec.period);
    if inst.two_basis {
        report.coherence = Some(analog_coherence(&inst.first, &inst.second, grid)?);
    }
    if pipeline != Pipeline::Rich {
        report.factorization = Some(detect_constant_structure(&inst.dictionary, opts.max_arcs).summary(grid));
    }
    let gamma = sol.embed();
    let n = spec.n;
    let (planted_support, support_matches, relative_error) = match &inst.truth {
        Some(t) => {
            let s = t.active_rows(0.0);
            let err = crate::linalg::frobenius(&(gamma.values() - t.values())) / t.frobenius().max(f64::MIN_POSITIVE);
            let matches = s == sol.support;
            (Some(s), Some(matches), Some(if t.frobenius() == 0.0 { gamma.frobenius() } else { err }))
        }
        None => (None, None, None),
    };
    let _ = writeln!(
        out,
        "{} pipeline ({}): support {:?}, k = {}, residual = {:e}",
        sol.diagnostics.pipeline,
        sol.diagnostics.solver,
        sol.support,
        sol.support.len(),
        sol.residual
    );
    for w in &sol.diagnostics.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if format == Format::Csv {
        report.plot = Some(PlotData::new(grid, &inst.dictionary, &gamma, block_labels(&spec, &inst)));
    }
    report.solution = Some(SolutionSummary {
        blocks: inst.two_basis.then(|| {
            let (a, b): (Vec<usize>, Vec<usize>) = sol.support.iter().partition(|&&s| s < n);
            [a, b.into_iter().map(|s| s - n).collect()]
        }),
        k: sol.support.len(),
        residual: sol.residual,
        support: sol.support,
        diagnostics: sol.diagnostics,
        planted_support,
        support_matches,
        relative_error,
    });
    report.spec = Some(spec);
    Ok(report)
}

fn bank_riesz(name: &str, bank: &GeneratorBank, grid: &FrequencyGrid) -> Result<BankRiesz, CliError> {
    let rb = riesz_bounds(&gram_matrix(bank, grid)?, grid)?;
    Ok(BankRiesz {
        bank: name.into(),
        count: bank.count(),
        alpha: rb.alpha,
        beta: rb.beta,
        riesz_basis: rb.is_riesz_basis(RIESZ_TOL),
        orthonormal_deviation: orthonormality_deviation(bank, grid)?,
    })
}

fn riesz_check(spec: ProblemSpec, out: &mut dyn Write) -> Result<Report, CliError> {
    let inst = spec.build()?;
    let names = if inst.two_basis { ["phi", "psi"] } else { ["sampler", "frame"] };
    let banks = vec![bank_riesz(names[0], &inst.first, &inst.grid)?, bank_riesz(names[1], &inst.second, &inst.grid)?];
    for b in &banks {
        let _ = writeln!(
            out,
            "{}: {} generators, alpha = {}, beta = {}, riesz basis = {}",
            b.bank, b.count, b.alpha, b.beta, b.riesz_basis
        );
    }
    let mut report = Report::new("riesz-check", &inst.grid, spec.period);
    report.riesz = Some(banks);
    report.spec = Some(spec);
    Ok(report)
}

fn synth(spec: ProblemSpec, out: &mut dyn Write) -> Result<Report, CliError> {
    let inst = spec.build()?;
    let truth = inst.truth.as_ref().ok_or_else(|| CliError::Validation {
        field: "planted".into(),
        message: "synth needs a planted signal".into(),
    })?;
    let c = require_samples(&inst)?;
    let samples = c.to_sequences().into_iter().map(|s| s.into_iter().map(to_cx).collect()).collect();
    let norm = signal_norm(c, &inst.grid);
    let _ = writeln!(out, "synthesized {} sample sequences of length {}, norm {}", c.count(), inst.grid.size(), norm);
    let mut report = Report::new("synth", &inst.grid, spec.period);
    report.synthesis = Some(SynthesisSummary { planted_support: truth.active_rows(0.0), samples_norm: norm, samples });
    report.spec = Some(spec);
    Ok(report)
}
