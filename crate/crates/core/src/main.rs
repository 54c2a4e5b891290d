use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tvrestore::media::{self, MediaKind, MediaMapping};
use tvrestore::metrics::format_db;
use tvrestore::{
    add_noise, deblur, denoise, gaussian_psf, psnr, spectrum, Algorithm, ConstraintSet,
    DeblurConfig, NoiseSpec, OuterAlgorithm, SolveReport, SolverConfig, Tensor, TvFlavor,
};

#[derive(Parser, Debug)]
#[command(
    name = "tvrestore",
    version,
    about = "Total-variation denoising and deblurring of images, videos and tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// TV denoising by dual gradient projection
    Denoise(DenoiseArgs),
    /// Periodic Gaussian blur, optionally followed by seeded noise
    Blur(BlurArgs),
    /// TV deblurring with a Gaussian PSF
    Deblur(DeblurArgs),
    /// PSNR in dB between two inputs
    Psnr(PsnrArgs),
    /// Convert between PNG, frame directories and .tns
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct Io {
    /// PNG file, directory of PNG frames, or .tns file
    #[arg(long, value_hint = clap::ValueHint::AnyPath)]
    input: PathBuf,
    #[arg(long, value_hint = clap::ValueHint::AnyPath)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct Regularization {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = Tv::Iso)]
    tv: Tv,
    #[arg(long, value_enum, default_value_t = Constraint::Box01)]
    constraint: Constraint,
    /// Write the per-iteration objective trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    reg: Regularization,
    #[arg(long, value_enum, default_value_t = Algo::Fista)]
    algo: Algo,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Stop when the relative change drops below this (0 runs all iterations)
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Args, Debug)]
struct PsfArgs {
    /// PSF extents, e.g. 7x7x3; fewer modes than the input broadcast
    #[arg(long, default_value = "7x7x3")]
    psf_size: String,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args, Debug)]
struct BlurArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    psf: PsfArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DeblurArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    psf: PsfArgs,
    #[command(flatten)]
    reg: Regularization,
    #[arg(long, default_value_t = 100)]
    outer_iters: usize,
    /// Denoiser iterations per outer step
    #[arg(long, default_value_t = 10)]
    inner_iters: usize,
    #[arg(long, value_enum, default_value_t = OuterAlgo::Mfista)]
    algo: OuterAlgo,
}

#[derive(Args, Debug)]
struct PsnrArgs {
    #[arg(long)]
    a: PathBuf,
    /// Reference
    #[arg(long)]
    b: PathBuf,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    peak: f64,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[command(flatten)]
    io: Io,
    /// Layout of the output; inferred from the path when omitted
    #[arg(long, value_enum)]
    mapping: Option<Mapping>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Tv {
    Iso,
    Aniso,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Ista,
    Fista,
    Mfista,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OuterAlgo {
    Fista,
    Mfista,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Constraint {
    Box01,
    None,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mapping {
    ColorImage,
    GrayImage,
    GrayVideo,
    ColorVideo,
    Raw,
}

impl From<Tv> for TvFlavor {
    fn from(t: Tv) -> Self {
        match t {
            Tv::Iso => TvFlavor::Iso,
            Tv::Aniso => TvFlavor::Aniso,
        }
    }
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Ista => Algorithm::Ista,
            Algo::Fista => Algorithm::Fista,
            Algo::Mfista => Algorithm::Mfista,
        }
    }
}

impl From<OuterAlgo> for OuterAlgorithm {
    fn from(a: OuterAlgo) -> Self {
        match a {
            OuterAlgo::Fista => OuterAlgorithm::Fista,
            OuterAlgo::Mfista => OuterAlgorithm::Mfista,
        }
    }
}

impl From<Constraint> for ConstraintSet {
    fn from(c: Constraint) -> Self {
        match c {
            Constraint::Box01 => ConstraintSet::unit_box(),
            Constraint::None => ConstraintSet::Unconstrained,
        }
    }
}

impl From<Mapping> for MediaKind {
    fn from(m: Mapping) -> Self {
        match m {
            Mapping::ColorImage => MediaKind::ColorImage,
            Mapping::GrayImage => MediaKind::GrayImage,
            Mapping::GrayVideo => MediaKind::GrayVideo,
            Mapping::ColorVideo => MediaKind::ColorVideo,
            Mapping::Raw => MediaKind::Raw,
        }
    }
}

type CliResult<T> = Result<T, String>;

fn check(flag: &str, ok: bool, value: impl std::fmt::Display, want: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(format!("--{flag} {value}: {want}"))
    }
}

fn non_negative(flag: &str, v: f64) -> CliResult<()> {
    check(
        flag,
        v.is_finite() && v >= 0.0,
        v,
        "must be a finite value >= 0",
    )
}

fn positive(flag: &str, v: f64) -> CliResult<()> {
    check(
        flag,
        v.is_finite() && v > 0.0,
        v,
        "must be a finite value > 0",
    )
}

fn at_least_one(flag: &str, v: usize) -> CliResult<()> {
    check(flag, v >= 1, v, "must be at least 1")
}

fn parse_psf_size(s: &str) -> CliResult<Vec<usize>> {
    let dims: Option<Vec<usize>> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse().ok().filter(|&n| n > 0))
        .collect();
    dims.filter(|d| !d.is_empty())
        .ok_or_else(|| format!("--psf-size {s}: expected positive extents like 7x7x3"))
}

fn load(path: &Path) -> CliResult<Tensor> {
    let mapping = MediaMapping::infer_for_load(path).map_err(|e| e.to_string())?;
    media::load(path, &mapping).map_err(|e| e.to_string())
}

fn save(t: &Tensor, path: &Path, kind: Option<MediaKind>) -> CliResult<()> {
    let mapping = match kind {
        Some(k) => MediaMapping::new(k),
        None => MediaMapping::infer_for_save(path, t),
    };
    media::save(t, path, &mapping).map_err(|e| e.to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_trace(path: &Path, provenance: &str, report: &SolveReport) -> CliResult<()> {
    let fail = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    let mut out = BufWriter::new(File::create(path).map_err(|e| fail(&e))?);
    writeln!(out, "# {provenance}").map_err(|e| fail(&e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "dual_objective", "primal_objective", "rel_change"])
        .map_err(|e| fail(&e))?;
    for r in &report.trace {
        w.write_record([
            r.iter.to_string(),
            fmt_opt(r.dual_objective),
            r.primal_objective.to_string(),
            r.rel_change.to_string(),
        ])
        .map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

fn report_run(provenance: &str, trace: Option<&Path>, report: &SolveReport) -> CliResult<()> {
    println!("{provenance}");
    if let Some(path) = trace {
        write_trace(path, provenance, report)?;
    }
    let last = report.objective_trace().last().copied();
    println!(
        "iterations={} objective={} rel_change={:e} elapsed={:.3}s",
        report.iterations,
        fmt_opt(last),
        report.final_rel_change,
        report.elapsed.as_secs_f64()
    );
    Ok(())
}

fn run_denoise(a: &DenoiseArgs) -> CliResult<()> {
    non_negative("lambda", a.reg.lambda)?;
    non_negative("tol", a.tol)?;
    at_least_one("iters", a.iters)?;
    let s = load(&a.io.input)?;
    let cfg = SolverConfig {
        lambda: a.reg.lambda,
        flavor: a.reg.tv.into(),
        constraint: a.reg.constraint.into(),
        max_iters: a.iters,
        tol: a.tol,
        algo: a.algo.into(),
    };
    let (x, report) = denoise(&s, &cfg).map_err(|e| e.to_string())?;
    save(&x, &a.io.output, None)?;
    let provenance = format!(
        "tvrestore denoise input={} output={} lambda={} tv={:?} algo={:?} iters={} tol={} constraint={:?}",
        a.io.input.display(),
        a.io.output.display(),
        a.reg.lambda,
        a.reg.tv,
        a.algo,
        a.iters,
        a.tol,
        a.reg.constraint
    );
    report_run(&provenance, a.reg.trace.as_deref(), &report)?;
    let p = psnr(&x, &s, 1.0).map_err(|e| e.to_string())?;
    println!("psnr(output, input)={}", format_db(p));
    Ok(())
}

fn blur_spectrum(psf: &PsfArgs, dims: &[usize]) -> CliResult<tvrestore::BlurSpectrum> {
    positive("sigma", psf.sigma)?;
    let size = parse_psf_size(&psf.psf_size)?;
    let kernel = gaussian_psf(&size, psf.sigma).map_err(|e| format!("--psf-size: {e}"))?;
    spectrum(&kernel, dims).map_err(|e| format!("--psf-size {}: {e}", psf.psf_size))
}

fn run_blur(a: &BlurArgs) -> CliResult<()> {
    non_negative("noise-std", a.noise_std)?;
    let x = load(&a.io.input)?;
    let b = blur_spectrum(&a.psf, x.dims())?;
    let blurred = b.apply(&x).map_err(|e| e.to_string())?;
    let noisy = add_noise(&blurred, &NoiseSpec::gaussian(a.noise_std, a.seed))
        .map_err(|e| e.to_string())?;
    save(&noisy, &a.io.output, None)?;
    println!(
        "tvrestore blur input={} output={} psf-size={} sigma={} noise-std={} seed={}",
        a.io.input.display(),
        a.io.output.display(),
        a.psf.psf_size,
        a.psf.sigma,
        a.noise_std,
        a.seed
    );
    let p = psnr(&noisy, &x, 1.0).map_err(|e| e.to_string())?;
    println!("psnr(output, input)={}", format_db(p));
    Ok(())
}

fn run_deblur(a: &DeblurArgs) -> CliResult<()> {
    non_negative("lambda", a.reg.lambda)?;
    at_least_one("outer-iters", a.outer_iters)?;
    at_least_one("inner-iters", a.inner_iters)?;
    let s = load(&a.io.input)?;
    let b = blur_spectrum(&a.psf, s.dims())?;
    let cfg = DeblurConfig {
        inner: SolverConfig {
            lambda: a.reg.lambda,
            flavor: a.reg.tv.into(),
            constraint: a.reg.constraint.into(),
            max_iters: a.inner_iters,
            ..SolverConfig::default()
        },
        outer_iters: a.outer_iters,
        outer_algo: a.algo.into(),
        ..DeblurConfig::default()
    };
    let (x, report) = deblur(&s, &b, &cfg).map_err(|e| e.to_string())?;
    save(&x, &a.io.output, None)?;
    let provenance = format!(
        "tvrestore deblur input={} output={} psf-size={} sigma={} lambda={} tv={:?} algo={:?} outer-iters={} inner-iters={} constraint={:?}",
        a.io.input.display(),
        a.io.output.display(),
        a.psf.psf_size,
        a.psf.sigma,
        a.reg.lambda,
        a.reg.tv,
        a.algo,
        a.outer_iters,
        a.inner_iters,
        a.reg.constraint
    );
    report_run(&provenance, a.reg.trace.as_deref(), &report)
}

fn run_psnr(a: &PsnrArgs) -> CliResult<()> {
    positive("peak", a.peak)?;
    let x = load(&a.a)?;
    let r = load(&a.b)?;
    let p = psnr(&x, &r, a.peak).map_err(|e| e.to_string())?;
    println!("{}", format_db(p));
    Ok(())
}

fn run_convert(a: &ConvertArgs) -> CliResult<()> {
    let t = load(&a.io.input)?;
    save(&t, &a.io.output, a.mapping.map(MediaKind::from))?;
    println!(
        "tvrestore convert input={} output={} dims={:?}",
        a.io.input.display(),
        a.io.output.display(),
        t.dims()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Denoise(a) => run_denoise(a),
        Command::Blur(a) => run_blur(a),
        Command::Deblur(a) => run_deblur(a),
        Command::Psnr(a) => run_psnr(a),
        Command::Convert(a) => run_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
