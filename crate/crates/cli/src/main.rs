//! `faidlab`: analysis toolchain for finite alphabet iterative decoders on
//! faulty hardware.
//!
//! Every run writes a reproducibility header (version, seed, full config)
//! as `#` comments ahead of the CSV payload, and produces byte-identical
//! output for a fixed seed regardless of `--jobs`.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faid_core::alphabet::{EnsembleSpec, FaultModel, MessageAlphabet, NoiseParams};
use faid_core::de::DeOptions;
use faid_core::decoder::DecoderSpec;
use faid_core::designer::{enumerate_valid_luts, ingest_luts, rank_candidates, rank_csv};
use faid_core::lut::{tables, Lut};
use faid_core::sim::code::parse_alist_file;
use faid_core::sim::{ber_csv, ber_sweep, CodewordMode, TrialConfig};
use faid_core::threshold::{
    functional_threshold, sample_pe_curve, sweep_csv, threshold_sweep, NoiseAxis, ThresholdConfig,
    TransitionKind,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 0xFA1D;

#[derive(Parser)]
#[command(
    name = "faidlab",
    version,
    about = "FAID robustness analysis over the BSC"
)]
struct Cli {
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// RNG seed; falls back to FAIDLAB_SEED, then a fixed default
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the asymptotic error-probability curve alpha -> Pe(alpha)
    DeCurve(DeCurveArgs),
    /// Estimate the functional threshold of one decoder
    Threshold(ThresholdArgs),
    /// Functional thresholds along a hardware-noise axis
    Sweep(SweepArgs),
    /// Rank rule files by robustness to a fault model
    Rank(RankArgs),
    /// Fault-injected Monte Carlo BER on a parity-check code
    Simulate(SimulateArgs),
    /// Check a rule file against the validity conditions
    ValidateLut(ValidateArgs),
    /// Enumerate (or count) all valid rules over a small alphabet
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    None,
    Sp,
    Fd,
}

impl From<ModelArg> for FaultModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::None => FaultModel::None,
            ModelArg::Sp => FaultModel::SignPreserving,
            ModelArg::Fd => FaultModel::FullDepth,
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Fault model applied to all three units
    #[arg(long, value_enum, default_value = "none")]
    model: ModelArg,
    /// Shorthand: same probability for --pv/--pc/--pa
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    pv: Option<f64>,
    #[arg(long)]
    pc: Option<f64>,
    #[arg(long)]
    pa: Option<f64>,
}

impl NoiseArgs {
    fn build(&self) -> Result<NoiseParams> {
        let base = self.p.unwrap_or(0.0);
        let noise = NoiseParams::new(
            self.model.into(),
            self.pv.unwrap_or(base),
            self.pc.unwrap_or(base),
            self.pa.unwrap_or(base),
        )?;
        Ok(noise)
    }

    fn header(&self, noise: &NoiseParams) -> String {
        format!(
            "model={} pv={} pc={} pa={}",
            noise.model, noise.p_v, noise.p_c, noise.p_a
        )
    }
}

#[derive(Args)]
struct DecoderArgs {
    /// Rule: builtin name (opt, offset-ms, robust-sp, non-robust-sp,
    /// robust-fd, non-robust-fd) or a .lut file path
    #[arg(long)]
    lut: String,
    #[arg(long, default_value_t = 3)]
    dv: u32,
    #[arg(long, default_value_t = 5)]
    dc: u32,
}

impl DecoderArgs {
    fn build(&self) -> Result<DecoderSpec> {
        let lut = load_rule(&self.lut)?;
        let ensemble = EnsembleSpec::new(self.dv, self.dc)?;
        Ok(DecoderSpec::new(self.lut.clone(), lut, ensemble)?)
    }
}

fn load_rule(name_or_path: &str) -> Result<Lut> {
    if let Some(lut) = tables::by_name(name_or_path) {
        return Ok(lut);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return Ok(Lut::from_file(path)?);
    }
    bail!("`{name_or_path}` is neither a builtin rule nor an existing file");
}

#[derive(Args)]
struct DeCurveArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0.0)]
    alpha_lo: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_hi: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Density-evolution iteration budget per grid point
    #[arg(long, default_value_t = 60_000)]
    de_max_iter: u32,
    /// Dump the per-iteration error-probability trajectory at this single
    /// channel parameter instead of sampling a curve
    #[arg(long)]
    trajectory_alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 3)]
    refinements: u32,
    #[arg(long, default_value_t = 1.7)]
    divergence_ratio: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Which unit's noise level to sweep
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma-separated probabilities for the swept axis
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Pv,
    Pc,
    Pa,
}

impl From<AxisArg> for NoiseAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Pv => NoiseAxis::Pv,
            AxisArg::Pc => NoiseAxis::Pc,
            AxisArg::Pa => NoiseAxis::Pa,
        }
    }
}

#[derive(Args)]
struct RankArgs {
    /// Directory of .lut files
    #[arg(long)]
    luts: PathBuf,
    /// Model whose discrepancy orders the output
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Uniform unit-noise level for the ranked model
    #[arg(long)]
    p: Option<f64>,
    /// Uniform noise for the SP analysis (default 1e-2)
    #[arg(long, default_value_t = 1e-2)]
    p_sp: f64,
    /// Uniform noise for the FD analysis (default 5e-3)
    #[arg(long, default_value_t = 5e-3)]
    p_fd: f64,
    #[arg(long, default_value_t = 3)]
    dv: u32,
    #[arg(long, default_value_t = 5)]
    dc: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Parity-check matrix in alist format
    #[arg(long)]
    code: PathBuf,
    /// Rules to simulate: builtin names or .lut paths
    #[arg(long, num_args = 1.., required = true)]
    luts: Vec<String>,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Comma-separated channel parameters
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.02,0.03,0.04,0.05"
    )]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 100)]
    iters: u32,
    /// Transmit uniformly random codewords instead of the all-zero word
    #[arg(long)]
    random_codeword: bool,
    /// Disable the halt-on-codeword early stopping rule
    #[arg(long)]
    no_early_stop: bool,
    #[arg(long, default_value_t = 5)]
    dc: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Rule file to check
    path: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Alphabet half-width (1 or 2; the 7-level space is count-only)
    #[arg(long)]
    s: u32,
    /// Write the rules as .lut files into this directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on the number of files written
    #[arg(long)]
    limit: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("faidlab: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let seed = cli.seed.or_else(seed_from_env).unwrap_or(DEFAULT_SEED);
    match run(cli.command, seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("faidlab: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn seed_from_env() -> Option<u64> {
    std::env::var("FAIDLAB_SEED").ok()?.parse().ok()
}

fn run(command: Command, seed: u64) -> Result<ExitCode> {
    match command {
        Command::DeCurve(args) => de_curve(args, seed),
        Command::Threshold(args) => threshold(args, seed),
        Command::Sweep(args) => sweep(args, seed),
        Command::Rank(args) => rank(args, seed),
        Command::Simulate(args) => simulate(args, seed),
        Command::ValidateLut(args) => validate_lut(args),
        Command::Enumerate(args) => enumerate(args),
    }
}

fn header(seed: u64, config: &str) -> String {
    format!(
        "# faidlab {}\n# seed {}\n# config {}\n",
        env!("CARGO_PKG_VERSION"),
        seed,
        config
    )
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).with_context(|| format!("writing {path:?}")),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn de_curve(args: DeCurveArgs, seed: u64) -> Result<ExitCode> {
    if args.alpha_lo >= args.alpha_hi {
        bail!("--alpha-lo must be below --alpha-hi");
    }
    let spec = args.decoder.build()?;
    let noise = args.noise.build()?;
    let de = DeOptions::default().with_max_iter(args.de_max_iter);
    if let Some(alpha) = args.trajectory_alpha {
        let res = faid_core::de::de_iterate(alpha, &spec, &noise, &de.clone().with_trajectory())?;
        let config = format!(
            "de-trajectory lut={} dv={} dc={} {} alpha={} de_max_iter={} converged={}",
            spec.name,
            spec.ensemble.d_v,
            spec.ensemble.d_c,
            args.noise.header(&noise),
            alpha,
            args.de_max_iter,
            res.converged,
        );
        let csv = faid_core::de::trajectory_csv(&res.trajectory.unwrap_or_default());
        emit(
            args.out.as_deref(),
            &format!("{}{}", header(seed, &config), csv),
        )?;
        return Ok(if res.converged {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        });
    }
    let curve = sample_pe_curve(&spec, &noise, args.alpha_lo, args.alpha_hi, args.step, &de)?;
    let config = format!(
        "de-curve lut={} dv={} dc={} {} alpha_lo={} alpha_hi={} step={} de_max_iter={}",
        spec.name,
        spec.ensemble.d_v,
        spec.ensemble.d_c,
        args.noise.header(&noise),
        args.alpha_lo,
        args.alpha_hi,
        args.step,
        args.de_max_iter,
    );
    emit(
        args.out.as_deref(),
        &format!("{}{}", header(seed, &config), curve.to_csv()),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn threshold(args: ThresholdArgs, seed: u64) -> Result<ExitCode> {
    let spec = args.decoder.build()?;
    let noise = args.noise.build()?;
    let cfg = ThresholdConfig {
        initial_step: args.step,
        max_refinements: args.refinements,
        divergence_ratio: args.divergence_ratio,
        ..ThresholdConfig::default()
    };
    let report = functional_threshold(&spec, &noise, &cfg)?;
    let config = format!(
        "threshold lut={} dv={} dc={} {} step={} refinements={} divergence_ratio={}",
        spec.name,
        spec.ensemble.d_v,
        spec.ensemble.d_c,
        args.noise.header(&noise),
        args.step,
        args.refinements,
        args.divergence_ratio,
    );
    emit(
        args.out.as_deref(),
        &format!("{}{}", header(seed, &config), report.to_text()),
    )?;
    Ok(if report.kind == TransitionKind::Undefined {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn sweep(args: SweepArgs, seed: u64) -> Result<ExitCode> {
    let spec = args.decoder.build()?;
    let noise = args.noise.build()?;
    let rows = threshold_sweep(
        &spec,
        args.axis.into(),
        &noise,
        &args.values,
        &ThresholdConfig::default(),
    )?;
    let config = format!(
        "sweep lut={} dv={} dc={} {} axis={} values={:?}",
        spec.name,
        spec.ensemble.d_v,
        spec.ensemble.d_c,
        args.noise.header(&noise),
        NoiseAxis::from(args.axis).as_str(),
        args.values,
    );
    emit(
        args.out.as_deref(),
        &format!("{}{}", header(seed, &config), sweep_csv(&rows)),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn rank(args: RankArgs, seed: u64) -> Result<ExitCode> {
    let set = ingest_luts(&args.luts)?;
    if set.rules.is_empty() {
        bail!("no .lut files in {:?}", args.luts);
    }
    let ensemble = EnsembleSpec::new(args.dv, args.dc)?;
    let rank_by: FaultModel = args.model.into();
    let (p_sp, p_fd) = match (rank_by, args.p) {
        (FaultModel::FullDepth, Some(p)) => (args.p_sp, p),
        (_, Some(p)) => (p, args.p_fd),
        _ => (args.p_sp, args.p_fd),
    };
    let records = rank_candidates(
        &set,
        &ensemble,
        &NoiseParams::uniform(FaultModel::SignPreserving, p_sp)?,
        &NoiseParams::uniform(FaultModel::FullDepth, p_fd)?,
        rank_by,
        &ThresholdConfig::default(),
        1e-5,
    )?;
    let config = format!(
        "rank luts={:?} model={} p_sp={} p_fd={} dv={} dc={}",
        args.luts,
        FaultModel::from(args.model),
        p_sp,
        p_fd,
        args.dv,
        args.dc,
    );
    emit(
        args.out.as_deref(),
        &format!("{}{}", header(seed, &config), rank_csv(&records)),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: SimulateArgs, seed: u64) -> Result<ExitCode> {
    let code = parse_alist_file(&args.code)?;
    let noise = args.noise.build()?;
    let ensemble = EnsembleSpec::new(3, args.dc)?;
    let specs: Vec<DecoderSpec> = args
        .luts
        .iter()
        .map(|name| {
            let lut = load_rule(name)?;
            let label = Path::new(name)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| name.clone());
            Ok(DecoderSpec::new(label, lut, ensemble)?)
        })
        .collect::<Result<_>>()?;
    let cfg = TrialConfig {
        alpha: 0.0,
        noise,
        max_iterations: args.iters,
        seed,
        codeword_mode: if args.random_codeword {
            CodewordMode::RandomCodeword
        } else {
            CodewordMode::AllZero
        },
        early_stop: !args.no_early_stop,
    };
    let rows = ber_sweep(&code, &specs, &cfg, &args.alphas, args.trials)?;
    let config =
        format!(
        "simulate code={:?} luts={:?} {} alphas={:?} trials={} iters={} codeword={} early_stop={}",
        args.code,
        args.luts,
        args.noise.header(&noise),
        args.alphas,
        args.trials,
        args.iters,
        if args.random_codeword { "random" } else { "all-zero" },
        !args.no_early_stop,
    );
    emit(
        args.out.as_deref(),
        &format!("{}{}", header(seed, &config), ber_csv(&rows)),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn validate_lut(args: ValidateArgs) -> Result<ExitCode> {
    let text =
        std::fs::read_to_string(&args.path).with_context(|| format!("reading {:?}", args.path))?;
    match Lut::from_text(&text) {
        Ok(lut) => {
            // from_text validates; report the clean bill explicitly
            debug_assert!(lut.validate().is_empty());
            println!("{}: ok", args.path.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(faid_core::lut::LutError::Invalid(violations)) => {
            println!("{}: {} violation(s)", args.path.display(), violations.len());
            for v in violations {
                println!("  {v}");
            }
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(anyhow!(e)),
    }
}

fn enumerate(args: EnumerateArgs) -> Result<ExitCode> {
    if args.s == 3 {
        println!("count {}", faid_core::designer::count_valid_luts(3));
        println!("(7-level rules are not materialized; use `rank --luts` on rule files)");
        return Ok(ExitCode::SUCCESS);
    }
    let alphabet = MessageAlphabet::new(args.s, 1)?;
    let set = enumerate_valid_luts(&alphabet, 3)?;
    println!("count {}", set.rules.len());
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {dir:?}"))?;
        let cap = args.limit.unwrap_or(set.rules.len());
        for (name, lut) in set.rules.iter().take(cap) {
            lut.write_file(&dir.join(format!("{name}.lut")))?;
        }
        println!(
            "wrote {} files to {}",
            cap.min(set.rules.len()),
            dir.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}
