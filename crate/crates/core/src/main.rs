use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use noisemod::analysis::{DistinguishabilityReport, VarianceFormula};
use noisemod::detect::{ThresholdBank, ThresholdMode};
use noisemod::harness::{
    emit, parse_counts, parse_values, run_sweep, Fairness, OutputFormat, SweepSpec, SweepVariable,
};
use noisemod::{ConfigError, DerivedConstants, Scheme, SimConfig, SubchannelParams};

#[derive(Parser)]
#[command(name = "noisemod", version, about = "Noise-modulation link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BEP over a sweep of N or sigma_w.
    Simulate(SimulateArgs),
    /// Distinguishability margins for a configuration.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Samples per symbol; defaults to the config value.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormulaArg::Corrected)]
        variance_formula: FormulaArg,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print derived levels and threshold banks.
    Derive {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::All)]
    scheme: SchemeArg,
    #[arg(long)]
    config: PathBuf,
    /// `N` or `start:stop:step`; defaults to the config value.
    #[arg(long)]
    n: Option<String>,
    /// `sigma_w` or `start:stop:step`; defaults to the config value.
    #[arg(long)]
    sigma_w: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    min_bits: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FairnessArg::PerBit)]
    fairness: FairnessArg,
    #[arg(long, value_enum, default_value_t = ModeArg::NoiseAdjusted)]
    threshold_mode: ModeArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Kljn,
    Gqnm,
    Cgqnm,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FairnessArg {
    PerBit,
    PerSymbol,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Midpoint,
    NoiseAdjusted,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Verbatim,
    Corrected,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

/// Writes to stdout; a closed pipe is not an error.
fn stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Check {
            config,
            n,
            variance_formula,
            margin,
            json,
        } => check(config, n, variance_formula, margin, json),
        Command::Derive { config, json } => derive(config, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = SimConfig::load(&args.config)?;
    let ns = match &args.n {
        Some(s) => parse_counts(s).map_err(|e| config_err(format!("--n: {e}")))?,
        None => vec![cfg.samples_per_symbol],
    };
    let sigmas = match &args.sigma_w {
        Some(s) => parse_values(s).map_err(|e| config_err(format!("--sigma-w: {e}")))?,
        None => vec![cfg.channel.sigma_w],
    };
    let mut channel = cfg.channel;
    let (variable, values, samples_n) = match (ns.len(), sigmas.len()) {
        (_, 1) => {
            channel.sigma_w = sigmas[0];
            (
                SweepVariable::SamplesN,
                ns.iter().map(|&n| n as f64).collect(),
                ns[0],
            )
        }
        (1, _) => (SweepVariable::SigmaW, sigmas, ns[0]),
        _ => return Err(config_err("only one of --n and --sigma-w may be a range")),
    };
    let spec = SweepSpec {
        variable,
        values,
        config: cfg.scheme,
        channel,
        samples_n,
        schemes: match args.scheme {
            SchemeArg::Kljn => vec![Scheme::Kljn],
            SchemeArg::Gqnm => vec![Scheme::Gqnm],
            SchemeArg::Cgqnm => vec![Scheme::Cgqnm],
            SchemeArg::All => Scheme::ALL.to_vec(),
        },
        min_bits: args.min_bits,
        seed: args.seed,
        fairness: match args.fairness {
            FairnessArg::PerBit => Fairness::PerBit,
            FairnessArg::PerSymbol => Fairness::PerSymbol,
        },
        threshold_mode: match args.threshold_mode {
            ModeArg::Midpoint => ThresholdMode::Midpoint,
            ModeArg::NoiseAdjusted => ThresholdMode::NoiseAdjusted,
        },
    };
    let out = run_sweep(&spec, args.workers).map_err(config_err)?;
    for f in &out.failures {
        eprintln!("cell {} @ {}: {}", f.scheme, f.value, f.error);
    }
    if out.records.is_empty() {
        return Err(config_err("every sweep cell failed"));
    }
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    match &args.out {
        Some(path) => emit(&out.records, format, path).map_err(|e| Failure::Io(e.to_string()))?,
        None => {
            let bytes = noisemod::harness::render(&out.records, format)
                .map_err(|e| Failure::Io(e.to_string()))?;
            stdout(&bytes)?;
        }
    }
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(config_err(format!(
            "{} sweep cell(s) failed",
            out.failures.len()
        )))
    }
}

fn check(
    config: PathBuf,
    n: Option<usize>,
    formula: FormulaArg,
    margin: f64,
    json: bool,
) -> Result<(), Failure> {
    let cfg = SimConfig::load(&config)?;
    let formula = match formula {
        FormulaArg::Verbatim => VarianceFormula::Verbatim,
        FormulaArg::Corrected => VarianceFormula::CorrectedChiSquare,
    };
    let n = n.unwrap_or(cfg.samples_per_symbol);
    let report =
        DistinguishabilityReport::evaluate(&cfg.scheme, n, formula, margin).map_err(config_err)?;
    let text = if json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.to_string()
    };
    stdout(text.as_bytes())
}

#[derive(Serialize)]
struct DeriveOutput {
    sub0: SubchannelParams,
    sub1: SubchannelParams,
    constants: DerivedConstants,
    sigma_w: f64,
    banks: Vec<ThresholdBank>,
}

fn derive(config: PathBuf, json: bool) -> Result<(), Failure> {
    let cfg = SimConfig::load(&config)?;
    let (sub0, sub1) = cfg.scheme.subchannels().map_err(config_err)?;
    let constants = cfg.scheme.constants().map_err(config_err)?;
    let mut banks = vec![];
    for mode in [ThresholdMode::Midpoint, ThresholdMode::NoiseAdjusted] {
        for scheme in Scheme::ALL {
            banks.push(
                ThresholdBank::for_scheme(scheme, &cfg.scheme, &cfg.channel, mode)
                    .map_err(config_err)?,
            );
        }
    }
    let out = DeriveOutput {
        sub0,
        sub1,
        constants,
        sigma_w: cfg.channel.sigma_w,
        banks,
    };
    if json {
        let text = serde_json::to_string_pretty(&out).expect("plain data serializes") + "\n";
        return stdout(text.as_bytes());
    }
    let mut text = String::new();
    let mut row = |name: &str, xs: &[f64]| {
        let cols: Vec<String> = xs.iter().map(|x| format!("{x:>14.6e}")).collect();
        let _ = writeln!(text, "{name:<18}{}", cols.join(""));
    };
    for (name, s) in [("sub0", sub0), ("sub1", sub1)] {
        row(&format!("{name} m_L m_H"), &[s.m_low, s.m_high]);
        row(&format!("{name} var_0 var_1"), &[s.var_low, s.var_high]);
    }
    row("means", &constants.means);
    row("variances", &constants.variances);
    row("mean thresholds", &constants.mean_thresholds);
    row("var thresholds", &constants.var_thresholds);
    let shifted: Vec<f64> = constants
        .var_thresholds
        .iter()
        .map(|t| t + cfg.channel.noise_variance())
        .collect();
    row("  + sigma_w²", &shifted);
    let codes = |c: &[u8; 4]| {
        c.iter()
            .map(|k| format!("({},{})", k & 1, k >> 1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        text,
        "{:<18}{}",
        "mean level bits",
        codes(&constants.mean_codes)
    );
    let _ = writeln!(
        text,
        "{:<18}{}",
        "var level bits",
        codes(&constants.var_codes)
    );
    stdout(text.as_bytes())
}
