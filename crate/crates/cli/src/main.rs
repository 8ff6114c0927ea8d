//! `qe-teleport`: figure presets, custom protocol runs and the verification
//! suites of the qubit-environment teleportation simulator.
//!
//! Exit codes: 0 success, 1 a check or tolerance failed, 2 invalid input.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qe_teleport::protocol::{CorrectionConvention, Engine};
use qe_teleport::verify::VerifyConfig;

use commands::Failure;
use config::{ConfigError, Mode, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Coherence of the returned qubit against the second-window phase.
    Fig1,
    /// Entanglement of the returned qubit against the phase difference.
    Fig2,
    /// One protocol run with operators taken from the config file.
    Custom,
    /// Randomized invariant and oracle-equivalence suites.
    Verify,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fig1 => Mode::Fig1,
            ModeArg::Fig2 => Mode::Fig2,
            ModeArg::Custom => Mode::Custom,
            ModeArg::Verify => Mode::Verify,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qe-teleport",
    version,
    about = "Teleportation through dephasing qubit-environment couplings"
)]
struct Cli {
    #[arg(value_enum)]
    mode: ModeArg,
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file: CSV for fig1, fig2 and custom, JSON summary for verify.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed of the random instances (verify) or the outcome sampler (custom).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Tolerance override, repeatable; one of engine, oracle, separability, roundtrip, probability, coherence, entanglement.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// Number of random instances per verification suite.
    #[arg(long, value_name = "N")]
    count: Option<usize>,
    /// Debug switch: use a wrong Pauli correction (negative control).
    #[arg(long)]
    corrupt_correction: bool,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("tolerance `{name}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mode = Mode::from(cli.mode);
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.check_mode(mode)?;
    let tolerances = cfg.tolerances(&cli.tolerances)?;
    let psi = cfg.psi()?;
    if psi.is_some() && mode != Mode::Custom {
        return Err(ConfigError(format!("`psi` is only read in custom mode; the {mode} preset fixes it")).into());
    }
    let convention = if cli.corrupt_correction {
        CorrectionConvention::Corrupted
    } else {
        CorrectionConvention::Standard
    };
    let engine = Engine::new(convention);
    let seed = cli.seed.or(cfg.seed);
    let out = cli.out.clone().or_else(|| cfg.output.clone());

    match mode {
        Mode::Fig1 => {
            let out = out.unwrap_or_else(|| PathBuf::from("fig1.csv"));
            commands::fig1(&cfg.fig1_params()?, &engine, &tolerances, &out)
        }
        Mode::Fig2 => {
            let out = out.unwrap_or_else(|| PathBuf::from("fig2.csv"));
            commands::fig2(&cfg.fig2_params()?, &engine, &tolerances, &out)
        }
        Mode::Custom => {
            let section = cfg
                .custom
                .as_ref()
                .ok_or_else(|| ConfigError("custom mode needs a `custom` section in --config".into()))?;
            let setup = section.build(psi)?;
            commands::custom(&setup, &engine, &tolerances, seed.unwrap_or(0), out.as_deref())
        }
        Mode::Verify => {
            let mut vc = VerifyConfig {
                tolerances,
                convention,
                ..VerifyConfig::default()
            };
            if let Some(s) = seed {
                vc.seed = s;
            }
            if let Some(section) = &cfg.verify {
                if let Some(n) = section.count {
                    vc.count = n;
                }
                if let Some(dims) = &section.env_dims {
                    if dims.is_empty() || dims.iter().any(|&d| d == 0 || d > 16) {
                        return Err(ConfigError(format!(
                            "verify.env_dims: {dims:?} must be non-empty, each in 1..=16"
                        ))
                        .into());
                    }
                    vc.env_dims = dims.clone();
                }
            }
            if let Some(n) = cli.count {
                vc.count = n;
            }
            if vc.count == 0 {
                return Err(ConfigError("verify count must be positive".into()).into());
            }
            commands::verify(&vc, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("qe-teleport: {failure}");
            match failure {
                Failure::Check(_) => ExitCode::from(1),
                Failure::Config(_) => ExitCode::from(2),
            }
        }
    }
}
