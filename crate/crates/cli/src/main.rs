//! `b2p1`: command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error, 3 numerical
//! instability, 4 resonant forcing.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use b2p1_core::config::{parse_config, Formulation};
use b2p1_core::oracle::Form;
use b2p1_core::runner::{derive_report, run, Overrides, RunContext, Subcommand};
use b2p1_core::{Error, Regime};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Residual,
    Perturb,
    ReduceCheck,
    SolitonDemo,
    Potential,
    Derive,
    Sweep,
}

impl From<Cmd> for Subcommand {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Subcommand::Simulate,
            Cmd::Residual => Subcommand::Residual,
            Cmd::Perturb => Subcommand::Perturb,
            Cmd::ReduceCheck => Subcommand::ReduceCheck,
            Cmd::SolitonDemo => Subcommand::SolitonDemo,
            Cmd::Potential => Subcommand::Potential,
            Cmd::Derive => Subcommand::Derive,
            Cmd::Sweep => Subcommand::Sweep,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormulationArg {
    Pair,
    Scalar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Printed,
    Consistent,
}

/// Pseudospectral laboratory for (2+1)-dimensional Boussinesq systems.
#[derive(Debug, Parser)]
#[command(name = "b2p1", version)]
struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    cmd: Cmd,
    /// TOML run configuration (not needed for `derive`).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Regime: 1, 2, 3, 3st or 4.
    #[arg(long, value_name = "N")]
    case: Option<String>,
    #[arg(long, value_enum)]
    formulation: Option<FormulationArg>,
    /// Single-equation form for `residual` and scalar runs.
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    /// Use the typeset 1/6 dispersion coefficient in the KdV equation.
    #[arg(long)]
    as_printed: bool,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized initial data.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// For `derive`: print the typeset-minus-derived difference.
    #[arg(long)]
    diff_printed: bool,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error [{}]: {e}", e.code());
    ExitCode::from(e.exit_code() as u8)
}

fn derive_only(cli: &Cli, regime: Regime) -> ExitCode {
    match derive_report(regime) {
        Ok(rep) => {
            if cli.diff_printed {
                print!("{}", rep.text);
            }
            println!("{}", rep.summary());
            ExitCode::from(rep.exit_code() as u8)
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let case = match cli.case.as_deref().map(str::parse::<Regime>).transpose() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            return ExitCode::from(2);
        }
    };
    let Some(path) = &cli.config else {
        if let (Cmd::Derive, Some(r)) = (cli.cmd, case) {
            return derive_only(&cli, r);
        }
        eprintln!("error [config-missing]: --config is required (derive needs --case)");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error [config-io]: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(&Error::Config(e)),
    };
    Overrides {
        case,
        formulation: cli.formulation.map(|f| match f {
            FormulationArg::Pair => Formulation::Pair,
            FormulationArg::Scalar => Formulation::Scalar,
        }),
        form: cli.form.map(|f| match f {
            FormArg::Printed => Form::Printed,
            FormArg::Consistent => Form::Consistent,
        }),
        as_printed: cli.as_printed,
        out: cli.out.clone(),
        seed: cli.seed,
    }
    .apply(&mut cfg);
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    if let Cmd::Derive = cli.cmd {
        return derive_only(&cli, cfg.regime);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    // `--out` is taken relative to the working directory, config paths relative to the config.
    if let Some(o) = &cli.out {
        cfg.output.dir = std::env::current_dir()
            .map(|d| d.join(o))
            .unwrap_or_else(|_| o.clone());
    }
    let ctx = RunContext {
        base_dir: base,
        config_text: text,
    };
    match run(&cfg, cli.cmd.into(), &ctx) {
        Ok(o) => {
            println!("{}", o.summary);
            println!("artifacts in {}", o.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
