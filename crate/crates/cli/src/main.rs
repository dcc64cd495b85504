use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riesz_lab::selftest::{self, Fault};
use riesz_lab::{run_scenario, LabError, LabResult, Outcome, RunConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "riesz-lab", version, about = "Damped Euler-Riesz flow laboratory")]
struct Cli {
    /// Upper bound on concurrent runs (also capped by RIESZ_LAB_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults apply when omitted.
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. --set params.alpha=0.7
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Validate and print the resolved configuration without running.
    #[arg(long)]
    dry_run: bool,

    /// Output directory (same as --set output=DIR).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    MultiplierSign,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write its diagnostics.
    Simulate(RunArgs),
    /// Simulate and fit exponential decay rates of the norms.
    Decay(RunArgs),
    /// Check the energy identity and the momentum law under step halving.
    EnergyAudit(RunArgs),
    /// Compare the overdamped system with porous-medium flow over a list of epsilon.
    RelaxLimit(RunArgs),
    /// Linear growth rates about the constant state.
    Dispersion(RunArgs),
    /// Constants of the a priori estimates.
    Constants(RunArgs),
    /// Run the built-in oracle suite.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

fn load(args: &RunArgs, kind: ScenarioKind) -> LabResult<RunConfig> {
    let mut cfg = RunConfig::load(args.config.as_deref(), &args.set)?;
    if let Some(dir) = &args.output {
        cfg.output = dir.clone();
    }
    if args.dry_run {
        cfg.validate(kind)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> LabResult<Outcome> {
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (ScenarioKind::Simulate, a),
        Command::Decay(a) => (ScenarioKind::Decay, a),
        Command::EnergyAudit(a) => (ScenarioKind::EnergyAudit, a),
        Command::RelaxLimit(a) => (ScenarioKind::RelaxLimit, a),
        Command::Dispersion(a) => (ScenarioKind::Dispersion, a),
        Command::Constants(a) => (ScenarioKind::Constants, a),
        Command::Selftest { inject_fault } => {
            let fault = inject_fault.map(|FaultArg::MultiplierSign| Fault::FlipMultiplierSign);
            return Ok(selftest::outcome(&selftest::run(fault)));
        }
    };
    let cfg = load(&args, kind)?;
    if args.dry_run {
        return Ok(Outcome {
            lines: vec![cfg.to_toml()],
            summary: serde_json::Value::Null,
            failure: None,
        });
    }
    run_scenario(kind, &cfg, cli.jobs)
}

fn report(err: &LabError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            match &outcome.failure {
                Some(err) => report(err),
                None => ExitCode::SUCCESS,
            }
        }
        Err(err) => report(&err),
    }
}
