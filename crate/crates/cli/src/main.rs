use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use homsim_cli::{
    cmd_classify, cmd_ensemble, cmd_parse_check, cmd_run, cmd_sweep, emit, CircuitSource, Engine,
    EnsembleSpec, Format, Param, ResultRow, RunConfig,
};
use homsim_core::circuit::{parse_angle, Bindings};

#[derive(Parser)]
#[command(
    name = "homsim",
    version,
    about = "Two-photon interference and interferometer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a circuit once.
    Run(RunArgs),
    /// Evaluate a circuit over a linear grid of one parameter.
    Sweep(SweepArgs),
    /// Print the verdict for every phase-basis superposition rule.
    Classify(OutputArgs),
    /// Random-phase ensemble statistics for the hom or mzi builtin.
    Ensemble(EnsembleArgs),
    /// Parse and validate a circuit, printing its canonical form.
    ParseCheck(CircuitArgs),
}

#[derive(Args)]
struct CircuitArgs {
    /// Builtin name (hom, mzi, one_input_bs) or path to a circuit file.
    #[arg(value_name = "CIRCUIT")]
    positional: Option<String>,
    #[arg(
        long = "circuit",
        value_name = "FILE|BUILTIN",
        conflicts_with = "positional"
    )]
    flag: Option<String>,
}

impl CircuitArgs {
    fn source(&self, default: Option<&str>) -> anyhow::Result<CircuitSource> {
        let text = self
            .flag
            .as_deref()
            .or(self.positional.as_deref())
            .or(default)
            .context("no circuit given; pass a builtin name or --circuit <file>")?;
        Ok(CircuitSource::resolve(text))
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Radians, or forms such as pi/2, -pi/2, 2pi, 3*pi/4.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    zeta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long, value_enum, default_value_t = Engine::Wave)]
    engine: Engine,
    #[command(flatten)]
    phases: PhaseArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    param: Param,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    to: f64,
    #[arg(long)]
    steps: usize,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long, value_enum, default_value_t = Engine::Wave)]
    engine: Engine,
    /// Number of samples.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, env = "HOMSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Fix the random phase instead of drawing it uniformly.
    #[command(flatten)]
    phases: PhaseArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn angle(text: &str) -> Result<f64, String> {
    parse_angle(text).map_err(|e| format!("{}: '{}'", e.message, text))
}

fn run_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::new(args.circuit.source(None)?, args.engine);
    config.params = Bindings::new(args.phases.theta, args.phases.zeta);
    config.format = args.output.format;
    config.out = args.output.out.clone();
    Ok(config)
}

fn write_rows(rows: &[ResultRow], output: &OutputArgs) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    emit(rows, output.format, output.out.as_deref(), &mut stdout)?;
    stdout.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let rows = cmd_run(&run_config(&args)?)?;
            write_rows(&rows, &args.output)
        }
        Command::Sweep(args) => {
            let config = run_config(&args.run)?;
            let rows = cmd_sweep(&config, args.param, args.from, args.to, args.steps)?;
            write_rows(&rows, &args.run.output)
        }
        Command::Classify(output) => write_rows(&cmd_classify()?, &output),
        Command::Ensemble(args) => {
            let mut config = RunConfig::new(args.circuit.source(Some("hom"))?, args.engine);
            config.params = Bindings::new(args.phases.theta, args.phases.zeta);
            config.ensemble = Some(EnsembleSpec {
                n: args.n,
                seed: args.seed,
            });
            write_rows(&cmd_ensemble(&config)?, &args.output)
        }
        Command::ParseCheck(args) => {
            print!("{}", cmd_parse_check(&args.source(None)?)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
