use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quadsim::{run, workers_from_env, CliError, Command, Options};

#[derive(Parser)]
#[command(name = "quadsim", version, about = "Adiabatic transfer simulations, parameter sweeps and protocol comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve one protocol and report the transfer fidelity.
    Simulate(RunArgs),
    /// Scan one axis (duration, amplitude_scale or detuning_offset) for every protocol.
    Sweep(RunArgs),
    /// Sweep the error axes and rank protocols by worst-case error and dominance.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (key = value lines, optional [sweep] section).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Write the state trajectory (simulate only).
    #[arg(long)]
    trajectory: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Compare(a) => (Command::Compare, a),
    };
    let opts = Options { config: args.config, out: args.out, plot: args.plot, trajectory: args.trajectory };

    let result = workers_from_env().map_err(CliError::from).and_then(|workers| {
        if let Some(n) = workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .expect("global thread pool is configured once");
        }
        run(command, &opts, &mut std::io::stdout().lock())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
