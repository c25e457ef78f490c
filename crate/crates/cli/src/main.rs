use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use projres_cli::parse::parse;
use projres_cli::run::{self, Command, RunResult, DEFAULT_N_MAX};

#[derive(Parser)]
#[command(
    name = "projres",
    version,
    about = "Minimal projective resolutions, Koszul-type certification, and horseshoe diagrams over quotients of path algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a minimal projective resolution and print its Betti table
    Resolve {
        /// Input file
        file: PathBuf,
        /// Module name from the file
        module: String,
        /// Deepest homological level to build
        #[arg(long = "n-max", default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        /// Machine-readable output only
        #[arg(long)]
        machine: bool,
    },
    /// Certify a module against a generation-degree profile
    Koszul {
        file: PathBuf,
        module: String,
        /// koszul | dkoszul:<d> | piecewise:<d>:<p> | custom:<c,...> | infer
        #[arg(long)]
        delta: String,
        #[arg(long = "n-max", default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long)]
        machine: bool,
    },
    /// Decide whether a short exact sequence admits a minimal horseshoe
    Mhl {
        file: PathBuf,
        /// Sequence name from the file
        ses: String,
        #[arg(long = "n-max", default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long)]
        machine: bool,
    },
    /// Build the horseshoe diagram and report its shapes level by level
    Horseshoe {
        file: PathBuf,
        ses: String,
        /// Push through non-minimal levels instead of stopping at the gate
        #[arg(long)]
        classic: bool,
        #[arg(long = "n-max", default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long)]
        machine: bool,
    },
    /// Run a randomized cross-check suite and report the tally
    Audit {
        /// equivalents | iff-mhl | pd-formula | qk-transfer | betti-vs-criteria
        suite: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        machine: bool,
    },
}

fn with_workspace(
    file: &PathBuf,
    machine: bool,
    cmd: Command,
) -> RunResult {
    let source = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            return RunResult { code: 3, out: format!("error: cannot read {}: {e}\n", file.display()) }
        }
    };
    match parse(&source) {
        Ok(ws) => run::run(&ws, &cmd, machine),
        Err(e) => RunResult { code: 3, out: run::render_error(&e) },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Resolve { file, module, n_max, machine } => {
            with_workspace(&file, machine, Command::Resolve { module, n_max })
        }
        Cmd::Koszul { file, module, delta, n_max, machine } => {
            with_workspace(&file, machine, Command::Koszul { module, delta, n_max })
        }
        Cmd::Mhl { file, ses, n_max, machine } => {
            with_workspace(&file, machine, Command::Mhl { ses, n_max })
        }
        Cmd::Horseshoe { file, ses, classic, n_max, machine } => {
            with_workspace(&file, machine, Command::Horseshoe { ses, classic, n_max })
        }
        Cmd::Audit { suite, trials, seed, machine } => run::audit(&suite, trials, seed, machine),
    };
    if result.code == 3 {
        eprint!("{}", result.out);
    } else {
        print!("{}", result.out);
    }
    ExitCode::from(result.code as u8)
}
