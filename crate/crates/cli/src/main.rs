//! Command-line front end of the permissiveness solver.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "permissive", version, about = "Permissiveness of acyclic timed automata and games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and report its shape.
    Validate { model: PathBuf },
    /// Compute the permissiveness function of every location.
    Solve {
        model: PathBuf,
        /// Write the JSON document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop after this many backward steps.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Evaluate a solved function at one valuation.
    Eval {
        doc: PathBuf,
        #[arg(long)]
        loc: String,
        /// Clock values such as `x=1/2,y=0`; missing clocks are 0.
        #[arg(long, default_value = "")]
        val: String,
    },
    /// Print a CSV grid of a solved function.
    Plot {
        doc: PathBuf,
        #[arg(long)]
        loc: String,
        /// One or two clock names, comma separated.
        #[arg(long)]
        clocks: Option<String>,
        /// `start:stop:step`, stop inclusive.
        #[arg(long, default_value = "0:2.5:0.05")]
        range: String,
        /// Values of the clocks not plotted.
        #[arg(long, default_value = "")]
        val: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the exact solution with the grid oracle.
    Compare {
        model: PathBuf,
        #[arg(long, default_value = "1/32")]
        delta: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Location to sample; the initial location by default.
        #[arg(long)]
        loc: Option<String>,
        /// Compare at this valuation instead of random samples.
        #[arg(long)]
        val: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => commands::validate(&model),
        Command::Solve { model, out, max_iter } => commands::solve(&model, out.as_deref(), max_iter),
        Command::Eval { doc, loc, val } => commands::eval(&doc, &loc, &val),
        Command::Plot { doc, loc, clocks, range, val, out } => {
            commands::plot(&doc, &loc, clocks.as_deref(), &range, &val, out.as_deref())
        }
        Command::Compare { model, delta, samples, seed, loc, val } => {
            commands::compare(&model, &delta, samples, seed, loc.as_deref(), val.as_deref())
        }
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
