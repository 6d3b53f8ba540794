//! `revcheck`: instance files in, reports out.
//!
//! Exit codes: 0 when every requested check holds, 1 when any check fails,
//! 2 on usage or parse errors. Reports go to standard output; diagnostics to
//! standard error.

mod commands;
mod doc;
mod instance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    cmd_compute, cmd_decompose, cmd_gen, cmd_reduce, cmd_verify, CliError, GenKindArg,
    GenSizeArgs, Mode, SuiteArg, What,
};
use doc::Format;
use revcheck_core::Caps;

#[derive(Parser)]
#[command(
    name = "revcheck",
    version,
    about = "Exact revenue benchmarks, optimal-mechanism LPs, and bound checks \
             for a single additive buyer with correlated item values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Arithmetic mode for computations.
    #[arg(long, global = true, value_enum, default_value = "rational")]
    mode: Mode,

    /// Feasibility tolerance used in float mode.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Largest joint support an instance may expand to.
    #[arg(long, global = true, default_value_t = 200)]
    max_atoms: usize,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Seed for generator-backed commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compute revenue benchmarks for one instance file.
    Compute {
        /// Instance file (JSON).
        file: PathBuf,
        /// Which quantities to compute.
        #[arg(long, value_enum, default_value = "all")]
        what: What,
    },
    /// Decompose an instance at its per-item thresholds and report the tail
    /// events.
    Decompose {
        /// Instance file (JSON).
        file: PathBuf,
    },
    /// Rewrite a correlated instance into its semi-independent form and
    /// re-verify the reduction identities.
    Reduce {
        /// Instance file (JSON); kind must be common_base_value or linear.
        file: PathBuf,
        /// Where to write the reduced instance (default: FILE with the
        /// extension replaced by .reduced.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a check suite over one instance file or a generated corpus.
    Verify {
        /// Instance file (JSON); omit when using --gen.
        file: Option<PathBuf>,
        /// Generate instances of this kind instead of reading a file.
        #[arg(long, value_enum)]
        gen: Option<GenKindArg>,
        /// Seed range `a..b` (half-open) or a single seed; with --gen.
        #[arg(long)]
        seeds: Option<String>,
        /// Which checks to run.
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Write a deterministic random instance file.
    Gen {
        /// Instance kind to draw.
        #[arg(long, value_enum)]
        kind: GenKindArg,
        /// Where to write the instance (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sizes: GenSizeArgs,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let caps = Caps { max_atoms: cli.max_atoms, tol: cli.tol, ..Caps::default() };
    let doc = match &cli.command {
        Command::Compute { file, what } => cmd_compute(file, *what, cli.mode, &caps)?,
        Command::Decompose { file } => cmd_decompose(file, cli.mode, &caps)?,
        Command::Reduce { file, out } => cmd_reduce(file, out.as_deref(), &caps)?,
        Command::Verify { file, gen, seeds, suite } => {
            cmd_verify(file.as_deref(), *gen, seeds.as_deref(), *suite, &caps)?
        }
        Command::Gen { kind, out, sizes } => {
            if let Some(text) = cmd_gen(*kind, cli.seed, sizes, out.as_deref())? {
                print!("{text}");
            }
            return Ok(true);
        }
    };
    print!("{}", doc::render(&doc, cli.format));
    Ok(doc.verdict())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
