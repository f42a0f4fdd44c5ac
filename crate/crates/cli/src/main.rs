mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "trikoorn", version, about = "Koornwinder polynomials on the triangle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone, Copy)]
pub struct BasisArgs {
    /// Maximum total degree.
    #[arg(long = "N", default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification sweeps and write residual reports.
    Verify {
        /// jacobi, ladders, operators, appendix, eigen or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Text report path; the JSON twin goes to `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a sparse operator and export it in Matrix Market format.
    BuildOp {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        basis: BasisArgs,
        /// Matrix file; the descriptor is written next to it as `.toml`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a built-in function or sampled CSV in the basis.
    Expand {
        /// one, x, y, z, poly:<n,k>, runge, or a CSV path with columns x,y,value.
        #[arg(long)]
        input: String,
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve (λ I - L) u = f with the total-degree eigen-operator L.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Built-in id, or a CSV with columns n,k,value or x,y,value.
        #[arg(long)]
        rhs: String,
        #[command(flatten)]
        basis: BasisArgs,
        /// Coefficient CSV path; grid values go to `<out stem>.grid.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid subdivisions per edge.
        #[arg(long, default_value_t = 10)]
        grid: usize,
    },
    /// Print the available operators, suites and tolerances.
    Info,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { suite, seed, out } => commands::verify(&suite, seed, out.as_deref()),
        Command::BuildOp { name, basis, out } => commands::build_op(&name, basis, out.as_deref()),
        Command::Expand { input, basis, out } => commands::expand(&input, basis, out.as_deref()),
        Command::Solve { lambda, rhs, basis, out, grid } => commands::solve(lambda, &rhs, basis, out.as_deref(), grid),
        Command::Info => commands::info(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
