use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use foodchain_cli::{run_file, Overrides};

/// Equilibria, Turing analysis and pattern simulations for the three-species
/// food chain with a strong Allee effect.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// equilibria, turing, turing-table, sim1d, sim2d, decay or overexploit
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// Root under which the run directory is created.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides initial.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps and 2D stencils.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    let o = Overrides { out: args.out, seed: args.seed };
    match run_file(&args.command, &args.config, &o) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
