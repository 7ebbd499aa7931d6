use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perconoise::experiments::{run, ExperimentKind, ExperimentSpec};

#[derive(Parser)]
#[command(name = "perconoise", version, about = "Noise sensitivity experiments for the Gilbert disc model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key-value spec file.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run every exact and exhaustive cross-check.
    OracleSuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            spec,
            seed,
            threads,
            out_dir,
        } => ExperimentSpec::load(&spec).and_then(|s| run(&s, seed, threads, &out_dir)),
        Command::OracleSuite { seed, threads, out_dir } => {
            let spec = ExperimentSpec::new(ExperimentKind::OracleSuite, Some(seed));
            run(&spec, None, threads, &out_dir)
        }
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            out.table.write_csv(out.seed, &mut stdout).ok();
            if out.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: at least one check failed", out.kind);
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
