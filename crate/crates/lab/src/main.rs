use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tunnelsim::{bundled, execute, load_text, RayonRuntime, RunError, Scenario};

#[derive(Debug, Parser)]
#[command(name = "tunnelsim", version, about = "1D matter-wave tunnelling, Larmor clock, cooling and causal-response simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run {
        /// Path to a `.scn` file, or a name printed by `list`.
        scenario: String,
        /// Output directory (default: `out/<scenario name>`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Parse and validate only.
        #[arg(long)]
        validate_only: bool,
    },
    /// List bundled scenarios.
    List,
}

fn run(scenario: &str, out_dir: Option<PathBuf>, seed: Option<u64>, jobs: Option<usize>, validate_only: bool) -> Result<(), RunError> {
    let text = load_text(scenario)?;
    let mut sc = Scenario::parse(&text)?;
    if let Some(s) = seed {
        sc = sc.with_seed(s);
    }
    if validate_only {
        println!("{}: ok ({})", sc.name, sc.kind);
        return Ok(());
    }
    let rt = RayonRuntime::new(jobs.unwrap_or(0)).map_err(|e| RunError::Numerical(format!("thread pool: {e}")))?;
    let dir = out_dir.unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
    let (report, manifest) = execute(&sc, &rt, &dir)?;
    println!("{} ({}, seed {}) -> {}", sc.name, sc.kind, sc.seed, dir.display());
    let width = report.summary.iter().map(|s| s.quantity.len()).max().unwrap_or(0);
    for s in &report.summary {
        println!("  {:width$}  {:>14.6e} {}", s.quantity, s.value, s.unit);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("  wrote {} files in {:.1} s", manifest.files.len() + 1, manifest.wall_time_s);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for name in bundled::names() {
                let kind = Scenario::parse(bundled::get(name).unwrap_or_default()).map(|s| s.kind).unwrap_or_else(|_| "?".into());
                println!("{name:24} {kind}");
            }
            Ok(())
        }
        Command::Run { scenario, out_dir, seed, jobs, validate_only } => run(&scenario, out_dir, seed, jobs, validate_only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
