use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ephkin::{load_config, EquilibriumQuery, Stiffness};

/// Generalized-statistics electron-phonon kinetics.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, env = "EPHKIN_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    /// Rate-evaluation threads. 1 is the bit-exact reference.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Seed for the random states drawn by `validate`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a run and write timeseries.csv and snapshots.
    Simulate { config: PathBuf },
    /// Equilibrium moments at (T, μ), or (T, μ) and occupations for given
    /// moments. Without flags the moments of the initial state are matched.
    Equilibrium {
        config: PathBuf,
        #[command(flatten)]
        query: Query,
    },
    /// Check statistics invariants, conservation and entropy production.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Query {
    #[arg(long, requires = "mu", conflicts_with_all = ["count", "energy"])]
    temperature: Option<f64>,
    #[arg(long, requires = "temperature")]
    mu: Option<f64>,
    #[arg(long, requires = "energy")]
    count: Option<f64>,
    #[arg(long, requires = "count")]
    energy: Option<f64>,
}

impl Query {
    fn resolve(&self) -> EquilibriumQuery {
        match (self.temperature, self.mu, self.count, self.energy) {
            (Some(temperature), Some(mu), _, _) => EquilibriumQuery::Params { temperature, mu },
            (_, _, Some(count), Some(energy)) => EquilibriumQuery::Targets { count, energy },
            _ => EquilibriumQuery::FromInitial,
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(config)?;
            let dir = cli
                .output_dir
                .clone()
                .unwrap_or_else(|| cfg.output.directory.clone());
            let summary = ephkin::simulate(&cfg, &dir, cli.workers)?;
            let mut out = stdout.lock();
            writeln!(
                out,
                "status: {:?}, {} accepted steps, {} rejected, final D = {:e}",
                summary.status, summary.accepted_steps, summary.rejected_steps, summary.final_d
            )?;
            for f in &summary.files {
                writeln!(out, "wrote {}", f.display())?;
            }
        }
        Command::Equilibrium { config, query } => {
            let cfg = load_config(config)?;
            ephkin::equilibrium(&cfg, query.resolve(), &mut stdout.lock())?;
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            let report = ephkin::validate(&cfg, cli.seed);
            report
                .write(&mut stdout.lock())
                .context("writing the report")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Stiffness>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
