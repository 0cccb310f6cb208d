use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use efmrf::bench::cmd_benchmark;
use efmrf::commands::{cmd_density_grid, cmd_fit, cmd_simulate};
use efmrf::{CliError, Config, Scenario};

#[derive(Parser)]
#[command(name = "efmrf", version, about = "Structure learning for copula Markov random fields")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for benchmark repetitions.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a graph to a CSV file with a header row.
    Fit { input: PathBuf },
    /// Sample a synthetic data set and its ground truth.
    Simulate { scenario: Scenario },
    /// Score methods on repeated synthetic data sets.
    Benchmark {
        scenario: Scenario,
        /// Comma-separated methods, overriding benchmark.methods.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Tabulate a copula density with standard normal margins.
    DensityGrid {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long)]
        df: Option<f64>,
        /// Grid points per axis.
        #[arg(long)]
        size: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Fit { input } => {
            let report = cmd_fit(&input, &config, cli.seed, &cli.out)?;
            eprintln!(
                "{}: {} edges, {} components, lambda {:.4}",
                report.method.name(),
                report.adjacency.edge_count(),
                report.partition.component_count(),
                report.selected_lambda
            );
        }
        Command::Simulate { scenario } => {
            let (graph, table) = cmd_simulate(scenario, &config, cli.seed, &cli.out)?;
            eprintln!("{scenario}: {} rows, {} edges", table.data.rows(), graph.adjacency.edge_count());
        }
        Command::Benchmark { scenario, methods, repetitions } => {
            if let Some(m) = methods {
                config.set("benchmark.methods", &m)?;
            }
            if let Some(r) = repetitions {
                config.set("benchmark.repetitions", &r.to_string())?;
            }
            let (rows, _) = cmd_benchmark(scenario, &config, cli.seed, cli.jobs, &cli.out)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            eprintln!("{scenario}: {} runs, {failed} failed", rows.len());
        }
        Command::DensityGrid { family, theta, df, size } => {
            let overrides = [
                ("density.family", family),
                ("density.theta", theta.map(|v| v.to_string())),
                ("density.df", df.map(|v| v.to_string())),
                ("density.grid_size", size.map(|v| v.to_string())),
            ];
            for (key, value) in overrides {
                if let Some(v) = value {
                    config.set(key, &v)?;
                }
            }
            cmd_density_grid(&config, &cli.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
