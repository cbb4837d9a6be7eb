mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};

/// Experiments in minimizing the maximum of N convex Lipschitz functions
/// under an emulated quantum query-cost model.
///
/// All smoothing uses natural logarithms (`eps' = eps / (2 ln N)`). Every
/// command is deterministic given its configuration and seed, except for
/// wall-clock fields in JSON reports.
#[derive(Parser)]
#[command(name = "minmax", version, about, long_about)]
struct Cli {
    /// Path to a JSON configuration file (schema depends on the subcommand;
    /// omit to run the built-in smoke defaults).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Override the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the number of trials, where the command sweeps trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output directory (default: $MINMAX_OUT_DIR or ./out).
    #[arg(long, global = true)]
    out_dir: Option<std::path::PathBuf>,

    /// Worker threads for trial fan-out (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one end-to-end minimization and write a JSON report.
    Solve,
    /// Sampler exactness and query-cost sweep over N for both arms.
    BenchSampler,
    /// End-to-end BROO charge scaling over N for both arms.
    BenchScaling,
    /// Build shuffled hard instances and record progress traces.
    Hardness,
    /// Chained-search simulator sweeps.
    Searchsim,
}

fn main() {
    let cli = Cli::parse();
    let common = config::CommonArgs {
        config: cli.config,
        seed: cli.seed,
        trials: cli.trials,
        out_dir: cli.out_dir,
        jobs: cli.jobs,
    };
    let result = match cli.command {
        Command::Solve => commands::solve::run(&common),
        Command::BenchSampler => commands::bench_sampler::run(&common),
        Command::BenchScaling => commands::bench_scaling::run(&common),
        Command::Hardness => commands::hardness::run(&common),
        Command::Searchsim => commands::searchsim::run(&common),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            // Configuration and I/O problems exit 2, runtime failures exit 1.
            let code = if err.is::<config::ConfigError>() { 2 } else { 1 };
            std::process::exit(code);
        }
    }
}
