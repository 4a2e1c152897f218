use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cutrank::experiment::{
    cmd_collect, cmd_evaluate, cmd_generate, cmd_solve, cmd_train, report_csv_row,
    ExperimentConfig, REPORT_HEADER,
};

#[derive(Parser)]
#[command(name = "cutrank", version, about = "Branch-and-cut MIP solver with learned root cut selection")]
struct Cli {
    /// TOML experiment config; omitted keys take their defaults.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (overrides experiment.workers; 0 = all cores).
    #[arg(short, long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write train/test instances and the manifest.
    Generate,
    /// Collect training bags: random, or epsilon-greedy when a model is given.
    Collect {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train the scoring network on the collected dataset.
    Train,
    /// Compare all six policies on the test instances.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Solve one instance file.
    Solve {
        instance: PathBuf,
        /// none | random | violation | norm_violation | distance | parallelism | cut_ranking
        #[arg(long, default_value = "cut_ranking")]
        policy: String,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> cutrank::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.experiment.workers = w;
    }
    match cli.command {
        Command::Generate => println!("{}", cmd_generate(&cfg)?.display()),
        Command::Collect { model } => println!("{}", cmd_collect(&cfg, model.as_deref())?.display()),
        Command::Train => println!("{}", cmd_train(&cfg)?.display()),
        Command::Evaluate { model } => println!("{}", cmd_evaluate(&cfg, &model)?.display()),
        Command::Solve { instance, policy, model } => {
            let r = cmd_solve(&instance, &policy, model.as_deref(), &cfg)?;
            println!("{REPORT_HEADER}\n{}", report_csv_row(&r, &policy));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
