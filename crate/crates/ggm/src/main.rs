use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use ggm::commands::{self, OutputFormat, RunContext};

#[derive(Parser)]
#[command(name = "ggm", version, about = "Gaussian graphical model structure learning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a graph from a random ensemble.
    Generate(Args),
    /// Build a walk-summable model on a graph.
    Synthesize(Args),
    /// Draw i.i.d. samples from a stored model.
    Sample(Args),
    /// Learn a graph from samples or an exact covariance.
    Learn(Args),
    /// Run Gaussian loopy belief propagation on a stored model.
    Lbp(Args),
    /// Evaluate sample-complexity lower bounds.
    Bounds(Args),
    /// Run a Monte Carlo sweep.
    Sweep(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Args {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Run directory.
    #[arg(long, default_value = "run")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

type Handler = fn(&RunContext) -> commands::Result<commands::Manifest>;

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (name, args, f): (&str, &Args, Handler) = match &cli.command {
        Command::Generate(a) => ("generate", a, commands::generate),
        Command::Synthesize(a) => ("synthesize", a, commands::synthesize),
        Command::Sample(a) => ("sample", a, commands::sample_cmd),
        Command::Learn(a) => ("learn", a, commands::learn),
        Command::Lbp(a) => ("lbp", a, commands::lbp),
        Command::Bounds(a) => ("bounds", a, commands::bounds),
        Command::Sweep(a) => ("sweep", a, commands::sweep_cmd),
    };
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
    }
    let ctx = RunContext {
        config_path: args.config.clone(),
        out: args.out.clone(),
        seed: args.seed,
        format: args.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
    };
    let manifest = f(&ctx).with_context(|| format!("{name} failed"))?;
    for o in &manifest.outputs {
        println!("{}", args.out.join(o).display());
    }
    Ok(())
}
