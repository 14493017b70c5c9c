//! Command-line driver for the marketsieve pipeline.
//!
//! Every command is deterministic given its inputs, flags, and seed, and
//! stamps its output with a hash of the exact settings it ran with.
//! Exit codes: 0 success, 1 input/format error, 2 config/usage error,
//! 3 internal invariant violation.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "marketsieve", version, about = "Product extraction from marketplace forum posts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a canonical corpus from annotated/raw posts and parses
    Ingest(commands::ingest::Args),
    /// Inter-annotator agreement over a multi-annotator corpus
    Agree(commands::agree::Args),
    /// Train a product extractor
    Train(commands::model::TrainArgs),
    /// Run a trained model over a corpus
    Predict(commands::model::PredictArgs),
    /// Score predictions against gold annotations
    Eval(commands::model::EvalArgs),
    /// Induce Brown clusters from corpus text
    Cluster(commands::resources::ClusterArgs),
    /// Harvest a product gazetteer from gold annotations
    Gazetteer(commands::resources::GazetteerArgs),
    /// Paired bootstrap test between two prediction files
    Significance(commands::significance::Args),
    /// Within/cross-forum evaluation matrix over system variants
    Xdomain(commands::xdomain::Args),
    /// Target-supervision learning curve for domain adaptation
    Curve(commands::curve::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Agree(args) => commands::agree::run(args),
        Command::Train(args) => commands::model::train(args),
        Command::Predict(args) => commands::model::predict(args),
        Command::Eval(args) => commands::model::eval(args),
        Command::Cluster(args) => commands::resources::cluster(args),
        Command::Gazetteer(args) => commands::resources::gazetteer(args),
        Command::Significance(args) => commands::significance::run(args),
        Command::Xdomain(args) => commands::xdomain::run(args),
        Command::Curve(args) => commands::curve::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
