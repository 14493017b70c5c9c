//! `cluster` and `gazetteer`: induced adaptation resources.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::adaptation::{brown_cluster, build_gazetteer};
use marketsieve::{Error, Result};

use crate::report::Report;

#[derive(ClapArgs, Serialize)]
pub struct ClusterArgs {
    /// Corpus whose text to cluster (annotations not required)
    #[arg(long)]
    corpus: PathBuf,
    /// Cluster file to write (bitstring<TAB>word<TAB>count lines)
    #[arg(long)]
    out: PathBuf,
    /// Number of clusters to keep active during merging
    #[arg(long, default_value_t = 50)]
    num_clusters: usize,
    /// Drop words seen fewer times than this
    #[arg(long, default_value_t = 10)]
    min_count: u64,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed recorded in the report (clustering is deterministic)
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

pub fn cluster(args: ClusterArgs) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let hierarchy = brown_cluster(
        &corpus.lowercased_sentences(),
        args.num_clusters,
        args.min_count,
    )?;
    hierarchy.write_file(&args.out)?;

    let mut table = String::new();
    table.push_str(&format!("posts           {}\n", corpus.len()));
    table.push_str(&format!("words clustered {}\n", hierarchy.len()));
    table.push_str(&format!("out             {}\n", args.out.display()));

    let data = serde_json::json!({
        "posts": corpus.len(),
        "words": hierarchy.len(),
        "out": args.out.display().to_string(),
    });
    Report {
        command: "cluster",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}

#[derive(ClapArgs, Serialize)]
pub struct GazetteerArgs {
    /// Corpus with gold annotations to harvest product stems from
    #[arg(long)]
    corpus: PathBuf,
    /// Gazetteer file to write
    #[arg(long)]
    out: PathBuf,
    /// Keep stems annotated at least this many times
    #[arg(long, default_value_t = 4)]
    min_count: u32,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed recorded in the report (harvesting is deterministic)
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

pub fn gazetteer(args: GazetteerArgs) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let gaz = build_gazetteer(&corpus, args.min_count);
    gaz.write_file(&args.out)?;

    let mut table = String::new();
    table.push_str(&format!("posts           {}\n", corpus.len()));
    table.push_str(&format!("entries         {}\n", gaz.len()));
    table.push_str(&format!("out             {}\n", args.out.display()));

    let data = serde_json::json!({
        "posts": corpus.len(),
        "entries": gaz.len(),
        "out": args.out.display().to_string(),
    });
    Report {
        command: "gazetteer",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}
