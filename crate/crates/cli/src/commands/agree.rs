//! `agree`: inter-annotator agreement over a corpus with multi-annotator
//! layers, pooled per forum and per annotator count.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::agreement::{corpus_agreement, KappaItems};
use marketsieve::{Error, Result};

use crate::report::Report;

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Canonical corpus with at least one multi-annotator post
    #[arg(long)]
    corpus: PathBuf,
    /// Score all tokens instead of only scope-eligible ones
    #[arg(long)]
    all_tokens: bool,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed recorded in the report (agreement is deterministic)
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let items = if args.all_tokens {
        KappaItems::All
    } else {
        KappaItems::Eligible
    };
    let reports = corpus_agreement(&corpus, items)?;

    let mut table = String::new();
    table.push_str(&format!(
        "{:<16} {:>10} {:>8} {:>8} {:>10} {:>10}\n",
        "forum", "annotators", "posts", "items", "observed", "kappa"
    ));
    for r in &reports {
        let kappa = r
            .kappa
            .map(|k| format!("{k:.4}"))
            .unwrap_or_else(|| "undefined".to_string());
        table.push_str(&format!(
            "{:<16} {:>10} {:>8} {:>8} {:>10.4} {:>10}\n",
            r.forum, r.n_annotators, r.n_posts, r.n_items, r.observed, kappa
        ));
    }

    Report {
        command: "agree",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data: serde_json::to_value(&reports)
            .map_err(|e| Error::Internal(format!("report: {e}")))?,
    }
    .emit(args.report.as_deref())
}
