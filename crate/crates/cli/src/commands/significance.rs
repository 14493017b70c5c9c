//! `significance`: paired bootstrap test between two prediction files on
//! the same corpus.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::evaluation::{
    bootstrap_test, evaluate, BootstrapMetric, PostPred,
};
use marketsieve::predictions::read_predictions;
use marketsieve::{Error, Result};

use super::align_predictions;
use crate::report::{pct, Report};

fn parse_metric(s: &str) -> std::result::Result<BootstrapMetric, String> {
    match s {
        "token_f1" => Ok(BootstrapMetric::TokenF1),
        "type_f1" => Ok(BootstrapMetric::TypeF1),
        "post_accuracy" => Ok(BootstrapMetric::PostAccuracy),
        other => Err(format!(
            "unknown metric `{other}` (token_f1, type_f1, post_accuracy)"
        )),
    }
}

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Corpus with gold annotations both systems were run on
    #[arg(long)]
    corpus: PathBuf,
    /// Predictions of the candidate system
    #[arg(long)]
    a: PathBuf,
    /// Predictions of the baseline system
    #[arg(long)]
    b: PathBuf,
    /// token_f1 | type_f1 | post_accuracy
    #[arg(long, value_parser = parse_metric, default_value = "token_f1")]
    metric: BootstrapMetric,
    /// Bootstrap resamples
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    #[arg(long, default_value_t = 13)]
    seed: u64,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
}

fn observed(metric: BootstrapMetric, corpus: &marketsieve::corpus::Corpus, preds: &[PostPred]) -> Result<f64> {
    let report = evaluate(corpus, preds)?;
    Ok(match metric {
        BootstrapMetric::TokenF1 => report.token.f1,
        BootstrapMetric::TypeF1 => report.types.f1,
        BootstrapMetric::PostAccuracy => report.post_accuracy,
    })
}

pub fn run(args: Args) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let preds_a = align_predictions(&corpus, &read_predictions(&args.a)?)?;
    let preds_b = align_predictions(&corpus, &read_predictions(&args.b)?)?;

    let metric_a = observed(args.metric, &corpus, &preds_a)?;
    let metric_b = observed(args.metric, &corpus, &preds_b)?;
    let p = bootstrap_test(
        args.metric,
        &corpus,
        &preds_a,
        &preds_b,
        args.resamples,
        args.seed,
    )?;

    let mut table = String::new();
    table.push_str(&format!("metric          {:?}\n", args.metric));
    table.push_str(&format!("a               {} ({})\n", pct(metric_a), args.a.display()));
    table.push_str(&format!("b               {} ({})\n", pct(metric_b), args.b.display()));
    table.push_str(&format!("delta           {}\n", pct(metric_a - metric_b)));
    table.push_str(&format!("resamples       {}\n", args.resamples));
    table.push_str(&format!("p_value         {p:.4}\n"));

    let data = serde_json::json!({
        "metric_a": metric_a,
        "metric_b": metric_b,
        "delta": metric_a - metric_b,
        "p_value": p,
        "resamples": args.resamples,
    });
    Report {
        command: "significance",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}
