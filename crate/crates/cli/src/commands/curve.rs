//! `curve`: target-supervision learning curves for domain adaptation.
//!
//! For each requested target size, samples that many target-forum
//! training posts (deterministically by seed), mixes them into the
//! source corpus with the configured upweighting, and trains two
//! systems — plain mixing and feature augmentation — reporting each
//! one's F1 on the target dev corpus. Size 0 trains on the source alone,
//! so both regimes collapse to the cross-forum baseline.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::adaptation::{mix_corpora, sample_posts, ClusterHierarchy};
use marketsieve::corpus::Corpus;
use marketsieve::evaluation::{evaluate, PostPred};
use marketsieve::learning::{train_binary, train_post_latent, Mode, Resources};
use marketsieve::{Error, Result};

use super::predict_corpus;
use crate::config::ExperimentConfig;
use crate::report::{pct, Report};

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Experiment config with [forum …] and [curve] sections
    #[arg(long)]
    config: PathBuf,
    /// Override the config's target sizes (comma-separated post counts)
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Override the config's mode (token | np | post_token | post_np)
    #[arg(long, value_parser = super::model::parse_mode)]
    mode: Option<Mode>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    size: usize,
    plain_f1: f64,
    augmented_f1: f64,
}

pub fn run(args: Args) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    let plan = cfg
        .curve
        .clone()
        .ok_or_else(|| Error::config("config has no [curve] section"))?;
    let sizes = if args.sizes.is_empty() { plan.sizes.clone() } else { args.sizes.clone() };

    let source_path = cfg.forum(&plan.source).train.as_ref().ok_or_else(|| {
        Error::config(format!("source forum `{}` has no train file", plan.source))
    })?;
    let target_train_path = cfg.forum(&plan.target).train.as_ref().ok_or_else(|| {
        Error::config(format!("target forum `{}` has no train file", plan.target))
    })?;
    let target_dev_path = cfg.forum(&plan.target).dev.as_ref().ok_or_else(|| {
        Error::config(format!("target forum `{}` has no dev file", plan.target))
    })?;
    let source = super::load_corpus(source_path)?;
    let target_train = super::load_corpus(target_train_path)?;
    let target_dev = super::load_corpus(target_dev_path)?;
    let brown = cfg
        .brown
        .as_deref()
        .map(ClusterHierarchy::read_file)
        .transpose()?;

    let f1_of = |corpus: &Corpus, augment: bool| -> Result<f64> {
        let features = cfg.features(brown.is_some(), false, augment);
        let res = Resources { brown: brown.as_ref(), gazetteer: None };
        let model = if cfg.mode.is_post() {
            train_post_latent(corpus, cfg.mode, features, cfg.train.clone(), &res)?
        } else {
            train_binary(corpus, cfg.mode, features, cfg.train.clone(), &res)?
        };
        let preds = predict_corpus(&model, &target_dev, &res)?;
        let post_preds: Vec<PostPred> = preds.iter().map(|p| p.to_post_pred()).collect();
        Ok(evaluate(&target_dev, &post_preds)?.token.f1)
    };

    let mut rows: Vec<Row> = Vec::new();
    for &size in &sizes {
        let row = if size == 0 {
            let f1 = f1_of(&source, false)?;
            Row { size, plain_f1: f1, augmented_f1: f1 }
        } else {
            let sample = sample_posts(&target_train, size, cfg.train.seed)?;
            let mixed = mix_corpora(&source, &sample, cfg.train.target_domain_weight)?;
            Row {
                size,
                plain_f1: f1_of(&mixed, false)?,
                augmented_f1: f1_of(&mixed, true)?,
            }
        };
        rows.push(row);
    }

    let mut table = String::new();
    table.push_str(&format!(
        "{:<8} {:>10} {:>10}\n",
        "size", "plain", "augmented"
    ));
    for row in &rows {
        table.push_str(&format!(
            "{:<8} {:>10} {:>10}\n",
            row.size,
            pct(row.plain_f1),
            pct(row.augmented_f1)
        ));
    }

    let data = serde_json::json!({
        "source": plan.source,
        "target": plan.target,
        "rows": rows,
    });
    let seed = cfg.train.seed;
    let mut settings = serde_json::to_value(&args)
        .map_err(|e| Error::Internal(format!("settings: {e}")))?;
    settings["resolved"] = serde_json::to_value(&cfg)
        .map_err(|e| Error::Internal(format!("settings: {e}")))?;
    Report { command: "curve", seed, settings, table, data }.emit(args.report.as_deref())
}
