//! `train`, `predict`, and `eval`: the model lifecycle.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::evaluation::{evaluate, oov_decompose, type_prf_macro, EvalReport};
use marketsieve::features::FeatureConfig;
use marketsieve::learning::{train_binary, train_post_latent, LinearModel, Mode, TrainConfig};
use marketsieve::predictions::{read_predictions, write_predictions};
use marketsieve::{Error, Result};

use super::{align_predictions, predict_corpus, LoadedResources};
use crate::report::{pct, Report};

pub(crate) fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "token" => Ok(Mode::Token),
        "np" => Ok(Mode::Np),
        "post_token" => Ok(Mode::PostToken),
        "post_np" => Ok(Mode::PostNp),
        other => Err(format!(
            "unknown mode `{other}` (token, np, post_token, post_np)"
        )),
    }
}

#[derive(ClapArgs, Serialize)]
pub struct TrainArgs {
    /// Canonical corpus with merged gold layers
    #[arg(long)]
    corpus: PathBuf,
    /// token | np | post_token | post_np
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    /// Model file to write
    #[arg(long)]
    model_out: PathBuf,
    /// Brown cluster file; enables cluster features
    #[arg(long)]
    brown: Option<PathBuf>,
    /// Gazetteer file; enables the in-gazetteer feature
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Double every feature into a domain-specific copy
    #[arg(long)]
    augment: bool,
    #[arg(long, default_value_t = TrainConfig::default().iterations)]
    iterations: usize,
    #[arg(long, default_value_t = TrainConfig::default().l1_strength)]
    l1_strength: f64,
    #[arg(long, default_value_t = TrainConfig::default().adagrad_eta)]
    adagrad_eta: f64,
    #[arg(long, default_value_t = TrainConfig::default().adagrad_delta)]
    adagrad_delta: f64,
    #[arg(long, default_value_t = TrainConfig::default().cost_fp)]
    cost_fp: f64,
    #[arg(long, default_value_t = TrainConfig::default().cost_fn)]
    cost_fn: f64,
    #[arg(long, default_value_t = TrainConfig::default().singleton_weight)]
    singleton_weight: f64,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn train(args: TrainArgs) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let loaded = LoadedResources::from_paths(args.brown.as_deref(), args.gazetteer.as_deref())?;
    let features = FeatureConfig {
        use_brown: args.brown.is_some(),
        use_gazetteer: args.gazetteer.is_some(),
        domain_augment: args.augment,
        ..FeatureConfig::default()
    };
    let train_config = TrainConfig {
        iterations: args.iterations,
        l1_strength: args.l1_strength,
        adagrad_eta: args.adagrad_eta,
        adagrad_delta: args.adagrad_delta,
        cost_fp: args.cost_fp,
        cost_fn: args.cost_fn,
        singleton_weight: args.singleton_weight,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let model = if args.mode.is_post() {
        train_post_latent(&corpus, args.mode, features, train_config, &loaded.as_refs())?
    } else {
        train_binary(&corpus, args.mode, features, train_config, &loaded.as_refs())?
    };
    model.save(&args.model_out)?;

    let mut table = String::new();
    table.push_str(&format!("mode            {:?}\n", model.mode));
    table.push_str(&format!("posts           {}\n", corpus.len()));
    table.push_str(&format!("features        {}\n", model.vocab.len()));
    table.push_str(&format!("nonzero         {}\n", model.n_nonzero()));
    table.push_str(&format!("model           {}\n", args.model_out.display()));

    let data = serde_json::json!({
        "posts": corpus.len(),
        "features": model.vocab.len(),
        "nonzero_weights": model.n_nonzero(),
        "model": args.model_out.display().to_string(),
    });
    Report {
        command: "train",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}

#[derive(ClapArgs, Serialize)]
pub struct PredictArgs {
    /// Corpus to predict over
    #[arg(long)]
    corpus: PathBuf,
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Prediction file to write
    #[arg(long)]
    out: PathBuf,
    /// Brown cluster file (required if the model uses cluster features)
    #[arg(long)]
    brown: Option<PathBuf>,
    /// Gazetteer file (required if the model uses gazetteer features)
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let model = LinearModel::load(&args.model)?;
    let loaded =
        LoadedResources::for_model(&model, args.brown.as_deref(), args.gazetteer.as_deref())?;
    let preds = predict_corpus(&model, &corpus, &loaded.as_refs())?;
    write_predictions(&args.out, &preds)?;

    let nonempty = preds.iter().filter(|p| !p.tokens.is_empty()).count();
    let total: usize = preds.iter().map(|p| p.tokens.len()).sum();
    let mut table = String::new();
    table.push_str(&format!("posts           {}\n", corpus.len()));
    table.push_str(&format!("predicted posts {nonempty}\n"));
    table.push_str(&format!("predictions     {total}\n"));
    table.push_str(&format!("out             {}\n", args.out.display()));

    let data = serde_json::json!({
        "posts": corpus.len(),
        "predicted_posts": nonempty,
        "predictions": total,
        "out": args.out.display().to_string(),
    });
    Report {
        command: "predict",
        seed: model.train.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}

#[derive(ClapArgs, Serialize)]
pub struct EvalArgs {
    /// Corpus with gold annotations to score against
    #[arg(long)]
    corpus: PathBuf,
    /// Prediction file from `predict`
    #[arg(long)]
    preds: PathBuf,
    /// Training corpus; enables the seen/unseen recall split
    #[arg(long)]
    train_corpus: Option<PathBuf>,
    /// Also report macro-averaged product metrics
    #[arg(long)]
    macro_types: bool,
    /// Row label in the table
    #[arg(long, default_value = "system")]
    name: String,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed recorded in the report (evaluation is deterministic)
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

/// The Tokens | Products | Posts table.
pub fn eval_table(rows: &[(String, EvalReport)]) -> String {
    let mut table = String::new();
    table.push_str(&format!(
        "{:<16} {:>7} {:>7} {:>7}   {:>7} {:>7} {:>7}   {:>7}\n",
        "", "P", "R", "F1", "P", "R", "F1", "Acc"
    ));
    table.push_str(&format!(
        "{:<16} {:^23}   {:^23}   {:>7}\n",
        "", "Tokens", "Products", "Posts"
    ));
    let mut any_degenerate = false;
    for (name, r) in rows {
        let mut mark = |degenerate: bool| {
            if degenerate {
                any_degenerate = true;
                "*"
            } else {
                ""
            }
        };
        let tp = format!("{}{}", pct(r.token.precision), mark(r.token.degenerate_precision));
        let yp = format!("{}{}", pct(r.types.precision), mark(r.types.degenerate_precision));
        table.push_str(&format!(
            "{:<16} {:>7} {:>7} {:>7}   {:>7} {:>7} {:>7}   {:>7}\n",
            name,
            tp,
            pct(r.token.recall),
            pct(r.token.f1),
            yp,
            pct(r.types.recall),
            pct(r.types.f1),
            pct(r.post_accuracy),
        ));
    }
    if any_degenerate {
        table.push_str("* no predictions; precision reported as 0\n");
    }
    table
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let corpus = super::load_corpus(&args.corpus)?;
    let preds = read_predictions(&args.preds)?;
    let post_preds = align_predictions(&corpus, &preds)?;
    let mut eval_report = evaluate(&corpus, &post_preds)?;
    if let Some(train_path) = &args.train_corpus {
        let train = super::load_corpus(train_path)?;
        eval_report.oov = Some(oov_decompose(&train, &corpus, &post_preds)?);
    }

    let mut table = eval_table(&[(args.name.clone(), eval_report.clone())]);
    table.push_str(&format!("scored posts    {}\n", eval_report.n_posts_scored));
    let mut macro_value = None;
    if args.macro_types {
        let m = type_prf_macro(&corpus, &post_preds)?;
        table.push_str(&format!(
            "products macro  P {} R {} F1 {}\n",
            pct(m.precision),
            pct(m.recall),
            pct(m.f1)
        ));
        macro_value = Some(m);
    }
    if let Some(oov) = &eval_report.oov {
        let show = |x: Option<f64>| x.map(pct).unwrap_or_else(|| "-".to_string());
        table.push_str(&format!(
            "oov             rate {} R_seen {} R_oov {}\n",
            pct(oov.oov_rate),
            show(oov.recall_seen),
            show(oov.recall_oov)
        ));
    }

    let data = serde_json::json!({
        "report": eval_report,
        "macro_types": macro_value,
    });
    Report {
        command: "eval",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}
