//! `xdomain`: the within/cross-forum system matrix.
//!
//! Trains each system variant on the configured training forums and
//! scores it on every evaluation forum's dev corpus. Gazetteer variants
//! use the evaluation forum's own training annotations, so forums
//! without training annotations get a "-" in gazetteer rows; the same
//! convention applies to Brown rows when no cluster file is configured.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::adaptation::{build_gazetteer, ClusterHierarchy, Gazetteer};
use marketsieve::corpus::{Corpus, Entry};
use marketsieve::evaluation::{evaluate, EvalReport, PostPred};
use marketsieve::learning::{
    build_dictionary, predict_dict, train_binary, train_post_latent, Mode, Resources,
};
use marketsieve::{Error, Result};

use super::predict_corpus;
use crate::config::ExperimentConfig;
use crate::report::{pct, Report};

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Experiment config with [forum …] and [xdomain] sections
    #[arg(long)]
    config: PathBuf,
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Dict,
    Binary,
    BinaryBrown,
    BinaryGaz,
    Post,
    PostBrown,
    PostGaz,
}

impl Variant {
    const ALL: [Variant; 7] = [
        Variant::Dict,
        Variant::Binary,
        Variant::BinaryBrown,
        Variant::BinaryGaz,
        Variant::Post,
        Variant::PostBrown,
        Variant::PostGaz,
    ];

    fn label(self) -> &'static str {
        match self {
            Variant::Dict => "dict",
            Variant::Binary => "binary",
            Variant::BinaryBrown => "binary+brown",
            Variant::BinaryGaz => "binary+gaz",
            Variant::Post => "post",
            Variant::PostBrown => "post+brown",
            Variant::PostGaz => "post+gaz",
        }
    }

    fn is_post(self) -> bool {
        matches!(self, Variant::Post | Variant::PostBrown | Variant::PostGaz)
    }

    fn wants_brown(self) -> bool {
        matches!(self, Variant::BinaryBrown | Variant::PostBrown)
    }

    fn wants_gazetteer(self) -> bool {
        matches!(self, Variant::BinaryGaz | Variant::PostGaz)
    }
}

#[derive(Serialize)]
struct Cell {
    variant: &'static str,
    forum: String,
    /// None when the variant's resources are unavailable for this forum.
    report: Option<EvalReport>,
}

fn dict_predictions(dict: &std::collections::BTreeSet<String>, corpus: &Corpus) -> Vec<PostPred> {
    corpus
        .entries
        .iter()
        .map(|e| PostPred::from_tokens(predict_dict(&e.doc, dict)))
        .collect()
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
        .xdomain
        .clone()
        .ok_or_else(|| Error::config("config has no [xdomain] section"))?;

    // candidate granularity is shared; binary/post is per variant
    let (binary_mode, post_mode) = match cfg.mode {
        Mode::Token | Mode::PostToken => (Mode::Token, Mode::PostToken),
        Mode::Np | Mode::PostNp => (Mode::Np, Mode::PostNp),
    };

    let mut train_entries: Vec<Entry> = Vec::new();
    for forum in &plan.train {
        let path = cfg.forum(forum).train.as_ref().ok_or_else(|| {
            Error::config(format!("training forum `{forum}` has no train file"))
        })?;
        train_entries.extend(super::load_corpus(path)?.entries);
    }
    let train_corpus = Corpus::new(train_entries);

    let mut dev_corpora: BTreeMap<&str, Corpus> = BTreeMap::new();
    let mut forum_gazetteers: BTreeMap<&str, Option<Gazetteer>> = BTreeMap::new();
    for forum in &plan.eval {
        let path = cfg.forum(forum).dev.as_ref().ok_or_else(|| {
            Error::config(format!("evaluation forum `{forum}` has no dev file"))
        })?;
        dev_corpora.insert(forum, super::load_corpus(path)?);
        let gaz = match &cfg.forum(forum).train {
            Some(train_path) => {
                let forum_train = super::load_corpus(train_path)?;
                Some(build_gazetteer(&forum_train, cfg.gazetteer_min_count))
            }
            None => None,
        };
        forum_gazetteers.insert(forum, gaz);
    }

    let brown = cfg
        .brown
        .as_deref()
        .map(ClusterHierarchy::read_file)
        .transpose()?;

    let dict = build_dictionary(&train_corpus);
    let mut cells: Vec<Cell> = Vec::new();
    for variant in Variant::ALL {
        if variant == Variant::Dict {
            for forum in &plan.eval {
                let dev = &dev_corpora[forum.as_str()];
                let preds = dict_predictions(&dict, dev);
                cells.push(Cell {
                    variant: variant.label(),
                    forum: forum.clone(),
                    report: Some(evaluate(dev, &preds)?),
                });
            }
            continue;
        }
        if variant.wants_brown() && brown.is_none() {
            for forum in &plan.eval {
                cells.push(Cell {
                    variant: variant.label(),
                    forum: forum.clone(),
                    report: None,
                });
            }
            continue;
        }

        let mode = if variant.is_post() { post_mode } else { binary_mode };
        // gazetteer variants retrain per forum against that forum's own
        // gazetteer; everything else trains once and scores every forum
        let shared_model = if variant.wants_gazetteer() {
            None
        } else {
            let features = cfg.features(variant.wants_brown(), false, false);
            let res = Resources { brown: brown.as_ref(), gazetteer: None };
            Some(if variant.is_post() {
                train_post_latent(&train_corpus, mode, features, cfg.train.clone(), &res)?
            } else {
                train_binary(&train_corpus, mode, features, cfg.train.clone(), &res)?
            })
        };

        for forum in &plan.eval {
            let dev = &dev_corpora[forum.as_str()];
            let (model, gazetteer) = if variant.wants_gazetteer() {
                let Some(gaz) = &forum_gazetteers[forum.as_str()] else {
                    cells.push(Cell {
                        variant: variant.label(),
                        forum: forum.clone(),
                        report: None,
                    });
                    continue;
                };
                let features = cfg.features(false, true, false);
                let res = Resources { brown: None, gazetteer: Some(gaz) };
                let model = if variant.is_post() {
                    train_post_latent(&train_corpus, mode, features, cfg.train.clone(), &res)?
                } else {
                    train_binary(&train_corpus, mode, features, cfg.train.clone(), &res)?
                };
                (model, Some(gaz))
            } else {
                (shared_model.clone().expect("trained above"), None)
            };
            let res = Resources { brown: brown.as_ref(), gazetteer };
            let preds = predict_corpus(&model, dev, &res)?;
            let post_preds: Vec<PostPred> = preds.iter().map(|p| p.to_post_pred()).collect();
            cells.push(Cell {
                variant: variant.label(),
                forum: forum.clone(),
                report: Some(evaluate(dev, &post_preds)?),
            });
        }
    }

    // variant rows x forum column groups (P R F1 Acc each)
    let mut table = String::new();
    table.push_str(&format!("{:<14}", ""));
    for forum in &plan.eval {
        table.push_str(&format!(" {:^31}", forum));
    }
    table.push('\n');
    table.push_str(&format!("{:<14}", "variant"));
    for _ in &plan.eval {
        table.push_str(&format!(
            " {:>7} {:>7} {:>7} {:>7}",
            "P", "R", "F1", "Acc"
        ));
    }
    table.push('\n');
    for variant in Variant::ALL {
        table.push_str(&format!("{:<14}", variant.label()));
        for forum in &plan.eval {
            let cell = cells
                .iter()
                .find(|c| c.variant == variant.label() && &c.forum == forum)
                .expect("every (variant, forum) cell was produced");
            match &cell.report {
                Some(r) => table.push_str(&format!(
                    " {:>7} {:>7} {:>7} {:>7}",
                    pct(r.token.precision),
                    pct(r.token.recall),
                    pct(r.token.f1),
                    pct(r.post_accuracy)
                )),
                None => table.push_str(&format!(
                    " {:>7} {:>7} {:>7} {:>7}",
                    "-", "-", "-", "-"
                )),
            }
        }
        table.push('\n');
    }

    let data = serde_json::json!({ "cells": cells });
    let seed = cfg.train.seed;
    let mut settings = serde_json::to_value(&args)
        .map_err(|e| Error::Internal(format!("settings: {e}")))?;
    settings["resolved"] = serde_json::to_value(&cfg)
        .map_err(|e| Error::Internal(format!("settings: {e}")))?;
    Report { command: "xdomain", seed, settings, table, data }.emit(args.report.as_deref())
}
