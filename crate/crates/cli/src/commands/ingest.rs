//! `ingest`: annotated and raw posts in, one canonical corpus file out.
//!
//! Annotated inputs are given as `annotator=path` where the path is a
//! single post file or a directory of them; the file stem is the post
//! id, so the same stem under different annotators means the same post.
//! Posts seen from two or more annotators get a majority-merged gold
//! layer; single-annotator posts adopt that annotator's layer as gold.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args as ClapArgs;
use serde::Serialize;

use marketsieve::agreement::merge_majority;
use marketsieve::corpus::{
    attach_syntax, compute_scope_mask, parse_annotated, parse_raw, read_conll, tokenize, Corpus,
    Entry,
};
use marketsieve::{Error, Result};

use crate::report::Report;

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Forum id stamped on every ingested post
    #[arg(long)]
    forum: String,
    /// Annotated input, as annotator=path (file or directory); repeatable
    #[arg(value_name = "ANNOTATOR=PATH")]
    annotated: Vec<String>,
    /// Unannotated posts (file or directory); repeatable
    #[arg(long)]
    raw: Vec<PathBuf>,
    /// Directory of dependency parses, one <post-id>.conll per post
    #[arg(long)]
    syntax: Option<PathBuf>,
    /// Canonical corpus file to write
    #[arg(long)]
    out: PathBuf,
    /// Also write a full report file here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed recorded in the report (ingestion itself is deterministic)
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

/// Post files under `path`: the file itself, or every regular file in
/// the directory, sorted by name. Post id = file stem.
fn post_files(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let stem = |p: &Path| -> Result<String> {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Error::config(format!("{}: no file name", p.display())))
    };
    if path.is_dir() {
        let mut out = Vec::new();
        for dir_entry in std::fs::read_dir(path)? {
            let p = dir_entry?.path();
            if p.is_file() {
                out.push((stem(&p)?, p));
            }
        }
        out.sort();
        Ok(out)
    } else {
        Ok(vec![(stem(path)?, path.to_path_buf())])
    }
}

pub fn run(args: Args) -> Result<()> {
    if args.annotated.is_empty() && args.raw.is_empty() {
        return Err(Error::config(
            "nothing to ingest: pass annotator=path inputs and/or --raw",
        ));
    }

    // post id -> [(annotator, file)]
    let mut annotated: BTreeMap<String, Vec<(String, PathBuf)>> = BTreeMap::new();
    for spec in &args.annotated {
        let Some((annotator, path)) = spec.split_once('=') else {
            return Err(Error::config(format!(
                "annotated input `{spec}` is not annotator=path"
            )));
        };
        for (post_id, file) in post_files(Path::new(path))? {
            annotated
                .entry(post_id)
                .or_default()
                .push((annotator.to_string(), file));
        }
    }
    let mut raw: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in &args.raw {
        for (post_id, file) in post_files(path)? {
            if annotated.contains_key(&post_id) {
                return Err(Error::config(format!(
                    "post `{post_id}` appears both annotated and raw"
                )));
            }
            if raw.insert(post_id.clone(), file).is_some() {
                return Err(Error::config(format!(
                    "post `{post_id}` appears in two raw inputs"
                )));
            }
        }
    }

    let mut entries: Vec<Entry> = Vec::new();
    let mut n_layers = 0usize;
    let mut flag_histogram: BTreeMap<char, usize> = BTreeMap::new();

    for (post_id, mut versions) in annotated {
        versions.sort();
        let mut parsed = Vec::with_capacity(versions.len());
        for (annotator, file) in &versions {
            let text = std::fs::read_to_string(file)?;
            let p = parse_annotated(&args.forum, &post_id, annotator, &text).map_err(|e| {
                match e {
                    Error::Parse { line, msg } => {
                        Error::format(file.display().to_string(), line, msg)
                    }
                    other => other,
                }
            })?;
            parsed.push((file.clone(), p));
        }
        // all annotators must have annotated the same underlying text
        let reference: Vec<&str> = parsed[0].1.doc.tokens().iter().map(|t| t.text.as_str()).collect();
        for (file, p) in &parsed[1..] {
            let tokens: Vec<&str> = p.doc.tokens().iter().map(|t| t.text.as_str()).collect();
            if tokens != reference {
                return Err(Error::format(
                    file.display().to_string(),
                    0,
                    format!("post `{post_id}`: tokens disagree with the first annotator's copy"),
                ));
            }
        }

        let doc = parsed[0].1.doc.clone();
        let layers: Vec<_> = parsed.into_iter().map(|(_, p)| p.layer).collect();
        n_layers += layers.len();
        for layer in &layers {
            for flag in &layer.flags {
                *flag_histogram.entry(flag.letter()).or_insert(0) += 1;
            }
        }
        let gold = merge_majority(&layers, &doc)?;
        let mut entry = Entry::new(doc);
        entry.layers = layers;
        entry.gold = Some(gold);
        entries.push(entry);
    }

    for (post_id, file) in raw {
        let text = std::fs::read_to_string(&file)?;
        let doc = compute_scope_mask(tokenize(parse_raw(&args.forum, &post_id, &text)));
        entries.push(Entry::new(doc));
    }
    entries.sort_by(|a, b| a.doc.post.post_id.cmp(&b.doc.post.post_id));

    // attach parses where a .conll file exists for the post
    let mut n_parsed = 0usize;
    if let Some(syntax_dir) = &args.syntax {
        for entry in &mut entries {
            let parse_path = syntax_dir.join(format!("{}.conll", entry.doc.post.post_id));
            if parse_path.is_file() {
                let sentences = read_conll(&parse_path)?;
                entry.doc = attach_syntax(entry.doc.clone(), &sentences)?;
                n_parsed += 1;
            }
        }
    }

    let corpus = Corpus::new(entries);
    for entry in &corpus.entries {
        entry
            .validate()
            .map_err(|msg| Error::Internal(format!(
                "ingested post {}/{} failed validation: {msg}",
                entry.doc.post.forum_id, entry.doc.post.post_id
            )))?;
    }
    marketsieve::corpus::write_canonical(&corpus, &args.out)?;

    let n_tokens: usize = corpus.entries.iter().map(|e| e.doc.n_tokens()).sum();
    let n_gold = corpus
        .entries
        .iter()
        .filter(|e| !e.gold_indices().is_empty())
        .count();
    let mut table = String::new();
    table.push_str(&format!("posts           {}\n", corpus.len()));
    table.push_str(&format!("tokens          {n_tokens}\n"));
    table.push_str(&format!("layers          {n_layers}\n"));
    table.push_str(&format!("gold posts      {n_gold}\n"));
    table.push_str(&format!("parsed posts    {n_parsed}\n"));
    table.push_str("flags           ");
    if flag_histogram.is_empty() {
        table.push_str("none");
    } else {
        let parts: Vec<String> = flag_histogram
            .iter()
            .map(|(letter, n)| format!("{letter}={n}"))
            .collect();
        table.push_str(&parts.join(" "));
    }
    table.push('\n');

    let data = serde_json::json!({
        "posts": corpus.len(),
        "tokens": n_tokens,
        "layers": n_layers,
        "gold_posts": n_gold,
        "parsed_posts": n_parsed,
        "flags": flag_histogram.iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
        "out": args.out.display().to_string(),
    });
    Report {
        command: "ingest",
        seed: args.seed,
        settings: serde_json::to_value(&args)
            .map_err(|e| Error::Internal(format!("settings: {e}")))?,
        table,
        data,
    }
    .emit(args.report.as_deref())
}
