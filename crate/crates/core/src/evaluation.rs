//! Scoring extracted product mentions against gold annotations.
//!
//! Three metric families, all micro-averaged across posts: token-level
//! precision/recall/F1 over product token indices; type-level P/R/F1 over
//! fuzzy-deduplicated surface strings; and post-level accuracy of the
//! first extracted type. Phrase-level systems score through the same
//! functions because phrases match on their head token: a span prediction
//! scores as its head index and takes the head's surface string as its
//! type.
//!
//! Tokens outside annotation scope are dropped from both predictions and
//! gold before any counting, and a paired bootstrap over posts decides
//! whether one system's advantage over another survives resampling.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::stem;
use crate::corpus::{Corpus, Entry};
use crate::error::{Error, Result};

/// Precision/recall/F1 triple. `degenerate_precision` flags the 0/0 case
/// (no predictions at all), which is reported as precision 0 rather than
/// being dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate_precision: bool,
}

impl Prf {
    fn new(tp: f64, pred: f64, gold: f64) -> Prf {
        let degenerate = pred == 0.0;
        let precision = if pred > 0.0 { tp / pred } else { 0.0 };
        let recall = if gold > 0.0 { tp / gold } else { 0.0 };
        Prf { precision, recall, f1: f1(precision, recall), degenerate_precision: degenerate }
    }

    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        Prf::new(tp as f64, (tp + fp) as f64, (tp + fn_) as f64)
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// One system's output for one post, aligned with a corpus entry.
/// `tokens` are global token indices claimed as products; `first` is the
/// system's single headline pick (for binary systems, the earliest
/// prediction in the document).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostPred {
    pub tokens: BTreeSet<usize>,
    pub first: Option<usize>,
}

impl PostPred {
    /// Wraps a token set, taking the earliest token as the headline pick.
    pub fn from_tokens(tokens: BTreeSet<usize>) -> PostPred {
        let first = tokens.iter().next().copied();
        PostPred { tokens, first }
    }
}

/// Everything `eval` reports for one system on one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub token: Prf,
    pub types: Prf,
    pub post_accuracy: f64,
    pub n_posts_scored: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oov: Option<OovReport>,
}

/// Recall split by whether a gold token's stem appeared as a gold product
/// in the training corpus. A side with no tokens reports `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OovReport {
    pub oov_rate: f64,
    pub recall_seen: Option<f64>,
    pub recall_oov: Option<f64>,
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Fuzzy type equality: stems must sit within an edit distance budget
/// that scales with the longer stem — 0 edits up to length 4, 1 through
/// length 7, 2 beyond. Symmetric and reflexive but not transitive
/// ("bid" ~ "bide" chains don't collapse).
pub fn types_match(a: &str, b: &str) -> bool {
    let a = stem(&a.to_lowercase());
    let b = stem(&b.to_lowercase());
    let len = a.chars().count().max(b.chars().count());
    let budget = match len {
        0..=4 => 0,
        5..=7 => 1,
        _ => 2,
    };
    levenshtein(&a, &b) <= budget
}

/// Deduplicates type strings under [`types_match`], keeping the earliest
/// representative of each fuzzy-equal group.
pub fn canonical_types<I>(types: I) -> Vec<String>
where
    I: IntoIterator<Item = String>,
{
    let mut kept: Vec<String> = Vec::new();
    for t in types {
        if !kept.iter().any(|k| types_match(k, &t)) {
            kept.push(t);
        }
    }
    kept
}

/// Predicted token indices with scope-ineligible positions removed.
fn eligible(entry: &Entry, tokens: &BTreeSet<usize>) -> BTreeSet<usize> {
    tokens
        .iter()
        .copied()
        .filter(|&i| i < entry.doc.n_tokens() && entry.doc.is_eligible(i))
        .collect()
}

fn gold_tokens(entry: &Entry) -> BTreeSet<usize> {
    eligible(entry, &entry.gold_indices())
}

/// Per-post sufficient statistics; every metric is a ratio of sums of
/// these, which is what lets the bootstrap resample posts cheaply.
#[derive(Debug, Clone, Copy, Default)]
struct PostStats {
    tp: usize,
    fp: usize,
    fn_: usize,
    type_tp: usize,
    type_pred: usize,
    type_recalled: usize,
    type_gold: usize,
    scored: bool,
    first_correct: bool,
}

fn post_types(entry: &Entry, tokens: &BTreeSet<usize>) -> Vec<String> {
    canonical_types(tokens.iter().map(|&i| entry.doc.token(i).text.clone()))
}

fn post_stats(entry: &Entry, pred: &PostPred) -> PostStats {
    let gold = gold_tokens(entry);
    let predicted = eligible(entry, &pred.tokens);
    let tp = predicted.intersection(&gold).count();

    let gold_types = post_types(entry, &gold);
    let pred_types = post_types(entry, &predicted);
    let type_tp = pred_types
        .iter()
        .filter(|p| gold_types.iter().any(|g| types_match(p, g)))
        .count();
    let type_recalled = gold_types
        .iter()
        .filter(|g| pred_types.iter().any(|p| types_match(p, g)))
        .count();

    let scored = !gold.is_empty();
    let first_correct = scored
        && pred.first.is_some_and(|i| {
            i < entry.doc.n_tokens() && {
                let text = &entry.doc.token(i).text;
                gold_types.iter().any(|g| types_match(text, g))
            }
        });

    PostStats {
        tp,
        fp: predicted.len() - tp,
        fn_: gold.len() - tp,
        type_tp,
        type_pred: pred_types.len(),
        type_recalled,
        type_gold: gold_types.len(),
        scored,
        first_correct,
    }
}

fn collect_stats(corpus: &Corpus, preds: &[PostPred]) -> Result<Vec<PostStats>> {
    if corpus.len() != preds.len() {
        return Err(Error::config(format!(
            "predictions cover {} posts but the corpus has {}",
            preds.len(),
            corpus.len()
        )));
    }
    Ok(corpus
        .entries
        .iter()
        .zip(preds)
        .map(|(e, p)| post_stats(e, p))
        .collect())
}

fn sum_token_prf(stats: &[PostStats]) -> Prf {
    let tp: usize = stats.iter().map(|s| s.tp).sum();
    let fp: usize = stats.iter().map(|s| s.fp).sum();
    let fn_: usize = stats.iter().map(|s| s.fn_).sum();
    Prf::from_counts(tp, fp, fn_)
}

fn sum_type_prf(stats: &[PostStats]) -> Prf {
    let tp: f64 = stats.iter().map(|s| s.type_tp as f64).sum();
    let pred: f64 = stats.iter().map(|s| s.type_pred as f64).sum();
    let recalled: f64 = stats.iter().map(|s| s.type_recalled as f64).sum();
    let gold: f64 = stats.iter().map(|s| s.type_gold as f64).sum();
    let degenerate = pred == 0.0;
    let precision = if pred > 0.0 { tp / pred } else { 0.0 };
    let recall = if gold > 0.0 { recalled / gold } else { 0.0 };
    Prf { precision, recall, f1: f1(precision, recall), degenerate_precision: degenerate }
}

fn sum_accuracy(stats: &[PostStats]) -> (f64, usize) {
    let scored = stats.iter().filter(|s| s.scored).count();
    let correct = stats.iter().filter(|s| s.first_correct).count();
    let acc = if scored > 0 { correct as f64 / scored as f64 } else { 0.0 };
    (acc, scored)
}

/// Micro-averaged token precision/recall/F1 over aligned predictions.
pub fn token_prf(corpus: &Corpus, preds: &[PostPred]) -> Result<Prf> {
    Ok(sum_token_prf(&collect_stats(corpus, preds)?))
}

/// Micro-averaged type-level precision/recall/F1. Both sides are
/// canonicalized per post before counting; a prediction is correct if it
/// fuzzy-matches any gold type of its post.
pub fn type_prf(corpus: &Corpus, preds: &[PostPred]) -> Result<Prf> {
    Ok(sum_type_prf(&collect_stats(corpus, preds)?))
}

/// Macro-averaged variant of [`type_prf`]: per-post precision and recall
/// are averaged over posts that have any gold or predicted type, and F1
/// is the harmonic mean of those averages.
pub fn type_prf_macro(corpus: &Corpus, preds: &[PostPred]) -> Result<Prf> {
    let stats = collect_stats(corpus, preds)?;
    let mut n = 0usize;
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    let mut any_pred = false;
    for s in &stats {
        if s.type_pred == 0 && s.type_gold == 0 {
            continue;
        }
        n += 1;
        any_pred |= s.type_pred > 0;
        p_sum += if s.type_pred > 0 { s.type_tp as f64 / s.type_pred as f64 } else { 0.0 };
        r_sum += if s.type_gold > 0 { s.type_recalled as f64 / s.type_gold as f64 } else { 1.0 };
    }
    if n == 0 {
        return Ok(Prf { precision: 0.0, recall: 0.0, f1: 0.0, degenerate_precision: true });
    }
    let p = p_sum / n as f64;
    let r = r_sum / n as f64;
    Ok(Prf { precision: p, recall: r, f1: f1(p, r), degenerate_precision: !any_pred })
}

/// Fraction of gold-nonempty posts whose headline pick fuzzy-matches some
/// gold type. Posts where the system picked nothing count as wrong;
/// corpora with no gold-nonempty posts cannot be scored.
pub fn post_accuracy(corpus: &Corpus, preds: &[PostPred]) -> Result<(f64, usize)> {
    let stats = collect_stats(corpus, preds)?;
    let (acc, scored) = sum_accuracy(&stats);
    if scored == 0 {
        return Err(Error::config(
            "no post in the corpus has gold product annotations to score against",
        ));
    }
    Ok((acc, scored))
}

/// All metric families in one pass.
pub fn evaluate(corpus: &Corpus, preds: &[PostPred]) -> Result<EvalReport> {
    let stats = collect_stats(corpus, preds)?;
    let (post_accuracy, n_posts_scored) = sum_accuracy(&stats);
    if n_posts_scored == 0 {
        return Err(Error::config(
            "no post in the corpus has gold product annotations to score against",
        ));
    }
    Ok(EvalReport {
        token: sum_token_prf(&stats),
        types: sum_type_prf(&stats),
        post_accuracy,
        n_posts_scored,
        oov: None,
    })
}

/// Splits token recall by training-set familiarity: a gold token is
/// "seen" when its stem occurs among the training corpus's gold product
/// stems, and recall is computed separately on each side.
pub fn oov_decompose(
    train: &Corpus,
    eval_corpus: &Corpus,
    preds: &[PostPred],
) -> Result<OovReport> {
    if eval_corpus.len() != preds.len() {
        return Err(Error::config(format!(
            "predictions cover {} posts but the corpus has {}",
            preds.len(),
            eval_corpus.len()
        )));
    }
    let known: BTreeSet<String> = train.gold_stem_counts().into_keys().collect();
    let (mut seen, mut seen_hit, mut oov, mut oov_hit) = (0usize, 0usize, 0usize, 0usize);
    for (entry, pred) in eval_corpus.entries.iter().zip(preds) {
        let predicted = eligible(entry, &pred.tokens);
        for &g in &gold_tokens(entry) {
            let hit = predicted.contains(&g);
            if known.contains(&stem(&entry.doc.token(g).lower)) {
                seen += 1;
                seen_hit += usize::from(hit);
            } else {
                oov += 1;
                oov_hit += usize::from(hit);
            }
        }
    }
    let total = seen + oov;
    let ratio = |hit: usize, n: usize| (n > 0).then(|| hit as f64 / n as f64);
    Ok(OovReport {
        oov_rate: if total > 0 { oov as f64 / total as f64 } else { 0.0 },
        recall_seen: ratio(seen_hit, seen),
        recall_oov: ratio(oov_hit, oov),
    })
}

/// Which summary statistic a significance test compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMetric {
    TokenF1,
    TypeF1,
    PostAccuracy,
}

fn metric_of(metric: BootstrapMetric, stats: &[PostStats], idx: &[usize]) -> f64 {
    let picked: Vec<PostStats> = idx.iter().map(|&i| stats[i]).collect();
    match metric {
        BootstrapMetric::TokenF1 => sum_token_prf(&picked).f1,
        BootstrapMetric::TypeF1 => sum_type_prf(&picked).f1,
        BootstrapMetric::PostAccuracy => sum_accuracy(&picked).0,
    }
}

/// Paired bootstrap over posts: resamples the corpus with replacement and
/// reports the fraction of resamples in which system A's advantage over
/// system B fails to hold (its metric delta is ≤ 0). Deterministic for a
/// fixed seed.
pub fn bootstrap_test(
    metric: BootstrapMetric,
    corpus: &Corpus,
    preds_a: &[PostPred],
    preds_b: &[PostPred],
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    if corpus.len() < 2 {
        return Err(Error::config(
            "significance testing needs at least two posts",
        ));
    }
    if resamples == 0 {
        return Err(Error::config("resample count must be positive"));
    }
    let stats_a = collect_stats(corpus, preds_a)?;
    let stats_b = collect_stats(corpus, preds_b)?;
    let n = corpus.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut losses = 0usize;
    let mut idx = vec![0usize; n];
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        let delta = metric_of(metric, &stats_a, &idx) - metric_of(metric, &stats_b, &idx);
        if delta <= 0.0 {
            losses += 1;
        }
    }
    Ok(losses as f64 / resamples as f64)
}
