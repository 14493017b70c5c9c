//! Product extractors: a binary hinge-loss classifier over token or
//! phrase candidates, and a post-level model that learns to pick one
//! product per post by treating the choice of which gold mention to
//! credit as a latent variable.
//!
//! Both trainers share one regime: candidates are every scope-eligible
//! token (or the phrase projected from it), features come from the
//! `features` module, and optimization is AdaGrad subgradient descent
//! with lazy L1 truncation, run for a fixed number of shuffled passes.
//! False positives and false negatives can be costed separately, gold
//! types that occur exactly once in training are upweighted, and posts
//! carry per-entry weights so mixed-domain corpora can emphasize the
//! target domain.

mod baselines;
mod model_io;
mod optimizer;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::{stem, ClusterHierarchy, Gazetteer};
use crate::corpus::{Corpus, Entry};
use crate::error::{Error, Result};
use crate::features::{
    np_features, token_features, vectorize, vectorize_frozen, Extractor, FeatureConfig,
    FeatureVector, Vocabulary,
};
use crate::projection::{project, Span};

pub use baselines::{build_dictionary, predict_dict, predict_first_np, predict_freq};
pub use optimizer::AdaGradL1;

/// What a model's candidates are (tokens or projected phrases) and how it
/// decides (independent binary calls, or one pick per post).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Token,
    Np,
    PostToken,
    PostNp,
}

impl Mode {
    pub fn is_post(self) -> bool {
        matches!(self, Mode::PostToken | Mode::PostNp)
    }

    /// Whether candidates are projected phrases rather than bare tokens.
    pub fn is_phrase(self) -> bool {
        matches!(self, Mode::Np | Mode::PostNp)
    }
}

/// Optimization settings. Costs and weights scale each candidate's hinge
/// loss; see the module docs for where each applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub iterations: usize,
    pub l1_strength: f64,
    pub adagrad_eta: f64,
    pub adagrad_delta: f64,
    pub cost_fp: f64,
    pub cost_fn: f64,
    /// Extra loss scale for gold types occurring exactly once in training.
    pub singleton_weight: f64,
    /// Entry weight given to target-domain posts when mixing corpora.
    pub target_domain_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 5,
            l1_strength: 1e-5,
            adagrad_eta: 0.1,
            adagrad_delta: 1e-6,
            cost_fp: 1.0,
            cost_fn: 1.0,
            singleton_weight: 3.0,
            target_domain_weight: 5.0,
            seed: 13,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 4] = [
            ("adagrad_eta", self.adagrad_eta),
            ("adagrad_delta", self.adagrad_delta),
            ("cost_fp", self.cost_fp),
            ("cost_fn", self.cost_fn),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        if !(self.l1_strength >= 0.0 && self.l1_strength.is_finite()) {
            return Err(Error::config("l1_strength must be non-negative"));
        }
        if !(self.singleton_weight >= 1.0 && self.singleton_weight.is_finite()) {
            return Err(Error::config("singleton_weight must be at least 1"));
        }
        if !(self.target_domain_weight > 0.0 && self.target_domain_weight.is_finite()) {
            return Err(Error::config("target_domain_weight must be positive"));
        }
        Ok(())
    }
}

/// Shared artifacts the feature templates may consult. Models trained
/// with Brown or gazetteer features need the same resources at
/// prediction time.
#[derive(Debug, Clone, Copy, Default)]
pub struct Resources<'a> {
    pub brown: Option<&'a ClusterHierarchy>,
    pub gazetteer: Option<&'a Gazetteer>,
}

/// A trained linear extractor: weights aligned to a frozen vocabulary,
/// plus everything needed to reproduce its feature extraction.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub mode: Mode,
    pub train: TrainConfig,
    pub features: FeatureConfig,
    pub vocab: Vocabulary,
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn score(&self, fv: &FeatureVector) -> f64 {
        fv.pairs()
            .iter()
            .map(|&(i, v)| self.weights[i as usize] * v)
            .sum()
    }

    /// Weight of a feature by its string key, for inspection.
    pub fn weight(&self, name: &str) -> Option<f64> {
        self.vocab.get(name).map(|i| self.weights[i as usize])
    }

    pub fn n_nonzero(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }
}

/// One candidate of one post: the span it would extract, its features,
/// and its training label.
struct Candidate {
    span: Span,
    fv: FeatureVector,
    gold: bool,
    singleton: bool,
}

fn token_span(entry: &Entry, i: usize) -> Span {
    Span {
        sent_index: entry.doc.token(i).sent_index,
        start: i,
        end: i + 1,
        head: i,
    }
}

fn build_candidates(
    entry: &Entry,
    phrase: bool,
    ext: &Extractor,
    singletons: Option<&BTreeSet<String>>,
    mut vectorize_names: impl FnMut(&[String]) -> FeatureVector,
) -> Result<Vec<Candidate>> {
    let gold = entry.gold_indices();
    let mut out = Vec::new();
    for i in entry.doc.eligible_indices() {
        let (span, names) = if phrase {
            let span = project(&entry.doc, i)?;
            let names = np_features(&entry.doc, &span, ext);
            (span, names)
        } else {
            (token_span(entry, i), token_features(&entry.doc, i, ext))
        };
        let is_gold = gold.contains(&i);
        let singleton = is_gold
            && singletons.is_some_and(|s| s.contains(&stem(&entry.doc.token(i).lower)));
        out.push(Candidate { span, fv: vectorize_names(&names), gold: is_gold, singleton });
    }
    Ok(out)
}

/// Feature extraction pass over a training corpus: grows and freezes the
/// vocabulary, returning per-entry candidate lists.
fn prepare(
    corpus: &Corpus,
    mode: Mode,
    features: &FeatureConfig,
    res: &Resources,
) -> Result<(Vocabulary, Vec<Vec<Candidate>>)> {
    if corpus.is_empty() {
        return Err(Error::config("training corpus is empty"));
    }
    for entry in &corpus.entries {
        if entry.gold.is_none() {
            return Err(Error::config(format!(
                "post {}/{} has no gold annotation layer; training needs merged gold",
                entry.doc.post.forum_id, entry.doc.post.post_id
            )));
        }
    }
    let counts = corpus.word_counts();
    let singletons: BTreeSet<String> = corpus
        .gold_stem_counts()
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .map(|(s, _)| s)
        .collect();

    let mut vocab = Vocabulary::new();
    let mut all = Vec::with_capacity(corpus.len());
    for entry in &corpus.entries {
        let ext = Extractor {
            config: features,
            word_counts: &counts,
            brown: res.brown,
            gazetteer: res.gazetteer,
            domain: Some(&entry.domain),
        };
        all.push(build_candidates(entry, mode.is_phrase(), &ext, Some(&singletons), |names| {
            vectorize(names, &mut vocab)
        })?);
    }
    vocab.set_word_counts(counts);
    vocab.freeze();
    Ok((vocab, all))
}

/// Trains the independent binary classifier over token or phrase
/// candidates.
pub fn train_binary(
    corpus: &Corpus,
    mode: Mode,
    features: FeatureConfig,
    train: TrainConfig,
    res: &Resources,
) -> Result<LinearModel> {
    train.validate()?;
    if mode.is_post() {
        return Err(Error::config(
            "binary training takes mode token or np; post modes train the post-level model",
        ));
    }
    let (vocab, cands) = prepare(corpus, mode, &features, res)?;

    let mut order: Vec<(usize, usize)> = cands
        .iter()
        .enumerate()
        .flat_map(|(e, cs)| (0..cs.len()).map(move |c| (e, c)))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(train.seed);
    let mut opt = AdaGradL1::new(
        vocab.len(),
        train.adagrad_eta,
        train.adagrad_delta,
        train.l1_strength,
    );
    for _ in 0..train.iterations {
        order.shuffle(&mut rng);
        for &(e, c) in &order {
            let cand = &cands[e][c];
            let y = if cand.gold { 1.0 } else { -1.0 };
            if 1.0 - y * opt.score(&cand.fv) <= 0.0 {
                continue;
            }
            let cost = if cand.gold {
                train.cost_fn * if cand.singleton { train.singleton_weight } else { 1.0 }
            } else {
                train.cost_fp
            };
            let scale = corpus.entries[e].weight * cost;
            let grad: Vec<(u32, f64)> =
                cand.fv.pairs().iter().map(|&(i, v)| (i, -y * scale * v)).collect();
            opt.apply_gradient(&grad);
        }
    }
    Ok(LinearModel { mode, train, features, vocab, weights: opt.finish() })
}

/// Trains the post-level extractor. Per post, the loss compares the
/// best-scoring candidate (plus a 0/1 margin for non-gold candidates)
/// against the best-scoring *gold* candidate — the latent choice — and a
/// violated margin moves weight from the former's features to the
/// latter's. Posts without gold products are skipped.
pub fn train_post_latent(
    corpus: &Corpus,
    mode: Mode,
    features: FeatureConfig,
    train: TrainConfig,
    res: &Resources,
) -> Result<LinearModel> {
    train.validate()?;
    if !mode.is_post() {
        return Err(Error::config(
            "post-level training takes mode post_token or post_np",
        ));
    }
    let (vocab, cands) = prepare(corpus, mode, &features, res)?;

    let mut posts: Vec<usize> = cands
        .iter()
        .enumerate()
        .filter(|(_, cs)| cs.iter().any(|c| c.gold))
        .map(|(e, _)| e)
        .collect();
    if posts.is_empty() {
        return Err(Error::config(
            "no post has a gold product among its candidates; the post-level objective is empty",
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(train.seed);
    let mut opt = AdaGradL1::new(
        vocab.len(),
        train.adagrad_eta,
        train.adagrad_delta,
        train.l1_strength,
    );
    for _ in 0..train.iterations {
        posts.shuffle(&mut rng);
        for &e in &posts {
            let cs = &cands[e];
            let scores: Vec<f64> = cs.iter().map(|c| opt.score(&c.fv)).collect();

            // loss-augmented best candidate, earliest on ties
            let (mut pred, mut pred_val) = (0usize, f64::NEG_INFINITY);
            // best gold candidate: the latent choice
            let (mut gold, mut gold_val) = (0usize, f64::NEG_INFINITY);
            for (j, c) in cs.iter().enumerate() {
                let aug = scores[j] + if c.gold { 0.0 } else { 1.0 };
                if aug > pred_val {
                    (pred, pred_val) = (j, aug);
                }
                if c.gold && scores[j] > gold_val {
                    (gold, gold_val) = (j, scores[j]);
                }
            }
            if pred == gold || pred_val - gold_val <= 0.0 {
                continue;
            }
            let w = corpus.entries[e].weight;
            let mut grad: BTreeMap<u32, f64> = BTreeMap::new();
            for &(i, v) in cs[pred].fv.pairs() {
                *grad.entry(i).or_insert(0.0) += w * v;
            }
            for &(i, v) in cs[gold].fv.pairs() {
                *grad.entry(i).or_insert(0.0) -= w * v;
            }
            let grad: Vec<(u32, f64)> =
                grad.into_iter().filter(|&(_, g)| g != 0.0).collect();
            if !grad.is_empty() {
                opt.apply_gradient(&grad);
            }
        }
    }
    Ok(LinearModel { mode, train, features, vocab, weights: opt.finish() })
}

/// Candidates of one post under a trained model's feature regime, with
/// scores.
fn scored_candidates(
    model: &LinearModel,
    entry: &Entry,
    res: &Resources,
) -> Result<Vec<(Span, f64)>> {
    let ext = Extractor {
        config: &model.features,
        word_counts: model.vocab.word_counts(),
        brown: res.brown,
        gazetteer: res.gazetteer,
        domain: Some(&entry.domain),
    };
    let cands = build_candidates(entry, model.mode.is_phrase(), &ext, None, |names| {
        vectorize_frozen(names, &model.vocab)
    })?;
    Ok(cands
        .into_iter()
        .map(|c| {
            let s = model.score(&c.fv);
            (c.span, s)
        })
        .collect())
}

/// Every candidate the binary model scores above zero, in document order.
pub fn predict_binary(model: &LinearModel, entry: &Entry, res: &Resources) -> Result<Vec<Span>> {
    if model.mode.is_post() {
        return Err(Error::config(
            "this is a post-level model; use the post predictor",
        ));
    }
    Ok(scored_candidates(model, entry, res)?
        .into_iter()
        .filter(|&(_, s)| s > 0.0)
        .map(|(span, _)| span)
        .collect())
}

/// The post-level model's single pick: highest-scoring candidate,
/// earliest on ties, `None` for posts with no candidates.
pub fn predict_post(model: &LinearModel, entry: &Entry, res: &Resources) -> Result<Option<Span>> {
    if !model.mode.is_post() {
        return Err(Error::config(
            "this is a binary model; use the binary predictor",
        ));
    }
    let mut best: Option<(Span, f64)> = None;
    for (span, s) in scored_candidates(model, entry, res)? {
        if best.as_ref().is_none_or(|&(_, b)| s > b) {
            best = Some((span, s));
        }
    }
    Ok(best.map(|(span, _)| span))
}
