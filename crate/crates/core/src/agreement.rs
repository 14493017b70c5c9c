//! Inter-annotator agreement and gold-layer construction. Items are a
//! document's scope-eligible tokens, each judged product / not-product by
//! every annotator; chance-corrected agreement is Fleiss' kappa over those
//! binary judgements.

use std::collections::BTreeMap;

use crate::corpus::{AnnotationLayer, Corpus, Document, Flag, TradeTag};
use crate::error::{Error, Result};

/// Which tokens count as agreement items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaItems {
    /// Scope-eligible tokens only (the tokens annotators actually judged).
    #[default]
    Eligible,
    /// Every token, counting out-of-scope ones as unanimous non-products.
    All,
}

/// Pooled agreement over one group of same-sized annotator sets.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AgreementReport {
    pub forum: String,
    pub n_annotators: usize,
    pub n_posts: usize,
    pub n_items: usize,
    /// Mean per-item observed agreement.
    pub observed: f64,
    /// None when expected agreement is 1 (kappa undefined).
    pub kappa: Option<f64>,
}

/// Fleiss' kappa from per-item counts of "product" judgements. Returns
/// None when expected agreement is exactly 1 — every judgement in one
/// category — where the statistic is undefined.
pub fn kappa_from_counts(product_counts: &[usize], n_raters: usize) -> Result<Option<f64>> {
    if n_raters < 2 {
        return Err(Error::config("agreement needs at least 2 annotators"));
    }
    if product_counts.is_empty() {
        return Err(Error::config("agreement needs at least 1 item"));
    }
    if let Some(&bad) = product_counts.iter().find(|&&c| c > n_raters) {
        return Err(Error::Internal(format!(
            "item with {bad} product judgements exceeds {n_raters} raters"
        )));
    }
    let n_items = product_counts.len() as f64;
    let n = n_raters as f64;
    let mut observed_sum = 0.0;
    let mut product_total = 0usize;
    for &c in product_counts {
        let yes = c as f64;
        let no = n - yes;
        observed_sum += (yes * (yes - 1.0) + no * (no - 1.0)) / (n * (n - 1.0));
        product_total += c;
    }
    let observed = observed_sum / n_items;
    let p_yes = product_total as f64 / (n_items * n);
    let expected = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    if expected >= 1.0 {
        return Ok(None);
    }
    Ok(Some((observed - expected) / (1.0 - expected)))
}

fn item_indices(doc: &Document, items: KappaItems) -> Vec<usize> {
    match items {
        KappaItems::Eligible => doc.eligible_indices().collect(),
        KappaItems::All => (0..doc.n_tokens()).collect(),
    }
}

/// Per-item product counts for one document under a set of layers.
fn product_counts(
    layers: &[AnnotationLayer],
    doc: &Document,
    items: KappaItems,
) -> Result<Vec<usize>> {
    for layer in layers {
        doc.validate_layer(layer).map_err(Error::config)?;
    }
    Ok(item_indices(doc, items)
        .into_iter()
        .map(|i| layers.iter().filter(|l| l.contains(i)).count())
        .collect())
}

/// Fleiss' kappa for a single document.
pub fn fleiss_kappa(
    layers: &[AnnotationLayer],
    doc: &Document,
    items: KappaItems,
) -> Result<Option<f64>> {
    if layers.len() < 2 {
        return Err(Error::config("agreement needs at least 2 annotators"));
    }
    let counts = product_counts(layers, doc, items)?;
    if counts.is_empty() {
        return Err(Error::config("document has no agreement items"));
    }
    kappa_from_counts(&counts, layers.len())
}

/// Pools agreement across a corpus, grouping posts by forum and by how
/// many annotators covered them. Posts with fewer than two layers are
/// skipped; it is an error if nothing remains.
pub fn corpus_agreement(corpus: &Corpus, items: KappaItems) -> Result<Vec<AgreementReport>> {
    let mut groups: BTreeMap<(String, usize), (usize, Vec<usize>)> = BTreeMap::new();
    for entry in &corpus.entries {
        if entry.layers.len() < 2 {
            continue;
        }
        let counts = product_counts(&entry.layers, &entry.doc, items)?;
        let key = (entry.doc.post.forum_id.clone(), entry.layers.len());
        let group = groups.entry(key).or_insert_with(|| (0, Vec::new()));
        group.0 += 1;
        group.1.extend(counts);
    }
    if groups.is_empty() {
        return Err(Error::config(
            "no posts with two or more annotation layers",
        ));
    }
    let mut reports = Vec::new();
    for ((forum, n_annotators), (n_posts, counts)) in groups {
        if counts.is_empty() {
            continue;
        }
        let kappa = kappa_from_counts(&counts, n_annotators)?;
        let n = n_annotators as f64;
        let observed = counts
            .iter()
            .map(|&c| {
                let yes = c as f64;
                let no = n - yes;
                (yes * (yes - 1.0) + no * (no - 1.0)) / (n * (n - 1.0))
            })
            .sum::<f64>()
            / counts.len() as f64;
        reports.push(AgreementReport {
            forum,
            n_annotators,
            n_posts,
            n_items: counts.len(),
            observed,
            kappa,
        });
    }
    Ok(reports)
}

/// Merges annotator layers into a gold layer: a token is a product when a
/// strict majority of annotators marked it; its trade tag is the plurality
/// choice among those annotators (ties fall back to unspecified). Post
/// flags are likewise kept when a strict majority of annotators set them.
pub fn merge_majority(layers: &[AnnotationLayer], doc: &Document) -> Result<AnnotationLayer> {
    if layers.is_empty() {
        return Err(Error::config("cannot merge zero annotation layers"));
    }
    for layer in layers {
        doc.validate_layer(layer).map_err(Error::config)?;
    }
    let mut merged = AnnotationLayer::new("majority");
    let n = layers.len();
    let mut votes: BTreeMap<usize, Vec<TradeTag>> = BTreeMap::new();
    for layer in layers {
        for (&i, &tag) in &layer.product_tokens {
            votes.entry(i).or_default().push(tag);
        }
    }
    for (i, tags) in votes {
        if tags.len() * 2 <= n {
            continue;
        }
        let mut tally: BTreeMap<TradeTag, usize> = BTreeMap::new();
        for t in &tags {
            *tally.entry(*t).or_insert(0) += 1;
        }
        let top = tally.values().max().copied().unwrap_or(0);
        let winners: Vec<TradeTag> = tally
            .into_iter()
            .filter(|&(_, c)| c == top)
            .map(|(t, _)| t)
            .collect();
        let tag = if winners.len() == 1 { winners[0] } else { TradeTag::Unspecified };
        merged.product_tokens.insert(i, tag);
    }
    for flag in [Flag::Admin, Flag::Difficult, Flag::Weird, Flag::Gaming, Flag::NotInteresting] {
        let count = layers.iter().filter(|l| l.flags.contains(&flag)).count();
        if count * 2 > n {
            merged.flags.insert(flag);
        }
    }
    Ok(merged)
}
