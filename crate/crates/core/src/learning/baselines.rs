//! Non-learned reference systems: most-frequent-word, its
//! dictionary-restricted variant, and first-noun-phrase.

use std::collections::{BTreeMap, BTreeSet};

use crate::adaptation::stem;
use crate::corpus::{Corpus, Document};
use crate::error::Result;
use crate::projection::{nominal_phrase_head, project, Span};

/// Function words ignored when a document has no POS tags and the
/// frequency baselines fall back to "any non-stopword token".
const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an",
    "and", "any", "are", "as", "at", "be", "been", "being", "before",
    "below", "both", "but", "by", "can", "could", "did", "do", "does",
    "down", "during", "each", "else", "every", "few", "for", "from",
    "had", "has", "have", "he", "her", "here", "him", "his", "how", "i",
    "if", "in", "into", "is", "it", "its", "just", "may", "me", "might",
    "more", "most", "must", "my", "no", "not", "now", "of", "off", "on",
    "once", "only", "or", "other", "our", "out", "over", "own", "same",
    "shall", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "them", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "up", "us", "very", "was", "we",
    "were", "what", "when", "where", "which", "who", "whom", "why",
    "will", "with", "would", "you", "your",
];

fn is_frequency_candidate(doc: &Document, i: usize) -> bool {
    let tok = doc.token(i);
    if doc.has_syntax() {
        tok.is_nominal() || tok.is_verbal()
    } else {
        !STOPWORDS.contains(&tok.lower.as_str())
    }
}

/// The most frequent lowercased candidate type among eligible tokens,
/// ties going to the type that appears first in the document. `None`
/// when nothing qualifies.
fn top_type(doc: &Document, admit: impl Fn(&str) -> bool) -> Option<String> {
    // lower -> (count, first occurrence)
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for i in doc.eligible_indices() {
        if !is_frequency_candidate(doc, i) || !admit(&doc.token(i).lower) {
            continue;
        }
        let entry = counts.entry(&doc.token(i).lower).or_insert((0, i));
        entry.0 += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| (a.1 .0, std::cmp::Reverse(a.1 .1)).cmp(&(b.1 .0, std::cmp::Reverse(b.1 .1))))
        .map(|(word, _)| word.to_string())
}

fn occurrences(doc: &Document, word: &str) -> BTreeSet<usize> {
    doc.eligible_indices()
        .filter(|&i| doc.token(i).lower == word)
        .collect()
}

/// Tags every eligible occurrence of the post's most frequent noun or
/// verb (any non-stopword token when the document is unparsed).
pub fn predict_freq(doc: &Document) -> BTreeSet<usize> {
    match top_type(doc, |_| true) {
        Some(word) => occurrences(doc, &word),
        None => BTreeSet::new(),
    }
}

/// Gold product stems of a training corpus, for [`predict_dict`].
pub fn build_dictionary(corpus: &Corpus) -> BTreeSet<String> {
    corpus.gold_stem_counts().into_keys().collect()
}

/// [`predict_freq`] restricted to word types whose stem the dictionary
/// knows.
pub fn predict_dict(doc: &Document, dictionary: &BTreeSet<String>) -> BTreeSet<usize> {
    match top_type(doc, |w| dictionary.contains(&stem(w))) {
        Some(word) => occurrences(doc, &word),
        None => BTreeSet::new(),
    }
}

/// The phrase around the first eligible nominal token of the post: the
/// token is raised to the head of its largest containing noun phrase,
/// then projected. `None` when no eligible token is nominal.
pub fn predict_first_np(doc: &Document) -> Result<Option<Span>> {
    for i in doc.eligible_indices() {
        if doc.token(i).is_nominal() {
            let head = nominal_phrase_head(doc, i);
            return project(doc, head).map(Some);
        }
    }
    Ok(None)
}
