//! Feature extraction for token and phrase candidates.
//!
//! Extraction is two-phase: templates produce human-readable feature
//! strings (stable keys that model files expose), and [`vectorize`] maps
//! strings to indices through a [`Vocabulary`] that only grows while
//! unfrozen. All features are binary indicators; duplicate strings in one
//! candidate collapse to a single entry.
//!
//! The base templates for a token are its bucketed sentence and word
//! positions, the word identity / POS tag / dependency relation at offsets
//! −1, 0, +1 (word identity only for words seen at least
//! `common_word_min_count` times in training data), and character 3-grams
//! of the padded word. Token candidates fire that set twice, prefixed
//! `SELF|` and `PARENT|`; phrase candidates fire it four times, prefixed
//! `FIRST|`, `LAST|`, `HEAD|`, and `PARENT|`. A token without a parent
//! contributes the single feature `PARENT|ROOT` instead of a parent group.
//!
//! Adaptation features hang off the same anchors: Brown-cluster bit-string
//! prefixes (`BC2|`/`BC4|`/`BC6|`, or `BC|UNK` for out-of-vocabulary
//! words) and the gazetteer indicator `INGAZ` on the stemmed word. With
//! domain augmentation on, every feature is emitted a second time as
//! `<domain>##<feature>`, exactly doubling the set.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::adaptation::{stem, ClusterHierarchy, Gazetteer};
use crate::corpus::Document;
use crate::projection::Span;

/// Knobs for the template set. The window is fixed at ±1; everything the
/// templates leave open (thresholds, bucket edges, n-gram width, which
/// adaptation features fire) lives here so a model file can reproduce its
/// own extraction exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Minimum training-set count for a word-identity feature to fire.
    pub common_word_min_count: u32,
    /// Ascending bucket starts for position features; values below the
    /// first edge form bucket "0". The defaults give buckets
    /// 0, 1, 2, 3-5, 6-10, 11+.
    pub position_buckets: Vec<usize>,
    /// Character n-gram width over the padded word.
    pub char_ngram_n: usize,
    pub use_brown: bool,
    /// Bit-string prefix lengths for Brown cluster features.
    pub brown_prefixes: Vec<usize>,
    pub use_gazetteer: bool,
    /// Fire every feature a second copy conjoined with the entry's domain.
    pub domain_augment: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            common_word_min_count: 5,
            position_buckets: vec![1, 2, 3, 6, 11],
            char_ngram_n: 3,
            use_brown: false,
            brown_prefixes: vec![2, 4, 6],
            use_gazetteer: false,
            domain_augment: false,
        }
    }
}

/// Everything extraction reads besides the document itself. Borrowed by
/// every `*_features` call so extraction stays a pure function of its
/// inputs.
pub struct Extractor<'a> {
    pub config: &'a FeatureConfig,
    /// Lowercased word → training-set count, for the common-word gate.
    pub word_counts: &'a BTreeMap<String, u32>,
    pub brown: Option<&'a ClusterHierarchy>,
    pub gazetteer: Option<&'a Gazetteer>,
    /// Domain label of the entry being extracted, when augmentation is on.
    pub domain: Option<&'a str>,
}

/// Feature string → column index, plus the training-set word counts the
/// common-word gate needs at prediction time. Freezing pins the index:
/// unseen strings vectorize to nothing instead of new columns.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    index: IndexMap<String, u32>,
    frozen: bool,
    word_counts: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Vocabulary::default()
    }

    /// Rebuilds a vocabulary from its serialized pieces. Entries must be in
    /// index order.
    pub fn from_parts(names: Vec<String>, word_counts: BTreeMap<String, u32>) -> Self {
        let index = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| (name, i as u32))
            .collect();
        Vocabulary { index, frozen: true, word_counts }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Index for a feature string, registering it first if the vocabulary
    /// is still growing. `None` means frozen-and-unseen: the feature is
    /// silently dropped.
    pub fn intern(&mut self, name: &str) -> Option<u32> {
        if let Some(&id) = self.index.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.index.len() as u32;
        self.index.insert(name.to_string(), id);
        Some(id)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Feature strings in index order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(|s| s.as_str())
    }

    pub fn word_counts(&self) -> &BTreeMap<String, u32> {
        &self.word_counts
    }

    pub fn set_word_counts(&mut self, counts: BTreeMap<String, u32>) {
        self.word_counts = counts;
    }
}

/// Sparse binary feature vector: sorted, duplicate-free (index, value)
/// pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pairs: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn pairs(&self) -> &[(u32, f64)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Maps feature strings through the vocabulary, dropping what a frozen
/// vocabulary does not know and collapsing duplicates to indicators.
pub fn vectorize(names: &[String], vocab: &mut Vocabulary) -> FeatureVector {
    let mut ids: Vec<u32> = names.iter().filter_map(|n| vocab.intern(n)).collect();
    ids.sort_unstable();
    ids.dedup();
    FeatureVector { pairs: ids.into_iter().map(|id| (id, 1.0)).collect() }
}

/// Like [`vectorize`] against a vocabulary that must not grow: unknown
/// features are dropped. The prediction-side counterpart of training's
/// interning pass.
pub fn vectorize_frozen(names: &[String], vocab: &Vocabulary) -> FeatureVector {
    let mut ids: Vec<u32> = names.iter().filter_map(|n| vocab.get(n)).collect();
    ids.sort_unstable();
    ids.dedup();
    FeatureVector { pairs: ids.into_iter().map(|id| (id, 1.0)).collect() }
}

fn bucket_label(pos: usize, edges: &[usize]) -> String {
    let mut lo = 0usize;
    for (i, &edge) in edges.iter().enumerate() {
        if pos < edge {
            let hi = edge - 1;
            return if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") };
        }
        lo = edge;
        if i == edges.len() - 1 {
            return format!("{lo}+");
        }
    }
    // No edges configured: everything lands in one open bucket.
    "0+".to_string()
}

fn char_ngrams(word: &str, n: usize) -> Vec<String> {
    let padded: Vec<char> = std::iter::once('^')
        .chain(word.chars())
        .chain(std::iter::once('$'))
        .collect();
    if n == 0 || padded.len() < n {
        return Vec::new();
    }
    padded.windows(n).map(|w| w.iter().collect()).collect()
}

/// Brown features for a cluster ID: one per configured prefix length,
/// deduplicated when the ID is shorter than a prefix.
fn brown_prefix_features(id: &str, prefixes: &[usize], out: &mut Vec<String>) {
    let mut seen: Vec<&str> = Vec::new();
    for &k in prefixes {
        let cut = id.char_indices().nth(k).map_or(id.len(), |(i, _)| i);
        let prefix = &id[..cut];
        if seen.contains(&prefix) {
            continue;
        }
        seen.push(prefix);
        out.push(format!("BC{k}|{prefix}"));
    }
}

/// Brown-cluster features for one word: bit-string prefixes for words the
/// hierarchy knows, `BC|UNK` otherwise.
pub fn brown_features(word: &str, hierarchy: &ClusterHierarchy, prefixes: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    match hierarchy.id(&word.to_lowercase()) {
        Some(id) => brown_prefix_features(id, prefixes, &mut out),
        None => out.push("BC|UNK".to_string()),
    }
    out
}

fn offset_label(offset: isize) -> &'static str {
    match offset {
        -1 => "-1",
        0 => "0",
        1 => "+1",
        _ => unreachable!("window is fixed at plus or minus one token"),
    }
}

/// Base template set for one token. See the module docs for the inventory.
pub fn base_features(doc: &Document, token_index: usize, ext: &Extractor) -> Vec<String> {
    let tok = doc.token(token_index);
    let range = doc.sentence_range(tok.sent_index);
    let mut out = Vec::new();

    out.push(format!(
        "SPOS|{}",
        bucket_label(tok.sent_index, &ext.config.position_buckets)
    ));
    out.push(format!(
        "WPOS|{}",
        bucket_label(tok.pos_in_sent, &ext.config.position_buckets)
    ));

    for offset in -1isize..=1 {
        let o = offset_label(offset);
        let neighbor = token_index
            .checked_add_signed(offset)
            .filter(|&i| range.contains(&i));
        match neighbor {
            None => {
                let edge = if offset < 0 { "BOS" } else { "EOS" };
                out.push(format!("W@{o}|{edge}"));
                out.push(format!("POS@{o}|{edge}"));
                out.push(format!("DEP@{o}|{edge}"));
            }
            Some(i) => {
                let t = doc.token(i);
                let common = ext
                    .word_counts
                    .get(&t.lower)
                    .is_some_and(|&c| c >= ext.config.common_word_min_count);
                if common {
                    out.push(format!("W@{o}|{}", t.lower));
                }
                let pos = t.pos_tag.as_deref().unwrap_or("MISSING");
                let dep = t.deprel.as_deref().unwrap_or("MISSING");
                out.push(format!("POS@{o}|{pos}"));
                out.push(format!("DEP@{o}|{dep}"));
            }
        }
    }

    out.extend(char_ngrams(&tok.lower, ext.config.char_ngram_n));

    if ext.config.use_brown {
        if let Some(h) = ext.brown {
            out.extend(brown_features(&tok.lower, h, &ext.config.brown_prefixes));
        }
    }
    if ext.config.use_gazetteer {
        if let Some(g) = ext.gazetteer {
            if g.contains(&stem(&tok.lower)) {
                out.push("INGAZ".to_string());
            }
        }
    }
    out
}

/// Conjoins every feature with the domain label, keeping the originals.
pub fn augment_domains(features: Vec<String>, domain: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(features.len() * 2);
    for f in &features {
        out.push(format!("{domain}##{f}"));
    }
    let mut all = features;
    all.append(&mut out);
    all
}

fn prefixed(base: Vec<String>, prefix: &str, out: &mut Vec<String>) {
    out.extend(base.into_iter().map(|f| format!("{prefix}|{f}")));
}

fn finish(mut features: Vec<String>, ext: &Extractor) -> Vec<String> {
    if ext.config.domain_augment {
        if let Some(domain) = ext.domain {
            features = augment_domains(features, domain);
        }
    }
    features
}

/// Features for a token candidate: its own base features and its parent's,
/// source-tagged. Parentless tokens (roots, or unparsed documents) fire
/// `PARENT|ROOT` alone.
pub fn token_features(doc: &Document, token_index: usize, ext: &Extractor) -> Vec<String> {
    let mut out = Vec::new();
    prefixed(base_features(doc, token_index, ext), "SELF", &mut out);
    match doc.parent_of(token_index) {
        Some(p) => prefixed(base_features(doc, p, ext), "PARENT", &mut out),
        None => out.push("PARENT|ROOT".to_string()),
    }
    finish(out, ext)
}

/// Features for a phrase candidate: base features of its first, last, and
/// head tokens and of the head's parent. A one-token phrase fires the
/// first three groups over the same token, kept distinct by prefix.
pub fn np_features(doc: &Document, span: &Span, ext: &Extractor) -> Vec<String> {
    let mut out = Vec::new();
    prefixed(base_features(doc, span.start, ext), "FIRST", &mut out);
    prefixed(base_features(doc, span.end - 1, ext), "LAST", &mut out);
    prefixed(base_features(doc, span.head, ext), "HEAD", &mut out);
    match doc.parent_of(span.head) {
        Some(p) => prefixed(base_features(doc, p, ext), "PARENT", &mut out),
        None => out.push("PARENT|ROOT".to_string()),
    }
    finish(out, ext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{attach_syntax, tokenize, RawPost, SyntaxToken};
    use crate::projection::project;

    fn doc(title: &str) -> Document {
        tokenize(RawPost {
            forum_id: "f".into(),
            post_id: "p".into(),
            title: title.into(),
            body_lines: vec![],
        })
    }

    fn extractor<'a>(
        config: &'a FeatureConfig,
        counts: &'a BTreeMap<String, u32>,
    ) -> Extractor<'a> {
        Extractor { config, word_counts: counts, brown: None, gazetteer: None, domain: None }
    }

    #[test]
    fn char_trigrams_pad_one_boundary_char() {
        assert_eq!(char_ngrams("bot", 3), vec!["^bo", "bot", "ot$"]);
        assert_eq!(char_ngrams("pm", 3), vec!["^pm", "pm$"]);
        assert_eq!(char_ngrams("a", 3), vec!["^a$"]);
    }

    #[test]
    fn position_buckets_match_documented_edges() {
        let edges = FeatureConfig::default().position_buckets;
        let labels: Vec<String> = [0, 1, 2, 3, 5, 6, 10, 11, 40]
            .iter()
            .map(|&p| bucket_label(p, &edges))
            .collect();
        assert_eq!(
            labels,
            ["0", "1", "2", "3-5", "3-5", "6-10", "6-10", "11+", "11+"]
        );
    }

    #[test]
    fn sentence_edges_emit_boundary_markers() {
        let config = FeatureConfig::default();
        let counts = BTreeMap::new();
        let d = doc("selling bots");
        let feats = base_features(&d, 0, &extractor(&config, &counts));
        assert!(feats.contains(&"W@-1|BOS".to_string()));
        assert!(feats.contains(&"POS@-1|BOS".to_string()));
        let feats = base_features(&d, 1, &extractor(&config, &counts));
        assert!(feats.contains(&"DEP@+1|EOS".to_string()));
    }

    #[test]
    fn rare_words_skip_identity_but_keep_tags() {
        let config = FeatureConfig::default();
        let mut counts = BTreeMap::new();
        counts.insert("selling".to_string(), 9);
        counts.insert("bots".to_string(), 2);
        let d = doc("selling bots");
        let feats = base_features(&d, 1, &extractor(&config, &counts));
        assert!(!feats.iter().any(|f| f == "W@0|bots"));
        assert!(feats.contains(&"W@-1|selling".to_string()));
        assert!(feats.contains(&"POS@0|MISSING".to_string()));
        assert!(feats.contains(&"DEP@0|MISSING".to_string()));
    }

    fn parsed_doc() -> Document {
        let d = doc("selling fresh bots");
        let sent = vec![
            SyntaxToken { form: "selling".into(), pos: "VBG".into(), head: 0, deprel: "root".into() },
            SyntaxToken { form: "fresh".into(), pos: "JJ".into(), head: 3, deprel: "amod".into() },
            SyntaxToken { form: "bots".into(), pos: "NNS".into(), head: 1, deprel: "dobj".into() },
        ];
        attach_syntax(d, &[sent]).unwrap()
    }

    #[test]
    fn token_features_tag_self_and_parent_groups() {
        let config = FeatureConfig::default();
        let counts = BTreeMap::new();
        let d = parsed_doc();
        let ext = extractor(&config, &counts);
        let feats = token_features(&d, 2, &ext);
        assert!(feats.contains(&"SELF|POS@0|NNS".to_string()));
        assert!(feats.contains(&"PARENT|POS@0|VBG".to_string()));
        let self_count = base_features(&d, 2, &ext).len();
        let parent_count = base_features(&d, 0, &ext).len();
        assert_eq!(feats.len(), self_count + parent_count);
    }

    #[test]
    fn root_tokens_fire_parent_root_alone() {
        let config = FeatureConfig::default();
        let counts = BTreeMap::new();
        let d = parsed_doc();
        let feats = token_features(&d, 0, &extractor(&config, &counts));
        let parent: Vec<&String> =
            feats.iter().filter(|f| f.starts_with("PARENT|")).collect();
        assert_eq!(parent, [&"PARENT|ROOT".to_string()]);
    }

    #[test]
    fn single_token_phrases_repeat_one_base_set() {
        let config = FeatureConfig::default();
        let counts = BTreeMap::new();
        let d = parsed_doc();
        let ext = extractor(&config, &counts);
        let span = project(&d, 1).unwrap(); // adjective: single-token span
        let feats = np_features(&d, &span, &ext);
        let strip = |prefix: &str| -> Vec<String> {
            feats
                .iter()
                .filter_map(|f| f.strip_prefix(prefix).map(str::to_string))
                .collect()
        };
        assert_eq!(strip("FIRST|"), strip("LAST|"));
        assert_eq!(strip("FIRST|"), strip("HEAD|"));
        assert!(!strip("FIRST|").is_empty());
    }

    #[test]
    fn phrase_features_cover_first_and_last_tokens() {
        let config = FeatureConfig::default();
        let counts = BTreeMap::new();
        let d = parsed_doc();
        let ext = extractor(&config, &counts);
        let span = project(&d, 2).unwrap(); // "fresh bots"
        assert_eq!((span.start, span.end), (1, 3));
        let feats = np_features(&d, &span, &ext);
        assert!(feats.contains(&"FIRST|POS@0|JJ".to_string()));
        assert!(feats.contains(&"LAST|POS@0|NNS".to_string()));
        assert!(feats.contains(&"HEAD|POS@0|NNS".to_string()));
        assert!(feats.contains(&"PARENT|POS@0|VBG".to_string()));
    }

    #[test]
    fn brown_prefixes_deduplicate_short_ids() {
        let mut out = Vec::new();
        brown_prefix_features("110100", &[2, 4, 6], &mut out);
        assert_eq!(out, ["BC2|11", "BC4|1101", "BC6|110100"]);
        out.clear();
        brown_prefix_features("101", &[2, 4, 6], &mut out);
        assert_eq!(out, ["BC2|10", "BC4|101"]);
    }

    #[test]
    fn unknown_words_get_the_unk_cluster() {
        let sents = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["a".to_string(), "b".to_string()],
        ];
        let h = crate::adaptation::brown_cluster(&sents, 2, 1).unwrap();
        assert_eq!(brown_features("zzz", &h, &[2, 4, 6]), ["BC|UNK"]);
        let known = brown_features("a", &h, &[2, 4, 6]);
        assert!(known.iter().all(|f| f.starts_with("BC")));
        assert!(!known.contains(&"BC|UNK".to_string()));
    }

    #[test]
    fn augmentation_doubles_every_feature() {
        let feats = vec!["SELF|W@0|bots".to_string(), "PARENT|ROOT".to_string()];
        let doubled = augment_domains(feats.clone(), "darkode");
        assert_eq!(doubled.len(), 4);
        assert!(doubled.contains(&"darkode##SELF|W@0|bots".to_string()));
        assert!(doubled.contains(&"SELF|W@0|bots".to_string()));

        let config = FeatureConfig { domain_augment: true, ..FeatureConfig::default() };
        let counts = BTreeMap::new();
        let d = parsed_doc();
        let mut ext = extractor(&config, &counts);
        ext.domain = Some("darkode");
        let augmented = token_features(&d, 2, &ext);
        ext.domain = None;
        let plain = token_features(&d, 2, &ext);
        assert_eq!(augmented.len(), plain.len() * 2);
    }

    #[test]
    fn distant_tokens_do_not_leak_into_features() {
        let d = doc("alpha beta gamma delta epsilon");
        let sent: Vec<SyntaxToken> = ["alpha", "beta", "gamma", "delta", "epsilon"]
            .iter()
            .enumerate()
            .map(|(i, w)| SyntaxToken {
                form: (*w).into(),
                pos: "NN".into(),
                // chain: each token headed by the previous, alpha is root
                head: i,
                deprel: if i == 0 { "root".into() } else { "nn".into() },
            })
            .collect();
        let d = attach_syntax(d, &[sent]).unwrap();
        let config = FeatureConfig::default();
        let mut counts = BTreeMap::new();
        for w in ["alpha", "beta", "gamma", "delta", "epsilon", "omega"] {
            counts.insert(w.to_string(), 10);
        }
        let ext = extractor(&config, &counts);
        let before = token_features(&d, 2, &ext);

        // token 2's window covers 1..=3 and its parent's covers 0..=2;
        // token 4 is outside both.
        let mut mutated = d.clone();
        mutated.tokens[4].text = "omega".into();
        mutated.tokens[4].lower = "omega".into();
        let after = token_features(&mutated, 2, &ext);
        assert_eq!(before, after);
    }

    #[test]
    fn frozen_vocabulary_drops_unseen_strings() {
        let mut vocab = Vocabulary::new();
        let v = vectorize(
            &["a".to_string(), "b".to_string(), "a".to_string()],
            &mut vocab,
        );
        assert_eq!(v.pairs(), [(0, 1.0), (1, 1.0)]);
        vocab.freeze();
        let v = vectorize(&["b".to_string(), "c".to_string()], &mut vocab);
        assert_eq!(v.pairs(), [(1, 1.0)]);
        assert_eq!(vocab.len(), 2);
    }
}
