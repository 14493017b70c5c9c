//! Corpus model: posts, tokens, documents, annotation layers, and the
//! canonical line-delimited corpus format.

mod annotated;
mod canonical;
mod scope;
mod syntax;
mod tokenizer;

pub use annotated::{parse_annotated, parse_raw, ParsedAnnotated};
pub use canonical::{read_canonical, write_canonical, CORPUS_HEADER};
pub use scope::compute_scope_mask;
pub use syntax::{attach_syntax, parse_conll, read_conll, SyntaxSentence, SyntaxToken};
pub use tokenizer::tokenize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// A forum post before tokenization. `body_lines` keeps the original line
/// breaks verbatim; the title, when present, is treated as the line before
/// the body everywhere line positions matter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub forum_id: String,
    pub post_id: String,
    pub title: String,
    pub body_lines: Vec<String>,
}

impl RawPost {
    /// All lines in document order: title (line 0), then body lines.
    pub fn lines(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.title.as_str()).chain(self.body_lines.iter().map(|s| s.as_str()))
    }

    pub fn n_lines(&self) -> usize {
        1 + self.body_lines.len()
    }
}

/// Dependency head of a token, within its sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Root,
    /// 0-based position within the same sentence.
    Token(usize),
}

impl Serialize for Head {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Head::Root => s.serialize_i64(-1),
            Head::Token(i) => s.serialize_i64(*i as i64),
        }
    }
}

impl<'de> Deserialize<'de> for Head {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        if v < -1 {
            return Err(serde::de::Error::custom("head index must be >= -1"));
        }
        Ok(if v == -1 {
            Head::Root
        } else {
            Head::Token(v as usize)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Verbatim surface form. Never empty, never contains whitespace.
    pub text: String,
    /// Case-folded surface form.
    pub lower: String,
    /// 0-based line in the post (title = 0).
    pub line_index: usize,
    /// 0-based sentence index within the document.
    pub sent_index: usize,
    /// 0-based position within the sentence.
    pub pos_in_sent: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<Head>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deprel: Option<String>,
}

impl Token {
    pub fn is_nominal(&self) -> bool {
        self.pos_tag.as_deref().is_some_and(|p| p.starts_with('N'))
    }

    pub fn is_verbal(&self) -> bool {
        self.pos_tag.as_deref().is_some_and(|p| p.starts_with('V'))
    }
}

/// Trade direction attached to a product annotation. Parsed and stored,
/// but carried as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TradeTag {
    Buy,
    Sell,
    Unspecified,
}

/// Post-level flag letters from the annotation guide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "A")]
    Admin,
    #[serde(rename = "D")]
    Difficult,
    #[serde(rename = "W")]
    Weird,
    #[serde(rename = "G")]
    Gaming,
    #[serde(rename = "L")]
    NotInteresting,
}

impl Flag {
    pub fn from_letter(c: char) -> Option<Flag> {
        match c {
            'A' => Some(Flag::Admin),
            'D' => Some(Flag::Difficult),
            'W' => Some(Flag::Weird),
            'G' => Some(Flag::Gaming),
            'L' => Some(Flag::NotInteresting),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Flag::Admin => 'A',
            Flag::Difficult => 'D',
            Flag::Weird => 'W',
            Flag::Gaming => 'G',
            Flag::NotInteresting => 'L',
        }
    }
}

/// One annotator's product labels for a document. Token indices are
/// document-global and always scope-eligible in the paired document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationLayer {
    pub annotator_id: String,
    pub product_tokens: BTreeMap<usize, TradeTag>,
    pub flags: BTreeSet<Flag>,
}

impl AnnotationLayer {
    pub fn new(annotator_id: impl Into<String>) -> Self {
        AnnotationLayer {
            annotator_id: annotator_id.into(),
            product_tokens: BTreeMap::new(),
            flags: BTreeSet::new(),
        }
    }

    pub fn token_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.product_tokens.keys().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.product_tokens.contains_key(&index)
    }

    pub fn is_empty(&self) -> bool {
        self.product_tokens.is_empty()
    }
}

/// A tokenized post with sentence structure, optional syntax, and the
/// annotation-scope and vouch masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub post: RawPost,
    pub(crate) tokens: Vec<Token>,
    pub(crate) sentence_starts: Vec<usize>,
    pub(crate) scope_mask: Vec<bool>,
    pub(crate) vouch_mask: Vec<bool>,
    pub(crate) has_syntax: bool,
}

impl Document {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index]
    }

    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn n_sentences(&self) -> usize {
        self.sentence_starts.len()
    }

    pub fn sentence_range(&self, sent: usize) -> std::ops::Range<usize> {
        let start = self.sentence_starts[sent];
        let end = self
            .sentence_starts
            .get(sent + 1)
            .copied()
            .unwrap_or(self.tokens.len());
        start..end
    }

    pub fn sentence(&self, sent: usize) -> &[Token] {
        &self.tokens[self.sentence_range(sent)]
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[Token]> {
        (0..self.n_sentences()).map(move |s| self.sentence(s))
    }

    /// Global index of a token given its sentence and in-sentence position.
    pub fn global_index(&self, sent: usize, pos_in_sent: usize) -> usize {
        self.sentence_starts[sent] + pos_in_sent
    }

    /// Global index of a token's dependency parent, if it has one.
    pub fn parent_of(&self, index: usize) -> Option<usize> {
        match self.tokens[index].head {
            Some(Head::Token(p)) => Some(self.global_index(self.tokens[index].sent_index, p)),
            _ => None,
        }
    }

    pub fn is_eligible(&self, index: usize) -> bool {
        self.scope_mask[index]
    }

    pub fn in_vouch(&self, index: usize) -> bool {
        self.vouch_mask[index]
    }

    pub fn eligible_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.tokens.len()).filter(move |&i| self.scope_mask[i])
    }

    pub fn has_syntax(&self) -> bool {
        self.has_syntax
    }

    /// Checks the structural invariants every well-formed document obeys.
    /// Canonical-format reads call this on every record; the message is
    /// wrapped into an error appropriate to the caller.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.tokens.len();
        if self.scope_mask.len() != n || self.vouch_mask.len() != n {
            return Err("mask length != token count".into());
        }
        if self
            .scope_mask
            .iter()
            .zip(&self.vouch_mask)
            .any(|(&s, &v)| s && v)
        {
            return Err("scope mask overlaps vouch mask".into());
        }
        let mut expect_sent = 0usize;
        let mut expect_pos = 0usize;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.text.is_empty() || tok.text.chars().any(char::is_whitespace) {
                return Err(format!("token {i} is empty or contains whitespace"));
            }
            if tok.lower != tok.text.to_lowercase() {
                return Err(format!("token {i}: lower form does not match surface"));
            }
            if tok.line_index >= self.post.n_lines() {
                return Err(format!("token {i}: line index out of range"));
            }
            if tok.sent_index == expect_sent + 1 {
                expect_sent += 1;
                expect_pos = 0;
            }
            if tok.sent_index != expect_sent || tok.pos_in_sent != expect_pos {
                return Err(format!("token {i}: sentence numbering is not contiguous"));
            }
            expect_pos += 1;
        }
        if self.sentence_starts.first().is_some_and(|&s| s != 0) {
            return Err("first sentence does not start at 0".into());
        }
        if self.sentence_starts.len() != expect_sent + usize::from(n > 0) {
            return Err("sentence starts disagree with token numbering".into());
        }
        for s in 0..self.n_sentences() {
            let range = self.sentence_range(s);
            if range.is_empty() || range.end > n {
                return Err(format!("sentence {s} has an invalid range"));
            }
            for i in range.clone() {
                if self.tokens[i].sent_index != s {
                    return Err(format!("token {i} disagrees with sentence boundaries"));
                }
                if let Some(Head::Token(h)) = self.tokens[i].head {
                    if h >= range.len() || range.start + h == i {
                        return Err(format!("token {i}: invalid head"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validates an annotation layer against this document.
    pub fn validate_layer(&self, layer: &AnnotationLayer) -> std::result::Result<(), String> {
        for &i in layer.product_tokens.keys() {
            if i >= self.tokens.len() {
                return Err(format!(
                    "annotation index {i} out of range (annotator {})",
                    layer.annotator_id
                ));
            }
            if !self.scope_mask[i] {
                return Err(format!(
                    "annotation index {i} is not scope-eligible (annotator {})",
                    layer.annotator_id
                ));
            }
        }
        Ok(())
    }
}

fn default_weight() -> f64 {
    1.0
}

/// One post of a corpus: the document plus per-annotator layers, the merged
/// gold layer, and training metadata (per-post weight, domain label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub doc: Document,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<AnnotationLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<AnnotationLayer>,
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub domain: String,
}

impl Entry {
    pub fn new(doc: Document) -> Self {
        let domain = doc.post.forum_id.clone();
        Entry {
            doc,
            layers: Vec::new(),
            gold: None,
            weight: 1.0,
            domain,
        }
    }

    /// Gold product token indices, empty when no gold layer is attached.
    pub fn gold_indices(&self) -> BTreeSet<usize> {
        self.gold
            .as_ref()
            .map(|g| g.token_indices().collect())
            .unwrap_or_default()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.doc.validate()?;
        for layer in &self.layers {
            self.doc.validate_layer(layer)?;
        }
        if let Some(gold) = &self.gold {
            self.doc.validate_layer(gold)?;
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err("entry weight must be finite and positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub entries: Vec<Entry>,
}

impl Corpus {
    pub fn new(entries: Vec<Entry>) -> Self {
        Corpus { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, forum: &str, post_id: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.doc.post.forum_id == forum && e.doc.post.post_id == post_id)
    }

    /// Lowercased token counts over the whole corpus. Training uses these
    /// for the common-word feature threshold.
    pub fn word_counts(&self) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for entry in &self.entries {
            for tok in entry.doc.tokens() {
                *counts.entry(tok.lower.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Counts of stemmed, lowercased gold product tokens across the corpus.
    pub fn gold_stem_counts(&self) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for entry in &self.entries {
            if let Some(gold) = &entry.gold {
                for &i in gold.product_tokens.keys() {
                    let stem = crate::adaptation::stem(&entry.doc.token(i).lower);
                    *counts.entry(stem).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    /// Lowercased sentences of every document, for cluster training.
    pub fn lowercased_sentences(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for entry in &self.entries {
            for sent in entry.doc.sentences() {
                out.push(sent.iter().map(|t| t.lower.clone()).collect());
            }
        }
        out
    }
}
