//! The prediction record format shared by the predictors and the scorer.
//!
//! A prediction file is a version header followed by one JSON record per
//! line, one record per post, in corpus order:
//!
//! ```text
//! marketsieve-predictions v1
//! {"forum":"darkode","post_id":"d12","tokens":[4,9],"first":4}
//! ```
//!
//! `tokens` are the predicted product token indices (span heads, for
//! phrase-level systems, whose full spans ride along in `spans`);
//! `first` is the post's headline pick — the post-level model's single
//! output, or the earliest prediction of a binary system.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::PostPred;
use crate::projection::Span;

const HEADER: &str = "marketsieve-predictions v1";

/// One post's predictions, addressed by forum and post id so files can
/// be joined back against a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostPrediction {
    pub forum: String,
    pub post_id: String,
    pub tokens: BTreeSet<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<Span>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<usize>,
}

impl PostPrediction {
    /// Token-level predictions; the earliest token is the headline pick.
    pub fn from_tokens(
        forum: impl Into<String>,
        post_id: impl Into<String>,
        tokens: BTreeSet<usize>,
    ) -> PostPrediction {
        let first = tokens.iter().next().copied();
        PostPrediction { forum: forum.into(), post_id: post_id.into(), tokens, spans: None, first }
    }

    /// Phrase-level predictions: heads become the token set, the span
    /// starting earliest in the document supplies the headline pick.
    pub fn from_spans(
        forum: impl Into<String>,
        post_id: impl Into<String>,
        spans: Vec<Span>,
    ) -> PostPrediction {
        let tokens: BTreeSet<usize> = spans.iter().map(|s| s.head).collect();
        let first = spans.iter().min_by_key(|s| s.start).map(|s| s.head);
        PostPrediction {
            forum: forum.into(),
            post_id: post_id.into(),
            tokens,
            spans: Some(spans),
            first,
        }
    }

    /// A post-level model's single optional pick.
    pub fn from_pick(
        forum: impl Into<String>,
        post_id: impl Into<String>,
        pick: Option<Span>,
        phrase_level: bool,
    ) -> PostPrediction {
        let tokens: BTreeSet<usize> = pick.iter().map(|s| s.head).collect();
        PostPrediction {
            forum: forum.into(),
            post_id: post_id.into(),
            tokens,
            spans: phrase_level.then(|| pick.into_iter().collect()),
            first: pick.map(|s| s.head),
        }
    }

    /// The shape the metrics take.
    pub fn to_post_pred(&self) -> PostPred {
        PostPred { tokens: self.tokens.clone(), first: self.first }
    }
}

/// Writes records in the given order. Byte-deterministic.
pub fn write_predictions(path: impl AsRef<Path>, preds: &[PostPrediction]) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for p in preds {
        out.push_str(
            &serde_json::to_string(p)
                .map_err(|e| Error::Internal(format!("prediction failed to serialize: {e}")))?,
        );
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PostPrediction>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((_, l)) => {
            return Err(Error::format(
                name,
                1,
                format!("expected `{HEADER}`, found `{l}`"),
            ))
        }
        None => return Err(Error::format(name, 1, "empty prediction file")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let p: PostPrediction = serde_json::from_str(line)
            .map_err(|e| Error::format(name.clone(), i + 1, format!("bad record: {e}")))?;
        out.push(p);
    }
    Ok(out)
}
