//! Projecting a product token to a noun-phrase span. A nominal token grows
//! to its dependency subtree, then sheds the dependents farthest from it
//! until the span is contiguous and at most seven tokens wide; any other
//! token stays a single-token span. Spans are matched on their head token,
//! so two systems agree whenever they anchor the same word, whatever
//! extents they kept.

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Maximum number of tokens a projected phrase may keep.
const MAX_SPAN_LEN: usize = 7;

/// A token span inside one sentence. `start`/`end` are global token
/// indices (end exclusive); `head` is the global index of the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub sent_index: usize,
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// Head-anchored span equality.
pub fn spans_match(a: &Span, b: &Span) -> bool {
    a.sent_index == b.sent_index && a.head == b.head
}

/// Projects a token to its phrase span. Requires attached syntax.
pub fn project(doc: &Document, token_index: usize) -> Result<Span> {
    if !doc.has_syntax() {
        return Err(Error::config(
            "phrase projection needs dependency parses; attach syntax or evaluate at token level",
        ));
    }
    if token_index >= doc.n_tokens() {
        return Err(Error::Internal(format!(
            "token index {token_index} out of range"
        )));
    }
    let tok = doc.token(token_index);
    let sent = tok.sent_index;
    if !tok.is_nominal() {
        return Ok(Span {
            sent_index: sent,
            start: token_index,
            end: token_index + 1,
            head: token_index,
        });
    }

    let range = doc.sentence_range(sent);
    // Children lists, sentence-local.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); range.len()];
    for i in range.clone() {
        if let Some(p) = doc.parent_of(i) {
            children[p - range.start].push(i - range.start);
        }
    }
    let local = |g: usize| g - range.start;
    let subtree = |root: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(children[n].iter().copied());
        }
        out
    };

    let anchor = local(token_index);
    // Kept immediate dependents; each contributes its whole subtree.
    let mut kept: Vec<usize> = children[anchor].clone();
    loop {
        let mut members: Vec<usize> = vec![anchor];
        for &d in &kept {
            members.extend(subtree(d));
        }
        let lo = *members.iter().min().unwrap();
        let hi = *members.iter().max().unwrap();
        let contiguous = hi - lo + 1 == members.len();
        if contiguous && members.len() <= MAX_SPAN_LEN {
            return Ok(Span {
                sent_index: sent,
                start: range.start + lo,
                end: range.start + hi + 1,
                head: token_index,
            });
        }
        // Drop the dependent subtree reaching farthest from the anchor.
        let (pos, _) = kept
            .iter()
            .enumerate()
            .map(|(pos, &d)| {
                let far = subtree(d)
                    .into_iter()
                    .map(|n| (n.abs_diff(anchor), n))
                    .max()
                    .unwrap();
                (pos, far)
            })
            .max_by_key(|&(_, far)| far)
            .expect("span over limit implies at least one dependent");
        kept.swap_remove(pos);
    }
}

/// Climbs from a nominal token to the top of its chain of nominal parents:
/// the head of the largest noun phrase containing it. Non-nominal tokens
/// are returned unchanged.
pub fn nominal_phrase_head(doc: &Document, token_index: usize) -> usize {
    let mut cur = token_index;
    if !doc.token(cur).is_nominal() {
        return cur;
    }
    let mut steps = doc.sentence_range(doc.token(cur).sent_index).len();
    while steps > 0 {
        match doc.parent_of(cur) {
            Some(p) if doc.token(p).is_nominal() => cur = p,
            _ => break,
        }
        steps -= 1;
    }
    cur
}
