//! Parser for annotated posts. Product mentions are marked inline with
//! braces — `{x}` or `{S x}` for items offered, `[x]` or `{B x}` for items
//! sought — around exactly one whitespace-delimited token. An optional
//! trailing line of flag letters (`A D W G L`) covers the whole post, and
//! leading `NN:`/`NN.` line numbers from annotation tooling are stripped.
//!
//! Forum posts contain literal brackets of their own ("[ buy ] backconnect
//! bot", smileys, BBCode fragments). An opening brace therefore only starts
//! an annotation when it is immediately followed by non-whitespace; anything
//! else passes through verbatim. A brace that does open an annotation must
//! close on the same line and must not span whitespace.

use std::collections::BTreeMap;

use super::scope::compute_scope_mask;
use super::tokenizer::{line_token_spans, tokenize};
use super::{AnnotationLayer, Document, Flag, RawPost, TradeTag};
use crate::error::{Error, Result};

/// Result of parsing one annotated post: the document (tokenized, scope
/// computed), the annotator's layer, and any dropped-annotation notes.
#[derive(Debug)]
pub struct ParsedAnnotated {
    pub doc: Document,
    pub layer: AnnotationLayer,
    pub diagnostics: Vec<String>,
}

/// Reads a post verbatim (no annotation markup expected): first line is the
/// title, the rest the body.
pub fn parse_raw(forum_id: &str, post_id: &str, text: &str) -> RawPost {
    let mut lines = split_lines(text);
    let title = if lines.is_empty() { String::new() } else { lines.remove(0) };
    RawPost {
        forum_id: forum_id.into(),
        post_id: post_id.into(),
        title,
        body_lines: lines,
    }
}

pub fn parse_annotated(
    forum_id: &str,
    post_id: &str,
    annotator_id: &str,
    text: &str,
) -> Result<ParsedAnnotated> {
    let mut lines = split_lines(text);

    let mut layer = AnnotationLayer::new(annotator_id);
    if let Some(flags) = take_flag_line(&mut lines) {
        layer.flags = flags;
    }

    // Per line: strip tool line numbers, then collect annotation spans in
    // stripped-text coordinates.
    let mut stripped_lines: Vec<String> = Vec::with_capacity(lines.len());
    let mut spans: Vec<(usize, usize, usize, TradeTag)> = Vec::new(); // (line, start, end, tag)
    for (idx, line) in lines.iter().enumerate() {
        let content = strip_line_number(line);
        let (stripped, line_spans) = scan_braces(content, idx + 1)?;
        for (s, e, tag) in line_spans {
            spans.push((idx, s, e, tag));
        }
        stripped_lines.push(stripped);
    }

    let title = if stripped_lines.is_empty() {
        String::new()
    } else {
        stripped_lines.remove(0)
    };
    let post = RawPost {
        forum_id: forum_id.into(),
        post_id: post_id.into(),
        title,
        body_lines: stripped_lines,
    };
    let doc = compute_scope_mask(tokenize(post));

    // Token spans per line, paired with global token indices.
    let mut line_tokens: BTreeMap<usize, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for (gi, tok) in doc.tokens().iter().enumerate() {
        line_tokens.entry(tok.line_index).or_default().push((gi, 0, 0));
    }
    for (line_index, toks) in line_tokens.iter_mut() {
        let line = doc.post.lines().nth(*line_index).unwrap();
        let byte_spans = line_token_spans(line);
        debug_assert_eq!(byte_spans.len(), toks.len());
        for (slot, (s, e)) in toks.iter_mut().zip(byte_spans) {
            slot.1 = s;
            slot.2 = e;
        }
    }

    let mut diagnostics = Vec::new();
    for (line_index, start, _end, tag) in spans {
        let target = line_tokens.get(&line_index).and_then(|toks| {
            toks.iter()
                .find(|&&(_, s, e)| s <= start && start < e)
                .map(|&(gi, _, _)| gi)
        });
        let Some(gi) = target else {
            diagnostics.push(format!(
                "{forum_id}/{post_id} line {}: annotation does not cover a token; dropped",
                line_index + 1
            ));
            continue;
        };
        if doc.in_vouch(gi) {
            diagnostics.push(format!(
                "{forum_id}/{post_id} line {}: annotation '{}' inside a quoted vouch; dropped",
                line_index + 1,
                doc.token(gi).text
            ));
            continue;
        }
        if !doc.is_eligible(gi) {
            diagnostics.push(format!(
                "{forum_id}/{post_id} line {}: annotation '{}' outside the annotated window; dropped",
                line_index + 1,
                doc.token(gi).text
            ));
            continue;
        }
        layer
            .product_tokens
            .entry(gi)
            .and_modify(|t| {
                if *t != tag {
                    *t = TradeTag::Unspecified;
                }
            })
            .or_insert(tag);
    }

    Ok(ParsedAnnotated { doc, layer, diagnostics })
}

fn split_lines(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

/// Pops the trailing flag line, if the last non-empty line consists only of
/// flag letters and separators.
fn take_flag_line(lines: &mut Vec<String>) -> Option<std::collections::BTreeSet<Flag>> {
    let last_non_empty = lines.iter().rposition(|l| !l.trim().is_empty())?;
    let candidate = lines[last_non_empty].trim();
    let mut flags = std::collections::BTreeSet::new();
    for c in candidate.chars() {
        if let Some(f) = Flag::from_letter(c) {
            flags.insert(f);
        } else if c == ',' || c.is_whitespace() {
            continue;
        } else {
            return None;
        }
    }
    if flags.is_empty() {
        return None;
    }
    lines.truncate(last_non_empty);
    Some(flags)
}

/// Strips a leading `NN:` / `NN.` / `NN ` line-number prefix (plus one
/// space of padding after a `:` or `.` separator).
fn strip_line_number(line: &str) -> &str {
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return line;
    }
    let rest = &line[digits..];
    let mut it = rest.chars();
    match it.next() {
        Some(c) if c == ':' || c == '.' => {
            let after = &rest[c.len_utf8()..];
            after.strip_prefix(' ').unwrap_or(after)
        }
        Some(c) if c.is_whitespace() => &rest[c.len_utf8()..],
        _ => line,
    }
}

/// Byte span of one annotated token in stripped-line coordinates.
type BraceSpan = (usize, usize, TradeTag);

/// Removes annotation braces from one line, returning the stripped text and
/// the byte spans (in stripped coordinates) of each annotated token.
fn scan_braces(line: &str, line_no: usize) -> Result<(String, Vec<BraceSpan>)> {
    let cs: Vec<char> = line.chars().collect();
    let mut stripped = String::with_capacity(line.len());
    let mut spans = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c == '{' || c == '[' {
            let closer = if c == '{' { '}' } else { ']' };
            let mut tag = if c == '{' { TradeTag::Sell } else { TradeTag::Buy };
            let mut j = i + 1;
            // Explicit direction marker: "{S token}" / "{B token}".
            if c == '{'
                && j + 1 < cs.len()
                && (cs[j] == 'S' || cs[j] == 'B')
                && cs[j + 1] == ' '
                && cs.get(j + 2).is_some_and(|&n| !n.is_whitespace() && n != closer)
            {
                tag = if cs[j] == 'S' { TradeTag::Sell } else { TradeTag::Buy };
                j += 2;
            }
            if j >= cs.len() || cs[j].is_whitespace() || cs[j] == closer {
                // Literal bracket, e.g. "[ buy ]" in a real title.
                stripped.push(c);
                i += 1;
                continue;
            }
            let mut content = String::new();
            let mut k = j;
            let mut closed = false;
            while k < cs.len() {
                if cs[k] == closer {
                    closed = true;
                    break;
                }
                content.push(cs[k]);
                k += 1;
            }
            if !closed {
                return Err(Error::parse(line_no, "unbalanced annotation braces"));
            }
            if content.chars().any(char::is_whitespace) {
                return Err(Error::parse(
                    line_no,
                    "annotation braces must enclose a single token",
                ));
            }
            let start = stripped.len();
            stripped.push_str(&content);
            spans.push((start, stripped.len(), tag));
            i = k + 1;
        } else {
            stripped.push(c);
            i += 1;
        }
    }
    Ok((stripped, spans))
}
