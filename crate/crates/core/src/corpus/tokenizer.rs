//! Whitespace-and-punctuation tokenizer with forum-specific carve-outs:
//! URLs survive as single tokens, prices keep their currency marks, and
//! hyphenated or apostrophe'd words stay whole. Sentences never cross line
//! breaks; within a line a boundary needs sentence-final punctuation,
//! whitespace, and a following uppercase letter, so price tags like
//! "2000? via" do not split.

use super::{Document, RawPost, Token};

const URL_PREFIXES: [&str; 4] = ["http://", "https://", "ftp://", "www."];

/// Lines that consist solely of one of these markers delimit quoted vouch
/// regions; they carry no tokens themselves.
pub(crate) const VOUCH_OPEN: &str = "<blockquote>";
pub(crate) const VOUCH_CLOSE: &str = "</blockquote>";

/// Tokenizes a post into a document with sentence boundaries and the vouch
/// mask filled in. The scope mask starts as the complement of the vouch
/// mask; `compute_scope_mask` narrows it further.
pub fn tokenize(post: RawPost) -> Document {
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_starts: Vec<usize> = Vec::new();
    let mut vouch_mask: Vec<bool> = Vec::new();
    let mut vouch_depth = 0usize;
    let mut sent_index = 0usize;

    let lines: Vec<String> = post.lines().map(|s| s.to_string()).collect();
    for (line_index, line) in lines.iter().enumerate() {
        let trimmed = line.trim();
        if trimmed == VOUCH_OPEN {
            vouch_depth += 1;
            continue;
        }
        if trimmed == VOUCH_CLOSE {
            vouch_depth = vouch_depth.saturating_sub(1);
            continue;
        }
        for sentence in sentence_spans(line) {
            let spans = token_spans(line, sentence.0, sentence.1);
            if spans.is_empty() {
                continue;
            }
            sentence_starts.push(tokens.len());
            for (pos_in_sent, &(s, e)) in spans.iter().enumerate() {
                let text = line[s..e].to_string();
                tokens.push(Token {
                    lower: text.to_lowercase(),
                    text,
                    line_index,
                    sent_index,
                    pos_in_sent,
                    pos_tag: None,
                    head: None,
                    deprel: None,
                });
                vouch_mask.push(vouch_depth > 0);
            }
            sent_index += 1;
        }
    }

    let scope_mask = vouch_mask.iter().map(|&v| !v).collect();
    Document {
        post,
        tokens,
        sentence_starts,
        scope_mask,
        vouch_mask,
        has_syntax: false,
    }
}

/// Byte spans of the sentences in one line. A boundary sits after a run of
/// `.`, `!`, or `?` that is followed by whitespace and then an uppercase
/// letter.
fn sentence_spans(line: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut cuts = vec![0usize];
    let mut k = 0;
    while k < chars.len() {
        if matches!(chars[k].1, '.' | '!' | '?') {
            let mut j = k + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?') {
                j += 1;
            }
            let mut m = j;
            while m < chars.len() && chars[m].1.is_whitespace() {
                m += 1;
            }
            if m > j && m < chars.len() && chars[m].1.is_uppercase() {
                cuts.push(chars[j].0);
            }
            k = j;
        } else {
            k += 1;
        }
    }
    cuts.push(line.len());
    cuts.windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| line[a..b].chars().any(|c| !c.is_whitespace()))
        .collect()
}

/// Byte spans of the tokens inside `line[start..end]`.
fn token_spans(line: &str, start: usize, end: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let slice = &line[start..end];
    let mut chunk_start = None;
    for (off, c) in slice.char_indices().chain(std::iter::once((slice.len(), ' '))) {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(&slice[s..off], start + s, &mut out);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(off);
        }
    }
    out
}

fn is_url(chunk: &str) -> bool {
    URL_PREFIXES.iter().any(|p| {
        chunk.len() >= p.len() && chunk[..p.len()].eq_ignore_ascii_case(p) && chunk.len() > p.len()
    })
}

fn is_closing_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | ')' | ']' | '}' | '>' | '"' | '\'')
}

/// Splits one whitespace-delimited chunk into token spans (byte offsets are
/// relative to the whole line via `base`).
fn split_chunk(chunk: &str, base: usize, out: &mut Vec<(usize, usize)>) {
    if is_url(chunk) {
        // Keep the URL whole but peel sentence punctuation off its tail.
        let trailing: usize = chunk
            .chars()
            .rev()
            .take_while(|&c| is_closing_punct(c))
            .map(char::len_utf8)
            .sum();
        let core_end = chunk.len() - trailing;
        if core_end > 0 {
            out.push((base, base + core_end));
            punct_runs(&chunk[core_end..], base + core_end, out);
            return;
        }
    }

    let cs: Vec<(usize, char)> = chunk.char_indices().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i].1;
        let starts_word =
            c.is_alphanumeric() || (c == '$' && cs.get(i + 1).is_some_and(|n| n.1.is_ascii_digit()));
        if starts_word {
            let s = cs[i].0;
            i += 1;
            while i < cs.len() {
                let c = cs[i].1;
                if c.is_alphanumeric() {
                    i += 1;
                    continue;
                }
                let prev = cs[i - 1].1;
                let next = cs.get(i + 1).map(|p| p.1);
                let internal = match c {
                    '-' => prev.is_alphanumeric() && next.is_some_and(|n| n.is_alphanumeric()),
                    '\'' => prev.is_alphabetic() && next.is_some_and(|n| n.is_alphabetic()),
                    '.' | ',' => prev.is_ascii_digit() && next.is_some_and(|n| n.is_ascii_digit()),
                    '$' => prev.is_ascii_digit(),
                    _ => false,
                };
                if internal {
                    i += 1;
                } else {
                    break;
                }
            }
            let e = if i < cs.len() { cs[i].0 } else { chunk.len() };
            out.push((base + s, base + e));
        } else {
            // A run of one repeated punctuation character is one token.
            let s = cs[i].0;
            i += 1;
            while i < cs.len() && cs[i].1 == c {
                i += 1;
            }
            let e = if i < cs.len() { cs[i].0 } else { chunk.len() };
            out.push((base + s, base + e));
        }
    }
}

fn punct_runs(s: &str, base: usize, out: &mut Vec<(usize, usize)>) {
    let cs: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i].1;
        let start = cs[i].0;
        i += 1;
        while i < cs.len() && cs[i].1 == c {
            i += 1;
        }
        let end = if i < cs.len() { cs[i].0 } else { s.len() };
        out.push((base + start, base + end));
    }
}

/// Token spans per sentence for a single line, used when mapping annotation
/// offsets back onto tokens.
pub(crate) fn line_token_spans(line: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (s, e) in sentence_spans(line) {
        out.extend(token_spans(line, s, e));
    }
    out
}
