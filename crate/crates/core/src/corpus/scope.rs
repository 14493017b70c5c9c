//! Annotation scope: only the first ten and last ten non-blank lines of a
//! post are in scope (the title counts as the first line), and quoted vouch
//! regions are never in scope. For posts of twenty or fewer non-blank lines
//! everything outside a vouch region is eligible.

use super::Document;

const SCOPE_HEAD_LINES: usize = 10;
const SCOPE_TAIL_LINES: usize = 10;

/// Recomputes the scope mask from the line layout and the vouch mask.
pub fn compute_scope_mask(mut doc: Document) -> Document {
    // Non-blank lines in order; blockquote markers count even though they
    // carry no tokens.
    let non_blank: Vec<usize> = doc
        .post
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, _)| i)
        .collect();

    let mut line_in_scope = vec![false; doc.post.n_lines()];
    let n = non_blank.len();
    for (rank, &line) in non_blank.iter().enumerate() {
        if rank < SCOPE_HEAD_LINES || rank + SCOPE_TAIL_LINES >= n {
            line_in_scope[line] = true;
        }
    }

    for i in 0..doc.tokens.len() {
        doc.scope_mask[i] = line_in_scope[doc.tokens[i].line_index] && !doc.vouch_mask[i];
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, RawPost};

    fn doc_of(title: &str, body: Vec<String>) -> Document {
        compute_scope_mask(tokenize(RawPost {
            forum_id: "f".into(),
            post_id: "p".into(),
            title: title.into(),
            body_lines: body,
        }))
    }

    #[test]
    fn short_posts_are_fully_eligible() {
        let doc = doc_of("selling bots", (0..5).map(|i| format!("line {i} words")).collect());
        assert!((0..doc.n_tokens()).all(|i| doc.is_eligible(i)));
    }

    #[test]
    fn middle_lines_of_long_posts_are_out_of_scope() {
        // Title + 24 body lines = 25 non-blank lines; lines ranked 10..=14
        // (0-based) fall outside both windows.
        let body: Vec<String> = (1..25).map(|i| format!("body{i}")).collect();
        let doc = doc_of("title0", body);
        assert_eq!(doc.n_tokens(), 25);
        for i in 0..doc.n_tokens() {
            let eligible = doc.is_eligible(i);
            assert_eq!(eligible, !(10..15).contains(&i), "token {i}");
        }
    }

    #[test]
    fn blank_lines_do_not_consume_scope_slots() {
        // 30 body lines, every other one blank -> only 16 non-blank lines
        // total (title + 15), all within scope.
        let body: Vec<String> = (0..30)
            .map(|i| if i % 2 == 0 { format!("text{i}") } else { String::new() })
            .collect();
        let doc = doc_of("head", body);
        assert!((0..doc.n_tokens()).all(|i| doc.is_eligible(i)));
    }

    #[test]
    fn vouch_tokens_stay_ineligible_even_in_window() {
        let doc = doc_of(
            "title",
            vec![
                "<blockquote>".into(),
                "good guy".into(),
                "</blockquote>".into(),
                "real content".into(),
            ],
        );
        let eligible: Vec<&str> = (0..doc.n_tokens())
            .filter(|&i| doc.is_eligible(i))
            .map(|i| doc.token(i).text.as_str())
            .collect();
        assert_eq!(eligible, ["title", "real", "content"]);
    }

    #[test]
    fn marker_lines_count_against_the_window() {
        // Blockquote markers are non-blank lines: a long post's head window
        // is consumed by them like any other line.
        let mut body: Vec<String> = vec!["<blockquote>".into(), "vouch text".into(), "</blockquote>".into()];
        body.extend((0..30).map(|i| format!("line{i}")));
        let doc = doc_of("t", body);
        // Non-blank ranks: title=0, open=1, vouch=2, close=3, line0..line29 = 4..33.
        // Head window covers ranks 0..9 -> line0..line5; tail covers ranks 24..33
        // -> line20..line29.
        let eligible: Vec<String> = (0..doc.n_tokens())
            .filter(|&i| doc.is_eligible(i))
            .map(|i| doc.token(i).text.clone())
            .collect();
        let mut expect = vec!["t".to_string()];
        expect.extend((0..6).map(|i| format!("line{i}")));
        expect.extend((20..30).map(|i| format!("line{i}")));
        assert_eq!(eligible, expect);
    }
}
