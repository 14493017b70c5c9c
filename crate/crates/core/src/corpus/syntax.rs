//! Attaching pre-parsed dependency syntax to documents. Parses arrive in
//! the usual 10-column tab-separated format (one token per line, blank line
//! between sentences) and must align 1:1 with the document's own tokens —
//! same sentence count, same token count, same surface forms.

use std::fs;
use std::path::Path;

use super::{Document, Head};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxToken {
    pub form: String,
    pub pos: String,
    /// 0 = root, otherwise the 1-based index of the head within the sentence.
    pub head: usize,
    pub deprel: String,
}

pub type SyntaxSentence = Vec<SyntaxToken>;

/// Parses 10-column dependency parses from a string. `origin` names the
/// source in error messages.
pub fn parse_conll(text: &str, origin: &str) -> Result<Vec<SyntaxSentence>> {
    let mut sentences = Vec::new();
    let mut current: SyntaxSentence = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(Error::format(
                origin,
                line_no,
                format!("expected at least 8 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id: usize = cols[0].parse().map_err(|_| {
            Error::format(origin, line_no, format!("bad token id '{}'", cols[0]))
        })?;
        if id != current.len() + 1 {
            return Err(Error::format(
                origin,
                line_no,
                format!("token id {id} out of sequence (expected {})", current.len() + 1),
            ));
        }
        let head: usize = cols[6].parse().map_err(|_| {
            Error::format(origin, line_no, format!("bad head index '{}'", cols[6]))
        })?;
        let pos = if cols[4] != "_" { cols[4] } else { cols[3] };
        current.push(SyntaxToken {
            form: cols[1].to_string(),
            pos: pos.to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    // Head indices must point inside their sentence and not at themselves.
    for (s, sent) in sentences.iter().enumerate() {
        for (i, tok) in sent.iter().enumerate() {
            if tok.head > sent.len() || tok.head == i + 1 {
                return Err(Error::format(
                    origin,
                    0,
                    format!("sentence {}: token {} has invalid head {}", s + 1, i + 1, tok.head),
                ));
            }
        }
    }
    Ok(sentences)
}

pub fn read_conll(path: impl AsRef<Path>) -> Result<Vec<SyntaxSentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_conll(&text, &path.display().to_string())
}

/// Copies POS tags, heads, and relations onto the document's tokens. The
/// parses must cover exactly this document, sentence for sentence and token
/// for token.
pub fn attach_syntax(mut doc: Document, sentences: &[SyntaxSentence]) -> Result<Document> {
    if sentences.len() != doc.n_sentences() {
        return Err(Error::Alignment {
            sentence: sentences.len().min(doc.n_sentences()),
            position: 0,
            msg: format!(
                "parse has {} sentences, document has {}",
                sentences.len(),
                doc.n_sentences()
            ),
        });
    }
    for (s, parsed) in sentences.iter().enumerate() {
        let range = doc.sentence_range(s);
        if parsed.len() != range.len() {
            return Err(Error::Alignment {
                sentence: s,
                position: 0,
                msg: format!(
                    "parse sentence has {} tokens, document sentence has {}",
                    parsed.len(),
                    range.len()
                ),
            });
        }
        for (offset, ptok) in parsed.iter().enumerate() {
            let tok = &mut doc.tokens[range.start + offset];
            if tok.text != ptok.form {
                return Err(Error::Alignment {
                    sentence: s,
                    position: offset,
                    msg: format!("token '{}' does not match parse form '{}'", tok.text, ptok.form),
                });
            }
            tok.pos_tag = Some(ptok.pos.clone());
            tok.head = Some(if ptok.head == 0 {
                Head::Root
            } else {
                Head::Token(ptok.head - 1)
            });
            tok.deprel = Some(ptok.deprel.clone());
        }
    }
    doc.has_syntax = true;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, RawPost};

    fn conll_line(id: usize, form: &str, pos: &str, head: usize, rel: &str) -> String {
        format!("{id}\t{form}\t_\t_\t{pos}\t_\t{head}\t{rel}\t_\t_")
    }

    #[test]
    fn parses_two_sentences() {
        let text = [
            conll_line(1, "Selling", "VBG", 0, "root"),
            conll_line(2, "bots", "NNS", 1, "dobj"),
            String::new(),
            conll_line(1, "PM", "VB", 0, "root"),
            conll_line(2, "me", "PRP", 1, "dobj"),
        ]
        .join("\n");
        let sents = parse_conll(&text, "test").unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0][1].form, "bots");
        assert_eq!(sents[0][1].head, 1);
        assert_eq!(sents[1][0].pos, "VB");
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_conll("1\tword", "t").is_err());
        let bad_head = conll_line(1, "w", "NN", 5, "root");
        assert!(parse_conll(&bad_head, "t").is_err());
        let bad_id = conll_line(3, "w", "NN", 0, "root");
        assert!(parse_conll(&bad_id, "t").is_err());
    }

    #[test]
    fn attaches_and_validates_alignment() {
        let doc = tokenize(RawPost {
            forum_id: "f".into(),
            post_id: "p".into(),
            title: "Selling bots".into(),
            body_lines: vec![],
        });
        let good = vec![vec![
            SyntaxToken { form: "Selling".into(), pos: "VBG".into(), head: 0, deprel: "root".into() },
            SyntaxToken { form: "bots".into(), pos: "NNS".into(), head: 1, deprel: "dobj".into() },
        ]];
        let doc = attach_syntax(doc, &good).unwrap();
        assert!(doc.has_syntax());
        assert_eq!(doc.token(1).pos_tag.as_deref(), Some("NNS"));
        assert_eq!(doc.token(1).head, Some(Head::Token(0)));
        assert_eq!(doc.parent_of(1), Some(0));
        assert_eq!(doc.parent_of(0), None);

        let doc2 = tokenize(RawPost {
            forum_id: "f".into(),
            post_id: "p".into(),
            title: "Selling rats".into(),
            body_lines: vec![],
        });
        let err = attach_syntax(doc2, &good).unwrap_err();
        assert!(err.to_string().contains("does not match"), "{err}");
    }
}
