//! Product gazetteers: the stems of gold product mentions seen often
//! enough in a training forum. At feature time a gazetteer built on one
//! forum tells the model "this word was a known product over there", which
//! transfers vocabulary knowledge without retraining.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

const GAZETTEER_HEADER: &str = "marketsieve-gazetteer v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    pub forum: String,
    pub min_count: u32,
    entries: BTreeSet<String>,
}

impl Gazetteer {
    /// Membership test; the query must already be a stem.
    pub fn contains(&self, stemmed: &str) -> bool {
        self.entries.contains(stemmed)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|s| s.as_str())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = format!(
            "{GAZETTEER_HEADER} forum={} min_count={}\n",
            self.forum, self.min_count
        );
        for e in &self.entries {
            out.push_str(e);
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Gazetteer> {
        let path = path.as_ref();
        let origin = path.display().to_string();
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(&origin, 1, "empty file, expected gazetteer header"))?;
        let mut parts = header.split_whitespace();
        if (parts.next(), parts.next()) != (Some("marketsieve-gazetteer"), Some("v1")) {
            return Err(Error::format(&origin, 1, "bad gazetteer header"));
        }
        let mut forum = String::new();
        let mut min_count = 0u32;
        for kv in parts {
            match kv.split_once('=') {
                Some(("forum", v)) => forum = v.to_string(),
                Some(("min_count", v)) => {
                    min_count = v
                        .parse()
                        .map_err(|_| Error::format(&origin, 1, format!("bad min_count '{v}'")))?;
                }
                _ => return Err(Error::format(&origin, 1, format!("unknown header field '{kv}'"))),
            }
        }
        let mut entries = BTreeSet::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.chars().any(char::is_whitespace) {
                return Err(Error::format(&origin, i + 2, "gazetteer entries are single stems"));
            }
            entries.insert(line.to_string());
        }
        Ok(Gazetteer { forum, min_count, entries })
    }
}

/// Collects the stems of gold product tokens occurring at least
/// `min_count` times in the corpus. A corpus without gold annotations
/// yields an empty gazetteer.
pub fn build_gazetteer(corpus: &Corpus, min_count: u32) -> Gazetteer {
    let forum = corpus
        .entries
        .first()
        .map(|e| e.doc.post.forum_id.clone())
        .unwrap_or_default();
    let entries = corpus
        .gold_stem_counts()
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(s, _)| s)
        .collect();
    Gazetteer { forum, min_count, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::stem;
    use crate::corpus::{parse_annotated, Corpus, Entry};

    fn corpus() -> Corpus {
        let texts = [
            "selling {bots} and {accounts}",
            "fresh {accounts} here",
            "cheap {account} unlock",
            "one-off {exploit}",
        ];
        let entries = texts
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let parsed =
                    parse_annotated("darkode", &format!("p{i}"), "a", text).unwrap();
                let mut e = Entry::new(parsed.doc);
                e.gold = Some(parsed.layer);
                e
            })
            .collect();
        Corpus::new(entries)
    }

    #[test]
    fn thresholds_on_stem_counts() {
        let gaz = build_gazetteer(&corpus(), 2);
        // "accounts" x2 and "account" share a stem (3 total); "bots" and
        // "exploit" fall below the threshold.
        assert_eq!(gaz.len(), 1);
        assert!(gaz.contains("account"));
        assert!(!gaz.contains("bot"));
        assert_eq!(gaz.forum, "darkode");

        let gaz = build_gazetteer(&corpus(), 1);
        assert_eq!(gaz.len(), 3);
        assert!(gaz.contains(&stem("exploits")));
    }

    #[test]
    fn unannotated_corpus_yields_empty_gazetteer() {
        let mut c = corpus();
        for e in &mut c.entries {
            e.gold = None;
        }
        assert!(build_gazetteer(&c, 1).is_empty());
        assert!(build_gazetteer(&Corpus::new(vec![]), 1).is_empty());
    }

    #[test]
    fn file_round_trip() {
        let gaz = build_gazetteer(&corpus(), 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gaz.txt");
        gaz.write_file(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("marketsieve-gazetteer v1 forum=darkode min_count=1\n"));
        let back = Gazetteer::read_file(&path).unwrap();
        assert_eq!(back, gaz);
    }

    #[test]
    fn rejects_garbage_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "nonsense\nbot\n").unwrap();
        assert!(Gazetteer::read_file(&path).is_err());
        fs::write(&path, "marketsieve-gazetteer v1 forum=f min_count=1\ntwo words\n").unwrap();
        assert!(Gazetteer::read_file(&path).is_err());
    }
}
