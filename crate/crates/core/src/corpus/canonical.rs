//! The canonical on-disk corpus format: a one-line header followed by one
//! JSON record per post. Reads validate every structural invariant so that
//! downstream code can trust any corpus it is handed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Corpus, Entry};
use crate::error::{Error, Result};

pub const CORPUS_HEADER: &str = "marketsieve-corpus v1";

pub fn write_canonical(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    write_canonical_to(corpus, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_canonical_to(corpus: &Corpus, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{CORPUS_HEADER}")?;
    for entry in &corpus.entries {
        let line = serde_json::to_string(entry)
            .map_err(|e| Error::Internal(format!("corpus record serialization failed: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_canonical(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_canonical_from(BufReader::new(file), &path.display().to_string())
}

pub fn read_canonical_from(reader: impl Read, origin: &str) -> Result<Corpus> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::format(origin, 1, "empty file, expected corpus header"))?;
    if header.trim_end() != CORPUS_HEADER {
        return Err(Error::format(
            origin,
            1,
            format!("bad header '{}', expected '{CORPUS_HEADER}'", header.trim_end()),
        ));
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(&line)
            .map_err(|e| Error::format(origin, line_no, format!("bad record: {e}")))?;
        entry
            .validate()
            .map_err(|msg| Error::format(origin, line_no, msg))?;
        entries.push(entry);
    }
    Ok(Corpus::new(entries))
}
