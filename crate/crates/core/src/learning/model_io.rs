//! Plain-text model files.
//!
//! A model file is line-oriented and fully reproducible: a version
//! header, then four sections in fixed order —
//!
//! ```text
//! marketsieve-model v1
//! [config]
//! {"mode":"token","train":{..},"features":{..}}
//! [word_counts]
//! word<TAB>count
//! [vocabulary]
//! one feature name per line, in index order
//! [weights]
//! feature name<TAB>weight
//! ```
//!
//! Only nonzero weights are written; weights are keyed by feature name
//! so the file stays diffable and order-independent of float noise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LinearModel, Mode, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, Vocabulary};

const HEADER: &str = "marketsieve-model v1";

#[derive(Serialize, Deserialize)]
struct ConfigBlock {
    mode: Mode,
    train: TrainConfig,
    features: FeatureConfig,
}

impl LinearModel {
    /// Serializes the model to `path`. Output is byte-for-byte
    /// deterministic for a given model.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let block = ConfigBlock {
            mode: self.mode,
            train: self.train.clone(),
            features: self.features.clone(),
        };
        let mut out = String::new();
        out.push_str(HEADER);
        out.push_str("\n[config]\n");
        out.push_str(
            &serde_json::to_string(&block)
                .map_err(|e| Error::Internal(format!("model config failed to serialize: {e}")))?,
        );
        out.push_str("\n[word_counts]\n");
        for (word, count) in self.vocab.word_counts() {
            let _ = writeln!(out, "{word}\t{count}");
        }
        out.push_str("[vocabulary]\n");
        for name in self.vocab.names() {
            out.push_str(name);
            out.push('\n');
        }
        out.push_str("[weights]\n");
        for (i, name) in self.vocab.names().enumerate() {
            let w = self.weights[i];
            if w != 0.0 {
                let _ = writeln!(out, "{name}\t{w}");
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a model back. Errors carry the file path and 1-based line
    /// number of the first problem.
    pub fn load(path: impl AsRef<Path>) -> Result<LinearModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let name = path.display().to_string();
        let fail = |line: usize, msg: String| Error::format(name.clone(), line, msg);

        let lines: Vec<&str> = text.lines().collect();
        let mut at = 0usize;
        let expect = |want: &str, at: &mut usize| -> Result<()> {
            match lines.get(*at) {
                Some(&got) if got != want => {
                    Err(fail(*at + 1, format!("expected `{want}`, found `{got}`")))
                }
                None => Err(fail(0, format!("file ended before `{want}`"))),
                _ => {
                    *at += 1;
                    Ok(())
                }
            }
        };
        expect(HEADER, &mut at)?;
        expect("[config]", &mut at)?;
        let config_text = *lines
            .get(at)
            .ok_or_else(|| fail(0, "file ended before the config line".into()))?;
        let block: ConfigBlock = serde_json::from_str(config_text)
            .map_err(|e| fail(at + 1, format!("bad config: {e}")))?;
        at += 1;
        expect("[word_counts]", &mut at)?;

        let mut word_counts = std::collections::BTreeMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut raw_weights: Vec<(usize, String, f64)> = Vec::new();
        // word_counts -> vocabulary -> weights
        let mut section = 0u8;
        for (i, &line) in lines.iter().enumerate().skip(at) {
            match line {
                "[vocabulary]" if section == 0 => section = 1,
                "[weights]" if section == 1 => section = 2,
                "[vocabulary]" | "[weights]" | "[config]" | "[word_counts]" => {
                    return Err(fail(i + 1, format!("section `{line}` out of order")));
                }
                _ => match section {
                    0 => {
                        let (word, count) = line.split_once('\t').ok_or_else(|| {
                            fail(i + 1, "word count lines are `word<TAB>count`".into())
                        })?;
                        let count: u32 = count.parse().map_err(|_| {
                            fail(i + 1, format!("bad count `{count}`"))
                        })?;
                        word_counts.insert(word.to_string(), count);
                    }
                    1 => names.push(line.to_string()),
                    _ => {
                        let (feat, value) = line.split_once('\t').ok_or_else(|| {
                            fail(i + 1, "weight lines are `feature<TAB>value`".into())
                        })?;
                        let value: f64 = value.parse().map_err(|_| {
                            fail(i + 1, format!("bad weight `{value}`"))
                        })?;
                        raw_weights.push((i + 1, feat.to_string(), value));
                    }
                },
            }
        }
        if section != 2 {
            return Err(fail(0, "file ended before the weights section".into()));
        }

        let vocab = Vocabulary::from_parts(names, word_counts);
        let mut weights = vec![0.0; vocab.len()];
        for (line, feat, value) in raw_weights {
            let id = vocab.get(&feat).ok_or_else(|| {
                fail(line, format!("weight for `{feat}`, which is not in the vocabulary"))
            })?;
            weights[id as usize] = value;
        }
        Ok(LinearModel {
            mode: block.mode,
            train: block.train,
            features: block.features,
            vocab,
            weights,
        })
    }
}
