//! Experiment config files: a plain sectioned key=value format.
//!
//! ```text
//! [experiment]
//! mode = np
//! seed = 13
//! iterations = 5
//!
//! [forum darkode]
//! train = darkode-train.corpus
//! dev = darkode-dev.corpus
//!
//! [xdomain]
//! train = darkode
//! eval = darkode, hackforums
//!
//! [curve]
//! source = hackforums
//! target = darkode
//! sizes = 0, 20, 40, 80
//! ```
//!
//! Blank lines and `#`/`;` comments are ignored. Relative paths are
//! resolved against the config file's own directory. Command-line flags
//! override whatever the file says.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use marketsieve::features::FeatureConfig;
use marketsieve::learning::{Mode, TrainConfig};
use marketsieve::{Error, Result};

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str, origin: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(Error::format(origin, i + 1, "unterminated section header"));
            };
            current = name.trim().to_string();
            out.entry(current.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::format(
                origin,
                i + 1,
                format!("expected `key = value`, found `{line}`"),
            ));
        };
        if current.is_empty() {
            return Err(Error::format(origin, i + 1, "key before any [section]"));
        }
        out.get_mut(&current)
            .expect("current section was inserted")
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Corpus files one forum contributes to an experiment.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ForumFiles {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct XdomainPlan {
    pub train: Vec<String>,
    pub eval: Vec<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CurvePlan {
    pub source: String,
    pub target: String,
    pub sizes: Vec<usize>,
}

/// A parsed experiment config, paths already resolved.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub brown: Option<PathBuf>,
    pub gazetteer_min_count: u32,
    pub train: TrainConfig,
    pub forums: BTreeMap<String, ForumFiles>,
    pub xdomain: Option<XdomainPlan>,
    pub curve: Option<CurvePlan>,
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::config(format!("[{section}] {key}: cannot parse `{value}`"))
    })
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };

        let sections = parse_sections(&text, &origin)?;
        let mut cfg = ExperimentConfig {
            mode: Mode::Np,
            brown: None,
            gazetteer_min_count: 4,
            train: TrainConfig::default(),
            forums: BTreeMap::new(),
            xdomain: None,
            curve: None,
        };

        for (section, keys) in &sections {
            if section == "experiment" {
                for (key, value) in keys {
                    match key.as_str() {
                        "mode" => {
                            cfg.mode = match value.as_str() {
                                "token" => Mode::Token,
                                "np" => Mode::Np,
                                "post_token" => Mode::PostToken,
                                "post_np" => Mode::PostNp,
                                other => {
                                    return Err(Error::config(format!(
                                        "[experiment] mode: unknown mode `{other}`"
                                    )))
                                }
                            }
                        }
                        "seed" => cfg.train.seed = parse_value(section, key, value)?,
                        "brown" => cfg.brown = Some(resolve(value)),
                        "gazetteer_min_count" => {
                            cfg.gazetteer_min_count = parse_value(section, key, value)?
                        }
                        "iterations" => cfg.train.iterations = parse_value(section, key, value)?,
                        "l1_strength" => cfg.train.l1_strength = parse_value(section, key, value)?,
                        "adagrad_eta" => cfg.train.adagrad_eta = parse_value(section, key, value)?,
                        "adagrad_delta" => {
                            cfg.train.adagrad_delta = parse_value(section, key, value)?
                        }
                        "cost_fp" => cfg.train.cost_fp = parse_value(section, key, value)?,
                        "cost_fn" => cfg.train.cost_fn = parse_value(section, key, value)?,
                        "singleton_weight" => {
                            cfg.train.singleton_weight = parse_value(section, key, value)?
                        }
                        "target_domain_weight" => {
                            cfg.train.target_domain_weight = parse_value(section, key, value)?
                        }
                        other => {
                            return Err(Error::config(format!(
                                "[experiment] unknown key `{other}`"
                            )))
                        }
                    }
                }
            } else if let Some(forum) = section.strip_prefix("forum ") {
                let forum = forum.trim();
                let mut files = ForumFiles::default();
                for (key, value) in keys {
                    match key.as_str() {
                        "train" => files.train = Some(resolve(value)),
                        "dev" => files.dev = Some(resolve(value)),
                        other => {
                            return Err(Error::config(format!(
                                "[{section}] unknown key `{other}`"
                            )))
                        }
                    }
                }
                cfg.forums.insert(forum.to_string(), files);
            } else if section == "xdomain" {
                let mut train = Vec::new();
                let mut eval = Vec::new();
                for (key, value) in keys {
                    match key.as_str() {
                        "train" => train = split_list(value),
                        "eval" => eval = split_list(value),
                        other => {
                            return Err(Error::config(format!(
                                "[xdomain] unknown key `{other}`"
                            )))
                        }
                    }
                }
                if train.is_empty() || eval.is_empty() {
                    return Err(Error::config(
                        "[xdomain] needs non-empty `train` and `eval` forum lists",
                    ));
                }
                cfg.xdomain = Some(XdomainPlan { train, eval });
            } else if section == "curve" {
                let mut source = String::new();
                let mut target = String::new();
                let mut sizes = Vec::new();
                for (key, value) in keys {
                    match key.as_str() {
                        "source" => source = value.clone(),
                        "target" => target = value.clone(),
                        "sizes" => {
                            sizes = split_list(value)
                                .iter()
                                .map(|s| parse_value(section, key, s))
                                .collect::<Result<Vec<usize>>>()?
                        }
                        other => {
                            return Err(Error::config(format!(
                                "[curve] unknown key `{other}`"
                            )))
                        }
                    }
                }
                if source.is_empty() || target.is_empty() {
                    return Err(Error::config("[curve] needs `source` and `target` forums"));
                }
                if sizes.is_empty() {
                    sizes = vec![0, 20, 40, 80];
                }
                cfg.curve = Some(CurvePlan { source, target, sizes });
            } else {
                return Err(Error::config(format!("unknown config section `[{section}]`")));
            }
        }

        // referenced forums must be defined
        let mut referenced: Vec<&String> = Vec::new();
        if let Some(x) = &cfg.xdomain {
            referenced.extend(x.train.iter().chain(&x.eval));
        }
        if let Some(c) = &cfg.curve {
            referenced.push(&c.source);
            referenced.push(&c.target);
        }
        for forum in referenced {
            if !cfg.forums.contains_key(forum) {
                return Err(Error::config(format!(
                    "forum `{forum}` is referenced but has no [forum {forum}] section"
                )));
            }
        }
        Ok(cfg)
    }

    /// The forum's files, which `from_file` guarantees to exist for any
    /// forum named by a plan section.
    pub fn forum(&self, name: &str) -> &ForumFiles {
        &self.forums[name]
    }

    /// Feature switches implied by this config for one trained system.
    pub fn features(&self, brown: bool, gazetteer: bool, augment: bool) -> FeatureConfig {
        FeatureConfig {
            use_brown: brown,
            use_gazetteer: gazetteer,
            domain_augment: augment,
            ..FeatureConfig::default()
        }
    }
}
