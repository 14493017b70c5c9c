//! One module per command, plus the helpers they share.

pub mod agree;
pub mod curve;
pub mod ingest;
pub mod model;
pub mod resources;
pub mod significance;
pub mod xdomain;

use std::path::Path;

use marketsieve::adaptation::{ClusterHierarchy, Gazetteer};
use marketsieve::corpus::{read_canonical, Corpus};
use marketsieve::evaluation::PostPred;
use marketsieve::learning::{predict_binary, predict_post, LinearModel, Resources};
use marketsieve::predictions::PostPrediction;
use marketsieve::{Error, Result};

/// Owned adaptation resources; `Resources` borrows from this.
pub struct LoadedResources {
    brown: Option<ClusterHierarchy>,
    gazetteer: Option<Gazetteer>,
}

impl LoadedResources {
    /// Loads whatever was passed, then checks the model's feature config
    /// against it: a model trained with a resource cannot predict
    /// without it.
    pub fn for_model(
        model: &LinearModel,
        brown: Option<&Path>,
        gazetteer: Option<&Path>,
    ) -> Result<LoadedResources> {
        if model.features.use_brown && brown.is_none() {
            return Err(Error::config(
                "model was trained with Brown cluster features; pass --brown <file>",
            ));
        }
        if model.features.use_gazetteer && gazetteer.is_none() {
            return Err(Error::config(
                "model was trained with gazetteer features; pass --gazetteer <file>",
            ));
        }
        LoadedResources::from_paths(brown, gazetteer)
    }

    pub fn from_paths(brown: Option<&Path>, gazetteer: Option<&Path>) -> Result<LoadedResources> {
        Ok(LoadedResources {
            brown: brown.map(ClusterHierarchy::read_file).transpose()?,
            gazetteer: gazetteer.map(Gazetteer::read_file).transpose()?,
        })
    }

    pub fn as_refs(&self) -> Resources<'_> {
        Resources {
            brown: self.brown.as_ref(),
            gazetteer: self.gazetteer.as_ref(),
        }
    }
}

/// Runs a trained model over a corpus, one prediction record per post in
/// corpus order.
pub fn predict_corpus(
    model: &LinearModel,
    corpus: &Corpus,
    res: &Resources,
) -> Result<Vec<PostPrediction>> {
    let mut out = Vec::with_capacity(corpus.len());
    for entry in &corpus.entries {
        let forum = entry.doc.post.forum_id.clone();
        let post_id = entry.doc.post.post_id.clone();
        let record = if model.mode.is_post() {
            let pick = predict_post(model, entry, res)?;
            PostPrediction::from_pick(forum, post_id, pick, model.mode.is_phrase())
        } else {
            let spans = predict_binary(model, entry, res)?;
            if model.mode.is_phrase() {
                PostPrediction::from_spans(forum, post_id, spans)
            } else {
                PostPrediction::from_tokens(
                    forum,
                    post_id,
                    spans.iter().map(|s| s.head).collect(),
                )
            }
        };
        out.push(record);
    }
    Ok(out)
}

/// Joins prediction records back against a corpus by (forum, post id),
/// in corpus order. Every post must be covered.
pub fn align_predictions(corpus: &Corpus, preds: &[PostPrediction]) -> Result<Vec<PostPred>> {
    let mut by_key: std::collections::BTreeMap<(&str, &str), &PostPrediction> =
        std::collections::BTreeMap::new();
    for p in preds {
        if by_key.insert((p.forum.as_str(), p.post_id.as_str()), p).is_some() {
            return Err(Error::config(format!(
                "prediction file has two records for post {}/{}",
                p.forum, p.post_id
            )));
        }
    }
    let mut out = Vec::with_capacity(corpus.len());
    for entry in &corpus.entries {
        let key = (
            entry.doc.post.forum_id.as_str(),
            entry.doc.post.post_id.as_str(),
        );
        let p = by_key.remove(&key).ok_or_else(|| {
            Error::config(format!(
                "prediction file has no record for post {}/{}",
                key.0, key.1
            ))
        })?;
        out.push(p.to_post_pred());
    }
    Ok(out)
}

/// Reads a canonical corpus, decorating errors with the path.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    read_canonical(path).map_err(|e| match e {
        Error::Io(io) => Error::format(
            path.display().to_string(),
            0,
            format!("cannot read corpus: {io}"),
        ),
        other => other,
    })
}
