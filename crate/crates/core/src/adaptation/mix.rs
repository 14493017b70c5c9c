//! Corpus mixing for supervised adaptation: concatenate a large source
//! corpus with a small target-forum corpus, overweighting the target posts
//! so the learner does not drown them out.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Concatenates the two corpora, setting per-post weights to 1 for source
/// posts and `target_weight` for target posts. Domain labels (the forum
/// ids) are left as they are, which is what keeps feature augmentation
/// meaningful on the mixed corpus.
pub fn mix_corpora(source: &Corpus, target: &Corpus, target_weight: f64) -> Result<Corpus> {
    if !(target_weight.is_finite() && target_weight > 0.0) {
        return Err(Error::config(format!(
            "target weight must be positive and finite, got {target_weight}"
        )));
    }
    let mut entries = Vec::with_capacity(source.len() + target.len());
    for e in &source.entries {
        let mut e = e.clone();
        e.weight = 1.0;
        entries.push(e);
    }
    for e in &target.entries {
        let mut e = e.clone();
        e.weight = target_weight;
        entries.push(e);
    }
    Ok(Corpus::new(entries))
}

/// Draws a reproducible subset of `n` posts. Subsets are nested: the same
/// seed's size-10 sample contains its size-5 sample, which is what a
/// learning curve wants.
pub fn sample_posts(corpus: &Corpus, n: usize, seed: u64) -> Result<Corpus> {
    if n > corpus.len() {
        return Err(Error::config(format!(
            "cannot sample {n} posts from a corpus of {}",
            corpus.len()
        )));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut picked: Vec<usize> = order.into_iter().take(n).collect();
    picked.sort_unstable();
    Ok(Corpus::new(
        picked.into_iter().map(|i| corpus.entries[i].clone()).collect(),
    ))
}
