//! Product-mention extraction from online marketplace forum posts.
//!
//! The pipeline, end to end:
//!
//! * [`corpus`] — parse raw and brace-annotated posts, tokenize, attach
//!   dependency parses, compute the annotation-scope mask, and read/write
//!   the canonical line-delimited corpus format.
//! * [`agreement`] — majority-merge multi-annotator layers and measure
//!   inter-annotator agreement with Fleiss' kappa.
//! * [`projection`] — project token annotations to noun-phrase spans.
//! * [`features`] — sparse indicator feature templates over tokens and
//!   spans, Brown-cluster and gazetteer features, and domain augmentation.
//! * [`learning`] — frequency/dictionary/first-NP baselines, a binary
//!   hinge-loss token/NP classifier, and a post-level latent-choice
//!   extractor, all trained by subgradient descent with AdaGrad and lazy
//!   L1 truncation.
//! * [`adaptation`] — Brown clustering, Porter stemming, gazetteer
//!   construction, and source/target corpus mixing.
//! * [`evaluation`] — token-, type-, and post-level metrics, OOV recall
//!   decomposition, and paired bootstrap significance testing.
//! * [`predictions`] — the line-delimited prediction record format shared
//!   by the predictors and the scorer.

pub mod adaptation;
pub mod agreement;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod learning;
pub mod predictions;
pub mod projection;

pub use error::{Error, Result};
