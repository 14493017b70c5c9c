//! Cross-forum adaptation resources: stemming, word clusters, product
//! gazetteers, and weighted corpus mixing.

pub mod brown;
mod gazetteer;
mod mix;
mod stem;

pub use brown::{brown_cluster, brown_cluster_traced, ClusterHierarchy, MergeTrace};
pub use gazetteer::{build_gazetteer, Gazetteer};
pub use mix::{mix_corpora, sample_posts};
pub use stem::{stem, stem_all};
