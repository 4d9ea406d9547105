//! Rewrite-aware source coding.
//!
//! A stored document is rarely written once: it is compressed, then edited,
//! then stored again. This crate models that loop. A [`prob::JointSource`]
//! describes the joint law of an original block and its edited version; a
//! code maps blocks to storage strings; and the quality of a scheme is the
//! triple of compression rates before and after the edit together with the
//! expected edit distance between the two stored strings (its
//! *malleability*). Good schemes are graph embeddings: the source graph of
//! likely edits must sit inside the storage-string graph without stretching
//! edges, and the modules here build both graphs, search for embeddings
//! exactly or with tolerated edge deletions, construct concrete code
//! families, and evaluate the resulting rate/malleability trade-offs
//! exactly or by simulation.

pub mod codes;
pub mod edit;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod prob;
pub mod scalar;
pub mod typicality;

pub use codes::{CodePair, PalimpsestCode};
pub use edit::{EditMetric, StorageString};
pub use embed::{EmbedOptions, EmbeddingResult};
pub use error::{Error, ErrorKind, Result};
pub use evaluate::RateMalleabilityTriple;
pub use graph::{LabeledGraph, PathMetric};
pub use prob::{Block, Distribution, JointSource};
pub use scalar::Scalar;
