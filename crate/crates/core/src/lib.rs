//! # openattr
//!
//! Authorship attribution over plain-text books with most-frequent-word
//! bag-of-words features and one-vs-all linear SVMs, in both the closed-set
//! setting (every test document has a known author) and the open-set setting
//! (documents by authors absent from training should come back UNKNOWN).
//!
//! The pipeline, module by module:
//!
//! - [`corpus`]: manifest loading, sentence and word tokenization, and
//!   book-disjoint 64/16/20 splits.
//! - [`vocab`]: the top-K training vocabulary with a capitalization-based
//!   name filter.
//! - [`features`]: fixed-length chunks, sparse counts, row max normalization
//!   and column max-abs scaling.
//! - [`svm`]: binary hinge-loss SVMs trained by SGD with L2 or L1 penalties.
//! - [`openset`]: the one-vs-all ensemble and its reject-or-argmax rule.
//! - [`metrics`]: per-author and macro F1, detection F1, book-level voting.
//! - [`experiments`]: configuration-driven experiment grids and a synthetic
//!   corpus generator.

pub mod corpus;
pub mod error;
pub mod experiments;
pub mod features;
pub mod metrics;
pub mod openset;
pub mod svm;
pub mod vocab;

pub use corpus::{Author, AuthorId, BookRef, BookRole, Corpus, SplitAssignment, TokenizedBook};
pub use error::{Error, Result};
pub use features::{ChunkSize, ColumnScaler, FeatureVector, Normalization};
pub use metrics::{evaluate, EvalReport};
pub use openset::{Label, OpenSetModel, Prediction};
pub use svm::{LinearModel, Regularization, TrainConfig};
pub use vocab::{NameFilterPolicy, Vocabulary};
