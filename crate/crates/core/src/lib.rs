//! Construction of a scholarly knowledge graph from annotated abstracts.
//!
//! The pipeline runs ingest, integrate, refine, merge, relation collapse and
//! mapping, triple selection, enhancement and serialization. Each stage is
//! available on its own; [`pipeline`] strings them together.

pub mod error;
pub mod eval;
pub mod ingest;
pub mod integrate;
pub mod kg;
pub mod lexicon;
pub mod merge;
pub mod model;
pub mod pipeline;
pub mod refine;
pub mod relation;
pub mod select;

pub use error::{Error, Result};
pub use model::*;
