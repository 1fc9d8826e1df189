//! Triple selection: the validity split, the consistency classifier and the
//! similarity gate for invalid triples.

pub mod classifier;
pub mod gate;
pub mod validity;
pub mod wup;

pub use classifier::{pair_input, train_consistency_classifier, training_examples, ConsistencyClassifier};
pub use gate::{gate_admits, relation_cosine, validate_invalid, Gate, GateVerdict};
pub use validity::{compose_valid, is_valid, ValidityPartition};
pub use wup::wu_palmer;
