//! Second chance for invalid triples, judged by the consistency classifier.

use crate::ingest::{EmbeddingTable, LexicalTaxonomy};
use crate::model::{Provenance, SupportedTriple};
use crate::relation::{cosine_similarity, embed_entity};

use super::classifier::{pair_input, ConsistencyClassifier};
use super::wup::wu_palmer;

/// How one invalid triple fared at the gate.
#[derive(Debug, Clone, PartialEq)]
pub enum GateVerdict {
    /// The classifier predicted the triple's own relation.
    ExactMatch,
    /// Different prediction, but the mean of cosine and Wu-Palmer cleared the threshold.
    Similar { predicted: String, cosine: f64, wup: f64 },
    Rejected { predicted: String, cosine: f64, wup: f64 },
    /// An endpoint had no embedding.
    Unembeddable,
}

impl GateVerdict {
    pub fn admitted(&self) -> bool {
        matches!(self, GateVerdict::ExactMatch | GateVerdict::Similar { .. })
    }
}

/// The admission rule: equal relations, or a similarity mean strictly above
/// `threshold`.
pub fn gate_admits(relation: &str, predicted: &str, cosine: f64, wup: f64, threshold: f64) -> bool {
    relation == predicted || (cosine + wup) / 2.0 > threshold
}

/// Cosine between two relation labels' embeddings, 0 when either is missing.
pub fn relation_cosine(a: &str, b: &str, table: &EmbeddingTable) -> f64 {
    match (embed_entity(a, table), embed_entity(b, table)) {
        (Ok(x), Ok(y)) => cosine_similarity(&x.vector, &y.vector).unwrap_or(0.0),
        _ => 0.0,
    }
}

/// Everything the gate needs, borrowed.
pub struct Gate<'a> {
    pub classifier: &'a ConsistencyClassifier,
    pub table: &'a EmbeddingTable,
    pub taxonomy: &'a LexicalTaxonomy,
    pub threshold: f64,
}

impl Gate<'_> {
    pub fn judge(&self, t: &SupportedTriple) -> GateVerdict {
        let Ok(x) = pair_input(&t.subject, &t.object, self.table) else {
            log::debug!("gate: unembeddable endpoint in {}", t.key());
            return GateVerdict::Unembeddable;
        };
        let predicted = self
            .classifier
            .predict(&x)
            .expect("pair input matches classifier dimension")
            .to_owned();
        if predicted == t.relation {
            return GateVerdict::ExactMatch;
        }
        let cosine = relation_cosine(&t.relation, &predicted, self.table);
        let wup = wu_palmer(&t.relation, &predicted, self.taxonomy);
        if gate_admits(&t.relation, &predicted, cosine, wup, self.threshold) {
            GateVerdict::Similar { predicted, cosine, wup }
        } else {
            GateVerdict::Rejected { predicted, cosine, wup }
        }
    }
}

/// Admitted triples, keeping their own relation and gaining the CONS tag,
/// alongside every verdict in input order.
pub fn validate_invalid(
    invalid: &[SupportedTriple],
    gate: &Gate,
) -> (Vec<SupportedTriple>, Vec<GateVerdict>) {
    let verdicts: Vec<GateVerdict> = invalid.iter().map(|t| gate.judge(t)).collect();
    let admitted = invalid
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.admitted())
        .map(|(t, _)| {
            let mut t = t.clone();
            t.sources.insert(Provenance::Cons);
            t
        })
        .collect();
    (admitted, verdicts)
}
