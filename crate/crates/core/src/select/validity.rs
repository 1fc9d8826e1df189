use crate::model::{Provenance, SupportedTriple};

/// Triples split by the source/support rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityPartition {
    pub valid: Vec<SupportedTriple>,
    pub invalid: Vec<SupportedTriple>,
}

/// True for EF and OIE triples, and for PoS triples whose pair support is
/// at least `min_support`.
pub fn is_valid(t: &SupportedTriple, min_support: usize) -> bool {
    t.has_source(Provenance::Ef)
        || t.has_source(Provenance::Oie)
        || (t.has_source(Provenance::Pos) && t.support >= min_support)
}

pub fn compose_valid(triples: &[SupportedTriple], min_support: usize) -> ValidityPartition {
    let (valid, invalid) = triples.iter().cloned().partition(|t| is_valid(t, min_support));
    ValidityPartition { valid, invalid }
}
