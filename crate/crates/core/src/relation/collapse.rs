//! One relation per entity pair and source.

use std::collections::{BTreeMap, BTreeSet};

use crate::ingest::EmbeddingTable;
use crate::integrate::{CorpusTriples, PairDocumentIndex};
use crate::model::{Provenance, SupportedTriple, TripleSource};

use super::similarity::{cosine_similarity, embed_entity, weighted_mean};

/// Relation labels seen for one pair, with multiplicities.
pub type LabelCounts = BTreeMap<String, usize>;

/// The label with the highest multiplicity; ties go to the
/// lexicographically smallest label.
pub fn select_most_frequent_relation(labels: &LabelCounts) -> Option<&str> {
    let mut best: Option<(&str, usize)> = None;
    for (label, &n) in labels {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l)
}

/// Outcome of centroid selection.
#[derive(Debug, Clone, PartialEq)]
pub enum CentroidChoice {
    /// The label nearest to the weighted mean, with its cosine.
    Nearest { label: String, cosine: f64 },
    /// No usable embedding: the most frequent label was taken instead.
    MostFrequent(String),
}

impl CentroidChoice {
    pub fn label(&self) -> &str {
        match self {
            CentroidChoice::Nearest { label, .. } | CentroidChoice::MostFrequent(label) => label,
        }
    }
}

/// The label whose embedding has the highest cosine to the
/// multiplicity-weighted mean of all embeddable labels. Labels without an
/// embedding are excluded; ties go to the lexicographically smallest.
pub fn select_centroid_verb(labels: &LabelCounts, table: &EmbeddingTable) -> Option<CentroidChoice> {
    let embedded: Vec<(&str, Vec<f64>, usize)> = labels
        .iter()
        .filter_map(|(l, &n)| embed_entity(l, table).ok().map(|e| (l.as_str(), e.vector, n)))
        .collect();
    let fallback = || select_most_frequent_relation(labels).map(|l| CentroidChoice::MostFrequent(l.to_owned()));
    let Some(mean) = weighted_mean(embedded.iter().map(|(_, v, n)| (v.as_slice(), *n as f64))) else {
        return fallback();
    };
    let mut best: Option<(&str, f64)> = None;
    for (label, v, _) in &embedded {
        let Ok(c) = cosine_similarity(v, &mean) else {
            continue;
        };
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((label, c));
        }
    }
    match best {
        Some((label, cosine)) => Some(CentroidChoice::Nearest {
            label: label.to_owned(),
            cosine,
        }),
        None => fallback(),
    }
}

/// Number of distinct documents in which the pair co-occurs.
pub fn compute_support(subject: &str, object: &str, index: &PairDocumentIndex) -> usize {
    index.support(subject, object)
}

/// Collapses each source's triples to one per (subject, object) pair: EF by
/// frequency, OIE and PoS by embedding centroid. A label's multiplicity is
/// the number of documents that witnessed it for the pair.
///
/// Output is sorted by source, then by (subject, relation, object).
pub fn collapse_relations(
    triples: &CorpusTriples,
    index: &PairDocumentIndex,
    table: &EmbeddingTable,
) -> Vec<SupportedTriple> {
    let mut out = Vec::new();
    for source in TripleSource::ALL {
        let mut by_pair: BTreeMap<(&str, &str), (LabelCounts, BTreeSet<String>)> = BTreeMap::new();
        for t in triples.by_source(source) {
            let entry = by_pair.entry((&t.subject, &t.object)).or_default();
            *entry.0.entry(t.relation.clone()).or_default() += t.doc_ids.len();
            entry.1.extend(t.doc_ids.iter().cloned());
        }
        let mut collapsed: Vec<SupportedTriple> = by_pair
            .into_iter()
            .filter_map(|((s, o), (labels, doc_ids))| {
                let relation = match source {
                    TripleSource::Ef => select_most_frequent_relation(&labels)?.to_owned(),
                    TripleSource::Oie | TripleSource::Pos => {
                        let choice = select_centroid_verb(&labels, table)?;
                        if let CentroidChoice::MostFrequent(l) = &choice {
                            log::debug!("({s}, {o}): no embeddable relation, using `{l}`");
                        }
                        choice.label().to_owned()
                    }
                };
                let support = compute_support(s, o, index).max(doc_ids.len());
                Some(SupportedTriple {
                    subject: s.to_owned(),
                    relation,
                    object: o.to_owned(),
                    support,
                    sources: [Provenance::from(source)].into(),
                    doc_ids,
                })
            })
            .collect();
        collapsed.sort_by_key(|a| a.key());
        out.extend(collapsed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CandidateTriple;

    fn counts(items: &[(&str, usize)]) -> LabelCounts {
        items.iter().map(|(l, n)| (l.to_string(), *n)).collect()
    }

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = rows.first().map_or(2, |r| r.1.len());
        EmbeddingTable::from_entries(dim, rows.iter().map(|(l, v)| (l.to_string(), v.to_vec()))).unwrap()
    }

    #[test]
    fn most_frequent_examples() {
        assert_eq!(select_most_frequent_relation(&counts(&[("used-for", 2), ("part-of", 1)])), Some("used-for"));
        assert_eq!(select_most_frequent_relation(&counts(&[("used-for", 1)])), Some("used-for"));
        assert_eq!(select_most_frequent_relation(&counts(&[("part-of", 1), ("compare", 1)])), Some("compare"));
        assert_eq!(select_most_frequent_relation(&counts(&[])), None);
    }

    #[test]
    fn centroid_examples() {
        let t = table(&[("uses", &[1.0, 0.0]), ("utilizes", &[0.9, 0.1])]);
        let choice = select_centroid_verb(&counts(&[("uses", 1), ("utilizes", 1)]), &t).unwrap();
        // Oracle: mean (0.95, 0.05); cos(uses) = 0.95 / |mean| beats utilizes.
        let m = (0.95f64 * 0.95 + 0.05 * 0.05).sqrt();
        let cos_uses = 0.95 / m;
        let cos_util = (0.9 * 0.95 + 0.1 * 0.05) / (m * (0.81f64 + 0.01).sqrt());
        assert!(cos_uses > cos_util);
        assert_eq!(choice.label(), "uses");

        let t = table(&[("improves", &[0.3, 0.4])]);
        assert_eq!(select_centroid_verb(&counts(&[("improves", 3)]), &t).unwrap().label(), "improves");

        let t = table(&[("supports", &[0.0, 1.0])]);
        assert_eq!(select_centroid_verb(&counts(&[("uses", 5), ("supports", 1)]), &t).unwrap().label(), "supports");
    }

    #[test]
    fn centroid_falls_back_without_embeddings() {
        let t = table(&[("other", &[1.0, 0.0])]);
        let c = select_centroid_verb(&counts(&[("uses", 2), ("adopts", 1)]), &t).unwrap();
        assert_eq!(c, CentroidChoice::MostFrequent("uses".into()));
    }

    #[test]
    fn centroid_is_scale_free() {
        let rows: [(&str, &[f64]); 3] = [("a", &[1.0, 0.2]), ("b", &[0.1, 1.0]), ("c", &[0.7, 0.6])];
        let scaled: Vec<(&str, Vec<f64>)> = rows.iter().map(|(l, v)| (*l, v.iter().map(|x| x * 37.5).collect())).collect();
        let scaled_refs: Vec<(&str, &[f64])> = scaled.iter().map(|(l, v)| (*l, v.as_slice())).collect();
        let labels = counts(&[("a", 1), ("b", 2), ("c", 1)]);
        assert_eq!(
            select_centroid_verb(&labels, &table(&rows)).unwrap().label(),
            select_centroid_verb(&labels, &table(&scaled_refs)).unwrap().label()
        );
    }

    fn ct(s: &str, r: &str, o: &str, src: TripleSource, docs: &[&str]) -> CandidateTriple {
        CandidateTriple::new(s, r, o, src, docs.iter().map(|d| d.to_string()).collect()).unwrap()
    }

    #[test]
    fn one_triple_per_pair_and_source() {
        let sets = CorpusTriples::from_triples([
            ct("a", "used-for", "b", TripleSource::Ef, &["d1", "d2"]),
            ct("a", "part-of", "b", TripleSource::Ef, &["d3"]),
            ct("a", "uses", "b", TripleSource::Pos, &["d1"]),
            ct("a", "utilizes", "b", TripleSource::Pos, &["d2"]),
            ct("a", "uses", "c", TripleSource::Oie, &["d1"]),
        ]);
        let mut idx = PairDocumentIndex::new();
        for d in ["d1", "d2", "d3"] {
            idx.insert("a", "b", d);
        }
        idx.insert("a", "c", "d1");
        idx.insert("a", "c", "d1");
        let t = table(&[("uses", &[1.0, 0.0]), ("utilizes", &[0.9, 0.1])]);
        let out = collapse_relations(&sets, &idx, &t);
        let keys: Vec<_> = out
            .iter()
            .map(|t| (t.subject.as_str(), t.relation.as_str(), t.object.as_str(), t.support))
            .collect();
        assert_eq!(keys, [("a", "used-for", "b", 3), ("a", "uses", "c", 1), ("a", "uses", "b", 3)]);
        assert_eq!(compute_support("x", "y", &idx), 0);
    }
}
