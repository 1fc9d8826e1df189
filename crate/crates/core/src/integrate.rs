//! Per-sentence assembly of the entity set and the three raw triple sets,
//! and their aggregation over the corpus.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::TopicOntology;
use crate::lexicon::third_person_singular;
use crate::model::{
    normalize_label, CandidateTriple, EntityMention, EntityType, MentionSource, RelationSource,
    SentenceAnnotation, Token, TripleSource,
};

/// The entity set of one sentence: upstream EF and CSO mentions plus
/// ontology topic matches, with their token spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySet {
    mentions: Vec<EntityMention>,
    labels: BTreeSet<String>,
}

impl EntitySet {
    pub fn new(mut mentions: Vec<EntityMention>) -> Self {
        mentions.sort_by(|a, b| {
            (a.start_token, a.end_token, &a.label).cmp(&(b.start_token, b.end_token, &b.label))
        });
        mentions.dedup_by(|a, b| {
            a.start_token == b.start_token && a.end_token == b.end_token && a.label == b.label
        });
        let labels = mentions.iter().map(|m| m.label.clone()).collect();
        EntitySet { mentions, labels }
    }

    /// Builds the set for `sentence`: its EF and CSO mentions plus every
    /// ontology topic found in its tokens.
    pub fn for_sentence(
        sentence: &SentenceAnnotation,
        ontology: &TopicOntology,
        stopwords: &BTreeSet<String>,
    ) -> Self {
        let mut mentions: Vec<EntityMention> = sentence
            .entities
            .iter()
            .filter(|m| m.source != MentionSource::Oie)
            .cloned()
            .collect();
        mentions.extend(match_topics(sentence, ontology, stopwords));
        EntitySet::new(mentions)
    }

    pub fn mentions(&self) -> &[EntityMention] {
        &self.mentions
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    /// Label -> type, preferring extractor types over `Topic`.
    pub fn typed_labels(&self) -> BTreeMap<String, EntityType> {
        let mut out = BTreeMap::new();
        for m in self.mentions.iter().filter(|m| m.source == MentionSource::Ef) {
            out.entry(m.label.clone()).or_insert(m.entity_type);
        }
        for m in &self.mentions {
            out.entry(m.label.clone()).or_insert(m.entity_type);
        }
        out
    }
}

/// Entities and triples found in one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceExtraction {
    pub doc_id: String,
    pub sent_idx: usize,
    pub entities: BTreeMap<String, EntityType>,
    pub triples: Vec<CandidateTriple>,
}

/// Directed (subject, object) -> documents in which both co-occur in a sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDocumentIndex {
    pairs: BTreeMap<(String, String), BTreeSet<String>>,
}

impl PairDocumentIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, subject: &str, object: &str, doc_id: &str) {
        self.pairs
            .entry((subject.to_owned(), object.to_owned()))
            .or_default()
            .insert(doc_id.to_owned());
    }

    pub fn docs(&self, subject: &str, object: &str) -> Option<&BTreeSet<String>> {
        self.pairs.get(&(subject.to_owned(), object.to_owned()))
    }

    /// Number of distinct documents witnessing the pair.
    pub fn support(&self, subject: &str, object: &str) -> usize {
        self.docs(subject, object).map_or(0, BTreeSet::len)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &BTreeSet<String>)> {
        self.pairs
            .iter()
            .map(|((s, o), d)| (s.as_str(), o.as_str(), d))
    }
}

/// The corpus-level raw sets R_EF, R_OIE and R_PoS, each sorted by
/// (subject, relation, object) with witnessing documents unioned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTriples {
    pub ef: Vec<CandidateTriple>,
    pub oie: Vec<CandidateTriple>,
    pub pos: Vec<CandidateTriple>,
}

impl CorpusTriples {
    /// Merges triples keyed by (subject, relation, object, source).
    pub fn from_triples(triples: impl IntoIterator<Item = CandidateTriple>) -> Self {
        let mut acc: BTreeMap<(TripleSource, String, String, String), BTreeSet<String>> =
            BTreeMap::new();
        for t in triples {
            acc.entry((t.source, t.subject, t.relation, t.object))
                .or_default()
                .extend(t.doc_ids);
        }
        let mut out = CorpusTriples::default();
        for ((source, s, r, o), doc_ids) in acc {
            let t = CandidateTriple {
                subject: s,
                relation: r,
                object: o,
                source,
                doc_ids,
            };
            out.by_source_mut(source).push(t);
        }
        out
    }

    pub fn by_source(&self, source: TripleSource) -> &[CandidateTriple] {
        match source {
            TripleSource::Ef => &self.ef,
            TripleSource::Oie => &self.oie,
            TripleSource::Pos => &self.pos,
        }
    }

    fn by_source_mut(&mut self, source: TripleSource) -> &mut Vec<CandidateTriple> {
        match source {
            TripleSource::Ef => &mut self.ef,
            TripleSource::Oie => &mut self.oie,
            TripleSource::Pos => &mut self.pos,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &CandidateTriple> {
        self.ef.iter().chain(&self.oie).chain(&self.pos)
    }

    pub fn into_iter_all(self) -> impl Iterator<Item = CandidateTriple> {
        self.ef.into_iter().chain(self.oie).chain(self.pos)
    }

    pub fn len(&self) -> usize {
        self.ef.len() + self.oie.len() + self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every entity label appearing as a triple endpoint.
    pub fn entities(&self) -> BTreeSet<&str> {
        self.iter()
            .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
            .collect()
    }
}

/// Maximal ontology n-grams (n <= 3) in the sentence tokens.
///
/// An n-gram matches when its normalized surface equals a topic label or
/// alternative label exactly; n-grams starting or ending with a stop-word
/// are skipped, and matches contained in a longer match are dropped.
pub fn match_topics(
    sentence: &SentenceAnnotation,
    ontology: &TopicOntology,
    stopwords: &BTreeSet<String>,
) -> Vec<EntityMention> {
    let toks = &sentence.tokens;
    let is_stop = |t: &Token| stopwords.contains(&t.surface.to_lowercase());
    let mut found: Vec<(usize, usize, String)> = Vec::new();
    for n in 1..=3usize {
        for start in 0..toks.len().saturating_sub(n - 1) {
            let window = &toks[start..start + n];
            if is_stop(&window[0]) || is_stop(&window[n - 1]) {
                continue;
            }
            let joined = window
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            if let Some(label) = normalize_label(&joined) {
                if ontology.contains(&label) {
                    found.push((start, start + n, label));
                }
            }
        }
    }
    let maximal: Vec<&(usize, usize, String)> = found
        .iter()
        .filter(|(s, e, _)| {
            !found
                .iter()
                .any(|(s2, e2, _)| s2 <= s && e <= e2 && (s2, e2) != (s, e))
        })
        .collect();
    let mut out: Vec<EntityMention> = maximal
        .into_iter()
        .map(|(s, e, label)| EntityMention {
            start_token: *s,
            end_token: *e,
            label: label.clone(),
            entity_type: EntityType::Topic,
            source: MentionSource::Cso,
        })
        .collect();
    out.sort_by_key(|m| (m.start_token, m.end_token));
    out
}

/// OpenIE triples whose endpoints both belong to the entity set, with the
/// relation reduced to the lemma of its head verb.
pub fn filter_openie_triples(
    sentence: &SentenceAnnotation,
    entity_set: &EntitySet,
) -> Vec<CandidateTriple> {
    let doc: BTreeSet<String> = [sentence.doc_id.clone()].into();
    sentence
        .raw_relations
        .iter()
        .filter(|r| r.source == RelationSource::Oie)
        .filter_map(|r| {
            let subj = &sentence.entities[r.subject].label;
            let obj = &sentence.entities[r.object].label;
            if !entity_set.contains(subj) || !entity_set.contains(obj) {
                return None;
            }
            let Some(verb) = relation_head_lemma(&r.label, &sentence.tokens) else {
                log::debug!("{}/{}: relation `{}` not found in tokens", sentence.doc_id, sentence.sent_idx, r.label);
                return None;
            };
            CandidateTriple::new(subj, &verb, obj, TripleSource::Oie, doc.clone())
        })
        .collect()
}

/// Relation label for an OpenIE phrase: the last verb of `relation` as it
/// occurs in the token stream, lemmatized and put in third-person singular.
/// `None` when the phrase cannot be located in the tokens.
pub fn relation_head_lemma(relation: &str, tokens: &[Token]) -> Option<String> {
    let words: Vec<&str> = relation.split(' ').collect();
    let lowered: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let start = (0..tokens.len().saturating_sub(words.len() - 1))
        .find(|&i| words.iter().enumerate().all(|(k, w)| lowered[i + k] == *w))?;
    let span = &tokens[start..start + words.len()];
    let head = span.iter().rev().find(|t| t.is_verb()).unwrap_or(&span[span.len() - 1]);
    normalize_label(&head.lemma).map(|l| third_person_singular(&l))
}

/// One triple per non-auxiliary verb lying strictly between two entity
/// mentions, pointing from the earlier mention to the later one.
pub fn extract_pos_verb_triples(
    sentence: &SentenceAnnotation,
    entity_set: &EntitySet,
    auxiliaries: &BTreeSet<String>,
) -> Vec<CandidateTriple> {
    let toks = &sentence.tokens;
    let doc: BTreeSet<String> = [sentence.doc_id.clone()].into();
    let mentions = entity_set.mentions();
    let mut out: BTreeMap<(String, String, String), CandidateTriple> = BTreeMap::new();
    for (i, m) in mentions.iter().enumerate() {
        for n in &mentions[i + 1..] {
            if m.end_token > n.start_token || m.label == n.label {
                continue;
            }
            for k in m.end_token..n.start_token {
                if !toks[k].is_verb() || is_auxiliary(toks, k, auxiliaries) {
                    continue;
                }
                let Some(verb) = normalize_label(&toks[k].lemma) else {
                    continue;
                };
                let verb = third_person_singular(&verb);
                if let Some(t) =
                    CandidateTriple::new(&m.label, &verb, &n.label, TripleSource::Pos, doc.clone())
                {
                    out.entry((t.subject.clone(), t.relation.clone(), t.object.clone()))
                        .or_insert(t);
                }
            }
        }
    }
    out.into_values().collect()
}

fn is_auxiliary(toks: &[Token], k: usize, auxiliaries: &BTreeSet<String>) -> bool {
    let lemma = toks[k].lemma.to_lowercase();
    if !auxiliaries.contains(&lemma) {
        return false;
    }
    if lemma != "have" && lemma != "do" {
        return true;
    }
    // have/do are auxiliaries only when another verb follows (adverbs skipped).
    toks[k + 1..]
        .iter()
        .find(|t| !t.pos.starts_with("RB"))
        .is_some_and(Token::is_verb)
}

/// Drops EF triples labelled `Conjunction`.
pub fn discard_conjunction_relations(triples: Vec<CandidateTriple>) -> Vec<CandidateTriple> {
    triples
        .into_iter()
        .filter(|t| !t.relation.eq_ignore_ascii_case("conjunction"))
        .collect()
}

/// Runs the per-sentence extraction steps.
pub struct Integrator<'a> {
    pub ontology: &'a TopicOntology,
    pub stopwords: &'a BTreeSet<String>,
    pub auxiliaries: &'a BTreeSet<String>,
}

impl Integrator<'_> {
    pub fn extract(&self, sentence: &SentenceAnnotation) -> SentenceExtraction {
        let entity_set = EntitySet::for_sentence(sentence, self.ontology, self.stopwords);
        let doc: BTreeSet<String> = [sentence.doc_id.clone()].into();

        let ef: Vec<CandidateTriple> = sentence
            .raw_relations
            .iter()
            .filter(|r| r.source == RelationSource::Ef)
            .filter_map(|r| {
                CandidateTriple::new(
                    &sentence.entities[r.subject].label,
                    &r.label,
                    &sentence.entities[r.object].label,
                    TripleSource::Ef,
                    doc.clone(),
                )
            })
            .collect();
        let mut triples = discard_conjunction_relations(ef);
        triples.extend(filter_openie_triples(sentence, &entity_set));
        triples.extend(extract_pos_verb_triples(sentence, &entity_set, self.auxiliaries));

        SentenceExtraction {
            doc_id: sentence.doc_id.clone(),
            sent_idx: sentence.sent_idx,
            entities: entity_set.typed_labels(),
            triples,
        }
    }
}

/// Merges sentence results into corpus sets and the pair -> documents index.
///
/// The result does not depend on the order of `extractions`.
pub fn aggregate_corpus(extractions: &[SentenceExtraction]) -> (CorpusTriples, PairDocumentIndex) {
    let triples = CorpusTriples::from_triples(extractions.iter().flat_map(|e| e.triples.clone()));
    let mut index = PairDocumentIndex::new();
    for e in extractions {
        // Endpoints of EF and OIE triples are members of the entity set too,
        // so every triple's pair is witnessed here.
        let mut labels: BTreeSet<&str> = e.entities.keys().map(String::as_str).collect();
        for t in &e.triples {
            labels.insert(&t.subject);
            labels.insert(&t.object);
        }
        for a in &labels {
            for b in &labels {
                if a != b {
                    index.insert(a, b, &e.doc_id);
                }
            }
        }
    }
    (triples, index)
}
