//! Domain types shared by every pipeline stage, plus label normalization.
//!
//! All entity and relation labels are compared byte-wise after
//! [`normalize_label`]: lowercase, single-space separated, trimmed.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Normalize a raw label into the canonical comparison key.
///
/// Returns `None` when nothing is left after trimming; callers drop the
/// entity in that case.
pub fn normalize_label(raw: &str) -> Option<String> {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// True when `label` is already in normalized form.
pub fn is_normalized(label: &str) -> bool {
    normalize_label(label).as_deref() == Some(label)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    #[serde(rename = "t")]
    pub surface: String,
    pub lemma: String,
    pub pos: String,
}

impl Token {
    pub fn new(surface: &str, lemma: &str, pos: &str) -> Self {
        Token {
            surface: surface.to_owned(),
            lemma: lemma.to_owned(),
            pos: pos.to_owned(),
        }
    }

    pub fn is_verb(&self) -> bool {
        self.pos.starts_with("VB")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Task,
    Method,
    Metric,
    Material,
    #[serde(rename = "Other-Scientific-Term")]
    OtherScientificTerm,
    Generic,
    /// Ontology-matched mention; never affects relation typing.
    Topic,
}

/// Which upstream tool produced an entity mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MentionSource {
    #[serde(rename = "EF")]
    Ef,
    #[serde(rename = "CSO")]
    Cso,
    #[serde(rename = "OIE")]
    Oie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    #[serde(rename = "start")]
    pub start_token: usize,
    #[serde(rename = "end")]
    pub end_token: usize,
    pub label: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub source: MentionSource,
}

/// Source tag on a raw relation inside an annotation record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationSource {
    #[serde(rename = "EF")]
    Ef,
    #[serde(rename = "OIE")]
    Oie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRelation {
    #[serde(rename = "subj")]
    pub subject: usize,
    #[serde(rename = "obj")]
    pub object: usize,
    pub label: String,
    pub source: RelationSource,
}

/// One sentence of one abstract with everything the upstream extractors found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceAnnotation {
    pub doc_id: String,
    pub sent_idx: usize,
    pub text: String,
    pub tokens: Vec<Token>,
    pub entities: Vec<EntityMention>,
    #[serde(rename = "relations")]
    pub raw_relations: Vec<RawRelation>,
}

/// Extraction route of a corpus-level candidate triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TripleSource {
    #[serde(rename = "EF")]
    Ef,
    #[serde(rename = "OIE")]
    Oie,
    #[serde(rename = "POS")]
    Pos,
}

impl TripleSource {
    pub const ALL: [TripleSource; 3] = [TripleSource::Ef, TripleSource::Oie, TripleSource::Pos];
}

/// Provenance tags carried by triples after relation collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "EF")]
    Ef,
    #[serde(rename = "OIE")]
    Oie,
    #[serde(rename = "POS")]
    Pos,
    #[serde(rename = "CONS")]
    Cons,
    #[serde(rename = "INFERRED")]
    Inferred,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Ef => "EF",
            Provenance::Oie => "OIE",
            Provenance::Pos => "POS",
            Provenance::Cons => "CONS",
            Provenance::Inferred => "INFERRED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "EF" => Provenance::Ef,
            "OIE" => Provenance::Oie,
            "POS" => Provenance::Pos,
            "CONS" => Provenance::Cons,
            "INFERRED" => Provenance::Inferred,
            _ => return None,
        })
    }
}

impl From<TripleSource> for Provenance {
    fn from(s: TripleSource) -> Self {
        match s {
            TripleSource::Ef => Provenance::Ef,
            TripleSource::Oie => Provenance::Oie,
            TripleSource::Pos => Provenance::Pos,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// (subject, relation, object) identity of a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripleKey {
    #[serde(rename = "s")]
    pub subject: String,
    #[serde(rename = "p")]
    pub relation: String,
    #[serde(rename = "o")]
    pub object: String,
}

impl TripleKey {
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        TripleKey {
            subject: subject.to_owned(),
            relation: relation.to_owned(),
            object: object.to_owned(),
        }
    }
}

impl fmt::Display for TripleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.relation, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTriple {
    #[serde(rename = "s")]
    pub subject: String,
    #[serde(rename = "p")]
    pub relation: String,
    #[serde(rename = "o")]
    pub object: String,
    pub source: TripleSource,
    pub doc_ids: BTreeSet<String>,
}

impl CandidateTriple {
    /// Builds a triple, refusing self-loops, empty witness sets and
    /// non-normalized endpoints.
    pub fn new(
        subject: &str,
        relation: &str,
        object: &str,
        source: TripleSource,
        doc_ids: BTreeSet<String>,
    ) -> Option<Self> {
        if subject == object
            || doc_ids.is_empty()
            || !is_normalized(subject)
            || !is_normalized(object)
            || relation.is_empty()
        {
            return None;
        }
        Some(CandidateTriple {
            subject: subject.to_owned(),
            relation: relation.to_owned(),
            object: object.to_owned(),
            source,
            doc_ids,
        })
    }

    pub fn key(&self) -> TripleKey {
        TripleKey::new(&self.subject, &self.relation, &self.object)
    }
}

/// A triple after relation collapse, carrying its pair support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportedTriple {
    #[serde(rename = "s")]
    pub subject: String,
    #[serde(rename = "p")]
    pub relation: String,
    #[serde(rename = "o")]
    pub object: String,
    /// Distinct documents in which the entity pair co-occurs.
    pub support: usize,
    pub sources: BTreeSet<Provenance>,
    pub doc_ids: BTreeSet<String>,
}

impl SupportedTriple {
    pub fn key(&self) -> TripleKey {
        TripleKey::new(&self.subject, &self.relation, &self.object)
    }

    pub fn has_source(&self, p: Provenance) -> bool {
        self.sources.contains(&p)
    }
}

/// Precision / recall / F-measure with the underlying counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
    /// Set when a denominator was zero and the affected score was forced to 0.
    pub degenerate: bool,
}
