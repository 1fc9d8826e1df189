//! Super-topic inference, RDF serialization, provenance sidecar, support
//! statistics and the underscored corpus export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TopicOntology;
use crate::model::{Provenance, SentenceAnnotation, SupportedTriple, TripleKey};

pub const SKOS_BROADER_LABEL: &str = "skos:broader";
pub const SKOS_BROADER_IRI: &str = "http://www.w3.org/2004/02/skos/core#broader";

/// Triples inferred by lifting objects to their direct super-topics.
///
/// For `(e2, r, e1)` and each direct super-topic `e3` of `e1`, `(e2, r, e3)`
/// is inferred unless some input triple links `e2` and `e3` in either
/// direction with any relation. Inferred triples carry the documents of
/// the triples they came from and support 0. With `to_fixpoint` the
/// inferred triples are fed back until nothing new appears.
pub fn enhance_with_supertopics(
    triples: &[SupportedTriple],
    ontology: &TopicOntology,
    to_fixpoint: bool,
) -> Vec<SupportedTriple> {
    let mut linked: BTreeSet<(String, String)> = BTreeSet::new();
    let mut known: BTreeSet<TripleKey> = BTreeSet::new();
    for t in triples {
        linked.insert(unordered(&t.subject, &t.object));
        known.insert(t.key());
    }
    let mut inferred: BTreeMap<TripleKey, SupportedTriple> = BTreeMap::new();
    let mut frontier: Vec<SupportedTriple> = triples.to_vec();
    loop {
        let mut round: BTreeMap<TripleKey, SupportedTriple> = BTreeMap::new();
        for t in &frontier {
            for e3 in ontology.super_topics(&t.object) {
                if e3 == t.subject || linked.contains(&unordered(&t.subject, e3)) {
                    continue;
                }
                let key = TripleKey::new(&t.subject, &t.relation, e3);
                if known.contains(&key) {
                    continue;
                }
                round
                    .entry(key)
                    .or_insert_with(|| SupportedTriple {
                        subject: t.subject.clone(),
                        relation: t.relation.clone(),
                        object: e3.to_owned(),
                        support: 0,
                        sources: [Provenance::Inferred].into(),
                        doc_ids: BTreeSet::new(),
                    })
                    .doc_ids
                    .extend(t.doc_ids.iter().cloned());
            }
        }
        if !to_fixpoint {
            return round.into_values().collect();
        }
        // Blocking stays tied to the original input; merge this round in.
        // A triple whose documents grew goes round again so its own
        // descendants pick them up.
        let mut fresh = Vec::new();
        for (k, t) in round {
            match inferred.get_mut(&k) {
                Some(existing) => {
                    let before = existing.doc_ids.len();
                    existing.doc_ids.extend(t.doc_ids);
                    if existing.doc_ids.len() > before {
                        fresh.push(existing.clone());
                    }
                }
                None => {
                    inferred.insert(k, t.clone());
                    fresh.push(t);
                }
            }
        }
        if fresh.is_empty() {
            return inferred.into_values().collect();
        }
        frontier = fresh;
    }
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// The final triple set under a namespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    triples: Vec<SupportedTriple>,
    namespace: String,
}

impl KnowledgeGraph {
    /// Merges duplicates (sources and documents unioned, support maximized)
    /// and sorts by key.
    pub fn new(namespace: &str, triples: impl IntoIterator<Item = SupportedTriple>) -> Result<Self> {
        let namespace = namespace.trim_end_matches('/');
        if namespace.is_empty() {
            return Err(Error::EmptyNamespace);
        }
        let mut merged: BTreeMap<TripleKey, SupportedTriple> = BTreeMap::new();
        for t in triples {
            match merged.get_mut(&t.key()) {
                Some(e) => {
                    e.sources.extend(t.sources);
                    e.doc_ids.extend(t.doc_ids);
                    e.support = e.support.max(t.support);
                }
                None => {
                    merged.insert(t.key(), t);
                }
            }
        }
        Ok(KnowledgeGraph {
            triples: merged.into_values().collect(),
            namespace: namespace.to_owned(),
        })
    }

    pub fn triples(&self) -> &[SupportedTriple] {
        &self.triples
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn entities(&self) -> BTreeSet<&str> {
        self.triples
            .iter()
            .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
            .collect()
    }
}

/// Percent-encodes everything outside `[a-z0-9]`, after turning spaces
/// into hyphens. Literal hyphens are encoded so the slug stays reversible.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            ' ' => out.push('-'),
            'a'..='z' | '0'..='9' => out.push(c),
            _ => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    let _ = write!(out, "%{b:02X}");
                }
            }
        }
    }
    out
}

/// Inverse of [`slug`].
pub fn unslug(slug: &str) -> Option<String> {
    let bytes = slug.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'-' => out.push(b' '),
            b'%' => {
                let hex = slug.get(i + 1..i + 3)?;
                out.push(u8::from_str_radix(hex, 16).ok()?);
                i += 2;
            }
            b => out.push(b),
        }
        i += 1;
    }
    String::from_utf8(out).ok()
}

pub fn entity_iri(namespace: &str, label: &str) -> String {
    format!("{namespace}/{}", slug(label))
}

pub fn relation_iri(namespace: &str, label: &str) -> String {
    if label == SKOS_BROADER_LABEL {
        SKOS_BROADER_IRI.to_owned()
    } else {
        format!("{namespace}/rel/{}", slug(label))
    }
}

/// One `<s> <p> <o> .` line per triple, sorted, each ending in a newline.
pub fn serialize_ntriples(kg: &KnowledgeGraph) -> String {
    let ns = kg.namespace();
    let mut lines: Vec<String> = kg
        .triples()
        .iter()
        .map(|t| {
            format!(
                "<{}> <{}> <{}> .\n",
                entity_iri(ns, &t.subject),
                relation_iri(ns, &t.relation),
                entity_iri(ns, &t.object)
            )
        })
        .collect();
    lines.sort();
    lines.concat()
}

/// Reads back N-Triples written by [`serialize_ntriples`] under `namespace`.
pub fn parse_ntriples(text: &str, namespace: &str) -> Result<BTreeSet<TripleKey>> {
    let ns = namespace.trim_end_matches('/');
    let entity_prefix = format!("{ns}/");
    let rel_prefix = format!("{ns}/rel/");
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let err = |m: &str| Error::NTriples {
            line: i + 1,
            message: m.to_owned(),
        };
        if line.trim().is_empty() {
            continue;
        }
        let body = line
            .strip_suffix(" .")
            .ok_or_else(|| err("missing terminating ` .`"))?;
        let terms: Vec<&str> = body.split(' ').collect();
        let [s, p, o] = terms.as_slice() else {
            return Err(err("expected three terms"));
        };
        let iri = |t: &str| {
            t.strip_prefix('<')
                .and_then(|t| t.strip_suffix('>'))
                .map(str::to_owned)
                .ok_or_else(|| err("term is not an IRI"))
        };
        let (s, p, o) = (iri(s)?, iri(p)?, iri(o)?);
        let entity = |iri: &str| {
            iri.strip_prefix(&entity_prefix)
                .and_then(unslug)
                .ok_or_else(|| err("entity IRI outside the namespace"))
        };
        let relation = if p == SKOS_BROADER_IRI {
            SKOS_BROADER_LABEL.to_owned()
        } else {
            p.strip_prefix(&rel_prefix)
                .and_then(unslug)
                .ok_or_else(|| err("relation IRI outside the namespace"))?
        };
        out.insert(TripleKey::new(&entity(&s)?, &relation, &entity(&o)?));
    }
    Ok(out)
}

/// Line-delimited `{s, p, o, support, sources, doc_ids}` records in key order.
pub fn provenance_sidecar(kg: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for t in kg.triples() {
        out.push_str(&serde_json::to_string(t).expect("triples serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HistogramGroup {
    #[serde(rename = "EF")]
    Ef,
    #[serde(rename = "OIE")]
    Oie,
    #[serde(rename = "POS+CONS")]
    PosCons,
}

impl HistogramGroup {
    pub const ALL: [HistogramGroup; 3] = [HistogramGroup::Ef, HistogramGroup::Oie, HistogramGroup::PosCons];

    pub fn as_str(self) -> &'static str {
        match self {
            HistogramGroup::Ef => "EF",
            HistogramGroup::Oie => "OIE",
            HistogramGroup::PosCons => "POS+CONS",
        }
    }

    fn contains(self, t: &SupportedTriple) -> bool {
        match self {
            HistogramGroup::Ef => t.has_source(Provenance::Ef),
            HistogramGroup::Oie => t.has_source(Provenance::Oie),
            HistogramGroup::PosCons => t.has_source(Provenance::Pos) || t.has_source(Provenance::Cons),
        }
    }
}

/// Support value -> triple count, per source group. A triple with several
/// sources counts once in each of its groups; inferred triples are left out.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportHistogram {
    pub groups: BTreeMap<HistogramGroup, BTreeMap<usize, usize>>,
}

impl SupportHistogram {
    pub fn group(&self, g: HistogramGroup) -> Option<&BTreeMap<usize, usize>> {
        self.groups.get(&g)
    }

    pub fn total(&self, g: HistogramGroup) -> usize {
        self.group(g).map_or(0, |h| h.values().sum())
    }
}

pub fn support_histogram(triples: &[SupportedTriple]) -> SupportHistogram {
    let mut h = SupportHistogram::default();
    for t in triples {
        for g in HistogramGroup::ALL {
            if g.contains(t) {
                *h.groups.entry(g).or_default().entry(t.support).or_default() += 1;
            }
        }
    }
    h
}

/// Sentence texts, lowercased, with every known multi-word entity joined by
/// underscores (longest match first), one sentence per line.
pub fn export_underscored_corpus<'a>(
    sentences: &[SentenceAnnotation],
    entities: impl IntoIterator<Item = &'a str>,
) -> String {
    let multi: BTreeSet<Vec<&str>> = entities
        .into_iter()
        .map(|e| e.split(' ').collect::<Vec<_>>())
        .filter(|w| w.len() > 1)
        .collect();
    let longest = multi.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    for s in sentences {
        out.push_str(&underscore_sentence(&s.text.to_lowercase(), &multi, longest));
        out.push('\n');
    }
    out
}

fn underscore_sentence(text: &str, multi: &BTreeSet<Vec<&str>>, longest: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    let core = |w: &str| w.trim_matches(|c: char| !c.is_alphanumeric()).to_owned();
    let cores: Vec<String> = words.iter().map(|w| core(w)).collect();
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let matched = (2..=longest.min(words.len() - i)).rev().find(|&n| {
            let window: Vec<&str> = cores[i..i + n].iter().map(String::as_str).collect();
            // Inner words must carry no punctuation of their own.
            let clean_inside = (i + 1..i + n - 1).all(|k| words[k] == cores[k])
                && words[i].ends_with(cores[i].as_str())
                && words[i + n - 1].starts_with(cores[i + n - 1].as_str());
            clean_inside && multi.contains(&window)
        });
        match matched {
            Some(n) => {
                let first = words[i];
                let last = words[i + n - 1];
                let lead = &first[..first.len() - cores[i].len()];
                let trail = &last[cores[i + n - 1].len()..];
                parts.push(format!("{lead}{}{trail}", cores[i..i + n].join("_")));
                i += n;
            }
            None => {
                parts.push(words[i].to_owned());
                i += 1;
            }
        }
    }
    parts.join(" ")
}
