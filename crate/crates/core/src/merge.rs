//! Merging of label variants: singular/plural unification on the head noun,
//! then consolidation onto the longest ontology alternative label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::TopicOntology;
use crate::integrate::{CorpusTriples, PairDocumentIndex};
use crate::model::{CandidateTriple, SentenceAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MergeReason {
    Lemma,
    OntologyAlt,
}

impl MergeReason {
    pub fn as_str(self) -> &'static str {
        match self {
            MergeReason::Lemma => "LEMMA",
            MergeReason::OntologyAlt => "ONTOLOGY_ALT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "LEMMA" => Some(MergeReason::Lemma),
            "ONTOLOGY_ALT" => Some(MergeReason::OntologyAlt),
            _ => None,
        }
    }
}

impl fmt::Display for MergeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One rewrite step. `from` and `to` always differ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MergeDecision {
    pub from: String,
    pub to: String,
    pub reason: MergeReason,
}

/// Noun surface form to lemma, learnt from the annotation tokens, plus the
/// corpus vocabulary used by the fallback plural rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lemmatizer {
    lemmas: BTreeMap<String, String>,
    vocabulary: BTreeSet<String>,
}

impl Lemmatizer {
    pub fn new(lemmas: BTreeMap<String, String>, vocabulary: BTreeSet<String>) -> Self {
        Lemmatizer { lemmas, vocabulary }
    }

    /// Uses the most frequent lemma of each noun surface form (ties go to
    /// the lexicographically smallest).
    pub fn from_annotations(sentences: &[SentenceAnnotation]) -> Self {
        let mut tallies: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        for tok in sentences.iter().flat_map(|s| &s.tokens) {
            let surface = tok.surface.to_lowercase();
            let lemma = tok.lemma.to_lowercase();
            vocabulary.insert(surface.clone());
            vocabulary.insert(lemma.clone());
            if tok.pos.starts_with("NN") && !lemma.contains(char::is_whitespace) {
                *tallies.entry(surface).or_default().entry(lemma).or_default() += 1;
            }
        }
        let lemmas = tallies
            .into_iter()
            .filter_map(|(surface, counts)| {
                let best = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
                Some((surface, best.0.clone()))
            })
            .collect();
        Lemmatizer { lemmas, vocabulary }
    }

    /// Lemma of one word: the annotation lemma when known, else the
    /// conservative plural rules.
    pub fn lemma_of(&self, word: &str) -> String {
        if let Some(l) = self.lemmas.get(word) {
            return l.clone();
        }
        if let Some(stem) = word.strip_suffix("ies") {
            if stem.len() >= 2 {
                return format!("{stem}y");
            }
        }
        for suffix in ["xes", "ches", "shes", "sses"] {
            if word.ends_with(suffix) {
                return word[..word.len() - 2].to_owned();
            }
        }
        match word.strip_suffix('s') {
            Some(stem) if stem.len() >= 3 && !stem.ends_with('s') && self.vocabulary.contains(stem) => {
                stem.to_owned()
            }
            _ => word.to_owned(),
        }
    }
}

/// Replaces the final token of `label` by its lemma.
pub fn lemma_normalize(label: &str, lemmatizer: &Lemmatizer) -> String {
    match label.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", lemmatizer.lemma_of(last)),
        None => lemmatizer.lemma_of(label),
    }
}

/// The longest label of `label`'s alternative group (character count, ties
/// to the lexicographically smallest), or `label` itself outside any group.
pub fn merge_by_ontology(label: &str, ontology: &TopicOntology) -> String {
    match ontology.alternatives(label) {
        Some(group) => longest(group).to_owned(),
        None => label.to_owned(),
    }
}

fn longest(group: &BTreeSet<String>) -> &str {
    // BTreeSet iterates in ascending order, so the first maximum wins ties.
    let mut best: Option<&str> = None;
    for l in group {
        if best.is_none_or(|b| l.chars().count() > b.chars().count()) {
            best = Some(l);
        }
    }
    best.expect("alternative groups are never empty")
}

/// Combines both rewrites into a projection over labels.
pub struct Merger<'a> {
    pub lemmatizer: &'a Lemmatizer,
    pub ontology: &'a TopicOntology,
}

impl Merger<'_> {
    /// Final form of `label` and the steps that led there.
    ///
    /// A label that is already an ontology alternative goes straight to its
    /// group's longest label. Otherwise it is lemmatized until stable and
    /// then looked up again, which makes the rewrite idempotent.
    pub fn rewrite(&self, label: &str) -> (String, Vec<MergeDecision>) {
        let mut steps = Vec::new();
        if self.ontology.alternatives(label).is_none() {
            let mut current = label.to_owned();
            for _ in 0..8 {
                let next = lemma_normalize(&current, self.lemmatizer);
                if next == current {
                    break;
                }
                current = next;
            }
            if current != label {
                steps.push(MergeDecision {
                    from: label.to_owned(),
                    to: current,
                    reason: MergeReason::Lemma,
                });
            }
        }
        let lemma = steps.last().map_or(label, |d| d.to.as_str());
        let merged = merge_by_ontology(lemma, self.ontology);
        if merged != lemma {
            steps.push(MergeDecision {
                from: lemma.to_owned(),
                to: merged.clone(),
                reason: MergeReason::OntologyAlt,
            });
        }
        (merged, steps)
    }
}

/// Corpus sets, pair index and decision log after merging.
#[derive(Debug, Clone, Default)]
pub struct MergeOutcome {
    pub triples: CorpusTriples,
    pub pairs: PairDocumentIndex,
    pub decisions: Vec<MergeDecision>,
}

/// Rewrites every endpoint through the merger. Triples whose endpoints
/// collapse are dropped and identical triples have their documents unioned.
pub fn apply_merging(triples: &CorpusTriples, pairs: &PairDocumentIndex, merger: &Merger) -> MergeOutcome {
    let mut universe: BTreeSet<&str> = triples.entities();
    for (s, o, _) in pairs.iter() {
        universe.insert(s);
        universe.insert(o);
    }
    let mut mapping: BTreeMap<&str, String> = BTreeMap::new();
    let mut decisions: BTreeSet<MergeDecision> = BTreeSet::new();
    for label in universe {
        let (to, steps) = merger.rewrite(label);
        decisions.extend(steps);
        mapping.insert(label, to);
    }
    let map = |l: &str| mapping[l].as_str();

    let merged = triples.iter().filter_map(|t| {
        CandidateTriple::new(map(&t.subject), &t.relation, map(&t.object), t.source, t.doc_ids.clone())
    });
    let mut index = PairDocumentIndex::new();
    for (s, o, docs) in pairs.iter() {
        let (a, b) = (map(s), map(o));
        if a != b {
            for d in docs {
                index.insert(a, b, d);
            }
        }
    }
    MergeOutcome {
        triples: CorpusTriples::from_triples(merged),
        pairs: index,
        decisions: decisions.into_iter().collect(),
    }
}

/// Follows logged substitutions from `label` to its final form.
pub fn replay(decisions: &[MergeDecision], label: &str) -> String {
    let step: BTreeMap<&str, &str> = decisions
        .iter()
        .map(|d| (d.from.as_str(), d.to.as_str()))
        .collect();
    let mut current = label;
    for _ in 0..=decisions.len() {
        match step.get(current) {
            Some(next) => current = next,
            None => break,
        }
    }
    current.to_owned()
}

/// Writes the log as `<from>\t<to>\t<reason>` rows.
pub fn write_merge_log(path: &Path, decisions: &[MergeDecision]) -> Result<()> {
    let mut out = Vec::new();
    for d in decisions {
        writeln!(out, "{}\t{}\t{}", d.from, d.to, d.reason).expect("writing to memory");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_merge_log(path: &Path) -> Result<Vec<MergeDecision>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                [from, to, reason] => Ok(MergeDecision {
                    from: from.to_string(),
                    to: to.to_string(),
                    reason: MergeReason::parse(reason)
                        .ok_or_else(|| Error::parse(path, i + 1, format!("unknown reason `{reason}`")))?,
                }),
                _ => Err(Error::parse(path, i + 1, "expected 3 tab-separated fields")),
            }
        })
        .collect()
}
