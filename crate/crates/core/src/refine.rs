//! Label cleaning, conjunction splitting, per-document acronym expansion and
//! the background-frequency genericity filter.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::ingest::{BackgroundCounts, CorpusCounts};
use crate::integrate::{CorpusTriples, PairDocumentIndex};
use crate::model::{normalize_label, CandidateTriple, SentenceAnnotation};

/// Cleans one label. `None` means the label was removed, either because it
/// is blacklisted or because nothing is left after cleaning.
///
/// Possessive `'s`, apostrophes and dots are deleted; other punctuation
/// (except hyphens inside a word) becomes a space. Leading and trailing
/// stop-words are then trimmed.
pub fn clean_entity(
    label: &str,
    blacklist: &BTreeSet<String>,
    stopwords: &BTreeSet<String>,
) -> Option<String> {
    if blacklist.contains(label) {
        return None;
    }
    let stripped = strip_punctuation(label);
    let words: Vec<&str> = stripped.split_whitespace().collect();
    let first = words.iter().position(|w| !stopwords.contains(*w))?;
    let last = words.iter().rposition(|w| !stopwords.contains(*w))?;
    let cleaned = normalize_label(&words[first..=last].join(" "))?;
    (!blacklist.contains(&cleaned)).then_some(cleaned)
}

fn strip_punctuation(label: &str) -> String {
    let no_possessive = label.replace("'s ", " ").replace("’s ", " ");
    let no_possessive = no_possessive
        .strip_suffix("'s")
        .or_else(|| no_possessive.strip_suffix("’s"))
        .unwrap_or(&no_possessive);
    let chars: Vec<char> = no_possessive.chars().collect();
    let mut out = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '\'' | '’' | '.' => {}
            '-' if i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric() =>
            {
                out.push('-')
            }
            c if c.is_alphanumeric() || c.is_whitespace() => out.push(c),
            _ => out.push(' '),
        }
    }
    out
}

/// Splits a label on every standalone `and`, dropping empty parts.
pub fn split_entity(label: &str) -> Vec<String> {
    let words: Vec<&str> = label.split_whitespace().collect();
    words
        .split(|w| *w == "and")
        .filter_map(|part| normalize_label(&strip_punctuation(&part.join(" "))))
        .collect()
}

/// Acronym (lowercased) to expansion, for one document.
pub type DocAcronyms = BTreeMap<String, String>;

/// Acronym definitions found in each document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcronymMap {
    by_doc: BTreeMap<String, DocAcronyms>,
}

impl AcronymMap {
    /// Scans every document's sentences in order.
    pub fn build(sentences: &[SentenceAnnotation], stopwords: &BTreeSet<String>) -> Self {
        let mut grouped: BTreeMap<&str, Vec<&SentenceAnnotation>> = BTreeMap::new();
        for s in sentences {
            grouped.entry(&s.doc_id).or_default().push(s);
        }
        let by_doc = grouped
            .into_iter()
            .map(|(doc, mut sents)| {
                sents.sort_by_key(|s| s.sent_idx);
                (doc.to_owned(), build_acronym_map(&sents, stopwords))
            })
            .filter(|(_, m)| !m.is_empty())
            .collect();
        AcronymMap { by_doc }
    }

    pub fn for_doc(&self, doc_id: &str) -> Option<&DocAcronyms> {
        self.by_doc.get(doc_id)
    }

    pub fn docs(&self) -> impl Iterator<Item = (&str, &DocAcronyms)> {
        self.by_doc.iter().map(|(d, m)| (d.as_str(), m))
    }
}

fn acronym_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(\s*([A-Za-z][A-Za-z0-9&-]{1,9})\s*\)").unwrap())
}

/// Collects `<words> (<ACRONYM>)` definitions from one document's sentences.
///
/// The acronym must be 2 to 10 characters, start with a letter and be
/// mostly uppercase. Its letters must equal, as a multiset, the initials of
/// the shortest run of preceding words that covers them, with stop-words in
/// the run counted either not at all or in full. The first definition of an
/// acronym wins.
pub fn build_acronym_map(
    doc_sentences: &[&SentenceAnnotation],
    stopwords: &BTreeSet<String>,
) -> DocAcronyms {
    let mut out = DocAcronyms::new();
    for s in doc_sentences {
        for cap in acronym_pattern().captures_iter(&s.text) {
            let whole = cap.get(0).unwrap();
            let acronym = cap.get(1).unwrap().as_str();
            let Some(letters) = acronym_letters(acronym) else {
                continue;
            };
            let before = &s.text[..whole.start()];
            if let Some(expansion) = match_expansion(before, &letters, stopwords) {
                out.entry(acronym_key(acronym)).or_insert(expansion);
            }
        }
    }
    out
}

fn acronym_key(acronym: &str) -> String {
    let lower = acronym.to_lowercase();
    match lower.strip_suffix('s') {
        Some(stem) if acronym.ends_with('s') && stem.len() >= 2 && is_plural_form(acronym) => {
            stem.to_owned()
        }
        _ => lower,
    }
}

// "SVMs": a trailing lowercase s after an all-uppercase stem.
fn is_plural_form(acronym: &str) -> bool {
    let stem = &acronym[..acronym.len() - 1];
    acronym.ends_with('s') && stem.chars().all(|c| !c.is_lowercase())
}

/// Sorted lowercase letters an acronym spells, or `None` if the token does
/// not look like an acronym.
fn acronym_letters(acronym: &str) -> Option<Vec<char>> {
    let n = acronym.chars().count();
    if !(2..=10).contains(&n) || !acronym.starts_with(|c: char| c.is_alphabetic()) {
        return None;
    }
    let body = if is_plural_form(acronym) && n > 2 {
        &acronym[..acronym.len() - 1]
    } else {
        acronym
    };
    let alpha: Vec<char> = body.chars().filter(|c| c.is_alphabetic()).collect();
    let upper = alpha.iter().filter(|c| c.is_uppercase()).count();
    if alpha.len() < 2 || upper * 2 <= alpha.len() {
        return None;
    }
    let mut letters: Vec<char> = alpha.iter().flat_map(|c| c.to_lowercase()).collect();
    letters.sort_unstable();
    Some(letters)
}

fn match_expansion(before: &str, letters: &[char], stopwords: &BTreeSet<String>) -> Option<String> {
    let words: Vec<&str> = before.split_whitespace().collect();
    let mut content: Vec<char> = Vec::new();
    let mut all: Vec<char> = Vec::new();
    let spells = |initials: &[char]| {
        let mut sorted = initials.to_vec();
        sorted.sort_unstable();
        sorted == letters
    };
    for start in (0..words.len()).rev() {
        let raw = words[start];
        // A clause boundary right after this word ends the search.
        if start + 1 < words.len() && raw.ends_with([',', ';', ':', '.']) {
            return None;
        }
        let word: String = raw
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if word.is_empty() {
            return None;
        }
        let initials = word.split('-').filter_map(|p| p.chars().next());
        if stopwords.contains(&word) {
            all.extend(initials);
            continue;
        }
        let initials: Vec<char> = initials.collect();
        content.extend(&initials);
        all.extend(&initials);
        if content.len() > letters.len() {
            return None;
        }
        if spells(&content) || spells(&all) {
            return normalize_label(&strip_punctuation(&words[start..].join(" ")));
        }
    }
    None
}

/// Rewrites every standalone acronym token of `label` with its expansion.
/// An acronym directly following its own expansion is dropped instead.
pub fn expand_acronyms(label: &str, acronyms: &DocAcronyms) -> String {
    let mut out: Vec<&str> = Vec::new();
    for word in label.split(' ') {
        match acronyms.get(word) {
            Some(exp) => {
                let exp_words: Vec<&str> = exp.split(' ').collect();
                if !out.ends_with(&exp_words) {
                    out.extend(exp_words);
                }
            }
            None => out.push(word),
        }
    }
    out.join(" ")
}

/// Frequencies of one entity in the three background corpora and the two
/// ratios derived from them. A zero denominator yields `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericityStats {
    pub in_domain: f64,
    pub sibling_domain: f64,
    pub out_domain: f64,
    pub sibling_ratio: f64,
    pub out_ratio: f64,
}

impl GenericityStats {
    pub fn compute(entity: &str, counts: &BackgroundCounts) -> Self {
        let freq = |c: &CorpusCounts| c.frequency(entity);
        let (a, b, c) = (
            freq(&counts.in_domain),
            freq(&counts.sibling_domain),
            freq(&counts.out_domain),
        );
        let ratio = |den: f64| if den == 0.0 { f64::INFINITY } else { a / den };
        GenericityStats {
            in_domain: a,
            sibling_domain: b,
            out_domain: c,
            sibling_ratio: ratio(b),
            out_ratio: ratio(c),
        }
    }
}

/// True if the entity is kept: whitelisted, or present in-domain with both
/// ratios meeting their thresholds.
pub fn genericity_filter(
    entity: &str,
    counts: &BackgroundCounts,
    whitelist: &BTreeSet<String>,
    sibling_threshold: f64,
    out_threshold: f64,
) -> bool {
    if whitelist.contains(entity) {
        return true;
    }
    let st = GenericityStats::compute(entity, counts);
    st.in_domain > 0.0 && st.sibling_ratio >= sibling_threshold && st.out_ratio >= out_threshold
}

/// Result of refining the corpus sets.
#[derive(Debug, Clone, Default)]
pub struct RefineOutcome {
    pub triples: CorpusTriples,
    pub pairs: PairDocumentIndex,
    /// Labels removed by the blacklist or emptied by cleaning.
    pub removed: BTreeSet<String>,
    /// Labels dropped as too generic.
    pub generic: BTreeSet<String>,
}

/// All refiner settings.
#[derive(Debug, Clone, Default)]
pub struct Refiner {
    pub blacklist: BTreeSet<String>,
    pub whitelist: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
    /// Without counts the genericity filter is skipped.
    pub counts: Option<BackgroundCounts>,
    pub sibling_threshold: f64,
    pub out_threshold: f64,
}

impl Refiner {
    /// Cleans, splits and expands `label` as it appears in one document,
    /// then drops generic parts. Whitelisted labels pass through unchanged.
    pub fn refine_label(&self, label: &str, acronyms: Option<&DocAcronyms>) -> Vec<String> {
        self.refine_traced(label, acronyms).0
    }

    fn refine_traced(
        &self,
        label: &str,
        acronyms: Option<&DocAcronyms>,
    ) -> (Vec<String>, bool, Vec<String>) {
        if self.blacklist.contains(label) {
            return (vec![], true, vec![]);
        }
        if self.whitelist.contains(label) {
            return (vec![label.to_owned()], false, vec![]);
        }
        let Some(cleaned) = clean_entity(label, &self.blacklist, &self.stopwords) else {
            return (vec![], true, vec![]);
        };
        let mut kept = Vec::new();
        let mut generic = Vec::new();
        for part in split_entity(&cleaned) {
            let Some(part) = clean_entity(&part, &self.blacklist, &self.stopwords) else {
                continue;
            };
            let part = match acronyms {
                Some(a) if !self.whitelist.contains(&part) => expand_acronyms(&part, a),
                _ => part,
            };
            let keep = self.counts.as_ref().is_none_or(|c| {
                genericity_filter(&part, c, &self.whitelist, self.sibling_threshold, self.out_threshold)
            });
            if keep {
                if !kept.contains(&part) {
                    kept.push(part);
                }
            } else {
                generic.push(part);
            }
        }
        let removed = kept.is_empty() && generic.is_empty();
        (kept, removed, generic)
    }

    /// Refines every triple endpoint and pair-index label, one document at a
    /// time so that acronym expansions never leak across documents.
    pub fn refine_corpus(
        &self,
        triples: &CorpusTriples,
        pairs: &PairDocumentIndex,
        acronyms: &AcronymMap,
    ) -> RefineOutcome {
        let mut out = RefineOutcome::default();
        let mut cache: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        let mut rewrite = |label: &str, doc: &str, out: &mut RefineOutcome| -> Vec<String> {
            // Documents without acronyms share one cache slot.
            let doc_acr = acronyms.for_doc(doc);
            let key = (label.to_owned(), if doc_acr.is_some() { doc.to_owned() } else { String::new() });
            cache
                .entry(key)
                .or_insert_with(|| {
                    let (kept, removed, generic) = self.refine_traced(label, doc_acr);
                    if removed {
                        out.removed.insert(label.to_owned());
                    }
                    out.generic.extend(generic);
                    kept
                })
                .clone()
        };

        let mut refined = Vec::new();
        for t in triples.iter() {
            for doc in &t.doc_ids {
                let subjects = rewrite(&t.subject, doc, &mut out);
                let objects = rewrite(&t.object, doc, &mut out);
                for s in &subjects {
                    for o in &objects {
                        let docs: BTreeSet<String> = [doc.clone()].into();
                        refined.extend(CandidateTriple::new(s, &t.relation, o, t.source, docs));
                    }
                }
            }
        }
        out.triples = CorpusTriples::from_triples(refined);

        let mut index = PairDocumentIndex::new();
        for (s, o, docs) in pairs.iter() {
            for doc in docs {
                let subjects = rewrite(s, doc, &mut out);
                let objects = rewrite(o, doc, &mut out);
                for a in &subjects {
                    for b in objects.iter().filter(|b| *b != a) {
                        index.insert(a, b, doc);
                    }
                }
            }
        }
        out.pairs = index;
        out
    }
}
