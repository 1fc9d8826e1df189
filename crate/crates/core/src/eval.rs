//! Precision, recall and F-measure against an annotated gold standard.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::GoldStandardEntry;
use crate::model::{normalize_label, EvaluationReport, Provenance, SupportedTriple, TripleKey};

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn fmeasure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Deduplicated gold verdicts. The gold triples are the evaluation
/// universe: predictions outside it are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldStandard {
    verdicts: BTreeMap<TripleKey, bool>,
}

impl GoldStandard {
    /// Rejects an empty list and any triple listed with both verdicts.
    pub fn new(entries: &[GoldStandardEntry]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyGold);
        }
        let mut verdicts = BTreeMap::new();
        for e in entries {
            if let Some(prev) = verdicts.insert(e.key(), e.verdict) {
                if prev != e.verdict {
                    return Err(Error::ConflictingGold(e.key().to_string()));
                }
            }
        }
        Ok(GoldStandard { verdicts })
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn verdict(&self, key: &TripleKey) -> Option<bool> {
        self.verdicts.get(key).copied()
    }

    pub fn true_count(&self) -> usize {
        self.verdicts.values().filter(|v| **v).count()
    }

    pub fn keys(&self) -> impl Iterator<Item = &TripleKey> {
        self.verdicts.keys()
    }
}

/// Scores a predicted set. Duplicates and iteration order do not matter.
pub fn evaluate<'a>(predicted: impl IntoIterator<Item = &'a TripleKey>, gold: &GoldStandard) -> EvaluationReport {
    let predicted: BTreeSet<&TripleKey> = predicted.into_iter().collect();
    let (mut tp, mut fp) = (0, 0);
    for k in &predicted {
        match gold.verdict(k) {
            Some(true) => tp += 1,
            Some(false) => fp += 1,
            None => {}
        }
    }
    let fn_ = gold.true_count() - tp;
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    if precision + recall == 0.0 {
        degenerate = true;
    }
    EvaluationReport {
        tp,
        fp,
        fn_,
        precision,
        recall,
        fmeasure: fmeasure(precision, recall),
        degenerate,
    }
}

/// `<method>\t<P>\t<R>\t<F>\t<TP>\t<FP>\t<FN>` with four decimals.
pub fn report_row(method: &str, r: &EvaluationReport) -> String {
    format!(
        "{method}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
        r.precision, r.recall, r.fmeasure, r.tp, r.fp, r.fn_
    )
}

/// Method name -> triples it produced.
pub type Memberships = BTreeMap<String, BTreeSet<TripleKey>>;

/// Method names used by [`method_memberships`] and the standard combinations.
pub const METHOD_EF: &str = "EF";
pub const METHOD_OIE: &str = "OIE";
pub const METHOD_POS: &str = "POS";
pub const METHOD_CONS: &str = "CONS";

/// The eight source combinations reported by default.
pub const STANDARD_COMBINATIONS: [(&str, &[&str]); 8] = [
    ("EF", &[METHOD_EF]),
    ("OpenIE", &[METHOD_OIE]),
    ("PoS", &[METHOD_POS]),
    ("PoS+Cons", &[METHOD_POS, METHOD_CONS]),
    ("EF+OpenIE", &[METHOD_EF, METHOD_OIE]),
    ("EF+PoS+Cons", &[METHOD_EF, METHOD_POS, METHOD_CONS]),
    ("OpenIE+PoS+Cons", &[METHOD_OIE, METHOD_POS, METHOD_CONS]),
    ("OpenIE+EF+PoS+Cons", &[METHOD_OIE, METHOD_EF, METHOD_POS, METHOD_CONS]),
];

/// Splits graph triples by the method that produced them: EF, OIE, PoS
/// triples that passed on support, and triples admitted by the classifier.
/// Inferred triples belong to no method.
pub fn method_memberships(triples: &[SupportedTriple], min_support: usize) -> Memberships {
    let mut m: Memberships = [METHOD_EF, METHOD_OIE, METHOD_POS, METHOD_CONS]
        .iter()
        .map(|k| (k.to_string(), BTreeSet::new()))
        .collect();
    for t in triples {
        let mut put = |k: &str| {
            m.get_mut(k).unwrap().insert(t.key());
        };
        if t.has_source(Provenance::Ef) {
            put(METHOD_EF);
        }
        if t.has_source(Provenance::Oie) {
            put(METHOD_OIE);
        }
        if t.has_source(Provenance::Cons) {
            put(METHOD_CONS);
        } else if t.has_source(Provenance::Pos) && t.support >= min_support {
            put(METHOD_POS);
        }
    }
    m
}

/// Scores every standard combination over the union of its methods.
pub fn evaluate_combinations(memberships: &Memberships, gold: &GoldStandard) -> Vec<(String, EvaluationReport)> {
    STANDARD_COMBINATIONS
        .iter()
        .map(|(name, methods)| {
            let union: BTreeSet<&TripleKey> = methods
                .iter()
                .filter_map(|m| memberships.get(*m))
                .flatten()
                .collect();
            (name.to_string(), evaluate(union, gold))
        })
        .collect()
}

/// Counts behind a successful universe check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseSummary {
    pub unique: usize,
    pub memberships: usize,
    pub per_method: BTreeMap<String, usize>,
}

/// Checks that method memberships and the gold standard describe the same
/// triple universe: every listed triple is annotated, every annotated
/// triple is listed at least once, and no method lists a triple twice.
pub fn check_gold_universe(gold: &GoldStandard, memberships: &Memberships) -> Result<UniverseSummary> {
    let mut covered: BTreeSet<&TripleKey> = BTreeSet::new();
    let mut per_method = BTreeMap::new();
    for (method, keys) in memberships {
        for k in keys {
            if gold.verdict(k).is_none() {
                return Err(Error::GoldUniverse(format!("{method} lists unannotated triple {k}")));
            }
            covered.insert(k);
        }
        per_method.insert(method.clone(), keys.len());
    }
    if let Some(k) = gold.keys().find(|k| !covered.contains(k)) {
        return Err(Error::GoldUniverse(format!("annotated triple {k} belongs to no method")));
    }
    let total: usize = per_method.values().sum();
    Ok(UniverseSummary {
        unique: gold.len(),
        memberships: total,
        per_method,
    })
}

/// Reads `<method>\t<subject>\t<relation>\t<object>` rows. A method listing
/// the same triple twice is an error.
pub fn load_memberships(path: &Path) -> Result<Memberships> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Memberships::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let [method, s, r, o] = f.as_slice() else {
            return Err(Error::parse(path, i + 1, "expected 4 tab-separated fields"));
        };
        let norm = |x: &str| normalize_label(x).ok_or_else(|| Error::parse(path, i + 1, "empty label"));
        let key = TripleKey::new(&norm(s)?, &norm(r)?, &norm(o)?);
        if !out.entry(method.trim().to_owned()).or_default().insert(key.clone()) {
            return Err(Error::parse(path, i + 1, format!("{method} lists {key} twice")));
        }
    }
    Ok(out)
}
