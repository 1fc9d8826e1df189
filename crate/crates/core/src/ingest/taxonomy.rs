use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

use super::{content_lines, dag, normalized_field, read_to_string, tsv_fields};

/// Verb hypernym hierarchy with a unique root, used for Wu-Palmer similarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalTaxonomy {
    root: String,
    parents: BTreeMap<String, BTreeSet<String>>,
    /// Longest-path depth from the root; the root has depth 1. Using the
    /// longest path keeps every proper ancestor strictly shallower than its
    /// descendants, so similarity of a sense with itself is exactly 1.
    depth: BTreeMap<String, usize>,
    lemma_index: BTreeMap<String, BTreeSet<String>>,
}

impl LexicalTaxonomy {
    pub fn new<'a>(
        hypernyms: impl IntoIterator<Item = (&'a str, &'a str)>,
        senses: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut b = Builder::default();
        for (c, p) in hypernyms {
            b.edge(c, p);
        }
        for (lemma, s) in senses {
            b.sense(lemma, s);
        }
        b.finish().map_err(|e| match e {
            BuildError::Cycle(cycle) => Error::Cycle {
                what: "hypernym edges",
                cycle,
            },
            BuildError::Other(m) => Error::Config(m),
        })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn synsets(&self) -> impl Iterator<Item = &str> {
        self.depth.keys().map(String::as_str)
    }

    pub fn depth(&self, synset: &str) -> Option<usize> {
        self.depth.get(synset).copied()
    }

    pub fn hypernyms(&self, synset: &str) -> impl Iterator<Item = &str> {
        self.parents.get(synset).into_iter().flatten().map(String::as_str)
    }

    /// `synset` and all of its transitive hypernyms.
    pub fn ancestors_inclusive(&self, synset: &str) -> BTreeSet<&str> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![synset];
        while let Some(s) = stack.pop() {
            if let Some((k, _)) = self.depth.get_key_value(s) {
                if seen.insert(k.as_str()) {
                    stack.extend(self.hypernyms(s));
                }
            }
        }
        seen
    }

    /// Senses listed for exactly this lemma.
    pub fn senses_exact(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        self.lemma_index.get(lemma)
    }

    /// Senses for an inflected verb form: the exact lemma when indexed,
    /// otherwise every indexed base form reachable by the regular verb
    /// detachment rules (`uses` -> `use`, `applies` -> `apply`, ...).
    pub fn senses(&self, word: &str) -> BTreeSet<&str> {
        if let Some(s) = self.lemma_index.get(word) {
            return s.iter().map(String::as_str).collect();
        }
        const RULES: [(&str, &str); 8] = [
            ("s", ""),
            ("ies", "y"),
            ("es", "e"),
            ("es", ""),
            ("ed", "e"),
            ("ed", ""),
            ("ing", "e"),
            ("ing", ""),
        ];
        const IRREGULAR: [(&str, &str); 4] =
            [("is", "be"), ("has", "have"), ("does", "do"), ("goes", "go")];
        if let Some((_, base)) = IRREGULAR.iter().find(|(form, _)| *form == word) {
            if let Some(s) = self.lemma_index.get(*base) {
                return s.iter().map(String::as_str).collect();
            }
        }
        let mut out = BTreeSet::new();
        for (suffix, repl) in RULES {
            if let Some(stem) = word.strip_suffix(suffix) {
                if stem.is_empty() {
                    continue;
                }
                let base = format!("{stem}{repl}");
                if let Some(s) = self.lemma_index.get(&base) {
                    out.extend(s.iter().map(String::as_str));
                }
            }
        }
        out
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemma_index.keys().map(String::as_str)
    }
}

#[derive(Default)]
struct Builder {
    nodes: BTreeSet<String>,
    parents: BTreeMap<String, BTreeSet<String>>,
    lemma_index: BTreeMap<String, BTreeSet<String>>,
}

enum BuildError {
    Cycle(Vec<String>),
    Other(String),
}

impl Builder {
    fn edge(&mut self, child: &str, parent: &str) {
        self.nodes.insert(child.to_owned());
        self.nodes.insert(parent.to_owned());
        self.parents
            .entry(child.to_owned())
            .or_default()
            .insert(parent.to_owned());
    }

    fn sense(&mut self, lemma: &str, synset: &str) {
        self.nodes.insert(synset.to_owned());
        self.lemma_index
            .entry(lemma.to_owned())
            .or_default()
            .insert(synset.to_owned());
    }

    fn finish(self) -> std::result::Result<LexicalTaxonomy, BuildError> {
        if let Some(cycle) = dag::find_cycle(&self.parents) {
            return Err(BuildError::Cycle(cycle));
        }
        let roots: Vec<&String> = self
            .nodes
            .iter()
            .filter(|n| !self.parents.contains_key(*n))
            .collect();
        let root = match roots.as_slice() {
            [r] => (*r).clone(),
            [] => return Err(BuildError::Other("taxonomy is empty".into())),
            many => {
                return Err(BuildError::Other(format!(
                    "taxonomy must have a unique root, found {}: {}",
                    many.len(),
                    many.iter().take(5).map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
                )))
            }
        };
        let mut depth: BTreeMap<String, usize> = BTreeMap::new();
        for n in dag::parents_first_order(&self.nodes, &self.parents) {
            let d = self
                .parents
                .get(&n)
                .map(|ps| ps.iter().map(|p| depth[p]).max().unwrap_or(0))
                .unwrap_or(0)
                + 1;
            depth.insert(n, d);
        }
        Ok(LexicalTaxonomy {
            root,
            parents: self.parents,
            depth,
            lemma_index: self.lemma_index,
        })
    }
}

pub fn load_lexical_taxonomy(path: impl AsRef<Path>) -> Result<LexicalTaxonomy> {
    let path = path.as_ref();
    parse_lexical_taxonomy(path, &read_to_string(path)?)
}

/// Parses `<child-synset>\thypernym\t<parent-synset>` and
/// `<lemma>\tsense\t<synset>` rows.
pub fn parse_lexical_taxonomy(path: &Path, text: &str) -> Result<LexicalTaxonomy> {
    let mut b = Builder::default();
    for (line_no, line) in content_lines(text) {
        let f = tsv_fields(path, line_no, line, 3)?;
        let right = f[2].trim();
        if right.is_empty() || f[0].trim().is_empty() {
            return Err(Error::parse(path, line_no, "empty field"));
        }
        match f[1] {
            "hypernym" => {
                if f[0].trim() == right {
                    return Err(Error::parse(path, line_no, "synset is its own hypernym"));
                }
                b.edge(f[0].trim(), right)
            }
            "sense" => {
                let lemma = normalized_field(path, line_no, f[0], "lemma")?;
                b.sense(&lemma, right)
            }
            other => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("unknown predicate `{other}` (expected hypernym or sense)"),
                ))
            }
        }
    }
    b.finish().map_err(|e| match e {
        BuildError::Cycle(cycle) => Error::Cycle {
            what: "hypernym edges",
            cycle,
        },
        BuildError::Other(m) => Error::parse(path, 1, m),
    })
}
