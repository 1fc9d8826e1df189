use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

use super::{content_lines, dag, normalized_field, read_to_string, tsv_fields};

/// Research-topic ontology: topic labels, `superTopicOf` edges and
/// alternative-label groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicOntology {
    topics: BTreeSet<String>,
    /// child -> direct super-topics
    parents: BTreeMap<String, BTreeSet<String>>,
    /// label -> representative of its alternative-label group
    group_of: BTreeMap<String, String>,
    /// representative -> every label of the group, representative included
    groups: BTreeMap<String, BTreeSet<String>>,
}

impl TopicOntology {
    /// Builds an ontology from (child, parent) super-topic edges and
    /// (label, representative) alternative-label pairs. Labels must already
    /// be normalized.
    pub fn new<'a>(
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
        alt_labels: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut onto = TopicOntology::default();
        for (child, parent) in edges {
            onto.add_edge(child, parent);
        }
        for (label, rep) in alt_labels {
            onto.add_alt(label, rep).map_err(Error::Config)?;
        }
        onto.check_acyclic()?;
        Ok(onto)
    }

    fn add_edge(&mut self, child: &str, parent: &str) {
        self.topics.insert(child.to_owned());
        self.topics.insert(parent.to_owned());
        self.parents
            .entry(child.to_owned())
            .or_default()
            .insert(parent.to_owned());
    }

    fn add_alt(&mut self, label: &str, rep: &str) -> Result<(), String> {
        for (l, r) in [(rep, rep), (label, rep)] {
            match self.group_of.get(l) {
                Some(existing) if existing != r => {
                    return Err(format!(
                        "`{l}` belongs to alternative groups `{existing}` and `{r}`"
                    ))
                }
                _ => {}
            }
        }
        if self.groups.contains_key(label) && label != rep {
            return Err(format!("`{label}` is the representative of its own alternative group"));
        }
        for l in [label, rep] {
            self.topics.insert(l.to_owned());
            self.group_of.insert(l.to_owned(), rep.to_owned());
            self.groups
                .entry(rep.to_owned())
                .or_default()
                .insert(l.to_owned());
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<()> {
        match dag::find_cycle(&self.parents) {
            Some(cycle) => Err(Error::Cycle {
                what: "superTopicOf edges",
                cycle,
            }),
            None => Ok(()),
        }
    }

    pub fn topics(&self) -> &BTreeSet<String> {
        &self.topics
    }

    pub fn contains(&self, label: &str) -> bool {
        self.topics.contains(label)
    }

    /// Direct super-topics of `label`.
    pub fn super_topics(&self, label: &str) -> impl Iterator<Item = &str> {
        self.parents.get(label).into_iter().flatten().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.as_str(), p.as_str())))
    }

    /// Every transitive super-topic of `label`.
    pub fn ancestors(&self, label: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = self.super_topics(label).collect();
        while let Some(t) = stack.pop() {
            if seen.insert(t.to_owned()) {
                stack.extend(self.super_topics(t));
            }
        }
        seen
    }

    /// The alternative-label set `label` belongs to, if any.
    pub fn alternatives(&self, label: &str) -> Option<&BTreeSet<String>> {
        self.group_of.get(label).and_then(|rep| self.groups.get(rep))
    }

    pub fn alt_groups(&self) -> impl Iterator<Item = &BTreeSet<String>> {
        self.groups.values()
    }
}

pub fn load_topic_ontology(path: impl AsRef<Path>) -> Result<TopicOntology> {
    let path = path.as_ref();
    parse_topic_ontology(path, &read_to_string(path)?)
}

/// Parses `<child>\tsuperTopicOf\t<parent>` and
/// `<label>\taltLabel\t<group-representative>` rows.
pub fn parse_topic_ontology(path: &Path, text: &str) -> Result<TopicOntology> {
    let mut onto = TopicOntology::default();
    for (line_no, line) in content_lines(text) {
        let f = tsv_fields(path, line_no, line, 3)?;
        let left = normalized_field(path, line_no, f[0], "label")?;
        let right = normalized_field(path, line_no, f[2], "label")?;
        match f[1] {
            "superTopicOf" => {
                if left == right {
                    return Err(Error::parse(path, line_no, format!("`{left}` is its own super-topic")));
                }
                onto.add_edge(&left, &right)
            }
            "altLabel" => onto
                .add_alt(&left, &right)
                .map_err(|m| Error::parse(path, line_no, m))?,
            other => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("unknown predicate `{other}` (expected superTopicOf or altLabel)"),
                ))
            }
        }
    }
    onto.check_acyclic()?;
    Ok(onto)
}
