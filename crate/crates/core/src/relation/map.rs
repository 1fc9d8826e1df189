//! The canonical relation map and its application to triples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{load_relation_pairs, EmbeddingTable};
use crate::model::{SupportedTriple, TripleKey};

use super::cluster::{cluster_representative, ClusterPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MapProvenance {
    ClusterCentroid,
    EfStatic,
    Curated,
}

impl MapProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            MapProvenance::ClusterCentroid => "CLUSTER_CENTROID",
            MapProvenance::EfStatic => "EF_STATIC",
            MapProvenance::Curated => "CURATED",
        }
    }
}

/// Default mapping of extractor-framework relation types.
pub const DEFAULT_EF_STATIC_MAP: &[(&str, &str)] = &[
    ("used-for", "uses"),
    ("hyponym-of", "skos:broader"),
    ("part-of", "includes"),
    ("feature-of", "includes"),
    ("evaluate-for", "evaluates"),
    ("compare", "compares"),
];

pub fn default_ef_static_map() -> BTreeMap<String, String> {
    DEFAULT_EF_STATIC_MAP
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Relation label -> representative. Every representative maps to itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationMap {
    entries: BTreeMap<String, (String, MapProvenance)>,
}

impl RelationMap {
    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(|(t, _)| t.as_str())
    }

    pub fn provenance(&self, label: &str) -> Option<MapProvenance> {
        self.entries.get(label).map(|(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, MapProvenance)> {
        self.entries
            .iter()
            .map(|(k, (v, p))| (k.as_str(), v.as_str(), *p))
    }

    /// Plain label -> representative pairs.
    pub fn pairs(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect()
    }

    /// The set of representatives.
    pub fn range(&self) -> BTreeSet<&str> {
        self.entries.values().map(|(v, _)| v.as_str()).collect()
    }

    pub fn is_idempotent(&self) -> bool {
        self.entries
            .values()
            .all(|(t, _)| self.get(t) == Some(t.as_str()))
    }

    /// `verb\trepresentative` rows for every entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v, _) in self.iter() {
            let _ = writeln!(out, "{k}\t{v}");
        }
        out
    }
}

/// Builds the map from cluster representatives, then the EF static entries,
/// then the curated overrides, and resolves chains so the result is
/// idempotent. Curated targets always map to themselves.
pub fn build_relation_map(
    partition: &ClusterPartition,
    table: &EmbeddingTable,
    curated: &BTreeMap<String, String>,
    ef_static: &BTreeMap<String, String>,
) -> Result<RelationMap> {
    let mut raw: BTreeMap<String, (String, MapProvenance)> = BTreeMap::new();
    for members in &partition.clusters {
        let rep = cluster_representative(members, table).unwrap_or(&members[0]);
        for m in members {
            raw.insert(m.clone(), (rep.to_owned(), MapProvenance::ClusterCentroid));
        }
    }
    for (k, v) in ef_static {
        raw.insert(k.clone(), (v.clone(), MapProvenance::EfStatic));
    }
    check_idempotent(curated)?;
    for (k, v) in curated {
        raw.insert(k.clone(), (v.clone(), MapProvenance::Curated));
    }
    for v in curated.values() {
        raw.insert(v.clone(), (v.clone(), MapProvenance::Curated));
    }

    let mut entries = BTreeMap::new();
    for (k, (_, prov)) in &raw {
        let mut path = vec![k.clone()];
        let mut current = k.as_str();
        while let Some((next, _)) = raw.get(current) {
            if next == current {
                break;
            }
            if path.iter().any(|p| p == next) {
                path.push(next.clone());
                return Err(Error::Cycle {
                    what: "relation map",
                    cycle: path,
                });
            }
            path.push(next.clone());
            current = next;
        }
        entries.insert(k.clone(), (current.to_owned(), *prov));
    }
    let targets: Vec<(String, MapProvenance)> =
        entries.values().map(|(t, p)| (t.clone(), *p)).collect();
    for (t, p) in targets {
        entries.entry(t.clone()).or_insert((t, p));
    }
    let map = RelationMap { entries };
    debug_assert!(map.is_idempotent());
    Ok(map)
}

fn check_idempotent(map: &BTreeMap<String, String>) -> Result<()> {
    for (from, to) in map {
        if let Some(next) = map.get(to) {
            if next != to {
                return Err(Error::NonIdempotentMap {
                    from: from.clone(),
                    to: to.clone(),
                    next: next.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Reads a curated `verb\trepresentative` file. Chains are rejected; verbs
/// outside `known` only produce a warning.
pub fn import_curated_map(path: &Path, known: &BTreeSet<String>) -> Result<BTreeMap<String, String>> {
    let map = load_relation_pairs(path)?;
    check_idempotent(&map)?;
    for verb in map.keys().filter(|v| !known.contains(*v)) {
        log::warn!("{}: `{verb}` is not a known relation label", path.display());
    }
    Ok(map)
}

/// Lists every cluster with its representative as `verb\trepresentative`
/// rows under a comment header, followed by the remaining map entries.
/// The file can be edited and fed back through [`import_curated_map`].
pub fn export_relation_clusters(partition: &ClusterPartition, map: &RelationMap) -> String {
    let mut out = String::new();
    let mut listed = BTreeSet::new();
    for (i, members) in partition.clusters.iter().enumerate() {
        let sil = partition.cluster_silhouettes.get(i).copied().unwrap_or(0.0);
        let _ = writeln!(out, "# cluster {} ({} members, silhouette {sil:.4})", i + 1, members.len());
        for m in members {
            let rep = map.get(m).unwrap_or(m);
            let _ = writeln!(out, "{m}\t{rep}");
            listed.insert(m.as_str());
        }
    }
    let rest: Vec<_> = map.iter().filter(|(k, _, _)| !listed.contains(k)).collect();
    if !rest.is_empty() {
        let _ = writeln!(out, "# other entries");
        for (k, v, _) in rest {
            let _ = writeln!(out, "{k}\t{v}");
        }
    }
    out
}

/// Replaces each relation by its representative and merges triples that
/// become identical (sources and documents unioned, support maximized).
/// Returns the mapped triples, sorted, and the labels the map did not cover.
pub fn apply_relation_map(
    triples: &[SupportedTriple],
    map: &RelationMap,
) -> (Vec<SupportedTriple>, BTreeSet<String>) {
    let mut unmapped = BTreeSet::new();
    let mut merged: BTreeMap<TripleKey, SupportedTriple> = BTreeMap::new();
    for t in triples {
        let relation = match map.get(&t.relation) {
            Some(r) => r.to_owned(),
            None => {
                if unmapped.insert(t.relation.clone()) {
                    log::debug!("relation `{}` is not in the map", t.relation);
                }
                t.relation.clone()
            }
        };
        let key = TripleKey::new(&t.subject, &relation, &t.object);
        match merged.get_mut(&key) {
            Some(existing) => {
                existing.sources.extend(t.sources.iter().copied());
                existing.doc_ids.extend(t.doc_ids.iter().cloned());
                existing.support = existing.support.max(t.support);
            }
            None => {
                merged.insert(
                    key,
                    SupportedTriple {
                        relation,
                        ..t.clone()
                    },
                );
            }
        }
    }
    (merged.into_values().collect(), unmapped)
}
