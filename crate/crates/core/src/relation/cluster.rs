//! Average-linkage agglomerative clustering of relation labels under cosine
//! distance, cut by average silhouette width.

use std::collections::BTreeSet;

use crate::ingest::EmbeddingTable;

use super::similarity::{cosine_similarity, embed_entity, weighted_mean};

/// A partition of relation labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition {
    /// Each cluster's members in ascending order; clusters ordered by their
    /// smallest member.
    pub clusters: Vec<Vec<String>>,
    /// Per-cluster mean of the member silhouettes, parallel to `clusters`.
    pub cluster_silhouettes: Vec<f64>,
    /// Mean silhouette over all labels; `None` when fewer than two labels
    /// could be clustered.
    pub average_silhouette: Option<f64>,
    /// Input labels without an embedding, left out of the clustering.
    pub unembedded: Vec<String>,
}

impl ClusterPartition {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.clusters.iter().flatten().map(String::as_str)
    }
}

/// Pairwise `1 - cos` distances.
pub fn distance_matrix(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = cosine_similarity(&vectors[i], &vectors[j]).unwrap_or(0.0);
            d[i][j] = 1.0 - c;
            d[j][i] = d[i][j];
        }
    }
    d
}

/// Silhouette of every element given a cluster id per element. Members of
/// singleton clusters score 0, as does an element whose intra- and
/// inter-cluster distances are both zero.
pub fn silhouettes(dist: &[Vec<f64>], assignment: &[usize]) -> Vec<f64> {
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    (0..assignment.len())
        .map(|i| {
            let own = assignment[i];
            if sizes[own] < 2 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, &c) in assignment.iter().enumerate() {
                if j != i {
                    sums[c] += dist[i][j];
                }
            }
            let within = sums[own] / (sizes[own] - 1) as f64;
            let nearest = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if !nearest.is_finite() {
                return 0.0;
            }
            let denom = within.max(nearest);
            if denom == 0.0 {
                0.0
            } else {
                (nearest - within) / denom
            }
        })
        .collect()
}

/// Successive partitions produced by average-linkage merging, starting from
/// singletons. Entry `m` is the assignment after `m` merges. Ties in the
/// closest-pair search go to the pair of lowest indices, so with sorted
/// input the result depends only on the label set.
pub fn merge_path(dist: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = dist.len();
    // Active clusters are identified by their smallest member index.
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut d: Vec<Vec<f64>> = dist.to_vec();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut path = vec![assignment_from(&owner)];
    for _ in 1..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if members[i].is_none() {
                continue;
            }
            for j in i + 1..n {
                if members[j].is_none() {
                    continue;
                }
                if best.is_none_or(|(b, _, _)| d[i][j] < b) {
                    best = Some((d[i][j], i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let (ni, nj) = (
            members[i].as_ref().unwrap().len() as f64,
            members[j].as_ref().unwrap().len() as f64,
        );
        for k in 0..n {
            if k != i && k != j && members[k].is_some() {
                let merged = (ni * d[i][k] + nj * d[j][k]) / (ni + nj);
                d[i][k] = merged;
                d[k][i] = merged;
            }
        }
        let moved = members[j].take().unwrap();
        for &m in &moved {
            owner[m] = i;
        }
        members[i].as_mut().unwrap().extend(moved);
        path.push(assignment_from(&owner));
    }
    path
}

/// Renumbers cluster owners densely in order of first appearance.
fn assignment_from(owner: &[usize]) -> Vec<usize> {
    let mut ids = vec![usize::MAX; owner.len()];
    let mut next = 0;
    owner
        .iter()
        .map(|&o| {
            if ids[o] == usize::MAX {
                ids[o] = next;
                next += 1;
            }
            ids[o]
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Clusters the embeddable labels and picks a cut.
///
/// The candidate cuts are the partitions on the merge path with at least two
/// clusters and at least one non-singleton cluster. The finest candidate
/// whose average silhouette reaches `target` wins; failing that, the
/// candidate with the highest average (the finest on ties). With no
/// candidate at all every label lands in one cluster.
pub fn cluster_relations(labels: &[String], table: &EmbeddingTable, target: f64) -> ClusterPartition {
    let unique: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    let mut names = Vec::new();
    let mut vectors = Vec::new();
    let mut unembedded = Vec::new();
    for l in unique {
        match embed_entity(l, table) {
            Ok(e) if e.vector.iter().any(|x| *x != 0.0) => {
                names.push(l.to_owned());
                vectors.push(e.vector);
            }
            _ => unembedded.push(l.to_owned()),
        }
    }
    let n = names.len();
    if n < 2 {
        log::info!("clustering skipped: {n} embeddable relation labels");
        return ClusterPartition {
            clusters: if n == 0 { vec![] } else { vec![names] },
            cluster_silhouettes: vec![0.0; n.min(1)],
            average_silhouette: None,
            unembedded,
        };
    }

    let dist = distance_matrix(&vectors);
    let path = merge_path(&dist);
    let mut chosen: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    let mut best_fallback: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    // Finest first: path[1] has n - 1 clusters.
    for assignment in path.iter().skip(1) {
        let k = assignment.iter().max().unwrap() + 1;
        if k < 2 {
            continue;
        }
        let s = silhouettes(&dist, assignment);
        let avg = mean(&s);
        if avg >= target {
            chosen = Some((assignment.clone(), s, avg));
            break;
        }
        if best_fallback.as_ref().is_none_or(|(_, _, b)| avg > *b) {
            best_fallback = Some((assignment.clone(), s, avg));
        }
    }
    let (assignment, sil, avg) = match (chosen, best_fallback) {
        (Some(c), _) => c,
        (None, Some(f)) => {
            log::info!("no cut reaches silhouette {target}; best is {:.4}", f.2);
            f
        }
        (None, None) => {
            log::info!("only two relation labels; keeping them together");
            let all = vec![0; n];
            let s = vec![0.0; n];
            (all, s, 0.0)
        }
    };
    let k = assignment.iter().max().unwrap() + 1;
    let mut clusters: Vec<Vec<String>> = vec![Vec::new(); k];
    let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (i, &c) in assignment.iter().enumerate() {
        clusters[c].push(names[i].clone());
        per_cluster[c].push(sil[i]);
    }
    ClusterPartition {
        clusters,
        cluster_silhouettes: per_cluster.iter().map(|s| mean(s)).collect(),
        average_silhouette: Some(avg),
        unembedded,
    }
}

/// The member nearest (cosine) to the unweighted mean of the cluster's
/// vectors; ties go to the lexicographically smallest label.
pub fn cluster_representative<'a>(members: &'a [String], table: &EmbeddingTable) -> Option<&'a str> {
    let vectors: Vec<(&str, Vec<f64>)> = members
        .iter()
        .filter_map(|m| embed_entity(m, table).ok().map(|e| (m.as_str(), e.vector)))
        .collect();
    let centroid = weighted_mean(vectors.iter().map(|(_, v)| (v.as_slice(), 1.0)))?;
    let mut sorted = vectors;
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let mut best: Option<(&str, f64)> = None;
    for (m, v) in sorted {
        let c = cosine_similarity(&v, &centroid).unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((m, c));
        }
    }
    best.map(|(m, _)| m)
}
