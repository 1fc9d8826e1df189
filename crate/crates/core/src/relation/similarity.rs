use crate::error::{Error, Result};
use crate::ingest::EmbeddingTable;

/// Cosine of the angle between two vectors, clamped to [-1, 1].
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Weighted component-wise mean. `None` for an empty input or zero total weight.
pub fn weighted_mean<'a>(rows: impl IntoIterator<Item = (&'a [f64], f64)>) -> Option<Vec<f64>> {
    let mut sum: Option<Vec<f64>> = None;
    let mut total = 0.0;
    for (v, w) in rows {
        let acc = sum.get_or_insert_with(|| vec![0.0; v.len()]);
        for (a, x) in acc.iter_mut().zip(v) {
            *a += w * x;
        }
        total += w;
    }
    let mut sum = sum?;
    if total == 0.0 {
        return None;
    }
    sum.iter_mut().for_each(|a| *a /= total);
    Some(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorProvenance {
    Direct,
    TokenAverage,
}

/// An embedding resolved for a label.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityVector {
    pub label: String,
    pub vector: Vec<f64>,
    pub provenance: VectorProvenance,
}

/// Looks up `label` with spaces joined by underscores, falling back to the
/// mean of whichever of its words have vectors.
pub fn embed_entity(label: &str, table: &EmbeddingTable) -> Result<EntityVector> {
    if let Some(v) = table.get(label) {
        return Ok(EntityVector {
            label: label.to_owned(),
            vector: v.to_vec(),
            provenance: VectorProvenance::Direct,
        });
    }
    let words: Vec<&[f64]> = label.split(' ').filter_map(|w| table.get(w)).collect();
    weighted_mean(words.into_iter().map(|v| (v, 1.0)))
        .map(|vector| EntityVector {
            label: label.to_owned(),
            vector,
            provenance: VectorProvenance::TokenAverage,
        })
        .ok_or_else(|| Error::NotEmbeddable(label.to_owned()))
}
