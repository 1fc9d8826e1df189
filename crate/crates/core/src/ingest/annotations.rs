use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{normalize_label, SentenceAnnotation};

use super::read_to_string;

/// Loads the line-delimited sentence annotation file.
///
/// Records come back sorted by `(doc_id, sent_idx)` with entity and relation
/// labels normalized.
pub fn load_sentence_annotations(path: impl AsRef<Path>) -> Result<Vec<SentenceAnnotation>> {
    let path = path.as_ref();
    parse_sentence_annotations(path, &read_to_string(path)?)
}

pub fn parse_sentence_annotations(path: &Path, text: &str) -> Result<Vec<SentenceAnnotation>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: SentenceAnnotation =
            serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        validate(&mut record).map_err(|m| Error::parse(path, line_no, m))?;
        if !seen.insert((record.doc_id.clone(), record.sent_idx)) {
            return Err(Error::parse(
                path,
                line_no,
                format!(
                    "duplicate record for doc_id `{}`, sent_idx {}",
                    record.doc_id, record.sent_idx
                ),
            ));
        }
        out.push(record);
    }
    out.sort_by(|a, b| (&a.doc_id, a.sent_idx).cmp(&(&b.doc_id, b.sent_idx)));
    Ok(out)
}

fn validate(record: &mut SentenceAnnotation) -> Result<(), String> {
    if record.doc_id.is_empty() {
        return Err("field `doc_id`: empty".into());
    }
    for (i, tok) in record.tokens.iter().enumerate() {
        if tok.surface.is_empty() || tok.lemma.is_empty() || tok.pos.is_empty() {
            return Err(format!("field `tokens[{i}]`: empty t, lemma or pos"));
        }
    }
    let n_tokens = record.tokens.len();
    for (i, m) in record.entities.iter_mut().enumerate() {
        if m.start_token >= m.end_token || m.end_token > n_tokens {
            return Err(format!(
                "field `entities[{i}]`: span {}..{} invalid for {} tokens",
                m.start_token, m.end_token, n_tokens
            ));
        }
        m.label = normalize_label(&m.label)
            .ok_or_else(|| format!("field `entities[{i}].label`: empty"))?;
    }
    let n_entities = record.entities.len();
    for (i, r) in record.raw_relations.iter_mut().enumerate() {
        for (name, idx) in [("subj", r.subject), ("obj", r.object)] {
            if idx >= n_entities {
                return Err(format!(
                    "field `relations[{i}].{name}`: entity index {idx} out of range for {n_entities} entities"
                ));
            }
        }
        r.label = normalize_label(&r.label)
            .ok_or_else(|| format!("field `relations[{i}].label`: empty"))?;
    }
    Ok(())
}
