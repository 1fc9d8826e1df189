//! Loaders for every external input. Each loader validates the invariants
//! of what it returns and reports the offending file location otherwise; none
//! of them repair bad input.

mod annotations;
mod config;
mod counts;
mod dag;
mod embeddings;
mod gold;
mod lists;
mod ontology;
mod taxonomy;

pub use annotations::{load_sentence_annotations, parse_sentence_annotations};
pub use config::{ClassifierParams, PipelineConfig};
pub use counts::{load_background_counts, BackgroundCounts, CorpusCounts};
pub use embeddings::{load_embeddings, parse_embeddings, EmbeddingTable};
pub use gold::{load_gold_standard, parse_gold_standard, GoldStandardEntry};
pub use lists::{load_label_list, load_relation_pairs, parse_label_list, parse_relation_pairs};
pub use ontology::{load_topic_ontology, parse_topic_ontology, TopicOntology};
pub use taxonomy::{load_lexical_taxonomy, parse_lexical_taxonomy, LexicalTaxonomy};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Splits a TSV row into exactly `n` fields.
pub(crate) fn tsv_fields<'a>(
    path: &Path,
    line_no: usize,
    line: &'a str,
    n: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != n {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected {n} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

pub(crate) fn normalized_field(path: &Path, line_no: usize, raw: &str, what: &str) -> Result<String> {
    crate::model::normalize_label(raw)
        .ok_or_else(|| Error::parse(path, line_no, format!("empty {what}")))
}
