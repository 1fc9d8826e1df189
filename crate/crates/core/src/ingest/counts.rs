use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

use super::{content_lines, normalized_field, read_to_string, tsv_fields};

const TOTAL_KEY: &str = "__TOTAL__";

/// Label occurrence counts over one background corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusCounts {
    counts: BTreeMap<String, u64>,
    total_words: u64,
}

impl CorpusCounts {
    pub fn new(counts: BTreeMap<String, u64>, total_words: u64) -> Result<Self> {
        if total_words == 0 {
            return Err(Error::Config("corpus word count must be positive".into()));
        }
        Ok(CorpusCounts {
            counts,
            total_words,
        })
    }

    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    /// Count divided by the corpus word total.
    pub fn frequency(&self, label: &str) -> f64 {
        self.count(label) as f64 / self.total_words as f64
    }

    pub fn total_words(&self) -> u64 {
        self.total_words
    }
}

/// The in-domain, sibling-domain and out-of-domain count tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundCounts {
    pub in_domain: CorpusCounts,
    pub sibling_domain: CorpusCounts,
    pub out_domain: CorpusCounts,
}

pub fn load_background_counts(
    in_domain: impl AsRef<Path>,
    sibling_domain: impl AsRef<Path>,
    out_domain: impl AsRef<Path>,
) -> Result<BackgroundCounts> {
    let load = |p: &Path| parse_corpus_counts(p, &read_to_string(p)?);
    Ok(BackgroundCounts {
        in_domain: load(in_domain.as_ref())?,
        sibling_domain: load(sibling_domain.as_ref())?,
        out_domain: load(out_domain.as_ref())?,
    })
}

/// Parses `<label>\t<count>` rows plus one `__TOTAL__\t<wordcount>` row.
pub fn parse_corpus_counts(path: &Path, text: &str) -> Result<CorpusCounts> {
    let mut counts = BTreeMap::new();
    let mut total = None;
    for (line_no, line) in content_lines(text) {
        let f = tsv_fields(path, line_no, line, 2)?;
        let n: u64 = f[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad count `{}`", f[1])))?;
        if f[0] == TOTAL_KEY {
            if total.replace(n).is_some() {
                return Err(Error::parse(path, line_no, "duplicate __TOTAL__ row"));
            }
            if n == 0 {
                return Err(Error::parse(path, line_no, "__TOTAL__ must be positive"));
            }
            continue;
        }
        let label = normalized_field(path, line_no, f[0], "label")?;
        if counts.insert(label.clone(), n).is_some() {
            return Err(Error::parse(path, line_no, format!("duplicate label `{label}`")));
        }
    }
    let total = total.ok_or_else(|| Error::parse(path, 1, "missing __TOTAL__ row"))?;
    CorpusCounts::new(counts, total)
}
