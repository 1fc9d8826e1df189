use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TripleKey;

use super::{content_lines, normalized_field, read_to_string, tsv_fields};

/// One expert-annotated triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStandardEntry {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub verdict: bool,
}

impl GoldStandardEntry {
    pub fn key(&self) -> TripleKey {
        TripleKey::new(&self.subject, &self.relation, &self.object)
    }
}

pub fn load_gold_standard(path: impl AsRef<Path>) -> Result<Vec<GoldStandardEntry>> {
    let path = path.as_ref();
    parse_gold_standard(path, &read_to_string(path)?)
}

/// Parses `<subject>\t<relation>\t<object>\t<true|false>` rows.
pub fn parse_gold_standard(path: &Path, text: &str) -> Result<Vec<GoldStandardEntry>> {
    content_lines(text)
        .map(|(line_no, line)| {
            let f = tsv_fields(path, line_no, line, 4)?;
            let verdict = match f[3].trim() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("verdict must be `true` or `false`, found `{other}`"),
                    ))
                }
            };
            Ok(GoldStandardEntry {
                subject: normalized_field(path, line_no, f[0], "subject")?,
                relation: normalized_field(path, line_no, f[1], "relation")?,
                object: normalized_field(path, line_no, f[2], "object")?,
                verdict,
            })
        })
        .collect()
}
