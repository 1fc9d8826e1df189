use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

use super::{content_lines, normalized_field, read_to_string, tsv_fields};

/// One normalized label per line (blacklists, whitelists, stop-words).
pub fn load_label_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    parse_label_list(path, &read_to_string(path)?)
}

pub fn parse_label_list(path: &Path, text: &str) -> Result<BTreeSet<String>> {
    content_lines(text)
        .map(|(n, l)| normalized_field(path, n, l, "label"))
        .collect()
}

/// `<verb>\t<representative>` rows, as used by curated and static relation maps.
pub fn load_relation_pairs(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    parse_relation_pairs(path, &read_to_string(path)?)
}

pub fn parse_relation_pairs(path: &Path, text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line_no, line) in content_lines(text) {
        let f = tsv_fields(path, line_no, line, 2)?;
        let verb = normalized_field(path, line_no, f[0], "verb")?;
        let rep = normalized_field(path, line_no, f[1], "representative")?;
        if let Some(prev) = out.insert(verb.clone(), rep.clone()) {
            if prev != rep {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("`{verb}` mapped to both `{prev}` and `{rep}`"),
                ));
            }
        }
    }
    Ok(out)
}
