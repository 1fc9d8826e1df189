use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

use super::read_to_string;

/// Token -> dense vector lookup. Multi-word entities are stored with
/// underscores in place of spaces (`semantic_web`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Builds a table from in-memory rows, enforcing the same invariants as
    /// the file loader.
    pub fn from_entries(
        dimension: usize,
        rows: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut entries = HashMap::new();
        for (token, v) in rows {
            if v.len() != dimension {
                return Err(Error::DimensionMismatch {
                    left: dimension,
                    right: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("non-finite component for `{token}`")));
            }
            if entries.insert(token.clone(), v).is_some() {
                return Err(Error::Config(format!("duplicate token `{token}`")));
            }
        }
        Ok(EmbeddingTable { dimension, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up a normalized label, joining its words with underscores.
    pub fn get(&self, label: &str) -> Option<&[f64]> {
        let key = label.replace(' ', "_");
        self.entries.get(&key).map(Vec::as_slice)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.get(label).is_some()
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    parse_embeddings(path, &read_to_string(path)?)
}

/// Parses the text embedding format: a `<count> <dimension>` header followed
/// by `<token> <v1> ... <vD>` rows.
pub fn parse_embeddings(path: &Path, text: &str) -> Result<EmbeddingTable> {
    let mut lines = text.lines().enumerate();
    let (count, dimension) = loop {
        match lines.next() {
            None => return Err(Error::parse(path, 1, "missing `<count> <dimension>` header")),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => {
                let parts: Vec<&str> = l.split_whitespace().collect();
                let parsed = match parts.as_slice() {
                    [c, d] => c.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                    _ => None,
                };
                match parsed {
                    Some((c, d)) if d > 0 => break (c, d),
                    _ => {
                        return Err(Error::parse(
                            path,
                            i + 1,
                            "header must be `<count> <dimension>` with positive dimension",
                        ))
                    }
                }
            }
        }
    };

    let mut entries: HashMap<String, Vec<f64>> = HashMap::with_capacity(count);
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-blank line has a field");
        if token.chars().any(char::is_uppercase) {
            return Err(Error::parse(path, line_no, format!("token `{token}` is not normalized")));
        }
        let mut v = Vec::with_capacity(dimension);
        for f in fields {
            let x: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad component `{f}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(path, line_no, format!("non-finite component `{f}`")));
            }
            v.push(x);
        }
        if v.len() != dimension {
            return Err(Error::parse(
                path,
                line_no,
                format!("`{token}` has {} components, expected {dimension}", v.len()),
            ));
        }
        if entries.insert(token.to_owned(), v).is_some() {
            return Err(Error::parse(path, line_no, format!("duplicate token `{token}`")));
        }
    }
    if entries.len() != count {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {count} entries, file has {}", entries.len()),
        ));
    }
    Ok(EmbeddingTable { dimension, entries })
}
