use crate::ingest::LexicalTaxonomy;

/// Wu-Palmer similarity of two verbs: the best `2 d(lcs) / (d(a) + d(b))`
/// over their sense pairs, with depth counted from the root at 1.
///
/// Identical words score exactly 1. A word without senses in the taxonomy
/// scores 0.
pub fn wu_palmer(a: &str, b: &str, taxonomy: &LexicalTaxonomy) -> f64 {
    if a == b {
        return 1.0;
    }
    let (sa, sb) = (taxonomy.senses(a), taxonomy.senses(b));
    if sa.is_empty() || sb.is_empty() {
        log::debug!("wu-palmer: no senses for `{a}` or `{b}`");
        return 0.0;
    }
    let mut best = 0.0f64;
    for x in &sa {
        let ax = taxonomy.ancestors_inclusive(x);
        let dx = taxonomy.depth(x).unwrap_or(1);
        for y in &sb {
            let dy = taxonomy.depth(y).unwrap_or(1);
            let lcs = taxonomy
                .ancestors_inclusive(y)
                .intersection(&ax)
                .filter_map(|s| taxonomy.depth(s))
                .max()
                .unwrap_or(0);
            best = best.max(2.0 * lcs as f64 / (dx + dy) as f64);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> LexicalTaxonomy {
        LexicalTaxonomy::new(
            [("act.v.01", "root"), ("create.v.01", "act.v.01"), ("build.v.01", "act.v.01"), ("limit.v.01", "root")],
            [("act", "act.v.01"), ("create", "create.v.01"), ("build", "build.v.01"), ("limit", "limit.v.01")],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_chain() {
        let t = chain();
        // lcs = act (depth 2); create and build at depth 3: 2*2/(3+3).
        assert!((wu_palmer("create", "build", &t) - 4.0 / 6.0).abs() < 1e-12);
        assert!((wu_palmer("creates", "builds", &t) - 0.6667).abs() < 1e-4);
        // lcs = root: 2*1/(3+2).
        assert!((wu_palmer("create", "limit", &t) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn identity_symmetry_absence() {
        let t = chain();
        assert_eq!(wu_palmer("create", "create", &t), 1.0);
        assert_eq!(wu_palmer("creates", "create", &t), 1.0);
        assert_eq!(wu_palmer("qqq", "create", &t), 0.0);
        for (a, b) in [("create", "build"), ("limit", "act"), ("builds", "limits")] {
            assert_eq!(wu_palmer(a, b, &t), wu_palmer(b, a, &t));
        }
    }
}
