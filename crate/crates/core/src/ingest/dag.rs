use std::collections::{BTreeMap, BTreeSet};

/// Returns one directed cycle in the child -> parents graph, if any.
///
/// Nodes are visited in sorted order so the reported cycle is deterministic.
pub(crate) fn find_cycle(parents: &BTreeMap<String, BTreeSet<String>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();

    for root in parents.keys() {
        if marks.contains_key(root.as_str()) {
            continue;
        }
        // Explicit stack of (node, remaining parents) keeps deep hierarchies off the call stack.
        let mut path: Vec<&str> = vec![root];
        let mut stack: Vec<std::collections::btree_set::Iter<'_, String>> =
            vec![parents.get(root).map(|p| p.iter()).unwrap_or_default()];
        marks.insert(root, Mark::Open);

        while let Some(iter) = stack.last_mut() {
            match iter.next() {
                Some(next) => match marks.get(next.as_str()) {
                    Some(Mark::Open) => {
                        let start = path.iter().position(|n| *n == next).unwrap_or(0);
                        let mut cycle: Vec<String> =
                            path[start..].iter().map(|s| s.to_string()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        path.push(next);
                        stack.push(parents.get(next).map(|p| p.iter()).unwrap_or_default());
                    }
                },
                None => {
                    let done = path.pop().expect("path tracks stack");
                    marks.insert(done, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}

/// Nodes ordered so that every parent precedes its children.
/// Assumes the graph is acyclic.
pub(crate) fn parents_first_order(
    nodes: &BTreeSet<String>,
    parents: &BTreeMap<String, BTreeSet<String>>,
) -> Vec<String> {
    let mut pending: BTreeMap<&str, usize> = nodes
        .iter()
        .map(|n| (n.as_str(), parents.get(n).map_or(0, BTreeSet::len)))
        .collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (child, ps) in parents {
        for p in ps {
            children.entry(p.as_str()).or_default().push(child.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = pending
        .iter()
        .filter(|(_, c)| **c == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_owned());
        for c in children.get(n).into_iter().flatten() {
            let left = pending.get_mut(c).expect("known node");
            *left -= 1;
            if *left == 0 {
                ready.insert(c);
            }
        }
    }
    order
}
