use crate::error::{Error, Result};
use crate::game::{FiltrationTree, GeneratingProcess};
use crate::scalar::Scalar;

/// Default bound on the number of enumerated pure rules.
pub const DEFAULT_CAP: usize = 20_000;

/// A pure adapted stopping rule: `stop[n]` marks the nodes where the rule
/// stops on first arrival. Nodes below a stopping node are never reached and
/// carry `false`; along every path exactly one node is marked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingRule {
    pub stop: Vec<bool>,
}

impl StoppingRule {
    /// Time index at which the rule stops along `path`.
    pub fn stop_index(&self, path: &[usize]) -> usize {
        path.iter().position(|&n| self.stop[n]).unwrap_or(path.len() - 1)
    }

    /// The rule as a generating process jumping from 0 to 1.
    pub fn generating<S: Scalar>(&self, tree: &FiltrationTree<S>) -> GeneratingProcess<S> {
        GeneratingProcess::pure(tree, &self.stop).expect("rule matches its tree")
    }
}

/// Number of adapted rules on the subtree of `node`, saturating at `limit + 1`.
fn count(tree: &FiltrationTree<impl Scalar>, node: usize, limit: usize) -> usize {
    if tree.is_leaf(node) {
        return 1;
    }
    let mut prod = 1usize;
    for &c in tree.children(node) {
        prod = prod.saturating_mul(count(tree, c, limit)).min(limit + 1);
    }
    prod.saturating_add(1).min(limit + 1)
}

/// Number of pure adapted rules on the tree, or `None` if it exceeds `cap`.
pub fn rule_count<S: Scalar>(tree: &FiltrationTree<S>, cap: usize) -> Option<usize> {
    let c = count(tree, tree.root(), cap);
    (c <= cap).then_some(c)
}

/// Stop sets of all rules on the subtree of `node`: stop here, or continue
/// and combine one rule per child (first child varying slowest).
fn stop_sets(tree: &FiltrationTree<impl Scalar>, node: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![node]];
    if tree.is_leaf(node) {
        return out;
    }
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &c in tree.children(node) {
        let child_sets = stop_sets(tree, c);
        let mut next = Vec::with_capacity(combos.len() * child_sets.len());
        for prefix in &combos {
            for s in &child_sets {
                let mut v = prefix.clone();
                v.extend_from_slice(s);
                next.push(v);
            }
        }
        combos = next;
    }
    out.extend(combos);
    out
}

/// All pure adapted stopping rules, stop-at-root first.
pub fn enumerate_stopping_rules<S: Scalar>(tree: &FiltrationTree<S>, cap: usize) -> Result<Vec<StoppingRule>> {
    if rule_count(tree, cap).is_none() {
        return Err(Error::EnumerationCapExceeded { cap });
    }
    Ok(stop_sets(tree, tree.root())
        .into_iter()
        .map(|set| {
            let mut stop = vec![false; tree.len()];
            for n in set {
                stop[n] = true;
            }
            StoppingRule { stop }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let line = FiltrationTree::<f64>::single_path(4);
        assert_eq!(enumerate_stopping_rules(&line, 100).unwrap().len(), 5);
        for (d, c) in [(1, 2), (2, 5), (3, 26), (4, 677)] {
            let t = FiltrationTree::<f64>::binary(d, |_| 0.5);
            assert_eq!(enumerate_stopping_rules(&t, 1000).unwrap().len(), c);
        }
        let deep = FiltrationTree::<f64>::binary(10, |_| 0.5);
        assert_eq!(
            enumerate_stopping_rules(&deep, 1_000_000),
            Err(Error::EnumerationCapExceeded { cap: 1_000_000 })
        );
    }

    #[test]
    fn one_stop_per_path() {
        let t = FiltrationTree::<f64>::binary(3, |_| 0.5);
        for r in enumerate_stopping_rules(&t, 100).unwrap() {
            for p in t.paths() {
                assert_eq!(p.nodes.iter().filter(|&&n| r.stop[n]).count(), 1);
            }
            assert!(r.generating(&t).validate(&t).is_empty());
        }
    }
}
