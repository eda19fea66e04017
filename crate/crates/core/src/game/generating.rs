use std::fmt;

use crate::error::{Error, Result};
use crate::game::tree::FiltrationTree;
use crate::scalar::{survival_ratio, Scalar};

/// Absolute slack allowed in monotonicity and terminal-value checks.
pub const LEVEL_TOL: f64 = 1e-12;

/// Non-decreasing adapted `[0,1]` process with terminal value 1, stored per
/// tree node together with its increments `level[n] - level[parent(n)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingProcess<S> {
    levels: Vec<S>,
    increments: Vec<S>,
}

/// A single failed invariant of a generating process.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ShapeMismatch { expected: usize, found: usize },
    NotMonotone { node: usize, increment: f64 },
    TerminalNotOne { node: usize, value: f64 },
    OutOfRange { node: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: {found} levels for {expected} nodes")
            }
            Violation::NotMonotone { node, increment } => {
                write!(f, "not monotone at node {node} (increment {increment:e})")
            }
            Violation::TerminalNotOne { node, value } => {
                write!(f, "terminal value {value} at leaf {node}")
            }
            Violation::OutOfRange { node, value } => write!(f, "value {value} outside [0,1] at node {node}"),
        }
    }
}

/// Checks raw per-node levels against the tree. An empty list means valid.
pub fn validate_levels<S: Scalar>(levels: &[S], tree: &FiltrationTree<S>) -> Vec<Violation> {
    if levels.len() != tree.len() {
        return vec![Violation::ShapeMismatch { expected: tree.len(), found: levels.len() }];
    }
    let tol = S::lit(LEVEL_TOL);
    let mut out = Vec::new();
    for &n in tree.order() {
        let x = levels[n];
        if !(x >= -tol && x <= S::one() + tol) {
            out.push(Violation::OutOfRange { node: n, value: x.to_f64_lossy() });
        }
        if let Some(p) = tree.parent(n) {
            let d = x - levels[p];
            if !(d >= -tol) {
                out.push(Violation::NotMonotone { node: n, increment: d.to_f64_lossy() });
            }
        }
        if tree.is_leaf(n) && !((x - S::one()).abs() <= tol) {
            out.push(Violation::TerminalNotOne { node: n, value: x.to_f64_lossy() });
        }
    }
    out
}

impl<S: Scalar> GeneratingProcess<S> {
    /// Builds the process from per-node levels without checking invariants
    /// beyond the node count; use [`GeneratingProcess::validate`] for those.
    pub fn from_levels(tree: &FiltrationTree<S>, levels: Vec<S>) -> Result<Self> {
        if levels.len() != tree.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} levels for a tree with {} nodes",
                levels.len(),
                tree.len()
            )));
        }
        let increments = (0..tree.len())
            .map(|n| match tree.parent(n) {
                Some(p) => levels[n] - levels[p],
                None => levels[n],
            })
            .collect();
        Ok(Self { levels, increments })
    }

    /// Like [`GeneratingProcess::from_levels`] but rejects invalid input.
    pub fn new(tree: &FiltrationTree<S>, levels: Vec<S>) -> Result<Self> {
        let violations = validate_levels(&levels, tree);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidGenerating(v.to_string()));
        }
        Self::from_levels(tree, levels)
    }

    /// Builds the process from per-node increments; levels are prefix sums.
    pub fn from_increments(tree: &FiltrationTree<S>, increments: Vec<S>) -> Result<Self> {
        if increments.len() != tree.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} increments for a tree with {} nodes",
                increments.len(),
                tree.len()
            )));
        }
        let mut levels = vec![S::zero(); tree.len()];
        for &n in tree.order() {
            levels[n] = match tree.parent(n) {
                Some(p) => levels[p] + increments[n],
                None => increments[n],
            };
        }
        Ok(Self { levels, increments })
    }

    /// Path-independent process given by one level per time index.
    pub fn from_time_levels(tree: &FiltrationTree<S>, by_time: &[S]) -> Result<Self> {
        if by_time.len() != tree.steps() + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} time levels for a horizon index of {}",
                by_time.len(),
                tree.steps()
            )));
        }
        Self::from_levels(tree, (0..tree.len()).map(|n| by_time[tree.depth(n)]).collect())
    }

    /// Pure process jumping to 1 at the first node of each path where `stop` holds.
    /// Leaves always stop.
    pub fn pure(tree: &FiltrationTree<S>, stop: &[bool]) -> Result<Self> {
        if stop.len() != tree.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} stop flags for a tree with {} nodes",
                stop.len(),
                tree.len()
            )));
        }
        let mut levels = vec![S::zero(); tree.len()];
        for &n in tree.order() {
            let before = tree.parent(n).map(|p| levels[p]).unwrap_or(S::zero());
            levels[n] = if before == S::one() || stop[n] || tree.is_leaf(n) { S::one() } else { S::zero() };
        }
        Self::from_levels(tree, levels)
    }

    /// Pure process jumping to 1 at time index `k` on every path.
    pub fn jump_at(tree: &FiltrationTree<S>, k: usize) -> Self {
        let by_time: Vec<S> = (0..=tree.steps()).map(|j| if j >= k { S::one() } else { S::zero() }).collect();
        Self::from_time_levels(tree, &by_time).expect("time levels match the tree")
    }

    pub fn levels(&self) -> &[S] {
        &self.levels
    }

    pub fn increments(&self) -> &[S] {
        &self.increments
    }

    pub fn level(&self, node: usize) -> S {
        self.levels[node]
    }

    pub fn increment(&self, node: usize) -> S {
        self.increments[node]
    }

    /// Left limit at the node, i.e. the parent's level (0 at the root).
    pub fn pre(&self, node: usize) -> S {
        self.levels[node] - self.increments[node]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn validate(&self, tree: &FiltrationTree<S>) -> Vec<Violation> {
        let mut out = validate_levels(&self.levels, tree);
        if out.is_empty() {
            let tol = S::lit(LEVEL_TOL);
            for &n in tree.order() {
                if !(self.increments[n] >= -tol) {
                    out.push(Violation::NotMonotone { node: n, increment: self.increments[n].to_f64_lossy() });
                }
            }
        }
        out
    }

    /// First index `k` on `path` with `level > z`. Falls back to the last index,
    /// which only matters for `z` at or numerically above the terminal level.
    pub fn sample(&self, path: &[usize], z: S) -> usize {
        path.iter().position(|&n| self.levels[n] > z).unwrap_or(path.len() - 1)
    }

    /// Renormalized remainder after the adapted time `eta`, where `eta` is the
    /// first node on each path with `hit[n]` set (leaves always count as hit).
    /// Levels are 0 before `eta` and `(level - pre_eta)/(1 - pre_eta)` from
    /// `eta` on, with 0/0 = 1.
    pub fn truncate(&self, tree: &FiltrationTree<S>, hit: &[bool]) -> Result<Self> {
        if hit.len() != tree.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} hit flags for a tree with {} nodes",
                hit.len(),
                tree.len()
            )));
        }
        // pre-eta level on each path, None until eta is reached
        let mut base: Vec<Option<S>> = vec![None; tree.len()];
        let mut levels = vec![S::zero(); tree.len()];
        for &n in tree.order() {
            let inherited = tree.parent(n).and_then(|p| base[p]);
            let b = match inherited {
                Some(b) => Some(b),
                None if hit[n] || tree.is_leaf(n) => Some(self.pre(n)),
                None => None,
            };
            base[n] = b;
            levels[n] = match b {
                Some(b) => survival_ratio(self.levels[n] - b, S::one() - b),
                None => S::zero(),
            };
        }
        Self::from_levels(tree, levels)
    }

    /// Truncation at the deterministic time index `k`.
    pub fn truncate_at_time(&self, tree: &FiltrationTree<S>, k: usize) -> Result<Self> {
        let hit: Vec<bool> = (0..tree.len()).map(|n| tree.depth(n) >= k).collect();
        self.truncate(tree, &hit)
    }

    /// The remainder of the process on the subtree rooted at `node`, expressed
    /// on that subtree's node ids (`old_ids` as returned by `FiltrationTree::subtree`).
    pub fn restrict(&self, sub: &FiltrationTree<S>, old_ids: &[usize]) -> Result<Self> {
        let b = self.pre(old_ids[0]);
        let levels = old_ids.iter().map(|&n| survival_ratio(self.levels[n] - b, S::one() - b)).collect();
        Self::from_levels(sub, levels)
    }

    pub fn cast<T: Scalar>(&self) -> GeneratingProcess<T> {
        let c = |v: &Vec<S>| v.iter().map(|x| T::lit(x.to_f64_lossy())).collect();
        GeneratingProcess { levels: c(&self.levels), increments: c(&self.increments) }
    }
}
