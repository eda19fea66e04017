use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One node of a tree as it appears in game files: `{id, parent, p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec<S> {
    pub id: usize,
    pub parent: Option<usize>,
    /// Transition probability from the parent (ignored for the root).
    pub p: S,
}

/// A finite filtration represented as a recombination-free tree.
///
/// Node ids are dense (`0..len`). Every node sits at time index
/// `depth(parent) + 1`; every leaf sits at the final index `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationTree<S> {
    parent: Vec<Option<usize>>,
    prob: Vec<S>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    order: Vec<usize>,
    reach: Vec<S>,
    steps: usize,
    root: usize,
}

/// Root-to-leaf node sequence with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePath<S> {
    pub nodes: Vec<usize>,
    pub prob: S,
}

const PROB_SUM_TOL: f64 = 1e-12;

impl<S: Scalar> FiltrationTree<S> {
    pub fn new(specs: &[NodeSpec<S>], steps: usize) -> Result<Self> {
        let n = specs.len();
        if n == 0 {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        let mut parent = vec![None; n];
        let mut prob = vec![S::zero(); n];
        let mut seen = vec![false; n];
        for s in specs {
            if s.id >= n {
                return Err(Error::InvalidTree(format!("node id {} out of range 0..{n}", s.id)));
            }
            if seen[s.id] {
                return Err(Error::InvalidTree(format!("duplicate node id {}", s.id)));
            }
            seen[s.id] = true;
            if let Some(p) = s.parent {
                if p >= n {
                    return Err(Error::InvalidTree(format!("node {} has unknown parent {p}", s.id)));
                }
                if !(s.p >= S::zero() && s.p <= S::one()) {
                    return Err(Error::InvalidTree(format!(
                        "node {} has transition probability {} outside [0,1]",
                        s.id, s.p
                    )));
                }
            }
            parent[s.id] = s.parent;
            prob[s.id] = if s.parent.is_some() { s.p } else { S::one() };
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree(format!("expected exactly one root, found {}", roots.len())));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(p) = parent[i] {
                children[p].push(i);
            }
        }
        // breadth-first from the root; unreached nodes mean a cycle or a detached part
        let mut order = Vec::with_capacity(n);
        let mut depth = vec![usize::MAX; n];
        let mut reach = vec![S::zero(); n];
        depth[root] = 0;
        reach[root] = S::one();
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &c in &children[v] {
                if depth[c] != usize::MAX {
                    return Err(Error::InvalidTree(format!("node {c} reached twice")));
                }
                depth[c] = depth[v] + 1;
                reach[c] = reach[v] * prob[c];
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTree(format!(
                "{} node(s) unreachable from the root",
                n - order.len()
            )));
        }
        for v in 0..n {
            if children[v].is_empty() {
                if depth[v] != steps {
                    return Err(Error::InvalidTree(format!(
                        "leaf {v} at time index {} but the horizon index is {steps}",
                        depth[v]
                    )));
                }
            } else {
                if depth[v] >= steps {
                    return Err(Error::InvalidTree(format!("node {v} extends past the horizon")));
                }
                let total: S = children[v].iter().map(|&c| prob[c]).sum();
                if (total - S::one()).abs() > S::lit(PROB_SUM_TOL) {
                    return Err(Error::InvalidTree(format!(
                        "children of node {v} have probabilities summing to {total}"
                    )));
                }
            }
        }
        Ok(Self { parent, prob, children, depth, order, reach, steps, root })
    }

    /// A single deterministic path with `steps + 1` nodes, ids in time order.
    pub fn single_path(steps: usize) -> Self {
        let specs: Vec<NodeSpec<S>> = (0..=steps)
            .map(|k| NodeSpec { id: k, parent: k.checked_sub(1), p: S::one() })
            .collect();
        Self::new(&specs, steps).expect("single path is a valid tree")
    }

    /// Full binary tree of the given depth in breadth-first id order; `up(node)`
    /// gives the probability of the first child of each internal node.
    pub fn binary(depth: usize, mut up: impl FnMut(usize) -> S) -> Self {
        let mut specs = vec![NodeSpec { id: 0, parent: None, p: S::one() }];
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for &v in &frontier {
                let q = up(v);
                for p in [q, S::one() - q] {
                    let id = specs.len();
                    specs.push(NodeSpec { id, parent: Some(v), p });
                    next.push(id);
                }
            }
            frontier = next;
        }
        Self::new(&specs, depth).expect("binary tree is valid")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    /// Time index of the node.
    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    /// Transition probability from the parent (1 for the root).
    pub fn transition(&self, node: usize) -> S {
        self.prob[node]
    }

    /// Unconditional probability of reaching the node.
    pub fn reach(&self, node: usize) -> S {
        self.reach[node]
    }

    /// Nodes in breadth-first order (parents before children).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().copied().filter(|&v| self.children[v].is_empty())
    }

    pub fn specs(&self) -> Vec<NodeSpec<S>> {
        (0..self.len())
            .map(|id| NodeSpec { id, parent: self.parent[id], p: self.prob[id] })
            .collect()
    }

    /// Conditional expectation `E[x_child | node]`; zero at leaves.
    pub fn expect_children(&self, node: usize, x: &[S]) -> S {
        self.children[node].iter().map(|&c| self.prob[c] * x[c]).sum()
    }

    /// Node sequence from the root to `node`.
    pub fn path_to(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut v = node;
        while let Some(p) = self.parent[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        path
    }

    pub fn paths(&self) -> Vec<TreePath<S>> {
        self.leaves()
            .map(|leaf| TreePath { nodes: self.path_to(leaf), prob: self.reach[leaf] })
            .collect()
    }

    /// Whether `node` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn is_descendant(&self, node: usize, ancestor: usize) -> bool {
        let mut v = node;
        loop {
            if v == ancestor {
                return true;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    /// Subtree rooted at `node`, re-indexed breadth-first. Returns the tree and
    /// the original id of each new node.
    pub fn subtree(&self, node: usize) -> (Self, Vec<usize>) {
        let mut old_ids = vec![node];
        let mut head = 0;
        while head < old_ids.len() {
            let v = old_ids[head];
            head += 1;
            old_ids.extend_from_slice(&self.children[v]);
        }
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let specs: Vec<NodeSpec<S>> = old_ids
            .iter()
            .enumerate()
            .map(|(i, &v)| NodeSpec {
                id: i,
                parent: if i == 0 { None } else { self.parent[v].map(|p| new_id[p]) },
                p: if i == 0 { S::one() } else { self.prob[v] },
            })
            .collect();
        let tree = Self::new(&specs, self.steps - self.depth[node]).expect("subtree of a valid tree");
        (tree, old_ids)
    }
}
