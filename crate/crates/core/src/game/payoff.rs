use crate::error::{Error, Result};
use crate::game::tree::FiltrationTree;
use crate::scalar::Scalar;

/// Per-node payoff arrays: `f` when the minimiser (`tau`) stops first, `g`
/// when the maximiser (`sigma`) stops first, `h` on simultaneous stopping.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTriple<S> {
    pub f: Vec<S>,
    pub g: Vec<S>,
    pub h: Vec<S>,
}

impl<S: Scalar> PayoffTriple<S> {
    pub fn new(f: Vec<S>, g: Vec<S>, h: Vec<S>) -> Result<Self> {
        let p = Self { f, g, h };
        p.check_order()?;
        Ok(p)
    }

    /// Same payoff at every node.
    pub fn constant(len: usize, f: S, g: S, h: S) -> Self {
        Self { f: vec![f; len], g: vec![g; len], h: vec![h; len] }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    fn check_order(&self) -> Result<()> {
        let n = self.f.len();
        if self.g.len() != n || self.h.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "payoff arrays have lengths f={}, g={}, h={}",
                n,
                self.g.len(),
                self.h.len()
            )));
        }
        for k in 0..n {
            let (f, g, h) = (self.f[k], self.g[k], self.h[k]);
            if !(f.is_finite() && g.is_finite() && h.is_finite()) {
                return Err(Error::InvalidPayoff(format!("non-finite payoff at node {k}")));
            }
            if !(f >= h && h >= g) {
                return Err(Error::InvalidPayoff(format!(
                    "node {k}: need f >= h >= g, got f={f}, h={h}, g={g}"
                )));
            }
        }
        Ok(())
    }

    /// Checks ordering, finiteness and that there is one entry per tree node.
    pub fn validate(&self, tree: &FiltrationTree<S>) -> Result<()> {
        self.check_order()?;
        if self.len() != tree.len() {
            return Err(Error::ShapeMismatch(format!(
                "payoffs have {} nodes, tree has {}",
                self.len(),
                tree.len()
            )));
        }
        Ok(())
    }

    /// Payoff of the pure pair `(tau, sigma)` of time indices along `path`.
    pub fn realized(&self, path: &[usize], tau: usize, sigma: usize) -> Result<S> {
        for k in [tau, sigma] {
            if k >= path.len() {
                return Err(Error::IndexOutOfRange { index: k, len: path.len() });
            }
        }
        Ok(if tau < sigma {
            self.f[path[tau]]
        } else if tau == sigma {
            self.h[path[tau]]
        } else {
            self.g[path[sigma]]
        })
    }

    /// Adds `c` to every payoff.
    pub fn shifted(&self, c: S) -> Self {
        let add = |v: &Vec<S>| v.iter().map(|&x| x + c).collect();
        Self { f: add(&self.f), g: add(&self.g), h: add(&self.h) }
    }
}
