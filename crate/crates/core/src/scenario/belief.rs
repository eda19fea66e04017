use crate::game::FiltrationTree;
use crate::scalar::Scalar;
use crate::scenario::StrategyProfile;

/// Posterior of `{J = 1}` given that the informed player has not stopped yet,
/// when incarnation `i` has stopped with probability `xi_pre[i]` so far.
///
/// Returns `(prior, true)` when both incarnations have surely stopped.
pub fn belief_update<S: Scalar>(prior: S, xi0_pre: S, xi1_pre: S) -> (S, bool) {
    let one = S::one();
    let a = prior * (one - xi1_pre);
    let den = a + (one - prior) * (one - xi0_pre);
    if den == S::zero() {
        (prior, true)
    } else {
        ((a / den).max(S::zero()).min(one), false)
    }
}

/// Per-node belief with the degenerate-node flag.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPath<S> {
    pub p: Vec<S>,
    pub degenerate: Vec<bool>,
}

impl<S: Scalar> BeliefPath<S> {
    /// Belief at every node, computed from the left limits of the informed
    /// strategies.
    pub fn compute(tree: &FiltrationTree<S>, prior: S, profile: &StrategyProfile<S>) -> Self {
        let (p, degenerate) = (0..tree.len())
            .map(|n| belief_update(prior, profile.xi[0].pre(n), profile.xi[1].pre(n)))
            .unzip();
        Self { p, degenerate }
    }
}
