//! The two-regime model: the informed player knows the regime, the uninformed
//! player only sees the tree and the informed player's inaction.

pub mod belief;
pub mod certify;
pub mod martingale;
pub mod support;
pub mod values;

pub use belief::{belief_update, BeliefPath};
pub use certify::{certify_mart, certify_stop, Certificate, ConditionViolation, Verdict};
pub use martingale::{martingale_report, DriftCheck, MartingaleReport, Overrides};
pub use support::{ex_ante_check, support_report, SupportReport};
pub use values::{best_response_values, ValueSurfaces};

use crate::error::{Error, Result};
use crate::game::{expected_payoff_exact, FiltrationTree, GeneratingProcess, PayoffTriple, TimeGrid};
use crate::scalar::Scalar;

/// Default tolerance for every certification.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A finite game whose payoffs depend on a hidden regime `J in {0, 1}` with
/// `P(J = 1) = prior`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGame<S> {
    pub grid: TimeGrid<S>,
    pub tree: FiltrationTree<S>,
    /// Payoffs indexed by regime.
    pub payoffs: [PayoffTriple<S>; 2],
    pub prior: S,
}

/// Strategies of the two incarnations of the informed player and of the
/// uninformed player.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile<S> {
    pub xi: [GeneratingProcess<S>; 2],
    pub zeta: GeneratingProcess<S>,
}

impl<S: Scalar> ScenarioGame<S> {
    pub fn new(grid: TimeGrid<S>, tree: FiltrationTree<S>, payoffs: [PayoffTriple<S>; 2], prior: S) -> Result<Self> {
        if grid.steps() != tree.steps() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} steps, tree has depth {}",
                grid.steps(),
                tree.steps()
            )));
        }
        if !(prior >= S::zero() && prior <= S::one()) {
            return Err(Error::InvalidPayoff(format!("prior {prior} outside [0,1]")));
        }
        for p in &payoffs {
            p.validate(&tree)?;
        }
        Ok(Self { grid, tree, payoffs, prior })
    }

    /// Same payoffs in both regimes.
    pub fn symmetric(grid: TimeGrid<S>, tree: FiltrationTree<S>, payoffs: PayoffTriple<S>, prior: S) -> Result<Self> {
        Self::new(grid, tree, [payoffs.clone(), payoffs], prior)
    }

    /// Regime weights `[1 - prior, prior]`.
    pub fn weights(&self) -> [S; 2] {
        [S::one() - self.prior, self.prior]
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rejects profiles that do not live on this tree or are not valid
    /// generating processes.
    pub fn check_profile(&self, profile: &StrategyProfile<S>) -> Result<()> {
        for (name, g) in [("xi0", &profile.xi[0]), ("xi1", &profile.xi[1]), ("zeta", &profile.zeta)] {
            if g.len() != self.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{name} has {} nodes, tree has {}",
                    g.len(),
                    self.len()
                )));
            }
            if let Some(v) = g.validate(&self.tree).first() {
                return Err(Error::InvalidGenerating(format!("{name}: {v}")));
            }
        }
        Ok(())
    }

    /// Ex-ante expected payoff `sum_i pi_i E[P^i(xi^i, zeta)]`.
    pub fn expected_payoff(&self, profile: &StrategyProfile<S>) -> Result<S> {
        let w = self.weights();
        let mut total = S::zero();
        for i in 0..2 {
            total += w[i] * expected_payoff_exact(&self.tree, &self.payoffs[i], &profile.xi[i], &profile.zeta)?;
        }
        Ok(total)
    }

    /// Adds `c` to every payoff in both regimes.
    pub fn shifted(&self, c: S) -> Self {
        Self {
            grid: self.grid.clone(),
            tree: self.tree.clone(),
            payoffs: [self.payoffs[0].shifted(c), self.payoffs[1].shifted(c)],
            prior: self.prior,
        }
    }

    /// The game remaining at `node` together with the truncated profile: the
    /// subtree rooted there, the belief at the node as prior, and each
    /// strategy renormalized by its survival before the node. Also returns the
    /// original id of every subgame node.
    pub fn subgame(&self, node: usize, profile: &StrategyProfile<S>) -> Result<(Self, StrategyProfile<S>, Vec<usize>)> {
        let (tree, ids) = self.tree.subtree(node);
        let grid = self.grid.tail(self.tree.depth(node))?;
        let restrict = |p: &PayoffTriple<S>| PayoffTriple {
            f: ids.iter().map(|&n| p.f[n]).collect(),
            g: ids.iter().map(|&n| p.g[n]).collect(),
            h: ids.iter().map(|&n| p.h[n]).collect(),
        };
        let (prior, _) = belief_update(self.prior, profile.xi[0].pre(node), profile.xi[1].pre(node));
        let payoffs = [restrict(&self.payoffs[0]), restrict(&self.payoffs[1])];
        let sub_profile = StrategyProfile {
            xi: [profile.xi[0].restrict(&tree, &ids)?, profile.xi[1].restrict(&tree, &ids)?],
            zeta: profile.zeta.restrict(&tree, &ids)?,
        };
        Ok((Self { grid, tree, payoffs, prior }, sub_profile, ids))
    }
}

impl<S: Scalar> StrategyProfile<S> {
    /// Both players wait until the horizon.
    pub fn wait_all(tree: &FiltrationTree<S>) -> Self {
        let end = GeneratingProcess::jump_at(tree, tree.steps());
        Self { xi: [end.clone(), end.clone()], zeta: end }
    }
}
