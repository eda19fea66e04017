use crate::error::Result;
use crate::scalar::{survival_ratio, Scalar};
use crate::scenario::{BeliefPath, ScenarioGame, StrategyProfile};

/// Best-response value processes of both players against a fixed profile.
///
/// The hat versions are not divided by the responder's own survival
/// probability; the plain versions are, with 0/0 = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurfaces<S> {
    pub u_hat: [Vec<S>; 2],
    pub v_hat: Vec<S>,
    pub u: [Vec<S>; 2],
    pub v: Vec<S>,
    pub belief: BeliefPath<S>,
    /// Whether stopping strictly beats continuing for incarnation `i` (forced at leaves).
    pub informed_stops: [Vec<bool>; 2],
    /// Same for the uninformed player.
    pub uninformed_stops: Vec<bool>,
}

/// Node-local stopping payoff of incarnation `i` against `zeta`.
#[inline]
pub(crate) fn informed_stop_value<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>, i: usize, n: usize) -> S {
    let p = &game.payoffs[i];
    p.f[n] * (S::one() - profile.zeta.level(n)) + p.h[n] * profile.zeta.increment(n)
}

/// Node-local stopping payoff of the uninformed player against `xi`.
#[inline]
pub(crate) fn uninformed_stop_value<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>, n: usize) -> S {
    let w = game.weights();
    (0..2)
        .map(|i| {
            let p = &game.payoffs[i];
            let xi = &profile.xi[i];
            w[i] * (p.g[n] * (S::one() - xi.level(n)) + p.h[n] * xi.increment(n))
        })
        .sum()
}

/// Running payoff accrued at `n` by the uninformed player when the informed
/// player stops there first.
#[inline]
pub(crate) fn uninformed_flow<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>, n: usize) -> S {
    let w = game.weights();
    (0..2).map(|i| w[i] * game.payoffs[i].f[n] * profile.xi[i].increment(n)).sum()
}

/// Survival weight `sum_i pi_i (1 - xi^i_{n-})`.
#[inline]
pub(crate) fn informed_survival<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>, n: usize) -> S {
    let w = game.weights();
    (0..2).map(|i| w[i] * (S::one() - profile.xi[i].pre(n))).sum()
}

/// Backward induction for the optimal-stopping problem of each incarnation
/// against `zeta`, and of the uninformed player against `(xi0, xi1)`.
/// Exact ties are resolved in favour of continuing.
pub fn best_response_values<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>) -> Result<ValueSurfaces<S>> {
    game.check_profile(profile)?;
    let tree = &game.tree;
    let len = tree.len();
    let mut u_hat = [vec![S::zero(); len], vec![S::zero(); len]];
    let mut v_hat = vec![S::zero(); len];
    let mut informed_stops = [vec![false; len], vec![false; len]];
    let mut uninformed_stops = vec![false; len];

    for &n in tree.order().iter().rev() {
        let leaf = tree.is_leaf(n);
        for i in 0..2 {
            let stop = informed_stop_value(game, profile, i, n);
            if leaf {
                u_hat[i][n] = stop;
                informed_stops[i][n] = true;
            } else {
                let cont = game.payoffs[i].g[n] * profile.zeta.increment(n) + tree.expect_children(n, &u_hat[i]);
                informed_stops[i][n] = stop < cont;
                u_hat[i][n] = if stop < cont { stop } else { cont };
            }
        }
        let stop = uninformed_stop_value(game, profile, n);
        if leaf {
            v_hat[n] = stop;
            uninformed_stops[n] = true;
        } else {
            let cont = uninformed_flow(game, profile, n) + tree.expect_children(n, &v_hat);
            uninformed_stops[n] = stop > cont;
            v_hat[n] = if stop > cont { stop } else { cont };
        }
    }

    let u = [0, 1].map(|i| {
        (0..len)
            .map(|n| survival_ratio(u_hat[i][n], S::one() - profile.zeta.pre(n)))
            .collect::<Vec<S>>()
    });
    let v = (0..len)
        .map(|n| survival_ratio(v_hat[n], informed_survival(game, profile, n)))
        .collect();
    let belief = BeliefPath::compute(tree, game.prior, profile);
    Ok(ValueSurfaces { u_hat, v_hat, u, v, belief, informed_stops, uninformed_stops })
}

impl<S: Scalar> ValueSurfaces<S> {
    /// Value at the root, `V_0`.
    pub fn value(&self, root: usize) -> S {
        self.v[root]
    }

    /// Replaces the normalized `v` by `c * v` (and `v_hat` accordingly).
    pub fn scale_v(&mut self, c: S) {
        self.v.iter_mut().for_each(|x| *x *= c);
        self.v_hat.iter_mut().for_each(|x| *x *= c);
    }
}
