use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::expected::node_term;
use crate::scalar::Scalar;
use crate::scenario::martingale::{check_surfaces, informed_hat, uninformed_hat};
use crate::scenario::{ScenarioGame, StrategyProfile, ValueSurfaces};

/// Slack processes and the residuals of the support conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    /// `Z^i_n = (U^i - f^i)(1 - zeta_n) + (U^i - h^i) dzeta_n`, should be `<= 0`.
    pub z: [Vec<f64>; 2],
    /// `Y_n = sum_i pi_i [(V - g^i)(1 - xi^i_n) + (V - h^i) dxi^i_n]`, should be `>= 0`.
    pub y: Vec<f64>,
    /// Leaf id of each root-to-leaf path, in the order of the per-path sums.
    pub path_leaves: Vec<usize>,
    /// `sum_n Z^0 dxi^0 + Z^1 dxi^1` per path.
    pub flat_off_informed: Vec<f64>,
    /// `sum_n Y dzeta` per path.
    pub flat_off_uninformed: Vec<f64>,
    /// `|<p, U> - V|` on nodes where some incarnation and the uninformed
    /// player are both still active before the node; `None` elsewhere.
    pub consistency: Vec<Option<f64>>,
    /// `|pi (1-xi^1_{n-}) U^1_hat + (1-pi)(1-xi^0_{n-}) U^0_hat - (1-zeta_{n-}) V_hat|`.
    pub hat_identity: Vec<f64>,
    pub max_z: f64,
    pub min_y: f64,
    pub max_flat_off_informed: f64,
    pub max_flat_off_uninformed: f64,
    pub max_consistency: f64,
    pub max_hat_identity: f64,
    /// Interior nodes where both a regime incarnation and the uninformed player jump.
    pub simultaneous_jumps: Vec<usize>,
}

impl SupportReport {
    /// Slack signs, flat-off and consistency all within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_z <= tol
            && self.min_y >= -tol
            && self.max_flat_off_informed <= tol
            && self.max_flat_off_uninformed <= tol
            && self.max_consistency <= tol
    }
}

fn fmax(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

pub fn support_report<S: Scalar>(
    game: &ScenarioGame<S>,
    profile: &StrategyProfile<S>,
    surfaces: &ValueSurfaces<S>,
) -> Result<SupportReport> {
    game.check_profile(profile)?;
    check_surfaces(game, surfaces)?;
    let tree = &game.tree;
    let len = tree.len();
    let w = game.weights();
    let one = S::one();
    let zeta = &profile.zeta;

    let z_s = [0, 1].map(|i| {
        let p = &game.payoffs[i];
        let u = &surfaces.u[i];
        (0..len)
            .map(|n| (u[n] - p.f[n]) * (one - zeta.level(n)) + (u[n] - p.h[n]) * zeta.increment(n))
            .collect::<Vec<S>>()
    });
    let y_s: Vec<S> = (0..len)
        .map(|n| {
            let v = surfaces.v[n];
            (0..2)
                .map(|i| {
                    let p = &game.payoffs[i];
                    let xi = &profile.xi[i];
                    w[i] * ((v - p.g[n]) * (one - xi.level(n)) + (v - p.h[n]) * xi.increment(n))
                })
                .sum()
        })
        .collect();

    let mut path_leaves = Vec::new();
    let mut flat_off_informed = Vec::new();
    let mut flat_off_uninformed = Vec::new();
    for path in tree.paths() {
        path_leaves.push(*path.nodes.last().expect("non-empty path"));
        let a: S = path
            .nodes
            .iter()
            .map(|&n| z_s[0][n] * profile.xi[0].increment(n) + z_s[1][n] * profile.xi[1].increment(n))
            .sum();
        let b: S = path.nodes.iter().map(|&n| y_s[n] * zeta.increment(n)).sum();
        flat_off_informed.push(a.to_f64_lossy().abs());
        flat_off_uninformed.push(b.to_f64_lossy().abs());
    }

    let consistency: Vec<Option<f64>> = (0..len)
        .map(|n| {
            let active = profile.xi[0].pre(n).min(profile.xi[1].pre(n)) < one && zeta.pre(n) < one;
            active.then(|| {
                let p = surfaces.belief.p[n];
                (p * surfaces.u[1][n] + (one - p) * surfaces.u[0][n] - surfaces.v[n]).to_f64_lossy().abs()
            })
        })
        .collect();

    let u_hat = [informed_hat(profile, surfaces, 0), informed_hat(profile, surfaces, 1)];
    let v_hat = uninformed_hat(game, profile, surfaces);
    let hat_identity: Vec<f64> = (0..len)
        .map(|n| {
            let lhs: S = (0..2).map(|i| w[i] * (one - profile.xi[i].pre(n)) * u_hat[i][n]).sum();
            (lhs - (one - zeta.pre(n)) * v_hat[n]).to_f64_lossy().abs()
        })
        .collect();

    let z: [Vec<f64>; 2] = [0, 1].map(|i| z_s[i].iter().map(|x| x.to_f64_lossy()).collect());
    let y: Vec<f64> = y_s.iter().map(|x| x.to_f64_lossy()).collect();
    let simultaneous_jumps = tree
        .order()
        .iter()
        .copied()
        .filter(|&n| {
            !tree.is_leaf(n)
                && zeta.increment(n) > S::zero()
                && (profile.xi[0].increment(n) > S::zero() || profile.xi[1].increment(n) > S::zero())
        })
        .collect();
    Ok(SupportReport {
        max_z: z.iter().flat_map(|v| v.iter().copied()).fold(f64::NEG_INFINITY, f64::max),
        min_y: y.iter().copied().fold(f64::INFINITY, f64::min),
        max_flat_off_informed: fmax(flat_off_informed.iter().copied()),
        max_flat_off_uninformed: fmax(flat_off_uninformed.iter().copied()),
        max_consistency: fmax(consistency.iter().flatten().copied()),
        max_hat_identity: fmax(hat_identity.iter().copied()),
        z,
        y,
        path_leaves,
        flat_off_informed,
        flat_off_uninformed,
        consistency,
        hat_identity,
        simultaneous_jumps,
    })
}

/// Difference between the expected remaining payoff at `node` and the two
/// survival-weighted value expressions there; returns the larger gap.
///
/// The remaining payoff counts only outcomes where neither player stopped
/// before the node, so both sides vanish where either has surely stopped.
pub fn ex_ante_check<S: Scalar>(
    game: &ScenarioGame<S>,
    profile: &StrategyProfile<S>,
    surfaces: &ValueSurfaces<S>,
    node: usize,
) -> Result<S> {
    game.check_profile(profile)?;
    check_surfaces(game, surfaces)?;
    let tree = &game.tree;
    if node >= tree.len() {
        return Err(Error::IndexOutOfRange { index: node, len: tree.len() });
    }
    let w = game.weights();
    let one = S::one();
    // conditional expectation over the subtree: walk it with conditional weights
    let mut remaining = S::zero();
    let mut stack = vec![(node, one)];
    while let Some((m, q)) = stack.pop() {
        let term: S = (0..2)
            .map(|i| w[i] * node_term(&game.payoffs[i], &profile.xi[i], &profile.zeta, m))
            .sum();
        remaining += q * term;
        for &c in tree.children(m) {
            stack.push((c, q * tree.transition(c)));
        }
    }
    let v_side = (one - profile.zeta.pre(node)) * uninformed_hat(game, profile, surfaces)[node];
    let u_side: S = (0..2)
        .map(|i| w[i] * (one - profile.xi[i].pre(node)) * informed_hat(profile, surfaces, i)[node])
        .sum();
    Ok((remaining - v_side).abs().max((remaining - u_side).abs()))
}
