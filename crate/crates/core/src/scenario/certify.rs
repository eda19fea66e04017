use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::expected_payoff_exact;
use crate::oracle::rules::enumerate_stopping_rules;
use crate::scalar::Scalar;
use crate::scenario::martingale::{accumulate, check_surfaces, informed_hat, uninformed_hat, Direction, DriftCheck};
use crate::scenario::values::{informed_stop_value, informed_survival, uninformed_stop_value};
use crate::scenario::{ScenarioGame, StrategyProfile, ValueSurfaces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Rejected,
}

/// One failed check. `node` or `rule` locate it when applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionViolation {
    pub condition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Candidate game value (`V_0`).
    pub value: f64,
    pub tol: f64,
    pub violations: Vec<ConditionViolation>,
}

impl Certificate {
    fn from_violations(value: f64, tol: f64, violations: Vec<ConditionViolation>) -> Self {
        let verdict = if violations.is_empty() { Verdict::Certified } else { Verdict::Rejected };
        Self { verdict, value, tol, violations }
    }

    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// Largest residual among the violations of the given condition.
    pub fn worst(&self, condition: &str) -> f64 {
        self.violations
            .iter()
            .filter(|v| v.condition == condition)
            .map(|v| v.residual)
            .fold(0.0, f64::max)
    }
}

fn violation(condition: &str, regime: Option<usize>, node: Option<usize>, rule: Option<usize>, residual: f64) -> ConditionViolation {
    ConditionViolation { condition: condition.to_string(), regime, node, rule, residual }
}

/// Martingale-form sufficient conditions for the candidate `(profile, surfaces)`:
///
/// - (i) `M^{0;i}` is a submartingale for both regimes,
/// - (ii) `N^0` is a supermartingale,
/// - (iii) `U^i` stays below the informed obstacle wherever `zeta_{n-} < 1`,
/// - (iv) `V` stays above the believed obstacle wherever `<pi, 1 - xi_{n-}> > 0`,
/// - (v) `V_0 = <pi, U_0>`.
///
/// The obstacle checks are evaluated multiplied through by the survival
/// weight, which is positive on the nodes where they apply.
pub fn certify_mart<S: Scalar>(
    game: &ScenarioGame<S>,
    profile: &StrategyProfile<S>,
    surfaces: &ValueSurfaces<S>,
    tol: f64,
) -> Result<Certificate> {
    game.check_profile(profile)?;
    check_surfaces(game, surfaces)?;
    let tree = &game.tree;
    let len = tree.len();
    let w = game.weights();
    let one = S::one();
    let zeta = &profile.zeta;
    let u_hat = [informed_hat(profile, surfaces, 0), informed_hat(profile, surfaces, 1)];
    let v_hat = uninformed_hat(game, profile, surfaces);
    let mut out = Vec::new();

    for i in 0..2 {
        let flow: Vec<S> = (0..len).map(|n| game.payoffs[i].g[n] * zeta.increment(n)).collect();
        let check = DriftCheck::new(tree, &accumulate(tree, &flow, &u_hat[i]), Direction::Sub, |_| false, tol);
        for &n in &check.sign_violations {
            out.push(violation("i", Some(i), Some(n), None, -check.drift[n]));
        }
    }

    let flow: Vec<S> = (0..len)
        .map(|n| (0..2).map(|i| w[i] * game.payoffs[i].f[n] * profile.xi[i].increment(n)).sum())
        .collect();
    let check = DriftCheck::new(tree, &accumulate(tree, &flow, &v_hat), Direction::Super, |_| false, tol);
    for &n in &check.sign_violations {
        out.push(violation("ii", None, Some(n), None, check.drift[n]));
    }

    for &n in tree.order() {
        if zeta.pre(n) < one {
            for i in 0..2 {
                let slack = (informed_stop_value(game, profile, i, n) - u_hat[i][n]).to_f64_lossy();
                if !(slack >= -tol) {
                    out.push(violation("iii", Some(i), Some(n), None, -slack));
                }
            }
        }
        if informed_survival(game, profile, n) > S::zero() {
            let slack = (v_hat[n] - uninformed_stop_value(game, profile, n)).to_f64_lossy();
            if !(slack >= -tol) {
                out.push(violation("iv", None, Some(n), None, -slack));
            }
        }
    }

    let root = tree.root();
    let v0 = surfaces.v[root];
    let gap = (v0 - (w[0] * surfaces.u[0][root] + w[1] * surfaces.u[1][root])).abs().to_f64_lossy();
    if !(gap <= tol) {
        out.push(violation("v", None, Some(root), None, gap));
    }
    Ok(Certificate::from_violations(v0.to_f64_lossy(), tol, out))
}

/// Stopping-time-form sufficient conditions: every pure rule of each
/// incarnation does at least `u0[i]` against `zeta`, every pure rule of the
/// uninformed player does at most `v0` against `(xi0, xi1)`, and
/// `<pi, u0> = v0`. Fails with `EnumerationCapExceeded` on large trees.
pub fn certify_stop<S: Scalar>(
    game: &ScenarioGame<S>,
    profile: &StrategyProfile<S>,
    u0: [S; 2],
    v0: S,
    cap: usize,
    tol: f64,
) -> Result<Certificate> {
    game.check_profile(profile)?;
    let rules = enumerate_stopping_rules(&game.tree, cap)?;
    let w = game.weights();
    let tree = &game.tree;
    let mut out = Vec::new();
    for (k, rule) in rules.iter().enumerate() {
        let pure = rule.generating(tree);
        let mut against_xi = S::zero();
        for i in 0..2 {
            let tau_payoff = expected_payoff_exact(tree, &game.payoffs[i], &pure, &profile.zeta)?;
            let slack = (tau_payoff - u0[i]).to_f64_lossy();
            if !(slack >= -tol) {
                out.push(violation("s3", Some(i), None, Some(k), -slack));
            }
            against_xi += w[i] * expected_payoff_exact(tree, &game.payoffs[i], &profile.xi[i], &pure)?;
        }
        let slack = (v0 - against_xi).to_f64_lossy();
        if !(slack >= -tol) {
            out.push(violation("s4", None, None, Some(k), -slack));
        }
    }
    let gap = (w[0] * u0[0] + w[1] * u0[1] - v0).abs().to_f64_lossy();
    if !(gap <= tol) {
        out.push(violation("link", None, None, None, gap));
    }
    Ok(Certificate::from_violations(v0.to_f64_lossy(), tol, out))
}
