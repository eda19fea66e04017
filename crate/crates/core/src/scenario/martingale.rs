use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FiltrationTree, GeneratingProcess};
use crate::scalar::Scalar;
use crate::scenario::values::informed_survival;
use crate::scenario::{ScenarioGame, StrategyProfile, ValueSurfaces};

/// Expected sign of the one-step drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Submartingale: drift `>= -tol`.
    Sub,
    /// Supermartingale: drift `<= tol`.
    Super,
}

/// One-step drifts of a tree process and their classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftCheck {
    pub direction: Direction,
    /// `E[X_child | n] - X_n` at internal nodes, 0 at leaves.
    pub drift: Vec<f64>,
    /// Internal nodes where the drift has the wrong sign beyond `tol`.
    pub sign_violations: Vec<usize>,
    /// Nodes of the stopped region where `|drift| > tol`.
    pub martingale_violations: Vec<usize>,
    /// Largest wrong-sign drift magnitude (0 if none).
    pub worst_sign: f64,
    /// Largest `|drift|` over the stopped region.
    pub worst_martingale: f64,
}

impl DriftCheck {
    pub(crate) fn new<S: Scalar>(tree: &FiltrationTree<S>, x: &[S], direction: Direction, region: impl Fn(usize) -> bool, tol: f64) -> Self {
        let mut drift = vec![0.0; tree.len()];
        let mut sign_violations = Vec::new();
        let mut martingale_violations = Vec::new();
        let (mut worst_sign, mut worst_martingale) = (0.0_f64, 0.0_f64);
        for &n in tree.order() {
            if tree.is_leaf(n) {
                continue;
            }
            let d = (tree.expect_children(n, x) - x[n]).to_f64_lossy();
            drift[n] = d;
            let wrong = match direction {
                Direction::Sub => -d,
                Direction::Super => d,
            };
            worst_sign = worst_sign.max(wrong);
            if !(wrong <= tol) {
                sign_violations.push(n);
            }
            if region(n) {
                worst_martingale = worst_martingale.max(d.abs());
                if !(d.abs() <= tol) {
                    martingale_violations.push(n);
                }
            }
        }
        Self { direction, drift, sign_violations, martingale_violations, worst_sign, worst_martingale }
    }

    pub fn sign_ok(&self) -> bool {
        self.sign_violations.is_empty()
    }

    pub fn martingale_ok(&self) -> bool {
        self.martingale_violations.is_empty()
    }
}

/// Alternative strategies for the general sub/supermartingale families.
#[derive(Debug, Clone, Default)]
pub struct Overrides<S> {
    pub xi: Option<[GeneratingProcess<S>; 2]>,
    pub zeta: Option<GeneratingProcess<S>>,
}

/// Drift diagnostics of the value-based processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub tol: f64,
    /// `M^{0;i}`: submartingale, martingale where `xi^i < 1`.
    pub m0: [DriftCheck; 2],
    /// `N^0`: supermartingale, martingale where `zeta < 1`.
    pub n0: DriftCheck,
    /// `M^xi` for the override (or the profile's own) informed strategies:
    /// always a submartingale; the region is the whole tree.
    pub m_xi: [DriftCheck; 2],
    /// `N^zeta` for the override (or the profile's own) uninformed strategy.
    pub n_zeta: DriftCheck,
    /// Interior nodes where an incarnation and the uninformed player both jump.
    pub simultaneous_jumps: Vec<usize>,
}

impl MartingaleReport {
    /// All drift classifications of `M^{0;i}` and `N^0` pass.
    pub fn necessary_conditions_hold(&self) -> bool {
        self.m0.iter().all(|c| c.sign_ok() && c.martingale_ok()) && self.n0.sign_ok() && self.n0.martingale_ok()
    }

    /// The general families have the right drift signs.
    pub fn families_hold(&self) -> bool {
        self.m_xi.iter().all(DriftCheck::sign_ok) && self.n_zeta.sign_ok()
    }
}

/// `X_n = sum of flow over strict ancestors of n + terminal_n`.
pub(crate) fn accumulate<S: Scalar>(tree: &FiltrationTree<S>, flow: &[S], terminal: &[S]) -> Vec<S> {
    let mut before = vec![S::zero(); tree.len()];
    for &n in tree.order() {
        if let Some(p) = tree.parent(n) {
            before[n] = before[p] + flow[p];
        }
    }
    (0..tree.len()).map(|n| before[n] + terminal[n]).collect()
}

/// `(1 - zeta_{n-}) U^i_n` from the normalized surface.
pub(crate) fn informed_hat<S: Scalar>(profile: &StrategyProfile<S>, surfaces: &ValueSurfaces<S>, i: usize) -> Vec<S> {
    (0..surfaces.u[i].len()).map(|n| (S::one() - profile.zeta.pre(n)) * surfaces.u[i][n]).collect()
}

/// `<pi, 1 - xi_{n-}> V_n` from the normalized surface.
pub(crate) fn uninformed_hat<S: Scalar>(game: &ScenarioGame<S>, profile: &StrategyProfile<S>, surfaces: &ValueSurfaces<S>) -> Vec<S> {
    (0..surfaces.v.len()).map(|n| informed_survival(game, profile, n) * surfaces.v[n]).collect()
}

pub(crate) fn check_surfaces<S: Scalar>(game: &ScenarioGame<S>, surfaces: &ValueSurfaces<S>) -> Result<()> {
    let n = game.len();
    let lens = [surfaces.u[0].len(), surfaces.u[1].len(), surfaces.v.len(), surfaces.u_hat[0].len(), surfaces.u_hat[1].len(), surfaces.v_hat.len()];
    if lens.iter().any(|&l| l != n) {
        return Err(Error::ShapeMismatch(format!("surfaces have lengths {lens:?}, tree has {n} nodes")));
    }
    Ok(())
}

/// Exact one-step drifts of the value-based processes built from `surfaces`
/// (normalized values times the responder's survival).
pub fn martingale_report<S: Scalar>(
    game: &ScenarioGame<S>,
    profile: &StrategyProfile<S>,
    surfaces: &ValueSurfaces<S>,
    overrides: &Overrides<S>,
    tol: f64,
) -> Result<MartingaleReport> {
    game.check_profile(profile)?;
    check_surfaces(game, surfaces)?;
    let tree = &game.tree;
    let len = tree.len();
    let w = game.weights();
    let one = S::one();
    let zeta = &profile.zeta;
    let u_hat = [informed_hat(profile, surfaces, 0), informed_hat(profile, surfaces, 1)];
    let v_hat = uninformed_hat(game, profile, surfaces);

    let m0 = [0, 1].map(|i| {
        let flow: Vec<S> = (0..len).map(|n| game.payoffs[i].g[n] * zeta.increment(n)).collect();
        let x = accumulate(tree, &flow, &u_hat[i]);
        let xi = &profile.xi[i];
        DriftCheck::new(tree, &x, Direction::Sub, |n| xi.level(n) < one, tol)
    });

    let flow: Vec<S> = (0..len)
        .map(|n| (0..2).map(|i| w[i] * game.payoffs[i].f[n] * profile.xi[i].increment(n)).sum())
        .collect();
    let n0 = DriftCheck::new(tree, &accumulate(tree, &flow, &v_hat), Direction::Super, |n| zeta.level(n) < one, tol);

    let xi_alt = overrides.xi.as_ref().unwrap_or(&profile.xi);
    for x in xi_alt.iter() {
        if x.len() != len {
            return Err(Error::ShapeMismatch("override xi does not match the tree".into()));
        }
    }
    let m_xi = [0, 1].map(|i| {
        let p = &game.payoffs[i];
        let xi = &xi_alt[i];
        let flow: Vec<S> = (0..len)
            .map(|n| {
                ((one - zeta.level(n)) * p.f[n] + zeta.increment(n) * p.h[n]) * xi.increment(n)
                    + (one - xi.level(n)) * p.g[n] * zeta.increment(n)
            })
            .collect();
        let terminal: Vec<S> = (0..len).map(|n| (one - xi.pre(n)) * u_hat[i][n]).collect();
        DriftCheck::new(tree, &accumulate(tree, &flow, &terminal), Direction::Sub, |_| true, tol)
    });

    let zeta_alt = overrides.zeta.as_ref().unwrap_or(&profile.zeta);
    if zeta_alt.len() != len {
        return Err(Error::ShapeMismatch("override zeta does not match the tree".into()));
    }
    let flow: Vec<S> = (0..len)
        .map(|n| {
            (0..2)
                .map(|i| {
                    let p = &game.payoffs[i];
                    let xi = &profile.xi[i];
                    w[i] * (((one - xi.level(n)) * p.g[n] + xi.increment(n) * p.h[n]) * zeta_alt.increment(n)
                        + (one - zeta_alt.level(n)) * p.f[n] * xi.increment(n))
                })
                .sum()
        })
        .collect();
    let terminal: Vec<S> = (0..len).map(|n| (one - zeta_alt.pre(n)) * v_hat[n]).collect();
    let n_zeta = DriftCheck::new(tree, &accumulate(tree, &flow, &terminal), Direction::Super, |_| true, tol);

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

    Ok(MartingaleReport { tol, m0, n0, m_xi, n_zeta, simultaneous_jumps })
}
