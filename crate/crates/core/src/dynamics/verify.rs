use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::model::{DiffusionModel, StoppingPayoffs};
use crate::dynamics::paths::RegimePath;
use crate::dynamics::pde::PdeSurfaces;
use crate::dynamics::strategy::{StrategyMap, StrategyPath};
use crate::error::{Error, Result};
use crate::game::{Estimate, RandomDevice, Role};

/// Settings of the Monte Carlo verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub n: usize,
    pub dt: f64,
    /// Allowed fraction of visited points violating an obstacle inequality.
    pub alpha: f64,
    /// Slack allowed for discretization error in every comparison.
    pub tol: f64,
    /// Width of the confidence bands in standard errors.
    pub z: f64,
    /// Number of equal time blocks over which mean increments are tested.
    pub blocks: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { n: 100_000, dt: 1e-3, alpha: 0.01, tol: 1e-3, z: 4.0, blocks: 10 }
    }
}

/// Outcome of one sufficient condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    /// `"i"` to `"v"`.
    pub condition: String,
    pub passed: bool,
    /// Worst excess over the allowed band (non-positive when passing), or
    /// the violating fraction for the obstacle conditions, or the residual
    /// for the value identity.
    pub statistic: f64,
    /// Confidence interval of the quantity behind `statistic`.
    pub interval: [f64; 2],
    pub detail: String,
}

/// Per-condition verdicts of [`mc_verify_sufficiency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    pub conditions: Vec<ConditionCheck>,
    pub options: VerifyOptions,
    pub seed: u64,
    pub stream: u64,
}

impl SufficiencyReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.condition == name)
    }
}

/// Per-path summary used by the martingale and obstacle checks.
#[derive(Debug, Clone, Default)]
struct PathStats {
    /// Increment of the process over each block.
    block: Vec<f64>,
    /// Increment of the process stopped at the acting player's stopping
    /// time, averaged over its randomization, over each block.
    stopped: Vec<f64>,
    visited: u64,
    violations: u64,
    worst_slack: f64,
}

fn block_of(k: usize, steps: usize, blocks: usize) -> usize {
    (k * blocks / steps).min(blocks - 1)
}

/// Mean increments of a process per block, checked against a sign
/// (`sign = 1`: non-decreasing) and against flatness of the stopped process.
struct BlockSummary {
    /// `(mean, stderr)` per block, raw and stopped.
    raw: Vec<Estimate>,
    stopped: Vec<Estimate>,
}

impl BlockSummary {
    fn new(stats: &[PathStats], blocks: usize) -> Self {
        let est = |f: &dyn Fn(&PathStats) -> f64| Estimate::from_samples(&stats.iter().map(f).collect::<Vec<_>>());
        Self {
            raw: (0..blocks).map(|b| est(&|s| s.block[b])).collect(),
            stopped: (0..blocks).map(|b| est(&|s| s.stopped[b])).collect(),
        }
    }

    /// Largest excess of a wrong-signed mean over `z * stderr + tol`, with
    /// the interval of the worst block.
    fn monotone(&self, sign: f64, z: f64, tol: f64) -> (f64, [f64; 2], usize) {
        worst(&self.raw, |e| -sign * e.mean - z * e.stderr - tol, z)
    }

    fn flat(&self, z: f64, tol: f64) -> (f64, [f64; 2], usize) {
        worst(&self.stopped, |e| e.mean.abs() - z * e.stderr - tol, z)
    }
}

fn worst(est: &[Estimate], excess: impl Fn(&Estimate) -> f64, z: f64) -> (f64, [f64; 2], usize) {
    let (b, e) = est
        .iter()
        .enumerate()
        .max_by(|a, b| excess(a.1).total_cmp(&excess(b.1)))
        .expect("at least one block");
    (excess(e), [e.mean - z * e.stderr, e.mean + z * e.stderr], b)
}

/// Interval for a binomial fraction.
fn fraction_interval(bad: u64, total: u64, z: f64) -> (f64, [f64; 2]) {
    if total == 0 {
        return (0.0, [0.0, 0.0]);
    }
    let p = bad as f64 / total as f64;
    let se = (p * (1.0 - p) / total as f64).sqrt();
    (p, [(p - z * se).max(0.0), (p + z * se).min(1.0)])
}

/// Statistical check of the sufficient conditions for the extracted
/// strategies to be a saddle point with value `v(0, pi, x0)`.
///
/// * (i) for each regime `i`, along paths of `X^i`,
///   `M_t = sum_{s<t} g dzeta^i_s + (1 - zeta^i_{t-}) u^i(t, p_t, X^i_t)` has
///   non-negative mean increments and is flat until incarnation `i` stops;
/// * (ii) along paths of `X` under the prior,
///   `N_t = sum_{s<t} f <psi, dxi_s> + <psi_t, 1 - xi_{t-}> v(t, p_t, X_t)` has
///   non-positive mean increments and is flat until the uninformed player
///   stops;
/// * (iii) `f + (h - f) dzeta^i / (1 - zeta^i_-) >= u^i - tol` at a fraction
///   `1 - alpha` of the visited points of the regime-`i` paths;
/// * (iv) `g + (h - g) <psi, dxi> / <psi, 1 - xi_-> <= v + tol` likewise on the
///   prior paths;
/// * (v) `|v - (pi u^1 + (1 - pi) u^0)| <= tol` at `(0, pi, x0)`.
///
/// Mean increments are tested over `blocks` equal time blocks with bands of
/// `z` standard errors plus `tol`.
pub fn mc_verify_sufficiency(
    model: &DiffusionModel,
    payoffs: &StoppingPayoffs,
    surfaces: &PdeSurfaces,
    strategies: &StrategyMap,
    options: &VerifyOptions,
    device: RandomDevice,
) -> Result<SufficiencyReport> {
    if options.n < 2 || options.blocks == 0 {
        return Err(Error::ShapeMismatch("need at least 2 paths and 1 block".into()));
    }
    let (steps, dt) = model.steps_for(options.dt)?;
    if options.blocks > steps {
        return Err(Error::ShapeMismatch(format!("{} blocks for {steps} steps", options.blocks)));
    }
    if (strategies.dt - dt).abs() > 1e-12 * dt.max(1.0) {
        return Err(Error::ShapeMismatch(format!("strategies evaluated at dt = {}, paths use {dt}", strategies.dt)));
    }
    let (z, tol, blocks) = (options.z, options.tol, options.blocks);
    let mut conditions = Vec::new();

    // (i) and (iii)
    let mut informed_detail = Vec::new();
    let mut informed_excess = f64::NEG_INFINITY;
    let mut informed_interval = [0.0, 0.0];
    let mut obstacle = (0_u64, 0_u64, 0.0_f64);
    for i in 0..2 {
        let dev = device.role(if i == 0 { Role::Player1 } else { Role::Player2 });
        let stats: Vec<PathStats> = (0..options.n as u64)
            .into_par_iter()
            .map(|p| {
                let (x, psi) = simulate(model, i, dt, steps, dev, p);
                let s = strategies.evaluate(&x, &psi);
                informed_path(payoffs, surfaces, &s, &x, i, dt, steps, blocks, tol)
            })
            .collect();
        let summary = BlockSummary::new(&stats, blocks);
        let (mono, mono_ci, mono_b) = summary.monotone(1.0, z, tol);
        let (flat, flat_ci, flat_b) = summary.flat(z, tol);
        informed_detail.push(format!(
            "regime {i}: worst increment excess {mono:.3e} in block {mono_b}, worst stopped drift excess {flat:.3e} in block {flat_b}"
        ));
        for (e, ci) in [(mono, mono_ci), (flat, flat_ci)] {
            if e > informed_excess {
                informed_excess = e;
                informed_interval = ci;
            }
        }
        obstacle.0 += stats.iter().map(|s| s.visited).sum::<u64>();
        obstacle.1 += stats.iter().map(|s| s.violations).sum::<u64>();
        obstacle.2 = stats.iter().map(|s| s.worst_slack).fold(obstacle.2, f64::min);
    }
    conditions.push(ConditionCheck {
        condition: "i".into(),
        passed: informed_excess <= 0.0,
        statistic: informed_excess,
        interval: informed_interval,
        detail: informed_detail.join("; "),
    });

    // (ii) and (iv)
    let dev = device.role(Role::Path);
    let regimes = device.role(Role::Regime);
    let stats: Vec<PathStats> = (0..options.n as u64)
        .into_par_iter()
        .map(|p| {
            let j = usize::from(regimes.uniform(p) < model.pi);
            let (x, psi) = simulate(model, j, dt, steps, dev, p);
            let s = strategies.evaluate(&x, &psi);
            uninformed_path(payoffs, surfaces, &s, &x, &psi, dt, steps, blocks, tol)
        })
        .collect();
    let summary = BlockSummary::new(&stats, blocks);
    let (mono, mono_ci, mono_b) = summary.monotone(-1.0, z, tol);
    let (flat, flat_ci, flat_b) = summary.flat(z, tol);
    let (excess, interval) = if mono >= flat { (mono, mono_ci) } else { (flat, flat_ci) };
    conditions.push(ConditionCheck {
        condition: "ii".into(),
        passed: excess <= 0.0,
        statistic: excess,
        interval,
        detail: format!("worst increment excess {mono:.3e} in block {mono_b}, worst stopped drift excess {flat:.3e} in block {flat_b}"),
    });

    let (frac, ci) = fraction_interval(obstacle.1, obstacle.0, z);
    conditions.push(ConditionCheck {
        condition: "iii".into(),
        passed: frac <= options.alpha,
        statistic: frac,
        interval: ci,
        detail: format!("{} of {} visited points below -tol; smallest slack {:.3e}", obstacle.1, obstacle.0, obstacle.2),
    });
    let visited: u64 = stats.iter().map(|s| s.visited).sum();
    let bad: u64 = stats.iter().map(|s| s.violations).sum();
    let slack = stats.iter().map(|s| s.worst_slack).fold(0.0, f64::min);
    let (frac, ci) = fraction_interval(bad, visited, z);
    conditions.push(ConditionCheck {
        condition: "iv".into(),
        passed: frac <= options.alpha,
        statistic: frac,
        interval: ci,
        detail: format!("{bad} of {visited} visited points below -tol; smallest slack {slack:.3e}"),
    });

    let gap = surfaces.link_gap(0.0, model.pi, model.x0);
    conditions.push(ConditionCheck {
        condition: "v".into(),
        passed: gap.abs() <= tol,
        statistic: gap.abs(),
        interval: [gap, gap],
        detail: format!(
            "v = {:.6e}, pi u1 + (1 - pi) u0 = {:.6e}",
            surfaces.v_at(0.0, model.pi, model.x0),
            surfaces.v_at(0.0, model.pi, model.x0) - gap
        ),
    });

    Ok(SufficiencyReport { conditions, options: *options, seed: device.seed, stream: device.stream })
}

fn simulate(model: &DiffusionModel, regime: usize, dt: f64, steps: usize, device: RandomDevice, path: u64) -> (Vec<f64>, Vec<f64>) {
    let mut sim = RegimePath::new(model, regime, dt, device.role(Role::Noise).block(path));
    let mut x = Vec::with_capacity(steps + 1);
    let mut psi = Vec::with_capacity(steps + 1);
    x.push(sim.x);
    psi.push(sim.psi);
    for _ in 0..steps {
        sim.step();
        x.push(sim.x);
        psi.push(sim.psi);
    }
    (x, psi)
}

#[allow(clippy::too_many_arguments)]
fn informed_path(
    payoffs: &StoppingPayoffs,
    surfaces: &PdeSurfaces,
    s: &StrategyPath,
    x: &[f64],
    i: usize,
    dt: f64,
    steps: usize,
    blocks: usize,
    tol: f64,
) -> PathStats {
    let mut st = PathStats { block: vec![0.0; blocks], stopped: vec![0.0; blocks], ..Default::default() };
    let mut flow = 0.0;
    let mut prev_m = 0.0;
    let mut zeta_pre = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (f, g, h) = payoffs.eval(t, x[k]);
        let u = surfaces.u_at(i, t, s.belief[k], x[k]);
        let m = flow + (1.0 - zeta_pre) * u;
        if k > 0 {
            let b = block_of(k - 1, steps, blocks);
            st.block[b] += m - prev_m;
            st.stopped[b] += (1.0 - s.xi[i][k - 1]) * (m - prev_m);
        }
        if zeta_pre < 1.0 {
            let dz = s.zeta[k] - zeta_pre;
            let slack = f + (h - f) * dz / (1.0 - zeta_pre) - u;
            st.visited += 1;
            if slack < -tol {
                st.violations += 1;
            }
            st.worst_slack = st.worst_slack.min(slack);
        }
        flow += g * (s.zeta[k] - zeta_pre);
        zeta_pre = s.zeta[k];
        prev_m = m;
    }
    st
}

#[allow(clippy::too_many_arguments)]
fn uninformed_path(
    payoffs: &StoppingPayoffs,
    surfaces: &PdeSurfaces,
    s: &StrategyPath,
    x: &[f64],
    psi: &[f64],
    dt: f64,
    steps: usize,
    blocks: usize,
    tol: f64,
) -> PathStats {
    let mut st = PathStats { block: vec![0.0; blocks], stopped: vec![0.0; blocks], ..Default::default() };
    let mut flow = 0.0;
    let mut prev_n = 0.0;
    let mut xi_pre = [0.0; 2];
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (f, g, h) = payoffs.eval(t, x[k]);
        let v = surfaces.v_at(t, s.belief[k], x[k]);
        let alive = psi[k] * (1.0 - xi_pre[1]) + (1.0 - psi[k]) * (1.0 - xi_pre[0]);
        let n = flow + alive * v;
        if k > 0 {
            let b = block_of(k - 1, steps, blocks);
            st.block[b] += n - prev_n;
            st.stopped[b] += (1.0 - s.zeta[k - 1]) * (n - prev_n);
        }
        let dxi = psi[k] * (s.xi[1][k] - xi_pre[1]) + (1.0 - psi[k]) * (s.xi[0][k] - xi_pre[0]);
        if alive > 0.0 {
            let slack = v - g - (h - g) * dxi / alive;
            st.visited += 1;
            if slack < -tol {
                st.violations += 1;
            }
            st.worst_slack = st.worst_slack.min(slack);
        }
        flow += f * dxi;
        xi_pre = [s.xi[0][k], s.xi[1][k]];
        prev_n = n;
    }
    st
}
