use serde::{Deserialize, Serialize};

use crate::dynamics::pde::{PdeGrid, PdeSurfaces};
use crate::scenario::belief_update;

/// How the uninformed player's rule reacts to its stopping set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UninformedRule {
    /// Stop at the first time the state enters the stopping set.
    FirstEntry,
    /// Never stop before the horizon.
    Never,
}

/// Stopping rules read off the value surfaces, as functions of the
/// observed path.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMap {
    pub grid: PdeGrid,
    /// `f - u^i` at the grid nodes.
    informed_gap: [Vec<f64>; 2],
    /// `v - g` at the grid nodes.
    uninformed_gap: Vec<f64>,
    /// Gap at or below which a point counts as stopped.
    pub tol: f64,
    /// Time step of the paths the map is evaluated on.
    pub dt: f64,
    pub uninformed_rule: UninformedRule,
}

/// Generating processes along one observed path, one entry per step.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPath {
    /// Belief at each step before the informed player acts.
    pub belief: Vec<f64>,
    /// Belief after the informed player's pushes.
    pub belief_after: Vec<f64>,
    pub xi: [Vec<f64>; 2],
    pub zeta: Vec<f64>,
    /// `xi^i` mass placed before the horizon at points outside the stopping
    /// set of incarnation `i`.
    pub off_set_mass: [f64; 2],
}

/// Builds the rules from converged surfaces:
///
/// * the uninformed player stops (its process jumps to 1) at the first step
///   where `(t, p, x)` lies in its stopping set;
/// * incarnation `i`, whenever `(t, p, x)` lies in its stopping set, stops
///   with the smallest probability that moves the belief back to the
///   boundary of its continuation region. Stopping by incarnation 1 lowers
///   the belief and stopping by incarnation 0 raises it.
pub fn extract_strategies(surfaces: &PdeSurfaces, dt: f64) -> StrategyMap {
    let g = surfaces.grid;
    let len = surfaces.v.len();
    let mut informed_gap = [vec![0.0; len], vec![0.0; len]];
    let mut uninformed_gap = vec![0.0; len];
    for k in 0..g.size.nt {
        for m in 0..g.size.nx {
            for j in 0..g.size.npi {
                let s = g.index(k, j, m);
                for (i, gap) in informed_gap.iter_mut().enumerate() {
                    gap[s] = surfaces.informed_gap(i, k, j, m);
                }
                uninformed_gap[s] = surfaces.uninformed_gap(k, j, m);
            }
        }
    }
    StrategyMap { grid: g, informed_gap, uninformed_gap, tol: surfaces.set_tol, dt, uninformed_rule: UninformedRule::FirstEntry }
}

impl StrategyMap {
    /// Copy whose uninformed player never stops before the horizon.
    pub fn with_uninformed_rule(mut self, rule: UninformedRule) -> Self {
        self.uninformed_rule = rule;
        self
    }

    pub fn informed_gap(&self, i: usize, t: f64, p: f64, x: f64) -> f64 {
        self.grid.interpolate(t, p, x, |k, j, m| self.informed_gap[i][self.grid.index(k, j, m)])
    }

    pub fn uninformed_gap(&self, t: f64, p: f64, x: f64) -> f64 {
        self.grid.interpolate(t, p, x, |k, j, m| self.uninformed_gap[self.grid.index(k, j, m)])
    }

    /// Gap of incarnation `i` at every belief node for fixed `(t, x)`.
    fn gap_line(&self, i: usize, t: f64, x: f64) -> Vec<f64> {
        (0..self.grid.size.npi).map(|j| self.informed_gap(i, t, self.grid.pi(j), x)).collect()
    }

    /// Smallest stopping probability of incarnation `i` that moves belief
    /// `p` to a point with gap at least `tol`, or 1 if none exists.
    pub fn minimal_push(&self, i: usize, t: f64, p: f64, x: f64) -> f64 {
        if self.informed_gap(i, t, p, x) > self.tol {
            return 0.0;
        }
        let line = self.gap_line(i, t, x);
        let target = match self.boundary(&line, p, i == 0) {
            Some(q) => q,
            None => return 1.0,
        };
        let q = if i == 1 {
            if p <= 0.0 {
                return 1.0;
            }
            (p - target) / (p * (1.0 - target))
        } else {
            if p >= 1.0 {
                return 1.0;
            }
            (target - p) / (target * (1.0 - p))
        };
        q.clamp(0.0, 1.0)
    }

    /// First belief from `p` in the given direction where the piecewise
    /// linear `line` reaches `tol`.
    fn boundary(&self, line: &[f64], p: f64, upward: bool) -> Option<f64> {
        let n = line.len();
        let h = self.grid.dpi();
        let at = |q: f64| -> f64 {
            let s = (q / h).clamp(0.0, (n - 1) as f64);
            let j = (s.floor() as usize).min(n - 2);
            let w = s - j as f64;
            (1.0 - w) * line[j] + w * line[j + 1]
        };
        let (mut a, mut ga) = (p, at(p));
        let nodes: Vec<usize> = if upward {
            ((p / h).floor() as usize + 1..n).collect()
        } else {
            (0..=((p / h).ceil() as usize).saturating_sub(1).min(n - 1)).rev().collect()
        };
        for j in nodes {
            let b = self.grid.pi(j);
            if (upward && b <= a) || (!upward && b >= a) {
                continue;
            }
            let gb = line[j];
            if gb >= self.tol {
                let w = if gb > ga { (self.tol - ga) / (gb - ga) } else { 1.0 };
                return Some(a + w.clamp(0.0, 1.0) * (b - a));
            }
            a = b;
            ga = gb;
        }
        None
    }

    /// Evaluates the rules on one path observed at steps `k * dt`,
    /// `k = 0..x.len()`, with posterior `psi`. Both processes jump to 1 at
    /// the last step.
    pub fn evaluate(&self, x: &[f64], psi: &[f64]) -> StrategyPath {
        let n = x.len();
        let mut out = StrategyPath {
            belief: Vec::with_capacity(n),
            belief_after: Vec::with_capacity(n),
            xi: [Vec::with_capacity(n), Vec::with_capacity(n)],
            zeta: Vec::with_capacity(n),
            off_set_mass: [0.0; 2],
        };
        let (mut xi, mut zeta) = ([0.0_f64; 2], 0.0_f64);
        for k in 0..n {
            let t = k as f64 * self.dt;
            let p = belief_update(psi[k], xi[0], xi[1]).0;
            out.belief.push(p);
            if k + 1 == n {
                out.belief_after.push(p);
                out.xi[0].push(1.0);
                out.xi[1].push(1.0);
                out.zeta.push(1.0);
                break;
            }
            if zeta < 1.0 && self.uninformed_rule == UninformedRule::FirstEntry && self.uninformed_gap(t, p, x[k]) <= self.tol {
                zeta = 1.0;
            }
            let mut cur = p;
            for i in 0..2 {
                if xi[i] >= 1.0 {
                    continue;
                }
                let q = self.minimal_push(i, t, cur, x[k]);
                if q > 0.0 {
                    if self.informed_gap(i, t, cur, x[k]) > self.tol {
                        out.off_set_mass[i] += q * (1.0 - xi[i]);
                    }
                    xi[i] = if q >= 1.0 { 1.0 } else { xi[i] + q * (1.0 - xi[i]) };
                    cur = belief_update(psi[k], xi[0], xi[1]).0;
                }
            }
            out.belief_after.push(cur);
            out.xi[0].push(xi[0]);
            out.xi[1].push(xi[1]);
            out.zeta.push(zeta);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::pde::GridSize;

    /// Surfaces on a tiny grid where only incarnation 1 stops, for beliefs
    /// above 1/2.
    fn surfaces() -> PdeSurfaces {
        let grid = PdeGrid::new(GridSize { nt: 3, npi: 5, nx: 3 }, 1.0, [0.0, 1.0]).unwrap();
        let len = 3 * 5 * 3;
        let mut u1 = vec![0.0; len];
        for k in 0..3 {
            for m in 0..3 {
                for j in 0..5 {
                    u1[grid.index(k, j, m)] = if j >= 2 { 1.0 } else { 0.5 + 0.25 * j as f64 };
                }
            }
        }
        let mut s = PdeSurfaces {
            grid,
            u: [vec![0.0; len], u1],
            v: vec![0.5; len],
            f: vec![1.0; 9],
            g: vec![-1.0; 9],
            informed_stop: [Vec::new(), Vec::new()],
            uninformed_stop: Vec::new(),
            set_tol: 1e-8,
            iterations: vec![0; 3],
            link_residual: 0.0,
        };
        s.classify();
        s
    }

    #[test]
    fn push_returns_belief_to_the_boundary() {
        let map = extract_strategies(&surfaces(), 0.5);
        // gap of incarnation 1 is 0.5 - 0.25 j below j = 2: boundary at p = 0.5 - eps
        let q = map.minimal_push(1, 0.0, 0.8, 0.5);
        let after = 0.8 * (1.0 - q) / (1.0 - 0.8 * q);
        assert!((after - 0.5).abs() < 1e-6, "{after}");
        assert_eq!(map.minimal_push(0, 0.0, 0.8, 0.5), 0.0);
        assert_eq!(map.minimal_push(1, 0.0, 0.3, 0.5), 0.0);
    }

    #[test]
    fn evaluated_paths_are_generating_processes() {
        let map = extract_strategies(&surfaces(), 0.5);
        let path = map.evaluate(&[0.5, 0.5, 0.5], &[0.9, 0.9, 0.9]);
        assert!((path.belief_after[0] - 0.5).abs() < 1e-6);
        assert!(path.xi[1][0] > 0.0 && path.xi[0][0] == 0.0 && path.zeta[0] == 0.0);
        assert!((path.belief[1] - path.belief_after[0]).abs() < 1e-12);
        assert_eq!((path.xi[0][2], path.xi[1][2], path.zeta[2]), (1.0, 1.0, 1.0));
        assert_eq!(path.off_set_mass, [0.0, 0.0]);
        let never = map.with_uninformed_rule(UninformedRule::Never);
        assert_eq!(never.evaluate(&[0.5, 0.5], &[0.1, 0.1]).zeta, vec![0.0, 1.0]);
    }
}
