use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::band::BandMatrix;
use crate::dynamics::generator::{GeneratorCoefficients, GeneratorMode};
use crate::dynamics::model::{DiffusionModel, StoppingPayoffs};
use crate::error::{Error, Result};

/// Point counts `(t, pi, x)` of a grid, written `NTxNPIxNX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize {
    pub nt: usize,
    pub npi: usize,
    pub nx: usize,
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nt, self.npi, self.nx)
    }
}

impl FromStr for GridSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').collect();
        let bad = || Error::InvalidGrid(format!("expected NTxNPIxNX, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: Vec<usize> = parts.iter().map(|p| p.trim().parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        Ok(Self { nt: n[0], npi: n[1], nx: n[2] })
    }
}

/// Uniform grid on `[0, T] x [0, 1] x [x_lo, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub size: GridSize,
    pub horizon: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl PdeGrid {
    /// The belief grid must have an odd number of points so that `1/2` is
    /// a node.
    pub fn new(size: GridSize, horizon: f64, domain: [f64; 2]) -> Result<Self> {
        let GridSize { nt, npi, nx } = size;
        if nt < 2 || nx < 3 || npi < 3 || npi % 2 == 0 {
            return Err(Error::InvalidGrid(format!("grid {size} needs nt >= 2, nx >= 3 and odd npi >= 3")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || !(domain[0] < domain[1]) {
            return Err(Error::InvalidGrid("horizon and domain must be proper".into()));
        }
        Ok(Self { size, horizon, x_lo: domain[0], x_hi: domain[1] })
    }

    pub fn for_model(size: GridSize, model: &DiffusionModel) -> Result<Self> {
        Self::new(size, model.horizon, model.domain)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / (self.size.nt - 1) as f64
    }

    pub fn dpi(&self) -> f64 {
        1.0 / (self.size.npi - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.size.nx - 1) as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.size.nt {
            self.horizon
        } else {
            self.horizon * k as f64 / (self.size.nt - 1) as f64
        }
    }

    pub fn pi(&self, j: usize) -> f64 {
        j as f64 / (self.size.npi - 1) as f64
    }

    pub fn x(&self, m: usize) -> f64 {
        if m + 1 == self.size.nx {
            self.x_hi
        } else {
            self.x_lo + (self.x_hi - self.x_lo) * m as f64 / (self.size.nx - 1) as f64
        }
    }

    /// Points per time slice.
    pub fn slice_len(&self) -> usize {
        self.size.npi * self.size.nx
    }

    /// Offset of `(j, m)` within a slice; the belief index runs fastest.
    #[inline]
    pub fn at(&self, j: usize, m: usize) -> usize {
        m * self.size.npi + j
    }

    #[inline]
    pub fn index(&self, k: usize, j: usize, m: usize) -> usize {
        k * self.slice_len() + self.at(j, m)
    }

    /// Cell and weight `(i, w)` with `v ~ (1-w) v[i] + w v[i+1]` along an
    /// axis of `n` uniform points from `lo` with spacing `h`.
    fn locate(v: f64, lo: f64, h: f64, n: usize) -> (usize, f64) {
        let s = ((v - lo) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    /// Multilinear interpolation of a grid function at `(t, p, x)`, clamped
    /// to the grid.
    pub fn interpolate(&self, t: f64, p: f64, x: f64, value: impl Fn(usize, usize, usize) -> f64) -> f64 {
        let (k, wt) = Self::locate(t, 0.0, self.dt(), self.size.nt);
        let (j, wp) = Self::locate(p, 0.0, self.dpi(), self.size.npi);
        let (m, wx) = Self::locate(x, self.x_lo, self.dx(), self.size.nx);
        let mut acc = 0.0;
        for (dk, ck) in [(0, 1.0 - wt), (1, wt)] {
            if ck == 0.0 {
                continue;
            }
            for (dj, cj) in [(0, 1.0 - wp), (1, wp)] {
                if cj == 0.0 {
                    continue;
                }
                for (dm, cm) in [(0, 1.0 - wx), (1, wx)] {
                    if cm == 0.0 {
                        continue;
                    }
                    acc += ck * cj * cm * value(k + dk, j + dj, m + dm);
                }
            }
        }
        acc
    }
}

/// Iteration controls of the slice solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeOptions {
    /// Value tolerance of the slice iteration.
    pub tol: f64,
    /// Policy iterations allowed per time slice.
    pub max_iterations: usize,
    /// Distance to an obstacle below which a point counts as stopped.
    pub set_tol: f64,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 200, set_tol: 1e-8 }
    }
}

/// Value functions of the filtered game on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSurfaces {
    pub grid: PdeGrid,
    /// `u^0`, `u^1`: values of the two incarnations of the informed player.
    pub u: [Vec<f64>; 2],
    /// Value of the uninformed player.
    pub v: Vec<f64>,
    /// Obstacles `f` and `g` on the `(t, x)` grid, row-major in `t`.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Stopping sets of the incarnations: `u^i >= f - set_tol`.
    pub informed_stop: [Vec<bool>; 2],
    /// Stopping set of the uninformed player: `v <= g + set_tol`.
    pub uninformed_stop: Vec<bool>,
    pub set_tol: f64,
    /// Policy iterations used per slice (0 for the terminal slice).
    pub iterations: Vec<usize>,
    /// `max |v - (pi u^1 + (1 - pi) u^0)|` over points outside all stopping sets.
    pub link_residual: f64,
}

impl PdeSurfaces {
    #[inline]
    pub fn obstacle_index(&self, k: usize, m: usize) -> usize {
        k * self.grid.size.nx + m
    }

    /// `f - u^i` at a node.
    #[inline]
    pub fn informed_gap(&self, i: usize, k: usize, j: usize, m: usize) -> f64 {
        self.f[self.obstacle_index(k, m)] - self.u[i][self.grid.index(k, j, m)]
    }

    /// `v - g` at a node.
    #[inline]
    pub fn uninformed_gap(&self, k: usize, j: usize, m: usize) -> f64 {
        self.v[self.grid.index(k, j, m)] - self.g[self.obstacle_index(k, m)]
    }

    pub fn u_at(&self, i: usize, t: f64, p: f64, x: f64) -> f64 {
        self.grid.interpolate(t, p, x, |k, j, m| self.u[i][self.grid.index(k, j, m)])
    }

    pub fn v_at(&self, t: f64, p: f64, x: f64) -> f64 {
        self.grid.interpolate(t, p, x, |k, j, m| self.v[self.grid.index(k, j, m)])
    }

    /// `v - (p u^1 + (1 - p) u^0)` at a point.
    pub fn link_gap(&self, t: f64, p: f64, x: f64) -> f64 {
        self.v_at(t, p, x) - (p * self.u_at(1, t, p, x) + (1.0 - p) * self.u_at(0, t, p, x))
    }

    /// Multiplies the uninformed value surface by `c`.
    pub fn scale_v(&mut self, c: f64) {
        self.v.iter_mut().for_each(|v| *v *= c);
    }

    /// Recomputes the stopping sets and the link residual from the surfaces.
    pub fn classify(&mut self) {
        let g = self.grid;
        let len = self.v.len();
        let mut informed = [vec![false; len], vec![false; len]];
        let mut uninformed = vec![false; len];
        let mut link: f64 = 0.0;
        for k in 0..g.size.nt {
            for m in 0..g.size.nx {
                for j in 0..g.size.npi {
                    let s = g.index(k, j, m);
                    for (i, set) in informed.iter_mut().enumerate() {
                        set[s] = self.informed_gap(i, k, j, m) <= self.set_tol;
                    }
                    uninformed[s] = self.uninformed_gap(k, j, m) <= self.set_tol;
                    if !(informed[0][s] || informed[1][s] || uninformed[s]) {
                        let p = g.pi(j);
                        link = link.max((self.v[s] - (p * self.u[1][s] + (1.0 - p) * self.u[0][s])).abs());
                    }
                }
            }
        }
        self.informed_stop = informed;
        self.uninformed_stop = uninformed;
        self.link_residual = link;
    }
}

/// Generator coefficients at every `(j, m)` for the three laws.
struct Operators {
    /// Regime 0, regime 1, observation.
    coef: [Vec<GeneratorCoefficients>; 3],
}

impl Operators {
    fn new(model: &DiffusionModel, grid: &PdeGrid) -> Self {
        let build = |mode: GeneratorMode| {
            let mut out = Vec::with_capacity(grid.slice_len());
            for m in 0..grid.size.nx {
                let c = model.coefficients(grid.x(m));
                for j in 0..grid.size.npi {
                    out.push(GeneratorCoefficients::at(&c, mode, grid.pi(j)));
                }
            }
            out
        };
        Self { coef: [build(GeneratorMode::Regime(0)), build(GeneratorMode::Regime(1)), build(GeneratorMode::Observation)] }
    }
}

/// Emits the row of `I - dt L` at `(j, m)`: upwinded first derivatives,
/// central second and cross derivatives, reflection at the `x` ends. Every
/// belief coefficient vanishes at `pi = 0` and `pi = 1`, so no belief
/// boundary condition is needed.
fn stencil(grid: &PdeGrid, j: usize, m: usize, gc: &GeneratorCoefficients, mut emit: impl FnMut(usize, f64)) {
    let (npi, nx) = (grid.size.npi, grid.size.nx);
    let (dt, dx, dp) = (grid.dt(), grid.dx(), grid.dpi());
    let at = |j: usize, m: usize| grid.at(j, m);
    let mut diag = 1.0;
    if m == 0 || m + 1 == nx {
        let nb = if m == 0 { 1 } else { nx - 2 };
        let a = 2.0 * dt * gc.ax / (dx * dx);
        diag += a;
        emit(at(j, nb), -a);
    } else {
        let a = dt * gc.ax / (dx * dx);
        diag += 2.0 * a;
        emit(at(j, m - 1), -a);
        emit(at(j, m + 1), -a);
        let b = dt * gc.bx / dx;
        if b > 0.0 {
            diag += b;
            emit(at(j, m + 1), -b);
        } else if b < 0.0 {
            diag -= b;
            emit(at(j, m - 1), b);
        }
    }
    if j > 0 && j + 1 < npi {
        let a = dt * gc.ap / (dp * dp);
        diag += 2.0 * a;
        emit(at(j - 1, m), -a);
        emit(at(j + 1, m), -a);
        let b = dt * gc.bp / dp;
        if b > 0.0 {
            diag += b;
            emit(at(j + 1, m), -b);
        } else if b < 0.0 {
            diag -= b;
            emit(at(j - 1, m), b);
        }
        if m > 0 && m + 1 < nx && gc.c != 0.0 {
            let c = dt * gc.c / (4.0 * dp * dx);
            emit(at(j + 1, m + 1), -c);
            emit(at(j + 1, m - 1), c);
            emit(at(j - 1, m + 1), c);
            emit(at(j - 1, m - 1), -c);
        }
    }
    emit(at(j, m), diag);
}

/// `(A u)` at one point.
fn apply_row(grid: &PdeGrid, j: usize, m: usize, gc: &GeneratorCoefficients, u: &[f64]) -> f64 {
    let mut acc = 0.0;
    stencil(grid, j, m, gc, |s, a| acc += a * u[s]);
    acc
}

/// How a point enters the linear system of one slice.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Pde,
    Fixed(f64),
    /// Equal to the value at another point of the slice.
    Copy(usize),
}

fn solve_rows(grid: &PdeGrid, coef: &[GeneratorCoefficients], rows: &[Row], rhs: &[f64], band: &mut BandMatrix) -> Result<Vec<f64>> {
    band.clear();
    let mut b = vec![0.0; rows.len()];
    for m in 0..grid.size.nx {
        for j in 0..grid.size.npi {
            let s = grid.at(j, m);
            match rows[s] {
                Row::Pde => {
                    stencil(grid, j, m, &coef[s], |c, a| band.add(s, c, a));
                    b[s] = rhs[s];
                }
                Row::Fixed(value) => {
                    band.add(s, s, 1.0);
                    b[s] = value;
                }
                Row::Copy(src) => {
                    band.add(s, s, 1.0);
                    band.add(s, src, -1.0);
                }
            }
        }
    }
    band.solve(&mut b)?;
    Ok(b)
}

/// Neighbour in `pi` towards the nearest point outside `stopped` on the
/// same `x` line, or `None` if the whole line is stopped.
fn copy_source(grid: &PdeGrid, stopped: &[bool], j: usize, m: usize) -> Option<usize> {
    let npi = grid.size.npi;
    let below = (0..j).rev().find(|&l| !stopped[grid.at(l, m)]).map(|l| j - l);
    let above = (j + 1..npi).find(|&l| !stopped[grid.at(l, m)]).map(|l| l - j);
    match (below, above) {
        (None, None) => None,
        (Some(_), None) => Some(grid.at(j - 1, m)),
        (None, Some(_)) => Some(grid.at(j + 1, m)),
        (Some(b), Some(a)) => Some(if b <= a { grid.at(j - 1, m) } else { grid.at(j + 1, m) }),
    }
}

/// Active sets of one slice.
#[derive(Debug, Clone, PartialEq)]
struct Sets {
    informed: [Vec<bool>; 2],
    uninformed: Vec<bool>,
}

/// Backward solution of the coupled obstacle system for `(u^0, u^1, v)`.
///
/// Terminal data are `h(T, x)` for all three functions. On each slice the
/// current stopping sets fix how every point enters one implicit step:
///
/// * `u^i`: equal to `g` where the uninformed player stops, to `f` where
///   incarnation `i` stops, constant in `pi` (copied from the neighbour
///   towards the continuation region) where only the other incarnation
///   stops, and `(I - dt L^i) u^i = u^i(t + dt)` elsewhere;
/// * `v`: equal to `g` where the uninformed player stops, to
///   `pi u^1 + (1 - pi) u^0` where an incarnation stops, and
///   `(I - dt L) v = v(t + dt)` elsewhere.
///
/// The sets are then updated by the complementarity conditions of the
/// obstacles `u^i <= f` and `v >= g` and the step is repeated until they
/// no longer change, or until an iteration moves no value by more than
/// `options.tol`.
pub fn pde_solve_system(model: &DiffusionModel, payoffs: &StoppingPayoffs, grid: &PdeGrid, options: &PdeOptions) -> Result<PdeSurfaces> {
    let GridSize { nt, npi, nx } = grid.size;
    let len = grid.slice_len();
    let ops = Operators::new(model, grid);
    let mut f = vec![0.0; nt * nx];
    let mut g = vec![0.0; nt * nx];
    let mut h_last = vec![0.0; nx];
    for k in 0..nt {
        for m in 0..nx {
            let (fv, gv, hv) = payoffs.eval(grid.t(k), grid.x(m));
            f[k * nx + m] = fv;
            g[k * nx + m] = gv;
            if k + 1 == nt {
                h_last[m] = hv;
            }
        }
    }
    let mut u = [vec![0.0; nt * len], vec![0.0; nt * len]];
    let mut v = vec![0.0; nt * len];
    for m in 0..nx {
        for j in 0..npi {
            let s = grid.index(nt - 1, j, m);
            u[0][s] = h_last[m];
            u[1][s] = h_last[m];
            v[s] = h_last[m];
        }
    }
    let mut iterations = vec![0; nt];
    let mut sets = Sets { informed: [vec![false; len], vec![false; len]], uninformed: vec![false; len] };
    let mut band = BandMatrix::new(len, npi + 1, npi + 1);
    let eps = 1e-12;

    for k in (0..nt - 1).rev() {
        let next = |field: &[f64]| field[(k + 1) * len..(k + 2) * len].to_vec();
        let next_u = [next(&u[0]), next(&u[1])];
        let next_v = next(&v);
        let fk = &f[k * nx..(k + 1) * nx];
        let gk = &g[k * nx..(k + 1) * nx];
        let mut cur_u = next_u.clone();
        let mut cur_v = next_v.clone();
        let mut converged = false;
        let mut last_change = f64::INFINITY;
        for iter in 1..=options.max_iterations {
            let any_informed: Vec<bool> = (0..len).map(|s| sets.informed[0][s] || sets.informed[1][s]).collect();
            let mut new_u = [Vec::new(), Vec::new()];
            for i in 0..2 {
                let mut rows = vec![Row::Pde; len];
                for m in 0..nx {
                    for j in 0..npi {
                        let s = grid.at(j, m);
                        rows[s] = if sets.uninformed[s] {
                            Row::Fixed(gk[m])
                        } else if sets.informed[i][s] {
                            Row::Fixed(fk[m])
                        } else if sets.informed[1 - i][s] {
                            copy_source(grid, &any_informed, j, m).map_or(Row::Pde, Row::Copy)
                        } else {
                            Row::Pde
                        };
                    }
                }
                new_u[i] = solve_rows(grid, &ops.coef[i], &rows, &next_u[i], &mut band)?;
            }
            let mut rows = vec![Row::Pde; len];
            for m in 0..nx {
                for j in 0..npi {
                    let s = grid.at(j, m);
                    let p = grid.pi(j);
                    if sets.uninformed[s] {
                        rows[s] = Row::Fixed(gk[m]);
                    } else if any_informed[s] {
                        rows[s] = Row::Fixed(p * new_u[1][s] + (1.0 - p) * new_u[0][s]);
                    }
                }
            }
            let new_v = solve_rows(grid, &ops.coef[2], &rows, &next_v, &mut band)?;

            let mut next_sets = sets.clone();
            for m in 0..nx {
                for j in 0..npi {
                    let s = grid.at(j, m);
                    let active_v = if sets.uninformed[s] {
                        apply_row(grid, j, m, &ops.coef[2][s], &new_v) - next_v[s] >= -eps
                    } else {
                        new_v[s] < gk[m] - eps
                    };
                    next_sets.uninformed[s] = active_v;
                    for i in 0..2 {
                        next_sets.informed[i][s] = if active_v {
                            false
                        } else if sets.informed[i][s] && !sets.uninformed[s] {
                            apply_row(grid, j, m, &ops.coef[i][s], &new_u[i]) - next_u[i][s] <= eps
                        } else {
                            new_u[i][s] > fk[m] + eps
                        };
                    }
                }
            }
            let change = new_u
                .iter()
                .zip(&cur_u)
                .chain(std::iter::once((&new_v, &cur_v)))
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            cur_u = new_u;
            cur_v = new_v;
            last_change = change;
            let stable = next_sets == sets;
            sets = next_sets;
            if stable || (iter > 1 && change <= options.tol) {
                iterations[k] = iter;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { iterations: options.max_iterations, residual: last_change });
        }
        for i in 0..2 {
            u[i][k * len..(k + 1) * len].copy_from_slice(&cur_u[i]);
        }
        v[k * len..(k + 1) * len].copy_from_slice(&cur_v);
    }

    let mut out = PdeSurfaces {
        grid: *grid,
        u,
        v,
        f,
        g,
        informed_stop: [Vec::new(), Vec::new()],
        uninformed_stop: Vec::new(),
        set_tol: options.set_tol,
        iterations,
        link_residual: 0.0,
    };
    out.classify();
    Ok(out)
}

/// Reference value of the one-regime stopping game with full information:
/// `g <= V <= f`, `V(T) = h(T)`, solved slice by slice with projected SOR on
/// the same `(t, x)` discretization. Returns `V` row-major in `t`.
pub fn reference_dynkin_1d(model: &DiffusionModel, regime: usize, payoffs: &StoppingPayoffs, grid: &PdeGrid) -> Result<Vec<f64>> {
    let GridSize { nt, nx, .. } = grid.size;
    let line = PdeGrid { size: GridSize { nt, npi: 1, nx }, ..*grid };
    let coef: Vec<GeneratorCoefficients> = (0..nx)
        .map(|m| GeneratorCoefficients::at(&model.coefficients(grid.x(m)), GeneratorMode::Regime(regime.min(1)), 0.0))
        .collect();
    let mut out = vec![0.0; nt * nx];
    for m in 0..nx {
        out[(nt - 1) * nx + m] = payoffs.h.eval(grid.horizon, grid.x(m));
    }
    let omega = 1.5;
    let max_sweeps = 100_000;
    for k in (0..nt - 1).rev() {
        let t = grid.t(k);
        let (lo, hi): (Vec<f64>, Vec<f64>) = (0..nx).map(|m| (payoffs.g.eval(t, grid.x(m)), payoffs.f.eval(t, grid.x(m)))).unzip();
        let rhs = out[(k + 1) * nx..(k + 2) * nx].to_vec();
        let mut cur = rhs.clone();
        let mut sweeps = 0;
        loop {
            let mut delta: f64 = 0.0;
            for m in 0..nx {
                let mut diag = 0.0;
                let mut off = 0.0;
                stencil(&line, 0, m, &coef[m], |s, a| {
                    if s == m {
                        diag += a;
                    } else {
                        off += a * cur[s];
                    }
                });
                let gs = (rhs[m] - off) / diag;
                let next = (cur[m] + omega * (gs - cur[m])).clamp(lo[m], hi[m]);
                delta = delta.max((next - cur[m]).abs());
                cur[m] = next;
            }
            sweeps += 1;
            if delta < 1e-14 {
                break;
            }
            if sweeps >= max_sweeps {
                return Err(Error::NoConvergence { iterations: sweeps, residual: delta });
            }
        }
        out[k * nx..(k + 1) * nx].copy_from_slice(&cur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::expr::Expr;

    fn degenerate() -> (DiffusionModel, StoppingPayoffs) {
        let m = DiffusionModel::new(
            Expr::parse("0.2 - 2*x").unwrap(),
            Expr::parse("0.2 - 2*x").unwrap(),
            Expr::parse("0.4").unwrap(),
            0.0,
            0.5,
            1.0,
            [-2.0, 2.0],
        )
        .unwrap();
        let p = StoppingPayoffs {
            f: Expr::parse("tanh(x) + 0.1").unwrap(),
            g: Expr::parse("tanh(x) - 0.1").unwrap(),
            h: Expr::parse("tanh(x)").unwrap(),
        };
        (m, p)
    }

    #[test]
    fn grid_parsing_and_layout() {
        let s: GridSize = "21x5x11".parse().unwrap();
        assert_eq!(s, GridSize { nt: 21, npi: 5, nx: 11 });
        assert_eq!(s.to_string(), "21x5x11");
        assert!("21x5".parse::<GridSize>().is_err());
        assert!(PdeGrid::new(GridSize { nt: 3, npi: 4, nx: 5 }, 1.0, [0.0, 1.0]).is_err());
        let g = PdeGrid::new(s, 2.0, [-1.0, 1.0]).unwrap();
        assert_eq!((g.pi(2), g.x(10), g.t(20)), (0.5, 1.0, 2.0));
        let v = g.interpolate(0.3, 0.6, 0.25, |k, j, m| g.t(k) + 2.0 * g.pi(j) - g.x(m));
        assert!((v - (0.3 + 1.2 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_model_matches_reference() {
        let (m, p) = degenerate();
        let grid = PdeGrid::for_model(GridSize { nt: 41, npi: 5, nx: 41 }, &m).unwrap();
        let s = pde_solve_system(&m, &p, &grid, &PdeOptions::default()).unwrap();
        let r = reference_dynkin_1d(&m, 0, &p, &grid).unwrap();
        for k in 0..41 {
            for mm in 0..41 {
                for j in 0..5 {
                    let at = grid.index(k, j, mm);
                    assert!((s.v[at] - r[k * 41 + mm]).abs() < 1e-9);
                    assert_eq!(s.u[0][at], s.u[1][at]);
                    assert_eq!(s.v[at], s.v[grid.index(k, 0, mm)]);
                }
            }
        }
        assert!(s.link_residual < 1e-9);
        assert!(s.uninformed_stop.iter().any(|&b| b) && s.informed_stop[0].iter().any(|&b| b));
    }
}
