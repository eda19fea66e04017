use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::model::DiffusionModel;
use crate::error::{Error, Result};
use crate::game::{DeviceSequence, RandomDevice, Role};

/// Which time steps of a simulation are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recording {
    Full,
    /// Every `k`-th step plus the last one.
    Every(usize),
    /// Initial and terminal states only.
    Terminal,
}

impl Recording {
    fn keeps(self, k: usize, steps: usize) -> bool {
        match self {
            Recording::Full => true,
            Recording::Every(s) => k.is_multiple_of(s.max(1)) || k == steps,
            Recording::Terminal => k == 0 || k == steps,
        }
    }
}

/// Projection of the posterior onto `[0, 1]` after Euler steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampStats {
    /// Steps where the unprojected value left `[0, 1]`.
    pub count: u64,
    /// Largest distance of an unprojected value from `[0, 1]`.
    pub max_excursion: f64,
}

impl ClampStats {
    fn record(&mut self, raw: f64) -> f64 {
        let clamped = raw.clamp(0.0, 1.0);
        if clamped != raw {
            self.count += 1;
            self.max_excursion = self.max_excursion.max((raw - clamped).abs());
        }
        clamped
    }

    fn merge(self, other: Self) -> Self {
        Self { count: self.count + other.count, max_excursion: self.max_excursion.max(other.max_excursion) }
    }
}

/// Simulated state and posterior paths, row-major with one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
    /// Recorded step indices.
    pub recorded: Vec<usize>,
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    /// Posterior from the filter equation driven by the reconstructed
    /// innovation (regime simulations only).
    pub psi_filter: Option<Vec<f64>>,
    /// Regime of each path (regime simulations only).
    pub regime: Option<Vec<u8>>,
    /// Paths whose state left the model's domain at some step.
    pub exited: Vec<bool>,
    pub clamp: ClampStats,
    pub seed: u64,
    pub stream: u64,
}

impl PathBundle {
    pub fn width(&self) -> usize {
        self.recorded.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.recorded.iter().map(|&k| k as f64 * self.dt).collect()
    }

    pub fn x_path(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.x[i * w..(i + 1) * w]
    }

    pub fn psi_path(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.psi[i * w..(i + 1) * w]
    }

    /// Terminal posterior of every path.
    pub fn terminal_psi(&self) -> Vec<f64> {
        (0..self.n).map(|i| *self.psi_path(i).last().expect("at least one record")).collect()
    }
}

/// Per-path output of a simulation.
#[derive(Debug, Clone, Default)]
struct PathRecord {
    x: Vec<f64>,
    psi: Vec<f64>,
    psi_filter: Vec<f64>,
    regime: u8,
    exited: bool,
    clamp: ClampStats,
}

fn check(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ShapeMismatch("path count must be at least 1".into()));
    }
    Ok(())
}

fn assemble(records: Vec<PathRecord>, steps: usize, dt: f64, recording: Recording, device: RandomDevice, regime: bool) -> PathBundle {
    let recorded: Vec<usize> = (0..=steps).filter(|&k| recording.keeps(k, steps)).collect();
    let clamp = records.iter().fold(ClampStats::default(), |acc, r| acc.merge(r.clamp));
    let exited = records.iter().map(|r| r.exited).collect();
    let regimes = regime.then(|| records.iter().map(|r| r.regime).collect());
    let psi_filter = regime.then(|| records.iter().flat_map(|r| r.psi_filter.iter().copied()).collect());
    PathBundle {
        n: records.len(),
        steps,
        dt,
        recorded,
        x: records.iter().flat_map(|r| r.x.iter().copied()).collect(),
        psi: records.iter().flat_map(|r| r.psi.iter().copied()).collect(),
        psi_filter,
        regime: regimes,
        exited,
        clamp,
        seed: device.seed,
        stream: device.stream,
    }
}

/// Euler scheme for the state and its posterior under the observation
/// filtration: both are driven by the same innovation increment,
///
/// `dX = (mu0 (1 - psi) + mu1 psi) dt + sigma dB`, `dpsi = w(X) psi (1 - psi) dB`,
///
/// with `psi` projected onto `[0, 1]` after every step.
pub fn simulate_filter_paths(model: &DiffusionModel, n: usize, dt: f64, recording: Recording, device: RandomDevice) -> Result<PathBundle> {
    check(n)?;
    let (steps, dt) = model.steps_for(dt)?;
    let [lo, hi] = model.domain;
    let noise = device.role(Role::Noise);
    let sq = dt.sqrt();
    let records: Vec<PathRecord> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = noise.block(i);
            let mut rec = PathRecord::default();
            let (mut x, mut psi) = (model.x0, model.pi);
            rec.x.push(x);
            rec.psi.push(psi);
            for k in 1..=steps {
                let c = model.coefficients(x);
                let db = sq * rng.normal();
                let next_x = x + c.mean_drift(psi) * dt + c.sigma * db;
                psi = rec.clamp.record(psi + c.w * psi * (1.0 - psi) * db);
                x = next_x;
                rec.exited |= !(lo..=hi).contains(&x);
                if recording.keeps(k, steps) {
                    rec.x.push(x);
                    rec.psi.push(psi);
                }
            }
            rec
        })
        .collect();
    Ok(assemble(records, steps, dt, recording, device, false))
}

/// Posterior from the log-likelihood ratio `ell` of regime 1 against regime 0.
#[inline]
pub fn posterior_from_likelihood(prior: f64, ell: f64) -> f64 {
    if prior <= 0.0 || prior >= 1.0 {
        return prior.clamp(0.0, 1.0);
    }
    let logit = (prior / (1.0 - prior)).ln() + ell;
    1.0 / (1.0 + (-logit).exp())
}

/// Simulates `J ~ Bernoulli(pi)` and `dX = mu_J dt + sigma dW`, then computes
/// the posterior along each path in two ways: the Bayes formula
/// `psi = pi L / (pi L + 1 - pi)` with `L` the likelihood ratio of the
/// observed increments, and the filter equation driven by the innovation
/// `dB = (dX - (mu0 + (mu1 - mu0) psi) dt) / sigma` reconstructed from `X`.
pub fn simulate_regime_paths(model: &DiffusionModel, n: usize, dt: f64, recording: Recording, device: RandomDevice) -> Result<PathBundle> {
    check(n)?;
    let regimes = device.role(Role::Regime);
    let draws: Vec<u8> = (0..n as u64).map(|i| u8::from(regimes.uniform(i) < model.pi)).collect();
    simulate_conditional(model, &draws, dt, recording, device)
}

/// As [`simulate_regime_paths`] with every path in the given regime.
pub fn simulate_in_regime(model: &DiffusionModel, regime: usize, n: usize, dt: f64, recording: Recording, device: RandomDevice) -> Result<PathBundle> {
    check(n)?;
    if regime > 1 {
        return Err(Error::ShapeMismatch(format!("regime {regime} is not 0 or 1")));
    }
    simulate_conditional(model, &vec![regime as u8; n], dt, recording, device)
}

fn simulate_conditional(model: &DiffusionModel, regimes: &[u8], dt: f64, recording: Recording, device: RandomDevice) -> Result<PathBundle> {
    let (steps, dt) = model.steps_for(dt)?;
    let [lo, hi] = model.domain;
    let noise = device.role(Role::Noise);
    let records: Vec<PathRecord> = regimes
        .par_iter()
        .enumerate()
        .map(|(i, &j)| {
            let mut rec = PathRecord { regime: j, ..Default::default() };
            let mut path = RegimePath::new(model, usize::from(j), dt, noise.block(i as u64));
            rec.x.push(path.x);
            rec.psi.push(path.psi);
            rec.psi_filter.push(path.psi_filter);
            for k in 1..=steps {
                path.step();
                rec.exited |= !(lo..=hi).contains(&path.x);
                if recording.keeps(k, steps) {
                    rec.x.push(path.x);
                    rec.psi.push(path.psi);
                    rec.psi_filter.push(path.psi_filter);
                }
            }
            rec.clamp = path.clamp;
            rec
        })
        .collect();
    Ok(assemble(records, steps, dt, recording, device, true))
}

/// One path of the state in a fixed regime with both posterior computations,
/// advanced one Euler step at a time.
#[derive(Debug, Clone)]
pub struct RegimePath<'a> {
    model: &'a DiffusionModel,
    regime: usize,
    dt: f64,
    rng: DeviceSequence,
    ell: f64,
    pub x: f64,
    /// Posterior from the likelihood ratio.
    pub psi: f64,
    /// Posterior from the filter equation with the reconstructed innovation.
    pub psi_filter: f64,
    pub clamp: ClampStats,
}

impl<'a> RegimePath<'a> {
    pub fn new(model: &'a DiffusionModel, regime: usize, dt: f64, rng: DeviceSequence) -> Self {
        Self { model, regime, dt, rng, ell: 0.0, x: model.x0, psi: model.pi, psi_filter: model.pi, clamp: ClampStats::default() }
    }

    pub fn step(&mut self) {
        let c = self.model.coefficients(self.x);
        let dt = self.dt;
        let dx = c.mu(self.regime) * dt + c.sigma * dt.sqrt() * self.rng.normal();
        let s2 = c.sigma * c.sigma;
        self.ell += (c.mu1 - c.mu0) / s2 * dx - 0.5 * (c.mu1 * c.mu1 - c.mu0 * c.mu0) / s2 * dt;
        let db = (dx - c.mean_drift(self.psi_filter) * dt) / c.sigma;
        let f = self.psi_filter;
        self.psi_filter = self.clamp.record(f + c.w * f * (1.0 - f) * db);
        self.x += dx;
        self.psi = posterior_from_likelihood(self.model.pi, self.ell);
    }
}
