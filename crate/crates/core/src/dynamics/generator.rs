use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::model::{Coefficients, DiffusionModel};
use crate::dynamics::paths::posterior_from_likelihood;
use crate::error::{Error, Result};
use crate::game::{Estimate, RandomDevice, Role};

/// Law under which the pair `(X, psi)` is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorMode {
    /// The uninformed player's view: `X` drifts with the belief-averaged drift.
    Observation,
    /// `X` follows regime `i` while `psi` is the posterior computed from it.
    Regime(usize),
}

/// First and second partial derivatives of a test function.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivatives {
    pub x: f64,
    pub xx: f64,
    pub p: f64,
    pub pp: f64,
    pub xp: f64,
}

/// Smooth function of `(p, x)` with known derivatives.
pub trait TestFunction: Sync {
    fn value(&self, p: f64, x: f64) -> f64;
    fn derivatives(&self, p: f64, x: f64) -> Derivatives;
}

/// Coefficients of the generator of `(X, psi)` at `(p, x)`:
/// `L phi = bx phi_x + ax phi_xx + bp phi_p + ap phi_pp + c phi_xp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorCoefficients {
    pub bx: f64,
    pub ax: f64,
    pub bp: f64,
    pub ap: f64,
    pub c: f64,
}

impl GeneratorCoefficients {
    /// Under regime `i` the innovation is `dB = dW + (mu_i - mean drift)/sigma dt`,
    /// which gives `psi` the drift `w^2 p (1-p)^2` in regime 1 and
    /// `-w^2 p^2 (1-p)` in regime 0.
    pub fn at(c: &Coefficients, mode: GeneratorMode, p: f64) -> Self {
        let q = p * (1.0 - p);
        let (bx, bp) = match mode {
            GeneratorMode::Observation => (c.mean_drift(p), 0.0),
            GeneratorMode::Regime(0) => (c.mu0, -c.w * c.w * p * q),
            GeneratorMode::Regime(_) => (c.mu1, c.w * c.w * q * (1.0 - p)),
        };
        Self { bx, ax: 0.5 * c.sigma * c.sigma, bp, ap: 0.5 * c.w * c.w * q * q, c: c.sigma * c.w * q }
    }

    pub fn apply(&self, d: &Derivatives) -> f64 {
        self.bx * d.x + self.ax * d.xx + self.bp * d.p + self.ap * d.pp + self.c * d.xp
    }
}

/// Analytic generator applied to `phi` at `(p, x)`.
pub fn analytic_generator(model: &DiffusionModel, phi: &dyn TestFunction, mode: GeneratorMode, p: f64, x: f64) -> f64 {
    GeneratorCoefficients::at(&model.coefficients(x), mode, p).apply(&phi.derivatives(p, x))
}

/// Monte Carlo drift against the analytic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorCheck {
    /// Estimate of `(E[phi(X_dt, psi_dt)] - phi(x, p)) / dt`.
    pub mc: Estimate,
    pub analytic: f64,
    /// `mc.mean - analytic`.
    pub discrepancy: f64,
}

impl GeneratorCheck {
    /// Discrepancy in units of the standard error.
    pub fn z_score(&self) -> f64 {
        if self.mc.stderr > 0.0 {
            self.discrepancy.abs() / self.mc.stderr
        } else if self.discrepancy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// One Euler step from `(p, x)` repeated `n` times. In observation mode the
/// pair moves by the filter equation; in regime mode `X` moves with drift
/// `mu_i` and the new posterior is the Bayes update of `p` by the
/// likelihood ratio of the step.
pub fn generator_check(
    model: &DiffusionModel,
    phi: &dyn TestFunction,
    mode: GeneratorMode,
    point: (f64, f64),
    n: usize,
    dt: f64,
    device: RandomDevice,
) -> Result<GeneratorCheck> {
    let (p, x) = point;
    if n < 2 || !(dt > 0.0) {
        return Err(Error::ShapeMismatch(format!("need n >= 2 and dt > 0, got n = {n}, dt = {dt}")));
    }
    if matches!(mode, GeneratorMode::Regime(i) if i > 1) {
        return Err(Error::ShapeMismatch("regime must be 0 or 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ShapeMismatch(format!("belief {p} outside [0, 1]")));
    }
    let c = model.coefficients(x);
    let base = phi.value(p, x);
    let sq = dt.sqrt();
    let noise = device.role(Role::Noise);
    let samples: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let z = sq * noise.block(i).normal();
            let (x1, p1) = match mode {
                GeneratorMode::Observation => (x + c.mean_drift(p) * dt + c.sigma * z, p + c.w * p * (1.0 - p) * z),
                GeneratorMode::Regime(j) => {
                    let dx = c.mu(j) * dt + c.sigma * z;
                    let s2 = c.sigma * c.sigma;
                    let ell = (c.mu1 - c.mu0) / s2 * dx - 0.5 * (c.mu1 * c.mu1 - c.mu0 * c.mu0) / s2 * dt;
                    (x + dx, posterior_from_likelihood(p, ell))
                }
            };
            (phi.value(p1, x1) - base) / dt
        })
        .collect();
    let mc = Estimate::from_samples(&samples);
    let analytic = analytic_generator(model, phi, mode, p, x);
    Ok(GeneratorCheck { mc, analytic, discrepancy: mc.mean - analytic })
}
