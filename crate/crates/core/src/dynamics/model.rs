use serde::{Deserialize, Serialize};

use crate::dynamics::expr::Expr;
use crate::error::{Error, Result};

/// Points per dimension used to sample coefficients when validating a model.
const PROBE_POINTS: usize = 1001;

/// One-dimensional diffusion whose drift depends on a hidden binary regime:
/// `dX = mu_J(X) dt + sigma(X) dW` with `P(J = 1) = pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionModel {
    pub mu0: Expr,
    pub mu1: Expr,
    pub sigma: Expr,
    pub x0: f64,
    pub pi: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Computational domain `[x_lo, x_hi]`.
    pub domain: [f64; 2],
}

impl DiffusionModel {
    pub fn new(mu0: Expr, mu1: Expr, sigma: Expr, x0: f64, pi: f64, horizon: f64, domain: [f64; 2]) -> Result<Self> {
        let m = Self { mu0, mu1, sigma, x0, pi, horizon, domain };
        m.validate()?;
        Ok(m)
    }

    /// Checks the scalar fields and samples the coefficients on the domain:
    /// they must be finite, `sigma` bounded away from zero, and the sampled
    /// difference quotients finite.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidModel(format!("domain [{lo}, {hi}] is not a proper interval")));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidModel(format!("horizon T = {} must be positive", self.horizon)));
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(Error::InvalidModel(format!("prior pi = {} outside [0, 1]", self.pi)));
        }
        if !(lo..=hi).contains(&self.x0) {
            return Err(Error::InvalidModel(format!("x0 = {} outside the domain", self.x0)));
        }
        for (name, e) in [("mu0", &self.mu0), ("mu1", &self.mu1), ("sigma", &self.sigma)] {
            if e.depends_on_t() {
                return Err(Error::InvalidModel(format!("{name} must not depend on t")));
            }
            let vals: Vec<f64> = probe(lo, hi).map(|x| e.eval(0.0, x)).collect();
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} is not finite on the domain")));
            }
        }
        let smin = self.sigma_min();
        if !(smin > 0.0) {
            return Err(Error::InvalidModel(format!("sigma is not bounded away from zero (min {smin})")));
        }
        Ok(())
    }

    /// Smallest sampled `sigma` on the domain.
    pub fn sigma_min(&self) -> f64 {
        let [lo, hi] = self.domain;
        probe(lo, hi).map(|x| self.sigma.eval(0.0, x)).fold(f64::INFINITY, f64::min)
    }

    /// Largest sampled difference quotient of the coefficients.
    pub fn lipschitz_estimate(&self) -> f64 {
        let [lo, hi] = self.domain;
        let xs: Vec<f64> = probe(lo, hi).collect();
        [&self.mu0, &self.mu1, &self.sigma]
            .iter()
            .flat_map(|e| xs.windows(2).map(move |w| ((e.eval(0.0, w[1]) - e.eval(0.0, w[0])) / (w[1] - w[0])).abs()))
            .fold(0.0, f64::max)
    }

    #[inline]
    pub fn mu(&self, regime: usize, x: f64) -> f64 {
        if regime == 0 {
            self.mu0.eval(0.0, x)
        } else {
            self.mu1.eval(0.0, x)
        }
    }

    #[inline]
    pub fn sig(&self, x: f64) -> f64 {
        self.sigma.eval(0.0, x)
    }

    /// Signal-to-noise ratio `(mu1 - mu0) / sigma` at state `x`.
    #[inline]
    pub fn snr(&self, x: f64) -> f64 {
        (self.mu1.eval(0.0, x) - self.mu0.eval(0.0, x)) / self.sigma.eval(0.0, x)
    }

    /// All coefficients at `x`: `(mu0, mu1, sigma, w)`.
    #[inline]
    pub fn coefficients(&self, x: f64) -> Coefficients {
        let mu0 = self.mu0.eval(0.0, x);
        let mu1 = self.mu1.eval(0.0, x);
        let sigma = self.sigma.eval(0.0, x);
        Coefficients { mu0, mu1, sigma, w: (mu1 - mu0) / sigma }
    }

    /// Number of steps of size close to `dt` covering the horizon, and the
    /// step actually used.
    pub fn steps_for(&self, dt: f64) -> Result<(usize, f64)> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidModel(format!("dt = {dt} must be positive")));
        }
        let steps = ((self.horizon / dt).round() as usize).max(1);
        Ok((steps, self.horizon / steps as f64))
    }
}

/// Model coefficients at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma: f64,
    pub w: f64,
}

impl Coefficients {
    /// Drift averaged over the belief `p = P(J = 1)`.
    #[inline]
    pub fn mean_drift(&self, p: f64) -> f64 {
        self.mu0 * (1.0 - p) + self.mu1 * p
    }

    #[inline]
    pub fn mu(&self, regime: usize) -> f64 {
        if regime == 0 {
            self.mu0
        } else {
            self.mu1
        }
    }
}

/// Stopping payoffs `f >= h >= g` as functions of `(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingPayoffs {
    pub f: Expr,
    pub g: Expr,
    pub h: Expr,
}

impl StoppingPayoffs {
    /// Checks finiteness and `f >= h >= g` on a grid of `[0, T] x domain`.
    pub fn validate(&self, model: &DiffusionModel) -> Result<()> {
        let [lo, hi] = model.domain;
        for t in probe(0.0, model.horizon).step_by(50) {
            for x in probe(lo, hi) {
                let (f, g, h) = self.eval(t, x);
                if !(f.is_finite() && g.is_finite() && h.is_finite()) {
                    return Err(Error::InvalidPayoff(format!("non-finite payoff at t = {t}, x = {x}")));
                }
                if !(f >= h && h >= g) {
                    return Err(Error::InvalidPayoff(format!(
                        "f >= h >= g fails at t = {t}, x = {x}: f = {f}, h = {h}, g = {g}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(f, g, h)` at `(t, x)`.
    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        (self.f.eval(t, x), self.g.eval(t, x), self.h.eval(t, x))
    }
}

fn probe(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..PROBE_POINTS).map(move |k| lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64)
}
