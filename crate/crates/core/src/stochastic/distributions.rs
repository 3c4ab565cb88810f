//! Headway and speed models with maximum-likelihood fitting and inverse-CDF sampling.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Result, StatsError};

/// Same-lane headway rate fitted to field data, per second.
pub const HEADWAY_RATE: f64 = 0.1742;
/// Log-normal speed fit away from intersections (log of m/s).
pub const NON_INTERSECTION_SPEED: (f64, f64) = (1.8304, 0.4857);
/// Log-normal speed fit at intersections (log of m/s).
pub const INTERSECTION_SPEED: (f64, f64) = (1.5853, 0.3827);

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Negative exponential headway model, `P(h) = λ e^{-λh}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentialSpec", into = "ExponentialSpec")]
pub struct ExponentialModel {
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentialSpec {
    lambda: f64,
}

impl TryFrom<ExponentialSpec> for ExponentialModel {
    type Error = StatsError;
    fn try_from(s: ExponentialSpec) -> Result<Self> {
        Self::new(s.lambda)
    }
}

impl From<ExponentialModel> for ExponentialSpec {
    fn from(m: ExponentialModel) -> Self {
        Self { lambda: m.lambda }
    }
}

impl ExponentialModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(StatsError::InvalidModel(format!("rate must be > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn headway() -> Self {
        Self { lambda: HEADWAY_RATE }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            0.0
        } else {
            1.0 - (-self.lambda * h).exp()
        }
    }

    /// Inverse CDF for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        -(1.0 - u).ln() / self.lambda
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_headway(self, rng)
    }
}

/// Log-normal speed model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LogNormalSpec", into = "LogNormalSpec")]
pub struct LogNormalModel {
    mu: f64,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogNormalSpec {
    mu: f64,
    sigma: f64,
}

impl TryFrom<LogNormalSpec> for LogNormalModel {
    type Error = StatsError;
    fn try_from(s: LogNormalSpec) -> Result<Self> {
        Self::new(s.mu, s.sigma)
    }
}

impl From<LogNormalModel> for LogNormalSpec {
    fn from(m: LogNormalModel) -> Self {
        Self {
            mu: m.mu,
            sigma: m.sigma,
        }
    }
}

impl LogNormalModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(StatsError::InvalidModel(format!(
                "log-normal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn non_intersection() -> Self {
        Self {
            mu: NON_INTERSECTION_SPEED.0,
            sigma: NON_INTERSECTION_SPEED.1,
        }
    }

    pub fn intersection() -> Self {
        Self {
            mu: INTERSECTION_SPEED.0,
            sigma: INTERSECTION_SPEED.1,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mode(&self) -> f64 {
        (self.mu - self.sigma * self.sigma).exp()
    }

    pub fn median(&self) -> f64 {
        self.mu.exp()
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            standard_normal().cdf((v.ln() - self.mu) / self.sigma)
        }
    }

    /// Inverse CDF for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        (self.mu + self.sigma * standard_normal().inverse_cdf(u)).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_speed(self, rng)
    }
}

pub fn exp_pdf(model: &ExponentialModel, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(StatsError::Domain(format!("headway must be >= 0, got {h}")));
    }
    Ok(model.lambda * (-model.lambda * h).exp())
}

pub fn lognormal_pdf(model: &LogNormalModel, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(StatsError::Domain(format!("speed must be > 0, got {v}")));
    }
    let z = (v.ln() - model.mu) / model.sigma;
    Ok((-0.5 * z * z).exp() / (model.sigma * v * (2.0 * PI).sqrt()))
}

/// Exponential MLE: `λ = 1 / mean`.
pub fn fit_exponential(samples: &[f64]) -> Result<ExponentialModel> {
    if samples.is_empty() {
        return Err(StatsError::Fit("no samples".into()));
    }
    if let Some(bad) = samples.iter().find(|h| !(**h >= 0.0) || !h.is_finite()) {
        return Err(StatsError::Fit(format!("headway sample {bad} is not a finite value >= 0")));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if mean <= 0.0 {
        return Err(StatsError::Fit("all headway samples are zero".into()));
    }
    ExponentialModel::new(1.0 / mean)
}

/// Log-normal MLE: mean and population standard deviation of `ln v`.
pub fn fit_lognormal(samples: &[f64]) -> Result<LogNormalModel> {
    if samples.is_empty() {
        return Err(StatsError::Fit("no samples".into()));
    }
    if let Some(bad) = samples.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(StatsError::Fit(format!("speed sample {bad} is not a finite value > 0")));
    }
    let n = samples.len() as f64;
    let mu = samples.iter().map(|v| v.ln()).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|v| {
            let d = v.ln() - mu;
            d * d
        })
        .sum::<f64>()
        / n;
    let sigma = var.sqrt();
    if !(sigma > 0.0) {
        return Err(StatsError::DegenerateFit);
    }
    LogNormalModel::new(mu, sigma)
}

/// Inverse-CDF headway draw; strictly positive.
pub fn sample_headway<R: Rng + ?Sized>(model: &ExponentialModel, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    model.quantile(u)
}

/// Inverse-CDF speed draw.
pub fn sample_speed<R: Rng + ?Sized>(model: &LogNormalModel, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    model.quantile(u)
}
