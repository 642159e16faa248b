//! Small numeric helpers shared by the location statistics.

use crate::error::{Error, Result};
use crate::estimation::RegimeFit;
use crate::model::PrefixSums;

/// Running extremum that keeps the earliest index on ties.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Extremum {
    pub value: f64,
    pub at: usize,
    minimize: bool,
}

impl Extremum {
    pub fn min() -> Self {
        Self { value: f64::INFINITY, at: usize::MAX, minimize: true }
    }

    pub fn max() -> Self {
        Self { value: f64::NEG_INFINITY, at: usize::MAX, minimize: false }
    }

    #[inline]
    pub fn offer(&mut self, at: usize, value: f64) {
        let better = if self.minimize { value < self.value } else { value > self.value };
        if better || self.at == usize::MAX {
            self.value = value;
            self.at = at;
        }
    }
}

/// `num / exp(log_den)` evaluated without forming `exp(log_den)`.
#[inline]
pub(crate) fn div_exp(num: f64, log_den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num.signum() * (num.abs().ln() - log_den).exp()
    }
}

/// One-sided t-statistic for `rho` in `dy_t = rho y_{t-1} + e_t` over
/// `(from, to]`, with the residual scale fixed at `sigma`.
#[inline]
pub(crate) fn tstat(p: &PrefixSums, from: usize, to: usize, sigma: f64) -> Result<f64> {
    let sxx = p.sum_y2(from, to);
    if !(sxx > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "sum of squared lagged levels over ({from}, {to}] is zero"
        )));
    }
    Ok(p.sum_ydy(from, to) / (sigma * sxx.sqrt()))
}

/// Validated plug-in quantities used by every statistic.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Plugins {
    pub sigma2: f64,
    pub sigma: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub rho_a: f64,
    pub rho_b: f64,
}

impl Plugins {
    pub fn from_fit(fit: &RegimeFit) -> Result<Self> {
        if !(fit.sigma2_hat > 0.0 && fit.sigma2_hat.is_finite()) {
            return Err(Error::DegenerateFit(format!(
                "residual variance {} is not positive",
                fit.sigma2_hat
            )));
        }
        Ok(Self {
            sigma2: fit.sigma2_hat,
            sigma: fit.sigma2_hat.sqrt(),
            phi_a: fit.phi_a_hat,
            phi_b: fit.phi_b_hat,
            rho_a: fit.rho_a_hat,
            rho_b: fit.rho_b_hat,
        })
    }

    /// `ln phi_a`, defined for a positive coefficient.
    pub fn ln_phi_a(&self) -> Result<f64> {
        positive_ln(self.phi_a, "phi_a")
    }
}

fn positive_ln(v: f64, name: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(Error::DegenerateFit(format!("{name} = {v} is not positive")))
    }
}

/// `Some(ln v)` when `v > 0`.
#[inline]
pub(crate) fn ln_if_positive(v: f64) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| v.ln())
}

pub(crate) fn check_trim(m: usize, len: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Parameter(format!(
            "trimming floor(len * eps) = {m} on a segment of length {len} must be at least 2"
        )));
    }
    Ok(())
}
