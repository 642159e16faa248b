//! Break-date estimation, regime-wise AR(1) fits and the SADF pre-test.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical_values::empirical_quantile;
use crate::error::{Error, Result};
use crate::model::{BreakDates, GaussianInnovations, InnovationSource, PrefixSums, Series};

/// OLS fits on the explosive and collapse regimes plus the full-sample
/// residual variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeFit {
    pub phi_a_hat: f64,
    pub phi_b_hat: f64,
    /// `phi_a_hat - 1`
    pub rho_a_hat: f64,
    /// `1 - phi_b_hat`
    pub rho_b_hat: f64,
    pub sigma2_hat: f64,
}

fn ols_coefficient(y: &[f64], from: usize, to: usize) -> Result<f64> {
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for t in from + 1..=to {
        sxx += y[t - 1] * y[t - 1];
        sxy += y[t - 1] * y[t];
    }
    if sxx > 0.0 {
        Ok(sxy / sxx)
    } else {
        Err(Error::DegenerateInput(format!(
            "lagged levels over ({from}, {to}] are all zero"
        )))
    }
}

/// Fits `phi_a` on `(T_e, T_c]`, `phi_b` on `(T_c, T_r]`, and the residual
/// variance over `t = 1..T` with unit-root residuals outside the bubble.
pub fn fit_regimes(series: &Series, breaks: &BreakDates) -> Result<RegimeFit> {
    let n = series.sample_size();
    breaks.validate(n)?;
    let y = series.values();
    let phi_a = ols_coefficient(y, breaks.te, breaks.tc)?;
    let phi_b = ols_coefficient(y, breaks.tc, breaks.tr)?;
    let mut ssr = 0.0;
    let mut scale = 0.0;
    for t in 1..=n {
        let coef = if t <= breaks.te {
            1.0
        } else if t <= breaks.tc {
            phi_a
        } else if t <= breaks.tr {
            phi_b
        } else {
            1.0
        };
        let e = y[t] - coef * y[t - 1];
        ssr += e * e;
        scale += y[t] * y[t];
    }
    let mut sigma2 = ssr / n as f64;
    // residuals at rounding level count as an exact fit
    if sigma2 <= 1e-20 * scale / n as f64 {
        sigma2 = 0.0;
    }
    Ok(RegimeFit {
        phi_a_hat: phi_a,
        phi_b_hat: phi_b,
        rho_a_hat: phi_a - 1.0,
        rho_b_hat: 1.0 - phi_b,
        sigma2_hat: sigma2,
    })
}

/// Index minimizing `ssr` over `lo..=hi`, earliest on ties.
fn argmin_ssr(lo: usize, hi: usize, ssr: impl Fn(usize) -> f64) -> usize {
    let mut best = (lo, f64::INFINITY);
    for k in lo..=hi {
        let v = ssr(k);
        if v < best.1 {
            best = (k, v);
        }
    }
    best.0
}

/// Step-by-step least squares estimates of `(T_e, T_c, T_r)`.
///
/// The collapse date minimizes the SSR of a full-sample AR(1) whose
/// coefficient changes once. The emergence date then minimizes the SSR of a
/// unit root followed by a free AR(1) on `[1, T_c]`, and the recovery date
/// the SSR of a free AR(1) followed by a unit root on `[T_c + 1, T]`. Each
/// search is trimmed by `floor(trim * segment length)` at both ends.
pub fn estimate_breaks(series: &Series, trim: f64) -> Result<BreakDates> {
    let n = series.sample_size();
    if !(trim > 0.0 && trim < 0.5) {
        return Err(Error::Parameter(format!("trim must lie in (0, 0.5), got {trim}")));
    }
    if (n as f64) * trim < 20.0 {
        return Err(Error::Parameter(format!(
            "sample size {n} is too short for trimming {trim}: need at least {}",
            (20.0 / trim).ceil()
        )));
    }
    let p = PrefixSums::new(series);
    let m = (trim * n as f64).floor() as usize;
    let tc = argmin_ssr(m, n - m, |k| p.ar1_ssr(0, k) + p.ar1_ssr(k, n));

    let m_e = ((trim * tc as f64).floor() as usize).max(1);
    let te = argmin_ssr(m_e, tc - m_e, |k| p.sum_dy2(0, k) + p.ar1_ssr(k, tc));

    let m_r = ((trim * (n - tc) as f64).floor() as usize).max(1);
    let tr = argmin_ssr(tc + m_r, n - m_r, |k| p.ar1_ssr(tc, k) + p.sum_dy2(k, n));

    BreakDates::new(te, tc, tr, n)
}

/// Forward-recursive ADF t-statistics; see [`sadf`].
struct AdfWindows {
    lags: usize,
}

impl AdfWindows {
    /// ADF t-statistic for `rho` in `dy_t = c + rho y_{t-1} + sum_j g_j dy_{t-j}`
    /// on every window `y_0..=y_end` with `end` in `first_end..=T`.
    fn statistics(&self, y: &[f64], first_end: usize) -> Vec<Option<f64>> {
        let n = y.len() - 1;
        let k = 2 + self.lags;
        let mut xtx = DMatrix::<f64>::zeros(k, k);
        let mut xty = DVector::<f64>::zeros(k);
        let mut yty = 0.0;
        let mut count = 0usize;
        let mut sum_lag = 0.0;
        let mut sum_lag2 = 0.0;
        let mut out = Vec::with_capacity(n + 1 - first_end);
        let mut row = vec![0.0; k];
        for t in self.lags + 1..=n {
            let dy = y[t] - y[t - 1];
            row[0] = 1.0;
            row[1] = y[t - 1];
            for j in 1..=self.lags {
                row[1 + j] = y[t - j] - y[t - j - 1];
            }
            for a in 0..k {
                xty[a] += row[a] * dy;
                for b in 0..k {
                    xtx[(a, b)] += row[a] * row[b];
                }
            }
            yty += dy * dy;
            count += 1;
            sum_lag += y[t - 1];
            sum_lag2 += y[t - 1] * y[t - 1];
            if t < first_end {
                continue;
            }
            let spread = sum_lag2 - sum_lag * sum_lag / count as f64;
            if count <= k || !(spread > 1e-12 * sum_lag2.max(f64::MIN_POSITIVE)) {
                out.push(None);
                continue;
            }
            out.push(self.tstat(&xtx, &xty, yty, count));
        }
        out
    }

    fn tstat(&self, xtx: &DMatrix<f64>, xty: &DVector<f64>, yty: f64, count: usize) -> Option<f64> {
        let k = xtx.nrows();
        let inv = xtx.clone().try_inverse()?;
        let beta = &inv * xty;
        let ssr = (yty - beta.dot(xty)).max(0.0);
        let s2 = ssr / (count - k) as f64;
        let se = (s2 * inv[(1, 1)]).sqrt();
        let t = beta[1] / se;
        if t.is_nan() {
            None
        } else {
            Some(t)
        }
    }
}

/// Supremum of forward-recursive ADF statistics over windows `[0, r]`,
/// `r` in `[r0, 1]`, with an intercept and `lags` augmentation lags.
pub fn sadf(series: &Series, r0: f64, lags: usize) -> Result<f64> {
    let n = series.sample_size();
    if !(r0 > 0.0 && r0 <= 1.0) {
        return Err(Error::Parameter(format!("r0 must lie in (0, 1], got {r0}")));
    }
    let first_end = (r0 * n as f64).floor() as usize;
    if first_end < 10 {
        return Err(Error::Parameter(format!(
            "minimal window floor(r0 * T) = {first_end} is below 10 observations"
        )));
    }
    if first_end <= lags + 3 {
        return Err(Error::Parameter(format!("{lags} lags do not fit a window of {first_end}")));
    }
    AdfWindows { lags }
        .statistics(series.values(), first_end)
        .into_iter()
        .flatten()
        .reduce(f64::max)
        .ok_or_else(|| Error::DegenerateInput("no window has a non-constant lagged level".into()))
}

/// Upper-tail critical value of [`sadf`] under a driftless Gaussian random
/// walk of the same length, by simulation.
pub fn sadf_critical_value(
    sample_size: usize,
    r0: f64,
    lags: usize,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<f64> {
    if reps < 100 {
        return Err(Error::Parameter(format!("at least 100 replications required, got {reps}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parameter(format!("level must lie in (0, 1), got {level}")));
    }
    let draws: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut noise = GaussianInnovations::stream(seed, rep, 1.0);
            let path = random_walk(sample_size, &mut noise);
            sadf(&path, r0, lags)
        })
        .collect::<Result<_>>()?;
    let mut draws = draws;
    draws.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&draws, 1.0 - level))
}

fn random_walk(sample_size: usize, noise: &mut GaussianInnovations) -> Series {
    let mut y = Vec::with_capacity(sample_size + 1);
    y.push(0.0);
    for t in 1..=sample_size {
        y.push(y[t - 1] + noise.next_innovation());
    }
    Series::new(y).expect("random walk is finite")
}
