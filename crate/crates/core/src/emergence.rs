//! Location statistics for `H0: T_e = T_1` on `[1, T_c]`.
//!
//! The `12` statistics scan alternatives `T_2 > T_1` and reject in the left
//! tail; the `21` statistics scan `T_2 < T_1` and reject in the right tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::RegimeFit;
use crate::model::PrefixSums;
use crate::scan::{check_trim, div_exp, tstat, Extremum, Plugins};

/// All emergence statistics at one hypothesized date.
///
/// Statistics whose scaling involves `sqrt(rho_a)` or divides by `rho_a`
/// are `None` when the fitted explosive coefficient is not above one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmergenceStats {
    pub lr_a12: f64,
    pub lr_b12: f64,
    pub em_a12: Option<f64>,
    pub em_b12: Option<f64>,
    pub lr_a21: Option<f64>,
    pub em_a21: f64,
    pub em_b21: f64,
    /// Minimizer of the `LR_a12` numerator.
    pub t_lra12: usize,
    /// Minimizer of the `LR_b12` numerator.
    pub t_lrb12: usize,
    /// Minimizer of the `EM_b12` numerator.
    pub t_emb12: usize,
}

/// Range of hypothesized dates for which both scan ranges are nonempty.
pub fn permissible_range(tc: usize, eps: f64) -> Result<(usize, usize)> {
    let m = (tc as f64 * eps).floor() as usize;
    check_trim(m, tc)?;
    if m + 1 > tc - m {
        return Err(Error::Parameter(format!(
            "segment [1, {tc}] is too short for trimming {eps}"
        )));
    }
    Ok((m + 1, tc - m))
}

/// Computes every emergence statistic at `t1` on the segment `[1, tc]`.
pub fn emergence_stats(
    p: &PrefixSums,
    fit: &RegimeFit,
    tc: usize,
    t1: usize,
    eps: f64,
) -> Result<EmergenceStats> {
    let n = p.sample_size();
    if tc > n {
        return Err(Error::Parameter(format!("segment end {tc} exceeds sample size {n}")));
    }
    let m = (tc as f64 * eps).floor() as usize;
    check_trim(m, tc)?;
    if t1 < m + 1 || t1 + m > tc {
        return Err(Error::Range(format!(
            "T1 = {t1} leaves an empty scan range on [1, {tc}] with trimming {m}"
        )));
    }
    let pl = Plugins::from_fit(fit)?;
    let ln_phi = pl.ln_phi_a()?;
    let rho = pl.rho_a;
    let t_big = n as f64;

    let mut lra = Extremum::min();
    let mut lrb = Extremum::min();
    let mut tmin = Extremum::min();
    let mut tsum = 0.0;
    for t2 in t1 + m..=tc {
        let sy2 = p.sum_y2(t1, t2);
        let sydy = p.sum_ydy(t1, t2);
        lra.offer(t2, 2.0 * sydy - rho * sy2);
        let y = p.level(t2);
        lrb.offer(t2, y * y - rho * sy2);
        let t = tstat(p, t1, t2, pl.sigma)?;
        tsum += t;
        tmin.offer(t2, t);
    }

    let base = (t_big * pl.sigma2 / 2.0).ln();
    let lr_a12 = div_exp(lra.value, base + 2.0 * (lra.at - t1) as f64 * ln_phi);
    let lr_b12 = div_exp(lrb.value, base + 2.0 * (lrb.at - t1) as f64 * ln_phi);
    let (em_a12, em_b12) = if rho > 0.0 {
        let log_a = 0.5 * ((t_big / (2.0 * rho)).ln() + 2.0 * (tc - t1) as f64 * ln_phi);
        let log_b = 0.5 * ((t_big * rho / 2.0).ln() + 2.0 * (tmin.at - t1) as f64 * ln_phi);
        (Some(div_exp(tsum, log_a)), Some(div_exp(tmin.value, log_b)))
    } else {
        (None, None)
    };

    let mut lr21 = Extremum::max();
    let mut tmax = Extremum::max();
    let mut tsum21 = 0.0;
    for t2 in 1..=t1 - m {
        let sy2 = p.sum_y2(t2, t1);
        let sydy = p.sum_ydy(t2, t1);
        lr21.offer(t2, 2.0 * sydy - rho * sy2);
        let t = tstat(p, t2, t1, pl.sigma)?;
        tsum21 += t;
        tmax.offer(t2, t);
    }
    let t_ub = tc as f64;
    let lr_a21 = (rho > 0.0).then(|| lr21.value / (t_ub * t_ub * rho * pl.sigma2));

    Ok(EmergenceStats {
        lr_a12,
        lr_b12,
        em_a12,
        em_b12,
        lr_a21,
        em_a21: tsum21 / t_ub,
        em_b21: tmax.value,
        t_lra12: lra.at,
        t_lrb12: lrb.at,
        t_emb12: tmin.at,
    })
}
