//! Location statistics for `H0: T_c = T_1` on `[T_e + 1, T_r]`.
//!
//! Here the `12` statistics reject in the right tail and the `21`
//! statistics in the left tail. Their critical values are signed closed
//! forms in `lambda_e`: negative on the right, positive on the left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::RegimeFit;
use crate::model::{PrefixSums, Segment};
use crate::scan::{check_trim, div_exp, ln_if_positive, tstat, Extremum, Plugins};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseStats {
    pub lr_a12: Option<f64>,
    pub em_a12: Option<f64>,
    pub em_b12: Option<f64>,
    pub lr_a21: Option<f64>,
    pub em_a21: Option<f64>,
    pub em_b21: Option<f64>,
}

pub fn permissible_range(segment: Segment, eps: f64) -> Result<(usize, usize)> {
    let m = segment.trim(eps);
    check_trim(m, segment.len())?;
    let (lo, hi) = (segment.start + 1 + m, segment.end.saturating_sub(m));
    if lo > hi {
        return Err(Error::Parameter(format!(
            "segment ({}, {}] is too short for trimming {eps}",
            segment.start, segment.end
        )));
    }
    Ok((lo, hi))
}

/// Computes every collapse statistic at `t1` on `segment = (T_e, T_r]`.
pub fn collapse_stats(
    p: &PrefixSums,
    fit: &RegimeFit,
    segment: Segment,
    t1: usize,
    eps: f64,
) -> Result<CollapseStats> {
    let n = p.sample_size();
    if segment.end > n || segment.is_empty() {
        return Err(Error::Parameter(format!(
            "segment ({}, {}] does not fit a sample of size {n}",
            segment.start, segment.end
        )));
    }
    let (te, tr) = (segment.start, segment.end);
    let m = segment.trim(eps);
    check_trim(m, segment.len())?;
    if t1 < te + 1 + m || t1 + m > tr {
        return Err(Error::Range(format!(
            "T1 = {t1} leaves an empty scan range on ({te}, {tr}] with trimming {m}"
        )));
    }
    let pl = Plugins::from_fit(fit)?;
    let ln_phi = pl.ln_phi_a()?;
    let t_big = n as f64;
    let shift = 2.0 - pl.phi_a - pl.phi_b;
    let growth = 2.0 * (t1 - te) as f64 * ln_phi;
    let ln_gap = ln_if_positive(pl.phi_a - pl.phi_b);
    let ln_rho_a = ln_if_positive(pl.rho_a);
    let ln_rho_b = ln_if_positive(pl.rho_b);

    let mut lr12 = Extremum::max();
    let mut tmax = Extremum::max();
    let mut tsum12 = 0.0;
    for t2 in t1 + m..=tr {
        let num = 2.0 * p.sum_ydy(t1, t2) + shift * p.sum_y2(t1, t2);
        lr12.offer(t2, num);
        let t = tstat(p, t1, t2, pl.sigma)?;
        tsum12 += t;
        tmax.offer(t2, t);
    }
    let count12 = (tr - t1 - m + 1) as f64;

    let mut lr21 = Extremum::min();
    let mut tmin = Extremum::min();
    let mut tsum21 = 0.0;
    for t2 in te + 1..=t1 - m {
        let num = 2.0 * p.sum_ydy(t2, t1) + shift * p.sum_y2(t2, t1);
        lr21.offer(t2, num);
        let t = tstat(p, t2, t1, pl.sigma)?;
        tsum21 += t;
        tmin.offer(t2, t);
    }
    let count21 = (t1 - m - te) as f64;

    let lr_base = ln_gap.map(|g| (t_big * pl.sigma2 / 2.0).ln() + g + growth);
    let lr_a12 = lr_base
        .zip(ln_rho_b)
        .map(|(b, r)| div_exp(lr12.value, b - r));
    let lr_a21 = lr_base
        .zip(ln_rho_a)
        .map(|(b, r)| div_exp(lr21.value, b - r));

    let em_den = |ln_rho: f64| 0.5 * ((t_big / 2.0).ln() + ln_rho + growth);
    let (em_a12, em_b12) = match ln_rho_b {
        Some(r) => {
            let d = em_den(r);
            (Some(div_exp(tsum12 / count12, d)), Some(div_exp(tmax.value, d)))
        }
        None => (None, None),
    };
    let (em_a21, em_b21) = match ln_rho_a {
        Some(r) => {
            let d = em_den(r);
            (Some(div_exp(tsum21 / count21, d)), Some(div_exp(tmin.value, d)))
        }
        None => (None, None),
    };

    Ok(CollapseStats { lr_a12, em_a12, em_b12, lr_a21, em_a21, em_b21 })
}
