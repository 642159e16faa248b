//! Location statistics for `H0: T_r = T_1` on `[T_c + 1, T]`.
//!
//! The `12` statistics reject in the left tail, the `21` statistics in the
//! right tail. Both scan ranges are trimmed, and the `21` range is trimmed
//! at both ends: `T_c + m <= T_2 <= T_1 - m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::RegimeFit;
use crate::model::{BreakDates, PrefixSums, Segment};
use crate::scan::{check_trim, div_exp, ln_if_positive, tstat, Extremum, Plugins};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub lr_a12: Option<f64>,
    pub em_a12: f64,
    pub em_b12: f64,
    pub lr_a21: Option<f64>,
    pub lr_b21: Option<f64>,
    pub em_a21: Option<f64>,
    pub em_b21: Option<f64>,
    pub t_lra12: usize,
    pub t_lra21: usize,
    pub t_lrb21: usize,
    pub t_emb21: usize,
}

pub fn permissible_range(segment: Segment, eps: f64) -> Result<(usize, usize)> {
    let m = segment.trim(eps);
    check_trim(m, segment.len())?;
    let (lo, hi) = (segment.start + 2 * m, segment.end.saturating_sub(m));
    if lo > hi {
        return Err(Error::Parameter(format!(
            "segment ({}, {}] is too short for trimming {eps}",
            segment.start, segment.end
        )));
    }
    Ok((lo, hi))
}

/// Computes every recovery statistic at `t1` on `(T_c, T]`, where `T_e`
/// and `T_c` come from `breaks`.
pub fn recovery_stats(
    p: &PrefixSums,
    fit: &RegimeFit,
    breaks: &BreakDates,
    t1: usize,
    eps: f64,
) -> Result<RecoveryStats> {
    let n = p.sample_size();
    breaks.validate(n)?;
    let (te, tc) = (breaks.te, breaks.tc);
    let segment = breaks.recovery_segment(n);
    let m = segment.trim(eps);
    check_trim(m, segment.len())?;
    if t1 < tc + 2 * m || t1 + m > n {
        return Err(Error::Range(format!(
            "T1 = {t1} leaves an empty scan range on ({tc}, {n}] with trimming {m}"
        )));
    }
    let pl = Plugins::from_fit(fit)?;
    let t_big = n as f64;
    let t_cu = segment.len() as f64;
    let rho = pl.rho_b;
    let ln_rho = ln_if_positive(rho);
    let ln_phi_b = ln_if_positive(pl.phi_b);
    // ln of phi_a^{2(T_c - T_e)}
    let ln_k = ln_if_positive(pl.phi_a).map(|l| 2.0 * (tc - te) as f64 * l);
    let ln_decay = |k: usize| ln_phi_b.map(|l| 2.0 * k as f64 * l);

    let mut lr12 = Extremum::min();
    let mut tmin = Extremum::min();
    let mut tsum12 = 0.0;
    for t2 in t1 + m..=n {
        lr12.offer(t2, 2.0 * p.sum_ydy(t1, t2) + rho * p.sum_y2(t1, t2));
        let t = tstat(p, t1, t2, pl.sigma)?;
        tsum12 += t;
        tmin.offer(t2, t);
    }

    let mut lra21 = Extremum::max();
    let mut lrb21 = Extremum::max();
    let mut tmax = Extremum::max();
    let mut tsum21 = 0.0;
    for t2 in tc + m..=t1 - m {
        let sy2 = p.sum_y2(t2, t1);
        lra21.offer(t2, 2.0 * p.sum_ydy(t2, t1) + rho * sy2);
        let y = p.level(t2);
        lrb21.offer(t2, -y * y - p.sum_dy2(t2, t1) + rho * sy2);
        let t = tstat(p, t2, t1, pl.sigma)?;
        tsum21 += t;
        tmax.offer(t2, t);
    }

    let lr_a12 = match (ln_rho, ln_k, ln_decay(t1 - tc)) {
        (Some(r), Some(k), Some(d)) => {
            let width = (lr12.at - t1) as f64;
            Some(div_exp(lr12.value, (t_big * width * pl.sigma2).ln() + r + k + d))
        }
        _ => None,
    };
    let half = (t_big * pl.sigma2 / 2.0).ln();
    let lr21_stat = |e: &Extremum| match (ln_k, ln_decay(e.at - tc)) {
        (Some(k), Some(d)) => Some(div_exp(e.value, half + k + d)),
        _ => None,
    };
    let lr_a21 = lr21_stat(&lra21);
    let lr_b21 = lr21_stat(&lrb21);
    let em_a21 = match (ln_rho, ln_k, ln_decay(m)) {
        (Some(r), Some(k), Some(d)) => Some(div_exp(tsum21, 0.5 * ((t_big / 2.0).ln() + k + d - r))),
        _ => None,
    };
    let em_b21 = match (ln_rho, ln_k, ln_decay(tmax.at - tc)) {
        (Some(r), Some(k), Some(d)) => Some(div_exp(tmax.value, 0.5 * ((t_big / 2.0).ln() + r + k + d))),
        _ => None,
    };

    Ok(RecoveryStats {
        lr_a12,
        em_a12: tsum12 / t_cu,
        em_b12: tmin.value,
        lr_a21,
        lr_b21,
        em_a21,
        em_b21,
        t_lra12: lr12.at,
        t_lra21: lra21.at,
        t_lrb21: lrb21.at,
        t_emb21: tmax.at,
    })
}
