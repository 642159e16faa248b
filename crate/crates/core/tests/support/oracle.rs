//! Direct-summation reference statistics.
//!
//! Every range sum is recomputed with a plain loop, every scan visits each
//! alternative date, and scalings use `powf`. Nothing here touches the
//! prefix-sum kernel or the log-space helpers of the library.

#![allow(dead_code)]

use bubbleci::RegimeFit;

fn sum_y2(y: &[f64], from: usize, to: usize) -> f64 {
    (from + 1..=to).map(|t| y[t - 1] * y[t - 1]).sum()
}

fn sum_ydy(y: &[f64], from: usize, to: usize) -> f64 {
    (from + 1..=to).map(|t| y[t - 1] * (y[t] - y[t - 1])).sum()
}

fn sum_dy2(y: &[f64], from: usize, to: usize) -> f64 {
    (from + 1..=to).map(|t| (y[t] - y[t - 1]).powi(2)).sum()
}

fn tstat(y: &[f64], from: usize, to: usize, sigma2: f64) -> f64 {
    sum_ydy(y, from, to) / (sigma2 * sum_y2(y, from, to)).sqrt()
}

/// `(argmin, min)` of `f` over `range`, earliest index on ties.
fn argmin(range: impl Iterator<Item = usize>, f: impl Fn(usize) -> f64) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for k in range {
        let v = f(k);
        if best.0 == usize::MAX || v < best.1 {
            best = (k, v);
        }
    }
    best
}

fn argmax(range: impl Iterator<Item = usize>, f: impl Fn(usize) -> f64) -> (usize, f64) {
    let (k, v) = argmin(range, |k| -f(k));
    (k, -v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Named {
    pub values: Vec<(&'static str, Option<f64>)>,
    pub argmins: Vec<(&'static str, usize)>,
}

pub fn emergence(y: &[f64], fit: &RegimeFit, tc: usize, t1: usize, eps: f64) -> Named {
    let n = (y.len() - 1) as f64;
    let m = (tc as f64 * eps).floor() as usize;
    let (phi, rho, s2) = (fit.phi_a_hat, fit.rho_a_hat, fit.sigma2_hat);
    let right = || t1 + m..=tc;
    let left = || 1..=t1 - m;

    let (k_a, num_a) = argmin(right(), |k| 2.0 * sum_ydy(y, t1, k) - rho * sum_y2(y, t1, k));
    let (k_b, num_b) = argmin(right(), |k| y[k] * y[k] - rho * sum_y2(y, t1, k));
    let (k_t, tmin) = argmin(right(), |k| tstat(y, t1, k, s2));
    let tsum: f64 = right().map(|k| tstat(y, t1, k, s2)).sum();

    let lr_a12 = num_a / (n * phi.powf(2.0 * (k_a - t1) as f64) * s2 / 2.0);
    let lr_b12 = num_b / (n * phi.powf(2.0 * (k_b - t1) as f64) * s2 / 2.0);
    let pos = rho > 0.0;
    let em_a12 = pos.then(|| tsum / (n * phi.powf(2.0 * (tc - t1) as f64) / (2.0 * rho)).sqrt());
    let em_b12 = pos.then(|| tmin / (n * rho * phi.powf(2.0 * (k_t - t1) as f64) / 2.0).sqrt());

    let (_, num21) = argmax(left(), |k| 2.0 * sum_ydy(y, k, t1) - rho * sum_y2(y, k, t1));
    let lr_a21 = pos.then(|| num21 / ((tc * tc) as f64 * rho * s2));
    let em_a21 = left().map(|k| tstat(y, k, t1, s2)).sum::<f64>() / tc as f64;
    let (_, em_b21) = argmax(left(), |k| tstat(y, k, t1, s2));

    Named {
        values: vec![
            ("lr_a12", Some(lr_a12)),
            ("lr_b12", Some(lr_b12)),
            ("em_a12", em_a12),
            ("em_b12", em_b12),
            ("lr_a21", lr_a21),
            ("em_a21", Some(em_a21)),
            ("em_b21", Some(em_b21)),
        ],
        argmins: vec![("t_lra12", k_a), ("t_lrb12", k_b), ("t_emb12", k_t)],
    }
}

/// Collapse statistics on `(te, tr]`; the left scan starts at `te + 1`.
pub fn collapse(y: &[f64], fit: &RegimeFit, te: usize, tr: usize, t1: usize, eps: f64) -> Named {
    let n = (y.len() - 1) as f64;
    let m = ((tr - te) as f64 * eps).floor() as usize;
    let (pa, pb, ra, rb, s2) =
        (fit.phi_a_hat, fit.phi_b_hat, fit.rho_a_hat, fit.rho_b_hat, fit.sigma2_hat);
    let shift = 2.0 - pa - pb;
    let right = || t1 + m..=tr;
    let left = || te + 1..=t1 - m;
    let growth = pa.powf(2.0 * (t1 - te) as f64);

    let (_, num12) = argmax(right(), |k| 2.0 * sum_ydy(y, t1, k) + shift * sum_y2(y, t1, k));
    let (_, num21) = argmin(left(), |k| 2.0 * sum_ydy(y, k, t1) + shift * sum_y2(y, k, t1));
    let avg12 = right().map(|k| tstat(y, t1, k, s2)).sum::<f64>() / (tr - t1 - m + 1) as f64;
    let avg21 = left().map(|k| tstat(y, k, t1, s2)).sum::<f64>() / (t1 - m - te) as f64;
    let (_, tmax) = argmax(right(), |k| tstat(y, t1, k, s2));
    let (_, tmin) = argmin(left(), |k| tstat(y, k, t1, s2));

    let lr_ok = pa > 0.0 && pa - pb > 0.0;
    let lr_den = n * (pa - pb) * growth * s2;
    let lr_a12 = (lr_ok && rb > 0.0).then(|| num12 / (lr_den / (2.0 * rb)));
    let lr_a21 = (lr_ok && ra > 0.0).then(|| num21 / (lr_den / (2.0 * ra)));
    let em12 = (pa > 0.0 && rb > 0.0).then(|| (n * rb * growth / 2.0).sqrt());
    let em21 = (pa > 0.0 && ra > 0.0).then(|| (n * ra * growth / 2.0).sqrt());

    Named {
        values: vec![
            ("lr_a12", lr_a12),
            ("em_a12", em12.map(|d| avg12 / d)),
            ("em_b12", em12.map(|d| tmax / d)),
            ("lr_a21", lr_a21),
            ("em_a21", em21.map(|d| avg21 / d)),
            ("em_b21", em21.map(|d| tmin / d)),
        ],
        argmins: vec![],
    }
}

pub fn recovery(y: &[f64], fit: &RegimeFit, te: usize, tc: usize, t1: usize, eps: f64) -> Named {
    let big_t = y.len() - 1;
    let n = big_t as f64;
    let m = ((big_t - tc) as f64 * eps).floor() as usize;
    let (pa, pb, rb, s2) = (fit.phi_a_hat, fit.phi_b_hat, fit.rho_b_hat, fit.sigma2_hat);
    let right = || t1 + m..=big_t;
    let left = || tc + m..=t1 - m;
    let growth = pa.powf(2.0 * (tc - te) as f64);
    let decay = |k: usize| pb.powf(2.0 * (k - tc) as f64);
    let ok = pa > 0.0 && pb > 0.0 && pb < 1.0;
    let ok_lr21 = pa > 0.0 && pb > 0.0;

    let (k12, num12) = argmin(right(), |k| 2.0 * sum_ydy(y, t1, k) + rb * sum_y2(y, t1, k));
    let (ka21, numa21) = argmax(left(), |k| 2.0 * sum_ydy(y, k, t1) + rb * sum_y2(y, k, t1));
    let (kb21, numb21) = argmax(left(), |k| {
        -y[k] * y[k] - sum_dy2(y, k, t1) + rb * sum_y2(y, k, t1)
    });
    let (_, tmin) = argmin(right(), |k| tstat(y, t1, k, s2));
    let (kt21, tmax) = argmax(left(), |k| tstat(y, k, t1, s2));
    let sum12: f64 = right().map(|k| tstat(y, t1, k, s2)).sum();
    let sum21: f64 = left().map(|k| tstat(y, k, t1, s2)).sum();

    let lr_a12 = ok.then(|| num12 / (n * (k12 - t1) as f64 * rb * growth * decay(t1) * s2));
    let lr_a21 = ok_lr21.then(|| numa21 / (n * growth * decay(ka21) * s2 / 2.0));
    let lr_b21 = ok_lr21.then(|| numb21 / (n * growth * decay(kb21) * s2 / 2.0));
    let em_a21 = ok.then(|| sum21 / (n * growth * pb.powf(2.0 * m as f64) / (2.0 * rb)).sqrt());
    let em_b21 = ok.then(|| tmax / (n * rb * growth * decay(kt21) / 2.0).sqrt());

    Named {
        values: vec![
            ("lr_a12", lr_a12),
            ("em_a12", Some(sum12 / (big_t - tc) as f64)),
            ("em_b12", Some(tmin)),
            ("lr_a21", lr_a21),
            ("lr_b21", lr_b21),
            ("em_a21", em_a21),
            ("em_b21", em_b21),
        ],
        argmins: vec![("t_lra12", k12), ("t_lra21", ka21), ("t_lrb21", kb21), ("t_emb21", kt21)],
    }
}

/// Relative agreement with an absolute floor for values at rounding level.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}
