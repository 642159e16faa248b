//! Rejection rates of every location statistic at a hypothesized date
//! offset from the truth, one statistic and one tail at a time.

#![allow(dead_code)]

use bubbleci::collapse::collapse_stats;
use bubbleci::emergence::emergence_stats;
use bubbleci::recovery::recovery_stats;
use bubbleci::{
    fit_regimes, simulate, BreakDates, BubbleDgpSpec, CriticalValues, DateType,
    GaussianInnovations, PrefixSums, RegimeFit, Variant,
};
use rayon::prelude::*;

/// `true` for the statistics that scan alternatives after the hypothesized date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Later,
    Earlier,
}

#[derive(Debug, Clone)]
pub struct Rate {
    pub name: &'static str,
    pub side: Side,
    pub rate: f64,
}

/// Statistic name, side, the variant whose critical values it uses, value.
type Entry = (&'static str, Side, Variant, Option<f64>);

fn entries(
    date: DateType,
    p: &PrefixSums,
    fit: &RegimeFit,
    breaks: &BreakDates,
    t1: usize,
    eps: f64,
) -> Vec<Entry> {
    use Side::{Earlier, Later};
    use Variant::{EmA, EmB, Le, LrA};
    match date {
        DateType::Emergence => match emergence_stats(p, fit, breaks.tc, t1, eps) {
            Ok(s) => vec![
                ("lr_a12", Later, LrA, Some(s.lr_a12)),
                ("lr_b12", Later, Le, Some(s.lr_b12)),
                ("em_a12", Later, EmA, s.em_a12),
                ("em_b12", Later, EmB, s.em_b12),
                ("lr_a21", Earlier, LrA, s.lr_a21),
                ("em_a21", Earlier, EmA, Some(s.em_a21)),
                ("em_b21", Earlier, EmB, Some(s.em_b21)),
            ],
            Err(_) => ["lr_a12", "lr_b12", "em_a12", "em_b12"]
                .map(|n| (n, Later, LrA, None))
                .into_iter()
                .chain(["lr_a21", "em_a21", "em_b21"].map(|n| (n, Earlier, LrA, None)))
                .collect(),
        },
        DateType::Collapse => match collapse_stats(p, fit, breaks.collapse_segment(), t1, eps) {
            Ok(s) => vec![
                ("lr_a12", Later, LrA, s.lr_a12),
                ("em_a12", Later, EmA, s.em_a12),
                ("em_b12", Later, EmB, s.em_b12),
                ("lr_a21", Earlier, LrA, s.lr_a21),
                ("em_a21", Earlier, EmA, s.em_a21),
                ("em_b21", Earlier, EmB, s.em_b21),
            ],
            Err(_) => ["lr_a12", "em_a12", "em_b12"]
                .map(|n| (n, Later, LrA, None))
                .into_iter()
                .chain(["lr_a21", "em_a21", "em_b21"].map(|n| (n, Earlier, LrA, None)))
                .collect(),
        },
        DateType::Recovery => match recovery_stats(p, fit, breaks, t1, eps) {
            Ok(s) => vec![
                ("lr_a12", Later, LrA, s.lr_a12),
                ("em_a12", Later, EmA, Some(s.em_a12)),
                ("em_b12", Later, EmB, Some(s.em_b12)),
                ("lr_a21", Earlier, LrA, s.lr_a21),
                ("lr_b21", Earlier, Le, s.lr_b21),
                ("em_a21", Earlier, EmA, s.em_a21),
                ("em_b21", Earlier, EmB, s.em_b21),
            ],
            Err(_) => ["lr_a12", "em_a12", "em_b12"]
                .map(|n| (n, Later, LrA, None))
                .into_iter()
                .chain(["lr_a21", "lr_b21", "em_a21", "em_b21"].map(|n| (n, Earlier, LrA, None)))
                .collect(),
        },
    }
}

fn rejects(date: DateType, side: Side, stat: Option<f64>, cv: f64) -> bool {
    // collapse: later-side statistics reject above, earlier-side below
    let upper = (date == DateType::Collapse) == (side == Side::Later);
    stat.is_some_and(|s| if upper { s > cv } else { s < cv })
}

/// Rejection rate of every statistic for `date` at `truth + offset` over
/// `reps` Case 1 replications with bubble size `a`, working at the true
/// dates with `delta = eps = 0.10`.
pub fn rejection_rates(date: DateType, a: f64, offset: i64, reps: u64, seed: u64) -> Vec<Rate> {
    rejection_rates_for(&BubbleDgpSpec::case(1, a), date, offset, reps, seed)
}

pub fn rejection_rates_for(
    spec: &BubbleDgpSpec,
    date: DateType,
    offset: i64,
    reps: u64,
    seed: u64,
) -> Vec<Rate> {
    let spec = *spec;
    let breaks = spec.break_dates().unwrap();
    let n = spec.sample_size;
    let t1 = (date.truth(&breaks) as i64 + offset) as usize;
    let cvs = CriticalValues::table1(0.10).unwrap();
    let lambda_e = breaks.te as f64 / n as f64;
    let tail = |v: Variant| match date {
        DateType::Emergence => cvs.emergence(v, t1, breaks.tc, n).unwrap(),
        DateType::Collapse => cvs.collapse(v, lambda_e).unwrap(),
        DateType::Recovery => cvs
            .recovery(v, lambda_e, breaks.recovery_segment(n).relative(t1))
            .unwrap(),
    };

    let hits: Vec<Vec<bool>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let series =
                simulate(&spec, &mut GaussianInnovations::stream(seed, rep, spec.sigma)).unwrap();
            let p = PrefixSums::new(&series);
            let fit = fit_regimes(&series, &breaks).unwrap();
            entries(date, &p, &fit, &breaks, t1, 0.10)
                .into_iter()
                .map(|(_, side, v, stat)| {
                    let cv = tail(v);
                    let cv = if side == Side::Later { cv.cv12 } else { cv.cv21 };
                    rejects(date, side, stat, cv)
                })
                .collect()
        })
        .collect();

    let layout = {
        let series = simulate(&spec, &mut GaussianInnovations::stream(seed, 0, spec.sigma)).unwrap();
        let fit = fit_regimes(&series, &breaks).unwrap();
        entries(date, &PrefixSums::new(&series), &fit, &breaks, t1, 0.10)
    };
    layout
        .iter()
        .enumerate()
        .map(|(i, &(name, side, _, _))| Rate {
            name,
            side,
            rate: hits.iter().filter(|h| h[i]).count() as f64 / reps as f64,
        })
        .collect()
}

pub fn rate(rates: &[Rate], name: &str) -> f64 {
    rates.iter().find(|r| r.name == name).unwrap().rate
}
