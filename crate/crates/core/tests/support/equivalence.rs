//! Library statistics against the direct-summation oracle on random
//! designs, bubble sizes, trimmings and hypothesized dates.

#![allow(dead_code)]

use bubbleci::collapse::{collapse_stats, CollapseStats};
use bubbleci::emergence::{emergence_stats, EmergenceStats};
use bubbleci::recovery::{recovery_stats, RecoveryStats};
use bubbleci::{fit_regimes, simulate, BreakDates, BubbleDgpSpec, GaussianInnovations, PrefixSums, RegimeFit, Series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{self, close, Named};

const REL: f64 = 1e-8;

struct Instance {
    series: Series,
    breaks: BreakDates,
    fit: RegimeFit,
    eps: f64,
}

/// Random design, bubble size, trimming and seed; one in ten fits is
/// pushed to a non-explosive coefficient so the undefined branches run too.
fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let case = rng.random_range(1..=4);
    let a = rng.random_range(1.0..8.0);
    let spec = BubbleDgpSpec::case(case, a);
    let series = simulate(&spec, &mut GaussianInnovations::seeded(rng.random(), spec.sigma)).unwrap();
    let breaks = spec.break_dates().unwrap();
    let mut fit = fit_regimes(&series, &breaks).unwrap();
    if rng.random_bool(0.1) {
        fit.phi_a_hat = rng.random_range(0.9..1.0);
        fit.rho_a_hat = fit.phi_a_hat - 1.0;
    }
    if rng.random_bool(0.1) {
        fit.phi_b_hat = rng.random_range(1.0..1.05);
        fit.rho_b_hat = 1.0 - fit.phi_b_hat;
    }
    let eps = [0.05, 0.1, 0.15][rng.random_range(0..3)];
    Instance { series, breaks, fit, eps }
}

fn compare(label: &str, ours: &[(&str, Option<f64>)], reference: &Named) -> Result<(), String> {
    if ours.len() != reference.values.len() {
        return Err(format!("{label}: {} statistics vs {} in the oracle", ours.len(), reference.values.len()));
    }
    for ((name, a), (rname, b)) in ours.iter().zip(&reference.values) {
        assert_eq!(name, rname);
        match (a, b) {
            (Some(a), Some(b)) if !close(*a, *b, REL) => {
                return Err(format!("{label} {name}: {a} vs oracle {b}"))
            }
            (Some(_), Some(_)) | (None, None) => {}
            _ => return Err(format!("{label} {name}: definedness differs, {a:?} vs oracle {b:?}")),
        }
    }
    Ok(())
}

fn argmins_agree(label: &str, ours: &[(&str, usize)], reference: &Named) -> Result<(), String> {
    for ((name, a), (rname, b)) in ours.iter().zip(&reference.argmins) {
        assert_eq!(name, rname);
        if a != b {
            return Err(format!("{label} {name}: argmin {a} vs oracle {b}"));
        }
    }
    Ok(())
}

fn emergence_values(s: &EmergenceStats) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("lr_a12", Some(s.lr_a12)),
        ("lr_b12", Some(s.lr_b12)),
        ("em_a12", s.em_a12),
        ("em_b12", s.em_b12),
        ("lr_a21", s.lr_a21),
        ("em_a21", Some(s.em_a21)),
        ("em_b21", Some(s.em_b21)),
    ]
}

fn collapse_values(s: &CollapseStats) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("lr_a12", s.lr_a12),
        ("em_a12", s.em_a12),
        ("em_b12", s.em_b12),
        ("lr_a21", s.lr_a21),
        ("em_a21", s.em_a21),
        ("em_b21", s.em_b21),
    ]
}

fn recovery_values(s: &RecoveryStats) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("lr_a12", s.lr_a12),
        ("em_a12", Some(s.em_a12)),
        ("em_b12", Some(s.em_b12)),
        ("lr_a21", s.lr_a21),
        ("lr_b21", s.lr_b21),
        ("em_a21", s.em_a21),
        ("em_b21", s.em_b21),
    ]
}

/// Compares `instances` random emergence instances drawn from `seed`.
pub fn emergence(seed: u64, instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..instances {
        let inst = instance(&mut rng);
        let tc = inst.breaks.tc;
        let (lo, hi) = bubbleci::emergence::permissible_range(tc, inst.eps).unwrap();
        let t1 = rng.random_range(lo..=hi);
        let p = PrefixSums::new(&inst.series);
        let label = format!("instance {i} (T1 = {t1}, eps = {})", inst.eps);
        let ours = emergence_stats(&p, &inst.fit, tc, t1, inst.eps).unwrap();
        let reference = oracle::emergence(inst.series.values(), &inst.fit, tc, t1, inst.eps);
        compare(&label, &emergence_values(&ours), &reference)?;
        argmins_agree(
            &label,
            &[("t_lra12", ours.t_lra12), ("t_lrb12", ours.t_lrb12), ("t_emb12", ours.t_emb12)],
            &reference,
        )?;
    }
    Ok(())
}

/// Compares `instances` random collapse instances drawn from `seed`.
pub fn collapse(seed: u64, instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..instances {
        let inst = instance(&mut rng);
        let seg = inst.breaks.collapse_segment();
        let (lo, hi) = bubbleci::collapse::permissible_range(seg, inst.eps).unwrap();
        let t1 = rng.random_range(lo..=hi);
        let p = PrefixSums::new(&inst.series);
        let label = format!("instance {i} (T1 = {t1}, eps = {})", inst.eps);
        let ours = collapse_stats(&p, &inst.fit, seg, t1, inst.eps).unwrap();
        let reference =
            oracle::collapse(inst.series.values(), &inst.fit, seg.start, seg.end, t1, inst.eps);
        compare(&label, &collapse_values(&ours), &reference)?;
    }
    Ok(())
}

/// Compares `instances` random recovery instances drawn from `seed`.
pub fn recovery(seed: u64, instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..instances {
        let inst = instance(&mut rng);
        let n = inst.series.sample_size();
        let seg = inst.breaks.recovery_segment(n);
        let (lo, hi) = bubbleci::recovery::permissible_range(seg, inst.eps).unwrap();
        let t1 = rng.random_range(lo..=hi);
        let p = PrefixSums::new(&inst.series);
        let label = format!("instance {i} (T1 = {t1}, eps = {})", inst.eps);
        let ours = recovery_stats(&p, &inst.fit, &inst.breaks, t1, inst.eps).unwrap();
        let (te, tc) = (inst.breaks.te, inst.breaks.tc);
        let reference = oracle::recovery(inst.series.values(), &inst.fit, te, tc, t1, inst.eps);
        compare(&label, &recovery_values(&ours), &reference)?;
        argmins_agree(
            &label,
            &[
                ("t_lra12", ours.t_lra12),
                ("t_lra21", ours.t_lra21),
                ("t_lrb21", ours.t_lrb21),
                ("t_emb21", ours.t_emb21),
            ],
            &reference,
        )?;
    }
    Ok(())
}
