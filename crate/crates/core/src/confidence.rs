//! Test inversion: the confidence set for a date is every permissible
//! hypothesized date that neither one-sided test rejects.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::{self, collapse_stats, CollapseStats};
use crate::critical_values::{CriticalValues, TailCvs};
use crate::emergence::{self, emergence_stats, EmergenceStats};
use crate::error::{Error, Result};
use crate::estimation::RegimeFit;
use crate::model::{BreakDates, PrefixSums, Segment, Series};
use crate::recovery::{self, recovery_stats, RecoveryStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DateType {
    Emergence,
    Collapse,
    Recovery,
}

impl DateType {
    pub const ALL: [DateType; 3] = [DateType::Emergence, DateType::Collapse, DateType::Recovery];

    pub fn name(&self) -> &'static str {
        match self {
            DateType::Emergence => "emergence",
            DateType::Collapse => "collapse",
            DateType::Recovery => "recovery",
        }
    }

    fn superscript(&self) -> char {
        match self {
            DateType::Emergence => 'e',
            DateType::Collapse => 'c',
            DateType::Recovery => 'r',
        }
    }

    /// The segment on which this date is located, given working break dates.
    pub fn segment(&self, breaks: &BreakDates, sample_size: usize) -> Segment {
        match self {
            DateType::Emergence => breaks.emergence_segment(),
            DateType::Collapse => breaks.collapse_segment(),
            DateType::Recovery => breaks.recovery_segment(sample_size),
        }
    }

    pub fn truth(&self, breaks: &BreakDates) -> usize {
        match self {
            DateType::Emergence => breaks.te,
            DateType::Collapse => breaks.tc,
            DateType::Recovery => breaks.tr,
        }
    }

    /// Variants defined for this date.
    pub fn variants(&self) -> &'static [Variant] {
        match self {
            DateType::Collapse => &[Variant::LrA, Variant::EmA, Variant::EmB],
            _ => &[Variant::LrA, Variant::EmA, Variant::EmB, Variant::Le],
        }
    }
}

impl fmt::Display for DateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DateType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DateType::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown date type {s:?}")))
    }
}

/// Test family. `Le` pairs the LR-type and EM-type one-sided tests that
/// behave best in each direction: `LR_b12` with `EM_a21` for emergence,
/// `EM_b12` with `LR_b21` for recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    LrA,
    EmA,
    EmB,
    Le,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::LrA, Variant::EmA, Variant::EmB, Variant::Le];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::LrA => "lr_a",
            Variant::EmA => "em_a",
            Variant::EmB => "em_b",
            Variant::Le => "le",
        }
    }

    /// Table label such as `LE^e` or `EM_a^c`.
    pub fn label(&self, date: DateType) -> String {
        let s = date.superscript();
        match self {
            Variant::LrA => format!("LR_a^{s}"),
            Variant::EmA => format!("EM_a^{s}"),
            Variant::EmB => format!("EM_b^{s}"),
            Variant::Le => format!("LE^{s}"),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Variant::ALL
            .into_iter()
            .find(|v| v.name().replace('_', "") == key)
            .ok_or_else(|| Error::Parameter(format!("unknown variant {s:?}")))
    }
}

/// Decision log for one hypothesized date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DateRecord {
    pub date: usize,
    pub stat12: Option<f64>,
    pub stat21: Option<f64>,
    pub cv12: f64,
    pub cv21: f64,
    pub reject12: bool,
    pub reject21: bool,
    /// Some statistic at this date was undefined, so its tail retained.
    pub degenerate: bool,
}

impl DateRecord {
    pub fn retained(&self) -> bool {
        !self.reject12 && !self.reject21
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub date_type: DateType,
    pub variant: Variant,
    pub delta: f64,
    pub eps: f64,
    pub segment: Segment,
    /// Inclusive range of hypothesized dates that were tested.
    pub permissible: (usize, usize),
    pub records: Vec<DateRecord>,
}

/// `[a, b]` runs of consecutive dates.
fn runs(dates: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &d in dates {
        match out.last_mut() {
            Some(last) if last.1 + 1 == d => last.1 = d,
            _ => out.push((d, d)),
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl ConfidenceSet {
    /// Dates retained by both one-sided tests, ascending.
    pub fn retained(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.retained()).map(|r| r.date).collect()
    }

    /// Dates the `12` test does not reject.
    pub fn retained12(&self) -> Vec<usize> {
        self.records.iter().filter(|r| !r.reject12).map(|r| r.date).collect()
    }

    /// Dates the `21` test does not reject.
    pub fn retained21(&self) -> Vec<usize> {
        self.records.iter().filter(|r| !r.reject21).map(|r| r.date).collect()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.record(t).is_some_and(|r| r.retained())
    }

    pub fn record(&self, t: usize) -> Option<&DateRecord> {
        let (lo, hi) = self.permissible;
        (lo..=hi).contains(&t).then(|| &self.records[t - lo])
    }

    pub fn label(&self) -> String {
        self.variant.label(self.date_type)
    }

    pub fn degenerate_dates(&self) -> usize {
        self.records.iter().filter(|r| r.degenerate).count()
    }

    /// One row per tested date.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("date,retained,reject12,reject21,stat12,stat21,cv12,cv21,degenerate\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{:e},{:e},{}\n",
                r.date,
                r.retained() as u8,
                r.reject12 as u8,
                r.reject21 as u8,
                opt(r.stat12),
                opt(r.stat21),
                r.cv12,
                r.cv21,
                r.degenerate as u8
            ));
        }
        s
    }

    /// Compact description: metadata plus retained dates as runs.
    pub fn summary_json(&self) -> serde_json::Value {
        let kept = self.retained();
        serde_json::json!({
            "date_type": self.date_type.name(),
            "variant": self.variant.name(),
            "label": self.label(),
            "delta": self.delta,
            "eps": self.eps,
            "segment": [self.segment.start, self.segment.end],
            "permissible": [self.permissible.0, self.permissible.1],
            "retained_count": kept.len(),
            "relative_length": kept.len() as f64 / self.segment.len() as f64,
            "retained": runs(&kept),
            "degenerate_dates": self.degenerate_dates(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Stats {
    Emergence(EmergenceStats),
    Collapse(CollapseStats),
    Recovery(RecoveryStats),
}

impl Stats {
    fn pick(&self, variant: Variant) -> Result<(Option<f64>, Option<f64>)> {
        Ok(match (self, variant) {
            (Stats::Emergence(s), Variant::LrA) => (Some(s.lr_a12), s.lr_a21),
            (Stats::Emergence(s), Variant::EmA) => (s.em_a12, Some(s.em_a21)),
            (Stats::Emergence(s), Variant::EmB) => (s.em_b12, Some(s.em_b21)),
            (Stats::Emergence(s), Variant::Le) => (Some(s.lr_b12), Some(s.em_a21)),
            (Stats::Collapse(s), Variant::LrA) => (s.lr_a12, s.lr_a21),
            (Stats::Collapse(s), Variant::EmA) => (s.em_a12, s.em_a21),
            (Stats::Collapse(s), Variant::EmB) => (s.em_b12, s.em_b21),
            (Stats::Collapse(_), Variant::Le) => {
                return Err(Error::Parameter("the LE combination is not defined for the collapse date".into()))
            }
            (Stats::Recovery(s), Variant::LrA) => (s.lr_a12, s.lr_a21),
            (Stats::Recovery(s), Variant::EmA) => (Some(s.em_a12), s.em_a21),
            (Stats::Recovery(s), Variant::EmB) => (Some(s.em_b12), s.em_b21),
            (Stats::Recovery(s), Variant::Le) => (Some(s.em_b12), s.lr_b21),
        })
    }
}

/// `true` when the `12` test of `date` rejects in the upper tail.
fn upper12(date: DateType) -> bool {
    date == DateType::Collapse
}

fn permissible(date: DateType, segment: Segment, eps: f64) -> Result<(usize, usize)> {
    match date {
        DateType::Emergence => emergence::permissible_range(segment.end, eps),
        DateType::Collapse => collapse::permissible_range(segment, eps),
        DateType::Recovery => recovery::permissible_range(segment, eps),
    }
}

fn stats_at(
    p: &PrefixSums,
    fit: &RegimeFit,
    breaks: &BreakDates,
    date: DateType,
    t1: usize,
    eps: f64,
) -> Result<Option<Stats>> {
    let r = match date {
        DateType::Emergence => emergence_stats(p, fit, breaks.tc, t1, eps).map(Stats::Emergence),
        DateType::Collapse => collapse_stats(p, fit, breaks.collapse_segment(), t1, eps).map(Stats::Collapse),
        DateType::Recovery => recovery_stats(p, fit, breaks, t1, eps).map(Stats::Recovery),
    };
    match r {
        Ok(s) => Ok(Some(s)),
        Err(Error::DegenerateFit(_) | Error::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn tail_cvs(
    cvs: &CriticalValues,
    date: DateType,
    variant: Variant,
    breaks: &BreakDates,
    sample_size: usize,
    t1: usize,
) -> Result<TailCvs> {
    let lambda_e = breaks.te as f64 / sample_size as f64;
    match date {
        DateType::Emergence => cvs.emergence(variant, t1, breaks.tc, sample_size),
        DateType::Collapse => cvs.collapse(variant, lambda_e),
        DateType::Recovery => {
            let seg = breaks.recovery_segment(sample_size);
            cvs.recovery(variant, lambda_e, seg.relative(t1))
        }
    }
}

/// Builds confidence sets for several variants of one date, computing the
/// statistics once per hypothesized date.
///
/// `breaks` are the working dates that fix the segment and the plug-in
/// fractions: the true dates, or estimates of them.
pub fn build_sets_from_prefix(
    p: &PrefixSums,
    fit: &RegimeFit,
    breaks: &BreakDates,
    date: DateType,
    variants: &[Variant],
    cvs: &CriticalValues,
    eps: f64,
) -> Result<Vec<ConfidenceSet>> {
    let n = p.sample_size();
    breaks.validate(n)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Parameter(format!("trimming must lie in (0, 0.5), got {eps}")));
    }
    if date == DateType::Collapse && variants.contains(&Variant::Le) {
        return Err(Error::Parameter("the LE combination is not defined for the collapse date".into()));
    }
    let segment = date.segment(breaks, n);
    let (lo, hi) = permissible(date, segment, eps)?;

    let per_date: Vec<Vec<DateRecord>> = (lo..=hi)
        .into_par_iter()
        .map(|t1| -> Result<Vec<DateRecord>> {
            let stats = stats_at(p, fit, breaks, date, t1, eps)?;
            variants
                .iter()
                .map(|&v| {
                    let (s12, s21) = match &stats {
                        Some(s) => s.pick(v)?,
                        None => (None, None),
                    };
                    let cv = tail_cvs(cvs, date, v, breaks, n, t1)?;
                    let (reject12, reject21) = if upper12(date) {
                        (s12.is_some_and(|s| s > cv.cv12), s21.is_some_and(|s| s < cv.cv21))
                    } else {
                        (s12.is_some_and(|s| s < cv.cv12), s21.is_some_and(|s| s > cv.cv21))
                    };
                    Ok(DateRecord {
                        date: t1,
                        stat12: s12,
                        stat21: s21,
                        cv12: cv.cv12,
                        cv21: cv.cv21,
                        reject12,
                        reject21,
                        degenerate: s12.is_none() || s21.is_none(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(variants
        .iter()
        .enumerate()
        .map(|(i, &variant)| ConfidenceSet {
            date_type: date,
            variant,
            delta: cvs.delta(),
            eps,
            segment,
            permissible: (lo, hi),
            records: per_date.iter().map(|recs| recs[i]).collect(),
        })
        .collect())
}

/// Builds the confidence sets of `variants` for `date`.
pub fn build_sets(
    series: &Series,
    fit: &RegimeFit,
    breaks: &BreakDates,
    date: DateType,
    variants: &[Variant],
    cvs: &CriticalValues,
    eps: f64,
) -> Result<Vec<ConfidenceSet>> {
    build_sets_from_prefix(&PrefixSums::new(series), fit, breaks, date, variants, cvs, eps)
}

/// Builds one confidence set.
pub fn build_set(
    series: &Series,
    fit: &RegimeFit,
    breaks: &BreakDates,
    date: DateType,
    variant: Variant,
    cvs: &CriticalValues,
    eps: f64,
) -> Result<ConfidenceSet> {
    Ok(build_sets(series, fit, breaks, date, &[variant], cvs, eps)?.remove(0))
}

/// Coverage indicators and relative lengths of one set against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub contains: bool,
    pub contains12: bool,
    pub contains21: bool,
    /// Whether the true date lies inside the working segment.
    pub truth_in_segment: bool,
    pub length: f64,
    pub length12_left: f64,
    pub length12_right: f64,
    pub length21_left: f64,
    pub length21_right: f64,
}

/// Compares `set` with the true date of its type. Lengths are fractions of
/// the segment length; the true date counts on both the left and the right.
pub fn set_metrics(set: &ConfidenceSet, truth: &BreakDates) -> SetMetrics {
    let t = set.date_type.truth(truth);
    let len = set.segment.len() as f64;
    let frac = |k: usize| k as f64 / len;
    let mut m = SetMetrics {
        contains: false,
        contains12: false,
        contains21: false,
        truth_in_segment: set.segment.contains(t),
        length: 0.0,
        length12_left: 0.0,
        length12_right: 0.0,
        length21_left: 0.0,
        length21_right: 0.0,
    };
    let (mut n, mut l12, mut r12, mut l21, mut r21) = (0, 0, 0, 0, 0);
    for r in &set.records {
        if r.retained() {
            n += 1;
        }
        if !r.reject12 {
            l12 += (r.date <= t) as usize;
            r12 += (r.date >= t) as usize;
        }
        if !r.reject21 {
            l21 += (r.date <= t) as usize;
            r21 += (r.date >= t) as usize;
        }
        if r.date == t {
            m.contains = r.retained();
            m.contains12 = !r.reject12;
            m.contains21 = !r.reject21;
        }
    }
    m.length = frac(n);
    m.length12_left = frac(l12);
    m.length12_right = frac(r12);
    m.length21_left = frac(l21);
    m.length21_right = frac(r21);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, BubbleDgpSpec, GaussianInnovations};

    fn setup(a: f64, seed: u64) -> (Series, BreakDates, RegimeFit) {
        let spec = BubbleDgpSpec::case(1, a);
        let s = simulate(&spec, &mut GaussianInnovations::seeded(seed, spec.sigma)).unwrap();
        let b = spec.break_dates().unwrap();
        let fit = crate::estimation::fit_regimes(&s, &b).unwrap();
        (s, b, fit)
    }

    fn record(date: usize, reject12: bool, reject21: bool) -> DateRecord {
        DateRecord { date, stat12: None, stat21: None, cv12: 0.0, cv21: 0.0, reject12, reject21, degenerate: false }
    }

    fn synthetic(records: Vec<DateRecord>) -> ConfidenceSet {
        let lo = records.first().map_or(11, |r| r.date);
        let hi = records.last().map_or(10, |r| r.date);
        ConfidenceSet {
            date_type: DateType::Emergence,
            variant: Variant::Le,
            delta: 0.1,
            eps: 0.1,
            segment: Segment { start: 0, end: 100 },
            permissible: (lo, hi),
            records,
        }
    }

    #[test]
    fn singleton_set_metrics() {
        let truth = BreakDates { te: 60, tc: 100, tr: 140 };
        let recs = (11..=90).map(|d| record(d, d != 60, false)).collect();
        let m = set_metrics(&synthetic(recs), &truth);
        assert!(m.contains && m.contains12 && m.contains21);
        assert_eq!(m.length, 0.01);
        assert_eq!(m.length12_left, 0.01);
        assert_eq!(m.length12_right, 0.01);
        assert_eq!(m.length21_left, 0.50);
        assert_eq!(m.length21_right, 0.31);
    }

    #[test]
    fn empty_set_metrics() {
        let truth = BreakDates { te: 60, tc: 100, tr: 140 };
        let recs = (11..=90).map(|d| record(d, true, true)).collect();
        let m = set_metrics(&synthetic(recs), &truth);
        assert!(!m.contains && !m.contains12 && !m.contains21);
        assert_eq!(m.length, 0.0);
        assert_eq!(m.length12_left + m.length12_right + m.length21_left + m.length21_right, 0.0);
    }

    #[test]
    fn zero_level_keeps_the_permissible_range() {
        let (s, b, fit) = setup(4.0, 11);
        let cvs = CriticalValues::table1(0.0).unwrap();
        for date in DateType::ALL {
            for set in build_sets(&s, &fit, &b, date, date.variants(), &cvs, 0.1).unwrap() {
                let (lo, hi) = set.permissible;
                assert_eq!(set.retained(), (lo..=hi).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn collapse_has_no_le_variant() {
        let (s, b, fit) = setup(4.0, 12);
        let cvs = CriticalValues::table1(0.1).unwrap();
        let r = build_set(&s, &fit, &b, DateType::Collapse, Variant::Le, &cvs, 0.1);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn shared_and_single_builds_agree() {
        let (s, b, fit) = setup(6.0, 13);
        let cvs = CriticalValues::table1(0.1).unwrap();
        for date in DateType::ALL {
            let all = build_sets(&s, &fit, &b, date, date.variants(), &cvs, 0.1).unwrap();
            for set in all {
                let one = build_set(&s, &fit, &b, date, set.variant, &cvs, 0.1).unwrap();
                assert_eq!(one, set);
            }
        }
    }

    #[test]
    fn short_segment_is_rejected() {
        let (s, _, fit) = setup(6.0, 14);
        let b = BreakDates { te: 5, tc: 15, tr: 140 };
        let cvs = CriticalValues::table1(0.1).unwrap();
        let r = build_set(&s, &fit, &b, DateType::Emergence, Variant::Le, &cvs, 0.1);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn degenerate_dates_are_retained() {
        let (s, b, mut fit) = setup(4.0, 15);
        fit.phi_a_hat = 0.99;
        fit.rho_a_hat = -0.01;
        let cvs = CriticalValues::table1(0.1).unwrap();
        let set = build_set(&s, &fit, &b, DateType::Emergence, Variant::EmA, &cvs, 0.1).unwrap();
        assert!(set.records.iter().all(|r| r.degenerate && !r.reject12));
    }

    #[test]
    fn csv_and_json_shapes() {
        let (s, b, fit) = setup(6.0, 16);
        let cvs = CriticalValues::table1(0.1).unwrap();
        let set = build_set(&s, &fit, &b, DateType::Recovery, Variant::Le, &cvs, 0.1).unwrap();
        let csv = set.to_csv();
        assert_eq!(csv.lines().count(), 1 + (190 - 120 + 1));
        let js = set.summary_json();
        assert_eq!(js["label"], "LE^r");
        assert_eq!(js["retained_count"].as_u64().unwrap() as usize, set.retained().len());
    }

    #[test]
    fn runs_compress_consecutive_dates() {
        assert_eq!(runs(&[1, 2, 3, 7, 9, 10]), vec![(1, 3), (7, 7), (9, 10)]);
        assert!(runs(&[]).is_empty());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("LE".parse::<Variant>().unwrap(), Variant::Le);
        assert_eq!("em-a".parse::<Variant>().unwrap(), Variant::EmA);
        assert_eq!("lr_a".parse::<Variant>().unwrap(), Variant::LrA);
        assert!("xx".parse::<Variant>().is_err());
        assert_eq!("Recovery".parse::<DateType>().unwrap(), DateType::Recovery);
    }
}
