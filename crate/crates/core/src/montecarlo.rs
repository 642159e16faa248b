//! Monte Carlo coverage and length of the confidence sets.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::{build_sets_from_prefix, set_metrics, DateType, SetMetrics, Variant};
use crate::critical_values::CriticalValues;
use crate::error::{Error, Result};
use crate::estimation::{estimate_breaks, fit_regimes};
use crate::model::{simulate, BreakDates, BubbleDgpSpec, GaussianInnovations, PrefixSums};

/// Which break dates delimit the segments and feed the plug-in estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ends {
    True,
    Estimated,
}

impl FromStr for Ends {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "true_ends" => Ok(Ends::True),
            "estimated" | "estimated_ends" => Ok(Ends::Estimated),
            _ => Err(Error::Parameter(format!("ends must be 'true' or 'estimated', got {s:?}"))),
        }
    }
}

impl Ends {
    pub fn name(&self) -> &'static str {
        match self {
            Ends::True => "true",
            Ends::Estimated => "estimated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McScenario {
    /// Preset the break fractions came from, if any.
    pub case: Option<usize>,
    pub lambda_e: f64,
    pub lambda_c: f64,
    pub lambda_r: f64,
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub ends: Ends,
    pub reps: usize,
    pub seed: u64,
    pub sample_size: usize,
    pub sigma: f64,
    pub y0: f64,
    pub delta: f64,
    pub eps: f64,
}

impl Default for McScenario {
    fn default() -> Self {
        Self::case(1, 2.0, Ends::True)
    }
}

impl McScenario {
    /// Preset design `case` (1..=4) with `b = a`, 2000 replications and
    /// `delta = eps = 0.10`.
    pub fn case(case: usize, a: f64, ends: Ends) -> Self {
        let spec = BubbleDgpSpec::case(case.clamp(1, 4), a);
        Self {
            case: Some(case),
            lambda_e: spec.lambda_e,
            lambda_c: spec.lambda_c,
            lambda_r: spec.lambda_r,
            a,
            alpha: spec.alpha,
            b: spec.b,
            beta: spec.beta,
            ends,
            reps: 2000,
            seed: 20240101,
            sample_size: spec.sample_size,
            sigma: spec.sigma,
            y0: spec.y0,
            delta: 0.10,
            eps: 0.10,
        }
    }

    pub fn spec(&self) -> BubbleDgpSpec {
        BubbleDgpSpec {
            sample_size: self.sample_size,
            a: self.a,
            alpha: self.alpha,
            b: self.b,
            beta: self.beta,
            lambda_e: self.lambda_e,
            lambda_c: self.lambda_c,
            lambda_r: self.lambda_r,
            sigma: self.sigma,
            y0: self.y0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.case {
            if !(1..=4).contains(&c) {
                return Err(Error::Parameter(format!("case must be 1..=4, got {c}")));
            }
        }
        if self.reps == 0 {
            return Err(Error::Parameter("at least one replication is required".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Parameter(format!("eps must lie in (0, 0.5), got {}", self.eps)));
        }
        self.spec().validate()?;
        self.spec().break_dates()?;
        CriticalValues::table1(self.delta)?;
        Ok(())
    }
}

/// Averages for one (date, variant) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub date_type: DateType,
    pub variant: Variant,
    pub coverage: f64,
    pub coverage12: f64,
    pub coverage21: f64,
    pub length: f64,
    pub length12_left: f64,
    pub length12_right: f64,
    pub length21_left: f64,
    pub length21_right: f64,
    /// Replications entering the length averages.
    pub length_reps: usize,
    /// Share of replications whose working segment misses the true date.
    pub outside_rate: f64,
    /// Replications in which no set could be built (treated as empty).
    pub failures: usize,
    /// Share of replications with at least one undefined statistic.
    pub degenerate_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub scenario: McScenario,
    pub rows: Vec<McRow>,
}

impl McReport {
    pub fn row(&self, date: DateType, variant: Variant) -> Option<&McRow> {
        self.rows.iter().find(|r| r.date_type == date && r.variant == variant)
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    metrics: SetMetrics,
    failed: bool,
    degenerate: bool,
}

fn empty_metrics(truth_in_segment: bool) -> SetMetrics {
    SetMetrics {
        contains: false,
        contains12: false,
        contains21: false,
        truth_in_segment,
        length: 0.0,
        length12_left: 0.0,
        length12_right: 0.0,
        length21_left: 0.0,
        length21_right: 0.0,
    }
}

fn pairs() -> Vec<(DateType, Variant)> {
    DateType::ALL
        .iter()
        .flat_map(|&d| d.variants().iter().map(move |&v| (d, v)))
        .collect()
}

fn replicate(sc: &McScenario, cvs: &CriticalValues, truth: &BreakDates, rep: u64) -> Result<Vec<Outcome>> {
    let spec = sc.spec();
    let series = simulate(&spec, &mut GaussianInnovations::stream(sc.seed, rep, sc.sigma))?;
    let n = series.sample_size();
    let working = match sc.ends {
        Ends::True => Ok(*truth),
        Ends::Estimated => estimate_breaks(&series, sc.eps),
    };
    let fit = working.as_ref().map_err(Clone::clone).and_then(|b| fit_regimes(&series, b));
    let p = PrefixSums::new(&series);
    let mut out = Vec::new();
    for date in DateType::ALL {
        let variants = date.variants();
        let inside = working
            .as_ref()
            .map(|b| date.segment(b, n).contains(date.truth(truth)))
            .unwrap_or(false);
        let sets = match (&working, &fit) {
            (Ok(b), Ok(f)) => build_sets_from_prefix(&p, f, b, date, variants, cvs, sc.eps).ok(),
            _ => None,
        };
        match sets {
            Some(sets) => out.extend(sets.iter().map(|s| Outcome {
                metrics: set_metrics(s, truth),
                failed: false,
                degenerate: s.degenerate_dates() > 0,
            })),
            None => out.extend(variants.iter().map(|_| Outcome {
                metrics: empty_metrics(inside),
                failed: true,
                degenerate: false,
            })),
        }
    }
    Ok(out)
}

/// Runs every replication of `scenario` on `threads` worker threads (0 for
/// the rayon default). Replication `r` draws from ChaCha8 stream `r` of the
/// scenario seed and the reduction runs in replication order, so the report
/// does not depend on `threads`.
///
/// Coverage is computed over all replications; lengths only over those whose
/// working segment contains the true date.
pub fn run_scenario(scenario: &McScenario, threads: usize) -> Result<McReport> {
    scenario.validate()?;
    let cvs = CriticalValues::table1(scenario.delta)?;
    let truth = scenario.spec().break_dates()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Vec<Outcome>> = pool.install(|| {
        (0..scenario.reps as u64)
            .into_par_iter()
            .map(|rep| replicate(scenario, &cvs, &truth, rep))
            .collect::<Result<_>>()
    })?;

    let reps = scenario.reps as f64;
    let rows = pairs()
        .into_iter()
        .enumerate()
        .map(|(i, (date_type, variant))| {
            let mut cov = [0usize; 3];
            let mut len = [0.0f64; 5];
            let (mut used, mut outside, mut failures, mut degenerate) = (0usize, 0usize, 0usize, 0usize);
            for rep in &outcomes {
                let o = rep[i];
                let m = o.metrics;
                cov[0] += m.contains as usize;
                cov[1] += m.contains12 as usize;
                cov[2] += m.contains21 as usize;
                failures += o.failed as usize;
                degenerate += o.degenerate as usize;
                if m.truth_in_segment {
                    used += 1;
                    len[0] += m.length;
                    len[1] += m.length12_left;
                    len[2] += m.length12_right;
                    len[3] += m.length21_left;
                    len[4] += m.length21_right;
                } else {
                    outside += 1;
                }
            }
            let avg = |s: f64| if used > 0 { s / used as f64 } else { f64::NAN };
            McRow {
                date_type,
                variant,
                coverage: cov[0] as f64 / reps,
                coverage12: cov[1] as f64 / reps,
                coverage21: cov[2] as f64 / reps,
                length: avg(len[0]),
                length12_left: avg(len[1]),
                length12_right: avg(len[2]),
                length21_left: avg(len[3]),
                length21_right: avg(len[4]),
                length_reps: used,
                outside_rate: outside as f64 / reps,
                failures,
                degenerate_rate: degenerate as f64 / reps,
            }
        })
        .collect();
    Ok(McReport { scenario: *scenario, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

const CSV_HEADER: &str = "date_type,variant,coverage,coverage12,coverage21,length,length12left,length12right,length21left,length21right,length_reps,outside_rate,failures,degenerate_rate";
const SCENARIO_PREFIX: &str = "# scenario: ";

/// Metric rows of the markdown tables, in display order.
pub const METRICS: [&str; 7] = [
    "coverage",
    "coverage12",
    "coverage21",
    "length12left",
    "length12right",
    "length21left",
    "length21right",
];

fn metric(r: &McRow, name: &str) -> f64 {
    match name {
        "coverage" => r.coverage,
        "coverage12" => r.coverage12,
        "coverage21" => r.coverage21,
        "length" => r.length,
        "length12left" => r.length12_left,
        "length12right" => r.length12_right,
        "length21left" => r.length21_left,
        "length21right" => r.length21_right,
        _ => unreachable!("unknown metric {name}"),
    }
}

/// Renders `report` as CSV (lossless, one row per date and variant, the
/// scenario as a JSON comment line) or as markdown tables with one column
/// per variant.
pub fn emit_tables(report: &McReport, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => to_csv(report),
        TableFormat::Markdown => to_markdown(report),
    }
}

fn to_csv(report: &McReport) -> String {
    let mut s = String::new();
    let scenario = serde_json::to_string(&report.scenario).expect("scenario serializes");
    let _ = writeln!(s, "{SCENARIO_PREFIX}{scenario}");
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.date_type.name(),
            r.variant.name(),
            r.coverage,
            r.coverage12,
            r.coverage21,
            r.length,
            r.length12_left,
            r.length12_right,
            r.length21_left,
            r.length21_right,
            r.length_reps,
            r.outside_rate,
            r.failures,
            r.degenerate_rate
        );
    }
    s
}

fn to_markdown(report: &McReport) -> String {
    let sc = &report.scenario;
    let mut s = String::new();
    let case = sc.case.map_or_else(|| "custom".to_string(), |c| format!("Case {c}"));
    let _ = writeln!(
        s,
        "# {case}, a = {}, {} ends, T = {}, {} replications, delta = {}\n",
        sc.a,
        sc.ends.name(),
        sc.sample_size,
        sc.reps,
        sc.delta
    );
    for date in DateType::ALL {
        let rows: Vec<&McRow> = report.rows.iter().filter(|r| r.date_type == date).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(s, "## {date}\n");
        let _ = write!(s, "| metric |");
        for r in &rows {
            let _ = write!(s, " {} |", r.variant.label(date));
        }
        s.push_str("\n|---|");
        for _ in &rows {
            s.push_str("---|");
        }
        s.push('\n');
        let _ = writeln!(s, "| length |{}", cells(&rows, "length"));
        for m in METRICS {
            let _ = writeln!(s, "| {m} |{}", cells(&rows, m));
        }
        let outside = rows[0].outside_rate;
        let _ = writeln!(
            s,
            "\ntruth outside working segment: {outside:.3}; replications in length averages: {}\n",
            rows[0].length_reps
        );
    }
    s
}

fn cells(rows: &[&McRow], name: &str) -> String {
    rows.iter().map(|r| format!(" {:.3} |", metric(r, name))).collect()
}

fn parse_field<T: FromStr>(line: usize, field: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parameter(format!("line {line}: cannot parse {field} from {v:?}")))
}

/// Parses the CSV produced by [`emit_tables`].
pub fn parse_report_csv(text: &str) -> Result<McReport> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::Parameter("empty report".into()))?;
    let json = first
        .strip_prefix(SCENARIO_PREFIX)
        .ok_or_else(|| Error::Parameter("line 1: missing scenario comment".into()))?;
    let scenario: McScenario =
        serde_json::from_str(json).map_err(|e| Error::Parameter(format!("line 1: {e}")))?;
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parameter("line 2: unexpected header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::Parameter(format!("line {ln}: expected 14 fields, got {}", f.len())));
        }
        rows.push(McRow {
            date_type: parse_field(ln, "date_type", f[0])?,
            variant: parse_field(ln, "variant", f[1])?,
            coverage: parse_field(ln, "coverage", f[2])?,
            coverage12: parse_field(ln, "coverage12", f[3])?,
            coverage21: parse_field(ln, "coverage21", f[4])?,
            length: parse_field(ln, "length", f[5])?,
            length12_left: parse_field(ln, "length12left", f[6])?,
            length12_right: parse_field(ln, "length12right", f[7])?,
            length21_left: parse_field(ln, "length21left", f[8])?,
            length21_right: parse_field(ln, "length21right", f[9])?,
            length_reps: parse_field(ln, "length_reps", f[10])?,
            outside_rate: parse_field(ln, "outside_rate", f[11])?,
            failures: parse_field(ln, "failures", f[12])?,
            degenerate_rate: parse_field(ln, "degenerate_rate", f[13])?,
        });
    }
    Ok(McReport { scenario, rows })
}
