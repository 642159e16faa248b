use std::fmt::Write as _;

use bubbleci::critical_values::{default_grid, empirical_quantile, simulate_functional, SurfaceFit};
use bubbleci::estimation::sadf_critical_value;
use bubbleci::{
    build_set, emit_tables, estimate_breaks, fit_regimes, fit_surface, run_scenario, sadf,
    BreakDates, ConfidenceSet, CriticalValues, DateType, Ends, Functional, McScenario, Provenance,
    SurfaceSet, TableFormat,
};
use chrono::NaiveDate;
use serde_json::{json, Value};

use crate::config::Config;
use crate::ingest::{ingest, ColumnSpec, Ingested};
use crate::Failure;

/// Comment lines opening every text artifact.
fn header(command: &str, cfg: &Config) -> String {
    format!(
        "# bubbleci {} {command}\n# config: {}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.header_json()
    )
}

fn provenance(command: &str, cfg: &Config) -> Value {
    json!({
        "generator": format!("bubbleci {}", env!("CARGO_PKG_VERSION")),
        "command": command,
        "config": serde_json::to_value(cfg).expect("config serializes"),
    })
}

fn write(cfg: &Config, name: &str, contents: &str) -> Result<(), Failure> {
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn write_json(cfg: &Config, name: &str, mut value: Value, command: &str) -> Result<(), Failure> {
    value["provenance"] = provenance(command, cfg);
    write(cfg, name, &(serde_json::to_string_pretty(&value).expect("json serializes") + "\n"))
}

fn load(cfg: &Config) -> Result<Ingested, Failure> {
    ingest(
        cfg.input()?,
        &ColumnSpec {
            date_column: &cfg.date_column,
            price_column: &cfg.price_column,
            date_format: &cfg.date_format,
            log_transform: cfg.log_transform,
        },
    )
}

fn date_of(data: &Ingested, t: usize) -> String {
    data.date(t).map(|d| d.to_string()).unwrap_or_default()
}

pub fn detect(cfg: &Config) -> Result<(), Failure> {
    let data = load(cfg)?;
    let n = data.series.sample_size();
    let r0 = cfg.r0.unwrap_or(0.01 + 1.8 / (n as f64).sqrt());
    let reps = cfg.reps.unwrap_or(2000);
    let stat = sadf(&data.series, r0, cfg.lags)?;
    let cv = sadf_critical_value(n, r0, cfg.lags, reps, cfg.level, cfg.seed)?;
    let reject = stat > cv;
    println!(
        "SADF = {stat:.4}, {}% critical value = {cv:.4}: {}",
        cfg.level * 100.0,
        if reject { "reject no bubble" } else { "no evidence of a bubble" }
    );
    write_json(
        cfg,
        "detect.json",
        json!({
            "sadf": stat,
            "critical_value": cv,
            "level": cfg.level,
            "r0": r0,
            "lags": cfg.lags,
            "reps": reps,
            "reject": reject,
            "sample_size": n,
            "first_date": date_of(&data, 0),
            "last_date": date_of(&data, n),
        }),
        "detect",
    )
}

fn breaks_json(data: &Ingested, b: &BreakDates) -> Value {
    let n = data.series.sample_size();
    let (fe, fc, fr) = b.fractions(n);
    json!({
        "te": { "index": b.te, "date": date_of(data, b.te), "fraction": fe },
        "tc": { "index": b.tc, "date": date_of(data, b.tc), "fraction": fc },
        "tr": { "index": b.tr, "date": date_of(data, b.tr), "fraction": fr },
    })
}

pub fn estimate(cfg: &Config) -> Result<(), Failure> {
    let data = load(cfg)?;
    let b = estimate_breaks(&data.series, cfg.eps)?;
    println!("emergence {} (t = {})", date_of(&data, b.te), b.te);
    println!("collapse  {} (t = {})", date_of(&data, b.tc), b.tc);
    println!("recovery  {} (t = {})", date_of(&data, b.tr), b.tr);
    write_json(cfg, "estimate.json", json!({ "breaks": breaks_json(&data, &b) }), "estimate")
}

fn given_date(cfg: &Config, data: &Ingested, key: &str, value: &Option<String>) -> Result<usize, Failure> {
    let raw = value
        .as_deref()
        .ok_or_else(|| Failure::config(format!("ends = \"true\" needs the `{key}` date")))?;
    let date = NaiveDate::parse_from_str(raw, &cfg.date_format)
        .map_err(|e| Failure::config(format!("{key} = {raw:?} does not match {:?}: {e}", cfg.date_format)))?;
    data.index(date)
        .ok_or_else(|| Failure::data(format!("{key} = {date} is not an observation date")))
}

fn working_breaks(cfg: &Config, data: &Ingested) -> Result<BreakDates, Failure> {
    let n = data.series.sample_size();
    match cfg.ends.unwrap_or(Ends::Estimated) {
        Ends::Estimated => Ok(estimate_breaks(&data.series, cfg.eps)?),
        Ends::True => {
            let te = given_date(cfg, data, "te", &cfg.te)?;
            let tc = given_date(cfg, data, "tc", &cfg.tc)?;
            let tr = given_date(cfg, data, "tr", &cfg.tr)?;
            BreakDates::new(te, tc, tr, n).map_err(|e| Failure::data(e.to_string()))
        }
    }
}

fn critical_values(cfg: &Config) -> Result<CriticalValues, Failure> {
    match &cfg.surfaces {
        None => Ok(CriticalValues::table1(cfg.delta)?),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let set: SurfaceSet = serde_json::from_value(doc["surfaces"].clone()).map_err(|e| {
                Failure::config(format!("{}: no complete surface set: {e}", path.display()))
            })?;
            Ok(CriticalValues::with_surfaces(cfg.delta, set)?)
        }
    }
}

/// Retained dates as calendar ranges.
fn date_runs(set: &ConfidenceSet, data: &Ingested) -> Vec<(String, String)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for t in set.retained() {
        match runs.last_mut() {
            Some(last) if last.1 + 1 == t => last.1 = t,
            _ => runs.push((t, t)),
        }
    }
    runs.into_iter().map(|(a, b)| (date_of(data, a), date_of(data, b))).collect()
}

pub fn ci(cfg: &Config) -> Result<(), Failure> {
    let data = load(cfg)?;
    let breaks = working_breaks(cfg, &data)?;
    let fit = fit_regimes(&data.series, &breaks)?;
    let cvs = critical_values(cfg)?;
    let chosen = [
        (DateType::Emergence, cfg.emergence_variant),
        (DateType::Collapse, cfg.collapse_variant),
        (DateType::Recovery, cfg.recovery_variant),
    ];
    let mut sets = Vec::new();
    for (date, variant) in chosen {
        let set = build_set(&data.series, &fit, &breaks, date, variant, &cvs, cfg.eps)?;
        let stem = format!("ci_{}_{}", date.name(), variant.name());
        let point = date.truth(&breaks);
        write(cfg, &format!("{stem}.csv"), &(header("ci", cfg) + &set.to_csv()))?;
        let mut summary = set.summary_json();
        summary["retained_dates"] = json!(date_runs(&set, &data));
        summary["point_estimate"] = json!({ "index": point, "date": date_of(&data, point) });
        summary["contains_point_estimate"] = json!(set.contains(point));
        write_json(cfg, &format!("{stem}.json"), summary, "ci")?;

        let runs = date_runs(&set, &data);
        let shown: Vec<String> = runs
            .iter()
            .map(|(a, b)| if a == b { a.clone() } else { format!("{a}..{b}") })
            .collect();
        println!(
            "{} ({} of {} dates, working date {} {}): {}",
            set.label(),
            set.retained().len(),
            set.records.len(),
            date_of(&data, point),
            if set.contains(point) { "inside" } else { "outside" },
            if shown.is_empty() { "empty".to_string() } else { shown.join(", ") }
        );
        sets.push(set);
    }

    let mut plot = header("ci", cfg);
    plot.push_str("date,index,log_price,emergence,collapse,recovery\n");
    for (t, rec) in data.records.iter().enumerate() {
        let flag = |s: &ConfidenceSet| s.record(t).map_or(0, |r| r.retained() as u8);
        let _ = writeln!(
            plot,
            "{},{t},{},{},{},{}",
            rec.date,
            data.series[t],
            flag(&sets[0]),
            flag(&sets[1]),
            flag(&sets[2])
        );
    }
    write(cfg, "ci_plot.csv", &plot)?;
    write_json(cfg, "ci_breaks.json", json!({ "breaks": breaks_json(&data, &breaks), "fit": fit }), "ci")
}

fn scenario(cfg: &Config) -> Result<McScenario, Failure> {
    let mut sc = McScenario::case(cfg.case.unwrap_or(1), cfg.a, cfg.ends.unwrap_or(Ends::True));
    sc.case = cfg.case;
    if cfg.case.is_none() && (cfg.lambda_e.is_none() || cfg.lambda_c.is_none() || cfg.lambda_r.is_none()) {
        return Err(Failure::config("a custom design (no `case`) needs lambda_e, lambda_c and lambda_r"));
    }
    sc.b = cfg.b.unwrap_or(cfg.a);
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = cfg.$field { sc.$field = v; } )* };
    }
    take!(alpha, beta, lambda_e, lambda_c, lambda_r, sample_size, sigma, y0);
    sc.reps = cfg.reps.unwrap_or(2000);
    sc.seed = cfg.seed;
    sc.delta = cfg.delta;
    sc.eps = cfg.eps;
    sc.validate()?;
    Ok(sc)
}

pub fn mc(cfg: &Config) -> Result<(), Failure> {
    let sc = scenario(cfg)?;
    let report = run_scenario(&sc, cfg.threads)?;
    let md = emit_tables(&report, TableFormat::Markdown);
    print!("{md}");
    write(cfg, "mc_report.csv", &(header("mc", cfg) + &emit_tables(&report, TableFormat::Csv)))?;
    write(cfg, "mc_report.md", &(header("mc", cfg) + "\n" + &md))
}

pub fn tabulate(cfg: &Config) -> Result<(), Failure> {
    if cfg.delta == 0.0 {
        return Err(Failure::config("tabulate needs delta > 0"));
    }
    let reps = cfg.reps.unwrap_or(50_000);
    let grid = default_grid();
    let mut csv = header("tabulate", cfg);
    csv.push_str("lambda,cv,functional,reps,seed\n");
    let mut fits: Vec<(Functional, SurfaceFit)> = Vec::new();
    for &f in &cfg.functionals {
        let draws = simulate_functional(f, &grid, cfg.eps, reps, cfg.steps, cfg.seed)?;
        let q = f.quantile_for(cfg.delta);
        let points: Vec<(f64, f64)> =
            grid.iter().zip(&draws).map(|(&l, d)| (l, empirical_quantile(d, q))).collect();
        for &(l, cv) in &points {
            let _ = writeln!(csv, "{l:.2},{cv:e},{},{reps},{}", f.name(), cfg.seed);
        }
        let fit = fit_surface(&points, f == Functional::Emb12r)?;
        println!("{}: rmse {:.2e}, max residual {:.2e}", f.name(), fit.rmse, fit.max_abs_residual);
        fits.push((f, fit));
    }
    write(cfg, "tabulate_cv.csv", &csv)?;

    let get = |f: Functional| fits.iter().find(|(g, _)| *g == f).map(|(_, fit)| fit.surface);
    let surfaces = match (
        get(Functional::Lr21e),
        get(Functional::Ema21e),
        get(Functional::Emb21e),
        get(Functional::Ema12r),
        get(Functional::Emb12r),
    ) {
        (Some(lr21e), Some(ema21e), Some(emb21e), Some(ema12r), Some(emb12r)) => json!(SurfaceSet {
            lr21e,
            ema21e,
            emb21e,
            ema12r,
            emb12r,
            tail: cfg.delta / 2.0,
            provenance: Provenance::Simulated,
        }),
        _ => Value::Null,
    };
    let fits: serde_json::Map<String, Value> =
        fits.iter().map(|(f, fit)| (f.name().to_string(), json!(fit))).collect();
    write_json(cfg, "tabulate_surfaces.json", json!({ "fits": fits, "surfaces": surfaces }), "tabulate")
}
