use std::path::{Path, PathBuf};

use bubbleci::{Ends, Functional, Variant};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Flat key-value settings shared by every subcommand. Values come from the
/// defaults, then the TOML file, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub date_column: String,
    pub price_column: String,
    pub date_format: String,
    pub log_transform: bool,

    pub seed: u64,
    pub delta: f64,
    pub eps: f64,
    pub ends: Option<Ends>,
    pub out_dir: PathBuf,
    /// Worker threads; never changes results, so it stays out of headers.
    #[serde(skip_serializing)]
    pub threads: usize,
    /// Replications for detect, mc and tabulate.
    pub reps: Option<usize>,

    /// Minimal SADF window fraction; `0.01 + 1.8 / sqrt(T)` when unset.
    pub r0: Option<f64>,
    pub lags: usize,
    pub level: f64,

    pub emergence_variant: Variant,
    pub collapse_variant: Variant,
    pub recovery_variant: Variant,
    /// Break dates used when `ends = "true"`, in `date_format`.
    pub te: Option<String>,
    pub tc: Option<String>,
    pub tr: Option<String>,
    /// Response surfaces written by `tabulate`, for `delta` other than 0.10.
    pub surfaces: Option<PathBuf>,

    pub case: Option<usize>,
    pub a: f64,
    pub alpha: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub lambda_e: Option<f64>,
    pub lambda_c: Option<f64>,
    pub lambda_r: Option<f64>,
    pub sample_size: Option<usize>,
    pub sigma: Option<f64>,
    pub y0: Option<f64>,

    pub functionals: Vec<Functional>,
    pub steps: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            input: None,
            date_column: "date".into(),
            price_column: "price".into(),
            date_format: "%Y-%m-%d".into(),
            log_transform: true,
            seed: 20240101,
            delta: 0.10,
            eps: 0.10,
            ends: None,
            out_dir: PathBuf::from("."),
            threads: 0,
            reps: None,
            r0: None,
            lags: 0,
            level: 0.05,
            emergence_variant: Variant::Le,
            collapse_variant: Variant::EmA,
            recovery_variant: Variant::Le,
            te: None,
            tc: None,
            tr: None,
            surfaces: None,
            case: Some(1),
            a: 2.0,
            alpha: None,
            b: None,
            beta: None,
            lambda_e: None,
            lambda_c: None,
            lambda_r: None,
            sample_size: None,
            sigma: None,
            y0: None,
            functionals: Functional::ALL.to_vec(),
            steps: 1000,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }

    pub fn check(&self) -> Result<(), Failure> {
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Failure::config(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Failure::config(format!("eps must lie in (0, 0.5), got {}", self.eps)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Failure::config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path, Failure> {
        self.input
            .as_deref()
            .ok_or_else(|| Failure::config("an input file is required (--input or `input` key)"))
    }

    /// Resolved settings as one JSON line for artifact headers.
    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
