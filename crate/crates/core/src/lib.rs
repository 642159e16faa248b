//! Confidence sets for the emergence, collapse and recovery dates of an
//! explosive episode in a time series.
//!
//! The crate provides the four-regime autoregressive data-generating
//! process, step-by-step least squares break estimation, the LR-type and
//! Elliott–Müller-type break-location statistics for each date, their
//! critical values (closed forms, response surfaces and Brownian-functional
//! simulation), inversion of the tests into confidence sets, and a Monte
//! Carlo driver that measures coverage and length.
//!
//! ```
//! use bubbleci::{
//!     build_set, fit_regimes, simulate, BubbleDgpSpec, CriticalValues, DateType,
//!     GaussianInnovations, Variant,
//! };
//!
//! let spec = BubbleDgpSpec::case(1, 6.0);
//! let breaks = spec.break_dates().unwrap();
//! let series = simulate(&spec, &mut GaussianInnovations::seeded(7, spec.sigma)).unwrap();
//! let fit = fit_regimes(&series, &breaks).unwrap();
//! let cvs = CriticalValues::table1(0.10).unwrap();
//! let set = build_set(&series, &fit, &breaks, DateType::Emergence, Variant::Le, &cvs, 0.10).unwrap();
//! assert!(!set.retained().is_empty());
//! ```

pub mod collapse;
pub mod confidence;
pub mod critical_values;
pub mod emergence;
mod error;
pub mod estimation;
pub mod model;
pub mod montecarlo;
pub mod recovery;
mod scan;

pub use confidence::{
    build_set, build_sets, set_metrics, ConfidenceSet, DateRecord, DateType, SetMetrics, Variant,
};
pub use critical_values::{
    chi2_cv, chi2_quantile, eval_surface, fit_surface, simulate_cv, CriticalValues, CvShape,
    Functional, Provenance, ResponseSurface, SurfaceSet, TailCvs,
};
pub use error::{Error, Result};
pub use estimation::{estimate_breaks, fit_regimes, sadf, RegimeFit};
pub use model::{
    prefix_sums, simulate, BreakDates, BubbleDgpSpec, GaussianInnovations, InnovationSource,
    PrefixSums, Segment, Series,
};
pub use montecarlo::{emit_tables, parse_report_csv, run_scenario, Ends, McReport, McRow, McScenario, TableFormat};
