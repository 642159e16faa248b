//! Domain types, the four-regime simulator and the prefix-sum kernel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the unit root / explosive / collapse / unit root model.
///
/// The AR coefficients are `phi_a = 1 + a / T^alpha` on `(T_e, T_c]` and
/// `phi_b = 1 - b / T^beta` on `(T_c, T_r]`; the process is a driftless
/// random walk elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleDgpSpec {
    pub sample_size: usize,
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub lambda_e: f64,
    pub lambda_c: f64,
    pub lambda_r: f64,
    pub sigma: f64,
    pub y0: f64,
}

impl BubbleDgpSpec {
    /// Break fractions of the four simulation designs.
    pub const CASES: [(f64, f64, f64); 4] = [
        (0.3, 0.5, 0.7),
        (0.4, 0.6, 0.8),
        (0.5, 0.7, 0.9),
        (0.4, 0.6, 0.7),
    ];

    /// Simulation design `case` (1..=4) with `T = 200`, `sigma = 6.79`,
    /// `y0 = 100` and `phi_a = 1 + a/T`, `phi_b = 1 - a/T`.
    ///
    /// Panics if `case` is not in `1..=4`.
    pub fn case(case: usize, a: f64) -> Self {
        let (lambda_e, lambda_c, lambda_r) = Self::CASES[case - 1];
        Self {
            sample_size: 200,
            a,
            alpha: 1.0,
            b: a,
            beta: 1.0,
            lambda_e,
            lambda_c,
            lambda_r,
            sigma: 6.79,
            y0: 100.0,
        }
    }

    pub fn phi_a(&self) -> f64 {
        1.0 + self.a / (self.sample_size as f64).powf(self.alpha)
    }

    pub fn phi_b(&self) -> f64 {
        1.0 - self.b / (self.sample_size as f64).powf(self.beta)
    }

    /// Checks every domain and ordering constraint.
    ///
    /// Exponents are accepted on `(0, 1]` so the local-to-unity designs
    /// (`alpha = beta = 1`) can be simulated alongside mildly explosive ones.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.sample_size < 20 {
            return bad(format!("sample size {} < 20", self.sample_size));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad(format!("b must be positive, got {}", self.b));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(0.0 < self.lambda_e && self.lambda_e < self.lambda_c && self.lambda_c < self.lambda_r && self.lambda_r < 1.0) {
            return bad(format!(
                "break fractions must satisfy 0 < {} < {} < {} < 1",
                self.lambda_e, self.lambda_c, self.lambda_r
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !self.y0.is_finite() {
            return bad("y0 must be finite".into());
        }
        let phi_b = self.phi_b();
        if !(phi_b > 0.0 && phi_b < 1.0) {
            return bad(format!("phi_b = {phi_b} is outside (0, 1)"));
        }
        self.break_dates_unchecked().validate(self.sample_size)
    }

    fn break_dates_unchecked(&self) -> BreakDates {
        let n = self.sample_size as f64;
        BreakDates {
            te: (self.lambda_e * n).floor() as usize,
            tc: (self.lambda_c * n).floor() as usize,
            tr: (self.lambda_r * n).floor() as usize,
        }
    }

    /// Integer break dates `floor(lambda * T)`.
    pub fn break_dates(&self) -> Result<BreakDates> {
        self.validate()?;
        Ok(self.break_dates_unchecked())
    }
}

/// Emergence, collapse and recovery dates as observation indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BreakDates {
    pub te: usize,
    pub tc: usize,
    pub tr: usize,
}

impl BreakDates {
    pub fn new(te: usize, tc: usize, tr: usize, sample_size: usize) -> Result<Self> {
        let b = Self { te, tc, tr };
        b.validate(sample_size)?;
        Ok(b)
    }

    pub fn validate(&self, sample_size: usize) -> Result<()> {
        if 1 <= self.te && self.te < self.tc && self.tc < self.tr && self.tr < sample_size {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "break dates ({}, {}, {}) violate 1 <= Te < Tc < Tr < {}",
                self.te, self.tc, self.tr, sample_size
            )))
        }
    }

    /// `[1, T_c]`, of length `T_UB = T_c`.
    pub fn emergence_segment(&self) -> Segment {
        Segment { start: 0, end: self.tc }
    }

    /// `[T_e + 1, T_r]`, of length `T_BC = T_r - T_e`.
    pub fn collapse_segment(&self) -> Segment {
        Segment { start: self.te, end: self.tr }
    }

    /// `[T_c + 1, T]`, of length `T_CU = T - T_c`.
    pub fn recovery_segment(&self, sample_size: usize) -> Segment {
        Segment { start: self.tc, end: sample_size }
    }

    pub fn fractions(&self, sample_size: usize) -> (f64, f64, f64) {
        let n = sample_size as f64;
        (self.te as f64 / n, self.tc as f64 / n, self.tr as f64 / n)
    }
}

/// Observations `t = start + 1, ..., end` of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: usize) -> bool {
        t > self.start && t <= self.end
    }

    /// Trimming width `floor(len * eps)`.
    pub fn trim(&self, eps: f64) -> usize {
        (self.len() as f64 * eps).floor() as usize
    }

    /// Position of `t` relative to the segment, `(t - start) / len`.
    pub fn relative(&self, t: usize) -> f64 {
        (t as f64 - self.start as f64) / self.len() as f64
    }
}

/// Levels `y_0, y_1, ..., y_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    y: Vec<f64>,
}

impl Series {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::Parameter(format!(
                "a series needs at least 2 observations, got {}",
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite value at index {i}")));
        }
        Ok(Self { y })
    }

    /// Sample size `T` (the number of observations after `y_0`).
    pub fn sample_size(&self) -> usize {
        self.y.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn into_values(self) -> Vec<f64> {
        self.y
    }

    /// Multiplies every level by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.y.iter().map(|v| v * c).collect())
    }
}

impl std::ops::Index<usize> for Series {
    type Output = f64;

    fn index(&self, t: usize) -> &f64 {
        &self.y[t]
    }
}

/// Source of innovations `eps_1, eps_2, ...`.
///
/// Any `FnMut() -> f64` is a source, which makes deterministic or
/// heteroskedastic martingale-difference sequences easy to plug in.
pub trait InnovationSource {
    fn next_innovation(&mut self) -> f64;
}

impl<F: FnMut() -> f64> InnovationSource for F {
    fn next_innovation(&mut self) -> f64 {
        self()
    }
}

/// I.i.d. `N(0, sigma^2)` innovations from a ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct GaussianInnovations {
    rng: ChaCha8Rng,
    sigma: f64,
}

impl GaussianInnovations {
    pub fn new(rng: ChaCha8Rng, sigma: f64) -> Self {
        Self { rng, sigma }
    }

    pub fn seeded(seed: u64, sigma: f64) -> Self {
        Self::new(ChaCha8Rng::seed_from_u64(seed), sigma)
    }

    /// Stream `stream` of the generator keyed by `seed`; replications that
    /// use distinct streams are independent of scheduling order.
    pub fn stream(seed: u64, stream: u64, sigma: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::new(rng, sigma)
    }
}

impl InnovationSource for GaussianInnovations {
    fn next_innovation(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sigma * z
    }
}

/// Simulates `y_0, ..., y_T` from the four-regime recursion with zero drift.
pub fn simulate<S: InnovationSource + ?Sized>(spec: &BubbleDgpSpec, noise: &mut S) -> Result<Series> {
    let breaks = spec.break_dates()?;
    let (phi_a, phi_b) = (spec.phi_a(), spec.phi_b());
    let n = spec.sample_size;
    let mut y = Vec::with_capacity(n + 1);
    y.push(spec.y0);
    let mut prev = spec.y0;
    for t in 1..=n {
        let coef = if t <= breaks.te {
            1.0
        } else if t <= breaks.tc {
            phi_a
        } else if t <= breaks.tr {
            phi_b
        } else {
            1.0
        };
        let next = coef * prev + noise.next_innovation();
        if !(next * next).is_finite() {
            return Err(Error::Overflow(format!(
                "y_{t}^2 is not representable (y_{t} = {next:e}); reduce a or T"
            )));
        }
        y.push(next);
        prev = next;
    }
    Series::new(y)
}

/// Cumulative sum stored as a Neumaier-compensated pair so that range sums
/// keep precision when the summands span many orders of magnitude.
#[derive(Debug, Clone, PartialEq)]
struct CompensatedCumsum {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl CompensatedCumsum {
    fn build(terms: impl Iterator<Item = f64>, len: usize) -> Self {
        let mut hi = Vec::with_capacity(len + 1);
        let mut lo = Vec::with_capacity(len + 1);
        hi.push(0.0);
        lo.push(0.0);
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for x in terms {
            let t = s + x;
            if s.abs() >= x.abs() {
                c += (s - t) + x;
            } else {
                c += (x - t) + s;
            }
            s = t;
            hi.push(s);
            lo.push(c);
        }
        Self { hi, lo }
    }

    #[inline]
    fn range(&self, from: usize, to: usize) -> f64 {
        (self.hi[to] - self.hi[from]) + (self.lo[to] - self.lo[from])
    }
}

/// Cumulative sums of `y_{t-1}^2`, `y_{t-1} dy_t` and `dy_t^2`.
///
/// Every range query covers `t = from + 1, ..., to`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSums {
    y: Vec<f64>,
    y2: CompensatedCumsum,
    ydy: CompensatedCumsum,
    dy2: CompensatedCumsum,
}

impl PrefixSums {
    pub fn new(series: &Series) -> Self {
        let y = series.values();
        let n = y.len() - 1;
        let lag2 = y[..n].iter().map(|v| v * v);
        let cross = y.windows(2).map(|w| w[0] * (w[1] - w[0]));
        let diff2 = y.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0]));
        Self {
            y: y.to_vec(),
            y2: CompensatedCumsum::build(lag2, n),
            ydy: CompensatedCumsum::build(cross, n),
            dy2: CompensatedCumsum::build(diff2, n),
        }
    }

    pub fn sample_size(&self) -> usize {
        self.y.len() - 1
    }

    #[inline]
    pub fn level(&self, t: usize) -> f64 {
        self.y[t]
    }

    /// `sum y_{t-1}^2` over `(from, to]`.
    #[inline]
    pub fn sum_y2(&self, from: usize, to: usize) -> f64 {
        self.y2.range(from, to)
    }

    /// `sum y_{t-1} dy_t` over `(from, to]`.
    #[inline]
    pub fn sum_ydy(&self, from: usize, to: usize) -> f64 {
        self.ydy.range(from, to)
    }

    /// `sum dy_t^2` over `(from, to]`.
    #[inline]
    pub fn sum_dy2(&self, from: usize, to: usize) -> f64 {
        self.dy2.range(from, to)
    }

    /// `sum y_t y_{t-1}` over `(from, to]`.
    #[inline]
    pub fn sum_cross(&self, from: usize, to: usize) -> f64 {
        self.sum_y2(from, to) + self.sum_ydy(from, to)
    }

    /// `sum y_t^2` over `(from, to]`.
    #[inline]
    pub fn sum_lead2(&self, from: usize, to: usize) -> f64 {
        self.sum_y2(from, to) + 2.0 * self.sum_ydy(from, to) + self.sum_dy2(from, to)
    }

    /// Residual sum of squares of a no-intercept AR(1) fitted by OLS on `(from, to]`.
    pub fn ar1_ssr(&self, from: usize, to: usize) -> f64 {
        let sxx = self.sum_y2(from, to);
        let sxy = self.sum_cross(from, to);
        let syy = self.sum_lead2(from, to);
        if sxx > 0.0 {
            (syy - sxy * sxy / sxx).max(0.0)
        } else {
            syy
        }
    }
}

/// Cumulative sums for `series`; see [`PrefixSums`].
pub fn prefix_sums(series: &Series) -> PrefixSums {
    PrefixSums::new(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_noise() -> impl FnMut() -> f64 {
        || 0.0
    }

    #[test]
    fn zero_noise_recursion() {
        let spec = BubbleDgpSpec::case(1, 2.0);
        let y = simulate(&spec, &mut zero_noise()).unwrap();
        let b = spec.break_dates().unwrap();
        assert_eq!((b.te, b.tc, b.tr), (60, 100, 140));
        for t in 0..=b.te {
            assert_eq!(y[t], 100.0);
        }
        let phi_a = spec.phi_a();
        for t in b.te + 1..=b.tc {
            let expected = phi_a.powi((t - b.te) as i32) * 100.0;
            assert!((y[t] - expected).abs() <= 1e-12 * expected);
        }
        let growth = y[b.tc] / y[b.te];
        assert!((growth - phi_a.powi((b.tc - b.te) as i32)).abs() < 1e-12);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let mut spec = BubbleDgpSpec::case(2, 4.0);
        spec.y0 = 0.0;
        let y = simulate(&spec, &mut zero_noise()).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn case_one_matches_independent_loop() {
        let spec = BubbleDgpSpec::case(1, 2.0);
        assert!((spec.phi_a() - 1.01).abs() < 1e-15);
        assert!((spec.phi_b() - 0.99).abs() < 1e-15);
        let y = simulate(&spec, &mut GaussianInnovations::seeded(11, spec.sigma)).unwrap();

        let mut eps = GaussianInnovations::seeded(11, spec.sigma);
        let (up, down) = (1.0 + 2.0 / 200.0, 1.0 - 2.0 / 200.0);
        let mut expected = vec![100.0];
        for t in 1..=200usize {
            let prev = expected[t - 1];
            let e = eps.next_innovation();
            let v = match t {
                1..=60 => prev + e,
                61..=100 => up * prev + e,
                101..=140 => down * prev + e,
                _ => prev + e,
            };
            expected.push(v);
        }
        assert_eq!(y.values(), &expected[..]);
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let spec = BubbleDgpSpec::case(3, 6.0);
        let a = simulate(&spec, &mut GaussianInnovations::stream(5, 9, spec.sigma)).unwrap();
        let b = simulate(&spec, &mut GaussianInnovations::stream(5, 9, spec.sigma)).unwrap();
        let c = simulate(&spec, &mut GaussianInnovations::stream(5, 10, spec.sigma)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = BubbleDgpSpec::case(1, 2.0);
        spec.lambda_c = 0.2;
        assert!(matches!(spec.validate(), Err(Error::Parameter(_))));
        let mut spec = BubbleDgpSpec::case(1, 2.0);
        spec.b = 400.0;
        assert!(spec.validate().is_err());
        let mut spec = BubbleDgpSpec::case(1, 2.0);
        spec.sample_size = 10;
        assert!(spec.validate().is_err());
        let mut spec = BubbleDgpSpec::case(1, 2.0);
        spec.alpha = 0.0;
        assert!(spec.validate().is_err());
        assert!(BreakDates::new(0, 5, 7, 10).is_err());
        assert!(BreakDates::new(3, 5, 10, 10).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let spec = BubbleDgpSpec {
            sample_size: 2000,
            a: 1500.0,
            alpha: 1.0,
            b: 1.0,
            beta: 1.0,
            lambda_e: 0.1,
            lambda_c: 0.9,
            lambda_r: 0.95,
            sigma: 1.0,
            y0: 100.0,
        };
        let r = simulate(&spec, &mut zero_noise());
        assert!(matches!(r, Err(Error::Overflow(_))));
    }

    #[test]
    fn hand_computed_range_sum() {
        let s = Series::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let p = prefix_sums(&s);
        assert_eq!(p.sum_ydy(1, 3), 3.0);
        assert_eq!(p.sum_y2(0, 3), 5.0);
        assert_eq!(p.sum_dy2(0, 3), 3.0);
        assert_eq!(p.sum_cross(0, 3), 8.0);
        assert_eq!(p.sum_lead2(0, 3), 14.0);
    }

    #[test]
    fn short_series_rejected() {
        assert!(Series::new(vec![1.0]).is_err());
        assert!(Series::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn segment_geometry() {
        let b = BreakDates::new(60, 100, 140, 200).unwrap();
        assert_eq!(b.emergence_segment().len(), 100);
        assert_eq!(b.collapse_segment().len(), 80);
        assert_eq!(b.recovery_segment(200).len(), 100);
        assert_eq!(b.collapse_segment().trim(0.1), 8);
        assert!((b.recovery_segment(200).relative(140) - 0.4).abs() < 1e-15);
        assert!(b.collapse_segment().contains(100));
        assert!(!b.collapse_segment().contains(60));
    }
}
