//! Critical values: chi-square closed forms, response surfaces, and Monte
//! Carlo quantiles of the Brownian functionals that arise as null limits.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::Variant;
use crate::error::{Error, Result};

/// Inverse of the standard normal CDF (Wichura's AS 241, about 1e-16
/// relative accuracy).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
            + 67265.770_927_008_7)
            * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5226.495_278_852_545_5 * r + 28729.085_735_721_943) * r
            + 39307.895_800_092_71)
            * r
            + 21213.794_301_586_597)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_888)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Quantile of the chi-square distribution with one degree of freedom:
/// the `q` with `P(Z^2 <= q) = level`.
pub fn chi2_quantile(level: f64) -> f64 {
    let z = normal_quantile(0.5 + level / 2.0);
    z * z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CvShape {
    /// `sign * lambda * q`, for statistics converging to `W(lambda)^2`.
    Quadratic,
    /// `sign * sqrt(lambda * q)`, for statistics converging to `|W(lambda)|`.
    Absolute,
}

/// Closed-form critical value from the chi-square(1) quantile at `level`.
pub fn chi2_cv(level: f64, lambda: f64, shape: CvShape, sign: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parameter(format!("level must lie in (0, 1), got {level}")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("fraction must lie in [0, 1], got {lambda}")));
    }
    let q = chi2_quantile(level);
    let sign = sign.signum();
    Ok(match shape {
        CvShape::Quadratic => sign * lambda * q,
        CvShape::Absolute => sign * (lambda * q).sqrt(),
    })
}

/// Where a critical value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Table1,
    Simulated,
    /// `delta = 0`: no test can reject.
    Trivial,
}

/// `c0 + c_{-1}/l + c1 l + c2 l^2 + c3 l^3`, optionally plus a second set of
/// coefficients switched on for `l > 0.7`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSurface {
    /// `[a0, a_{-1}, a1, a2, a3]`
    pub coefficients: [f64; 5],
    /// `[b0, b_{-1}, b1, b2, b3]`, active when the fraction exceeds 0.7.
    pub upper_branch: Option<[f64; 5]>,
}

/// Fractions on which the surfaces were fitted.
pub const SURFACE_DOMAIN: (f64, f64) = (0.10, 0.90);
const BRANCH_POINT: f64 = 0.7;

fn basis(lambda: f64) -> [f64; 5] {
    [1.0, 1.0 / lambda, lambda, lambda * lambda, lambda * lambda * lambda]
}

fn dot5(c: &[f64; 5], x: &[f64; 5]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl ResponseSurface {
    pub const fn new(coefficients: [f64; 5]) -> Self {
        Self { coefficients, upper_branch: None }
    }

    pub const fn two_branch(coefficients: [f64; 5], upper: [f64; 5]) -> Self {
        Self { coefficients, upper_branch: Some(upper) }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        let (lo, hi) = SURFACE_DOMAIN;
        if !(lambda >= lo - 1e-9 && lambda <= hi + 1e-9) {
            return Err(Error::Range(format!(
                "response surfaces are fitted on [{lo}, {hi}]; got {lambda}"
            )));
        }
        let x = basis(lambda);
        let mut v = dot5(&self.coefficients, &x);
        if let Some(b) = &self.upper_branch {
            if lambda > BRANCH_POINT {
                v += dot5(b, &x);
            }
        }
        Ok(v)
    }
}

/// Evaluates `surface` at `lambda`; no extrapolation outside the fitted range.
pub fn eval_surface(surface: &ResponseSurface, lambda: f64) -> Result<f64> {
    surface.eval(lambda)
}

/// Published response surfaces for the 0.95 (emergence) and 0.05
/// (recovery) quantiles with 10% trimming.
pub mod table1 {
    use super::ResponseSurface;

    pub const LR_A21_E: ResponseSurface =
        ResponseSurface::new([-9.99e-4, 5.13e-5, -1.09e-3, 4.40e-4, -2.16e-4]);
    pub const EM_A21_E: ResponseSurface =
        ResponseSurface::new([-0.127, -4.75e-4, 1.34, -0.185, 0.0956]);
    pub const EM_B21_E: ResponseSurface =
        ResponseSurface::new([1.59, -0.0368, 0.706, -0.525, 0.194]);
    pub const EM_A12_R: ResponseSurface =
        ResponseSurface::new([-1.47, 5.02e-5, 1.57, -0.0124, 0.0779]);
    pub const EM_B12_R: ResponseSurface = ResponseSurface::two_branch(
        [-2.81, -7.44e-5, 0.258, -0.382, 0.745],
        [-2710.0, 530.0, 5192.0, -4420.0, 1411.0],
    );
}

/// Brownian functionals with nonstandard null distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    /// `-int_{l-eps}^{l} W^2`
    Lr21e,
    /// `int_0^{l-eps} ADF(s, l) ds`
    Ema21e,
    /// `sup_{0 <= s <= l-eps} ADF(s, l)`
    Emb21e,
    /// `int_{l+eps}^1 ADF^r(l, s) ds`
    Ema12r,
    /// `inf_{l+eps <= s <= 1} ADF^r(l, s)`
    Emb12r,
}

impl Functional {
    pub const ALL: [Functional; 5] = [
        Functional::Lr21e,
        Functional::Ema21e,
        Functional::Emb21e,
        Functional::Ema12r,
        Functional::Emb12r,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Lr21e => "lr21e",
            Functional::Ema21e => "ema21e",
            Functional::Emb21e => "emb21e",
            Functional::Ema12r => "ema12r",
            Functional::Emb12r => "emb12r",
        }
    }

    /// Emergence functionals reject in the upper tail, recovery ones in the lower.
    pub fn upper_tail(&self) -> bool {
        matches!(self, Functional::Lr21e | Functional::Ema21e | Functional::Emb21e)
    }

    fn is_emergence(&self) -> bool {
        self.upper_tail()
    }

    /// Quantile level matching a two-sided test of size `delta`.
    pub fn quantile_for(&self, delta: f64) -> f64 {
        if self.upper_tail() {
            1.0 - delta / 2.0
        } else {
            delta / 2.0
        }
    }
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown functional {s:?}")))
    }
}

/// One discretized Brownian path with left-Riemann running integrals.
struct BrownianPath {
    w: Vec<f64>,
    /// `int_0^{k/n} W^2`
    int_w2: Vec<f64>,
    dt: f64,
}

impl BrownianPath {
    fn draw(steps: usize, rng: &mut ChaCha8Rng) -> Self {
        let dt = 1.0 / steps as f64;
        let scale = dt.sqrt();
        let mut w = Vec::with_capacity(steps + 1);
        let mut int_w2 = Vec::with_capacity(steps + 1);
        w.push(0.0);
        int_w2.push(0.0);
        for k in 1..=steps {
            let z: f64 = StandardNormal.sample(rng);
            let prev = w[k - 1];
            w.push(prev + scale * z);
            int_w2.push(int_w2[k - 1] + prev * prev * dt);
        }
        Self { w, int_w2, dt }
    }

    /// `ADF(j/n, k/n)` for `j < k`.
    fn adf(&self, j: usize, k: usize) -> f64 {
        let num = 0.5 * (self.w[k] * self.w[k] - self.w[j] * self.w[j] - (k - j) as f64 * self.dt);
        num / (self.int_w2[k] - self.int_w2[j]).sqrt()
    }

    fn evaluate(&self, functional: Functional, k1: usize, k0: usize) -> f64 {
        let n = self.w.len() - 1;
        match functional {
            Functional::Lr21e => -(self.int_w2[k1] - self.int_w2[k0]),
            Functional::Ema21e => (1..=k0).map(|j| self.adf(j, k1)).sum::<f64>() * self.dt,
            // at lambda = eps the sup runs over s = 0 alone
            Functional::Emb21e => (k0.min(1)..=k0).map(|j| self.adf(j, k1)).fold(f64::NEG_INFINITY, f64::max),
            Functional::Ema12r | Functional::Emb12r => {
                let c = self.w[k1];
                let mut acc = 0.0;
                let mut sum = 0.0;
                let mut min = f64::INFINITY;
                for j in k1 + 1..=n {
                    let d = self.w[j - 1] - c;
                    acc += d * d * self.dt;
                    if j < k0 {
                        continue;
                    }
                    let e = self.w[j] - c;
                    let v = 0.5 * (e * e - (j - k1) as f64 * self.dt) / acc.sqrt();
                    sum += v;
                    min = min.min(v);
                }
                if functional == Functional::Ema12r {
                    sum * self.dt
                } else {
                    min
                }
            }
        }
    }
}

fn grid_indices(functional: Functional, lambda: f64, eps: f64, steps: usize) -> Result<(usize, usize)> {
    let bad = || {
        Err(Error::Parameter(format!(
            "fraction {lambda} with trimming {eps} is not admissible for {}",
            functional.name()
        )))
    };
    if !(lambda > 0.0 && lambda < 1.0 && eps > 0.0 && eps < 1.0) {
        return bad();
    }
    let n = steps as f64;
    let k1 = (lambda * n).round() as usize;
    if functional.is_emergence() {
        if lambda - eps < -1e-12 {
            return bad();
        }
        let k0 = ((lambda - eps).max(0.0) * n).round() as usize;
        if k1 == 0 || k0 >= k1 {
            return bad();
        }
        Ok((k1, k0))
    } else {
        if lambda + eps > 1.0 + 1e-12 {
            return bad();
        }
        let k0 = (((lambda + eps).min(1.0)) * n).round() as usize;
        if k0 <= k1 {
            return bad();
        }
        Ok((k1, k0))
    }
}

/// Sorted Monte Carlo draws of `functional` at every fraction in `lambdas`.
///
/// Each replication draws one path of `steps` scaled standard normal
/// increments from ChaCha8 stream `rep` of `seed`, so the result does not
/// depend on how replications are scheduled across threads.
pub fn simulate_functional(
    functional: Functional,
    lambdas: &[f64],
    eps: f64,
    reps: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if reps < 1000 {
        return Err(Error::Parameter(format!("at least 1000 replications required, got {reps}")));
    }
    if steps < 100 {
        return Err(Error::Parameter(format!("at least 100 steps required, got {steps}")));
    }
    let idx: Vec<(usize, usize)> = lambdas
        .iter()
        .map(|&l| grid_indices(functional, l, eps, steps))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep);
            let path = BrownianPath::draw(steps, &mut rng);
            idx.iter().map(|&(k1, k0)| path.evaluate(functional, k1, k0)).collect()
        })
        .collect();
    let mut out: Vec<Vec<f64>> = (0..lambdas.len())
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect();
    for col in &mut out {
        col.sort_by(f64::total_cmp);
    }
    Ok(out)
}

/// Monte Carlo `quantile` of `functional` at fraction `lambda1_star`.
pub fn simulate_cv(
    functional: Functional,
    lambda1_star: f64,
    eps: f64,
    reps: usize,
    steps: usize,
    quantile: f64,
    seed: u64,
) -> Result<f64> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::Parameter(format!("quantile must lie in (0, 1), got {quantile}")));
    }
    let draws = simulate_functional(functional, &[lambda1_star], eps, reps, steps, seed)?;
    Ok(empirical_quantile(&draws[0], quantile))
}

/// Linear-interpolation quantile of sorted data.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// The default grid `0.10, 0.11, ..., 0.90`.
pub fn default_grid() -> Vec<f64> {
    (10..=90).map(|i| i as f64 / 100.0).collect()
}

/// A fitted surface with its residual summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFit {
    pub surface: ResponseSurface,
    pub rmse: f64,
    pub max_abs_residual: f64,
}

/// Least-squares fit of the reciprocal-plus-cubic surface to `(fraction, cv)`
/// pairs, optionally with the second branch above 0.7.
pub fn fit_surface(grid: &[(f64, f64)], two_branch: bool) -> Result<SurfaceFit> {
    fit_polynomial_surface(grid, 3, two_branch)
}

/// As [`fit_surface`], with the polynomial degree spelled out. Only the
/// cubic form is supported.
pub fn fit_polynomial_surface(grid: &[(f64, f64)], degree: usize, two_branch: bool) -> Result<SurfaceFit> {
    if degree != 3 {
        return Err(Error::Fit(format!(
            "only cubic-plus-reciprocal surfaces are supported, got degree {degree}"
        )));
    }
    if grid.len() < 10 {
        return Err(Error::Fit(format!("need at least 10 grid points, got {}", grid.len())));
    }
    if grid.iter().any(|&(l, v)| !(l > 0.0) || !v.is_finite()) {
        return Err(Error::Fit("grid points need positive fractions and finite values".into()));
    }
    let cols = if two_branch { 10 } else { 5 };
    let x = DMatrix::from_fn(grid.len(), cols, |i, j| {
        let (l, _) = grid[i];
        let b = basis(l);
        if j < 5 {
            b[j]
        } else if l > BRANCH_POINT {
            b[j - 5]
        } else {
            0.0
        }
    });
    let y = DVector::from_iterator(grid.len(), grid.iter().map(|&(_, v)| v));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * 1e-13) {
        return Err(Error::Fit(format!(
            "design matrix is rank deficient (singular values {smin:e} .. {smax:e})"
        )));
    }
    let beta = svd
        .solve(&y, smax * 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &y - &x * &beta;
    let rmse = (resid.norm_squared() / grid.len() as f64).sqrt();
    let max_abs_residual = resid.amax();
    let lower = [beta[0], beta[1], beta[2], beta[3], beta[4]];
    let surface = if two_branch {
        ResponseSurface::two_branch(lower, [beta[5], beta[6], beta[7], beta[8], beta[9]])
    } else {
        ResponseSurface::new(lower)
    };
    Ok(SurfaceFit { surface, rmse, max_abs_residual })
}

/// Surfaces for the five nonstandard functionals at one tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSet {
    pub lr21e: ResponseSurface,
    pub ema21e: ResponseSurface,
    pub emb21e: ResponseSurface,
    pub ema12r: ResponseSurface,
    pub emb12r: ResponseSurface,
    /// Tail probability `delta / 2` the surfaces were fitted for.
    pub tail: f64,
    pub provenance: Provenance,
}

impl SurfaceSet {
    /// The published coefficients, valid for `delta = 0.10`.
    pub fn table1() -> Self {
        Self {
            lr21e: table1::LR_A21_E,
            ema21e: table1::EM_A21_E,
            emb21e: table1::EM_B21_E,
            ema12r: table1::EM_A12_R,
            emb12r: table1::EM_B12_R,
            tail: 0.05,
            provenance: Provenance::Table1,
        }
    }

    pub fn get(&self, f: Functional) -> &ResponseSurface {
        match f {
            Functional::Lr21e => &self.lr21e,
            Functional::Ema21e => &self.ema21e,
            Functional::Emb21e => &self.emb21e,
            Functional::Ema12r => &self.ema12r,
            Functional::Emb12r => &self.emb12r,
        }
    }

    /// Simulates every functional on `grid` and fits fresh surfaces at the
    /// quantiles matching a two-sided test of size `delta`.
    pub fn simulate(delta: f64, grid: &[f64], eps: f64, reps: usize, steps: usize, seed: u64) -> Result<Self> {
        let fit = |f: Functional| -> Result<ResponseSurface> {
            let draws = simulate_functional(f, grid, eps, reps, steps, seed)?;
            let q = f.quantile_for(delta);
            let pts: Vec<(f64, f64)> = grid
                .iter()
                .zip(&draws)
                .map(|(&l, d)| (l, empirical_quantile(d, q)))
                .collect();
            Ok(fit_surface(&pts, f == Functional::Emb12r)?.surface)
        };
        Ok(Self {
            lr21e: fit(Functional::Lr21e)?,
            ema21e: fit(Functional::Ema21e)?,
            emb21e: fit(Functional::Emb21e)?,
            ema12r: fit(Functional::Ema12r)?,
            emb12r: fit(Functional::Emb12r)?,
            tail: delta / 2.0,
            provenance: Provenance::Simulated,
        })
    }
}

/// Critical values for one one-sided pair of tests at one hypothesized date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCvs {
    pub cv12: f64,
    pub cv21: f64,
    pub source12: Provenance,
    pub source21: Provenance,
}

/// Everything needed to turn statistics into decisions at level `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    delta: f64,
    surfaces: Option<SurfaceSet>,
}

/// Fraction rounded to the 0.01 grid and clamped to the surface domain.
pub fn snap_to_grid(lambda: f64) -> f64 {
    let (lo, hi) = SURFACE_DOMAIN;
    ((lambda * 100.0).round() / 100.0).clamp(lo, hi)
}

impl CriticalValues {
    /// Published surfaces; `delta` must be 0.10 (or 0, which never rejects).
    pub fn table1(delta: f64) -> Result<Self> {
        Self::with_surfaces(delta, SurfaceSet::table1())
    }

    pub fn with_surfaces(delta: f64, surfaces: SurfaceSet) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Parameter(format!("delta must lie in [0, 1), got {delta}")));
        }
        if delta > 0.0 && (surfaces.tail - delta / 2.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "surfaces are fitted for tail probability {}, but delta = {delta} needs {}",
                surfaces.tail,
                delta / 2.0
            )));
        }
        Ok(Self { delta, surfaces: Some(surfaces) })
    }

    /// Closed forms only, at any `delta`. Every lookup that needs a
    /// response surface fails with a parameter error.
    pub fn closed_form(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Parameter(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { delta, surfaces: None })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn surfaces(&self) -> Option<&SurfaceSet> {
        self.surfaces.as_ref()
    }

    fn trivial() -> TailCvs {
        TailCvs {
            cv12: f64::NAN,
            cv21: f64::NAN,
            source12: Provenance::Trivial,
            source21: Provenance::Trivial,
        }
    }

    fn closed(&self, lambda: f64, shape: CvShape, sign: f64) -> Result<f64> {
        chi2_cv(self.delta / 2.0, lambda, shape, sign)
    }

    fn surface(&self, f: Functional, lambda_star: f64) -> Result<f64> {
        let set = self.surfaces.as_ref().ok_or_else(|| {
            Error::Parameter(format!("no response surface loaded for {}", f.name()))
        })?;
        set.get(f).eval(snap_to_grid(lambda_star))
    }

    fn source(&self) -> Provenance {
        self.surfaces.as_ref().map_or(Provenance::ClosedForm, |s| s.provenance)
    }

    /// Emergence: left-tail `12` cvs at `lambda_1 = T_1/T`, right-tail `21`
    /// cvs from the surfaces at `lambda_1* = T_1/T_UB`.
    pub fn emergence(&self, variant: Variant, t1: usize, t_ub: usize, sample_size: usize) -> Result<TailCvs> {
        if self.delta == 0.0 {
            return Ok(Self::trivial());
        }
        let lambda1 = t1 as f64 / sample_size as f64;
        let star = t1 as f64 / t_ub as f64;
        let (cv12, f21) = match variant {
            Variant::LrA | Variant::Le => (self.closed(lambda1, CvShape::Quadratic, 1.0)?, Functional::Lr21e),
            Variant::EmA => (self.closed(lambda1, CvShape::Absolute, 1.0)?, Functional::Ema21e),
            Variant::EmB => (self.closed(lambda1, CvShape::Absolute, 1.0)?, Functional::Emb21e),
        };
        let f21 = if variant == Variant::Le { Functional::Ema21e } else { f21 };
        Ok(TailCvs {
            cv12,
            cv21: self.surface(f21, star)?,
            source12: Provenance::ClosedForm,
            source21: self.source(),
        })
    }

    /// Collapse: negative right-tail `12` cvs and positive left-tail `21`
    /// cvs, both closed forms in `lambda_e`.
    pub fn collapse(&self, variant: Variant, lambda_e: f64) -> Result<TailCvs> {
        if self.delta == 0.0 {
            return Ok(Self::trivial());
        }
        let shape = match variant {
            Variant::LrA => CvShape::Quadratic,
            Variant::EmA | Variant::EmB => CvShape::Absolute,
            Variant::Le => {
                return Err(Error::Parameter("the LE combination is not defined for the collapse date".into()))
            }
        };
        Ok(TailCvs {
            cv12: self.closed(lambda_e, shape, -1.0)?,
            cv21: self.closed(lambda_e, shape, 1.0)?,
            source12: Provenance::ClosedForm,
            source21: Provenance::ClosedForm,
        })
    }

    /// Recovery: left-tail `12` cvs (closed form for LR, surfaces at
    /// `lambda_1* = (T_1 - T_c)/T_CU` for EM) and negative right-tail `21`
    /// closed forms in `lambda_e`.
    pub fn recovery(&self, variant: Variant, lambda_e: f64, lambda1_star: f64) -> Result<TailCvs> {
        if self.delta == 0.0 {
            return Ok(Self::trivial());
        }
        let (cv12, source12) = match variant {
            Variant::LrA => (self.closed(lambda_e, CvShape::Quadratic, 1.0)?, Provenance::ClosedForm),
            Variant::EmA => (self.surface(Functional::Ema12r, lambda1_star)?, self.source()),
            Variant::EmB | Variant::Le => (self.surface(Functional::Emb12r, lambda1_star)?, self.source()),
        };
        let shape21 = match variant {
            Variant::LrA | Variant::Le => CvShape::Quadratic,
            Variant::EmA | Variant::EmB => CvShape::Absolute,
        };
        Ok(TailCvs {
            cv12,
            cv21: self.closed(lambda_e, shape21, -1.0)?,
            source12,
            source21: Provenance::ClosedForm,
        })
    }
}
