//! Arithmetic-average Asian call option, priced as an integral over the unit
//! cube.
//!
//! A point `x ∈ (0,1)^d` is mapped to standard normal increments
//! `z_l = Φ^{-1}(x_l)` and to a discretely monitored geometric Brownian
//! motion path at `u_j = j·T/d`, built sequentially:
//!
//! ```text
//! S(u_j) = S0 · exp((r - σ²/2)·u_j + σ · Σ_{l<=j} sqrt(u_l - u_{l-1}) · z_l)
//! payoff = e^{-rT} · max((1/d)·Σ_j S(u_j) - K, 0)
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generators;
use crate::sum::{chunked_sum, NeumaierSum};
use crate::{Error, PointSet, Result, Scalar};

/// Coordinates are clamped to `[ε, 1-ε]` before the inverse normal CDF,
/// with `ε` the larger of this value and the machine epsilon of the scalar.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsianOptionConfig<T = f64> {
    pub s0: T,
    pub strike: T,
    pub maturity: T,
    pub risk_free: T,
    pub sigma: T,
    pub n_times: usize,
    /// Reference price used for `abs_error`.
    pub reference_value: T,
}

impl<T: Scalar> Default for AsianOptionConfig<T> {
    fn default() -> Self {
        Self {
            s0: T::lit(50.0),
            strike: T::lit(45.0),
            maturity: T::one(),
            risk_free: T::lit(0.05),
            sigma: T::lit(0.3),
            n_times: 32,
            reference_value: T::lit(7.06574),
        }
    }
}

impl<T: Scalar> AsianOptionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.s0, self.strike, self.maturity, self.risk_free, self.sigma, self.reference_value]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("option parameters must be finite".into()));
        }
        if self.n_times == 0 || self.maturity <= T::zero() || self.sigma <= T::zero() || self.s0 <= T::zero() {
            return Err(Error::InvalidParameter(
                "need n_times >= 1, maturity > 0, sigma > 0 and s0 > 0".into(),
            ));
        }
        Ok(())
    }

    /// Observation times `u_j = j·T/d`, `j = 1..=d`.
    pub fn times(&self) -> Vec<T> {
        let d = T::from_count(self.n_times);
        (1..=self.n_times).map(|j| T::from_count(j) * self.maturity / d).collect()
    }

    /// Payoff of the path with all normal draws equal to zero.
    pub fn zero_draw_payoff(&self) -> T {
        let drift = self.risk_free - self.sigma * self.sigma * T::lit(0.5);
        let mean = self.times().iter().map(|&u| self.s0 * (drift * u).exp()).sum::<T>() / T::from_count(self.n_times);
        (-self.risk_free * self.maturity).exp() * (mean - self.strike).max(T::zero())
    }
}

fn poly<T: Scalar>(c: &[f64; 8], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + T::lit(ci))
}

#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Standard normal quantile by Wichura's rational approximation (AS 241),
/// relative error about 1e-16 in double precision.
pub fn inverse_normal_cdf<T: Scalar>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    let q = p - T::lit(0.5);
    if q.abs() <= T::lit(0.425) {
        let r = T::lit(0.180625) - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < T::zero() { p } else { T::one() - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= T::lit(5.0) {
        r -= T::lit(1.6);
        poly(&C, r) / poly(&D, r)
    } else {
        r -= T::lit(5.0);
        poly(&E, r) / poly(&F, r)
    };
    if q < T::zero() {
        -x
    } else {
        x
    }
}

/// Discounted payoff for one point of the unit cube.
pub fn asian_payoff<T: Scalar>(u: &[T], config: &AsianOptionConfig<T>) -> Result<T> {
    if u.len() != config.n_times {
        return Err(Error::DimensionMismatch { expected: config.n_times, got: u.len() });
    }
    let eps = T::lit(BOUNDARY_EPS).max(T::epsilon());
    let d = T::from_count(config.n_times);
    let dt = config.maturity / d;
    let sqrt_dt = dt.sqrt();
    let drift = config.risk_free - config.sigma * config.sigma * T::lit(0.5);
    let mut w = T::zero();
    let mut total = T::zero();
    for (j, &x) in u.iter().enumerate() {
        let z = inverse_normal_cdf(x.max(eps).min(T::one() - eps));
        w += sqrt_dt * z;
        let t = T::from_count(j + 1) * dt;
        total += config.s0 * (drift * t + config.sigma * w).exp();
    }
    let payoff = (-config.risk_free * config.maturity).exp() * (total / d - config.strike).max(T::zero());
    if !payoff.is_finite() {
        return Err(Error::Numerical(format!("payoff is {payoff}")));
    }
    Ok(payoff)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    pub estimate: f64,
    pub abs_error: f64,
}

/// Equal-weight quadrature of the payoff over `points`.
pub fn estimate_option<T: Scalar>(points: &PointSet<T>, config: &AsianOptionConfig<T>) -> Result<OptionEstimate> {
    config.validate()?;
    if points.dim() != config.n_times {
        return Err(Error::DimensionMismatch { expected: config.n_times, got: points.dim() });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let payoffs: Vec<T> =
        (0..points.n_points()).into_par_iter().map(|i| asian_payoff(points.point(i), config)).collect::<Result<_>>()?;
    let total = chunked_sum(payoffs.len(), |i| payoffs[i].as_f64());
    finish(points.n_points(), total, config)
}

fn finish<T: Scalar>(n: usize, total: f64, config: &AsianOptionConfig<T>) -> Result<OptionEstimate> {
    let estimate = total / n as f64;
    if !estimate.is_finite() {
        return Err(Error::Numerical(format!("estimate is {estimate}")));
    }
    Ok(OptionEstimate { n, estimate, abs_error: (estimate - config.reference_value.as_f64()).abs() })
}

/// [`estimate_option`] over the first `n` Sobol' points, generated in blocks
/// so that large `n` never needs the whole set in memory. The result equals
/// `estimate_option(&sobol(n, d, 0), config)` up to summation order.
pub fn estimate_option_sobol(n: usize, config: &AsianOptionConfig<f64>) -> Result<OptionEstimate> {
    const BLOCK: usize = 1 << 16;
    config.validate()?;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let mut total = NeumaierSum::new();
    let mut start = 0usize;
    while start < n {
        let len = BLOCK.min(n - start);
        let block = generators::sobol::<f64>(len, config.n_times, start as u64)?;
        let payoffs: Vec<f64> =
            (0..len).into_par_iter().map(|i| asian_payoff(block.point(i), config)).collect::<Result<_>>()?;
        total.add(chunked_sum(len, |i| payoffs[i]));
        start += len;
    }
    finish(n, total.value(), config)
}
