//! Lognormal severity and Poisson frequency primitives.
//!
//! Everything is parameterised by upper-tail probabilities: `p` small means
//! "far out in the tail". Quantiles in this form keep their precision for the
//! large losses that drive reinsurance layers.
// AS241 coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Parameters of a lognormal distribution in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    mu: f64,
    sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain("mu", mu, "must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain("sigma", sigma, "must be finite and positive"));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn sd(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        self.mean() * s2.exp_m1().sqrt()
    }

    /// Loss exceeded with probability `p`.
    pub fn comp_quantile(&self, p: f64) -> Result<f64> {
        lognormal_comp_quantile(self, p)
    }

    #[inline]
    pub(crate) fn comp_quantile_unchecked(&self, p: f64) -> f64 {
        (self.mu + self.sigma * upper_normal_quantile(p)).exp()
    }
}

/// Expected number of events per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(
                "lambda",
                lambda,
                "must be finite and non-negative",
            ));
        }
        Ok(Self(lambda))
    }

    pub fn lambda(self) -> f64 {
        self.0
    }
}

/// Fits a lognormal to a target mean and standard deviation by matching the
/// first two moments.
pub fn fit_lognormal(mean: f64, sd: f64) -> Result<LognormalParams> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::domain("mean", mean, "must be finite and positive"));
    }
    if !(sd.is_finite() && sd > 0.0) {
        return Err(Error::domain("sd", sd, "must be finite and positive"));
    }
    let cv = sd / mean;
    let sigma = (cv * cv).ln_1p().sqrt();
    let mu = mean.ln() - 0.5 * sigma * sigma;
    LognormalParams::new(mu, sigma)
}

/// `P(Z > z)` for a standard normal `Z`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, p, "must lie strictly between 0 and 1"))
    }
}

/// Returns `z` with `P(Z > z) = p` for a standard normal `Z`.
pub fn inv_normal_cdf_upper(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(upper_normal_quantile(p))
}

// Wichura's AS241 (PPND16) gives ~1e-16 relative accuracy on its own; the
// Halley step cleans up whatever the rational form leaves behind.
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

#[inline]
fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Lower-tail normal quantile, AS241.
fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
pub(crate) fn upper_normal_quantile(p: f64) -> f64 {
    // Solve Phi(x) = p for the lower quantile x, then z = -x.
    let x = as241(p);
    // Residual Phi(x) - p, taken from whichever tail is small so that it keeps
    // relative precision.
    let residual = if p <= 0.5 {
        normal_upper_tail(-x) - p
    } else {
        (1.0 - p) - normal_upper_tail(x)
    };
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let x = if density > 0.0 && residual.is_finite() {
        let u = residual / density;
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    };
    -x
}

/// Loss exceeded with probability `p` under the lognormal `params`.
pub fn lognormal_comp_quantile(params: &LognormalParams, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(params.comp_quantile_unchecked(p))
}

/// Multiplier of a symmetric two-sided normal confidence interval.
pub fn confidence_radius(level: f64) -> Result<f64> {
    check_probability("confidence_level", level)?;
    Ok(upper_normal_quantile(0.5 * (1.0 - level)))
}

/// Upper-tail quantile table of a Poisson distribution.
///
/// `quantile(p)` is the smallest `n` with `P(N <= n) >= 1 - p`. The pmf is
/// built by forward recurrence up to `lambda + 20 sqrt(lambda) + 50`; the
/// mass beyond that point is far below double precision for every rate this
/// crate is meant for.
#[derive(Debug, Clone)]
pub struct PoissonQuantiles {
    lambda: f64,
    /// `cdf[n] = P(N <= n)`
    cdf: Vec<f64>,
    /// `tail[n] = P(N > n)`, summed from the far end.
    tail: Vec<f64>,
}

impl PoissonQuantiles {
    pub fn new(frequency: Frequency) -> Self {
        let lambda = frequency.lambda();
        let cap = (lambda + 20.0 * lambda.sqrt() + 50.0).floor() as usize;
        let mut pmf = Vec::with_capacity(cap + 1);
        let p0 = (-lambda).exp();
        if p0 > 0.0 {
            let mut term = p0;
            pmf.push(term);
            for n in 1..=cap {
                term *= lambda / n as f64;
                pmf.push(term);
            }
        } else {
            // e^-lambda underflows; carry the recurrence in log space.
            let mut log_term = -lambda;
            pmf.push(0.0);
            let log_lambda = lambda.ln();
            for n in 1..=cap {
                log_term += log_lambda - (n as f64).ln();
                pmf.push(log_term.exp());
            }
        }

        let mut cdf = Vec::with_capacity(pmf.len());
        let mut running = 0.0;
        for &m in &pmf {
            running += m;
            cdf.push(running);
        }
        let mut tail = vec![0.0; pmf.len()];
        let mut above = 0.0;
        for n in (0..pmf.len()).rev() {
            tail[n] = above;
            above += pmf[n];
        }
        Self { lambda, cdf, tail }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest count the table can return.
    pub fn cap(&self) -> u32 {
        (self.cdf.len() - 1) as u32
    }

    pub fn quantile(&self, p: f64) -> Result<u32> {
        check_probability("p", p)?;
        let n = if p >= 0.5 {
            let target = 1.0 - p;
            self.cdf.partition_point(|&c| c < target)
        } else {
            self.tail.partition_point(|&t| t > p)
        };
        if n >= self.cdf.len() {
            return Err(Error::Internal(format!(
                "poisson quantile for lambda = {} and p = {p} exceeds the table cap {}",
                self.lambda,
                self.cap()
            )));
        }
        Ok(n as u32)
    }
}

/// Smallest `n` with `P(N <= n) >= 1 - p` for `N ~ Poisson(lambda)`.
///
/// Builds a fresh table on every call; use [`PoissonQuantiles`] for repeated
/// queries.
pub fn poisson_comp_quantile(lambda: f64, p: f64) -> Result<u32> {
    check_probability("p", p)?;
    PoissonQuantiles::new(Frequency::new(lambda)?).quantile(p)
}
