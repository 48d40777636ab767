//! Adaptive Gauss–Kronrod quadrature and the variance-gap integrals.
//!
//! For a substitution `p = t(q)` the weighted sample `Y` has
//!
//! ```text
//! Var(Y) - Var(X) = ∫₀¹ (F̄⁻¹(p))² (t'(t⁻¹(p)) - 1) dp
//! ```
//!
//! The integrand grows without bound as `p -> 0` for unbounded severities.
//! Integrals touching zero are therefore mapped with `p = b e^{-s}` and
//! `s = x / (1 - x)`, which turns the tail into a smooth integrand on `[0, 1)`
//! that decays like the severity's second moment.

use thiserror::Error;

use crate::distributions::LognormalParams;
use crate::error::Result;
use crate::sampling::PowerTransform;

/// Probabilities below this are treated as carrying no mass; for a lognormal
/// the neglected piece of `E(X²)` is `E(X²) Q(37 - 2σ)`.
const MIN_PROBABILITY: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "quadrature did not converge: estimate {estimate} with error {error_estimate} \
     exceeds tolerance {tolerance} after {subdivisions} subdivisions"
)]
pub struct QuadratureError {
    pub estimate: f64,
    pub error_estimate: f64,
    pub tolerance: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

// Kronrod nodes and weights to 30 digits, as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_value = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (f1 + f2);
        abs_value += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        abs_value: abs_value * half.abs(),
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7–K15 on `[a, b]`: the segment with the largest error
/// estimate is bisected until the summed error falls under
/// `max(abs_tol, rel_tol * ∫|f|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> std::result::Result<Integral, QuadratureError> {
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let abs_value: f64 = segments.iter().map(|s| s.abs_value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let tolerance = opts.abs_tol.max(opts.rel_tol * abs_value);
        if !value.is_finite() {
            return Err(QuadratureError {
                estimate: value,
                error_estimate: error,
                tolerance,
                subdivisions: segments.len(),
            });
        }
        if error <= tolerance {
            return Ok(Integral {
                value,
                error_estimate: error,
                subdivisions: segments.len(),
            });
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(QuadratureError {
                estimate: value,
                error_estimate: error,
                tolerance,
                subdivisions: segments.len(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(kronrod15(&f, s.a, mid));
        segments.push(kronrod15(&f, mid, s.b));
    }
}

/// `∫₀ᵇ f(p) dp` for integrands that are singular but integrable at zero.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    opts: &QuadratureOptions,
) -> std::result::Result<Integral, QuadratureError> {
    let mapped = |x: f64| {
        let one_minus = 1.0 - x;
        let s = x / one_minus;
        let p = b * (-s).exp();
        if p < MIN_PROBABILITY {
            return 0.0;
        }
        f(p) * p / (one_minus * one_minus)
    };
    integrate(mapped, 0.0, 1.0, opts)
}

/// A substitution `t` of the unit interval, seen through `t'(t⁻¹(p))`.
pub trait Substitution {
    fn weight_at_preimage(&self, p: f64) -> f64;
}

impl Substitution for PowerTransform {
    fn weight_at_preimage(&self, p: f64) -> f64 {
        PowerTransform::weight_at_preimage(self, p)
    }
}

/// `Var(Y) - Var(X)` for a single severity draw under an arbitrary
/// substitution. Negative values mean the weighted estimator wins.
pub fn variance_gap<S: Substitution>(
    severity: &LognormalParams,
    substitution: &S,
    opts: &QuadratureOptions,
) -> Result<Integral> {
    let integrand = |p: f64| {
        let x = severity.comp_quantile_unchecked(p);
        x * x * (substitution.weight_at_preimage(p) - 1.0)
    };
    let split = 0.5;
    let near_zero = integrate_from_zero(integrand, split, opts)?;
    let rest = integrate(integrand, split, 1.0, opts)?;
    Ok(Integral {
        // +0.0 normalises an all-zero integrand to positive zero
        value: near_zero.value + rest.value + 0.0,
        error_estimate: near_zero.error_estimate + rest.error_estimate,
        subdivisions: near_zero.subdivisions + rest.subdivisions,
    })
}

/// `Var(Y) - Var(X)` for the power transform with exponent `k`.
pub fn variance_gap_quadrature(severity: &LognormalParams, k: f64) -> Result<f64> {
    let t = PowerTransform::new(k)?;
    if t.is_identity() {
        return Ok(0.0);
    }
    Ok(variance_gap(severity, &t, &QuadratureOptions::default())?.value)
}

/// The two positive integrals whose difference decides whether `k = 2`
/// reduces variance:
///
/// ```text
/// lhs = ∫₀^¼ (F̄⁻¹(p))² (1 - 2√p) dp,   rhs = ∫_¼^1 (F̄⁻¹(p))² (2√p - 1) dp
/// ```
///
/// `lhs > rhs` exactly when the gap at `k = 2` is negative.
pub fn k2_inequality_check(severity: &LognormalParams) -> Result<(f64, f64)> {
    let opts = QuadratureOptions::default();
    let sq = |p: f64| {
        let x = severity.comp_quantile_unchecked(p);
        x * x
    };
    let lhs = integrate_from_zero(|p| sq(p) * (1.0 - 2.0 * p.sqrt()), 0.25, &opts)?;
    let rhs = integrate(|p| sq(p) * (2.0 * p.sqrt() - 1.0), 0.25, 1.0, &opts)?;
    Ok((lhs.value, rhs.value))
}
