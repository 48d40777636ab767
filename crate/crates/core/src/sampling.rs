//! Sample points, seeded streams and the power transform.
//!
//! # Reproducibility
//!
//! All randomness comes from ChaCha8 streams. A run seed is expanded into
//! independent child streams with [`child_seed`]; uniforms consume exactly one
//! 64-bit output each, so the `i`-th uniform of a stream can be reached
//! directly by seeking. Output is identical across runs and thread counts of
//! the same build; it is not promised to match other implementations.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::LognormalParams;
use crate::error::{Error, Result};

/// The substitution `t(q) = q^k` with `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTransform {
    k: f64,
}

impl PowerTransform {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::domain(
                "k",
                k,
                "transform exponent must be finite and >= 1",
            ));
        }
        Ok(Self { k })
    }

    pub const fn identity() -> Self {
        Self { k: 1.0 }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_identity(&self) -> bool {
        self.k == 1.0
    }

    /// `t(q) = q^k`
    #[inline]
    pub fn apply(&self, q: f64) -> f64 {
        if self.is_identity() {
            q
        } else {
            q.powf(self.k)
        }
    }

    /// `t'(q) = k q^(k-1)`
    #[inline]
    pub fn weight(&self, q: f64) -> f64 {
        if self.is_identity() {
            1.0
        } else {
            self.k * q.powf(self.k - 1.0)
        }
    }

    /// `t^-1(p) = p^(1/k)`
    pub fn inverse(&self, p: f64) -> f64 {
        p.powf(self.k.recip())
    }

    /// `t'(t^-1(p)) = k p^((k-1)/k)`
    pub fn weight_at_preimage(&self, p: f64) -> f64 {
        self.k * p.powf((self.k - 1.0) / self.k)
    }
}

impl Default for PowerTransform {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingScheme {
    /// Midpoint partition of the unit interval, randomly reordered.
    #[default]
    Riemann,
    /// Independent uniforms.
    Random,
}

impl SamplingScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplingScheme::Riemann => "riemann",
            SamplingScheme::Random => "random",
        }
    }
}

impl std::str::FromStr for SamplingScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "riemann" => Ok(SamplingScheme::Riemann),
            "random" => Ok(SamplingScheme::Random),
            other => Err(format!("expected `riemann` or `random`, got `{other}`")),
        }
    }
}

impl std::fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sampling scheme plus the seed that fixes every stochastic choice of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleMode {
    pub scheme: SamplingScheme,
    pub seed: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` of `seed`: `splitmix64(seed ^ splitmix64(index))`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maps 64 random bits to the open interval (0, 1) on a 2^-52 grid offset by
/// half a step, so neither endpoint is reachable.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform draws positioned anywhere in a stream.
pub(crate) struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    /// Stream for `seed`, positioned at draw `start`.
    pub(crate) fn at(seed: u64, start: u64) -> Self {
        let mut rng = stream_rng(seed);
        // each draw consumes two 32-bit words
        rng.set_word_pos(2 * start as u128);
        Self { rng }
    }

    #[inline]
    pub(crate) fn next(&mut self) -> f64 {
        open_unit(self.rng.next_u64())
    }
}

#[inline]
pub(crate) fn midpoint(i: u64, n: u64) -> f64 {
    (i as f64 + 0.5) / n as f64
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n", 0.0, "sample size must be at least 1"))
    } else {
        Ok(())
    }
}

/// Midpoints `(i - 1/2) / n` for `i = 1..=n`.
pub fn midpoint_partition(n: usize) -> Result<Vec<f64>> {
    check_count(n)?;
    Ok((0..n as u64).map(|i| midpoint(i, n as u64)).collect())
}

/// `n` uniforms on (0, 1) from the stream seeded by `seed`.
pub fn uniform_sample(n: usize, seed: u64) -> Result<Vec<f64>> {
    check_count(n)?;
    let mut stream = UniformStream::at(seed, 0);
    Ok((0..n).map(|_| stream.next()).collect())
}

fn check_open_unit(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("q", q, "must lie strictly between 0 and 1"))
    }
}

pub fn transform_weight(t: &PowerTransform, q: f64) -> Result<f64> {
    check_open_unit(q)?;
    Ok(t.weight(q))
}

/// Event loss `F̄⁻¹(q^k)` together with its weight `k q^(k-1)`.
pub fn severity_sample(params: &LognormalParams, t: &PowerTransform, q: f64) -> Result<(f64, f64)> {
    check_open_unit(q)?;
    Ok(severity_sample_unchecked(params, t, q))
}

#[inline]
pub(crate) fn severity_sample_unchecked(
    params: &LognormalParams,
    t: &PowerTransform,
    q: f64,
) -> (f64, f64) {
    (params.comp_quantile_unchecked(t.apply(q)), t.weight(q))
}

/// Fisher–Yates shuffle of `0..n` driven by `rng`.
pub(crate) fn shuffled_indices(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u32>> {
    let n32 = u32::try_from(n).map_err(|_| {
        Error::InvalidPlan(format!(
            "{n} events exceed the {} supported by the permutation table",
            u32::MAX
        ))
    })?;
    let mut order: Vec<u32> = (0..n32).collect();
    order.shuffle(rng);
    Ok(order)
}

/// Uniformly random permutation of `0..n`, fixed by `seed`.
pub fn permute(n: usize, seed: u64) -> Result<Vec<usize>> {
    check_count(n)?;
    let mut rng = stream_rng(seed);
    Ok(shuffled_indices(n, &mut rng)?
        .into_iter()
        .map(|i| i as usize)
        .collect())
}
