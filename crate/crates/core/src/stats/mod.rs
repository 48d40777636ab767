//! Weighted estimators and simulation errors.
//!
//! For samples `s_i` with weights `w_i` (or year losses with trial weights):
//!
//! ```text
//! E(X)  ≈ (1/n) Σ s_i w_i
//! E(X²) ≈ (1/n) Σ s_i² w_i
//! E(Y²) ≈ (1/n) Σ (s_i w_i)²
//! ```
//!
//! The regular method's error uses `Var(X)`, the enhanced method's uses
//! `Var(Y)`; both are reported relative to the estimated mean.

pub mod quadrature;

use crate::distributions::confidence_radius;
use crate::error::{Error, Result};

pub use quadrature::{k2_inequality_check, variance_gap_quadrature};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.compensation += other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Streaming accumulator for the three weighted moment sums.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedMoments {
    x: CompensatedSum,
    x2: CompensatedSum,
    y2: CompensatedSum,
    n: u64,
}

impl WeightedMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, value: f64, weight: f64) {
        let y = value * weight;
        self.x.add(y);
        self.x2.add(value * y);
        self.y2.add(y * y);
        self.n += 1;
    }

    /// Combines two accumulators. Merge order matters at the last bit, so
    /// callers that need reproducible output must fix it.
    pub fn merge(&mut self, other: &WeightedMoments) {
        self.x.merge(&other.x);
        self.x2.merge(&other.x2);
        self.y2.merge(&other.y2);
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimates(&self) -> Result<MomentEstimates> {
        if self.n < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.n as usize,
            });
        }
        let n = self.n as f64;
        Ok(MomentEstimates {
            mean_x: self.x.value() / n,
            mean_x2: self.x2.value() / n,
            mean_y2: self.y2.value() / n,
            n: self.n,
        })
    }
}

/// Estimates of `E(X)`, `E(X²)` and `E(Y²)` from `n` weighted samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimates {
    pub mean_x: f64,
    pub mean_x2: f64,
    pub mean_y2: f64,
    pub n: u64,
}

fn floored_variance(second: f64, mean: f64, which: &str) -> f64 {
    let v = second - mean * mean;
    if v < 0.0 {
        log::debug!("{which} variance {v:e} below zero from rounding, clamped to 0");
        0.0
    } else {
        v
    }
}

impl MomentEstimates {
    pub fn var_x(&self) -> f64 {
        floored_variance(self.mean_x2, self.mean_x, "regular")
    }

    pub fn var_y(&self) -> f64 {
        floored_variance(self.mean_y2, self.mean_x, "enhanced")
    }

    /// Standard error of the weighted mean, `√(Var(Y)/n)`.
    pub fn standard_error(&self) -> f64 {
        (self.var_y() / self.n as f64).sqrt()
    }
}

pub fn weighted_moments(values: &[f64], weights: &[f64]) -> Result<MomentEstimates> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left_name: "values",
            left: values.len(),
            right_name: "weights",
            right: weights.len(),
        });
    }
    let mut acc = WeightedMoments::new();
    for (&v, &w) in values.iter().zip(weights) {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::domain(
                "weight",
                w,
                "weights must be finite and positive",
            ));
        }
        acc.push(v, w);
    }
    acc.estimates()
}

/// Relative radii of the confidence interval for the regular and enhanced
/// estimators, as fractions of the estimated mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationErrors {
    pub regular: f64,
    pub enhanced: f64,
}

pub fn simulation_errors(m: &MomentEstimates, confidence_level: f64) -> Result<SimulationErrors> {
    let z = confidence_radius(confidence_level)?;
    if m.mean_x.is_nan() || m.mean_x <= 0.0 {
        return Err(Error::UndefinedRelativeError { mean: m.mean_x });
    }
    let n = m.n as f64;
    Ok(SimulationErrors {
        regular: z * (m.var_x() / n).sqrt() / m.mean_x,
        enhanced: z * (m.var_y() / n).sqrt() / m.mean_x,
    })
}

/// Estimated `Var(X) / Var(Y)`, i.e. `(regular / enhanced)²`.
pub fn sample_improvement(regular: f64, enhanced: f64) -> Result<f64> {
    if enhanced == 0.0 {
        return Err(Error::ZeroEnhancedError);
    }
    let ratio = regular / enhanced;
    Ok(ratio * ratio)
}
