//! Importance sampling of catastrophe reinsurance losses.
//!
//! Event severities are drawn through the complementary quantile function of
//! the gross loss distribution after a power substitution `p = q^k`. Each
//! sample carries the weight `k q^(k-1)`; per-year weights are the product of
//! the event weights. With `k > 1` the tail is sampled more densely and, for
//! heavy-tailed severities, the weighted estimator of the expected net loss has
//! a smaller variance than the plain one.
//!
//! The crate is organised bottom up:
//!
//! * [`distributions`]: lognormal fit, complementary quantiles, inverse normal CDF.
//! * [`sampling`]: midpoint partitions, seeded streams, the power transform.
//! * [`terms`]: occurrence and annual aggregate layers.
//! * [`stats`]: weighted moments, simulation errors, variance-gap quadrature.
//! * [`engine`]: year loss tables and per-contract metrics.
//! * [`config`] and [`report`]: the text formats used by the command line tool.

pub mod config;
pub mod distributions;
pub mod engine;
mod error;
pub mod report;
pub mod sampling;
pub mod stats;
pub mod terms;

pub use config::{parse_config, serialize_plan, ConfigError};
pub use distributions::{
    confidence_radius, fit_lognormal, inv_normal_cdf_upper, lognormal_comp_quantile,
    poisson_comp_quantile, Frequency, LognormalParams, PoissonQuantiles,
};
pub use engine::{
    assemble_trials, build_event_losses, draw_frequencies, simulate, ContractMetrics,
    SimulationOutput, SimulationPlan, WeightedYearTable,
};
pub use error::{Error, Result};
pub use sampling::{
    midpoint_partition, permute, severity_sample, transform_weight, uniform_sample, PowerTransform,
    SampleMode, SamplingScheme,
};
pub use stats::{
    k2_inequality_check, sample_improvement, simulation_errors, variance_gap_quadrature,
    weighted_moments, MomentEstimates, SimulationErrors, WeightedMoments,
};
pub use terms::{apply_aggregate, apply_occurrence, Contract, Layer};
