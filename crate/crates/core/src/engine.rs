//! Simulated years and per-contract metrics.
//!
//! Event counts come from the midpoint partition of the trial range pushed
//! through the Poisson complementary quantile, so trials are ordered by
//! decreasing count. Event severities are drawn per exponent `k` and dealt to
//! trials consecutively. A trial's weight is the product of its event
//! weights, accumulated as a sum of logs.
//!
//! Trials are processed in fixed chunks of [`SimulationPlan::chunk_trials`]
//! on the rayon pool. Chunk results are combined by a pairwise tree over the
//! chunk index, so the output only depends on the plan, never on the number
//! of threads.

use rayon::prelude::*;

use crate::distributions::{fit_lognormal, Frequency, LognormalParams, PoissonQuantiles};
use crate::error::{Error, Result};
use crate::sampling::{
    child_seed, midpoint, severity_sample_unchecked, shuffled_indices, stream_rng, PowerTransform,
    SampleMode, SamplingScheme, UniformStream,
};
use crate::stats::{
    sample_improvement, simulation_errors, CompensatedSum, MomentEstimates, SimulationErrors,
    WeightedMoments,
};
use crate::terms::Contract;

pub const DEFAULT_CHUNK_TRIALS: usize = 1 << 16;
pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.95;

/// Gross severity given by its target mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Severity {
    pub mean: f64,
    pub sd: f64,
    params: LognormalParams,
}

impl Severity {
    pub fn fit(mean: f64, sd: f64) -> Result<Self> {
        Ok(Self {
            mean,
            sd,
            params: fit_lognormal(mean, sd)?,
        })
    }

    pub fn params(&self) -> &LognormalParams {
        &self.params
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub num_trials: usize,
    pub frequency: Frequency,
    pub severity: Severity,
    pub k_values: Vec<PowerTransform>,
    pub mode: SampleMode,
    pub contracts: Vec<Contract>,
    pub confidence_level: f64,
    pub chunk_trials: usize,
}

impl SimulationPlan {
    /// Poisson(3) frequency, lognormal severity with mean 10 and sd 30, the
    /// six reference contracts and `k ∈ {1, 1.5, 2, 3}`.
    pub fn reference(num_trials: usize) -> Self {
        Self {
            num_trials,
            frequency: Frequency::new(3.0).expect("valid rate"),
            severity: Severity::fit(10.0, 30.0).expect("valid moments"),
            k_values: [1.0, 1.5, 2.0, 3.0]
                .into_iter()
                .map(|k| PowerTransform::new(k).expect("k >= 1"))
                .collect(),
            mode: SampleMode::default(),
            contracts: Contract::reference_set(),
            confidence_level: DEFAULT_CONFIDENCE_LEVEL,
            chunk_trials: DEFAULT_CHUNK_TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trials < 2 {
            return Err(Error::InvalidPlan(format!(
                "trials must be at least 2 to estimate a variance, got {}",
                self.num_trials
            )));
        }
        if self.k_values.is_empty() {
            return Err(Error::InvalidPlan("k_values must not be empty".into()));
        }
        if self.contracts.is_empty() {
            return Err(Error::InvalidPlan(
                "at least one contract is required".into(),
            ));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidPlan(format!(
                "confidence_level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        if self.chunk_trials == 0 {
            return Err(Error::InvalidPlan("chunk_trials must be positive".into()));
        }
        Ok(())
    }

    /// Seed of the severity stream used for the `index`-th exponent.
    pub fn k_stream_seed(&self, index: usize) -> u64 {
        child_seed(self.mode.seed, index as u64)
    }
}

/// Net losses and trial weights, one column per contract.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedYearTable {
    pub contracts: Vec<String>,
    pub weights: Vec<f64>,
    /// `net_losses[c][t]` is the net loss of contract `c` in trial `t`.
    pub net_losses: Vec<Vec<f64>>,
}

impl WeightedYearTable {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn moments(&self, contract: usize) -> Result<MomentEstimates> {
        let mut acc = WeightedMoments::new();
        for (&v, &w) in self.net_losses[contract].iter().zip(&self.weights) {
            acc.push(v, w);
        }
        acc.estimates()
    }
}

/// Event counts per trial from the midpoint partition of `num_trials`.
pub fn draw_frequencies(frequency: Frequency, num_trials: usize) -> Result<Vec<u32>> {
    if num_trials == 0 {
        return Err(Error::domain("num_trials", 0.0, "must be at least 1"));
    }
    let table = PoissonQuantiles::new(frequency);
    let n = num_trials as u64;
    (0..n)
        .into_par_iter()
        .map(|i| table.quantile(midpoint(i, n)))
        .collect()
}

/// Per-event probabilities for one exponent, laid out in trial order.
enum EventDraws {
    Riemann { order: Vec<u32>, total: u64 },
    Random { seed: u64 },
}

impl EventDraws {
    fn new(total_events: u64, mode: SampleMode) -> Result<Self> {
        Ok(match mode.scheme {
            SamplingScheme::Riemann => {
                let mut rng = stream_rng(mode.seed);
                EventDraws::Riemann {
                    order: shuffled_indices(total_events as usize, &mut rng)?,
                    total: total_events,
                }
            }
            SamplingScheme::Random => EventDraws::Random { seed: mode.seed },
        })
    }

    fn cursor(&self, start: u64) -> DrawCursor<'_> {
        match self {
            EventDraws::Riemann { order, total } => DrawCursor::Riemann {
                order,
                total: *total,
                next: start as usize,
            },
            EventDraws::Random { seed } => DrawCursor::Random(UniformStream::at(*seed, start)),
        }
    }
}

// one cursor per chunk; boxing the stream would only add an indirection
#[allow(clippy::large_enum_variant)]
enum DrawCursor<'a> {
    Riemann {
        order: &'a [u32],
        total: u64,
        next: usize,
    },
    Random(UniformStream),
}

impl DrawCursor<'_> {
    #[inline]
    fn next(&mut self) -> f64 {
        match self {
            DrawCursor::Riemann { order, total, next } => {
                let q = midpoint(order[*next] as u64, *total);
                *next += 1;
                q
            }
            DrawCursor::Random(stream) => stream.next(),
        }
    }
}

/// Materialises the event losses and weights for one exponent.
///
/// In Riemann mode the midpoint samples of `total_events` are reordered by a
/// permutation drawn from `mode.seed`; in random mode event `e` uses the
/// `e`-th uniform of that stream. The engine streams the same values without
/// building these vectors.
pub fn build_event_losses(
    total_events: usize,
    severity: &LognormalParams,
    transform: &PowerTransform,
    mode: SampleMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let draws = EventDraws::new(total_events as u64, mode)?;
    let mut cursor = draws.cursor(0);
    Ok((0..total_events)
        .map(|_| severity_sample_unchecked(severity, transform, cursor.next()))
        .unzip())
}

/// Deals events to trials in order and applies one contract.
pub fn assemble_trials(
    frequencies: &[u32],
    losses: &[f64],
    weights: &[f64],
    contract: &Contract,
) -> Result<WeightedYearTable> {
    let total: u64 = frequencies.iter().map(|&c| c as u64).sum();
    if total as usize != losses.len() {
        return Err(Error::LengthMismatch {
            left_name: "sum of frequencies",
            left: total as usize,
            right_name: "losses",
            right: losses.len(),
        });
    }
    if losses.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left_name: "losses",
            left: losses.len(),
            right_name: "weights",
            right: weights.len(),
        });
    }
    let mut table = WeightedYearTable {
        contracts: vec![contract.name.clone()],
        weights: Vec::with_capacity(frequencies.len()),
        net_losses: vec![Vec::with_capacity(frequencies.len())],
    };
    let mut start = 0usize;
    for &count in frequencies {
        let end = start + count as usize;
        let log_weight: f64 = weights[start..end].iter().map(|w| w.ln()).sum();
        table.weights.push(log_weight.exp());
        table.net_losses[0].push(contract.year_loss(losses[start..end].iter().copied()));
        start = end;
    }
    Ok(table)
}

/// Metrics of one contract at one exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractMetrics {
    pub contract: Contract,
    pub k: f64,
    pub moments: MomentEstimates,
    /// Weighted estimate of the expected net loss.
    pub expected_loss: f64,
    /// `expected_loss / occurrence limit`
    pub el_percent: f64,
    /// `None` when the estimated mean is zero.
    pub errors: Option<SimulationErrors>,
    /// Estimated `(regular / enhanced)²`; `None` when undefined.
    pub sample_improvement: Option<f64>,
}

impl ContractMetrics {
    fn new(contract: &Contract, k: f64, moments: MomentEstimates, level: f64) -> Result<Self> {
        let errors = match simulation_errors(&moments, level) {
            Ok(e) => Some(e),
            Err(Error::UndefinedRelativeError { .. }) => None,
            Err(e) => return Err(e),
        };
        let improvement = match errors {
            Some(e) if e.enhanced > 0.0 => Some(sample_improvement(e.regular, e.enhanced)?),
            _ => None,
        };
        Ok(Self {
            contract: contract.clone(),
            k,
            moments,
            expected_loss: moments.mean_x,
            el_percent: moments.mean_x / contract.occurrence.limit,
            errors,
            sample_improvement: improvement,
        })
    }

    /// Standard error of the expected loss estimate.
    pub fn standard_error(&self) -> f64 {
        self.moments.standard_error()
    }
}

/// Summary of the trial weights at one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSummary {
    pub k: f64,
    pub mean: f64,
    /// Standard error of `mean`.
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub total_events: u64,
    /// Contract-major, exponent-minor, in plan order.
    pub metrics: Vec<ContractMetrics>,
    pub weights: Vec<WeightSummary>,
    /// Year loss table of the first exponent, when requested.
    pub year_table: Option<WeightedYearTable>,
}

impl SimulationOutput {
    pub fn get(&self, contract: &str, k: f64) -> Option<&ContractMetrics> {
        self.metrics
            .iter()
            .find(|m| m.contract.name == contract && m.k == k)
    }
}

#[derive(Default)]
pub struct SimulateOptions<'a> {
    pub keep_year_table: bool,
    /// Called before each exponent is simulated with its index and value.
    pub progress: Option<&'a (dyn Fn(usize, f64) + Sync)>,
}

#[derive(Clone)]
struct ChunkResult {
    contracts: Vec<WeightedMoments>,
    weight_sum: CompensatedSum,
    weight_sq_sum: CompensatedSum,
    table: Option<WeightedYearTable>,
}

impl ChunkResult {
    fn merge(mut self, other: ChunkResult) -> ChunkResult {
        for (a, b) in self.contracts.iter_mut().zip(&other.contracts) {
            a.merge(b);
        }
        self.weight_sum.merge(&other.weight_sum);
        self.weight_sq_sum.merge(&other.weight_sq_sum);
        if let (Some(a), Some(b)) = (self.table.as_mut(), other.table) {
            a.weights.extend(b.weights);
            for (x, y) in a.net_losses.iter_mut().zip(b.net_losses) {
                x.extend(y);
            }
        }
        self
    }
}

fn tree_reduce(mut items: Vec<ChunkResult>) -> Option<ChunkResult> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

struct Layout<'a> {
    frequencies: &'a [u32],
    /// First event index of every chunk, plus the total.
    chunk_events: Vec<u64>,
    chunk_trials: usize,
}

impl<'a> Layout<'a> {
    fn new(frequencies: &'a [u32], chunk_trials: usize) -> Self {
        let mut chunk_events = vec![0u64];
        let mut running = 0u64;
        for chunk in frequencies.chunks(chunk_trials) {
            running += chunk.iter().map(|&c| c as u64).sum::<u64>();
            chunk_events.push(running);
        }
        Self {
            frequencies,
            chunk_events,
            chunk_trials,
        }
    }

    fn total_events(&self) -> u64 {
        *self.chunk_events.last().expect("non-empty")
    }

    fn chunks(&self) -> usize {
        self.chunk_events.len() - 1
    }
}

fn run_chunk(
    plan: &SimulationPlan,
    layout: &Layout<'_>,
    draws: &EventDraws,
    transform: &PowerTransform,
    chunk: usize,
    keep_table: bool,
) -> ChunkResult {
    let start = chunk * layout.chunk_trials;
    let end = (start + layout.chunk_trials).min(layout.frequencies.len());
    let counts = &layout.frequencies[start..end];
    let severity = plan.severity.params();
    let mut cursor = draws.cursor(layout.chunk_events[chunk]);

    let n_contracts = plan.contracts.len();
    let mut result = ChunkResult {
        contracts: vec![WeightedMoments::new(); n_contracts],
        weight_sum: CompensatedSum::default(),
        weight_sq_sum: CompensatedSum::default(),
        table: keep_table.then(|| WeightedYearTable {
            contracts: plan.contracts.iter().map(|c| c.name.clone()).collect(),
            weights: Vec::with_capacity(counts.len()),
            net_losses: vec![Vec::with_capacity(counts.len()); n_contracts],
        }),
    };
    let mut annual = vec![0.0; n_contracts];
    for &count in counts {
        annual.fill(0.0);
        let mut log_weight = 0.0;
        for _ in 0..count {
            let (loss, weight) = severity_sample_unchecked(severity, transform, cursor.next());
            log_weight += weight.ln();
            for (acc, contract) in annual.iter_mut().zip(&plan.contracts) {
                *acc += contract.occurrence.apply(loss);
            }
        }
        let trial_weight = log_weight.exp();
        result.weight_sum.add(trial_weight);
        result.weight_sq_sum.add(trial_weight * trial_weight);
        for (j, contract) in plan.contracts.iter().enumerate() {
            let net = contract.aggregate.apply(annual[j]);
            result.contracts[j].push(net, trial_weight);
            if let Some(table) = result.table.as_mut() {
                table.net_losses[j].push(net);
            }
        }
        if let Some(table) = result.table.as_mut() {
            table.weights.push(trial_weight);
        }
    }
    result
}

pub fn simulate(plan: &SimulationPlan) -> Result<SimulationOutput> {
    simulate_with_options(plan, &SimulateOptions::default())
}

pub fn simulate_with_options(
    plan: &SimulationPlan,
    options: &SimulateOptions<'_>,
) -> Result<SimulationOutput> {
    plan.validate()?;
    let frequencies = draw_frequencies(plan.frequency, plan.num_trials)?;
    let layout = Layout::new(&frequencies, plan.chunk_trials);
    let total_events = layout.total_events();

    let mut per_k: Vec<Vec<ContractMetrics>> = Vec::with_capacity(plan.k_values.len());
    let mut weights = Vec::with_capacity(plan.k_values.len());
    let mut year_table = None;

    for (ki, transform) in plan.k_values.iter().enumerate() {
        if let Some(progress) = options.progress {
            progress(ki, transform.k());
        }
        let mode = SampleMode {
            scheme: plan.mode.scheme,
            seed: plan.k_stream_seed(ki),
        };
        let draws = EventDraws::new(total_events, mode)?;
        let keep = options.keep_year_table && ki == 0;
        let chunks: Vec<ChunkResult> = (0..layout.chunks())
            .into_par_iter()
            .map(|c| run_chunk(plan, &layout, &draws, transform, c, keep))
            .collect();
        let merged = tree_reduce(chunks).expect("at least one chunk");

        let n = plan.num_trials as f64;
        let mean_weight = merged.weight_sum.value() / n;
        let var_weight = (merged.weight_sq_sum.value() / n - mean_weight * mean_weight).max(0.0);
        weights.push(WeightSummary {
            k: transform.k(),
            mean: mean_weight,
            standard_error: (var_weight / n).sqrt(),
        });

        let rows = plan
            .contracts
            .iter()
            .zip(&merged.contracts)
            .map(|(c, acc)| {
                ContractMetrics::new(c, transform.k(), acc.estimates()?, plan.confidence_level)
            })
            .collect::<Result<Vec<_>>>()?;
        per_k.push(rows);
        if keep {
            year_table = merged.table;
        }
    }

    let mut metrics = Vec::with_capacity(plan.contracts.len() * plan.k_values.len());
    for j in 0..plan.contracts.len() {
        for rows in &per_k {
            metrics.push(rows[j].clone());
        }
    }
    Ok(SimulationOutput {
        total_events,
        metrics,
        weights,
        year_table,
    })
}
