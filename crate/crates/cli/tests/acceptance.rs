//! Acceptance checks for the case-study setup: Poisson(3) frequency,
//! lognormal severity with mean 10 and sd 30, the six reference contracts.
//!
//! Every test prints one `criterion N: PASS|FAIL ...` line before asserting.
//! Run with `--nocapture` to see them.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use reinsim_cli::{run, OutputPaths};
use reinsim_core::engine::{simulate, SimulationOutput, SimulationPlan};
use reinsim_core::{
    fit_lognormal, inv_normal_cdf_upper, k2_inequality_check, midpoint_partition,
    poisson_comp_quantile, severity_sample, transform_weight, uniform_sample,
    variance_gap_quadrature, PowerTransform, SampleMode, SamplingScheme,
};

const TRIALS: usize = 1_000_000;
const SEED: u64 = 0;

/// Published EL% per contract.
const TABLE_EL_PCT: [f64; 6] = [10.17, 1.98, 0.51, 9.61, 1.96, 0.49];
const TABLE_K: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
/// Published relative 95% errors in percent, rows = contracts, columns = TABLE_K.
const TABLE_ERR_PCT: [[f64; 4]; 6] = [
    [0.54, 0.37, 0.42, 0.74],
    [1.25, 0.65, 0.63, 0.92],
    [2.44, 1.03, 0.88, 1.13],
    [0.56, 0.42, 0.52, 1.03],
    [1.26, 0.68, 0.70, 1.14],
    [2.46, 1.03, 0.93, 1.37],
];

const EL_ERROR_MULTIPLE: f64 = 3.0;
const RUNTIME_LIMIT: Duration = Duration::from_secs(300);
const ERROR_REL_TOL: f64 = 0.35;
const K2_ERROR_LIMIT_PCT: f64 = 1.1;
const SWEEP_ARGMAX_RANGE: (f64, f64) = (1.25, 2.5);
const K2_IMPROVEMENT_MIN: f64 = 5.0;
const EL_CONSISTENCY_SE: f64 = 4.0;
const GAP_SAMPLES: usize = 10_000_000;
const GAP_SE: f64 = 5.0;
const ORACLE_TOL: f64 = 1e-9;
const WEIGHT_MEAN_TOL: f64 = 1e-6;
const WEIGHT_POINTS: usize = 100_000;

fn report(criterion: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:>2}: {status} {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn transforms(ks: &[f64]) -> Vec<PowerTransform> {
    ks.iter()
        .map(|&k| PowerTransform::new(k).unwrap())
        .collect()
}

fn reference_plan(scheme: SamplingScheme) -> SimulationPlan {
    let mut plan = SimulationPlan::reference(TRIALS);
    plan.mode = SampleMode { scheme, seed: SEED };
    plan
}

/// The Riemann-mode run shared by several criteria, with its wall time.
fn reference_run() -> &'static (SimulationOutput, Duration) {
    static RUN: OnceLock<(SimulationOutput, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let out = simulate(&reference_plan(SamplingScheme::Riemann)).unwrap();
        (out, start.elapsed())
    })
}

fn contract_name(i: usize) -> String {
    format!("contract_{}", i + 1)
}

fn enhanced_pct(out: &SimulationOutput, contract: usize, k: f64) -> f64 {
    100.0
        * out
            .get(&contract_name(contract), k)
            .unwrap()
            .errors
            .unwrap()
            .enhanced
}

#[test]
fn criterion_01_expected_losses() {
    let (out, elapsed) = reference_run();
    let mut failures = Vec::new();
    let mut cells = Vec::new();
    for (i, &target) in TABLE_EL_PCT.iter().enumerate() {
        let got = 100.0 * out.get(&contract_name(i), 1.0).unwrap().el_percent;
        let band = EL_ERROR_MULTIPLE * TABLE_ERR_PCT[i][0] / 100.0 * target;
        cells.push(format!("{got:.3}"));
        if (got - target).abs() > band {
            failures.push(format!(
                "contract_{}: {got:.4} vs {target} ± {band:.4}",
                i + 1
            ));
        }
    }
    let fast = *elapsed < RUNTIME_LIMIT;
    if !fast {
        failures.push(format!("runtime {elapsed:?}"));
    }
    report(
        1,
        failures.is_empty(),
        &format!(
            "EL% [{}] in {:.1}s {}",
            cells.join(", "),
            elapsed.as_secs_f64(),
            failures.join("; ")
        ),
    );
}

#[test]
fn criterion_02_error_columns() {
    let (out, _) = reference_run();
    let mut failures = Vec::new();
    for (i, row) in TABLE_ERR_PCT.iter().enumerate() {
        for (&k, &target) in TABLE_K.iter().zip(row) {
            let got = enhanced_pct(out, i, k);
            if (got - target).abs() > ERROR_REL_TOL * target {
                failures.push(format!(
                    "contract_{} k={k}: {got:.4}% vs {target}% ± {:.4}",
                    i + 1,
                    ERROR_REL_TOL * target
                ));
            }
        }
    }
    let detail = if failures.is_empty() {
        "all 24 cells within ±35%".to_string()
    } else {
        format!(
            "{} of 24 cells outside ±35%: {}",
            failures.len(),
            failures.join("; ")
        )
    };
    report(2, failures.is_empty(), &detail);
}

#[test]
fn criterion_03_k2_errors_below_limit() {
    let (out, _) = reference_run();
    let errs: Vec<f64> = (0..6).map(|i| enhanced_pct(out, i, 2.0)).collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    report(
        3,
        worst < K2_ERROR_LIMIT_PCT,
        &format!("k=2 enhanced errors {errs:.3?}, max {worst:.3}% < {K2_ERROR_LIMIT_PCT}%"),
    );
}

#[test]
fn criterion_04_improvement_curve_shape() {
    let ks: Vec<f64> = (0..=8).map(|i| 1.0 + 0.25 * i as f64).collect();
    let mut plan = reference_plan(SamplingScheme::Riemann);
    plan.k_values = transforms(&ks);
    let out = simulate(&plan).unwrap();
    let mut failures = Vec::new();
    let mut peaks = Vec::new();
    for i in 0..6 {
        let name = contract_name(i);
        let (best_k, best) = ks
            .iter()
            .map(|&k| (k, out.get(&name, k).unwrap().sample_improvement.unwrap()))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            });
        peaks.push(format!("{name}@{best_k}={best:.2}"));
        if best_k < SWEEP_ARGMAX_RANGE.0 || best_k > SWEEP_ARGMAX_RANGE.1 {
            failures.push(format!("{name} peaks at k={best_k}"));
        }
    }
    for i in [2, 5] {
        let name = contract_name(i);
        let at2 = out.get(&name, 2.0).unwrap().sample_improvement.unwrap();
        if at2 < K2_IMPROVEMENT_MIN {
            failures.push(format!("{name} improvement at k=2 is {at2:.3}"));
        }
    }
    report(
        4,
        failures.is_empty(),
        &format!("peaks [{}] {}", peaks.join(", "), failures.join("; ")),
    );
}

#[test]
fn criterion_05_identity_transform() {
    let (riemann, _) = reference_run();
    let mut plan = reference_plan(SamplingScheme::Random);
    plan.k_values = vec![PowerTransform::identity()];
    let random = simulate(&plan).unwrap();
    let mut failures = Vec::new();
    for out in [riemann, &random] {
        for m in out.metrics.iter().filter(|m| m.k == 1.0) {
            let e = m.errors.unwrap();
            if e.regular.to_bits() != e.enhanced.to_bits() {
                failures.push(format!(
                    "{}: {} vs {}",
                    m.contract.name, e.regular, e.enhanced
                ));
            }
        }
    }
    report(
        5,
        failures.is_empty(),
        &format!(
            "k=1 regular == enhanced bitwise in riemann and random modes {}",
            failures.join("; ")
        ),
    );
}

#[test]
fn criterion_06_estimator_consistency() {
    let (out, _) = reference_run();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..6 {
        let name = contract_name(i);
        let ks = [1.0, 1.5, 2.0];
        for a in 0..ks.len() {
            for b in a + 1..ks.len() {
                let (ma, mb) = (
                    out.get(&name, ks[a]).unwrap(),
                    out.get(&name, ks[b]).unwrap(),
                );
                let combined = ma.standard_error().hypot(mb.standard_error());
                let z = (ma.expected_loss - mb.expected_loss).abs() / combined;
                worst = worst.max(z);
                if z > EL_CONSISTENCY_SE {
                    failures.push(format!("{name} k={} vs k={}: {z:.2} SE", ks[a], ks[b]));
                }
            }
        }
    }
    report(
        6,
        failures.is_empty(),
        &format!(
            "largest EL discrepancy {worst:.2} combined SE {}",
            failures.join("; ")
        ),
    );
}

/// Sample variance of `v·w` and its standard error `√((m4 - s⁴)/n)`.
fn direct_variance(k: f64, seed: u64) -> (f64, f64) {
    let params = fit_lognormal(10.0, 30.0).unwrap();
    let t = PowerTransform::new(k).unwrap();
    let ys: Vec<f64> = uniform_sample(GAP_SAMPLES, seed)
        .unwrap()
        .into_iter()
        .map(|q| {
            let (v, w) = severity_sample(&params, &t, q).unwrap();
            v * w
        })
        .collect();
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for y in ys {
        let d = (y - mean) * (y - mean);
        m2 += d;
        m4 += d * d;
    }
    let (m2, m4) = (m2 / n, m4 / n);
    (m2, ((m4 - m2 * m2) / n).sqrt())
}

#[test]
fn criterion_07_quadrature_against_simulation() {
    let params = fit_lognormal(10.0, 30.0).unwrap();
    let gap = variance_gap_quadrature(&params, 2.0).unwrap();
    let (lhs, rhs) = k2_inequality_check(&params).unwrap();
    // independent streams for the two variances
    let (var_x, se_x) = direct_variance(1.0, 11);
    let (var_y, se_y) = direct_variance(2.0, 12);
    let simulated = var_y - var_x;
    let combined = se_x.hypot(se_y);
    let z = (gap - simulated).abs() / combined;
    let pass = gap < 0.0 && lhs > rhs && z <= GAP_SE;
    report(
        7,
        pass,
        &format!(
            "gap {gap:.3}, lhs {lhs:.3} > rhs {rhs:.3}, simulated {simulated:.3} ± {combined:.3} ({z:.2} SE)"
        ),
    );
}

#[test]
fn criterion_08_special_function_oracles() {
    let mut worst: f64 = 0.0;
    for p in oracle::probability_grid() {
        let err = (inv_normal_cdf_upper(p).unwrap() - oracle::normal_upper_quantile(p)).abs();
        worst = worst.max(err);
    }
    let mut mismatches = 0;
    for lambda in [0.5, 1.0, 3.0, 10.0] {
        for i in 1..=10_000 {
            let p = (i as f64 - 0.5) / 10_000.0;
            if poisson_comp_quantile(lambda, p).unwrap() != oracle::poisson_comp_quantile(lambda, p)
            {
                mismatches += 1;
            }
        }
    }
    report(
        8,
        worst <= ORACLE_TOL && mismatches == 0,
        &format!("inverse normal max error {worst:.2e}, Poisson mismatches {mismatches}"),
    );
}

#[test]
fn criterion_09_weight_normalization() {
    let grid = midpoint_partition(WEIGHT_POINTS).unwrap();
    let mut worst: f64 = 0.0;
    for k in TABLE_K {
        let t = PowerTransform::new(k).unwrap();
        let mean = grid
            .iter()
            .map(|&q| transform_weight(&t, q).unwrap())
            .sum::<f64>()
            / WEIGHT_POINTS as f64;
        worst = worst.max((mean - 1.0).abs());
    }
    report(
        9,
        worst <= WEIGHT_MEAN_TOL,
        &format!("max |mean weight - 1| = {worst:.2e} at n = {WEIGHT_POINTS}"),
    );
}

fn run_in_pool(plan: &SimulationPlan, threads: usize, dir: &std::path::Path) -> Vec<Vec<u8>> {
    let paths = OutputPaths {
        results: dir.join("results.csv"),
        sweep: dir.join("sweep.csv"),
        year_table: Some(dir.join("ylt.csv")),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| run(plan, &paths)).unwrap();
    [
        &paths.results,
        &paths.sweep,
        paths.year_table.as_ref().unwrap(),
    ]
    .iter()
    .map(|p| std::fs::read(p).unwrap())
    .collect()
}

#[test]
fn criterion_10_determinism() {
    let mut identical = true;
    for scheme in [SamplingScheme::Riemann, SamplingScheme::Random] {
        let mut plan = reference_plan(scheme);
        plan.num_trials = 200_000;
        plan.chunk_trials = 10_000;
        let dir = tempfile::tempdir().unwrap();
        let runs: Vec<Vec<Vec<u8>>> = [1, 4, 4]
            .iter()
            .enumerate()
            .map(|(i, &threads)| {
                let sub = dir.path().join(i.to_string());
                std::fs::create_dir(&sub).unwrap();
                run_in_pool(&plan, threads, &sub)
            })
            .collect();
        identical &= runs.windows(2).all(|w| w[0] == w[1]);
    }
    report(
        10,
        identical,
        "results, sweep and year-table CSVs byte-identical across 1- and 4-thread runs",
    );
}
