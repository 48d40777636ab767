//! Orchestration behind the `reinsim` binary: load a configuration, run the
//! simulation and write the CSV outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use reinsim_core::engine::{simulate_with_options, SimulateOptions, SimulationOutput};
use reinsim_core::report::{emit_results, emit_sweep, emit_year_table};
use reinsim_core::stats::quadrature::{variance_gap, QuadratureOptions};
use reinsim_core::{k2_inequality_check, parse_config, ConfigError, SimulationPlan};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] reinsim_core::Error),
}

impl CliError {
    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::Engine(_) => 2,
        }
    }
}

pub fn load_plan(path: &Path) -> Result<SimulationPlan, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source: ConfigError::Syntax {
            line: 0,
            text: format!("cannot read file: {source}"),
        },
    })?;
    parse_config(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub sweep: PathBuf,
    pub year_table: Option<PathBuf>,
}

fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Simulates `plan` and writes the results table, the k-sweep and, when
/// requested, the year loss table of the first exponent.
pub fn run(plan: &SimulationPlan, outputs: &OutputPaths) -> Result<SimulationOutput, CliError> {
    let k_count = plan.k_values.len();
    let progress = move |index: usize, k: f64| {
        eprintln!("[{}/{}] simulating k = {k}", index + 1, k_count);
    };
    let output = simulate_with_options(
        plan,
        &SimulateOptions {
            keep_year_table: outputs.year_table.is_some(),
            progress: Some(&progress),
        },
    )?;
    eprintln!(
        "{} trials, {} events, {} contracts",
        plan.num_trials,
        output.total_events,
        plan.contracts.len()
    );
    write_file(&outputs.results, |w| emit_results(&output.metrics, w))?;
    write_file(&outputs.sweep, |w| emit_sweep(&output.metrics, w))?;
    if let (Some(path), Some(table)) = (&outputs.year_table, &output.year_table) {
        write_file(path, |w| emit_year_table(table, w))?;
    }
    Ok(output)
}

/// Text report of the quadrature analysis of the configured severity.
pub fn analyze(plan: &SimulationPlan) -> Result<String, CliError> {
    use std::fmt::Write as _;
    let params = plan.severity.params();
    let opts = QuadratureOptions::default();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "severity: lognormal mu = {:.7}, sigma = {:.7} (mean {}, sd {})",
        params.mu(),
        params.sigma(),
        plan.severity.mean,
        plan.severity.sd
    );
    let _ = writeln!(out, "k,variance_gap,error_estimate");
    for t in &plan.k_values {
        let gap = variance_gap(params, t, &opts).map_err(CliError::Engine)?;
        let _ = writeln!(
            out,
            "{},{:.9e},{:.3e}",
            t.k(),
            gap.value,
            gap.error_estimate
        );
    }
    let (lhs, rhs) = k2_inequality_check(params)?;
    let _ = writeln!(
        out,
        "k=2 integrals: lower tail {lhs:.9e}, upper body {rhs:.9e} -> {}",
        if lhs > rhs {
            "variance reduced"
        } else {
            "variance not reduced"
        }
    );
    Ok(out)
}
