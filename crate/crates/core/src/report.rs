//! CSV output: the per-contract results table, the k-sweep and the optional
//! year loss table dump.
//!
//! Percentages (`el_percent`, the two error columns) are written in percent.
//! Undefined values, e.g. relative errors of a contract that never pays, are
//! written as `NA`.

use std::io::{self, Write};

use crate::engine::{ContractMetrics, WeightedYearTable};

pub const RESULTS_HEADER: &str = "contract,occ_attach,occ_limit,agg_attach,agg_limit,el,el_percent,k,sim_error_regular_pct,sim_error_enhanced_pct,sample_improvement";
pub const SWEEP_HEADER: &str = "k,contract,sample_improvement";

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn fixed_or_na(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fixed)
}

pub fn emit_results<W: Write>(metrics: &[ContractMetrics], mut out: W) -> io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for m in metrics {
        let c = &m.contract;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.name,
            fixed(c.occurrence.attach),
            fixed(c.occurrence.limit),
            fixed(c.aggregate.attach),
            fixed(c.aggregate.limit),
            fixed(m.expected_loss),
            fixed(100.0 * m.el_percent),
            fixed(m.k),
            fixed_or_na(m.errors.map(|e| 100.0 * e.regular)),
            fixed_or_na(m.errors.map(|e| 100.0 * e.enhanced)),
            fixed_or_na(m.sample_improvement),
        )?;
    }
    out.flush()
}

/// Sample improvement per exponent and contract, exponent-major.
pub fn emit_sweep<W: Write>(metrics: &[ContractMetrics], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    let mut ks: Vec<f64> = Vec::new();
    for m in metrics {
        if !ks.contains(&m.k) {
            ks.push(m.k);
        }
    }
    for k in ks {
        for m in metrics.iter().filter(|m| m.k == k) {
            writeln!(
                out,
                "{},{},{}",
                fixed(k),
                m.contract.name,
                fixed_or_na(m.sample_improvement)
            )?;
        }
    }
    out.flush()
}

/// `trial,weight,net_loss_<contract>...` with trials numbered from 1 and
/// values in shortest round-trip form.
pub fn emit_year_table<W: Write>(table: &WeightedYearTable, mut out: W) -> io::Result<()> {
    write!(out, "trial,weight")?;
    for name in &table.contracts {
        write!(out, ",net_loss_{name}")?;
    }
    writeln!(out)?;
    for (t, w) in table.weights.iter().enumerate() {
        write!(out, "{},{}", t + 1, w)?;
        for column in &table.net_losses {
            write!(out, ",{}", column[t])?;
        }
        writeln!(out)?;
    }
    out.flush()
}
