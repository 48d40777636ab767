//! Reinsurance financial terms.
//!
//! A contract is two layers: an occurrence layer applied to every event loss
//! and an annual aggregate layer applied once to the year's sum of layered
//! event losses.

use crate::error::{Error, Result};

/// `min(max(0, x - attach), limit)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub attach: f64,
    pub limit: f64,
}

impl Layer {
    pub fn new(attach: f64, limit: f64) -> Result<Self> {
        if !(attach.is_finite() && attach >= 0.0) {
            return Err(Error::domain(
                "attach",
                attach,
                "must be finite and non-negative",
            ));
        }
        if !(limit.is_finite() && limit > 0.0) {
            return Err(Error::domain("limit", limit, "must be finite and positive"));
        }
        Ok(Self { attach, limit })
    }

    #[inline]
    pub fn apply(&self, loss: f64) -> f64 {
        (loss - self.attach).max(0.0).min(self.limit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: String,
    pub occurrence: Layer,
    pub aggregate: Layer,
}

impl Contract {
    pub fn new(
        name: impl Into<String>,
        occ_attach: f64,
        occ_limit: f64,
        agg_attach: f64,
        agg_limit: f64,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            occurrence: Layer::new(occ_attach, occ_limit)?,
            aggregate: Layer::new(agg_attach, agg_limit)?,
        })
    }

    /// The six contracts of the reference case study: three first-event
    /// covers followed by three second-event covers.
    pub fn reference_set() -> Vec<Contract> {
        [
            ("contract_1", 34.0, 34.0, 0.0, 34.0),
            ("contract_2", 95.0, 95.0, 0.0, 95.0),
            ("contract_3", 190.0, 190.0, 0.0, 190.0),
            ("contract_4", 9.0, 9.0, 9.0, 9.0),
            ("contract_5", 20.0, 20.0, 20.0, 20.0),
            ("contract_6", 34.0, 34.0, 34.0, 34.0),
        ]
        .into_iter()
        .map(|(n, oa, ol, aa, al)| Contract::new(n, oa, ol, aa, al).expect("valid terms"))
        .collect()
    }

    /// Net loss of a year given its gross event losses.
    pub fn year_loss<I: IntoIterator<Item = f64>>(&self, gross_events: I) -> f64 {
        let annual: f64 = gross_events
            .into_iter()
            .map(|x| self.occurrence.apply(x))
            .sum();
        self.aggregate.apply(annual)
    }
}

fn check_loss(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            x,
            "losses must be finite and non-negative",
        ))
    }
}

pub fn apply_occurrence(contract: &Contract, gross: f64) -> Result<f64> {
    check_loss("gross", gross)?;
    Ok(contract.occurrence.apply(gross))
}

pub fn apply_aggregate(contract: &Contract, annual: f64) -> Result<f64> {
    check_loss("annual", annual)?;
    Ok(contract.aggregate.apply(annual))
}
