//! One CSV row per integration run.

use std::io::{Read, Write};

use pagani::driver::{IntegrationResult, Status};
use serde::{Deserialize, Serialize};

pub const HEADER: [&str; 13] = [
    "integrand_id",
    "dim",
    "tau_rel",
    "estimate",
    "errorest",
    "reference_value",
    "true_rel_err",
    "claimed_rel_err",
    "status",
    "iterations",
    "regions_generated",
    "eval_count",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub integrand_id: String,
    pub dim: usize,
    pub tau_rel: f64,
    pub estimate: f64,
    pub errorest: f64,
    pub reference_value: f64,
    pub true_rel_err: f64,
    pub claimed_rel_err: f64,
    pub status: String,
    pub iterations: usize,
    pub regions_generated: u64,
    pub eval_count: u64,
    pub wall_ms: f64,
}

impl BenchRecord {
    pub fn new(integrand_id: &str, dim: usize, tau_rel: f64, reference_value: f64, r: &IntegrationResult, wall_ms: f64) -> Self {
        Self {
            integrand_id: integrand_id.to_string(),
            dim,
            tau_rel,
            estimate: r.estimate,
            errorest: r.errorest,
            reference_value,
            true_rel_err: (r.estimate - reference_value).abs() / reference_value.abs(),
            claimed_rel_err: r.errorest / r.estimate.abs(),
            status: r.status.as_str().to_string(),
            iterations: r.iterations,
            regions_generated: r.regions_generated,
            eval_count: r.eval_count,
            wall_ms,
        }
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged.as_str()
    }

    /// Converged and actually within tolerance of the reference value.
    pub fn passes(&self) -> bool {
        self.converged() && self.true_rel_err <= self.tau_rel
    }
}

/// Writes the header, then every record. The header is emitted even when
/// there are no records.
pub fn write_records<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> csv::Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
