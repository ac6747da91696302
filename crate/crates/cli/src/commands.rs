//! The work behind each subcommand, independent of argument parsing.

use std::io::Write;
use std::time::Instant;

use pagani::driver::{integrate, Config};
use pagani::geometry::Bounds;
use pagani::integrands::{lookup, IntegrandId, IntegrandSpec};
use pagani::reference::integrate_sequential;

use crate::record::{BenchRecord, HEADER};

/// Largest sweep exponent: `1e-3 / 5^10 = 1.024e-10`.
pub const K_MAX_LIMIT: usize = 10;

/// Driver settings shared by every subcommand that integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tau_abs: f64,
    pub max_regions: usize,
    pub it_max: usize,
    /// Off forces relative-error filtering off for every integrand;
    /// oscillatory integrands always run without it.
    pub rel_filter: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        let c = Config::default();
        Self { tau_abs: c.tau_abs, max_regions: c.max_regions, it_max: c.it_max, rel_filter: true }
    }
}

impl RunOptions {
    pub fn config(&self, spec: &IntegrandSpec, tau_rel: f64) -> Config {
        Config {
            tau_rel,
            tau_abs: self.tau_abs,
            it_max: self.it_max,
            max_regions: self.max_regions,
            init_target: Config::default().init_target.min(self.max_regions / 2).max(1),
            rel_filtering_enabled: self.rel_filter && spec.rel_filtering(),
            ..Config::default()
        }
    }
}

/// `1e-3 · 5^-k` for `k = 0..=k_max`.
pub fn tolerance_sweep(k_max: usize) -> Vec<f64> {
    (0..=k_max).map(|k| 1e-3 / 5f64.powi(k as i32)).collect()
}

/// Parses `"f4:5,f6:6"`. An empty or blank string selects nothing.
pub fn parse_subset(subset: &str) -> Result<Vec<IntegrandSpec>, String> {
    subset
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (id, dim) = item.split_once(':').ok_or_else(|| format!("expected id:dim, got {item:?}"))?;
            let id: IntegrandId = id.trim().parse().map_err(|e| format!("{e}"))?;
            let dim: usize = dim.trim().parse().map_err(|_| format!("bad dimension in {item:?}"))?;
            lookup(id, dim).map_err(|e| e.to_string())
        })
        .collect()
}

pub fn run_pagani(spec: &IntegrandSpec, tau_rel: f64, opts: &RunOptions) -> pagani::Result<BenchRecord> {
    let config = opts.config(spec, tau_rel);
    let bounds = Bounds::unit(spec.dim)?;
    let f = |x: &[f64]| spec.eval(x);
    let start = Instant::now();
    let r = integrate(&f, &bounds, &config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRecord::new(spec.id.as_str(), spec.dim, tau_rel, spec.reference_value, &r, wall_ms))
}

pub fn bench(specs: &[IntegrandSpec], k_max: usize, opts: &RunOptions) -> pagani::Result<Vec<BenchRecord>> {
    let taus = tolerance_sweep(k_max);
    let mut out = Vec::with_capacity(specs.len() * taus.len());
    for spec in specs {
        for &tau in &taus {
            out.push(run_pagani(spec, tau, opts)?);
        }
    }
    Ok(out)
}

/// Both drivers on one integrand, and whether they agree within the sum of
/// their error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparePair {
    pub pagani: BenchRecord,
    pub reference: BenchRecord,
    pub agreement: bool,
}

/// Rounding slack, in ulps of the estimates, allowed when comparing drivers.
const ROUNDING_ULPS: f64 = 64.0;

pub fn compare_one<F>(label: &str, f: &F, dim: usize, reference_value: f64, config: &Config, max_evals: u64) -> pagani::Result<ComparePair>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let bounds = Bounds::unit(dim)?;
    let start = Instant::now();
    let p = integrate(f, &bounds, config)?;
    let p_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let r = integrate_sequential(f, &bounds, config.tau_rel, config.tau_abs, max_evals)?;
    let r_ms = start.elapsed().as_secs_f64() * 1e3;
    // Summing thousands of regions costs a few ulps the error claims ignore.
    let rounding = ROUNDING_ULPS * f64::EPSILON * (p.estimate.abs() + r.estimate.abs());
    Ok(ComparePair {
        agreement: (p.estimate - r.estimate).abs() <= p.errorest + r.errorest + rounding,
        pagani: BenchRecord::new(label, dim, config.tau_rel, reference_value, &p, p_ms),
        reference: BenchRecord::new(label, dim, config.tau_rel, reference_value, &r, r_ms),
    })
}

pub fn compare(specs: &[IntegrandSpec], tau_rel: f64, opts: &RunOptions, max_evals: u64) -> pagani::Result<Vec<ComparePair>> {
    specs
        .iter()
        .map(|spec| {
            compare_one(spec.id.as_str(), &|x: &[f64]| spec.eval(x), spec.dim, spec.reference_value, &opts.config(spec, tau_rel), max_evals)
        })
        .collect()
}

/// Two rows per pair, tagged by driver, each carrying the pair's agreement.
pub fn write_compare<W: Write>(out: W, pairs: &[ComparePair]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut header = vec!["driver"];
    header.extend(HEADER);
    header.push("agreement");
    w.write_record(&header)?;
    for pair in pairs {
        for (driver, rec) in [("pagani", &pair.pagani), ("reference", &pair.reference)] {
            w.serialize((driver, rec, pair.agreement))?;
        }
    }
    w.flush()?;
    Ok(())
}
