//! Browser bindings for three interactive views of the integrator:
//!
//! * `run_2d` — integrate a 2D suite integrand and return every region the
//!   breadth-first loop finished, iteration by iteration;
//! * `threshold_trace` — run the threshold search on a user-supplied list of
//!   region errors and return each probe;
//! * `rule_points` — the cubature points and weights of the degree-7 rule.
//!
//! Each binding returns JSON. The work is done by plain Rust functions so it
//! can be tested natively.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pagani::classify::{threshold_classify, ClassifyFlags, ThresholdLimits};
use pagani::cubature::build_rule;
use pagani::driver::{integrate_with, Config};
use pagani::errorest::InflatingRefiner;
use pagani::geometry::Bounds;
use pagani::integrands::lookup;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bound on rectangles shipped to the page.
pub const MAX_RECTS: usize = 60_000;

#[derive(Debug, Serialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub regions: usize,
    pub active_after: usize,
    pub estimate: f64,
    pub errorest: f64,
    pub threshold: Option<ThresholdSummary>,
}

#[derive(Debug, Serialize)]
pub struct ThresholdSummary {
    pub success: bool,
    pub probes: usize,
    pub finished: usize,
}

#[derive(Debug, Serialize)]
pub struct Run2d {
    pub integrand: String,
    pub reference: f64,
    pub estimate: f64,
    pub errorest: f64,
    pub status: String,
    pub iterations: usize,
    pub regions_generated: u64,
    pub history: Vec<IterationSummary>,
    /// `[x, y, w, h, iteration]` for every region finished, in order.
    pub finished: Vec<[f64; 5]>,
    /// `[x, y, w, h]` for regions still active at the end.
    pub active: Vec<[f64; 4]>,
    pub truncated: bool,
}

pub fn run_2d_impl(id: &str, tau_rel: f64, init_target: usize, it_max: usize) -> Result<Run2d, String> {
    let spec = lookup(id.parse().map_err(|e| format!("{e}"))?, 2).map_err(|e| e.to_string())?;
    let init_target = init_target.clamp(1, 1 << 12);
    let config = Config {
        tau_rel,
        init_target,
        max_regions: 1 << 18,
        it_max: it_max.clamp(1, 60),
        rel_filtering_enabled: spec.rel_filtering(),
        ..Config::default()
    };
    let mut history = vec![];
    let mut finished = vec![];
    let mut active = vec![];
    let mut truncated = false;
    let f = |x: &[f64]| spec.eval(x);
    let result = integrate_with(&f, &Bounds::unit(2).map_err(|e| e.to_string())?, &config, &InflatingRefiner, &mut |rep, batch, flags| {
        history.push(IterationSummary {
            iteration: rep.iteration,
            regions: rep.regions,
            active_after: rep.active_after,
            estimate: rep.acc.estimate(),
            errorest: rep.acc.error(),
            threshold: rep.threshold.as_ref().map(|t| ThresholdSummary {
                success: t.success,
                probes: t.probes.len(),
                finished: t.finished_count,
            }),
        });
        active.clear();
        for (j, &keep) in flags.as_slice().iter().enumerate() {
            let (lo, len) = (batch.low(j), batch.length(j));
            if keep {
                active.push([lo[0], lo[1], len[0], len[1]]);
            } else if finished.len() < MAX_RECTS {
                finished.push([lo[0], lo[1], len[0], len[1], rep.iteration as f64]);
            } else {
                truncated = true;
            }
        }
    })
    .map_err(|e| e.to_string())?;
    if active.len() > MAX_RECTS {
        active.truncate(MAX_RECTS);
        truncated = true;
    }
    Ok(Run2d {
        integrand: spec.label(),
        reference: spec.reference_value,
        estimate: result.estimate,
        errorest: result.errorest,
        status: result.status.as_str().into(),
        iterations: result.iterations,
        regions_generated: result.regions_generated,
        history,
        finished,
        active,
        truncated,
    })
}

#[derive(Debug, Serialize)]
pub struct Probe {
    pub t: f64,
    pub p_max: f64,
    pub finished_count: usize,
    pub finished_error: f64,
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub error_budget: f64,
    pub success: bool,
    pub failure: Option<String>,
    pub probes: Vec<Probe>,
    /// `true` = region kept active.
    pub flags: Vec<bool>,
}

/// Parses numbers separated by commas and/or whitespace.
pub fn parse_errors(text: &str) -> Result<Vec<f64>, String> {
    let errors: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect::<Result<_, _>>()?;
    if errors.is_empty() {
        return Err("no errors given".into());
    }
    if let Some(bad) = errors.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(format!("errors must be finite and non-negative, got {bad}"));
    }
    Ok(errors)
}

/// Threshold search over `errors` treated as one iteration's live regions,
/// none of which is finished yet.
pub fn threshold_trace_impl(errors: &str, v_tot: f64, tau_rel: f64) -> Result<Trace, String> {
    let errors = parse_errors(errors)?;
    if !(tau_rel > 0.0) {
        return Err("tau_rel must be positive".into());
    }
    let e_tot: f64 = errors.iter().sum();
    let flags = ClassifyFlags::all_active(errors.len());
    let r = threshold_classify(&flags, &errors, v_tot, e_tot, e_tot, errors.len(), tau_rel, &ThresholdLimits::default());
    Ok(Trace {
        error_budget: r.error_budget,
        success: r.success(),
        failure: r.failure.map(|f| format!("{f:?}")),
        probes: r
            .probes
            .iter()
            .map(|p| Probe { t: p.t, p_max: p.p_max, finished_count: p.finished_count, finished_error: p.finished_error })
            .collect(),
        flags: r.flags.0,
    })
}

#[derive(Debug, Serialize)]
pub struct RulePoints {
    pub dim: usize,
    /// Coordinates in the unit cube.
    pub points: Vec<Vec<f64>>,
    pub orbit: Vec<usize>,
    /// Integration weights, then the four null-rule weight sets.
    pub weights: Vec<Vec<f64>>,
}

pub fn rule_points_impl(dim: usize) -> Result<RulePoints, String> {
    let rule = build_rule(dim).map_err(|e| e.to_string())?;
    let n = rule.point_count();
    Ok(RulePoints {
        dim,
        points: (0..n).map(|k| rule.point(k).to_vec()).collect(),
        orbit: (0..n).map(|k| rule.orbit_of(k)).collect(),
        weights: (0..5).map(|r| rule.weights(r).to_vec()).collect(),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_2d(id: &str, tau_rel: f64, init_target: u32, it_max: u32) -> Result<String, JsValue> {
    to_json(run_2d_impl(id, tau_rel, init_target as usize, it_max as usize))
}

#[wasm_bindgen]
pub fn threshold_trace(errors: &str, v_tot: f64, tau_rel: f64) -> Result<String, JsValue> {
    to_json(threshold_trace_impl(errors, v_tot, tau_rel))
}

#[wasm_bindgen]
pub fn rule_points(dim: u32) -> Result<String, JsValue> {
    to_json(rule_points_impl(dim as usize))
}
