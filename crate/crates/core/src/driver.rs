//! The breadth-first integration loop.
//!
//! Each iteration evaluates every live region, refines the errors with
//! parent/sibling data, classifies, checks for convergence, optionally runs
//! the threshold search, drops finished regions and bisects the rest. The
//! loop is sequential; every step inside an iteration is a data-parallel
//! map, scan or fixed-shape reduction, so results do not depend on the
//! number of worker threads.

use crate::classify::{filter, rel_err_classify, threshold_classify, ClassifyFlags, ThresholdFailure, ThresholdLimits, ThresholdProbe};
use crate::cubature::{build_rule, evaluate_batch, ErrorRule};
use crate::error::{Error, Result};
use crate::errorest::{ErrorRefiner, InflatingRefiner};
use crate::geometry::{bisect, initial_split_factor, uniform_split, Bounds, RegionBatch, UnitPullback};
use crate::reduce;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub tau_rel: f64,
    pub tau_abs: f64,
    pub it_max: usize,
    pub max_regions: usize,
    pub init_target: usize,
    /// Off for integrands that change sign.
    pub rel_filtering_enabled: bool,
    /// Filter against the error allowance still unspent rather than the
    /// plain `tau_rel` (see [`filter_tolerance`]).
    pub budgeted_rel_filter: bool,
    pub error_rule: ErrorRule,
    pub threshold_limits: ThresholdLimits,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tau_rel: 1e-3,
            tau_abs: 1e-20,
            it_max: 100,
            max_regions: 1 << 22,
            init_target: 1 << 14,
            rel_filtering_enabled: true,
            budgeted_rel_filter: true,
            error_rule: ErrorRule::default(),
            threshold_limits: ThresholdLimits::default(),
        }
    }
}

impl Config {
    pub fn with_tau_rel(tau_rel: f64) -> Self {
        Self { tau_rel, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tau_rel > 0.0 && self.tau_rel.is_finite()) {
            return bad(format!("tau_rel must be positive, got {}", self.tau_rel));
        }
        if !(self.tau_abs >= 0.0) {
            return bad(format!("tau_abs must be non-negative, got {}", self.tau_abs));
        }
        if self.it_max == 0 {
            return bad("it_max must be at least 1".into());
        }
        if self.init_target == 0 || self.max_regions < 2 * self.init_target {
            return bad(format!("max_regions ({}) must be at least twice init_target ({})", self.max_regions, self.init_target));
        }
        Ok(())
    }

    /// Significant digits that must stop changing before the threshold search
    /// is allowed to run on accuracy grounds: `ceil(log10(1/tau_rel))`.
    pub fn digits_for_convergence(&self) -> usize {
        ((-self.tau_rel.log10()) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    MemoryExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::MemoryExhausted => "MemoryExhausted",
        }
    }
}

/// Integral and error totals: `v, e` over live regions, `v_f, e_f` over
/// everything finished so far.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulators {
    pub v: f64,
    pub e: f64,
    pub v_f: f64,
    pub e_f: f64,
}

impl Accumulators {
    pub fn estimate(&self) -> f64 {
        self.v + self.v_f
    }

    pub fn error(&self) -> f64 {
        self.e + self.e_f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub estimate: f64,
    pub errorest: f64,
    pub status: Status,
    pub iterations: usize,
    pub regions_generated: u64,
    pub eval_count: u64,
    pub threshold_invocations: usize,
    /// Regions on which the integrand returned NaN or an infinity.
    pub nonfinite_regions: usize,
}

/// Summary of one threshold search, as seen by the driver.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEvent {
    pub by_digits: bool,
    pub by_memory: bool,
    pub success: bool,
    pub failure: Option<ThresholdFailure>,
    pub regions: usize,
    pub finished_count: usize,
    pub finished_error: f64,
    pub error_budget: f64,
    pub p_max: f64,
    pub probes: Vec<ThresholdProbe>,
}

/// Snapshot taken at the end of each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    /// Regions evaluated this iteration.
    pub regions: usize,
    pub acc: Accumulators,
    pub rel_finished: usize,
    /// Tolerance the relative-error filter used this iteration.
    pub tau_filter: f64,
    pub threshold: Option<ThresholdEvent>,
    /// Regions surviving the filter (before bisection).
    pub active_after: usize,
    /// Estimates of surviving regions, summed.
    pub live_estimate: f64,
    /// Finished totals after this iteration's filter.
    pub v_f_after: f64,
    pub e_f_after: f64,
    /// Unit-cube volume of surviving regions and of everything finished.
    pub live_volume: f64,
    pub finished_volume: f64,
    pub regions_generated: u64,
}

/// `(e + e_f) <= |v + v_f|·tau_rel` or `(e + e_f) <= tau_abs`.
pub fn check_termination(acc: &Accumulators, config: &Config) -> bool {
    let e = acc.error();
    e <= acc.estimate().abs() * config.tau_rel || e <= config.tau_abs
}

/// Per-region relative tolerance that still fits the global allowance.
///
/// Regions finished earlier already hold `finished_error` of the
/// `tau_rel·|total|` allowance; the rest is shared in proportion to
/// `|v_i|` among the live regions (`live_abs = Σ|v_i|`), so finishing any
/// subset of them cannot push the finished error past the allowance.
pub fn filter_tolerance(tau_rel: f64, total: f64, finished_error: f64, live_abs: f64) -> f64 {
    let remaining = tau_rel * total.abs() - finished_error;
    if !(remaining > 0.0) || !(live_abs > 0.0) {
        return 0.0;
    }
    tau_rel.min(remaining / live_abs)
}

/// Whether the two values agree when rounded to `digits` significant digits.
pub fn digits_converged(v_prev: f64, v_curr: f64, digits: usize) -> bool {
    if !(v_prev.is_finite() && v_curr.is_finite()) {
        return false;
    }
    if v_prev == 0.0 && v_curr == 0.0 {
        return true;
    }
    if v_prev == 0.0 || v_curr == 0.0 || (v_prev > 0.0) != (v_curr > 0.0) {
        return false;
    }
    let p = digits.max(1) - 1;
    format!("{v_prev:.p$e}") == format!("{v_curr:.p$e}")
}

/// Integrates with the default [`InflatingRefiner`].
pub fn integrate<F>(f: &F, bounds: &Bounds, config: &Config) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_with(f, bounds, config, &InflatingRefiner, &mut |_, _, _| {})
}

/// [`integrate`] with a custom error refiner and a per-iteration observer.
///
/// The observer sees each iteration's report, the evaluated regions (with
/// refined errors) and the final classification (`true` = kept active).
pub fn integrate_with<F>(
    f: &F,
    bounds: &Bounds,
    config: &Config,
    refiner: &dyn ErrorRefiner,
    observer: &mut dyn FnMut(&IterationReport, &RegionBatch, &ClassifyFlags),
) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = bounds.dim();
    let rule = build_rule(dim)?;

    // Regions live in the unit cube; the integrand absorbs the affine map
    // and its Jacobian.
    let pullback = UnitPullback::new(f, bounds);
    let mapped = |u: &[f64]| pullback.eval(u);

    let d = initial_split_factor(dim, config.init_target);
    let mut batch = uniform_split(&Bounds::unit(dim)?, d, config.max_regions)?;
    let digits = config.digits_for_convergence();

    let mut result = IntegrationResult {
        estimate: 0.0,
        errorest: f64::INFINITY,
        status: Status::MaxIterations,
        iterations: 0,
        regions_generated: batch.len() as u64,
        eval_count: 0,
        threshold_invocations: 0,
        nonfinite_regions: 0,
    };
    let mut acc = Accumulators::default();
    let mut prev_total: Option<f64> = None;
    let mut finished_volume = 0.0;

    for it in 1..=config.it_max {
        result.iterations = it;
        let m = batch.len();
        let out = evaluate_batch(&mapped, &batch, &rule, config.error_rule);
        result.eval_count += out.eval_count;

        let errors = if it == 1 {
            out.raw_errors
        } else {
            refiner.refine(&out.estimates, &out.raw_errors, &batch.parent_estimates, &batch.parent_errors)?
        };
        batch.estimates = out.estimates;
        batch.split_axis = out.split_axes;
        batch.errors = errors;

        let nonfinite = reduce::count(&out.nonfinite);
        if nonfinite > 0 {
            let finite: Vec<bool> = out.nonfinite.iter().map(|&b| !b).collect();
            result.estimate = acc.v_f + reduce::masked_sum(&batch.estimates, &finite);
            result.errorest = f64::INFINITY;
            result.status = Status::MemoryExhausted;
            result.nonfinite_regions = nonfinite;
            return Ok(result);
        }

        acc.v = reduce::sum(&batch.estimates);
        acc.e = reduce::sum(&batch.errors);
        let tau_filter = if config.budgeted_rel_filter {
            filter_tolerance(config.tau_rel, acc.estimate(), acc.e_f, reduce::sum_by(m, &|j| batch.estimates[j].abs()))
        } else {
            config.tau_rel
        };
        let mut flags = rel_err_classify(&batch.estimates, &batch.errors, tau_filter, config.rel_filtering_enabled);
        result.estimate = acc.estimate();
        result.errorest = acc.error();

        let mut report = IterationReport {
            iteration: it,
            regions: m,
            acc,
            rel_finished: flags.finished_count(),
            tau_filter,
            threshold: None,
            active_after: m,
            live_estimate: acc.v,
            v_f_after: acc.v_f,
            e_f_after: acc.e_f,
            live_volume: batch.total_volume(),
            finished_volume,
            regions_generated: result.regions_generated,
        };

        if check_termination(&acc, config) {
            result.status = Status::Converged;
            observer(&report, &batch, &flags);
            return Ok(result);
        }

        let total = acc.estimate();
        let by_digits = prev_total.is_some_and(|p| digits_converged(p, total, digits));
        let by_memory = 2 * flags.active_count() > config.max_regions;
        prev_total = Some(total);

        if by_digits || by_memory {
            result.threshold_invocations += 1;
            let search = threshold_classify(&flags, &batch.errors, total, acc.error(), acc.e, m, config.tau_rel, &config.threshold_limits);
            let last = search.probes.last().copied();
            report.threshold = Some(ThresholdEvent {
                by_digits,
                by_memory,
                success: search.success(),
                failure: search.failure,
                regions: m,
                finished_count: last.map_or(0, |p| p.finished_count),
                finished_error: last.map_or(0.0, |p| p.finished_error),
                error_budget: search.error_budget,
                p_max: search.state.map_or(config.threshold_limits.p_max_start, |s| s.p_max),
                probes: search.probes.clone(),
            });
            if search.success() {
                flags = search.flags;
            } else if by_memory {
                result.status = Status::MemoryExhausted;
                observer(&report, &batch, &flags);
                return Ok(result);
            }
        }

        // With nothing left to subdivide the loop could not make progress;
        // keep refining everything instead.
        if flags.active_count() == 0 {
            flags = ClassifyFlags::all_active(m);
        }

        let finished_mask: Vec<bool> = flags.as_slice().iter().map(|&a| !a).collect();
        finished_volume += reduce::sum_by(m, &|j| if finished_mask[j] { batch.volume(j) } else { 0.0 });
        let (kept, fv, fe) = filter(&batch, &flags);
        let v_before = acc.estimate();
        acc.v_f += fv;
        acc.e_f += fe;

        report.active_after = kept.len();
        report.live_estimate = reduce::sum(&kept.estimates);
        report.v_f_after = acc.v_f;
        report.e_f_after = acc.e_f;
        report.live_volume = kept.total_volume();
        report.finished_volume = finished_volume;
        debug_assert_invariants(&report, v_before, &batch);

        if 2 * kept.len() > config.max_regions {
            result.status = Status::MemoryExhausted;
            observer(&report, &batch, &flags);
            return Ok(result);
        }
        result.regions_generated += 2 * kept.len() as u64;
        report.regions_generated = result.regions_generated;
        observer(&report, &batch, &flags);
        batch = bisect(&kept, config.max_regions)?;
    }
    Ok(result)
}

fn debug_assert_invariants(report: &IterationReport, v_before: f64, evaluated: &RegionBatch) {
    if cfg!(debug_assertions) {
        let scale = reduce::sum_by(evaluated.len(), &|j| evaluated.estimates[j].abs()) + report.v_f_after.abs();
        let drift = (report.live_estimate + report.v_f_after - v_before).abs();
        assert!(drift <= 1e-10 * scale.max(f64::MIN_POSITIVE), "estimate conservation violated: drift {drift:e}");
        assert!(report.e_f_after >= report.acc.e_f, "finished error decreased");
        let vol = report.live_volume + report.finished_volume;
        assert!((vol - 1.0).abs() <= 1e-9, "volume conservation violated: {vol}");
    }
}
