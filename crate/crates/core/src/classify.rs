//! Deciding which regions are finished, and removing them from the batch.

use crate::geometry::RegionBatch;
use crate::reduce;

/// Per-region activity: `true` keeps the region for further subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyFlags(pub Vec<bool>);

impl ClassifyFlags {
    pub fn all_active(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn active_count(&self) -> usize {
        reduce::count(&self.0)
    }

    pub fn finished_count(&self) -> usize {
        self.len() - self.active_count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Marks a region finished when its error is within `tau_rel` of its own
/// estimate. With filtering disabled every region stays active.
pub fn rel_err_classify(estimates: &[f64], errors: &[f64], tau_rel: f64, filtering_enabled: bool) -> ClassifyFlags {
    assert_eq!(estimates.len(), errors.len());
    if !filtering_enabled {
        return ClassifyFlags::all_active(estimates.len());
    }
    // A zero estimate finishes only with zero error; `0 <= 0 * tau` covers it.
    ClassifyFlags(reduce::map_indexed(estimates.len(), |j| !(errors[j] <= estimates[j].abs() * tau_rel)))
}

/// Finished iff `error < t`. Ties stay active.
pub fn apply_threshold(errors: &[f64], t: f64) -> ClassifyFlags {
    ClassifyFlags(reduce::map_indexed(errors.len(), |j| !(errors[j] < t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdLimits {
    pub direction_changes: usize,
    pub attempts: usize,
    pub p_max_start: f64,
    pub p_max_step: f64,
    pub p_max_cap: f64,
    /// Also require the error discarded beyond what relative filtering
    /// already finished to fit in `P_max` of the remaining final allowance,
    /// `|v_tot|·τ` minus all error finished so far. Without it the search can
    /// discard more error than the final result may carry, after which
    /// convergence is impossible.
    pub reserve_guard: bool,
}

impl Default for ThresholdLimits {
    fn default() -> Self {
        Self { direction_changes: 4, attempts: 40, p_max_start: 0.25, p_max_step: 0.10, p_max_cap: 0.95, reserve_guard: true }
    }
}

impl ThresholdLimits {
    /// The bare search: memory and error-budget requirements only.
    pub fn unguarded() -> Self {
        Self { reserve_guard: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdState {
    pub t: f64,
    pub min_err: f64,
    pub max_err: f64,
    /// Fraction of the error budget the discarded regions may consume.
    pub p_max: f64,
    pub direction_changes: usize,
    pub attempts: usize,
}

/// One candidate threshold tried during the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdProbe {
    pub t: f64,
    pub p_max: f64,
    pub finished_count: usize,
    pub finished_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdFailure {
    /// `e_tot − |v_tot|·τ ≤ 0`: discarding cannot help.
    NonPositiveBudget,
    /// Earlier finished error already fills the final allowance, so nothing
    /// more may be discarded (only with the reserve guard).
    NoReserve,
    DirectionLimit,
    AttemptLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// New flags on success; the input flags untouched on failure.
    pub flags: ClassifyFlags,
    pub failure: Option<ThresholdFailure>,
    pub error_budget: f64,
    pub state: Option<ThresholdState>,
    pub probes: Vec<ThresholdProbe>,
}

impl ThresholdReport {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Raise `t` to finish more regions.
    TowardMax,
    /// Lower `t` to spend less of the error budget.
    TowardMin,
}

/// Searches for an error cutoff that finishes more than half of the regions
/// while spending at most `P_max` of the error budget.
///
/// Regions already finished in `flags` stay finished and count toward both
/// requirements.
#[allow(clippy::too_many_arguments)]
pub fn threshold_classify(
    flags: &ClassifyFlags,
    errors: &[f64],
    v_tot: f64,
    e_tot: f64,
    e_it: f64,
    s_it: usize,
    tau_rel: f64,
    limits: &ThresholdLimits,
) -> ThresholdReport {
    assert_eq!(flags.len(), errors.len());
    let error_budget = e_tot - v_tot.abs() * tau_rel;
    let fail = |failure, state, probes| ThresholdReport { flags: flags.clone(), failure: Some(failure), error_budget, state, probes };
    if !(error_budget > 0.0) || s_it == 0 {
        return fail(ThresholdFailure::NonPositiveBudget, None, Vec::new());
    }

    // Error that relative filtering finishes regardless of the outcome, and
    // what is left of the final allowance once it and earlier finished error
    // are paid for.
    let forced: Vec<bool> = flags.0.iter().map(|&a| !a).collect();
    let forced_error = reduce::masked_sum(errors, &forced);
    let reserve = v_tot.abs() * tau_rel - (e_tot - e_it) - forced_error;
    if limits.reserve_guard && !(reserve > 0.0) {
        return fail(ThresholdFailure::NoReserve, None, Vec::new());
    }

    let (min_err, max_err) = reduce::min_max(errors);
    let mut st = ThresholdState {
        t: (e_it / s_it as f64).max(min_err).min(max_err),
        min_err,
        max_err,
        p_max: limits.p_max_start,
        direction_changes: 0,
        attempts: 0,
    };
    let mut probes = Vec::new();
    let mut last: Option<Direction> = None;
    loop {
        st.attempts += 1;
        let keep: Vec<bool> = reduce::map_indexed(errors.len(), |j| flags.0[j] && !(errors[j] < st.t));
        let finished: Vec<bool> = keep.iter().map(|&k| !k).collect();
        let finished_count = s_it - reduce::count(&keep);
        let finished_error = reduce::masked_sum(errors, &finished);
        probes.push(ThresholdProbe { t: st.t, p_max: st.p_max, finished_count, finished_error });

        let memory_ok = 2 * finished_count > s_it;
        let accuracy_ok =
            finished_error <= st.p_max * error_budget && (!limits.reserve_guard || finished_error - forced_error <= st.p_max * reserve);
        if memory_ok && accuracy_ok {
            return ThresholdReport { flags: ClassifyFlags(keep), failure: None, error_budget, state: Some(st), probes };
        }

        let dir = if memory_ok { Direction::TowardMin } else { Direction::TowardMax };
        if last.is_some_and(|d| d != dir) {
            if st.direction_changes == limits.direction_changes {
                return fail(ThresholdFailure::DirectionLimit, Some(st), probes);
            }
            st.direction_changes += 1;
            st.p_max = (st.p_max + limits.p_max_step).min(limits.p_max_cap);
        }
        last = Some(dir);
        if st.attempts >= limits.attempts {
            return fail(ThresholdFailure::AttemptLimit, Some(st), probes);
        }
        st.t = match dir {
            Direction::TowardMax => st.t + 0.5 * (st.max_err - st.t),
            Direction::TowardMin => st.t - 0.5 * (st.t - st.min_err),
        };
    }
}

/// Compacts the batch down to its active regions, preserving order.
///
/// Returns the compacted batch with the summed estimates and errors of the
/// regions that were removed.
pub fn filter(batch: &RegionBatch, flags: &ClassifyFlags) -> (RegionBatch, f64, f64) {
    assert_eq!(batch.len(), flags.len(), "filter: flag count differs from batch");
    let keep = flags.as_slice();
    let finished: Vec<bool> = keep.iter().map(|&k| !k).collect();
    let finished_v = reduce::masked_sum(&batch.estimates, &finished);
    let finished_e = reduce::masked_sum(&batch.errors, &finished);

    let (offsets, total) = reduce::compaction_offsets(keep);
    let mut kept = vec![0usize; total];
    for (j, &k) in keep.iter().enumerate() {
        if k {
            kept[offsets[j]] = j;
        }
    }

    let dim = batch.dim;
    let mut lows = vec![0.0; total * dim];
    let mut lengths = vec![0.0; total * dim];
    reduce::for_each_chunk_mut(&mut lows, dim.max(1), |k, out| out.copy_from_slice(batch.low(kept[k])));
    reduce::for_each_chunk_mut(&mut lengths, dim.max(1), |k, out| out.copy_from_slice(batch.length(kept[k])));
    let gather = |src: &[f64]| -> Vec<f64> { kept.iter().map(|&j| src[j]).collect() };
    let out = RegionBatch {
        dim,
        lows,
        lengths,
        estimates: gather(&batch.estimates),
        errors: gather(&batch.errors),
        split_axis: kept.iter().map(|&j| batch.split_axis[j]).collect(),
        active: vec![true; total],
        parent_estimates: gather(&batch.parent_estimates),
        parent_errors: gather(&batch.parent_errors),
    };
    (out, finished_v, finished_e)
}
