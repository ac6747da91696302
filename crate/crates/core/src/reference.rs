//! Sequential depth-first reference integrator.
//!
//! Keeps every region in a max-heap keyed by its error estimate, and
//! repeatedly bisects the worst one along its stored split axis. Uses the same
//! cubature rule and two-level error refinement as the breadth-first driver,
//! so differences between the two isolate the region-selection policy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cubature::{build_rule, evaluate_region, ErrorRule, RegionEval, RuleTable};
use crate::driver::{IntegrationResult, Status};
use crate::error::{Error, Result};
use crate::errorest::{ErrorRefiner, InflatingRefiner};
use crate::geometry::{Bounds, UnitPullback};
use crate::reduce;

/// Evaluation cap used when callers have no better figure.
pub const DEFAULT_MAX_EVALS: u64 = 10_000_000;

/// Pops between exact re-summations of the running totals.
const RESUM_INTERVAL: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct HeapRegion {
    pub low: Vec<f64>,
    pub length: Vec<f64>,
    pub estimate: f64,
    pub error: f64,
    pub split_axis: usize,
    /// Creation order; breaks ties between equal errors deterministically.
    pub seq: u64,
}

impl Eq for HeapRegion {}

impl Ord for HeapRegion {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for HeapRegion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Max-priority collection of regions keyed by error estimate.
#[derive(Debug, Clone, Default)]
pub struct RegionHeap {
    heap: BinaryHeap<HeapRegion>,
}

impl RegionHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, region: HeapRegion) {
        self.heap.push(region);
    }

    /// Removes the region with the largest error.
    pub fn pop(&mut self) -> Option<HeapRegion> {
        self.heap.pop()
    }

    pub fn peek(&self) -> Option<&HeapRegion> {
        self.heap.peek()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Exact totals `(Σ estimate, Σ error)` in a fixed order.
    pub fn totals(&self) -> (f64, f64) {
        let mut items: Vec<(u64, f64, f64)> = self.heap.iter().map(|r| (r.seq, r.estimate, r.error)).collect();
        items.sort_unstable_by_key(|t| t.0);
        let est: Vec<f64> = items.iter().map(|t| t.1).collect();
        let err: Vec<f64> = items.iter().map(|t| t.2).collect();
        (reduce::sum(&est), reduce::sum(&err))
    }
}

struct Evaluator<'a, F> {
    pullback: UnitPullback<'a, F>,
    rule: RuleTable,
    evals: u64,
}

impl<F: Fn(&[f64]) -> f64> Evaluator<'_, F> {
    fn eval(&mut self, low: &[f64], length: &[f64]) -> RegionEval {
        let pullback = &self.pullback;
        self.evals += self.rule.point_count() as u64;
        evaluate_region(&|u: &[f64]| pullback.eval(u), &self.rule, low, length)
    }
}

pub fn integrate_sequential<F>(f: &F, bounds: &Bounds, tau_rel: f64, tau_abs: f64, max_evals: u64) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64,
{
    integrate_sequential_with(f, bounds, tau_rel, tau_abs, max_evals, ErrorRule::default())
}

pub fn integrate_sequential_with<F>(
    f: &F,
    bounds: &Bounds,
    tau_rel: f64,
    tau_abs: f64,
    max_evals: u64,
    error_rule: ErrorRule,
) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64,
{
    if !(tau_rel > 0.0 && tau_rel.is_finite()) {
        return Err(Error::InvalidConfig(format!("tau_rel must be positive, got {tau_rel}")));
    }
    if !(tau_abs >= 0.0) {
        return Err(Error::InvalidConfig(format!("tau_abs must be non-negative, got {tau_abs}")));
    }
    let dim = bounds.dim();
    let mut ev = Evaluator { pullback: UnitPullback::new(f, bounds), rule: build_rule(dim)?, evals: 0 };
    let refiner = InflatingRefiner;

    let low = vec![0.0; dim];
    let length = vec![1.0; dim];
    let root = ev.eval(&low, &length);
    let mut result = IntegrationResult {
        estimate: root.estimate,
        errorest: root.raw_error(error_rule),
        status: Status::MaxIterations,
        iterations: 0,
        regions_generated: 1,
        eval_count: ev.evals,
        threshold_invocations: 0,
        nonfinite_regions: 0,
    };
    if !root.finite {
        result.errorest = f64::INFINITY;
        result.status = Status::MemoryExhausted;
        result.nonfinite_regions = 1;
        return Ok(result);
    }

    let mut heap = RegionHeap::new();
    let mut seq = 0u64;
    heap.push(HeapRegion { low, length, estimate: root.estimate, error: result.errorest, split_axis: root.split_axis, seq });
    let (mut v, mut e) = (result.estimate, result.errorest);
    let converged = |v: f64, e: f64| e <= v.abs() * tau_rel || e <= tau_abs;

    loop {
        if converged(v, e) {
            // Running totals drift; confirm against an exact re-summation.
            (v, e) = heap.totals();
            if converged(v, e) {
                result.status = Status::Converged;
                break;
            }
        }
        if ev.evals >= max_evals {
            (v, e) = heap.totals();
            break;
        }
        let parent = heap.pop().expect("heap is never empty");
        let axis = parent.split_axis;
        let half = 0.5 * parent.length[axis];
        let mut children = [(parent.low.clone(), parent.length.clone()), (parent.low.clone(), parent.length.clone())];
        children[0].1[axis] = half;
        children[1].0[axis] += half;
        children[1].1[axis] = half;
        let evals = [ev.eval(&children[0].0, &children[0].1), ev.eval(&children[1].0, &children[1].1)];
        if evals.iter().any(|r| !r.finite) {
            result.nonfinite_regions = evals.iter().filter(|r| !r.finite).count();
            result.estimate = v;
            result.errorest = f64::INFINITY;
            result.status = Status::MemoryExhausted;
            result.eval_count = ev.evals;
            return Ok(result);
        }
        let est = [evals[0].estimate, evals[1].estimate];
        let raw = [evals[0].raw_error(error_rule), evals[1].raw_error(error_rule)];
        let errs = refiner.refine(&est, &raw, &[parent.estimate; 2], &[parent.error; 2])?;

        v += est[0] + est[1] - parent.estimate;
        e += errs[0] + errs[1] - parent.error;
        for (k, (low, length)) in children.into_iter().enumerate() {
            seq += 1;
            heap.push(HeapRegion { low, length, estimate: est[k], error: errs[k], split_axis: evals[k].split_axis, seq });
        }
        result.iterations += 1;
        result.regions_generated += 2;
        if result.iterations.is_multiple_of(RESUM_INTERVAL) {
            (v, e) = heap.totals();
        }
    }
    result.estimate = v;
    result.errorest = e;
    result.eval_count = ev.evals;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{lookup, IntegrandId};

    fn region(error: f64, seq: u64) -> HeapRegion {
        HeapRegion { low: vec![0.0], length: vec![1.0], estimate: error, error, split_axis: 0, seq }
    }

    #[test]
    fn heap_pops_maximum_error() {
        let mut h = RegionHeap::new();
        for (k, e) in [0.3, 2.0, 0.1, 2.0, 1.5].into_iter().enumerate() {
            h.push(region(e, k as u64));
        }
        let order: Vec<(f64, u64)> = std::iter::from_fn(|| h.pop()).map(|r| (r.error, r.seq)).collect();
        assert_eq!(order, vec![(2.0, 1), (2.0, 3), (1.5, 4), (0.3, 0), (0.1, 2)]);
    }

    #[test]
    fn constant_converges_after_first_evaluation() {
        let r = integrate_sequential(&|_: &[f64]| 1.0, &Bounds::unit(4).unwrap(), 1e-3, 1e-20, DEFAULT_MAX_EVALS).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.iterations, 0);
        assert!((r.estimate - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_budget_returns_initial_estimate() {
        let f = |x: &[f64]| IntegrandId::F3.eval(x);
        let r = integrate_sequential(&f, &Bounds::unit(3).unwrap(), 1e-9, 1e-20, 0).unwrap();
        assert_eq!(r.status, Status::MaxIterations);
        assert_eq!(r.regions_generated, 1);
        assert!(r.estimate.is_finite() && r.errorest > 0.0);
    }

    #[test]
    fn f3_three_dimensional() {
        let spec = lookup(IntegrandId::F3, 3).unwrap();
        let r = integrate_sequential(&|x: &[f64]| spec.eval(x), &Bounds::unit(3).unwrap(), 1e-3, 1e-20, DEFAULT_MAX_EVALS).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.estimate - spec.reference_value).abs() <= 1e-3 * spec.reference_value);
        assert!(r.errorest <= 1e-3 * r.estimate.abs());
    }

    #[test]
    fn nonfinite_is_reported() {
        let f = |x: &[f64]| if x[0] > 0.9 { f64::NAN } else { 1.0 };
        let r = integrate_sequential(&f, &Bounds::unit(2).unwrap(), 1e-3, 0.0, 1_000_000).unwrap();
        assert_eq!(r.status, Status::MemoryExhausted);
        assert!(r.errorest.is_infinite());
        assert_eq!(r.nonfinite_regions, 1);
    }

    #[test]
    fn invalid_tolerances_are_rejected() {
        let b = Bounds::unit(2).unwrap();
        assert!(integrate_sequential(&|_: &[f64]| 1.0, &b, 0.0, 0.0, 10).is_err());
        assert!(integrate_sequential(&|_: &[f64]| 1.0, &b, 1e-3, -1.0, 10).is_err());
    }
}
