//! Axis-aligned hyperrectangles stored as a structure-of-arrays batch.
//!
//! A region is a `(low, length)` pair per axis. Halving a length is exact in
//! binary floating point, so repeated bisection keeps children abutting
//! exactly until the length underflows.

use crate::error::{Error, Result};
use crate::reduce;

/// Hard cap on the dimension; the corner orbit of the rule has `2^n` points.
pub const MAX_DIM: usize = 16;

/// Integration domain `[lower[i], upper[i]]` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!("{} lower bounds but {} upper bounds", lower.len(), upper.len())));
        }
        check_dim(lower.len())?;
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidBounds(format!("axis {i}: [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^n`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    /// Maps a unit-cube point into the domain.
    pub fn map_from_unit(&self, unit: &[f64], out: &mut [f64]) {
        for i in 0..self.dim() {
            out[i] = self.lower[i] + self.extent(i) * unit[i];
        }
    }

    pub fn is_unit(&self) -> bool {
        self.lower.iter().all(|&lo| lo == 0.0) && self.upper.iter().all(|&hi| hi == 1.0)
    }
}

/// An integrand over a [`Bounds`] seen as an integrand over the unit cube:
/// `g(u) = |J|·f(lower + extent·u)`.
///
/// Regions are tracked in unit coordinates; this is evaluated once per rule
/// point, so the map is precomputed and skipped entirely for the unit cube.
pub struct UnitPullback<'a, F: ?Sized> {
    f: &'a F,
    dim: usize,
    lower: [f64; MAX_DIM],
    extent: [f64; MAX_DIM],
    jacobian: f64,
    identity: bool,
}

impl<'a, F: Fn(&[f64]) -> f64 + ?Sized> UnitPullback<'a, F> {
    pub fn new(f: &'a F, bounds: &Bounds) -> Self {
        let dim = bounds.dim();
        let mut lower = [0.0; MAX_DIM];
        let mut extent = [0.0; MAX_DIM];
        for i in 0..dim {
            lower[i] = bounds.lower[i];
            extent[i] = bounds.extent(i);
        }
        Self { f, dim, lower, extent, jacobian: bounds.volume(), identity: bounds.is_unit() }
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> f64 {
        if self.identity {
            return (self.f)(u);
        }
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.dim {
            x[i] = self.lower[i] + self.extent[i] * u[i];
        }
        self.jacobian * (self.f)(&x[..self.dim])
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::DimensionOutOfRange(dim))
    } else {
        Ok(())
    }
}

/// The live region list together with its per-region bookkeeping.
///
/// Per-axis arrays are region-major: axis `i` of region `j` lives at
/// `j * dim + i`. After [`bisect`], the children of old region `j` sit at
/// `2j` and `2j + 1`, so the sibling of region `k` is `k ^ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBatch {
    pub dim: usize,
    pub lows: Vec<f64>,
    pub lengths: Vec<f64>,
    pub estimates: Vec<f64>,
    pub errors: Vec<f64>,
    pub split_axis: Vec<usize>,
    pub active: Vec<bool>,
    pub parent_estimates: Vec<f64>,
    pub parent_errors: Vec<f64>,
}

impl RegionBatch {
    /// A batch of `count` regions with zeroed estimates, all active.
    pub fn with_geometry(dim: usize, lows: Vec<f64>, lengths: Vec<f64>) -> Self {
        assert_eq!(lows.len(), lengths.len());
        assert_eq!(lows.len() % dim, 0);
        let count = lows.len() / dim;
        Self {
            dim,
            lows,
            lengths,
            estimates: vec![0.0; count],
            errors: vec![0.0; count],
            split_axis: vec![0; count],
            active: vec![true; count],
            parent_estimates: vec![0.0; count],
            parent_errors: vec![0.0; count],
        }
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn low(&self, j: usize) -> &[f64] {
        &self.lows[j * self.dim..(j + 1) * self.dim]
    }

    pub fn length(&self, j: usize) -> &[f64] {
        &self.lengths[j * self.dim..(j + 1) * self.dim]
    }

    pub fn volume(&self, j: usize) -> f64 {
        self.length(j).iter().product()
    }

    pub fn total_volume(&self) -> f64 {
        reduce::sum_by(self.len(), &|j| self.volume(j))
    }

    /// Whether region `j` lies within `bounds` (inclusive).
    pub fn contained_in(&self, j: usize, bounds: &Bounds) -> bool {
        let (low, len) = (self.low(j), self.length(j));
        (0..self.dim).all(|i| low[i] >= bounds.lower()[i] && low[i] + len[i] <= bounds.upper()[i] && len[i] > 0.0)
    }
}

/// Index of the region sharing a parent with `j`.
#[inline]
pub fn sibling(j: usize) -> usize {
    j ^ 1
}

/// Largest `d` with `d^n <= init_target`, floored at 2 while `2^n` still fits.
pub fn initial_split_factor(dim: usize, init_target: usize) -> usize {
    let fits = |d: usize| (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(d)).is_some_and(|p| p <= init_target);
    let mut d = 1;
    while fits(d + 1) {
        d += 1;
    }
    d
}

/// Splits every axis of `bounds` into `d` equal parts, producing `d^n` regions.
pub fn uniform_split(bounds: &Bounds, d: usize, max_regions: usize) -> Result<RegionBatch> {
    let dim = bounds.dim();
    if d == 0 {
        return Err(Error::InvalidConfig("split factor must be at least 1".into()));
    }
    let count = (0..dim)
        .try_fold(1usize, |acc, _| acc.checked_mul(d))
        .filter(|&c| c <= max_regions)
        .ok_or(Error::Capacity { requested: d.saturating_pow(dim as u32), limit: max_regions })?;

    let step: Vec<f64> = (0..dim).map(|i| bounds.extent(i) / d as f64).collect();
    let mut lows = vec![0.0; count * dim];
    let mut lengths = vec![0.0; count * dim];
    for j in 0..count {
        let mut rest = j;
        for i in 0..dim {
            let k = rest % d;
            rest /= d;
            lows[j * dim + i] = bounds.lower()[i] + k as f64 * step[i];
            lengths[j * dim + i] = step[i];
        }
    }
    Ok(RegionBatch::with_geometry(dim, lows, lengths))
}

/// Halves every region along its `split_axis`.
///
/// Children inherit the parent's estimate and error as their parent fields.
pub fn bisect(batch: &RegionBatch, max_regions: usize) -> Result<RegionBatch> {
    let dim = batch.dim;
    let m = batch.len();
    if 2 * m > max_regions {
        return Err(Error::Capacity { requested: 2 * m, limit: max_regions });
    }
    debug_assert!(batch.active.iter().all(|&a| a), "bisect expects a filtered batch");

    let mut lows = vec![0.0; 2 * m * dim];
    let mut lengths = vec![0.0; 2 * m * dim];
    reduce::for_each_chunk_mut(&mut lows, 2 * dim, |j, out| {
        let axis = batch.split_axis[j];
        let (low, len) = (batch.low(j), batch.length(j));
        out[..dim].copy_from_slice(low);
        out[dim..].copy_from_slice(low);
        out[dim + axis] = low[axis] + 0.5 * len[axis];
    });
    reduce::for_each_chunk_mut(&mut lengths, 2 * dim, |j, out| {
        let axis = batch.split_axis[j];
        let len = batch.length(j);
        out[..dim].copy_from_slice(len);
        out[dim..].copy_from_slice(len);
        out[axis] *= 0.5;
        out[dim + axis] *= 0.5;
    });

    let mut children = RegionBatch::with_geometry(dim, lows, lengths);
    for j in 0..m {
        for c in [2 * j, 2 * j + 1] {
            children.parent_estimates[c] = batch.estimates[j];
            children.parent_errors[c] = batch.errors[j];
            children.split_axis[c] = batch.split_axis[j];
        }
    }
    Ok(children)
}
