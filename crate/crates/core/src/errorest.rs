//! Two-level error refinement.
//!
//! After a bisection, the parent's estimate and the sum of its two children
//! are two approximations of the same integral; their difference is evidence
//! about the children's error.
//!
//! * [`ClampRefiner`] shrinks the raw errors when parent and children agree,
//!   bounded below so a single lucky agreement cannot collapse a claim.
//! * [`InflatingRefiner`] (the default) never shrinks, and grows the raw
//!   errors when parent and children disagree. The null rules can be
//!   optimistic on sharply peaked integrands, and errors claimed by finished
//!   regions are never revisited, so the drivers prefer the safe side.

use crate::error::{Error, Result};
use crate::geometry::sibling;
use crate::reduce;

/// Refines raw per-region errors using parent and sibling estimates.
///
/// Entries `j` and `j ^ 1` must be siblings sharing the same parent fields.
pub trait ErrorRefiner: Send + Sync {
    fn refine(&self, estimates: &[f64], raw: &[f64], parent_estimates: &[f64], parent_errors: &[f64]) -> Result<Vec<f64>>;
}

/// `E[j] = E_raw[j] * clamp(|V_parent − (V[j] + V[s])| / (E_raw[j] + E_raw[s]), floor, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampRefiner {
    pub floor: f64,
}

impl Default for ClampRefiner {
    fn default() -> Self {
        Self { floor: 0.125 }
    }
}

impl ErrorRefiner for ClampRefiner {
    fn refine(&self, estimates: &[f64], raw: &[f64], parent_estimates: &[f64], parent_errors: &[f64]) -> Result<Vec<f64>> {
        two_level_refine(estimates, raw, parent_estimates, parent_errors, self.floor)
    }
}

/// Inflates errors where parent and children disagree.
///
/// With `Δ = |V_parent − (V[j] + V[s])|` and `c = 1 + 2Δ / (E_raw[j] + E_raw[s])`,
/// `E[j] = c·(E_raw[j] + Δ/4)`. Never below the raw error; useful when the
/// null rules are too optimistic on sharply peaked integrands.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InflatingRefiner;

impl ErrorRefiner for InflatingRefiner {
    fn refine(&self, estimates: &[f64], raw: &[f64], parent_estimates: &[f64], parent_errors: &[f64]) -> Result<Vec<f64>> {
        check_pairs(estimates, raw, parent_estimates, parent_errors)?;
        Ok(reduce::map_indexed(estimates.len(), |j| {
            let s = sibling(j);
            let delta = (parent_estimates[j] - (estimates[j] + estimates[s])).abs();
            if !delta.is_finite() || delta == 0.0 {
                return raw[j];
            }
            let pair = raw[j] + raw[s];
            let c = if pair > 0.0 { 1.0 + 2.0 * delta / pair } else { 1.0 };
            c * (raw[j] + 0.25 * delta)
        }))
    }
}

fn check_pairs(estimates: &[f64], raw: &[f64], parent_estimates: &[f64], parent_errors: &[f64]) -> Result<()> {
    let m = estimates.len();
    check_len("raw errors", raw.len(), m)?;
    check_len("parent estimates", parent_estimates.len(), m)?;
    check_len("parent errors", parent_errors.len(), m)?;
    if !m.is_multiple_of(2) {
        return Err(Error::LengthMismatch { what: "sibling pairs", got: m, expected: m + 1 });
    }
    Ok(())
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { what, got, expected })
    }
}

pub fn two_level_refine(estimates: &[f64], raw: &[f64], parent_estimates: &[f64], parent_errors: &[f64], floor: f64) -> Result<Vec<f64>> {
    check_pairs(estimates, raw, parent_estimates, parent_errors)?;
    Ok(reduce::map_indexed(estimates.len(), |j| {
        let s = sibling(j);
        let pair = raw[j] + raw[s];
        if pair == 0.0 {
            return raw[j];
        }
        let delta = (parent_estimates[j] - (estimates[j] + estimates[s])).abs();
        let factor = (delta / pair).clamp(floor, 1.0);
        // NaN deltas (non-finite parents) leave the raw error alone.
        if factor.is_nan() {
            raw[j]
        } else {
            raw[j] * factor
        }
    }))
}
