//! Degree-7 Genz–Malik cubature with four embedded null rules.
//!
//! The rule lives on the unit cube centred at 1/2. Its points fall into five
//! fully symmetric orbits, with generator magnitudes measured in units of the
//! half-width:
//!
//! | orbit  | points                        | count          |
//! |--------|-------------------------------|----------------|
//! | centre | `c`                           | 1              |
//! | axis 2 | `c ± λ₂ eᵢ`                   | 2n             |
//! | axis 3 | `c ± λ₃ eᵢ`                   | 2n             |
//! | pair   | `c ± λ₄ eᵢ ± λ₄ eⱼ`, `i < j`  | 2n(n−1)        |
//! | corner | `c + λ₅ (±1, …, ±1)`          | 2ⁿ             |
//!
//! Weights are not tabulated: they are solved from the moment equations of
//! the cube when the table is built, and the exactness tests check the result.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::geometry::{check_dim, RegionBatch, MAX_DIM};
use crate::reduce;

pub const ORBITS: usize = 5;
pub const RULES: usize = 5;

const CENTER: usize = 0;
const AXIS2: usize = 1;
const AXIS3: usize = 2;
const PAIR: usize = 3;
const CORNER: usize = 4;

const LAMBDA2_SQ: f64 = 9.0 / 70.0;
const LAMBDA3_SQ: f64 = 9.0 / 10.0;
const LAMBDA4_SQ: f64 = 9.0 / 10.0;
const LAMBDA5_SQ: f64 = 9.0 / 19.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    Center,
    Axis,
    Pair,
    Corner,
}

/// One generator: an orbit shape and its magnitude relative to the half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub kind: OrbitKind,
    pub lambda: f64,
}

/// How the four null-rule magnitudes are turned into one raw error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorRule {
    /// Largest of the four null-rule magnitudes.
    MaxNull,
    /// Use the degree-5 null rule alone once the null sequence decays
    /// geometrically (the region is resolved); otherwise the largest of the
    /// four. This is the decay test used by the Cuhre family.
    #[default]
    Cascade,
}

/// Ratio the null-rule magnitudes must drop by, level to level, before the
/// cascade trusts the highest-degree one on its own.
const CASCADE_RATIO: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct RuleTable {
    dim: usize,
    generators: [Generator; ORBITS],
    /// `point_count × dim`, row-major, coordinates in `[0, 1]`.
    points: Vec<f64>,
    orbit_of: Vec<usize>,
    /// Per-point weights: the integration rule, then the four null rules.
    weight_sets: [Vec<f64>; RULES],
    /// Per-point weight for each orbit, indexed `[rule][orbit]`.
    orbit_weights: [[f64; ORBITS]; RULES],
    /// Per axis: indices of `c + λ₂eᵢ`, `c − λ₂eᵢ`, `c + λ₃eᵢ`, `c − λ₃eᵢ`.
    axis_probe_indices: Vec<[usize; 4]>,
}

/// `2^n + 2n(n−1) + 4n + 1`.
pub fn point_count(dim: usize) -> usize {
    (1usize << dim) + 2 * dim * (dim - 1) + 4 * dim + 1
}

/// Orbit points in centred coordinates `[-1, 1]^n`.
fn orbit_points(dim: usize, orbit: usize, lambda: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    match orbit {
        CENTER => out.push(vec![0.0; dim]),
        AXIS2 | AXIS3 => {
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    let mut p = vec![0.0; dim];
                    p[i] = s * lambda;
                    out.push(p);
                }
            }
        }
        PAIR => {
            for i in 0..dim {
                for j in i + 1..dim {
                    for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        let mut p = vec![0.0; dim];
                        p[i] = si * lambda;
                        p[j] = sj * lambda;
                        out.push(p);
                    }
                }
            }
        }
        CORNER => {
            for mask in 0..(1usize << dim) {
                out.push((0..dim).map(|k| if mask >> k & 1 == 1 { lambda } else { -lambda }).collect());
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Exponent patterns of the fully symmetric even monomials of total degree
/// `<= degree` that exist in `dim` variables.
fn symmetric_patterns(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(max_part: u32, remaining: u32, cur: &mut Vec<u32>, dim: usize, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if cur.len() == dim {
            return;
        }
        let mut part = 2;
        while part <= max_part.min(remaining) {
            cur.push(part);
            rec(part, remaining - part, cur, dim, out);
            cur.pop();
            part += 2;
        }
    }
    let mut out = Vec::new();
    rec(degree as u32, degree as u32, &mut Vec::new(), dim, &mut out);
    out
}

fn monomial(point: &[f64], pattern: &[u32]) -> f64 {
    pattern.iter().enumerate().map(|(k, &e)| point[k].powi(e as i32)).product()
}

/// Mean of the monomial over `[-1, 1]^n`.
fn cube_moment(pattern: &[u32]) -> f64 {
    pattern.iter().map(|&e| 1.0 / (e as f64 + 1.0)).product()
}

/// Per-point orbit weights for a rule that reproduces the cube moments of all
/// `patterns`, using only the orbits in `support`.
fn solve_weights(
    orbit_sets: &[Vec<Vec<f64>>; ORBITS],
    support: &[usize],
    patterns: &[Vec<u32>],
    rhs: impl Fn(&[u32]) -> f64,
) -> [f64; ORBITS] {
    let a = DMatrix::from_fn(patterns.len(), support.len(), |r, c| {
        orbit_sets[support[c]].iter().map(|p| monomial(p, &patterns[r])).sum::<f64>()
    });
    let b = DVector::from_fn(patterns.len(), |r, _| rhs(&patterns[r]));
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13).expect("SVD solve with both factors computed");
    let residual = (&a * &x - &b).amax();
    assert!(residual < 1e-12, "moment system inconsistent (residual {residual:e})");
    let mut w = [0.0; ORBITS];
    for (c, &o) in support.iter().enumerate() {
        w[o] = x[c];
    }
    w
}

/// A vector in the span of `support` annihilating the constant and the
/// quadratic moments (a degree-3 null rule). Unique up to scale for three
/// supporting orbits.
fn degree3_null(orbit_sets: &[Vec<Vec<f64>>; ORBITS], support: [usize; 3]) -> [f64; ORBITS] {
    let row = |pattern: &[u32]| -> [f64; 3] { support.map(|o| orbit_sets[o].iter().map(|p| monomial(p, pattern)).sum::<f64>()) };
    let (r0, r1) = (row(&[]), row(&[2]));
    let cross = [r0[1] * r1[2] - r0[2] * r1[1], r0[2] * r1[0] - r0[0] * r1[2], r0[0] * r1[1] - r0[1] * r1[0]];
    let mut w = [0.0; ORBITS];
    for (k, &o) in support.iter().enumerate() {
        w[o] = cross[k];
    }
    w
}

impl RuleTable {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let lambdas = [0.0, LAMBDA2_SQ.sqrt(), LAMBDA3_SQ.sqrt(), LAMBDA4_SQ.sqrt(), LAMBDA5_SQ.sqrt()];
        let generators = [
            Generator { kind: OrbitKind::Center, lambda: 0.0 },
            Generator { kind: OrbitKind::Axis, lambda: lambdas[AXIS2] },
            Generator { kind: OrbitKind::Axis, lambda: lambdas[AXIS3] },
            Generator { kind: OrbitKind::Pair, lambda: lambdas[PAIR] },
            Generator { kind: OrbitKind::Corner, lambda: lambdas[CORNER] },
        ];
        let orbit_sets: [Vec<Vec<f64>>; ORBITS] = std::array::from_fn(|o| orbit_points(dim, o, lambdas[o]));
        let sizes: [f64; ORBITS] = std::array::from_fn(|o| orbit_sets[o].len() as f64);

        let degree7 = solve_weights(&orbit_sets, &[CENTER, AXIS2, AXIS3, PAIR, CORNER], &symmetric_patterns(dim, 7), cube_moment);
        let degree5 = solve_weights(&orbit_sets, &[CENTER, AXIS2, AXIS3, PAIR], &symmetric_patterns(dim, 5), cube_moment);

        let mut nulls = [[0.0; ORBITS]; 4];
        nulls[0] = std::array::from_fn(|o| degree7[o] - degree5[o]);
        nulls[1] = degree3_null(&orbit_sets, [CENTER, AXIS2, AXIS3]);
        nulls[2] = degree3_null(&orbit_sets, [CENTER, AXIS2, CORNER]);
        nulls[3][CENTER] = 1.0;
        nulls[3][CORNER] = -1.0 / sizes[CORNER];

        // Lower-degree null rules are scaled to the point norm of the first.
        let norm = |w: &[f64; ORBITS]| (0..ORBITS).map(|o| sizes[o] * w[o] * w[o]).sum::<f64>().sqrt();
        let target = norm(&nulls[0]);
        for null in nulls.iter_mut().skip(1) {
            let s = target / norm(null);
            null.iter_mut().for_each(|w| *w *= s);
        }

        let mut orbit_weights = [degree7, nulls[0], nulls[1], nulls[2], nulls[3]];
        // Re-derive the centre weight from the constant moment so the weight
        // sums are exact to rounding rather than to the solver's tolerance.
        for (r, w) in orbit_weights.iter_mut().enumerate() {
            let target = if r == 0 { 1.0 } else { 0.0 };
            w[CENTER] = target - (1..ORBITS).map(|o| sizes[o] * w[o]).sum::<f64>();
        }

        let n_points = point_count(dim);
        let mut points = Vec::with_capacity(n_points * dim);
        let mut orbit_of = Vec::with_capacity(n_points);
        for (o, set) in orbit_sets.iter().enumerate() {
            for p in set {
                points.extend(p.iter().map(|y| 0.5 + 0.5 * y));
                orbit_of.push(o);
            }
        }
        assert_eq!(orbit_of.len(), n_points);
        let weight_sets = std::array::from_fn(|r| orbit_of.iter().map(|&o| orbit_weights[r][o]).collect());

        // Axis orbits are laid out as (+e0, -e0, +e1, -e1, ...).
        let axis2_start = 1;
        let axis3_start = 1 + 2 * dim;
        let axis_probe_indices =
            (0..dim).map(|i| [axis2_start + 2 * i, axis2_start + 2 * i + 1, axis3_start + 2 * i, axis3_start + 2 * i + 1]).collect();

        Ok(Self { dim, generators, points, orbit_of, weight_sets, orbit_weights, axis_probe_indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point_count(&self) -> usize {
        self.orbit_of.len()
    }

    pub fn generators(&self) -> &[Generator; ORBITS] {
        &self.generators
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn orbit_of(&self, k: usize) -> usize {
        self.orbit_of[k]
    }

    /// Rule 0 integrates; rules 1..=4 are null rules.
    pub fn weights(&self, rule: usize) -> &[f64] {
        &self.weight_sets[rule]
    }

    pub fn orbit_weights(&self) -> &[[f64; ORBITS]; RULES] {
        &self.orbit_weights
    }

    pub fn axis_probe_indices(&self) -> &[[usize; 4]] {
        &self.axis_probe_indices
    }
}

pub fn build_rule(dim: usize) -> Result<RuleTable> {
    RuleTable::new(dim)
}

/// The rule applied to one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEval {
    pub estimate: f64,
    /// Signed null-rule values, already scaled by the region volume.
    pub nulls: [f64; 4],
    pub split_axis: usize,
    /// False if any integrand value was NaN or infinite.
    pub finite: bool,
}

impl RegionEval {
    pub fn raw_error(&self, rule: ErrorRule) -> f64 {
        if !self.finite {
            return f64::INFINITY;
        }
        let n = self.nulls.map(f64::abs);
        match rule {
            ErrorRule::MaxNull => n.iter().fold(0.0, |a: f64, &b| a.max(b)),
            ErrorRule::Cascade => {
                let (r1, r2, r3) = (n[0], n[1].max(n[2]), n[3]);
                if CASCADE_RATIO * r1 <= r2 && CASCADE_RATIO * r2 <= r3 {
                    r1
                } else {
                    r1.max(r2).max(r3)
                }
            }
        }
    }
}

/// Applies the rule to the box `[low, low + length]`.
///
/// Point sums are accumulated orbit by orbit in a fixed order, so the result
/// does not depend on which worker runs it.
pub fn evaluate_region<F>(f: &F, rule: &RuleTable, low: &[f64], length: &[f64]) -> RegionEval
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let dim = rule.dim;
    let mut center = [0.0; MAX_DIM];
    let mut half = [0.0; MAX_DIM];
    for i in 0..dim {
        half[i] = 0.5 * length[i];
        center[i] = low[i] + half[i];
    }
    let lam = rule.generators.map(|g| g.lambda);
    let mut finite = true;
    let mut call = |x: &[f64]| {
        let v = f(x);
        finite &= v.is_finite();
        v
    };

    let mut x = center;
    let f0 = call(&x[..dim]);

    let mut sums = [0.0; ORBITS];
    sums[CENTER] = f0;
    let mut best_axis = 0;
    let mut best_diff = f64::NEG_INFINITY;
    let ratio = LAMBDA2_SQ / LAMBDA3_SQ;
    for i in 0..dim {
        let probe = |x: &mut [f64; MAX_DIM], d: f64, call: &mut dyn FnMut(&[f64]) -> f64| {
            x[i] = center[i] + d;
            let v = call(&x[..dim]);
            x[i] = center[i];
            v
        };
        let p2 = probe(&mut x, lam[AXIS2] * half[i], &mut call);
        let m2 = probe(&mut x, -lam[AXIS2] * half[i], &mut call);
        let p3 = probe(&mut x, lam[AXIS3] * half[i], &mut call);
        let m3 = probe(&mut x, -lam[AXIS3] * half[i], &mut call);
        sums[AXIS2] += p2 + m2;
        sums[AXIS3] += p3 + m3;
        let diff = ((p2 + m2 - 2.0 * f0) - ratio * (p3 + m3 - 2.0 * f0)).abs();
        // Equal differences (typically all zero, when the probes miss a
        // feature entirely) go to the widest edge, so such a region is not
        // halved along one axis forever.
        if diff > best_diff || (diff == best_diff && half[i] > half[best_axis]) {
            best_diff = diff;
            best_axis = i;
        }
    }

    for i in 0..dim {
        let di = lam[PAIR] * half[i];
        for j in i + 1..dim {
            let dj = lam[PAIR] * half[j];
            for (si, sj) in [(di, dj), (di, -dj), (-di, dj), (-di, -dj)] {
                x[i] = center[i] + si;
                x[j] = center[j] + sj;
                sums[PAIR] += call(&x[..dim]);
            }
            x[j] = center[j];
        }
        x[i] = center[i];
    }

    // Gray-code walk over the corners: one coordinate flips per step.
    let mut signs = 0usize;
    for k in 0..dim {
        x[k] = center[k] - lam[CORNER] * half[k];
    }
    sums[CORNER] += call(&x[..dim]);
    for step in 1..(1usize << dim) {
        let k = step.trailing_zeros() as usize;
        signs ^= 1 << k;
        let s = if signs >> k & 1 == 1 { 1.0 } else { -1.0 };
        x[k] = center[k] + s * lam[CORNER] * half[k];
        sums[CORNER] += call(&x[..dim]);
    }

    let volume: f64 = length[..dim].iter().product();
    let apply = |r: usize| -> f64 {
        let w = &rule.orbit_weights[r];
        volume * (w[0] * sums[0] + w[1] * sums[1] + w[2] * sums[2] + w[3] * sums[3] + w[4] * sums[4])
    };
    RegionEval { estimate: apply(0), nulls: [apply(1), apply(2), apply(3), apply(4)], split_axis: best_axis, finite }
}

/// Per-region results of one batch evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    pub estimates: Vec<f64>,
    pub raw_errors: Vec<f64>,
    pub split_axes: Vec<usize>,
    /// Regions where the integrand returned a non-finite value.
    pub nonfinite: Vec<bool>,
    pub eval_count: u64,
}

/// Evaluates every region of the batch independently.
pub fn evaluate_batch<F>(f: &F, batch: &RegionBatch, rule: &RuleTable, error_rule: ErrorRule) -> EvalOutput
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    assert_eq!(rule.dim(), batch.dim, "rule and batch dimensions differ");
    let m = batch.len();
    let evals = reduce::map_indexed(m, |j| evaluate_region(f, rule, batch.low(j), batch.length(j)));
    let mut out = EvalOutput {
        estimates: Vec::with_capacity(m),
        raw_errors: Vec::with_capacity(m),
        split_axes: Vec::with_capacity(m),
        nonfinite: Vec::with_capacity(m),
        eval_count: (m * rule.point_count()) as u64,
    };
    for r in evals {
        out.estimates.push(r.estimate);
        out.raw_errors.push(r.raw_error(error_rule));
        out.split_axes.push(r.split_axis);
        out.nonfinite.push(!r.finite);
    }
    out
}
