//! Reference quadratures that share no code with the cubature path.
//!
//! These exist to produce and check reference values: Gauss–Legendre nodes
//! computed by Newton iteration, an adaptive 1D Gauss rule, a tensor-product
//! Gauss rule that exploits coordinate symmetry, and exact rational
//! expansions for polynomial box integrals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `q`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for k in 0..q {
        // Chebyshev-like initial guess for the k-th root on [-1, 1].
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for n in 2..=q {
                let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if q == 1 { x } else { p1 };
            let pm1 = if q == 1 { 1.0 } else { p0 };
            dp = q as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[k] = 0.5 * (1.0 - x);
        weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Adaptive bisection with 10- and 20-point Gauss rules on each piece.
pub fn adaptive_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let low = gauss_legendre(10);
    let high = gauss_legendre(20);
    let rule = |(n, w): &(Vec<f64>, Vec<f64>), a: f64, b: f64| -> f64 {
        (b - a) * n.iter().zip(w).map(|(x, w)| w * f(a + (b - a) * x)).sum::<f64>()
    };
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = rule(&low, lo, hi);
        let fine = rule(&high, lo, hi);
        // Per-piece share of the tolerance, floored at what roundoff allows.
        let rel = (tol * (hi - lo) / (b - a)).max(64.0 * f64::EPSILON);
        if (fine - coarse).abs() <= rel * fine.abs().max(f64::MIN_POSITIVE) || depth >= 40 {
            total += fine;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// Tensor-product Gauss rule with `q` nodes per axis on `[0, 1]^dim`, for an
/// integrand invariant under permutations of its coordinates.
///
/// Only non-decreasing node-index tuples are visited, each weighted by the
/// number of its distinct permutations.
pub fn symmetric_tensor_gauss<F: Fn(&[f64]) -> f64>(f: &F, dim: usize, q: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(q);
    let mut factorial = vec![1.0f64; dim + 1];
    for k in 1..=dim {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut total = 0.0;
    loop {
        let mut w = factorial[dim];
        let mut run = 1;
        for k in 0..dim {
            x[k] = nodes[idx[k]];
            w *= weights[idx[k]];
            if k > 0 && idx[k] == idx[k - 1] {
                run += 1;
            } else {
                run = 1;
            }
            w /= run as f64;
        }
        total += w * f(&x);

        // Next non-decreasing tuple.
        let mut k = dim;
        loop {
            if k == 0 {
                return total;
            }
            k -= 1;
            if idx[k] + 1 < q {
                idx[k] += 1;
                for r in k + 1..dim {
                    idx[r] = idx[k];
                }
                break;
            }
        }
    }
}

/// Escalates `q` until two successive symmetric tensor estimates agree to
/// `rel_tol`. Returns the finer estimate and the `q` that produced it.
pub fn escalating_tensor_gauss<F: Fn(&[f64]) -> f64>(f: &F, dim: usize, rel_tol: f64, q_start: usize, q_max: usize) -> (f64, usize) {
    let mut q = q_start;
    let mut prev = symmetric_tensor_gauss(f, dim, q);
    while q < q_max {
        q += 4;
        let next = symmetric_tensor_gauss(f, dim, q);
        if (next - prev).abs() <= rel_tol * next.abs() {
            return (next, q);
        }
        prev = next;
    }
    (prev, q)
}

/// `∫_{[0,1]^dim} (Σ xᵢ²)^power dx` exactly, by multinomial expansion.
pub fn box_power_exact(dim: usize, power: u32) -> BigRational {
    fn rec(axis: usize, dim: usize, left: u32, coeff: &BigRational, acc: &mut BigRational, fact: &[BigInt]) {
        if axis + 1 == dim {
            // Last axis takes the remainder.
            let term = coeff / BigRational::from_integer(fact[left as usize].clone())
                * BigRational::new(BigInt::one(), BigInt::from(2 * left + 1));
            *acc += term;
            return;
        }
        for k in 0..=left {
            let c = coeff / BigRational::from_integer(fact[k as usize].clone()) * BigRational::new(BigInt::one(), BigInt::from(2 * k + 1));
            rec(axis + 1, dim, left - k, &c, acc, fact);
        }
    }
    let mut fact = vec![BigInt::one()];
    for k in 1..=power {
        let next = &fact[k as usize - 1] * BigInt::from(k);
        fact.push(next);
    }
    let mut acc = BigRational::zero();
    let lead = BigRational::from_integer(fact[power as usize].clone());
    rec(0, dim, power, &lead, &mut acc, &fact);
    acc
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}
