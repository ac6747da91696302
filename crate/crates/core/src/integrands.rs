//! Fixed-parameter test integrands on the unit cube, with reference values.
//!
//! | id | integrand                                   |
//! |----|---------------------------------------------|
//! | f1 | `cos(Σ i·xᵢ)`                               |
//! | f2 | `Π (1/50² + (xᵢ − 1/2)²)⁻¹`                 |
//! | f3 | `(1 + Σ i·xᵢ)^(−d−1)`                       |
//! | f4 | `exp(−625 Σ (xᵢ − 1/2)²)`                   |
//! | f5 | `exp(−10 Σ |xᵢ − 1/2|)`                     |
//! | f6 | `exp(Σ (i+4)·xᵢ)` if every `xᵢ < (3+i)/10`, else 0 |
//! | f7 | `(Σ xᵢ²)^11`                                |
//! | f8 | `(Σ xᵢ²)^(15/2)`                            |
//!
//! Axes are numbered from 1 in the formulas above.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::check_dim;
use crate::oracle::rational_to_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegrandId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

impl IntegrandId {
    pub const ALL: [IntegrandId; 8] = [
        IntegrandId::F1,
        IntegrandId::F2,
        IntegrandId::F3,
        IntegrandId::F4,
        IntegrandId::F5,
        IntegrandId::F6,
        IntegrandId::F7,
        IntegrandId::F8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntegrandId::F1 => "f1",
            IntegrandId::F2 => "f2",
            IntegrandId::F3 => "f3",
            IntegrandId::F4 => "f4",
            IntegrandId::F5 => "f5",
            IntegrandId::F6 => "f6",
            IntegrandId::F7 => "f7",
            IntegrandId::F8 => "f8",
        }
    }

    pub fn sign_profile(self) -> SignProfile {
        match self {
            IntegrandId::F1 => SignProfile::Oscillatory,
            _ => SignProfile::OneSigned,
        }
    }

    /// Evaluates the integrand at a point of the unit cube.
    #[inline]
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            IntegrandId::F1 => x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum::<f64>().cos(),
            IntegrandId::F2 => x.iter().map(|v| 1.0 / (F2_A2 + (v - 0.5) * (v - 0.5))).product(),
            IntegrandId::F3 => {
                let s: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
                (1.0 + s).powi(-(x.len() as i32) - 1)
            }
            IntegrandId::F4 => (-625.0 * x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>()).exp(),
            IntegrandId::F5 => (-10.0 * x.iter().map(|v| (v - 0.5).abs()).sum::<f64>()).exp(),
            IntegrandId::F6 => {
                let mut s = 0.0;
                for (i, v) in x.iter().enumerate() {
                    if *v >= f6_cutoff(i) {
                        return 0.0;
                    }
                    s += (i + 5) as f64 * v;
                }
                s.exp()
            }
            IntegrandId::F7 => x.iter().map(|v| v * v).sum::<f64>().powi(11),
            IntegrandId::F8 => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                r2.powi(7) * r2.sqrt()
            }
        }
    }
}

const F2_A2: f64 = 1.0 / 2500.0;

/// Upper limit of the support of f6 on 0-based axis `i`.
fn f6_cutoff(i: usize) -> f64 {
    (4 + i) as f64 / 10.0
}

impl fmt::Display for IntegrandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntegrandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegrandId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownIntegrand { id: s.to_string(), dim: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    OracleQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignProfile {
    OneSigned,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSpec {
    pub id: IntegrandId,
    pub dim: usize,
    pub reference_value: f64,
    pub provenance: Provenance,
    pub sign_profile: SignProfile,
}

impl IntegrandSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.id.eval(x)
    }

    /// Relative-error filtering is only sound for one-signed integrands.
    pub fn rel_filtering(&self) -> bool {
        self.sign_profile == SignProfile::OneSigned
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.id, self.dim)
    }
}

/// Reference values produced by `examples/golden_values.rs`.
///
/// f2 is the per-axis arctangent closed form raised to the dimension, f7 the
/// exact multinomial expansion, f8 the escalating symmetric tensor Gauss rule.
const GOLDEN: &[(IntegrandId, usize, f64)] = &[
    (IntegrandId::F2, 2, 2.343402645929749e4),
    (IntegrandId::F2, 3, 3.587322107242376e6),
    (IntegrandId::F2, 6, 1.2868879901109883e13),
    (IntegrandId::F7, 2, 1.5717594201912414e1),
    (IntegrandId::F7, 3, 4.2144111820994846e2),
    (IntegrandId::F7, 8, 1.495369283757978e6),
    (IntegrandId::F8, 2, 2.9285329205389226e0),
    (IntegrandId::F8, 3, 2.753196057322607e1),
    (IntegrandId::F8, 8, 8.879851175414286e3),
];

/// The configurations exercised by the benchmark figures.
pub const PAPER_CONFIGS: [(IntegrandId, usize); 9] = [
    (IntegrandId::F1, 8),
    (IntegrandId::F3, 8),
    (IntegrandId::F4, 8),
    (IntegrandId::F5, 8),
    (IntegrandId::F7, 8),
    (IntegrandId::F8, 8),
    (IntegrandId::F4, 5),
    (IntegrandId::F6, 6),
    (IntegrandId::F3, 3),
];

/// Closed-form value where one exists.
pub fn closed_form(id: IntegrandId, dim: usize) -> Option<f64> {
    let d = dim as i32;
    match id {
        IntegrandId::F1 => {
            // Re Π (e^{ik} − 1)/(ik) = cos(Σ k/2) · Π sin(k/2)/(k/2)
            let phase = (dim * (dim + 1)) as f64 / 4.0;
            let sinc: f64 = (1..=dim).map(|k| (k as f64 / 2.0).sin() / (k as f64 / 2.0)).product();
            Some(phase.cos() * sinc)
        }
        IntegrandId::F2 => Some((100.0 * 25.0f64.atan()).powi(d)),
        IntegrandId::F3 => Some(rational_to_f64(&f3_exact(dim))),
        IntegrandId::F4 => Some((std::f64::consts::PI.sqrt() / 25.0 * libm::erf(12.5)).powi(d)),
        IntegrandId::F5 => Some(((1.0 - (-5.0f64).exp()) / 5.0).powi(d)),
        IntegrandId::F6 => Some(
            (0..dim)
                .map(|i| {
                    let c = (i + 5) as f64;
                    ((c * f6_cutoff(i).min(1.0)).exp() - 1.0) / c
                })
                .product(),
        ),
        IntegrandId::F7 | IntegrandId::F8 => None,
    }
}

/// `∫ (1 + Σ aᵢxᵢ)^(−d−1)` with `aᵢ = i`, by inclusion–exclusion over the
/// cube's vertices applied to the d-fold antiderivative `(−1)^d / (d!·u)`.
pub fn f3_exact(dim: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for mask in 0u32..(1 << dim) {
        let shift: i64 = (0..dim).filter(|k| mask >> k & 1 == 1).map(|k| k as i64 + 1).sum();
        let term = BigRational::new(BigInt::one(), BigInt::from(1 + shift));
        if mask.count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let mut denom = BigInt::one();
    for k in 1..=dim {
        // d! · Π aᵢ = (d!)²
        denom *= BigInt::from(k) * BigInt::from(k);
    }
    acc / BigRational::from_integer(denom)
}

fn golden(id: IntegrandId, dim: usize) -> Option<f64> {
    GOLDEN.iter().find(|(g, d, _)| *g == id && *d == dim).map(|&(_, _, v)| v)
}

pub fn reference_value(id: IntegrandId, dim: usize) -> Result<f64> {
    lookup(id, dim).map(|s| s.reference_value)
}

/// The spec for `(id, dim)`, if it is part of the suite.
pub fn lookup(id: IntegrandId, dim: usize) -> Result<IntegrandSpec> {
    check_dim(dim)?;
    let unknown = || Error::UnknownIntegrand { id: id.to_string(), dim };
    if !in_suite(id, dim) {
        return Err(unknown());
    }
    let (reference_value, provenance) = match id {
        IntegrandId::F2 | IntegrandId::F7 | IntegrandId::F8 => (golden(id, dim).ok_or_else(unknown)?, Provenance::OracleQuadrature),
        _ => (closed_form(id, dim).ok_or_else(unknown)?, Provenance::ClosedForm),
    };
    Ok(IntegrandSpec { id, dim, reference_value, provenance, sign_profile: id.sign_profile() })
}

fn in_suite(id: IntegrandId, dim: usize) -> bool {
    dim == 2 || dim == 3 || (id == IntegrandId::F2 && dim == 6) || PAPER_CONFIGS.contains(&(id, dim))
}

/// The benchmark configurations, then f2 at six dimensions, then every
/// integrand at two and three dimensions.
pub fn suite() -> Vec<IntegrandSpec> {
    let mut configs: Vec<(IntegrandId, usize)> = PAPER_CONFIGS.to_vec();
    configs.push((IntegrandId::F2, 6));
    for dim in [2, 3] {
        for id in IntegrandId::ALL {
            if !configs.contains(&(id, dim)) {
                configs.push((id, dim));
            }
        }
    }
    configs.into_iter().map(|(id, dim)| lookup(id, dim).expect("suite entry")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in IntegrandId::ALL {
            assert_eq!(id.as_str().parse::<IntegrandId>().unwrap(), id);
        }
        assert!("f9".parse::<IntegrandId>().is_err());
    }

    #[test]
    fn suite_shape() {
        let s = suite();
        assert_eq!(s.len(), 25);
        assert!(s.iter().all(|c| c.reference_value.is_finite()));
        assert!(s.iter().all(|c| (c.sign_profile == SignProfile::Oscillatory) == (c.id == IntegrandId::F1)));
        assert!(lookup(IntegrandId::F1, 5).is_err());
    }

    #[test]
    fn one_dimensional_values() {
        assert_eq!(rational_to_f64(&f3_exact(1)), 0.5);
        assert_eq!(closed_form(IntegrandId::F5, 1).unwrap(), (1.0 - (-5.0f64).exp()) / 5.0);
    }

    #[test]
    fn f6_is_zero_past_its_cutoffs() {
        let mut x = vec![0.1; 6];
        assert!(IntegrandId::F6.eval(&x) > 0.0);
        for i in 0..6 {
            let cut = (4 + i) as f64 / 10.0;
            x[i] = cut;
            assert_eq!(IntegrandId::F6.eval(&x), 0.0);
            x[i] = cut - 1e-12;
            assert!(IntegrandId::F6.eval(&x) > 0.0);
            x[i] = 1.0;
            assert_eq!(IntegrandId::F6.eval(&x), 0.0);
            x[i] = 0.1;
        }
    }

    #[test]
    fn f8_matches_powf() {
        let x = [0.3, 0.9, 0.1, 0.7];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((IntegrandId::F8.eval(&x) - r2.powf(7.5)).abs() < 1e-14 * r2.powf(7.5));
    }

    #[test]
    fn golden_f7_matches_exact_expansion() {
        for dim in [2, 3, 8] {
            let exact = rational_to_f64(&crate::oracle::box_power_exact(dim, 11));
            assert!((reference_value(IntegrandId::F7, dim).unwrap() - exact).abs() <= 1e-15 * exact);
        }
    }

    #[test]
    fn golden_f7_and_f8_match_tensor_gauss() {
        use crate::oracle::symmetric_tensor_gauss;
        for dim in [2, 3, 8] {
            // Degree 22 per axis: 12 Gauss points are exact.
            let t = symmetric_tensor_gauss(&|x: &[f64]| IntegrandId::F7.eval(x), dim, 12);
            let g = reference_value(IntegrandId::F7, dim).unwrap();
            assert!((t - g).abs() <= 1e-12 * g, "f7 {dim}: {t} vs {g}");
            let t = symmetric_tensor_gauss(&|x: &[f64]| IntegrandId::F8.eval(x), dim, 20);
            let g = reference_value(IntegrandId::F8, dim).unwrap();
            assert!((t - g).abs() <= 1e-10 * g, "f8 {dim}: {t} vs {g}");
        }
    }

    #[test]
    fn f8_two_dimensional_nested_oracle() {
        use crate::oracle::adaptive_1d;
        let inner = |y: f64| adaptive_1d(&|x: f64| (x * x + y * y).powf(7.5), 0.0, 1.0, 1e-14);
        let v = adaptive_1d(&inner, 0.0, 1.0, 1e-14);
        let g = reference_value(IntegrandId::F8, 2).unwrap();
        assert!((v - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn factorizable_references_match_nested_quadrature() {
        use crate::oracle::adaptive_1d;
        let axis = |g: &dyn Fn(f64) -> f64| adaptive_1d(&g, 0.0, 1.0, 1e-15);
        for dim in [2usize, 3, 5, 6, 8] {
            let f4: f64 = axis(&|x| (-625.0 * (x - 0.5) * (x - 0.5)).exp()).powi(dim as i32);
            let f5: f64 = axis(&|x| (-10.0 * (x - 0.5).abs()).exp()).powi(dim as i32);
            for (id, oracle) in [(IntegrandId::F4, f4), (IntegrandId::F5, f5)] {
                let c = closed_form(id, dim).unwrap();
                assert!((c - oracle).abs() <= 1e-12 * c, "{id} {dim}: {c} vs {oracle}");
            }
            let f6: f64 = (0..dim)
                .map(|i| {
                    let cut = f6_cutoff(i).min(1.0);
                    adaptive_1d(&|x: f64| ((i + 5) as f64 * x).exp(), 0.0, cut, 1e-15)
                })
                .product();
            let c = closed_form(IntegrandId::F6, dim).unwrap();
            assert!((c - f6).abs() <= 1e-12 * c);
        }
        let f2_axis = axis(&|x| 1.0 / (F2_A2 + (x - 0.5) * (x - 0.5)));
        for dim in [2, 3, 6] {
            let g = reference_value(IntegrandId::F2, dim).unwrap();
            assert!((f2_axis.powi(dim as i32) - g).abs() <= 1e-12 * g);
        }
    }

    #[test]
    fn f1_and_f3_closed_forms_match_tensor_gauss() {
        use crate::oracle::gauss_legendre;
        // Full tensor product in 3D; both integrands are smooth.
        let (n, w) = gauss_legendre(24);
        for id in [IntegrandId::F1, IntegrandId::F3] {
            let mut t = 0.0;
            for a in 0..24 {
                for b in 0..24 {
                    for c in 0..24 {
                        t += w[a] * w[b] * w[c] * id.eval(&[n[a], n[b], n[c]]);
                    }
                }
            }
            let c = closed_form(id, 3).unwrap();
            assert!((t - c).abs() <= 1e-12 * c.abs(), "{id}: {t} vs {c}");
        }
    }
}
