//! Per-prime arithmetic: splitting types, traces of the local matrices, closed-form
//! local factors, exponential series coefficients and the local probability weights.
//!
//! Each splitting type carries a 2x2 diagonal matrix `A`:
//!
//! | type  | `A`            | `tr(A^m)`                |
//! |-------|----------------|--------------------------|
//! | (111) | diag(1, 1)     | 2                        |
//! | (21)  | diag(1, -1)    | 2 if `m` even, else 0    |
//! | (3)   | diag(w, w^2)   | 2 if `3 | m`, else -1    |
//! | (1²1) | diag(1, 0)     | 1                        |
//! | (1³)  | 0              | 0                        |
//!
//! All series work goes through the integer trace table, never through the
//! complex eigenvalues of type (3).

use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime};
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Factorization pattern of a rational prime in a cubic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SplittingType {
    /// totally split
    S111,
    /// one degree-1 and one degree-2 prime
    S21,
    /// inert
    S3,
    /// partially ramified
    S1121,
    /// totally ramified
    S13,
}

use SplittingType::*;

impl SplittingType {
    /// All five types in their fixed iteration order.
    pub const ALL: [SplittingType; 5] = [S111, S21, S3, S1121, S13];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short tag used in CSV files.
    pub fn tag(self) -> &'static str {
        match self {
            S111 => "111",
            S21 => "21",
            S3 => "3",
            S1121 => "121",
            S13 => "13",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == s)
    }

    /// `tr(A)` and `det(A)`; the local factor is `1 / (1 - tr w + det w^2)`.
    pub fn trace_det(self) -> (i32, i32) {
        match self {
            S111 => (2, 1),
            S21 => (0, -1),
            S3 => (-1, 1),
            S1121 => (1, 0),
            S13 => (0, 0),
        }
    }

    pub fn is_ramified(self) -> bool {
        matches!(self, S1121 | S13)
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            S111 => "(111)",
            S21 => "(21)",
            S3 => "(3)",
            S1121 => "(1²1)",
            S13 => "(1³)",
        };
        f.write_str(s)
    }
}

/// `tr(A^m)` for `m >= 1`.
pub fn trace_power(a: SplittingType, m: u32) -> i32 {
    assert!(m >= 1, "trace_power needs m >= 1");
    match a {
        S111 => 2,
        S21 => {
            if m % 2 == 0 {
                2
            } else {
                0
            }
        }
        S3 => {
            if m % 3 == 0 {
                2
            } else {
                -1
            }
        }
        S1121 => 1,
        S13 => 0,
    }
}

/// `det(I - wA)`.
pub fn local_det(a: SplittingType, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match a {
        S111 => (one - w) * (one - w),
        S21 => one - w * w,
        S3 => one + w + w * w,
        S1121 => one - w,
        S13 => one,
    }
}

fn check_disc(w: Complex64) -> Result<()> {
    if w.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("local factor needs |w| < 1, got |w| = {}", w.norm())))
    }
}

/// `F(w; a) = -log det(I - wA) = sum_m tr(A^m) w^m / m`, principal branch per factor.
pub fn log_factor(a: SplittingType, w: Complex64) -> Result<Complex64> {
    check_disc(w)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(match a {
        S111 => -(one - w).ln() * 2.0,
        S21 => -(one - w).ln() - (one + w).ln(),
        S3 => -(one + w + w * w).ln(),
        S1121 => -(one - w).ln(),
        S13 => Complex64::new(0.0, 0.0),
    })
}

/// `F*(w; a) = sum_m tr(A^m) w^m`.
pub fn log_deriv_factor(a: SplittingType, w: Complex64) -> Result<Complex64> {
    check_disc(w)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(match a {
        S111 => w * 2.0 / (one - w),
        S21 => w * w * 2.0 / (one - w * w),
        S3 => -(w + w * w * 2.0) / (one + w + w * w),
        S1121 => w / (one - w),
        S13 => Complex64::new(0.0, 0.0),
    })
}

/// Real-variable versions for `0 <= w < 1`, written to avoid cancellation for small `w`.
pub fn log_factor_real(a: SplittingType, w: f64) -> f64 {
    match a {
        S111 => -2.0 * (-w).ln_1p(),
        S21 => -(-w * w).ln_1p(),
        S3 => -(w + w * w).ln_1p(),
        S1121 => -(-w).ln_1p(),
        S13 => 0.0,
    }
}

pub fn log_deriv_factor_real(a: SplittingType, w: f64) -> f64 {
    match a {
        S111 => 2.0 * w / (1.0 - w),
        S21 => 2.0 * w * w / (1.0 - w * w),
        S3 => -(w + 2.0 * w * w) / (1.0 + w + w * w),
        S1121 => w / (1.0 - w),
        S13 => 0.0,
    }
}

/// Exact weights `C_p(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalWeightC {
    pub p: u64,
    pub weights: [Ratio<i128>; 5],
}

impl LocalWeightC {
    pub fn get(&self, a: SplittingType) -> Ratio<i128> {
        self.weights[a.index()]
    }

    pub fn to_f64(&self) -> [f64; 5] {
        self.weights.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

/// Weights `K_p(a)` in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalWeightK {
    pub p: u64,
    pub weights: [f64; 5],
}

impl LocalWeightK {
    pub fn get(&self, a: SplittingType) -> f64 {
        self.weights[a.index()]
    }
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not prime")))
    }
}

/// `C_p(a) = c_a / (1 + 1/p + 1/p^2)` with `c = (1/6, 1/2, 1/3, 1/p, 1/p^2)`.
pub fn weight_c(p: u64) -> Result<LocalWeightC> {
    require_prime(p)?;
    if p > 1 << 24 {
        return Err(Error::domain("exact weights limited to p < 2^24"));
    }
    let q = p as i128;
    let norm = Ratio::new(q * q, q * q + q + 1);
    let base = [
        Ratio::new(1, 6),
        Ratio::new(1, 2),
        Ratio::new(1, 3),
        Ratio::new(1, q),
        Ratio::new(1, q * q),
    ];
    Ok(LocalWeightC { p, weights: base.map(|b| b * norm) })
}

/// `C_p(a)` as floats for real `t >= 2`; used for prime sums and their continuous tails.
pub fn weights_c_real(t: f64) -> [f64; 5] {
    let u = 1.0 / t;
    let norm = 1.0 / (1.0 + u + u * u);
    [norm / 6.0, norm / 2.0, norm / 3.0, norm * u, norm * u * u]
}

/// `K_p(a)` as floats for real `t >= 2`.
pub fn weights_k_real(t: f64) -> [f64; 5] {
    let v = t.cbrt().recip(); // t^{-1/3}
    let v2 = v * v;
    let v3 = v2 * v;
    let v5 = v3 * v2;
    let common = (1.0 - v) / ((1.0 - v5) * (1.0 + v3));
    let op = 1.0 + v;
    [
        common * op * op * op / 6.0,
        common * op * (1.0 + v2) / 2.0,
        common * (1.0 + v3) / 3.0,
        common * v3 * op * op,
        common * v3 * v3 * op,
    ]
}

pub fn weight_k(p: u64) -> Result<LocalWeightK> {
    require_prime(p)?;
    Ok(LocalWeightK { p, weights: weights_k_real(p as f64) })
}

/// Which generating function the coefficients expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    /// `exp(z F(w; a)) = sum_r H_r(z; a) w^r`
    H,
    /// `exp(z F*(w; a)) = sum_r G_r(z; a) w^r`
    G,
}

#[derive(Clone, Debug)]
pub struct SeriesCoefficients {
    pub kind: SeriesKind,
    pub splitting: SplittingType,
    pub z: Complex64,
    pub values: Vec<Complex64>,
}

/// Coefficients `E_0..E_{n-1}` of `exp(zeff * F)` or `exp(zeff * F*)` with `zeff = z * scale`,
/// from `r E_r = sum_{m=1..r} m S_m E_{r-m}`.
pub fn series_coeffs(kind: SeriesKind, a: SplittingType, z: Complex64, scale: f64, n: usize) -> SeriesCoefficients {
    let zeff = z * scale;
    let n = n.max(1);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[0] = Complex64::new(1.0, 0.0);
    // m * S_m
    let ms: Vec<Complex64> = (1..n)
        .map(|m| {
            let t = trace_power(a, m as u32) as f64;
            match kind {
                SeriesKind::H => zeff * t,
                SeriesKind::G => zeff * (t * m as f64),
            }
        })
        .collect();
    for r in 1..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=r {
            acc += ms[m - 1] * e[r - m];
        }
        e[r] = acc / r as f64;
    }
    SeriesCoefficients { kind, splitting: a, z: zeff, values: e }
}

/// `H_r(z) = z(z+1)...(z+r-1)/r!`.
pub fn reference_h(r: u32, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..r {
        acc = acc * (z + j as f64) / (j + 1) as f64;
    }
    acc
}

/// `G_r(z)`, the coefficient of `w^r` in `exp(z w / (1 - w))`:
/// `sum_{k=1..r} binom(r-1, k-1) z^k / k!`, with `G_0 = 1`.
pub fn reference_g(r: u32, z: Complex64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    let mut term = z; // z^k / k!
    for k in 1..=r {
        acc += term * binom;
        binom = binom * (r - k) as f64 / k as f64;
        term = term * z / (k + 1) as f64;
    }
    acc
}

/// Remainder majorant `2 (4|z| + 2)^N |w|^N` for truncating either exponential series after `N` terms,
/// valid for `|w| <= 1/(8|z| + 4)`.
pub fn truncation_bound(z: Complex64, w: Complex64, n: u32) -> f64 {
    2.0 * ((4.0 * z.norm() + 2.0) * w.norm()).powi(n as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivisorKind {
    /// `d_k(p^r) = H_r(k)`
    D,
    /// `d*_k(p^r) = G_r(k log p)`
    DStar,
}

/// Multiplicative divisor-type majorants `d_k(n)` and `d*_k(n)`.
pub fn divisor_value(kind: DivisorKind, k: u32, n: u64) -> f64 {
    assert!(n >= 1);
    factorize(n)
        .into_iter()
        .map(|(p, e)| match kind {
            DivisorKind::D => reference_h(e, Complex64::new(k as f64, 0.0)).re,
            DivisorKind::DStar => reference_g(e, Complex64::new(k as f64 * (p as f64).ln(), 0.0)).re,
        })
        .product()
}

/// The two coefficient families: `L^z` (case I) and `exp(z L'/L)` (case II).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LCase {
    I,
    II,
}

impl LCase {
    pub fn label(self) -> &'static str {
        match self {
            LCase::I => "I",
            LCase::II => "II",
        }
    }
}

/// `lambda_z(p^r)`: `H_r(z; a)` in case I, `G_r(-z log p; a)` in case II.
pub fn lambda_prime_power(p: u64, r: u32, a: SplittingType, z: Complex64, case: LCase) -> Complex64 {
    let n = r as usize + 1;
    match case {
        LCase::I => series_coeffs(SeriesKind::H, a, z, 1.0, n).values[r as usize],
        LCase::II => series_coeffs(SeriesKind::G, a, z, -(p as f64).ln(), n).values[r as usize],
    }
}

/// Multiplicative coefficient `lambda_z(n)` from the splitting data of the primes dividing `n`.
pub fn lambda_coefficient(
    n: u64,
    splits: &BTreeMap<u64, SplittingType>,
    z: Complex64,
    case: LCase,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("lambda coefficient needs n >= 1"));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, e) in factorize(n) {
        let a = splits
            .get(&p)
            .ok_or_else(|| Error::domain(format!("no splitting type supplied for p = {p}")))?;
        acc *= lambda_prime_power(p, e, *a, z, case);
    }
    Ok(acc)
}
