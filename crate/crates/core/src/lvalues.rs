//! Values of `L(s, rho_K)` for individual fields: direct Euler products for `sigma > 1` and
//! the smoothed Dirichlet series `sum lambda_z(n) n^{-sigma} e^{-n/Y}` in general.
//!
//! Coefficients come from a multiplicative sieve over a smallest-prime-factor table. The
//! smoothing error is estimated from the same pass by also forming the sum with `Y/2`; the
//! truncation point `N` is chosen from the majorant
//! `sum_{n>N} d_k(n) n^{-sigma} e^{-n/Y} <= e^{-(1-t) N / Y} zeta(sigma+delta)^k (Y delta / (e t))^delta`,
//! valid for `0 < t < 1`, `delta >= 0` and `sigma + delta > 1`, with `k = 2|z|` (so `|lambda_z(n)| <= d_k(n)`).

use crate::cubic_fields::{CubicField, Signature};
use crate::error::{Error, Result};
use crate::local_arithmetic::{lambda_prime_power, log_deriv_factor_real, log_factor_real, LCase, SplittingType};
use crate::primes::{factor_table, primes_cached};
use crate::special::{zeta, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const NOT_PRIME: u8 = u8::MAX;

/// Largest truncation point the sieve accepts.
pub const MAX_TERMS: usize = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Euler,
    Smoothed,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Smoothed => "smoothed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValueResult {
    pub disc: i64,
    pub poly: [i64; 3],
    pub sigma: f64,
    pub case: LCase,
    pub z: Complex64,
    pub value: Complex64,
    pub method: Method,
    pub y: Option<f64>,
    pub error_estimate: f64,
}

/// Splitting types of all primes up to `n_max`, indexed by the prime itself.
pub struct SplitTable {
    types: Vec<u8>,
}

impl SplitTable {
    pub fn new(field: &CubicField, n_max: usize) -> Result<Self> {
        let mut types = vec![NOT_PRIME; n_max + 1];
        let primes = primes_cached(n_max as u64);
        // (disc / p) depends only on p mod |disc|; cache it per residue when that pays off
        let modulus = field.abs_disc() as usize;
        let mut chi: Vec<i8> = if modulus.saturating_mul(8) < n_max { vec![2; modulus] } else { Vec::new() };
        for &p in primes.iter() {
            if p as usize > n_max {
                break;
            }
            let p = p as u64;
            let t = if chi.is_empty() {
                field.splitting_type(p)?
            } else {
                field.splitting_type_with(p, || {
                    let slot = &mut chi[(p % modulus as u64) as usize];
                    if *slot == 2 {
                        *slot = crate::special::legendre(field.disc, p) as i8;
                    }
                    *slot as i32
                })?
            };
            types[p as usize] = t.index() as u8;
        }
        Ok(SplitTable { types })
    }

    pub fn n_max(&self) -> usize {
        self.types.len() - 1
    }

    pub fn get(&self, p: usize) -> Option<SplittingType> {
        match self.types.get(p) {
            Some(&t) if t != NOT_PRIME => Some(SplittingType::ALL[t as usize]),
            _ => None,
        }
    }
}

/// `lambda_z(n)` for `1 <= n <= n_max` (index 0 unused), by the multiplicative sieve.
pub fn lambda_sieve(split: &SplitTable, z: Complex64, case: LCase, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max > split.n_max() {
        return Err(Error::domain("sieve range exceeds the splitting table"));
    }
    let ft = factor_table(n_max);
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    if n_max >= 1 {
        out[1] = Complex64::new(1.0, 0.0);
    }
    for n in 2..=n_max {
        let pp = ft.ppow[n] as usize;
        if pp == n {
            let p = ft.spf[n] as usize;
            let mut r = 0;
            let mut m = n;
            while m > 1 {
                m /= p;
                r += 1;
            }
            let a = split.get(p).ok_or_else(|| Error::invariant(format!("missing splitting type at {p}")))?;
            out[n] = lambda_prime_power(p as u64, r, a, z, case);
        } else {
            out[n] = out[n / pp] * out[pp];
        }
    }
    Ok(out)
}

/// Dirichlet coefficients of `L(s, rho_K)` (the case-I coefficients at `z = 1`), exactly as integers in `f64`.
pub fn dirichlet_coefficients(split: &SplitTable, n_max: usize) -> Result<Vec<f64>> {
    if n_max > split.n_max() {
        return Err(Error::domain("sieve range exceeds the splitting table"));
    }
    let ft = factor_table(n_max);
    let mut a = vec![0.0f64; n_max + 1];
    if n_max >= 1 {
        a[1] = 1.0;
    }
    for n in 2..=n_max {
        let pp = ft.ppow[n] as usize;
        if pp == n {
            let p = ft.spf[n] as usize;
            let t = split.types[p];
            if t == NOT_PRIME {
                return Err(Error::invariant(format!("missing splitting type at {p}")));
            }
            let (tr, det) = SplittingType::ALL[t as usize].trace_det();
            // a(p^r) = tr a(p^{r-1}) - det a(p^{r-2})
            let prev = a[n / p];
            let prev2 = if n / p >= p { a[n / p / p] } else { 0.0 };
            a[n] = tr as f64 * prev - det as f64 * prev2;
        } else {
            a[n] = a[n / pp] * a[pp];
        }
    }
    Ok(a)
}

/// Majorant of `sum_{n > N} d_k(n) n^{-sigma} e^{-n/Y}`.
pub fn smoothing_tail_bound(sigma: f64, k: f64, y: f64, n: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let deltas: Vec<f64> = if sigma > 1.0 {
        vec![0.0, 0.5 / y.ln(), 1.0 / y.ln()]
    } else {
        (1..=6).map(|j| 1.0 - sigma + j as f64 / (2.0 * y.ln())).collect()
    };
    for &delta in &deltas {
        if sigma + delta <= 1.0 {
            continue;
        }
        let zk = k * zeta(sigma + delta).ln();
        for t in [0.02, 0.05, 0.1, 0.2, 0.3, 0.5] {
            let extra = if delta > 0.0 { delta * (y * delta / (std::f64::consts::E * t)).ln() } else { 0.0 };
            let b = (-(1.0 - t) * n / y + zk + extra).exp();
            best = best.min(b);
        }
    }
    best
}

/// Smallest `N` (a multiple of `Y/4`) whose tail majorant is below `target`.
pub fn truncation_point(sigma: f64, k: f64, y: f64, target: f64) -> usize {
    let mut c = 4.0;
    while smoothing_tail_bound(sigma, k, y, c * y) > target && c < 400.0 {
        c += 0.25;
    }
    (c * y).ceil() as usize
}

/// `log L(sigma)` as a sum over primes `p <= P` of `-log det(I - A_p p^{-sigma})`, with a tail bound.
pub fn log_l_direct(field: &CubicField, sigma: f64, p_max: u64) -> Result<(f64, f64)> {
    Ok(log_l_direct_multi(field, &[sigma], p_max)?[0])
}

/// [`log_l_direct`] at several `sigma` from one pass over the primes.
pub fn log_l_direct_multi(field: &CubicField, sigmas: &[f64], p_max: u64) -> Result<Vec<(f64, f64)>> {
    if sigmas.iter().any(|&s| s <= 1.0) {
        return Err(Error::domain("direct Euler product needs sigma > 1; use the smoothed series"));
    }
    let primes = primes_cached(p_max);
    let mut acc = vec![crate::special::KahanSum::default(); sigmas.len()];
    for &p in primes.iter() {
        if p as u64 > p_max {
            break;
        }
        let a = field.splitting_type(p as u64)?;
        let lp = (p as f64).ln();
        for (j, &s) in sigmas.iter().enumerate() {
            acc[j].add(log_factor_real(a, (-s * lp).exp()));
        }
    }
    let pf = p_max as f64;
    Ok(sigmas
        .iter()
        .zip(acc)
        .map(|(&s, acc)| {
            let x = pf.powf(-s);
            (acc.value(), 2.0 * pf.powf(1.0 - s) / (s - 1.0) / (1.0 - x))
        })
        .collect())
}

/// `(L'/L)(sigma)` as `-sum_{p <= P} log p F*(p^{-sigma})`, with a tail bound.
pub fn log_deriv_l_direct(field: &CubicField, sigma: f64, p_max: u64) -> Result<(f64, f64)> {
    if sigma <= 1.0 {
        return Err(Error::domain("direct Euler product needs sigma > 1; use the smoothed series"));
    }
    let primes = primes_cached(p_max);
    let mut acc = crate::special::KahanSum::default();
    for &p in primes.iter() {
        if p as u64 > p_max {
            break;
        }
        let a = field.splitting_type(p as u64)?;
        let pf = p as f64;
        acc.add(-pf.ln() * log_deriv_factor_real(a, pf.powf(-sigma)));
    }
    let pf = p_max as f64;
    let x = pf.powf(-sigma);
    // sum_{n>P} 2 log n n^{-sigma} / (1 - x), by comparison with the integral
    let tail = 2.0 * pf.powf(1.0 - sigma) * (pf.ln() / (sigma - 1.0) + 1.0 / (sigma - 1.0).powi(2)) / (1.0 - x);
    Ok((acc.value(), tail))
}

fn check_smoothing_args(sigma: f64, y: f64) -> Result<()> {
    if sigma <= 0.5 {
        return Err(Error::domain("smoothed series needs sigma > 1/2"));
    }
    if y < 1e3 {
        return Err(Error::domain("smoothing length Y must be at least 1000"));
    }
    Ok(())
}

/// `sum_{n <= N} lambda_z(n) n^{-sigma} e^{-n/Y}` for any `z`, through the generic complex sieve.
pub fn smoothed_g(field: &CubicField, sigma: f64, z: Complex64, case: LCase, y: f64) -> Result<LValueResult> {
    check_smoothing_args(sigma, y)?;
    let k = 2.0 * z.norm();
    let n = truncation_point(sigma, k, y, 1e-13);
    if n > MAX_TERMS {
        return Err(Error::domain(format!("Y = {y} needs {n} terms, above the limit {MAX_TERMS}")));
    }
    let split = SplitTable::new(field, n)?;
    let lam = lambda_sieve(&split, z, case, n)?;
    let (full, half) = weighted_sums_complex(&lam, sigma, y);
    Ok(LValueResult {
        disc: field.disc,
        poly: field.poly,
        sigma,
        case,
        z,
        value: full,
        method: Method::Smoothed,
        y: Some(y),
        error_estimate: (full - half).norm() + smoothing_tail_bound(sigma, k, y, n as f64),
    })
}

fn weighted_sums_complex(lam: &[Complex64], sigma: f64, y: f64) -> (Complex64, Complex64) {
    let mut full = crate::special::KahanSumC::default();
    let mut half = crate::special::KahanSumC::default();
    for (n, v) in lam.iter().enumerate().skip(1) {
        if v.re == 0.0 && v.im == 0.0 {
            continue;
        }
        let nf = n as f64;
        let e = (-nf / y).exp();
        let w = nf.powf(-sigma) * e;
        full.add(v * w);
        half.add(v * (w * e));
    }
    (full.value(), half.value())
}

/// Smoothed sums of `L(sigma)` at several `sigma` from one sieve pass: for each `sigma`,
/// `(S(Y), S(Y/2))` together with the tail majorant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedL {
    pub sigma: f64,
    pub y: f64,
    pub n_terms: usize,
    pub value: f64,
    pub value_half_y: f64,
    pub tail_bound: f64,
}

impl SmoothedL {
    /// `|S(Y) - S(Y/2)|` plus the truncation majorant.
    pub fn error_estimate(&self) -> f64 {
        (self.value - self.value_half_y).abs() + self.tail_bound
    }
}

pub fn smoothed_l_multi(field: &CubicField, sigmas: &[f64], y: f64) -> Result<Vec<SmoothedL>> {
    for &s in sigmas {
        check_smoothing_args(s, y)?;
    }
    let smin = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = truncation_point(smin, 2.0, y, 1e-13);
    if n > MAX_TERMS {
        return Err(Error::domain(format!("Y = {y} needs {n} terms, above the limit {MAX_TERMS}")));
    }
    let split = SplitTable::new(field, n)?;
    let a = dirichlet_coefficients(&split, n)?;
    let mut full = vec![crate::special::KahanSum::default(); sigmas.len()];
    let mut half = vec![crate::special::KahanSum::default(); sigmas.len()];
    let step = (-1.0 / y).exp();
    let mut e = 1.0;
    for (i, &v) in a.iter().enumerate().skip(1) {
        // refresh the running exponential periodically to keep rounding drift negligible
        e = if i % 4096 == 0 { (-(i as f64) / y).exp() } else { e * step };
        if v == 0.0 {
            continue;
        }
        let ln = (i as f64).ln();
        for (j, &s) in sigmas.iter().enumerate() {
            let w = (-s * ln).exp() * e;
            full[j].add(v * w);
            half[j].add(v * w * e);
        }
    }
    Ok(sigmas
        .iter()
        .enumerate()
        .map(|(j, &s)| SmoothedL {
            sigma: s,
            y,
            n_terms: n,
            value: full[j].value(),
            value_half_y: half[j].value(),
            tail_bound: smoothing_tail_bound(s, 2.0, y, n as f64),
        })
        .collect())
}

/// Smoothed `(L'/L)(sigma) = -sum Lambda_K(n) n^{-sigma} e^{-n/Y}` with `Lambda_K(p^m) = tr(A_p^m) log p`,
/// the first-order term in `z` of the case-II series. Returns `(S(Y), S(Y/2), tail)`.
pub fn smoothed_log_derivative(field: &CubicField, sigma: f64, y: f64) -> Result<(f64, f64, f64)> {
    check_smoothing_args(sigma, y)?;
    // Lambda_K(n) <= 2 Lambda(n); sum_{n>N} 2 log n n^{-sigma} e^{-n/Y} <= 2 ln N N^{-sigma} Y e^{-N/Y} / (1 - ...)
    let mut c = 4.0;
    let tail = |c: f64| {
        let n = c * y;
        2.0 * n.ln() * n.powf(-sigma) * y * (-c).exp() / (1.0 - (y / n) * (1.0 + sigma))
    };
    while tail(c) > 1e-14 && c < 400.0 {
        c += 0.25;
    }
    let n = (c * y).ceil() as u64;
    let primes = primes_cached(n);
    let mut full = crate::special::KahanSum::default();
    let mut half = crate::special::KahanSum::default();
    for &p in primes.iter() {
        let p = p as u64;
        if p > n {
            break;
        }
        let a = field.splitting_type(p)?;
        let lp = (p as f64).ln();
        let mut q = p;
        let mut m = 1u32;
        loop {
            let t = crate::local_arithmetic::trace_power(a, m) as f64;
            if t != 0.0 {
                let qf = q as f64;
                let e = (-qf / y).exp();
                let w = t * lp * qf.powf(-sigma) * e;
                full.add(-w);
                half.add(-w * e);
            }
            match q.checked_mul(p) {
                Some(nq) if nq <= n => {
                    q = nq;
                    m += 1;
                }
                _ => break,
            }
        }
    }
    Ok((full.value(), half.value(), tail(c)))
}

/// How the smoothing length is chosen per field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YPolicy {
    /// lower limit for `Y`
    pub y_min: f64,
    /// `Y >= c_real |d|^{3/4}` for totally real fields
    pub c_real: f64,
    /// `Y >= c_complex |d|^{1/2}` for complex fields
    pub c_complex: f64,
    /// fixed `Y` overriding the rule when set
    pub fixed: Option<f64>,
}

impl Default for YPolicy {
    fn default() -> Self {
        YPolicy { y_min: 2_000.0, c_real: 16.0, c_complex: 32.0, fixed: None }
    }
}

impl YPolicy {
    pub fn fixed(y: f64) -> Self {
        YPolicy { fixed: Some(y), ..Default::default() }
    }

    pub fn y_for(&self, field: &CubicField) -> f64 {
        if let Some(y) = self.fixed {
            return y;
        }
        let d = field.abs_disc() as f64;
        let rule = match field.signature() {
            Signature::Plus => self.c_real * d.powf(0.75),
            Signature::Minus => self.c_complex * d.sqrt(),
        };
        rule.max(self.y_min).ceil()
    }
}

/// `L(1, rho_K)` from the smoothed series, with its error estimate.
pub fn l_at_one_with(field: &CubicField, policy: &YPolicy) -> Result<LValueResult> {
    let y = policy.y_for(field);
    let r = smoothed_l_multi(field, &[1.0], y)?.remove(0);
    if r.value <= 0.0 {
        return Err(Error::invariant(format!(
            "smoothed L(1) = {} is not positive for disc {}; increase Y",
            r.value, field.disc
        )));
    }
    Ok(LValueResult {
        disc: field.disc,
        poly: field.poly,
        sigma: 1.0,
        case: LCase::I,
        z: Complex64::new(1.0, 0.0),
        value: Complex64::new(r.value, 0.0),
        method: Method::Smoothed,
        y: Some(y),
        error_estimate: r.error_estimate(),
    })
}

pub fn l_at_one(field: &CubicField) -> Result<f64> {
    Ok(l_at_one_with(field, &YPolicy::default())?.value.re)
}

/// `h_K R_K = L(1) sqrt|d_K| / D`.
pub fn class_number_regulator_from(field: &CubicField, l1: f64) -> f64 {
    l1 * (field.abs_disc() as f64).sqrt() / field.signature().class_number_constant()
}

pub fn class_number_regulator(field: &CubicField) -> Result<f64> {
    Ok(class_number_regulator_from(field, l_at_one(field)?))
}

/// `gamma_K = (L'/L)(1) + gamma` with the smoothed log derivative; returns `(gamma_K, error estimate)`.
pub fn euler_kronecker_with(field: &CubicField, y: f64) -> Result<(f64, f64)> {
    let (v, h, tail) = smoothed_log_derivative(field, 1.0, y)?;
    Ok((v + EULER_GAMMA, (v - h).abs() + tail))
}

pub fn euler_kronecker(field: &CubicField) -> Result<f64> {
    Ok(euler_kronecker_with(field, 1e5)?.0)
}

/// Batch CSV: `disc,sigma,case,z_re,z_im,value_re,value_im,method,Y,err`.
pub fn results_csv(rows: &[LValueResult]) -> String {
    let mut s = String::from("disc,sigma,case,z_re,z_im,value_re,value_im,method,Y,err\n");
    for r in rows {
        let y = r.y.map(|y| format!("{y}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{:.3e}",
            r.disc,
            r.sigma,
            r.case.label(),
            r.z.re,
            r.z.im,
            r.value.re,
            r.value.im,
            r.method.label(),
            y,
            r.error_estimate
        );
    }
    s
}
