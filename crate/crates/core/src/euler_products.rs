//! The characteristic-function Euler products
//!
//! ```text
//! F_s(z)  = prod_p sum_a C_p(a) exp( z F(p^-s; a))
//! G_s(z)  = prod_p sum_a K_p(a) exp( z F(p^-s; a))
//! F*_s(z) = prod_p sum_a C_p(a) exp(-z log p F*(p^-s; a))
//! G*_s(z) = prod_p sum_a K_p(a) exp(-z log p F*(p^-s; a))
//! ```
//!
//! Each local factor is the moment generating function of a five-point
//! distribution with values `f_a(p)`. Evaluation splits the primes in four ranges:
//!
//! * `p <= split(z)`: the local factors themselves, summed as logarithms;
//! * `split(z) < p <= P`: precomputed suffix sums of the per-prime cumulants,
//!   valid once `|z| max_a |f_a(p)| <= 0.05`;
//! * `P < p <= 16P`: the same cumulant sums, streamed from a segmented sieve;
//! * `p > 16P`: the first two cumulant sums as integrals against `dt / log t`,
//!   with an unconditional prime-counting error majorant.

use crate::error::{Error, Result};
use crate::local_arithmetic::{log_deriv_factor_real, log_factor_real, weights_c_real, weights_k_real, SplittingType};
use crate::primes::{for_each_prime_in, primes_cached};
use crate::special::{integrate, prime_count_error_bound, KahanSumC, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Number of cumulants kept per prime.
const NT: usize = 20;
/// Cumulant expansion is used once `|z| max_a |f_a| <= SPLIT_RADIUS`.
const SPLIT_RADIUS: f64 = 0.05;
/// `|kappa_n / n!| <= 0.7 (M / CUMULANT_R)^n` for a distribution supported in `[-M, M]`.
const CUMULANT_R: f64 = 0.405;
const FAR_FACTOR: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProductKind {
    F,
    G,
    FStar,
    GStar,
}

impl ProductKind {
    pub const ALL: [ProductKind; 4] = [ProductKind::F, ProductKind::G, ProductKind::FStar, ProductKind::GStar];

    pub fn uses_k_weights(self) -> bool {
        matches!(self, ProductKind::G | ProductKind::GStar)
    }

    pub fn is_starred(self) -> bool {
        matches!(self, ProductKind::FStar | ProductKind::GStar)
    }

    /// Real parts `sigma` must exceed this.
    pub fn sigma_min(self) -> f64 {
        if self.uses_k_weights() {
            2.0 / 3.0
        } else {
            0.5
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProductKind::F => "F",
            ProductKind::G => "G",
            ProductKind::FStar => "Fstar",
            ProductKind::GStar => "Gstar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "F" | "C" | "C_script" => Some(ProductKind::F),
            "G" | "K" | "K_script" => Some(ProductKind::G),
            "Fstar" | "C_plain" => Some(ProductKind::FStar),
            "Gstar" | "K_plain" => Some(ProductKind::GStar),
            _ => None,
        }
    }

    pub fn check_sigma(self, sigma: f64) -> Result<()> {
        if sigma > self.sigma_min() && sigma.is_finite() {
            Ok(())
        } else if self.uses_k_weights() {
            Err(Error::domain(format!(
                "{} needs sigma > 2/3, got {sigma}; below 2/3 the K-weighted product diverges \
                 (the condition sigma > 2/3 is necessary)",
                self.label()
            )))
        } else {
            Err(Error::domain(format!("{} needs sigma > 1/2, got {sigma}", self.label())))
        }
    }

    /// Exponent `gamma` such that the first two cumulants decay at least like `p^-gamma`.
    fn tail_exponent(self, sigma: f64) -> f64 {
        let d = if self.uses_k_weights() { 1.0 / 3.0 } else { 1.0 };
        (sigma + d).min(2.0 * sigma)
    }
}

/// How much of the `p > P` tail enters the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailOrder {
    /// plain truncation at `P`
    None,
    /// mean term only
    First,
    /// mean and variance terms
    Second,
    /// all retained cumulants
    Full,
}

impl TailOrder {
    fn max_cumulant(self) -> usize {
        match self {
            TailOrder::None => 0,
            TailOrder::First => 1,
            TailOrder::Second => 2,
            TailOrder::Full => NT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductConfig {
    pub prime_cutoff: u64,
    pub tail_order: TailOrder,
    pub target_abs_error: f64,
    pub precision_bits: u32,
}

impl ProductConfig {
    /// `P = 10^5` for `sigma >= 1`, `P = 10^6` below.
    pub fn for_sigma(sigma: f64) -> Self {
        ProductConfig {
            prime_cutoff: if sigma >= 1.0 { 100_000 } else { 1_000_000 },
            tail_order: TailOrder::Full,
            target_abs_error: 1e-10,
            precision_bits: 53,
        }
    }

    pub fn with_cutoff(mut self, p: u64) -> Self {
        self.prime_cutoff = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.prime_cutoff < 100 {
            return Err(Error::domain("prime cutoff must be at least 100"));
        }
        if self.prime_cutoff > 50_000_000 {
            return Err(Error::domain("prime cutoff above 5e7 is not supported"));
        }
        if !(self.target_abs_error > 0.0) {
            return Err(Error::domain("target_abs_error must be positive"));
        }
        if self.precision_bits > 53 {
            return Err(Error::domain(format!(
                "precision_bits = {} requested; only IEEE double (53 bits) is implemented",
                self.precision_bits
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CharacteristicEvaluation {
    pub kind: ProductKind,
    pub s: Complex64,
    pub z: Complex64,
    pub value: Complex64,
    /// logarithm of `value` (branch: sum of principal local logarithms)
    pub log_value: Complex64,
    pub tail_bound: f64,
    /// number of primes whose local factor was multiplied out directly
    pub direct_primes: usize,
}

fn cln1p(w: Complex64) -> Complex64 {
    if w.norm() < 0.01 {
        // alternating series; 10 terms reach 1e-20 relative
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = w;
        for k in 1..=10 {
            let term = pw / k as f64;
            acc += if k % 2 == 1 { term } else { -term };
            pw *= w;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) + w).ln()
    }
}

/// Values `f_a(t)` of the local random variable and their weights at real `t >= 2`.
fn local_distribution(kind: ProductKind, s: Complex64, t: f64) -> ([Complex64; 5], [f64; 5]) {
    let w = if kind.uses_k_weights() { weights_k_real(t) } else { weights_c_real(t) };
    let mut f = [Complex64::new(0.0, 0.0); 5];
    if s.im == 0.0 {
        let u = t.powf(-s.re);
        for a in SplittingType::ALL {
            f[a.index()] = Complex64::new(
                if kind.is_starred() {
                    -t.ln() * log_deriv_factor_real(a, u)
                } else {
                    log_factor_real(a, u)
                },
                0.0,
            );
        }
    } else {
        let u = (-s * t.ln()).exp();
        let one = Complex64::new(1.0, 0.0);
        for a in SplittingType::ALL {
            let v = if kind.is_starred() {
                crate::local_arithmetic::log_deriv_factor(a, u).expect("|u| < 1") * (-t.ln())
            } else {
                match a {
                    SplittingType::S111 => -cln1p(-u) * 2.0,
                    SplittingType::S21 => -cln1p(-u * u),
                    SplittingType::S3 => -cln1p(u + u * u),
                    SplittingType::S1121 => -cln1p(-u),
                    SplittingType::S13 => one * 0.0,
                }
            };
            f[a.index()] = v;
        }
    }
    (f, w)
}

/// Scaled cumulants `kappa_n / n!`, `n = 1..=NT`, of the five-point distribution.
fn scaled_cumulants(f: &[Complex64; 5], w: &[f64; 5]) -> [Complex64; NT] {
    if f.iter().all(|v| v.im == 0.0) {
        let fr = f.map(|v| v.re);
        return scaled_cumulants_real(&fr, w).map(|c| Complex64::new(c, 0.0));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut mu = [zero; NT + 1];
    let mut pw = [Complex64::new(1.0, 0.0); 5];
    for (n, m) in mu.iter_mut().enumerate().skip(1) {
        let mut acc = zero;
        for a in 0..5 {
            pw[a] = pw[a] * f[a] / n as f64;
            acc += pw[a] * w[a];
        }
        *m = acc;
    }
    let mut c = [zero; NT];
    for n in 1..=NT {
        let mut acc = mu[n];
        for j in 1..n {
            acc -= c[j - 1] * mu[n - j] * (j as f64 / n as f64);
        }
        c[n - 1] = acc;
    }
    c
}

fn scaled_cumulants_real(f: &[f64; 5], w: &[f64; 5]) -> [f64; NT] {
    let mut mu = [0.0; NT + 1];
    let mut pw = [1.0; 5];
    for (n, m) in mu.iter_mut().enumerate().skip(1) {
        let inv = 1.0 / n as f64;
        let mut acc = 0.0;
        for a in 0..5 {
            pw[a] *= f[a] * inv;
            acc += pw[a] * w[a];
        }
        *m = acc;
    }
    let mut c = [0.0; NT];
    for n in 1..=NT {
        let inv = 1.0 / n as f64;
        let mut acc = mu[n];
        for j in 1..n {
            acc -= c[j - 1] * mu[n - j] * (j as f64 * inv);
        }
        c[n - 1] = acc;
    }
    c
}

fn max_abs(f: &[Complex64; 5]) -> f64 {
    f.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Per-`(kind, s, P)` precomputation shared by all evaluations.
pub struct ProductContext {
    pub kind: ProductKind,
    pub s: Complex64,
    pub prime_cutoff: u64,
    primes: Vec<u32>,
    values: Vec<[Complex64; 5]>,
    weights: Vec<[f64; 5]>,
    /// `max_{j >= i} M_j`, with the entry at `len` covering `p > P`
    mmax_suffix: Vec<f64>,
    /// `sum_{i <= j < len} kappa_n(p_j)/n!`
    cum_suffix: Vec<[Complex64; NT]>,
    /// `sum_{j >= i} (M_j / R)^(NT+1)`
    trunc_suffix: Vec<f64>,
    far: FarTail,
}

struct FarTail {
    /// cumulant sums over `p > P`
    t: [Complex64; NT],
    trunc: f64,
    /// prime-counting error majorant for the two integrated cumulants
    pnt_bound: [f64; 2],
    /// `sum_{p > Q} (M_p / R)^3`, majorizing cumulants of order >= 3 beyond `Q`
    cube_sum: f64,
}

type CtxKey = (ProductKind, u64, u64, u64);

fn context_cache() -> &'static Mutex<HashMap<CtxKey, Arc<ProductContext>>> {
    static CACHE: OnceLock<Mutex<HashMap<CtxKey, Arc<ProductContext>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl ProductContext {
    /// Shared context, built on first use.
    pub fn get(kind: ProductKind, s: Complex64, prime_cutoff: u64) -> Result<Arc<ProductContext>> {
        kind.check_sigma(s.re)?;
        if prime_cutoff < 100 {
            return Err(Error::domain("prime cutoff must be at least 100"));
        }
        let key = (kind, s.re.to_bits(), s.im.to_bits(), prime_cutoff);
        if let Some(c) = context_cache().lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let ctx = Arc::new(Self::build(kind, s, prime_cutoff));
        let mut cache = context_cache().lock().unwrap();
        if cache.len() >= 24 {
            cache.clear();
        }
        cache.insert(key, ctx.clone());
        Ok(ctx)
    }

    fn build(kind: ProductKind, s: Complex64, prime_cutoff: u64) -> ProductContext {
        let all = primes_cached(prime_cutoff);
        let n = all.partition_point(|&p| p as u64 <= prime_cutoff);
        let primes: Vec<u32> = all[..n].to_vec();
        let mut values = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut mm = Vec::with_capacity(n);
        let mut cums = Vec::with_capacity(n);
        for &p in &primes {
            let (f, w) = local_distribution(kind, s, p as f64);
            mm.push(max_abs(&f));
            cums.push(scaled_cumulants(&f, &w));
            values.push(f);
            weights.push(w);
        }
        let far = Self::far_tail(kind, s, prime_cutoff);
        let zero = Complex64::new(0.0, 0.0);
        let mut cum_suffix = vec![[zero; NT]; n + 1];
        let mut trunc_suffix = vec![0.0; n + 1];
        let mut mmax_suffix = vec![0.0; n + 1];
        let q = FAR_FACTOR * prime_cutoff;
        let first_far = (prime_cutoff + 1) as f64;
        mmax_suffix[n] = max_abs(&local_distribution(kind, s, first_far).0)
            .max(max_abs(&local_distribution(kind, s, (q + 1) as f64).0));
        trunc_suffix[n] = far.trunc;
        let mut acc = [KahanSumC::default(); NT];
        for i in (0..n).rev() {
            for k in 0..NT {
                acc[k].add(cums[i][k]);
                cum_suffix[i][k] = acc[k].value();
            }
            trunc_suffix[i] = trunc_suffix[i + 1] + (mm[i] / CUMULANT_R).powi(NT as i32 + 1);
            mmax_suffix[i] = mmax_suffix[i + 1].max(mm[i]);
        }
        ProductContext { kind, s, prime_cutoff, primes, values, weights, mmax_suffix, cum_suffix, trunc_suffix, far }
    }

    fn far_tail(kind: ProductKind, s: Complex64, prime_cutoff: u64) -> FarTail {
        let zero = Complex64::new(0.0, 0.0);
        let q = FAR_FACTOR * prime_cutoff;
        let mut acc = [KahanSumC::default(); NT];
        let mut trunc = 0.0;
        let mut count_q = primes_cached(prime_cutoff).partition_point(|&p| p as u64 <= prime_cutoff) as f64;
        for_each_prime_in(prime_cutoff, q, |p| {
            let (f, w) = local_distribution(kind, s, p as f64);
            let c = scaled_cumulants(&f, &w);
            for k in 0..NT {
                acc[k].add(c[k]);
            }
            trunc += (max_abs(&f) / CUMULANT_R).powi(NT as i32 + 1);
            count_q += 1.0;
        });
        // continuous versions of the first two scaled cumulants
        let g = |t: f64| -> [Complex64; 2] {
            let (f, w) = local_distribution(kind, s, t);
            let m1: Complex64 = (0..5).map(|a| f[a] * w[a]).sum();
            let m2: Complex64 = (0..5).map(|a| f[a] * f[a] * w[a]).sum();
            [m1, (m2 - m1 * m1) * 0.5]
        };
        let qf = q as f64;
        let gamma = kind.tail_exponent(s.re);
        let rate = gamma - 1.0;
        // panels in x = log t - log Q: geometric from 1/4, capped at 4 e-folds of the slowest component
        let cap = 4.0 / rate;
        let lq = qf.ln();
        // t = e^700 keeps every intermediate finite; the rest is majorized below
        let end = (45.0 / rate).min(700.0 - lq);
        let mut edges = vec![0.0];
        let mut x = 0.25f64.min(cap);
        while x < end {
            edges.push(x);
            let last = *edges.last().unwrap();
            x = (2.0 * last).min(last + cap);
        }
        edges.push(end);
        let mut ints = [zero; 2];
        let mut dbound = [0.0; 2];
        let mut cube = 0.0;
        for win in edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            let part = integrate(
                |x: f64| {
                    let y = lq + x;
                    let t = y.exp();
                    let v = g(t);
                    // prime density of li(t) - li(sqrt t)/2, times dt = t dx
                    let jac = t / y * (1.0 - 0.5 / t.sqrt());
                    // derivative in t by a relative central difference
                    let h = 1e-4;
                    let vp = g(t * (1.0 + h));
                    let vm = g(t * (1.0 - h));
                    let d0 = ((vp[0] - vm[0]) / (2.0 * h * t)).norm();
                    let d1 = ((vp[1] - vm[1]) / (2.0 * h * t)).norm();
                    // dt = t dx; multiplied in this order so nothing overflows for t near e^700
                    let e = prime_count_error_bound(t);
                    let m = max_abs(&local_distribution(kind, s, t).0) / CUMULANT_R;
                    Quad {
                        a: v[0] * jac,
                        b: v[1] * jac,
                        c: d0 * t * e,
                        d: d1 * t * e,
                        e: m * m * m * jac,
                    }
                },
                a,
                b,
                1,
            );
            ints[0] += part.a;
            ints[1] += part.b;
            dbound[0] += part.c;
            dbound[1] += part.d;
            cube += part.e;
        }
        let tend = (lq + end).exp();
        let gend = g(tend);
        let jac_end = tend / (lq + end);
        dbound[0] += gend[0].norm() * jac_end / rate;
        dbound[1] += gend[1].norm() * jac_end / rate;
        // boundary term of the Stieltjes integral uses the exact count pi(Q)
        let gq = g(qf);
        let offset = count_q - (li(qf) - 0.5 * li(qf.sqrt()));
        let mut t = [zero; NT];
        for k in 0..NT {
            t[k] = acc[k].value();
        }
        t[0] += ints[0] - gq[0] * offset;
        t[1] += ints[1] - gq[1] * offset;
        FarTail { t, trunc, pnt_bound: [dbound[0], dbound[1]], cube_sum: 1.1 * cube }
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Largest `|z|` the context can evaluate (cumulant expansion valid beyond `P`).
    pub fn max_abs_z(&self) -> f64 {
        SPLIT_RADIUS / self.mmax_suffix[self.primes.len()]
    }

    pub fn evaluate(&self, z: Complex64, order: TailOrder) -> Result<CharacteristicEvaluation> {
        let zero = Complex64::new(0.0, 0.0);
        if z == zero {
            return Ok(CharacteristicEvaluation {
                kind: self.kind,
                s: self.s,
                z,
                value: Complex64::new(1.0, 0.0),
                log_value: zero,
                tail_bound: 0.0,
                direct_primes: 0,
            });
        }
        let r = z.norm();
        let n = self.primes.len();
        if r * self.mmax_suffix[n] > SPLIT_RADIUS {
            return Err(Error::domain(format!(
                "|z| = {r} too large for prime cutoff {}; raise P (limit {:.3e})",
                self.prime_cutoff,
                self.max_abs_z()
            )));
        }
        let split = self.mmax_suffix.partition_point(|&m| r * m > SPLIT_RADIUS);
        let mut acc = KahanSumC::default();
        for i in 0..split {
            acc.add(local_log(&self.values[i], &self.weights[i], z));
        }
        let far_terms = order.max_cumulant();
        let mut poly = zero;
        let mut omitted = 0.0;
        for k in (0..NT).rev() {
            let far = if k < far_terms { self.far.t[k] } else { zero };
            if k >= far_terms {
                omitted += self.far.t[k].norm() * r.powi(k as i32 + 1);
            }
            poly = (poly + self.cum_suffix[split][k] + far) * z;
        }
        acc.add(poly);
        let log_value = acc.value();
        let qmax = r * self.mmax_suffix[split] / CUMULANT_R;
        let mut bound = 0.7 / (1.0 - qmax) * r.powi(NT as i32 + 1) * self.trunc_suffix[split];
        if order != TailOrder::None {
            bound += r * self.far.pnt_bound[0];
            if far_terms >= 2 {
                bound += r * r * self.far.pnt_bound[1];
            }
            if far_terms >= 3 {
                bound += 0.7 / (1.0 - qmax) * r.powi(3) * self.far.cube_sum;
            }
        }
        bound += omitted;
        bound += 4e-16 * (split as f64 + NT as f64) * (1.0 + log_value.norm());
        let value = log_value.exp();
        Ok(CharacteristicEvaluation {
            kind: self.kind,
            s: self.s,
            z,
            value,
            log_value,
            tail_bound: value.norm() * bound.exp_m1(),
            direct_primes: split,
        })
    }
}

struct Quad {
    a: Complex64,
    b: Complex64,
    c: f64,
    d: f64,
    e: f64,
}

impl Default for Quad {
    fn default() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Quad { a: zero, b: zero, c: 0.0, d: 0.0, e: 0.0 }
    }
}

impl std::ops::Add for Quad {
    type Output = Quad;
    fn add(self, o: Quad) -> Quad {
        Quad { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d, e: self.e + o.e }
    }
}

impl std::ops::Mul<f64> for Quad {
    type Output = Quad;
    fn mul(self, k: f64) -> Quad {
        Quad { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k, e: self.e * k }
    }
}

/// `log sum_a w_a exp(z f_a)`, shifted by the largest real exponent.
fn local_log(f: &[Complex64; 5], w: &[f64; 5], z: Complex64) -> Complex64 {
    let mut shift = f64::NEG_INFINITY;
    for a in 0..5 {
        shift = shift.max((z * f[a]).re);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for a in 0..5 {
        sum += (z * f[a] - shift).exp() * w[a];
    }
    sum.ln() + shift
}

/// Logarithmic integral `li(x)` for `x > 1`, through the exponential integral series.
pub fn li(x: f64) -> f64 {
    let y = x.ln();
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= y / k;
        let add = term / k;
        sum += add;
        if add < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    EULER_GAMMA + y.ln() + sum
}

/// Evaluate one of the four products at `(s, z)`.
pub fn evaluate(kind: ProductKind, s: Complex64, z: Complex64, cfg: &ProductConfig) -> Result<CharacteristicEvaluation> {
    cfg.validate()?;
    kind.check_sigma(s.re)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("z must be finite"));
    }
    let ctx = ProductContext::get(kind, s, cfg.prime_cutoff)?;
    ctx.evaluate(z, cfg.tail_order)
}

/// Evaluate at real `sigma` with the default configuration for that `sigma`.
pub fn evaluate_at(kind: ProductKind, sigma: f64, z: Complex64) -> Result<CharacteristicEvaluation> {
    evaluate(kind, Complex64::new(sigma, 0.0), z, &ProductConfig::for_sigma(sigma))
}

/// Whether `|value(i xi)| <= 1 + tail_bound`.
pub fn modulus_bound_check(kind: ProductKind, sigma: f64, xi: f64) -> Result<bool> {
    let e = evaluate_at(kind, sigma, Complex64::new(0.0, xi))?;
    Ok(e.value.norm() <= 1.0 + e.tail_bound + 1e-15)
}

/// Smallest `Xi` on the grid `2^(k/4)` with `|value(i Xi')| < eps` at `Xi' = Xi, 1.25 Xi, 1.5 Xi, 1.75 Xi, 2 Xi`.
pub fn xi_cutoff(kind: ProductKind, sigma: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps must lie in (0, 1)"));
    }
    kind.check_sigma(sigma)?;
    let cfg = ProductConfig::for_sigma(sigma);
    let ctx = ProductContext::get(kind, Complex64::new(sigma, 0.0), cfg.prime_cutoff)?;
    let small = |xi: f64| -> Result<bool> { Ok(ctx.evaluate(Complex64::new(0.0, xi), cfg.tail_order)?.value.norm() < eps) };
    let mut k = 0;
    loop {
        let xi = 2f64.powf(k as f64 / 4.0);
        if xi > 1e6 {
            return Err(Error::domain(format!(
                "no cutoff below 1e6 reaches |value| < {eps} for {} at sigma = {sigma}; use a larger eps",
                kind.label()
            )));
        }
        if small(xi)? {
            let mut ok = true;
            for f in [1.25, 1.5, 1.75, 2.0] {
                if !small(f * xi)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(xi);
            }
        }
        k += 1;
    }
}

/// Fitted constant `c` of the growth shape `exp(c (r+3)^(1/sigma) / log(r+3))` on `|z| = r`.
///
/// On a circle the maximum modulus of a moment generating function sits on the real axis,
/// so the constant is the largest ratio over `r in {1, 2, 4, ..., 64}` of
/// `log max(value(r), value(-r))` to the shape.
pub fn growth_constant(kind: ProductKind, sigma: f64) -> Result<f64> {
    let mut c: f64 = 0.0;
    for j in 0..=6 {
        let r = (1u32 << j) as f64;
        let a = evaluate_at(kind, sigma, Complex64::new(r, 0.0))?.log_value.re;
        let b = evaluate_at(kind, sigma, Complex64::new(-r, 0.0))?.log_value.re;
        let shape = (r + 3.0).powf(1.0 / sigma) / (r + 3.0).ln();
        c = c.max(a.max(b) / shape);
    }
    Ok(c)
}

/// Growth-shape bound for `|value(z)|` on `|z| = r`, for `sigma` strictly inside the kind's critical strip part.
pub fn upper_bound_budget(kind: ProductKind, sigma: f64, r: f64) -> Result<f64> {
    if !(sigma > kind.sigma_min() && sigma < 1.0) {
        return Err(Error::domain(format!(
            "growth bound defined for {} < sigma < 1, got {sigma}",
            kind.sigma_min()
        )));
    }
    let c = growth_constant(kind, sigma)?;
    Ok((c * (r + 3.0).powf(1.0 / sigma) / (r + 3.0).ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn li_values() {
        // li(10^6) = 78627.5491594622...
        assert!((li(1e6) - 78_627.549_159_462_2).abs() < 1e-6);
    }

    #[test]
    fn cumulants_of_two_point() {
        // Bernoulli(1/2) on {0, 1}: kappa_2 = 1/4, kappa_3 = 0, kappa_4 = -1/8
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let c = scaled_cumulants(&[zero, one, zero, zero, zero], &[0.5, 0.5, 0.0, 0.0, 0.0]);
        assert!((c[0].re - 0.5).abs() < 1e-15);
        assert!((c[1].re - 0.125).abs() < 1e-15);
        assert!(c[2].re.abs() < 1e-15);
        assert!((c[3].re + 1.0 / 8.0 / 24.0).abs() < 1e-15);
    }
}
