//! Non-Galois cubic fields: discriminants, maximal orders, splitting types, enumeration and tables.
//!
//! A field is stored through a monic defining polynomial `x^3 + a2 x^2 + a1 x + a0`.
//! Its ring of integers is represented by an integral binary cubic form
//! `F(x, y) = a x^3 + b x^2 y + c x y^2 + d y^3` with `disc(F) = d_K` (the
//! Delone-Faddeev correspondence). Starting from the form `(1, a2, a1, a0)` of the
//! order `Z[theta]`, each prime `p` with `p^2 | disc` is handled by a sequence of index-`p`
//! enlargements until the order is `p`-maximal. Splitting types are read off from the
//! factorization of the maximal form over `P^1(F_p)`, which also covers a common index divisor at 2.
//!
//! Enumeration is complete. Every cubic field with `|d_K| <= X` contains an algebraic
//! integer `theta`, not in `Z`, with `Tr(theta)` in `{0, 1}` and
//! `T2(theta) = sum |theta_i|^2 <= Tr(theta)^2 / 3 + (2/3) sqrt(X)` (Hunter's theorem), and
//! the coefficient box below contains every minimal polynomial satisfying that bound.

use crate::error::{Error, Result};
use crate::local_arithmetic::{weight_c, weight_k, SplittingType};
use crate::primes::{is_prime, primes_cached};
use crate::special::{gamma, zeta};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Primes below this bound make up the stored splitting fingerprint.
pub const FINGERPRINT_BOUND: u64 = 200;

/// Sign of the field discriminant: `Plus` for totally real fields, `Minus` for complex ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signature {
    Plus,
    Minus,
}

impl Signature {
    pub const BOTH: [Signature; 2] = [Signature::Plus, Signature::Minus];

    pub fn sign(self) -> i64 {
        match self {
            Signature::Plus => 1,
            Signature::Minus => -1,
        }
    }

    pub fn of_disc(d: i64) -> Self {
        if d > 0 {
            Signature::Plus
        } else {
            Signature::Minus
        }
    }

    /// Constant of the main counting term: 1 for totally real fields, 3 for complex ones.
    pub fn main_constant(self) -> f64 {
        match self {
            Signature::Plus => 1.0,
            Signature::Minus => 3.0,
        }
    }

    /// Constant of the secondary counting term: 1 or `sqrt(3)`.
    pub fn secondary_constant(self) -> f64 {
        match self {
            Signature::Plus => 1.0,
            Signature::Minus => 3f64.sqrt(),
        }
    }

    /// Factor in `L(1) = D h R / sqrt|d|`: 4 for totally real fields, `2 pi` for complex ones.
    pub fn class_number_constant(self) -> f64 {
        match self {
            Signature::Plus => 4.0,
            Signature::Minus => 2.0 * std::f64::consts::PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signature::Plus => "plus",
            Signature::Minus => "minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" | "+" | "real" => Some(Signature::Plus),
            "minus" | "-" | "complex" => Some(Signature::Minus),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// integer helpers

fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn is_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt_u128(n as u128);
    r * r == n as u128
}

fn icbrt_u128(n: u128) -> u128 {
    let mut x = (n as f64).cbrt() as u128;
    while x > 0 && x * x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn overflow() -> Error {
    Error::domain("integer overflow in binary cubic form arithmetic")
}

/// Discriminant of the monic cubic `x^3 + a2 x^2 + a1 x + a0`.
pub fn poly_disc(poly: [i64; 3]) -> i128 {
    BinaryCubicForm::from_poly(poly).disc()
}

/// Primes `p` with `p^2 | n`, in increasing order.
pub fn square_divisor_primes(n: i128) -> Vec<u64> {
    let mut m = n.unsigned_abs();
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let lim = icbrt_u128(m) as u64 + 1;
    let primes = primes_cached(lim.max(2));
    for &p in primes.iter() {
        let p = p as u128;
        if p as u64 > lim || p * p * p > m {
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e >= 2 {
                out.push(p as u64);
            }
        }
    }
    // the cofactor has no prime factor up to its own cube root, so it is 1, q, q^2 or q1 q2
    if m > 1 {
        let r = isqrt_u128(m);
        if r * r == m && r > 1 {
            out.push(r as u64);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// binary cubic forms

/// Integral binary cubic form `a x^3 + b x^2 y + c x y^2 + d y^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryCubicForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

/// A root of a binary cubic form over `F_p`, as a point of `P^1`, with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectiveRoot {
    Infinity,
    Finite(u64),
}

impl BinaryCubicForm {
    pub fn new(a: i128, b: i128, c: i128, d: i128) -> Self {
        BinaryCubicForm { a, b, c, d }
    }

    pub fn from_poly(poly: [i64; 3]) -> Self {
        BinaryCubicForm::new(1, poly[0] as i128, poly[1] as i128, poly[2] as i128)
    }

    pub fn coeffs(&self) -> [i128; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn disc(&self) -> i128 {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d
    }

    fn checked_disc(&self) -> Result<i128> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let m = |x: i128, y: i128| x.checked_mul(y).ok_or_else(overflow);
        let t1 = m(m(b, b)?, m(c, c)?)?;
        let t2 = m(m(4, a)?, m(m(c, c)?, c)?)?;
        let t3 = m(m(4, d)?, m(m(b, b)?, b)?)?;
        let t4 = m(m(27, m(a, a)?)?, m(d, d)?)?;
        let t5 = m(m(18, m(a, b)?)?, m(c, d)?)?;
        [t2, t3, t4]
            .iter()
            .try_fold(t1.checked_add(t5).ok_or_else(overflow)?, |acc, t| acc.checked_sub(*t).ok_or_else(overflow))
    }

    /// `F(m00 x + m01 y, m10 x + m11 y)`.
    pub fn transform(&self, m: [[i128; 2]; 2]) -> Result<Self> {
        // coefficients of u = m00 x + m01 y and v = m10 x + m11 y as polynomials in (x, y)
        let u = [m[0][0], m[0][1]];
        let v = [m[1][0], m[1][1]];
        let mul = |p: &[i128], q: &[i128]| -> Result<Vec<i128>> {
            let mut r = vec![0i128; p.len() + q.len() - 1];
            for (i, &x) in p.iter().enumerate() {
                for (j, &y) in q.iter().enumerate() {
                    let t = x.checked_mul(y).ok_or_else(overflow)?;
                    r[i + j] = r[i + j].checked_add(t).ok_or_else(overflow)?;
                }
            }
            Ok(r)
        };
        let uu = mul(&u, &u)?;
        let vv = mul(&v, &v)?;
        let terms = [mul(&uu, &u)?, mul(&uu, &v)?, mul(&u, &vv)?, mul(&vv, &v)?];
        let coef = self.coeffs();
        let mut out = [0i128; 4];
        for (k, t) in terms.iter().enumerate() {
            for i in 0..4 {
                let x = coef[k].checked_mul(t[i]).ok_or_else(overflow)?;
                out[i] = out[i].checked_add(x).ok_or_else(overflow)?;
            }
        }
        Ok(BinaryCubicForm::new(out[0], out[1], out[2], out[3]))
    }

    fn residues(&self, p: u64) -> [u64; 4] {
        let p = p as i128;
        self.coeffs().map(|x| x.rem_euclid(p) as u64)
    }

    /// Roots over `P^1(F_p)` with multiplicities, by exhaustive search. The form must be nonzero mod `p`.
    pub fn roots_mod(&self, p: u64) -> Vec<(ProjectiveRoot, u32)> {
        let [a, b, c, d] = self.residues(p);
        let mut out = Vec::new();
        if a == 0 {
            let m = if b != 0 {
                1
            } else if c != 0 {
                2
            } else {
                3
            };
            out.push((ProjectiveRoot::Infinity, m));
        }
        let pp = p as u128;
        let (a, b, c, d) = (a as u128, b as u128, c as u128, d as u128);
        for r in 0..p {
            let x = r as u128;
            let f = (((a * x + b) % pp * x + c) % pp * x + d) % pp;
            if f != 0 {
                continue;
            }
            // Hasse derivatives: f' = 3 a x^2 + 2 b x + c, f''/2 = 3 a x + b
            let d1 = ((3 * a % pp * x % pp * x) + 2 * b % pp * x + c) % pp;
            let mut m = 1;
            if d1 == 0 {
                m = 2;
                let d2 = (3 * a % pp * x + b) % pp;
                if d2 == 0 {
                    m = 3;
                }
            }
            out.push((ProjectiveRoot::Finite(r), m));
        }
        out
    }

    /// Splitting type of `p` in the cubic ring of this form, by factoring it over `F_p`.
    /// For a maximal form this is the splitting type of `p` in the field.
    pub fn splitting_type_mod(&self, p: u64) -> Result<SplittingType> {
        if self.residues(p) == [0; 4] {
            return Err(Error::invariant(format!("form vanishes mod {p}; ring is not maximal at {p}")));
        }
        let roots = self.roots_mod(p);
        let total: u32 = roots.iter().map(|r| r.1).sum();
        let maxm = roots.iter().map(|r| r.1).max().unwrap_or(0);
        Ok(match (roots.len(), total, maxm) {
            (3, 3, 1) => SplittingType::S111,
            (1, 1, 1) => SplittingType::S21,
            (0, 0, _) => SplittingType::S3,
            (2, 3, 2) => SplittingType::S1121,
            (1, 3, 3) => SplittingType::S13,
            _ => return Err(Error::invariant(format!("inconsistent root pattern {roots:?} mod {p}"))),
        })
    }

    /// The multiple root mod `p`, if any (there is at most one for a form nonzero mod `p`).
    fn multiple_root(&self, p: u64) -> Option<ProjectiveRoot> {
        self.roots_mod(p).into_iter().find(|r| r.1 >= 2).map(|r| r.0)
    }

    /// One enlargement of the cubic ring at `p`, with the `p`-valuation of its index, or `None`
    /// if the ring is already `p`-maximal.
    ///
    /// A primitive form gives a ring that is not maximal at `p` exactly when it has a multiple
    /// root mod `p` which, after moving it to `(1:0)`, leaves `p^2 | a` (and `p | b`). The
    /// enlarged ring then has form `(a/p^2, b/p, c, p d)` and index `p`. A form divisible by `p`
    /// is divided by it, an enlargement of index `p^2`.
    pub fn enlarge_at(&self, p: u64) -> Result<Option<(BinaryCubicForm, u32)>> {
        let pi = p as i128;
        if self.residues(p) == [0; 4] {
            let g = BinaryCubicForm::new(self.a / pi, self.b / pi, self.c / pi, self.d / pi);
            return Ok(Some((g, 2)));
        }
        let moved = match self.multiple_root(p) {
            None => return Ok(None),
            Some(ProjectiveRoot::Infinity) => *self,
            Some(ProjectiveRoot::Finite(r)) => self.transform([[r as i128, -1], [1, 0]])?,
        };
        let pp = pi * pi;
        if moved.a % pp != 0 {
            return Ok(None);
        }
        debug_assert!(moved.b % pi == 0);
        let out = BinaryCubicForm::new(moved.a / pp, moved.b / pi, moved.c, moved.d.checked_mul(pi).ok_or_else(overflow)?);
        Ok(Some((out.reduced()?, 1)))
    }

    /// Shrinks coefficients by a unimodular translation `x -> x + k y` with `k` near `-b/(3a)`.
    fn reduced(&self) -> Result<Self> {
        if self.a == 0 {
            return Ok(*self);
        }
        let k = -((self.b as f64) / (3.0 * self.a as f64)).round() as i128;
        if k == 0 {
            return Ok(*self);
        }
        self.transform([[1, k], [0, 1]])
    }

    /// Repeated enlargement at `p` until maximal; returns the form and the number of steps (`v_p` of the index).
    pub fn maximalize_at(&self, p: u64) -> Result<(BinaryCubicForm, u32)> {
        let mut f = *self;
        let mut k = 0;
        while let Some((g, v)) = f.enlarge_at(p)? {
            f = g;
            k += v;
            if k > 64 {
                return Err(Error::invariant("maximalization did not terminate"));
            }
        }
        Ok((f, k))
    }
}

// ---------------------------------------------------------------------------
// polynomials

/// Complex roots of a monic cubic, by Aberth iteration polished with Newton steps.
pub fn cubic_roots(poly: [i64; 3]) -> [Complex64; 3] {
    let c = [poly[0] as f64, poly[1] as f64, poly[2] as f64];
    let f = |z: Complex64| ((z + c[0]) * z + c[1]) * z + c[2];
    let df = |z: Complex64| (z * 3.0 + 2.0 * c[0]) * z + c[1];
    let radius = 1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z = [
        Complex64::from_polar(radius * 0.5, 0.4),
        Complex64::from_polar(radius * 0.5, 2.5),
        Complex64::from_polar(radius * 0.5, 4.6),
    ];
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..3 {
            let ratio = f(z[i]) / df(z[i]);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Irreducibility over `Q`: a monic integer cubic is reducible exactly when it has an integer root.
pub fn is_irreducible(poly: [i64; 3]) -> bool {
    if poly[2] == 0 {
        return false;
    }
    let val = |x: i128| ((x + poly[0] as i128) * x + poly[1] as i128) * x + poly[2] as i128;
    for r in cubic_roots(poly) {
        if r.im.abs() > 0.5 {
            continue;
        }
        let k = r.re.round() as i128;
        for t in [k - 1, k, k + 1] {
            if val(t) == 0 {
                return false;
            }
        }
    }
    // safety net for badly conditioned roots: rational root theorem on small constants
    let a0 = poly[2].unsigned_abs();
    if a0 <= 1_000_000 {
        let mut d = 1u64;
        while d * d <= a0 {
            if a0 % d == 0 {
                for t in [d, a0 / d] {
                    if val(t as i128) == 0 || val(-(t as i128)) == 0 {
                        return false;
                    }
                }
            }
            d += 1;
        }
    }
    true
}

/// Outcome of Dedekind's criterion for the order `Z[theta]` at `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DedekindResult {
    pub maximal: bool,
    /// `v_p([O_K : Z[theta]])`
    pub index_valuation_removed: u32,
    /// form of the `p`-maximal overorder when `Z[theta]` is not `p`-maximal
    pub improved: Option<BinaryCubicForm>,
}

/// Dedekind's criterion at `p` for `Z[theta]`, `theta` a root of `poly`.
///
/// With `f = prod g_i^{e_i}` mod `p`, set `g = prod g_i`, `h = f / g` and
/// `F = (f - g h) / p`; the order is `p`-maximal iff `gcd(F, g, h) = 1` mod `p`. For a cubic
/// every repeated factor is linear, so this reduces to `F(r) != 0` at each repeated root `r`.
pub fn dedekind_max_at(poly: [i64; 3], p: u64) -> Result<DedekindResult> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let form = BinaryCubicForm::from_poly(poly);
    let pi = p as i128;
    let roots = form.roots_mod(p);
    let mut g = vec![1i128];
    let mut h = vec![1i128];
    let lin = |r: u64| vec![-(r as i128), 1i128];
    let pmul = |x: &[i128], y: &[i128]| {
        let mut out = vec![0i128; x.len() + y.len() - 1];
        for (i, a) in x.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    let mut repeated = Vec::new();
    let mut linear_deg = 0;
    for &(r, m) in &roots {
        let ProjectiveRoot::Finite(r) = r else { unreachable!("monic forms have no root at infinity") };
        g = pmul(&g, &lin(r));
        linear_deg += m;
        for _ in 1..m {
            h = pmul(&h, &lin(r));
        }
        if m >= 2 {
            repeated.push(r);
        }
    }
    if linear_deg < 3 {
        // remaining factor is squarefree of degree 3 - linear_deg; g picks it up as quotient
        let f = vec![poly[2] as i128, poly[1] as i128, poly[0] as i128, 1];
        let (q, _) = poly_divmod_p(&f, &pmul(&g, &h), p);
        g = pmul(&g, &q);
    }
    let f = [poly[2] as i128, poly[1] as i128, poly[0] as i128, 1];
    let gh = pmul(&g, &h);
    let mut big_f = vec![0i128; 4];
    for i in 0..4 {
        let diff = f[i] - gh.get(i).copied().unwrap_or(0);
        debug_assert!(diff % pi == 0);
        big_f[i] = (diff / pi).rem_euclid(pi);
    }
    let eval = |c: &[i128], x: i128| c.iter().rev().fold(0i128, |acc, &k| (acc * x + k).rem_euclid(pi));
    let maximal = repeated.iter().all(|&r| eval(&big_f, r as i128) != 0);
    if maximal {
        return Ok(DedekindResult { maximal: true, index_valuation_removed: 0, improved: None });
    }
    let (improved, k) = form.maximalize_at(p)?;
    Ok(DedekindResult { maximal: false, index_valuation_removed: k, improved: Some(improved) })
}

/// Quotient and remainder of monic-lifted polynomials mod `p` (coefficients low to high).
fn poly_divmod_p(num: &[i128], den: &[i128], p: u64) -> (Vec<i128>, Vec<i128>) {
    let pi = p as i128;
    let mut r: Vec<i128> = num.iter().map(|x| x.rem_euclid(pi)).collect();
    let dl = den.len() - 1;
    let lead = den[dl].rem_euclid(pi);
    let inv = mod_pow(lead as u64, p - 2, p) as i128;
    if r.len() <= dl {
        return (vec![0], r);
    }
    let mut q = vec![0i128; r.len() - dl];
    for i in (0..q.len()).rev() {
        let c = r[i + dl] * inv % pi;
        q[i] = c;
        for j in 0..=dl {
            r[i + j] = (r[i + j] - c * den[j]).rem_euclid(pi);
        }
    }
    r.truncate(dl);
    (q, r)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Field discriminant, index `[O_K : Z[theta]]` and maximal form for an irreducible monic cubic.
pub fn field_data(poly: [i64; 3]) -> Result<(i64, u64, BinaryCubicForm)> {
    if !is_irreducible(poly) {
        return Err(Error::domain(format!("polynomial {poly:?} is reducible")));
    }
    let mut form = BinaryCubicForm::from_poly(poly);
    let dpoly = form.disc();
    let mut index = 1u64;
    for p in square_divisor_primes(dpoly) {
        let (f, k) = form.maximalize_at(p)?;
        form = f;
        index *= p.pow(k);
    }
    let d = form.checked_disc()?;
    let ind2 = (index as i128) * (index as i128);
    if d * ind2 != dpoly {
        return Err(Error::invariant(format!("index mismatch for {poly:?}: {dpoly} != {index}^2 * {d}")));
    }
    let d = i64::try_from(d).map_err(|_| overflow())?;
    Ok((d, index, form))
}

/// Field discriminant `d_K` of the field generated by a root of `poly`.
pub fn field_disc(poly: [i64; 3]) -> Result<i64> {
    field_data(poly).map(|x| x.0)
}

// ---------------------------------------------------------------------------
// fast splitting for large primes

/// Barrett reduction for a fixed modulus below `2^32`.
#[derive(Clone, Copy)]
struct Barrett {
    p: u64,
    m: u64,
}

impl Barrett {
    fn new(p: u64) -> Self {
        Barrett { p, m: u64::MAX / p }
    }

    /// `x mod p`; the quotient estimate `floor(x m / 2^64)` is short by at most 2.
    #[inline]
    fn reduce(&self, x: u64) -> u64 {
        let q = ((x as u128 * self.m as u128) >> 64) as u64;
        let mut r = x - q * self.p;
        while r >= self.p {
            r -= self.p;
        }
        r
    }
}

/// Folds the degree-4 product `c` into `F_p[x] / (x^3 - n2 x^2 - n1 x - n0)`.
/// Needs `p < 2^30` and `c_i < 4 p^2` so that no intermediate sum overflows.
#[inline]
fn fold_cubic(c: [u64; 5], n: [u64; 3], br: &Barrett) -> [u64; 3] {
    let r = |x| br.reduce(x);
    let c4 = r(c[4]);
    let c3 = r(r(c[3]) + c4 * n[2]);
    let c2 = c[2] + c4 * n[1] + c3 * n[2];
    let c1 = c[1] + c4 * n[0] + c3 * n[1];
    let c0 = c[0] + c3 * n[0];
    [r(c0), r(c1), r(c2)]
}

/// Multiplication in `F_p[x] / (x^3 - n2 x^2 - n1 x - n0)`.
#[inline]
fn mulmod_cubic(u: [u64; 3], v: [u64; 3], n: [u64; 3], br: &Barrett) -> [u64; 3] {
    let c = [
        u[0] * v[0],
        u[0] * v[1] + u[1] * v[0],
        br.reduce(u[0] * v[2] + u[1] * v[1] + u[2] * v[0]),
        u[1] * v[2] + u[2] * v[1],
        u[2] * v[2],
    ];
    fold_cubic(c, n, br)
}

#[inline]
fn sqrmod_cubic(u: [u64; 3], n: [u64; 3], br: &Barrett) -> [u64; 3] {
    let c = [
        u[0] * u[0],
        2 * u[0] * u[1],
        br.reduce(2 * u[0] * u[2] + u[1] * u[1]),
        2 * u[1] * u[2],
        u[2] * u[2],
    ];
    fold_cubic(c, n, br)
}

/// Whether `x^p = x` modulo the monic cubic `(a2, a1, a0)` over `F_p` (all roots rational and distinct).
fn frobenius_fixes_x(poly: [i64; 3], p: u64) -> bool {
    assert!(p < 1 << 30, "Frobenius test limited to p < 2^30");
    let br = Barrett::new(p);
    let neg = |a: i64| ((-(a as i128)).rem_euclid(p as i128)) as u64;
    let n = [neg(poly[2]), neg(poly[1]), neg(poly[0])];
    // left-to-right 4-bit windows over x^0 .. x^15
    let mut table = [[0u64; 3]; 16];
    table[0] = [1, 0, 0];
    table[1] = [0, 1, 0];
    for k in 2..16 {
        table[k] = mulmod_cubic(table[k - 1], table[1], n, &br);
    }
    let bits = 64 - p.leading_zeros();
    let top = bits.div_ceil(4) * 4;
    let mut shift = top - 4;
    let mut result = table[((p >> shift) & 15) as usize];
    while shift > 0 {
        shift -= 4;
        for _ in 0..4 {
            result = sqrmod_cubic(result, n, &br);
        }
        let w = ((p >> shift) & 15) as usize;
        if w != 0 {
            result = mulmod_cubic(result, table[w], n, &br);
        }
    }
    result == [0, 1, 0]
}

// ---------------------------------------------------------------------------
// fields and tables

/// An isomorphism class of non-Galois cubic fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicField {
    /// field discriminant `d_K`
    pub disc: i64,
    /// `(a2, a1, a0)` of the defining polynomial `x^3 + a2 x^2 + a1 x + a0`
    pub poly: [i64; 3],
    /// `[O_K : Z[theta]]`
    pub index: u64,
    /// binary cubic form of `O_K`
    pub form: BinaryCubicForm,
    /// splitting types at the primes below [`FINGERPRINT_BOUND`], in increasing order
    pub fingerprint: Vec<SplittingType>,
}

impl CubicField {
    /// Validates the polynomial and computes all cached data.
    pub fn new(poly: [i64; 3]) -> Result<Self> {
        let (disc, index, form) = field_data(poly)?;
        if is_square_i128(disc as i128) {
            return Err(Error::domain(format!("field of {poly:?} is Galois (square discriminant {disc})")));
        }
        let mut field = CubicField { disc, poly, index, form, fingerprint: Vec::new() };
        field.fingerprint = fingerprint_primes().iter().map(|&p| field.splitting_type(p)).collect::<Result<_>>()?;
        Ok(field)
    }

    pub fn signature(&self) -> Signature {
        Signature::of_disc(self.disc)
    }

    pub fn abs_disc(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    /// Splitting type of the prime `p`.
    pub fn splitting_type(&self, p: u64) -> Result<SplittingType> {
        self.splitting_type_with(p, || crate::special::legendre(self.disc, p))
    }

    /// As [`CubicField::splitting_type`], with the Legendre symbol `(disc / p)` supplied by the caller
    /// (it is called only for unramified `p >= 256`).
    pub fn splitting_type_with(&self, p: u64, legendre: impl FnOnce() -> i32) -> Result<SplittingType> {
        if p < 256 || self.index % p == 0 {
            return self.form.splitting_type_mod(p);
        }
        let pi = p as i64;
        if self.disc % pi == 0 {
            // ramified and p does not divide the index: Z[theta] is maximal at p; (1^3) iff the Hessian vanishes
            let [a2, a1, a0] = self.poly.map(|x| x as i128);
            let h = [a2 * a2 - 3 * a1, a2 * a1 - 9 * a0, a1 * a1 - 3 * a2 * a0];
            return Ok(if h.iter().all(|x| x.rem_euclid(p as i128) == 0) { SplittingType::S13 } else { SplittingType::S1121 });
        }
        match legendre() {
            -1 => Ok(SplittingType::S21),
            1 => Ok(if frobenius_fixes_x(self.poly, p) { SplittingType::S111 } else { SplittingType::S3 }),
            _ => Err(Error::invariant(format!("prime {p} divides disc {} unexpectedly", self.disc))),
        }
    }

    /// Checks every stored invariant.
    pub fn validate(&self) -> Result<()> {
        let fresh = CubicField::new(self.poly)?;
        if fresh.disc != self.disc {
            return Err(Error::invariant(format!(
                "field {:?}: stored disc {} but polynomial gives {}",
                self.poly, self.disc, fresh.disc
            )));
        }
        if !matches!(self.disc.rem_euclid(4), 0 | 1) {
            return Err(Error::invariant(format!("field {:?}: disc {} not 0 or 1 mod 4", self.poly, self.disc)));
        }
        let ind = self.index as i128;
        if poly_disc(self.poly) != ind * ind * self.disc as i128 {
            return Err(Error::invariant(format!("field {:?}: poly_disc != index^2 disc", self.poly)));
        }
        Ok(())
    }
}

/// Primes below [`FINGERPRINT_BOUND`].
pub fn fingerprint_primes() -> Vec<u64> {
    crate::primes::primes_up_to(FINGERPRINT_BOUND - 1).into_iter().map(u64::from).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldTable {
    pub signature: Signature,
    /// every field has `|disc| < x_bound`
    pub x_bound: u64,
    pub fields: Vec<CubicField>,
}

impl FieldTable {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Sub-table of fields with `|disc| < x`.
    pub fn restrict(&self, x: u64) -> FieldTable {
        let fields = self.fields.iter().filter(|f| f.abs_disc() < x).cloned().collect();
        FieldTable { signature: self.signature, x_bound: x.min(self.x_bound), fields }
    }

    /// Field CSV: header `disc,a2,a1,a0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("disc,a2,a1,a0\n");
        for f in &self.fields {
            let _ = writeln!(s, "{},{},{},{}", f.disc, f.poly[0], f.poly[1], f.poly[2]);
        }
        s
    }

    /// Cache CSV: the field columns followed by one splitting tag per fingerprint prime.
    pub fn to_cache_csv(&self) -> String {
        let primes = fingerprint_primes();
        let mut s = String::from("disc,a2,a1,a0");
        for p in &primes {
            let _ = write!(s, ",p{p}");
        }
        s.push('\n');
        for f in &self.fields {
            let _ = write!(s, "{},{},{},{}", f.disc, f.poly[0], f.poly[1], f.poly[2]);
            for t in &f.fingerprint {
                let _ = write!(s, ",{}", t.tag());
            }
            s.push('\n');
        }
        s
    }

    /// Parses either CSV layout and revalidates every field. `x_bound` defaults to `max |disc| + 1`.
    pub fn from_csv(text: &str, x_bound: Option<u64>) -> Result<FieldTable> {
        let mut fields = Vec::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let cols: Vec<&str> = header.1.split(',').map(str::trim).collect();
        if cols.len() < 4 || cols[..4] != ["disc", "a2", "a1", "a0"] {
            return Err(Error::Parse { line: header.0 + 1, msg: "expected header disc,a2,a1,a0".into() });
        }
        let cached: Vec<u64> = cols[4..]
            .iter()
            .map(|c| c.strip_prefix('p').and_then(|x| x.parse().ok()))
            .collect::<Option<_>>()
            .ok_or(Error::Parse { line: header.0 + 1, msg: "fingerprint columns must be p<prime>".into() })?;
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != cols.len() {
                return Err(Error::Parse { line: ln + 1, msg: format!("expected {} columns", cols.len()) });
            }
            let nums: Vec<i64> = parts[..4]
                .iter()
                .map(|x| x.replace('\u{2212}', "-").parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
            let poly = [nums[1], nums[2], nums[3]];
            let field = CubicField::new(poly).map_err(|e| match e {
                Error::Domain(m) => Error::invariant(format!("line {}: {m}", ln + 1)),
                other => other,
            })?;
            if field.disc != nums[0] {
                return Err(Error::invariant(format!(
                    "line {}: field {poly:?} has disc {}, file says {}",
                    ln + 1,
                    field.disc,
                    nums[0]
                )));
            }
            for (k, p) in cached.iter().enumerate() {
                let want = field.splitting_type(*p)?;
                let got = SplittingType::from_tag(parts[4 + k])
                    .ok_or(Error::Parse { line: ln + 1, msg: format!("bad splitting tag {}", parts[4 + k]) })?;
                if want != got {
                    return Err(Error::invariant(format!("line {}: cached type at {p} is {got}, computed {want}", ln + 1)));
                }
            }
            fields.push(field);
        }
        let signature = match fields.first() {
            Some(f) => f.signature(),
            None => Signature::Plus,
        };
        if let Some(f) = fields.iter().find(|f| f.signature() != signature) {
            return Err(Error::invariant(format!("field {:?} has the wrong sign of discriminant", f.poly)));
        }
        let max = fields.iter().map(|f| f.abs_disc()).max().unwrap_or(0);
        let x_bound = x_bound.unwrap_or(max + 1);
        if max >= x_bound {
            return Err(Error::invariant(format!("field with |disc| {max} exceeds the bound {x_bound}")));
        }
        let mut table = FieldTable { signature, x_bound, fields };
        sort_fields(&mut table.fields);
        Ok(table)
    }
}

fn sort_fields(fields: &mut [CubicField]) {
    fields.sort_by(|x, y| x.abs_disc().cmp(&y.abs_disc()).then(x.poly.cmp(&y.poly)));
}

pub fn ingest(path: &Path, x_bound: Option<u64>) -> Result<FieldTable> {
    let text = std::fs::read_to_string(path)?;
    FieldTable::from_csv(&text, x_bound)
}

/// Writes the plain field CSV.
pub fn export(table: &FieldTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// enumeration

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnumerateConfig {
    /// largest admissible `X`
    pub ceiling: u64,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        EnumerateConfig { ceiling: 1_000_000 }
    }
}

/// Statistics of one enumeration run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub polynomials_scanned: u64,
    pub candidates_kept: u64,
    /// pairs in the same (disc, fingerprint) class that were proved non-isomorphic
    pub fingerprint_collisions: u64,
}

/// Sort key choosing the representative of a class: smallest index, then smallest height.
fn canonical_key(f: &CubicField) -> (u64, i64, i64, [i64; 3]) {
    let h = f.poly.iter().map(|x| x.abs()).sum();
    (f.index, h, f.poly[0].abs(), f.poly)
}

/// Both tables of fields with `0 < |d_K| < x`.
pub fn enumerate_both(x: u64, cfg: &EnumerateConfig) -> Result<(FieldTable, FieldTable, EnumerationStats)> {
    if x > cfg.ceiling {
        return Err(Error::domain(format!(
            "X = {x} exceeds the enumeration ceiling {}; ingest a precomputed table instead",
            cfg.ceiling
        )));
    }
    use rayon::prelude::*;
    let xf = x as f64;
    let mut jobs: Vec<(i64, i64)> = Vec::new();
    for s1 in [0i64, 1] {
        let b = (s1 * s1) as f64 / 3.0 + (2.0 / 3.0) * xf.sqrt();
        let lo = (((s1 * s1) as f64 - b) / 2.0).floor() as i64;
        let hi = (((s1 * s1) as f64 + b) / 2.0).ceil() as i64;
        for a1 in lo..=hi {
            jobs.push((s1, a1));
        }
    }
    let per_job: Vec<Result<(u64, Vec<CubicField>)>> = jobs
        .par_iter()
        .map(|&(s1, a1)| {
            let b = (s1 * s1) as f64 / 3.0 + (2.0 / 3.0) * xf.sqrt();
            let e3max = (b / 3.0).powf(1.5).floor() as i64 + 1;
            let a2 = -s1;
            let mut scanned = 0u64;
            let mut found = Vec::new();
            let a0_range = if s1 == 0 { -e3max..=0 } else { -e3max..=e3max };
            for a0 in a0_range {
                scanned += 1;
                let poly = [a2, a1, a0];
                let dp = poly_disc(poly);
                if dp == 0 || is_square_i128(dp) || dp.unsigned_abs() < 23 {
                    continue;
                }
                let roots = cubic_roots(poly);
                let t2: f64 = roots.iter().map(|z| z.norm_sqr()).sum();
                if t2 > b * (1.0 + 1e-9) + 1e-9 {
                    continue;
                }
                if !is_irreducible(poly) {
                    continue;
                }
                let (d, index, form) = field_data(poly)?;
                if d.unsigned_abs() >= x || is_square_i128(d as i128) {
                    continue;
                }
                let mut f = CubicField { disc: d, poly, index, form, fingerprint: Vec::new() };
                f.fingerprint = fingerprint_primes().iter().map(|&p| f.splitting_type(p)).collect::<Result<_>>()?;
                found.push(f);
            }
            Ok((scanned, found))
        })
        .collect();
    let mut stats = EnumerationStats::default();
    let mut all = Vec::new();
    for r in per_job {
        let (n, f) = r?;
        stats.polynomials_scanned += n;
        all.extend(f);
    }
    stats.candidates_kept = all.len() as u64;
    let mut groups: BTreeMap<(i64, Vec<SplittingType>), Vec<CubicField>> = BTreeMap::new();
    for f in all {
        groups.entry((f.disc, f.fingerprint.clone())).or_default().push(f);
    }
    let groups: Vec<Vec<CubicField>> = groups.into_values().collect();
    let deduped: Vec<Result<(Vec<CubicField>, u64)>> = groups.into_par_iter().map(dedupe_group).collect();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for r in deduped {
        let (reps, coll) = r?;
        stats.fingerprint_collisions += coll;
        for f in reps {
            if f.disc > 0 {
                plus.push(f);
            } else {
                minus.push(f);
            }
        }
    }
    sort_fields(&mut plus);
    sort_fields(&mut minus);
    Ok((
        FieldTable { signature: Signature::Plus, x_bound: x, fields: plus },
        FieldTable { signature: Signature::Minus, x_bound: x, fields: minus },
        stats,
    ))
}

/// Fields of one signature with `0 < |d_K| < x`, sorted by `|disc|` then polynomial.
pub fn enumerate(signature: Signature, x: u64, cfg: &EnumerateConfig) -> Result<FieldTable> {
    let (p, m, _) = enumerate_both(x, cfg)?;
    Ok(match signature {
        Signature::Plus => p,
        Signature::Minus => m,
    })
}

/// Splits a class of candidates with equal discriminant and fingerprint into isomorphism classes.
fn dedupe_group(mut group: Vec<CubicField>) -> Result<(Vec<CubicField>, u64)> {
    group.sort_by_key(canonical_key);
    let mut reps: Vec<CubicField> = Vec::new();
    for f in group {
        let mut matched = false;
        for r in &reps {
            if isomorphic(r, &f)? {
                matched = true;
                break;
            }
        }
        if !matched {
            reps.push(f);
        }
    }
    let coll = reps.len() as u64 - 1;
    Ok((reps, coll))
}

/// Whether the fields of `f` and `g` are isomorphic: finds `h` with `g(h(alpha)) = 0`, `f(alpha) = 0`.
///
/// Any isomorphism sends `beta` to an element of `O_K`, and `index(f) O_K` lies in `Z[alpha]`, so
/// `h = H / index` with `H` integral of degree below 3. Candidate coefficients come from a
/// floating-point Vandermonde solve for each matching of the roots; a candidate is accepted only
/// after the exact check `index^3 g(H / index) = 0` in `Z[x] / f`.
pub fn isomorphic(f: &CubicField, g: &CubicField) -> Result<bool> {
    if f.disc != g.disc {
        return Ok(false);
    }
    if f.poly == g.poly {
        return Ok(true);
    }
    let alpha = cubic_roots(f.poly);
    let beta = cubic_roots(g.poly);
    let den = f.index as f64;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in PERMS {
        let target = [beta[perm[0]], beta[perm[1]], beta[perm[2]]];
        let Some(c) = solve_vandermonde(alpha, target) else { continue };
        let mut h = [0i128; 3];
        let mut ok = true;
        for k in 0..3 {
            let v = c[k] * den;
            if v.im.abs() > 1e-4 * (1.0 + v.re.abs()) || (v.re - v.re.round()).abs() > 1e-4 || !v.re.is_finite() || v.re.abs() > 1e15 {
                ok = false;
                break;
            }
            h[k] = v.re.round() as i128;
        }
        if ok && exact_substitution_vanishes(f.poly, g.poly, h, f.index as i128)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn solve_vandermonde(x: [Complex64; 3], y: [Complex64; 3]) -> Option<[Complex64; 3]> {
    // Newton divided differences, then expand to monomial coefficients
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let d012 = (d12 - d01) / (x[2] - x[0]);
    let c2 = d012;
    let c1 = d01 - d012 * (x[0] + x[1]);
    let c0 = y[0] - d01 * x[0] + d012 * x[0] * x[1];
    let out = [c0, c1, c2];
    out.iter().all(|z| z.is_finite()).then_some(out)
}

/// Multiplies polynomials in `Z[x] / f` (coefficients low to high), with overflow checks.
fn mul_mod_f(u: [i128; 3], v: [i128; 3], f: [i64; 3]) -> Result<[i128; 3]> {
    let m = |a: i128, b: i128| a.checked_mul(b).ok_or_else(overflow);
    let ad = |a: i128, b: i128| a.checked_add(b).ok_or_else(overflow);
    let mut c = [0i128; 5];
    for i in 0..3 {
        for j in 0..3 {
            c[i + j] = ad(c[i + j], m(u[i], v[j])?)?;
        }
    }
    // x^3 = -(a2 x^2 + a1 x + a0)
    let (a2, a1, a0) = (f[0] as i128, f[1] as i128, f[2] as i128);
    for k in [4usize, 3] {
        let t = c[k];
        c[k] = 0;
        c[k - 1] = ad(c[k - 1], m(-a2, t)?)?;
        c[k - 2] = ad(c[k - 2], m(-a1, t)?)?;
        c[k - 3] = ad(c[k - 3], m(-a0, t)?)?;
    }
    Ok([c[0], c[1], c[2]])
}

fn exact_substitution_vanishes(f: [i64; 3], g: [i64; 3], h: [i128; 3], den: i128) -> Result<bool> {
    // den^3 g(H/den) = H^3 + g2 den H^2 + g1 den^2 H + g0 den^3
    let h2 = mul_mod_f(h, h, f)?;
    let h3 = mul_mod_f(h2, h, f)?;
    let mut acc = h3;
    let m = |a: i128, b: i128| a.checked_mul(b).ok_or_else(overflow);
    for k in 0..3 {
        acc[k] = acc[k]
            .checked_add(m(m(g[0] as i128, den)?, h2[k])?)
            .and_then(|x| x.checked_add(m(m(g[1] as i128, den * den).ok()?, h[k]).ok()?))
            .ok_or_else(overflow)?;
    }
    acc[0] = acc[0].checked_add(m(g[2] as i128, m(den * den, den)?)?).ok_or_else(overflow)?;
    Ok(acc == [0, 0, 0])
}

// ---------------------------------------------------------------------------
// counting predictions

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountPrediction {
    pub main: f64,
    pub secondary: f64,
}

impl CountPrediction {
    pub fn total(&self) -> f64 {
        self.main + self.secondary
    }
}

/// `4 zeta(1/3) / (5 Gamma(2/3)^3 zeta(5/3))`, negative.
pub fn secondary_coefficient() -> f64 {
    4.0 * zeta(1.0 / 3.0) / (5.0 * gamma(2.0 / 3.0).powi(3) * zeta(5.0 / 3.0))
}

/// Predicted number of fields of the given signature with `|d_K| < X` and prescribed local behaviour.
pub fn count_prediction(signature: Signature, x: f64, conditions: &BTreeMap<u64, SplittingType>) -> Result<CountPrediction> {
    let mut c = 1.0;
    let mut k = 1.0;
    for (&p, &a) in conditions {
        c *= weight_c(p)?.to_f64()[a.index()];
        k *= weight_k(p)?.get(a);
    }
    let main = signature.main_constant() * x * c / (12.0 * zeta(3.0));
    let secondary = signature.secondary_constant() * secondary_coefficient() * x.powf(5.0 / 6.0) * k;
    Ok(CountPrediction { main, secondary })
}

/// Per-type counts at `p` over a table.
pub fn splitting_counts(table: &FieldTable, p: u64) -> Result<[u64; 5]> {
    let fp = fingerprint_primes();
    let pos = fp.iter().position(|&q| q == p);
    let mut out = [0u64; 5];
    for f in &table.fields {
        let t = match pos {
            Some(i) => f.fingerprint[i],
            None => f.splitting_type(p)?,
        };
        out[t.index()] += 1;
    }
    Ok(out)
}
