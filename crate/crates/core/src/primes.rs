//! Prime generation and small-factor tables.
//!
//! Primes come from a segmented sieve of Eratosthenes over odd numbers and are
//! cached process-wide; the cache only ever grows, so a returned `Arc` stays
//! valid while later callers extend it.

use std::sync::{Arc, OnceLock, RwLock};

const SEGMENT: usize = 1 << 17;

fn simple_sieve(limit: usize) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let mut comp = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !comp[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Calls `f` on every prime in `(lo, hi]`, in increasing order.
pub fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    if hi <= lo || hi < 2 {
        return;
    }
    let root = (hi as f64).sqrt() as usize + 2;
    let base = simple_sieve(root);
    if lo < 2 {
        f(2);
    }
    // odd numbers only: index k stands for 2k+1
    let start = (lo + 1).max(3);
    let mut seg_lo = start | 1;
    let mut mark = vec![false; SEGMENT];
    while seg_lo <= hi {
        let seg_hi = (seg_lo + 2 * SEGMENT as u64 - 2).min(hi);
        let len = ((seg_hi - seg_lo) / 2 + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = false);
        for &q in base.iter().skip(1) {
            let q = q as u64;
            if q * q > seg_hi {
                break;
            }
            let mut m = q * q;
            if m < seg_lo {
                m = seg_lo.div_ceil(q) * q;
                if m % 2 == 0 {
                    m += q;
                }
            }
            let mut k = ((m - seg_lo) / 2) as usize;
            while k < len {
                mark[k] = true;
                k += q as usize;
            }
        }
        for (k, &c) in mark[..len].iter().enumerate() {
            if !c {
                let n = seg_lo + 2 * k as u64;
                if n > 1 {
                    f(n);
                }
            }
        }
        seg_lo = seg_hi + 2;
        if seg_hi + 2 < seg_lo {
            break;
        }
    }
}

fn cache() -> &'static RwLock<(u64, Arc<Vec<u32>>)> {
    static CACHE: OnceLock<RwLock<(u64, Arc<Vec<u32>>)>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new((1, Arc::new(Vec::new()))))
}

/// A shared list containing every prime `<= limit` (possibly more).
pub fn primes_cached(limit: u64) -> Arc<Vec<u32>> {
    {
        let g = cache().read().unwrap();
        if g.0 >= limit {
            return g.1.clone();
        }
    }
    let mut g = cache().write().unwrap();
    if g.0 < limit {
        let target = limit.max(g.0.saturating_mul(2)).min(u32::MAX as u64);
        let mut v = Vec::with_capacity((target as f64 / (target as f64).ln().max(1.0) * 1.2) as usize);
        for_each_prime_in(0, target, |p| v.push(p as u32));
        *g = (target, Arc::new(v));
    }
    g.1.clone()
}

/// All primes `<= limit` as an owned vector.
pub fn primes_up_to(limit: u64) -> Vec<u32> {
    let all = primes_cached(limit);
    let end = all.partition_point(|&p| (p as u64) <= limit);
    all[..end].to_vec()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factorization of `n` by trial division, as `(p, e)` pairs in increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Smallest-prime-factor table for `1..=n`, with the full power of that prime.
///
/// For `n >= 2`, `spf[n]` is the least prime dividing `n` and `ppow[n]` is the
/// largest power of it dividing `n`, so `n / ppow[n]` is coprime to `spf[n]`.
pub struct FactorTable {
    pub spf: Vec<u32>,
    pub ppow: Vec<u32>,
}

impl FactorTable {
    pub fn new(n: usize) -> Self {
        let mut spf = vec![0u32; n + 1];
        let mut ppow = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        if n >= 1 {
            spf[1] = 1;
            ppow[1] = 1;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                ppow[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
                ppow[m] = if p == si { ppow[i] * p } else { p };
            }
        }
        FactorTable { spf, ppow }
    }

    pub fn len(&self) -> usize {
        self.spf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spf.len() <= 1
    }
}

/// A shared factor table covering at least `1..=n`.
pub fn factor_table(n: usize) -> Arc<FactorTable> {
    static TABLE: OnceLock<RwLock<Arc<FactorTable>>> = OnceLock::new();
    let lock = TABLE.get_or_init(|| RwLock::new(Arc::new(FactorTable::new(1))));
    {
        let g = lock.read().unwrap();
        if g.len() > n {
            return g.clone();
        }
    }
    let mut g = lock.write().unwrap();
    if g.len() <= n {
        let target = n.max(2 * (g.len() - 1)).max(1024);
        *g = Arc::new(FactorTable::new(target));
    }
    g.clone()
}
