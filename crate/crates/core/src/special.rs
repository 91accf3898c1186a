//! Scalar special functions and summation helpers.

use num_complex::Complex64;
use std::sync::OnceLock;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Compensated sum of complex numbers, componentwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSumC {
    re: KahanSum,
    im: KahanSum,
}

impl KahanSumC {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta at real `s != 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s != 1.0, "zeta has a pole at s = 1");
    const N: usize = 24;
    let n = N as f64;
    let mut acc = KahanSum::default();
    for k in (1..N).rev() {
        acc.add((k as f64).powf(-s));
    }
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n.powf(-s));
    // B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    let mut rising = s; // s(s+1)...(s+2k-2), starts at k = 1
    let mut fact = 2.0; // (2k)!
    let mut npow = n.powf(-s - 1.0);
    for (k, b) in BERNOULLI_2K.iter().enumerate() {
        let k = k + 1;
        acc.add(b / fact * rising * npow);
        let kk = 2 * k as u32;
        rising *= (s + kk as f64 - 1.0) * (s + kk as f64);
        fact *= (kk + 1) as f64 * (kk + 2) as f64;
        npow /= n * n;
    }
    acc.value()
}

/// Logarithmic derivative `zeta'(s)/zeta(s)` for real `s > 1` by a central difference of `ln zeta`.
pub fn zeta_log_derivative(s: f64) -> f64 {
    let h = 1e-4 * (s - 1.0).min(1.0);
    let f = |t: f64| zeta(t).ln();
    // fourth-order central difference
    (-f(s + 2.0 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2.0 * h)) / (12.0 * h)
}

/// Gamma function at real argument.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Gauss-Legendre nodes and weights on [-1, 1] with 24 points.
pub fn gauss_legendre_24() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(24))
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over `[a, b]` with composite 24-point Gauss-Legendre on `pieces` equal panels.
pub fn integrate<T>(f: impl Fn(f64) -> T, a: f64, b: f64, pieces: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let h = (b - a) / pieces as f64;
    let mut acc = T::default();
    for k in 0..pieces {
        let lo = a + k as f64 * h;
        for &(x, w) in gauss_legendre_24() {
            acc = acc + f(lo + 0.5 * h * (x + 1.0)) * (0.5 * h * w);
        }
    }
    acc
}

/// Unconditional majorant for `|pi(x) - li(x)|`, valid for `x >= 229`.
pub fn prime_count_error_bound(x: f64) -> f64 {
    let l = x.ln();
    0.2795 * x / l.powf(0.75) * (-(l / 6.455).sqrt()).exp()
}

/// Legendre symbol `(a/p)` for an odd prime `p`, by the binary Jacobi algorithm.
pub fn legendre(a: i64, p: u64) -> i32 {
    let mut a = a.rem_euclid(p as i64) as u64;
    let mut n = p;
    let mut t = 1;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z & 1 == 1 && matches!(n & 7, 3 | 5) {
            t = -t;
        }
        // now a is odd; swap to keep a < n
        if a < n {
            std::mem::swap(&mut a, &mut n);
            if a & n & 3 == 3 {
                t = -t;
            }
        }
        a -= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-14);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn log_derivative_at_two() {
        // zeta'(2)/zeta(2) = -0.5699609930945...
        assert!((zeta_log_derivative(2.0) + 0.569_960_993_094_532_4).abs() < 1e-9);
    }

    #[test]
    fn legendre_small() {
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(-23, 5), -1);
        assert_eq!(legendre(14, 7), 0);
    }

    #[test]
    fn quadrature() {
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, 1);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-15);
    }
}
