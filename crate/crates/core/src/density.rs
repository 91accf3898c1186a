//! Densities of the limiting distributions by Fourier inversion of the Euler products.
//!
//! With `phi(xi) = value(i xi)`, the density is
//! `D(x) = (2 pi)^{-1/2} int phi(xi) e^{-i x xi} d xi`, normalised so that
//! `int D(x) dx / sqrt(2 pi) = 1`. The integral is truncated at `Xi` and discretised
//! on `n` uniform nodes; the trapezoid sum is then a length-`n` DFT whose input is
//! Hermitian, so its output is real.

use crate::error::{Error, Result};
use crate::euler_products::{xi_cutoff, ProductConfig, ProductContext, ProductKind, TailOrder};
use crate::special::{zeta, zeta_log_derivative};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// The four limiting densities: of `log L` weighted by `C_p` or `K_p`, and of `L'/L` likewise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DensityKind {
    CScript,
    KScript,
    CPlain,
    KPlain,
}

impl DensityKind {
    pub const ALL: [DensityKind; 4] = [DensityKind::CScript, DensityKind::KScript, DensityKind::CPlain, DensityKind::KPlain];

    pub fn product(self) -> ProductKind {
        match self {
            DensityKind::CScript => ProductKind::F,
            DensityKind::KScript => ProductKind::G,
            DensityKind::CPlain => ProductKind::FStar,
            DensityKind::KPlain => ProductKind::GStar,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DensityKind::CScript => "C_script",
            DensityKind::KScript => "K_script",
            DensityKind::CPlain => "C_plain",
            DensityKind::KPlain => "K_plain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "C" | "C_script" | "F" => Some(DensityKind::CScript),
            "K" | "K_script" | "G" => Some(DensityKind::KScript),
            "Cplain" | "C_plain" | "Fstar" => Some(DensityKind::CPlain),
            "Kplain" | "K_plain" | "Gstar" => Some(DensityKind::KPlain),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityGrid {
    pub kind: DensityKind,
    pub sigma: f64,
    pub x0: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub xi_cutoff: f64,
    pub quad_error_estimate: f64,
    /// largest imaginary part left by the transform before symmetrisation
    pub imag_residue: f64,
    /// half-width of the interval known to carry all but a negligible part of the mass
    pub support_half_width: f64,
}

impl DensityGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.step
    }

    /// `sum values * step / sqrt(2 pi)`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step / SQRT_2PI
    }

    pub fn tolerance(&self) -> f64 {
        self.quad_error_estimate.max(1e-6)
    }

    /// Mass carried by grid points outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        let mut m = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let x = self.x(j);
            if x < lo || x > hi {
                m += v.abs();
            }
        }
        m * self.step / SQRT_2PI
    }

    /// Density at `x` by linear interpolation (zero off the grid).
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.step;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let j = (t.floor() as usize).min(self.values.len() - 2);
        let f = t - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    /// Transform back: `int D(x) e^{i x xi} dx / sqrt(2 pi)` by the trapezoid rule.
    pub fn characteristic_at(&self, xi: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            acc += Complex64::from_polar(*v, self.x(j) * xi);
        }
        acc * (self.step / SQRT_2PI)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CdfGrid {
    pub kind: DensityKind,
    pub sigma: f64,
    pub x0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl CdfGrid {
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.step
    }

    /// Distribution function at `x` by linear interpolation, `0` left and `1` right of the grid.
    pub fn at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.step;
        if t <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        if t >= last as f64 {
            return 1.0;
        }
        let j = t.floor() as usize;
        let f = t - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    /// Smallest grid abscissa where the distribution function reaches `q`, refined linearly.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        let j = self.values.iter().position(|&v| v >= q)?;
        if j == 0 {
            return Some(self.x0);
        }
        let (a, b) = (self.values[j - 1], self.values[j]);
        let f = if b > a { (q - a) / (b - a) } else { 0.0 };
        Some(self.x(j - 1) + f * self.step)
    }
}

/// Interval `[lo, hi]` carrying all but about `1e-13` of the mass.
///
/// For `sigma > 1` the values are bounded outright: `|log L| <= 2 log zeta(sigma)` and
/// `|L'/L| <= -2 zeta'/zeta(sigma)`. Otherwise Chernoff bounds from the moment generating
/// function at real arguments.
fn support_interval(ctx: &ProductContext, kind: DensityKind, sigma: f64) -> Result<(f64, f64)> {
    let hard = if sigma > 1.0 {
        Some(match kind {
            DensityKind::CScript | DensityKind::KScript => 2.0 * zeta(sigma).ln(),
            _ => -2.0 * zeta_log_derivative(sigma),
        })
    } else {
        None
    };
    let level = (1e13f64).ln();
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    let tmax = ctx.max_abs_z();
    let mut t = 0.25;
    while t <= 64.0 && t <= tmax {
        let up = ctx.evaluate(Complex64::new(t, 0.0), TailOrder::Full)?.log_value.re;
        let dn = ctx.evaluate(Complex64::new(-t, 0.0), TailOrder::Full)?.log_value.re;
        hi = hi.min((up + level) / t);
        lo = lo.min((dn + level) / t);
        t *= 1.25;
    }
    let (mut a, mut b) = (-lo, hi);
    if let Some(h) = hard {
        a = a.max(-h);
        b = b.min(h);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invariant("could not bound the support of the distribution"));
    }
    Ok((a, b))
}

/// Numerical inversion on `n_points` nodes (doubled as needed so that half the period covers the support).
pub fn build_density(kind: DensityKind, sigma: f64, eps_tail: f64, n_points: usize) -> Result<DensityGrid> {
    let pk = kind.product();
    pk.check_sigma(sigma)?;
    if !n_points.is_power_of_two() || n_points < 64 {
        return Err(Error::domain("n_points must be a power of two, at least 64"));
    }
    let xi_max = xi_cutoff(pk, sigma, eps_tail)?;
    let cfg = ProductConfig::for_sigma(sigma);
    let ctx = ProductContext::get(pk, Complex64::new(sigma, 0.0), cfg.prime_cutoff)?;
    let (lo, hi) = support_interval(&ctx, kind, sigma)?;
    let w = lo.abs().max(hi.abs());
    // half-period pi/dxi = pi n / (2 Xi) must reach 2w so the coarse comparison also covers the support
    let mut n = n_points;
    while PI * n as f64 / (2.0 * xi_max) < 2.0 * w {
        n *= 2;
        if n > 1 << 24 {
            return Err(Error::domain("density grid would exceed 2^24 points"));
        }
    }
    let dxi = 2.0 * xi_max / n as f64;
    let half = n / 2;
    let nodes: Vec<Result<Complex64>> = {
        use rayon::prelude::*;
        (0..=half)
            .into_par_iter()
            .map(|k| Ok(ctx.evaluate(Complex64::new(0.0, k as f64 * dxi), cfg.tail_order)?.value))
            .collect()
    };
    let phi: Vec<Complex64> = nodes.into_iter().collect::<Result<_>>()?;

    let (fine, imag_fine) = invert(&phi, n, dxi);
    // every other node: step 2 dxi, same x spacing, half the period
    let coarse_phi: Vec<Complex64> = phi.iter().step_by(2).copied().collect();
    let (coarse, _) = invert(&coarse_phi, n / 2, 2.0 * dxi);
    let mut richardson: f64 = 0.0;
    for j in 0..n / 2 {
        // coarse index j (centred) matches fine index j + n/4
        richardson = richardson.max((coarse[j] - fine[j + n / 4]).abs());
    }
    // truncation: |phi| beyond Xi integrated over [Xi, 4 Xi]
    let mut trunc = 0.0;
    let m = 64;
    let h = 3.0 * xi_max / m as f64;
    for k in 0..=m {
        let xi = xi_max + k as f64 * h;
        let v = match ctx.evaluate(Complex64::new(0.0, xi), cfg.tail_order) {
            Ok(e) => e.value.norm(),
            Err(_) => eps_tail,
        };
        let wgt = if k == 0 || k == m { 0.5 } else { 1.0 };
        trunc += wgt * v * h;
    }
    trunc = 2.0 * trunc / SQRT_2PI;
    let dx = 2.0 * PI / (n as f64 * dxi);
    let grid = DensityGrid {
        kind,
        sigma,
        x0: -(half as f64) * dx,
        step: dx,
        values: fine,
        xi_cutoff: xi_max,
        quad_error_estimate: richardson + trunc + eps_tail + imag_fine,
        imag_residue: imag_fine,
        support_half_width: w,
    };
    let tol = grid.tolerance();
    let mass = grid.mass();
    if (mass - 1.0).abs() > 10.0 * tol {
        return Err(Error::invariant(format!("density mass {mass} off by more than 10x tolerance {tol}")));
    }
    let max = grid.values.iter().cloned().fold(f64::MIN, f64::max);
    let min = grid.values.iter().cloned().fold(f64::MAX, f64::min);
    if min < -1e-8 * max {
        return Err(Error::invariant(format!(
            "density undershoot {min:e} below -1e-8 x max ({max:e}); cutoff or step misconfigured"
        )));
    }
    Ok(grid)
}

/// Density values ordered from `x = -n/2 dx` upward, plus the largest imaginary residue.
fn invert(phi: &[Complex64], n: usize, dxi: f64) -> (Vec<f64>, f64) {
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(phi[0].re, 0.0);
    for k in 1..half {
        buf[k] = phi[k];
        buf[n - k] = phi[k].conj();
    }
    buf[half] = Complex64::new(phi[half].re, 0.0);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = dxi / SQRT_2PI;
    let mut imag: f64 = 0.0;
    let mut out = vec![0.0; n];
    for (j, v) in buf.iter().enumerate() {
        imag = imag.max(v.im.abs() * scale);
        // output index j is x_j = j dx for j < n/2 and (j - n) dx above
        let pos = if j < half { j + half } else { j - half };
        out[pos] = v.re * scale;
    }
    (out, imag)
}

/// Cumulative trapezoid of the density, scaled by `1/sqrt(2 pi)`, clamped to `[0, 1]` and kept monotone.
pub fn cdf(grid: &DensityGrid) -> CdfGrid {
    let mut vals = Vec::with_capacity(grid.values.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut run: f64 = 0.0;
    for (j, &v) in grid.values.iter().enumerate() {
        if j > 0 {
            acc += 0.5 * (prev + v) * grid.step / SQRT_2PI;
        }
        prev = v;
        run = run.max(acc.clamp(0.0, 1.0));
        vals.push(run);
    }
    CdfGrid { kind: grid.kind, sigma: grid.sigma, x0: grid.x0, step: grid.step, values: vals }
}

/// `int x^k D(x) dx / sqrt(2 pi)` on the grid.
pub fn grid_moment(grid: &DensityGrid, k: u32) -> Result<f64> {
    if k > 8 {
        return Err(Error::domain("grid moments limited to k <= 8"));
    }
    let mut acc = crate::special::KahanSum::default();
    for (j, &v) in grid.values.iter().enumerate() {
        acc.add(grid.x(j).powi(k as i32) * v);
    }
    Ok(acc.value() * grid.step / SQRT_2PI)
}

/// `k`-th moment as `(d/dz)^k value(z)` at `z = 0`, by a 64-node Cauchy integral on `|z| = r0`.
pub fn theoretical_moment(kind: DensityKind, sigma: f64, k: u32) -> Result<f64> {
    theoretical_moment_with(kind, sigma, k, 1.0)
}

pub fn theoretical_moment_with(kind: DensityKind, sigma: f64, k: u32, r0: f64) -> Result<f64> {
    if k > 8 {
        return Err(Error::domain("theoretical moments limited to k <= 8"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let pk = kind.product();
    pk.check_sigma(sigma)?;
    let cfg = ProductConfig::for_sigma(sigma);
    let ctx = ProductContext::get(pk, Complex64::new(sigma, 0.0), cfg.prime_cutoff)?;
    const M: usize = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..M {
        let th = 2.0 * PI * j as f64 / M as f64;
        let z = Complex64::from_polar(r0, th);
        let v = ctx.evaluate(z, cfg.tail_order)?.value;
        acc += v * Complex64::from_polar(1.0, -(k as f64) * th);
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    Ok((acc / M as f64).re * fact / r0.powi(k as i32))
}
