//! Exact identities and invariants checked by `artin selftest`.

use artin_core::cubic_fields::CubicField;
use artin_core::error::{Error, Result};
use artin_core::local_arithmetic::{
    lambda_coefficient, log_deriv_factor, log_factor, series_coeffs, truncation_bound, weight_c, weight_k, LCase,
    SeriesKind, SplittingType,
};
use artin_core::lvalues::{lambda_sieve, SplitTable};
use artin_core::primes::primes_up_to;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

struct Check {
    name: &'static str,
    detail: String,
    ok: bool,
}

fn weights_c_exact() -> Result<Check> {
    let mut bad = Vec::new();
    for p in primes_up_to(10_000) {
        let w = weight_c(p as u64)?;
        let s: Ratio<i128> = SplittingType::ALL.iter().map(|&a| w.get(a)).sum();
        if s != Ratio::from_integer(1) {
            bad.push(p);
        }
    }
    Ok(Check { name: "C_p weights sum to 1 exactly, p <= 10^4", detail: format!("{} failures", bad.len()), ok: bad.is_empty() })
}

fn weights_k_sum() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for p in primes_up_to(1_000) {
        let w = weight_k(p as u64)?;
        let s: f64 = SplittingType::ALL.iter().map(|&a| w.get(a)).sum();
        worst = worst.max((s - 1.0).abs());
    }
    Ok(Check { name: "K_p weights sum to 1 within 1e-14, p <= 10^3", detail: format!("max deviation {worst:.2e}"), ok: worst <= 1e-14 })
}

fn truncation_bounds() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let mut failures = 0;
    let trials = 200;
    for _ in 0..trials {
        let z = Complex64::from_polar(rng.gen_range(0.0..8.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let wmax = 1.0 / (8.0 * z.norm() + 4.0);
        let w = Complex64::from_polar(rng.gen_range(0.0..wmax), rng.gen_range(0.0..std::f64::consts::TAU));
        let a = SplittingType::ALL[rng.gen_range(0..5)];
        let n: u32 = rng.gen_range(1..=24);
        for kind in [SeriesKind::H, SeriesKind::G] {
            let exact = match kind {
                SeriesKind::H => (z * log_factor(a, w)?).exp(),
                SeriesKind::G => (z * log_deriv_factor(a, w)?).exp(),
            };
            let c = series_coeffs(kind, a, z, 1.0, n as usize);
            let mut partial = Complex64::new(0.0, 0.0);
            let mut pw = Complex64::new(1.0, 0.0);
            for v in &c.values {
                partial += v * pw;
                pw *= w;
            }
            // double rounding in the partial sum is allowed on top of the majorant
            let scale = c.values.iter().map(|v| v.norm()).fold(exact.norm(), f64::max);
            if (exact - partial).norm() > truncation_bound(z, w, n) + 1e-14 * scale {
                failures += 1;
            }
        }
    }
    Ok(Check {
        name: "series remainder within 2 (4|z|+2)^N |w|^N",
        detail: format!("{failures} failures in {} cases", 2 * trials),
        ok: failures == 0,
    })
}

fn lambda_multiplicativity() -> Result<Check> {
    let field = CubicField::new([0, -1, -1])?;
    let n_max = 2_000usize;
    let split = SplitTable::new(&field, n_max)?;
    let mut splits = BTreeMap::new();
    for p in primes_up_to(n_max as u64) {
        splits.insert(p as u64, field.splitting_type(p as u64)?);
    }
    let mut worst: f64 = 0.0;
    for case in [LCase::I, LCase::II] {
        let z = Complex64::new(0.7, -0.3);
        let sieve = lambda_sieve(&split, z, case, n_max)?;
        for (n, v) in sieve.iter().enumerate().skip(1) {
            let direct = lambda_coefficient(n as u64, &splits, z, case)?;
            worst = worst.max((v - direct).norm() / (1.0 + direct.norm()));
        }
    }
    Ok(Check {
        name: "sieved lambda_z(n) equals the product over prime powers, n <= 2000",
        detail: format!("max relative gap {worst:.2e}"),
        ok: worst < 1e-12,
    })
}

pub fn run() -> Result<()> {
    let checks = [weights_c_exact()?, weights_k_sum()?, truncation_bounds()?, lambda_multiplicativity()?];
    let mut all = true;
    for c in &checks {
        println!("{} {}: {}", if c.ok { "ok  " } else { "FAIL" }, c.name, c.detail);
        all &= c.ok;
    }
    if all {
        Ok(())
    } else {
        Err(Error::invariant("selftest failed"))
    }
}
