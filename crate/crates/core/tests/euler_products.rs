use artin_core::euler_products::*;
use artin_core::local_arithmetic::{log_factor_real, weights_c_real, SplittingType};
use artin_core::primes::primes_up_to;
use artin_core::special::zeta;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn value_at_zero_is_one_exactly() {
    for kind in ProductKind::ALL {
        for sigma in [0.8, 1.0, 1.5, 2.0] {
            let e = evaluate_at(kind, sigma, c(0.0, 0.0)).unwrap();
            assert_eq!(e.value, c(1.0, 0.0), "{} sigma {sigma}", kind.label());
            assert_eq!(e.tail_bound, 0.0);
        }
    }
}

#[test]
fn domain_errors() {
    assert!(evaluate_at(ProductKind::F, 0.5, c(1.0, 0.0)).is_err());
    assert!(evaluate_at(ProductKind::G, 2.0 / 3.0, c(1.0, 0.0)).is_err());
    assert!(evaluate_at(ProductKind::GStar, 0.6, c(1.0, 0.0)).is_err());
    assert!(evaluate_at(ProductKind::FStar, 0.6, c(1.0, 0.0)).is_ok());
    let bad = ProductConfig::for_sigma(1.0).with_cutoff(50);
    assert!(evaluate(ProductKind::F, c(1.0, 0.0), c(1.0, 0.0), &bad).is_err());
}

/// `sum_{p > P} p^-2`, approximated by `int_P^inf dt / (t^2 log t) = E1(log P)` through its asymptotic series.
fn inverse_square_prime_tail(p: f64) -> f64 {
    let l = p.ln();
    let mut term = 1.0;
    let mut acc = 0.0;
    for k in 0..6 {
        acc += term;
        term *= -((k + 1) as f64) / l;
    }
    acc / (p * l)
}

/// `zeta(2) zeta(3)^2 prod_p (1 + p^-2 - 2p^-3 - 2p^-4 + 2p^-6 + p^-7 - p^-8)`.
fn factorised_mean_l1() -> f64 {
    let mut log_prod = 0.0;
    let limit = 2_000_000u64;
    for p in primes_up_to(limit) {
        let q = 1.0 / p as f64;
        let q2 = q * q;
        let f = q2 - 2.0 * q2 * q - 2.0 * q2 * q2 + 2.0 * q2 * q2 * q2 + q2 * q2 * q2 * q - q2 * q2 * q2 * q2;
        log_prod += f.ln_1p();
    }
    let tail = inverse_square_prime_tail(limit as f64);
    zeta(2.0) * zeta(3.0).powi(2) * (log_prod + tail).exp()
}

#[test]
fn mean_of_l_at_one_matches_factorised_product() {
    let e = evaluate_at(ProductKind::F, 1.0, c(1.0, 0.0)).unwrap();
    let oracle = factorised_mean_l1();
    assert!((e.value.re - oracle).abs() < 1e-10, "{} vs {oracle}", e.value.re);
    assert_eq!(e.value.im, 0.0);
}

#[test]
fn hermitian_symmetry_at_xi_five() {
    let a = evaluate_at(ProductKind::F, 1.0, c(0.0, 5.0)).unwrap().value;
    let b = evaluate_at(ProductKind::F, 1.0, c(0.0, -5.0)).unwrap().value;
    assert!((a - b.conj()).norm() < 1e-15);
}

#[test]
fn modulus_bound_examples() {
    assert!(modulus_bound_check(ProductKind::F, 1.0, 0.0).unwrap());
    assert!(modulus_bound_check(ProductKind::F, 0.9, 4.0).unwrap());
    assert!(modulus_bound_check(ProductKind::GStar, 0.8, 2.0).unwrap());
}

#[test]
fn real_arguments_give_positive_values() {
    for kind in ProductKind::ALL {
        for z in [0.5, 1.0, 3.0] {
            let v = evaluate_at(kind, 1.2, c(z, 0.0)).unwrap().value;
            assert!(v.re > 0.0 && v.im == 0.0, "{} z {z}: {v}", kind.label());
        }
    }
}

#[test]
fn doubling_the_cutoff_stays_within_the_tail_bound() {
    for kind in ProductKind::ALL {
        for sigma in [0.8, 1.0, 1.5] {
            if kind.check_sigma(sigma).is_err() {
                continue;
            }
            for z in [c(1.0, 0.0), c(0.0, 3.0), c(-0.5, 1.5)] {
                let p = 50_000;
                let cfg = ProductConfig::for_sigma(sigma).with_cutoff(p);
                let a = evaluate(kind, c(sigma, 0.0), z, &cfg).unwrap();
                let b = evaluate(kind, c(sigma, 0.0), z, &cfg.with_cutoff(2 * p)).unwrap();
                let gap = (a.value - b.value).norm();
                assert!(gap <= a.tail_bound, "{} sigma {sigma} z {z}: gap {gap:e} bound {:e}", kind.label(), a.tail_bound);
            }
        }
    }
}

#[test]
fn tail_bounds_are_finite_near_the_domain_edge() {
    for (kind, sigma) in [(ProductKind::G, 0.67), (ProductKind::GStar, 0.7), (ProductKind::F, 0.51), (ProductKind::FStar, 0.55)] {
        for z in [c(0.0, 3.0), c(0.3, -1.5)] {
            let e = evaluate_at(kind, sigma, z).unwrap_or_else(|err| panic!("{} sigma {sigma} z {z}: {err}", kind.label()));
            assert!(e.tail_bound.is_finite() && e.value.norm().is_finite(), "{} sigma {sigma}", kind.label());
        }
    }
}

#[test]
fn xi_cutoff_examples() {
    let xi = xi_cutoff(ProductKind::F, 1.0, 0.5).unwrap();
    assert!(evaluate_at(ProductKind::F, 1.0, c(0.0, xi)).unwrap().value.norm() < 0.5);
    let x1 = xi_cutoff(ProductKind::F, 1.0, 1e-8).unwrap();
    assert!(evaluate_at(ProductKind::F, 1.0, c(0.0, 2.0 * x1)).unwrap().value.norm() < 1e-8);
    let x2 = xi_cutoff(ProductKind::F, 2.0, 1e-8).unwrap();
    assert!(x2 > x1, "{x2} <= {x1}");
    assert!(xi_cutoff(ProductKind::F, 1.0, 1.5).is_err());
}

#[test]
fn growth_budget_examples() {
    let b0 = upper_bound_budget(ProductKind::F, 0.9, 0.0).unwrap();
    assert!(b0 >= 1.0);
    let b10 = upper_bound_budget(ProductKind::F, 0.9, 10.0).unwrap();
    for z in [c(10.0, 0.0), c(-10.0, 0.0), c(0.0, 10.0)] {
        assert!(b10 >= evaluate_at(ProductKind::F, 0.9, z).unwrap().value.norm());
    }
    let b20 = upper_bound_budget(ProductKind::F, 0.9, 20.0).unwrap();
    // log of the bound grows like (r + 3)^(1/sigma) / log(r + 3), faster than any power of log r
    let shape = |r: f64| (r + 3.0).powf(1.0 / 0.9) / (r + 3.0).ln();
    assert!((b20.ln() / b10.ln() - shape(20.0) / shape(10.0)).abs() < 1e-9);
    assert!(b20.ln() / b10.ln() > (20f64).ln() / (10f64).ln());
    assert!(upper_bound_budget(ProductKind::F, 1.0, 1.0).is_err());
}

#[test]
fn first_derivative_at_zero_is_the_expectation_sum() {
    // d/dz value at z = 0 is sum_p E[f_p] with E[f_p] = sum_a C_p(a) F(1/p; a)
    let limit = 10_000_000u64;
    let mut acc = 0.0;
    let mut last = 0.0;
    for p in primes_up_to(limit) {
        let t = p as f64;
        let w = weights_c_real(t);
        last = SplittingType::ALL.iter().map(|&a| w[a.index()] * log_factor_real(a, 1.0 / t)).sum::<f64>();
        acc += last;
    }
    // E[f_p] ~ k / p^2 in the tail
    let pl = *primes_up_to(limit).last().unwrap() as f64;
    acc += last * pl * pl * inverse_square_prime_tail(limit as f64);
    let m1 = artin_core::density::theoretical_moment(artin_core::density::DensityKind::CScript, 1.0, 1).unwrap();
    assert!((m1 - acc).abs() < 1e-8, "{m1} vs {acc}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modulus_at_imaginary_arguments(kind_ix in 0usize..4, sigma in 0.7f64..2.5, xi in -20.0f64..20.0) {
        let kind = ProductKind::ALL[kind_ix];
        prop_assume!(kind.check_sigma(sigma).is_ok());
        let e = evaluate_at(kind, sigma, c(0.0, xi)).unwrap();
        prop_assert!(e.value.norm() <= 1.0 + e.tail_bound);
        let f = evaluate_at(kind, sigma, c(0.0, -xi)).unwrap();
        prop_assert!((e.value - f.value.conj()).norm() <= 1e-14);
    }
}
