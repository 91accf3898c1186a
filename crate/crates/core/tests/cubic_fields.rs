use artin_core::cubic_fields::*;
use artin_core::local_arithmetic::SplittingType;
use artin_core::primes::{is_prime, primes_up_to};
use artin_core::special::zeta;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::sync::OnceLock;

fn tables_50k() -> &'static (FieldTable, FieldTable) {
    static T: OnceLock<(FieldTable, FieldTable)> = OnceLock::new();
    T.get_or_init(|| {
        let (p, m, _) = enumerate_both(50_000, &EnumerateConfig::default()).unwrap();
        (p, m)
    })
}

fn roots_mod(poly: [i64; 3], p: u64) -> Vec<u64> {
    let pi = p as i128;
    (0..p)
        .filter(|&x| {
            let x = x as i128;
            let [a, b, c] = poly.map(|v| v as i128);
            (((x * x % pi) * x + a * (x * x % pi) + b * x + c) % pi + pi) % pi == 0
        })
        .collect()
}

/// Smallest `|disc|` over irreducible monic cubics with coefficients in `[-b, b]` and non-square discriminant.
fn smallest_poly_disc(b: i64, sign: i128) -> i128 {
    let mut best = i128::MAX;
    for a2 in -b..=b {
        for a1 in -b..=b {
            for a0 in -b..=b {
                let poly = [a2, a1, a0];
                let d = poly_disc(poly);
                if d == 0 || d.signum() != sign || !is_irreducible(poly) {
                    continue;
                }
                let r = (d.abs() as f64).sqrt().round() as i128;
                if d > 0 && r * r == d {
                    continue;
                }
                best = best.min(d.abs());
            }
        }
    }
    best
}

#[test]
fn poly_disc_examples() {
    assert_eq!(poly_disc([0, -1, -1]), -23);
    assert_eq!(poly_disc([0, 0, -1]), -27);
    assert!(!is_irreducible([0, 0, -1]));
    assert_eq!(poly_disc([0, -3, -1]), 81);
    assert!(CubicField::new([0, -3, -1]).is_err());
    assert!(CubicField::new([1, -2, -1]).is_err());
    assert!(field_disc([0, 0, -1]).is_err());
}

#[test]
fn dedekind_examples() {
    assert!(dedekind_max_at([0, -1, -1], 2).unwrap().maximal);
    assert!(dedekind_max_at([0, -1, -1], 23).unwrap().maximal);
    // Dedekind's x^3 + x^2 - 2x + 8: polynomial disc -4 * 503, index 2
    let r = dedekind_max_at([1, -2, 8], 2).unwrap();
    assert!(!r.maximal);
    assert_eq!(r.index_valuation_removed, 1);
    assert_eq!(field_disc([1, -2, 8]).unwrap(), -503);
}

#[test]
fn splitting_examples() {
    let f = CubicField::new([0, -1, -1]).unwrap();
    assert_eq!(f.disc, -23);
    assert_eq!(f.splitting_type(5).unwrap(), SplittingType::S21);
    assert_eq!(f.splitting_type(2).unwrap(), SplittingType::S3);
    assert_eq!(f.splitting_type(23).unwrap(), SplittingType::S1121);
    // Dedekind's field: 2 is a common index divisor and splits completely
    let g = CubicField::new([1, -2, 8]).unwrap();
    assert_eq!(g.splitting_type(2).unwrap(), SplittingType::S111);
}

#[test]
fn smallest_discriminants_match_the_brute_force_oracle() {
    let (plus, minus) = tables_50k();
    assert_eq!(smallest_poly_disc(4, -1), 23);
    assert_eq!(smallest_poly_disc(4, 1), 148);
    assert_eq!(minus.fields[0].disc, -23);
    assert_eq!(plus.fields[0].disc, 148);
}

#[test]
fn first_discriminants_match_published_lists() {
    let (plus, minus) = tables_50k();
    let m: Vec<i64> = minus.fields.iter().map(|f| f.disc).take_while(|d| *d > -141).collect();
    assert_eq!(m, vec![-23, -31, -44, -59, -76, -83, -87, -104, -107, -108, -116, -135, -139, -140]);
    let p: Vec<i64> = plus.fields.iter().map(|f| f.disc).take_while(|d| *d < 1000).collect();
    assert_eq!(
        p,
        vec![148, 229, 257, 316, 321, 404, 469, 473, 564, 568, 621, 697, 733, 756, 761, 785, 788, 837, 892, 940, 985, 993]
    );
}

#[test]
fn table_invariants() {
    let (plus, minus) = tables_50k();
    for t in [plus, minus] {
        assert!(t.fields.windows(2).all(|w| (w[0].abs_disc(), w[0].poly) < (w[1].abs_disc(), w[1].poly)));
        for f in &t.fields {
            assert_eq!(f.signature(), t.signature);
            assert!(f.abs_disc() < t.x_bound);
            assert!(matches!(f.disc.rem_euclid(4), 0 | 1));
            let ind = f.index as i128;
            assert_eq!(poly_disc(f.poly), ind * ind * f.disc as i128);
            for (i, p) in fingerprint_primes().into_iter().enumerate().skip(2) {
                let ramified = f.fingerprint[i].is_ramified();
                assert_eq!(ramified, f.disc % p as i64 == 0, "{:?} at {p}", f.poly);
            }
        }
    }
}

#[test]
fn same_discriminant_fields_are_distinct() {
    let (plus, minus) = tables_50k();
    for t in [plus, minus] {
        for w in t.fields.windows(2) {
            if w[0].disc == w[1].disc {
                assert!(!isomorphic(&w[0], &w[1]).unwrap());
            }
        }
    }
    // x^3 - x - 1 and its translate by 1 describe the same field
    let a = CubicField::new([0, -1, -1]).unwrap();
    let b = CubicField::new([3, 2, -1]).unwrap();
    assert!(isomorphic(&a, &b).unwrap());
}

#[test]
fn counts_match_the_two_term_prediction() {
    let (plus, minus) = tables_50k();
    for t in [plus, minus] {
        let pred = count_prediction(t.signature, 50_000.0, &BTreeMap::new()).unwrap();
        let rel = (t.len() as f64 / pred.total() - 1.0).abs();
        assert!(rel < 0.10, "{:?}: {} vs {}", t.signature, t.len(), pred.total());
    }
}

#[test]
fn minus_density_approaches_its_limit_from_below() {
    let (_, minus) = tables_50k();
    let limit = 3.0 / (12.0 * zeta(3.0));
    assert!((limit - 0.2080).abs() < 1e-4);
    let r1 = minus.restrict(5_000).len() as f64 / 5_000.0;
    let r2 = minus.len() as f64 / 50_000.0;
    assert!(r1 < r2 && r2 < limit, "{r1} {r2} {limit}");
}

#[test]
fn prediction_examples() {
    let empty = BTreeMap::new();
    let p = count_prediction(Signature::Plus, 1e6, &empty).unwrap();
    assert!((p.main - 1e6 / (12.0 * 1.202_056_903_159_594)).abs() < 1e-6);
    assert!(p.secondary < 0.0);
    let m = count_prediction(Signature::Minus, 1e6, &empty).unwrap();
    assert_eq!(m.main / p.main, 3.0);
    let conditions = BTreeMap::from([(2u64, SplittingType::S111)]);
    let s = count_prediction(Signature::Plus, 1e6, &conditions).unwrap();
    assert!((s.main / p.main - 2.0 / 21.0).abs() < 1e-15);
    assert!((secondary_coefficient() - (-0.147_685_261_030_335)).abs() < 1e-12);
}

#[test]
fn csv_round_trip_and_rejections() {
    let (_, minus) = tables_50k();
    let small = minus.restrict(2_000);
    let back = FieldTable::from_csv(&small.to_csv(), Some(2_000)).unwrap();
    assert_eq!(back, small);
    assert_eq!(back.to_csv(), small.to_csv());
    let cached = FieldTable::from_csv(&small.to_cache_csv(), Some(2_000)).unwrap();
    assert_eq!(cached, small);
    let one = FieldTable::from_csv("disc,a2,a1,a0\n\u{2212}23,0,\u{2212}1,\u{2212}1\n", None).unwrap();
    assert_eq!(one.fields[0].disc, -23);
    assert_eq!(one.fields[0].poly, [0, -1, -1]);
    assert!(FieldTable::from_csv("disc,a2,a1,a0\n49,1,-2,-1\n", None).is_err());
    assert!(FieldTable::from_csv("disc,a2,a1,a0\n-22,0,-1,-1\n", None).is_err());
    match FieldTable::from_csv("disc,a2,a1,a0\n-23,0,-1,-1\n-31,0,x,-1\n", None) {
        Err(artin_core::error::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn enumeration_ceiling() {
    assert!(enumerate_both(2_000_000, &EnumerateConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unramified_splitting_matches_root_count(a2 in -3i64..=3, a1 in -30i64..=30, a0 in -30i64..=30, pi in 0usize..60) {
        let poly = [a2, a1, a0];
        prop_assume!(is_irreducible(poly));
        let field = match CubicField::new(poly) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let p = primes_up_to(400)[pi] as u64;
        prop_assume!(poly_disc(poly) % p as i128 != 0);
        let want = match roots_mod(poly, p).len() {
            3 => SplittingType::S111,
            1 => SplittingType::S21,
            0 => SplittingType::S3,
            n => panic!("{n} roots of a separable cubic"),
        };
        prop_assert_eq!(field.splitting_type(p).unwrap(), want);
    }

    #[test]
    fn large_primes_use_the_same_rule(a1 in -30i64..=30, a0 in 1i64..=30, k in 0u64..2000) {
        let poly = [0, a1, a0];
        prop_assume!(is_irreducible(poly));
        let field = match CubicField::new(poly) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let mut p = 1_000_003 + 2 * k * 997;
        while !is_prime(p) {
            p += 2;
        }
        prop_assume!(poly_disc(poly) % p as i128 != 0);
        let n_roots = roots_by_frobenius(poly, p as i128);
        let want = match n_roots {
            3 => SplittingType::S111,
            1 => SplittingType::S21,
            0 => SplittingType::S3,
            n => panic!("{n} roots"),
        };
        prop_assert_eq!(field.splitting_type(p).unwrap(), want);
    }
}

/// Number of roots of a separable cubic mod `p`, as the degree of `gcd(f, x^p - x)`.
fn roots_by_frobenius(poly: [i64; 3], p: i128) -> usize {
    let m = |x: i128| x.rem_euclid(p);
    let f = [m(poly[2] as i128), m(poly[1] as i128), m(poly[0] as i128)];
    // multiply two residues a0 + a1 x + a2 x^2 modulo x^3 + f2 x^2 + f1 x + f0
    let mul = |a: [i128; 3], b: [i128; 3]| -> [i128; 3] {
        let mut c = [0i128; 5];
        for i in 0..3 {
            for j in 0..3 {
                c[i + j] = m(c[i + j] + a[i] * b[j]);
            }
        }
        for k in (3..5).rev() {
            let t = c[k];
            c[k] = 0;
            c[k - 1] = m(c[k - 1] - t * f[2]);
            c[k - 2] = m(c[k - 2] - t * f[1]);
            c[k - 3] = m(c[k - 3] - t * f[0]);
        }
        [c[0], c[1], c[2]]
    };
    let mut result = [1, 0, 0];
    let mut base = [0, 1, 0];
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(result, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    // g = x^p - x mod f
    let g = [result[0], m(result[1] - 1), result[2]];
    let monic_f = vec![f[0], f[1], f[2], 1];
    poly_gcd_degree(monic_f, g.to_vec(), p)
}

fn inv(a: i128, p: i128) -> i128 {
    let mut r = 1i128;
    let mut b = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn trim(mut v: Vec<i128>) -> Vec<i128> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn poly_gcd_degree(a: Vec<i128>, b: Vec<i128>, p: i128) -> usize {
    let (mut a, mut b) = (trim(a), trim(b));
    while !(b.len() == 1 && b[0] == 0) {
        // a mod b
        let lead = inv(*b.last().unwrap(), p);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let shift = a.len() - b.len();
            let t = a.last().unwrap() * lead % p;
            for (i, bv) in b.iter().enumerate() {
                a[i + shift] = (a[i + shift] - t * bv).rem_euclid(p);
            }
            a = trim(a);
            if a.len() < b.len() || (a.len() == 1 && a[0] == 0) {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() - 1
}
