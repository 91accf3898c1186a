//! Acceptance checks, one PASS/FAIL line per criterion. Run with
//! `cargo test --release -p artin-cli --test acceptance`; the field-level criteria work at `X = 10^5`
//! and take most of the runtime.

use artin_core::cubic_fields::*;
use artin_core::density::*;
use artin_core::euler_products::*;
use artin_core::experiments::*;
use artin_core::local_arithmetic::*;
use artin_core::lvalues::*;
use artin_core::primes::primes_up_to;
use artin_core::special::zeta;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

const X: u64 = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// shared data

fn tables() -> &'static (FieldTable, FieldTable) {
    static T: OnceLock<(FieldTable, FieldTable)> = OnceLock::new();
    T.get_or_init(|| {
        let (p, m, _) = enumerate_both(X, &EnumerateConfig::default()).expect("enumeration");
        (p, m)
    })
}

fn table(sig: Signature) -> &'static FieldTable {
    let (p, m) = tables();
    match sig {
        Signature::Plus => p,
        Signature::Minus => m,
    }
}

fn log_l1(sig: Signature) -> &'static FieldValues {
    static P: OnceLock<FieldValues> = OnceLock::new();
    static M: OnceLock<FieldValues> = OnceLock::new();
    let cell = if sig == Signature::Plus { &P } else { &M };
    cell.get_or_init(|| log_l_values(table(sig), 1.0, &YPolicy::default()).expect("log L(1) values"))
}

fn gammas(sig: Signature) -> &'static FieldValues {
    static P: OnceLock<FieldValues> = OnceLock::new();
    static M: OnceLock<FieldValues> = OnceLock::new();
    let cell = if sig == Signature::Plus { &P } else { &M };
    cell.get_or_init(|| euler_kronecker_values(table(sig), &YPolicy::default()).expect("Euler-Kronecker values"))
}

fn model_c1() -> &'static CdfGrid {
    static G: OnceLock<CdfGrid> = OnceLock::new();
    G.get_or_init(|| cdf(&build_density(DensityKind::CScript, 1.0, 1e-10, 1024).expect("density")))
}

// ---------------------------------------------------------------------------
// criteria

fn exact_weights() -> Outcome {
    let mut bad = Vec::new();
    for p in primes_up_to(10_000) {
        let w = weight_c(p as u64).unwrap();
        let s: Ratio<i128> = SplittingType::ALL.iter().map(|&a| w.get(a)).sum();
        if s != Ratio::from_integer(1) {
            bad.push(format!("C_{p}"));
        }
    }
    let mut worst: f64 = 0.0;
    for p in primes_up_to(1_000) {
        let w = weight_k(p as u64).unwrap();
        let s: f64 = SplittingType::ALL.iter().map(|&a| w.get(a)).sum();
        worst = worst.max((s - 1.0).abs());
    }
    Outcome::new(
        bad.is_empty() && worst <= 1e-14,
        format!("C weights exact for p <= 1e4 ({} failures); max |sum K - 1| = {worst:.1e} for p <= 1e3", bad.len()),
    )
}

fn truncation_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let mut violations = 0;
    let mut majorant_violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..500 {
        let a = SplittingType::ALL[rng.gen_range(0..5)];
        let z = Complex64::from_polar(rng.gen_range(0.0..8.0), rng.gen_range(0.0..2.0 * PI));
        let w = Complex64::from_polar(rng.gen::<f64>() / (8.0 * z.norm() + 4.0), rng.gen_range(0.0..2.0 * PI));
        let n = rng.gen_range(1..=24u32);
        let (kind, exact) = if rng.gen::<bool>() {
            (SeriesKind::G, (z * log_deriv_factor(a, w).unwrap()).exp())
        } else {
            (SeriesKind::H, (z * log_factor(a, w).unwrap()).exp())
        };
        let coeffs = series_coeffs(kind, a, z, 1.0, n as usize);
        let mut partial = c(0.0, 0.0);
        let mut pw = c(1.0, 0.0);
        for v in &coeffs.values {
            partial += v * pw;
            pw *= w;
        }
        let scale = coeffs.values.iter().map(|v| v.norm()).fold(exact.norm(), f64::max);
        let bound = truncation_bound(z, w, n);
        let err = (exact - partial).norm();
        // double rounding in the partial sum is allowed on top of the majorant
        let allowed = bound + 1e-14 * scale;
        if err > allowed {
            violations += 1;
        }
        worst_ratio = worst_ratio.max(err / allowed);
        let h = series_coeffs(SeriesKind::H, a, z, 1.0, 30);
        for (r, v) in h.values.iter().enumerate() {
            if v.norm() > reference_h(r as u32, c(2.0 * z.norm(), 0.0)).re * (1.0 + 1e-12) + 1e-300 {
                majorant_violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && majorant_violations == 0,
        format!(
            "500 cases: {violations} remainder violations (largest remainder / allowance {worst_ratio:.3}), \
             {majorant_violations} entrywise majorant violations"
        ),
    )
}

fn characteristic_functions() -> Outcome {
    let mut problems = Vec::new();
    for kind in ProductKind::ALL {
        for sigma in [0.8, 1.0, 1.5, 2.0] {
            let e = evaluate_at(kind, sigma, c(0.0, 0.0)).unwrap();
            if e.value != c(1.0, 0.0) {
                problems.push(format!("{} value at 0 is {}", kind.label(), e.value));
            }
        }
    }
    // 10 sigma values by 20 xi values, each kind where it is defined
    let mut points = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_sym: f64 = 0.0;
    for i in 0..10 {
        let sigma = 0.7 + 0.2 * i as f64;
        for j in 0..20 {
            let xi = -20.0 + 40.0 * j as f64 / 19.0;
            for kind in ProductKind::ALL {
                if kind.check_sigma(sigma).is_err() {
                    continue;
                }
                let a = evaluate_at(kind, sigma, c(0.0, xi)).unwrap();
                let b = evaluate_at(kind, sigma, c(0.0, -xi)).unwrap();
                points += 1;
                worst_excess = worst_excess.max(a.value.norm() - 1.0 - a.tail_bound);
                worst_sym = worst_sym.max((a.value - b.value.conj()).norm());
            }
        }
    }
    if worst_excess > 0.0 {
        problems.push(format!("|F(i xi)| exceeds 1 + tail by {worst_excess:.2e}"));
    }
    if worst_sym > 1e-14 {
        problems.push(format!("symmetry defect {worst_sym:.2e}"));
    }
    let mut worst_doubling: f64 = 0.0;
    for kind in ProductKind::ALL {
        for sigma in [0.8, 1.0, 1.5] {
            if kind.check_sigma(sigma).is_err() {
                continue;
            }
            for z in [c(1.0, 0.0), c(0.0, 3.0), c(-0.5, 1.5)] {
                let cfg = ProductConfig::for_sigma(sigma).with_cutoff(50_000);
                let a = evaluate(kind, c(sigma, 0.0), z, &cfg).unwrap();
                let b = evaluate(kind, c(sigma, 0.0), z, &cfg.with_cutoff(100_000)).unwrap();
                worst_doubling = worst_doubling.max((a.value - b.value).norm() / a.tail_bound);
            }
        }
    }
    if worst_doubling > 1.0 {
        problems.push(format!("doubling P moved a value by {worst_doubling:.2} tail bounds"));
    }
    Outcome::new(
        problems.is_empty(),
        format!(
            "{points} grid points; max |F| - 1 - tail = {worst_excess:.2e}; symmetry defect {worst_sym:.1e}; \
             doubling P uses {worst_doubling:.3} of the tail bound{}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn density_checks() -> Outcome {
    let mut worst_mass: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    let mut outside: f64 = 0.0;
    let h = 2.0 * zeta(2.0).ln();
    for kind in DensityKind::ALL {
        for sigma in [0.9, 1.0, 1.5, 2.0] {
            let g = match build_density(kind, sigma, 1e-10, 1024) {
                Ok(g) => g,
                Err(e) => return Outcome::new(false, format!("{} at sigma {sigma}: {e}", kind.label())),
            };
            worst_mass = worst_mass.max((g.mass() - 1.0).abs());
            for k in 1..=4 {
                let a = grid_moment(&g, k).unwrap();
                let b = theoretical_moment(kind, sigma, k).unwrap();
                worst_moment = worst_moment.max((a - b).abs() / b.abs());
            }
            if sigma == 2.0 && matches!(kind, DensityKind::CScript | DensityKind::KScript) {
                outside = outside.max(g.mass_outside(-h, h));
            }
        }
    }
    Outcome::new(
        worst_mass <= 1e-6 && worst_moment <= 1e-4 && outside < 1e-5,
        format!(
            "4 kinds x 4 sigma: max |mass - 1| = {worst_mass:.1e}, max relative moment gap (k <= 4) = {worst_moment:.1e}, \
             mass outside +-2 log zeta(2) at sigma 2 = {outside:.1e}"
        ),
    )
}

fn monte_carlo_vs_inversion() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, sigma) in [0.9, 1.0, 1.5].into_iter().enumerate() {
        let s = monte_carlo(sigma, 1_000_000, 1000 + i as u64, &MonteCarloConfig::default()).unwrap();
        let model = cdf(&build_density(DensityKind::CScript, sigma, 1e-10, 1024).unwrap());
        let d = kolmogorov_distance(&s.samples, &model);
        pass &= d <= 0.01;
        parts.push(format!("sigma {sigma}: {d:.4}"));
    }
    Outcome::new(pass, format!("KS distance of 1e6 samples to the inverted CDF: {}", parts.join(", ")))
}

fn lvalue_paths() -> Outcome {
    let sigmas = [1.2, 1.5, 2.0];
    let (plus, minus) = tables();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fields: Vec<&CubicField> = (0..100)
        .map(|i| {
            let t = if i % 2 == 0 { plus } else { minus };
            &t.fields[rng.gen_range(0..t.len())]
        })
        .collect();
    let mut worst = [0.0f64; 3];
    let mut worst_rich = [0.0f64; 3];
    let mut worst_tail = [0.0f64; 3];
    for f in &fields {
        let direct = log_l_direct_multi(f, &sigmas, 10_000_000).unwrap();
        let smooth = smoothed_l_multi(f, &sigmas, 1e5).unwrap();
        for j in 0..3 {
            let d = direct[j].0.exp();
            worst[j] = worst[j].max((smooth[j].value / d - 1.0).abs());
            worst_rich[j] = worst_rich[j].max(((2.0 * smooth[j].value - smooth[j].value_half_y) / d - 1.0).abs());
            worst_tail[j] = worst_tail[j].max(direct[j].1);
        }
    }
    // coefficient sieve against the definitional product on a subset
    let mut sieve_gap: f64 = 0.0;
    for f in fields.iter().take(10) {
        let n_max = 10_000usize;
        let split = SplitTable::new(f, n_max).unwrap();
        let splits: BTreeMap<u64, SplittingType> =
            primes_up_to(n_max as u64).into_iter().map(|p| (p as u64, f.splitting_type(p as u64).unwrap())).collect();
        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        for case in [LCase::I, LCase::II] {
            let sieve = lambda_sieve(&split, z, case, n_max).unwrap();
            for n in 1..=n_max {
                let d = lambda_coefficient(n as u64, &splits, z, case).unwrap();
                sieve_gap = sieve_gap.max((sieve[n] - d).norm() / (1.0 + d.norm()));
            }
        }
    }
    let fmt = |v: &[f64; 3]| sigmas.iter().zip(v).map(|(s, g)| format!("{s}: {g:.1e}")).collect::<Vec<_>>().join(", ");
    Outcome::new(
        worst.iter().all(|&g| g < 1e-6) && sieve_gap < 1e-12,
        format!(
            "100 fields, P = 1e7 against Y = 1e5: max relative gap {}; extrapolated 2S(Y) - S(Y/2) gap {}; \
             direct tail bound {}; sieve against definitional product for n <= 1e4: {sieve_gap:.1e}",
            fmt(&worst),
            fmt(&worst_rich),
            fmt(&worst_tail)
        ),
    )
}

/// Smallest `|field disc|` of the given sign among non-Galois fields generated by monic cubics
/// with coefficients in `[-b, b]`.
fn smallest_field_disc(b: i64, sign: i64) -> i64 {
    let mut best = i64::MAX;
    for a2 in -b..=b {
        for a1 in -b..=b {
            for a0 in -b..=b {
                let poly = [a2, a1, a0];
                if poly_disc(poly) == 0 || !is_irreducible(poly) {
                    continue;
                }
                let d = field_disc(poly).unwrap();
                let r = (d.unsigned_abs() as f64).sqrt().round() as i64;
                if d.signum() != sign || (d > 0 && r * r == d) {
                    continue;
                }
                best = best.min(d.abs());
            }
        }
    }
    best
}

fn field_population() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for sig in Signature::BOTH {
        let t = table(sig);
        let pred = count_prediction(sig, X as f64, &BTreeMap::new()).unwrap();
        let rel = t.len() as f64 / pred.total() - 1.0;
        pass &= rel.abs() <= 0.10;
        parts.push(format!("{} count {} vs {:.1} ({:+.3})", sig.label(), t.len(), pred.total(), rel));
        for p in [2, 3, 5] {
            let r = splitting_frequency_experiment(t, p).unwrap();
            let worst = r.rows.iter().max_by(|a, b| a.gap_main.total_cmp(&b.gap_main)).unwrap();
            pass &= worst.gap_main <= 0.05;
            parts.push(format!(
                "{} p={p} max gap {:.3} at {} (refined {:.3})",
                sig.label(),
                worst.gap_main,
                worst.splitting,
                r.rows.iter().map(|r| r.gap_refined).fold(0.0, f64::max)
            ));
        }
    }
    let m = smallest_field_disc(4, -1);
    let p = smallest_field_disc(4, 1);
    let tm = -table(Signature::Minus).fields[0].disc;
    let tp = table(Signature::Plus).fields[0].disc;
    pass &= m == 23 && p == 148 && tm == 23 && tp == 148;
    parts.push(format!("smallest |d|: brute force {m}/{p}, tables {tm}/{tp}"));
    Outcome::new(pass, parts.join("; "))
}

fn distribution_of_log_l1() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for sig in Signature::BOTH {
        let ks: Vec<f64> = [10_000, 50_000, X]
            .iter()
            .map(|&x| cdf_experiment_with(&log_l1(sig).restrict(x).unwrap().values, model_c1()).unwrap().kolmogorov_distance)
            .collect();
        let shrinking = ks.windows(2).all(|w| w[1] < w[0]);
        pass &= shrinking && ks[2] <= 0.05;
        parts.push(format!(
            "{} KS at X = 1e4, 5e4, 1e5: {:.4}, {:.4}, {:.4} ({})",
            sig.label(),
            ks[0],
            ks[1],
            ks[2],
            if shrinking { "shrinking" } else { "not shrinking" }
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn class_numbers() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for sig in Signature::BOTH {
        let r = class_number_experiment(log_l1(sig), &[1.0]).unwrap();
        pass &= (r.c_ratio - 1.0).abs() <= 0.15;
        let trend: Vec<String> = [10_000, 50_000]
            .iter()
            .map(|&x| format!("{:.3}", class_number_experiment(&log_l1(sig).restrict(x).unwrap(), &[1.0]).unwrap().c_ratio))
            .collect();
        parts.push(format!("{} sum hR / prediction = {:.3} (at 1e4, 5e4: {})", sig.label(), r.c_ratio, trend.join(", ")));
    }
    let ratio = class_number_prediction(Signature::Minus, X as f64, 1.0).unwrap()
        / class_number_prediction(Signature::Plus, X as f64, 1.0).unwrap();
    pass &= (ratio - 6.0 / PI).abs() <= 1e-14;
    parts.push(format!("prediction ratio minus/plus - 6/pi = {:.1e}", ratio - 6.0 / PI));
    match constant_c() {
        Ok(cc) => {
            pass &= cc.difference < 1e-8;
            parts.push(format!("c = {:.12}, routes differ by {:.1e}; {}", cc.route_moment, cc.difference, cc.verdict));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("constant c: {e}"));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn moments() -> Outcome {
    let xis = [0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0, -0.5, -2.0];
    let mut zs = vec![c(0.0, 0.0)];
    zs.extend(xis.iter().map(|&x| c(0.0, x)));
    let mut parts = Vec::new();
    let mut pass = true;
    for sig in Signature::BOTH {
        let v = log_l1(sig);
        let m = moment_experiment(v, 1.0, MomentCase::Log, &zs).unwrap();
        let pred = count_prediction(sig, X as f64, &BTreeMap::new()).unwrap();
        let r0 = &m.rows[0];
        let exact_zero = r0.empirical == c(v.len() as f64, 0.0)
            && r0.predicted_main == c(pred.main, 0.0)
            && r0.predicted_secondary == c(pred.secondary, 0.0);
        let worst = m.rows[1..].iter().max_by(|a, b| a.normalized_gap.total_cmp(&b.normalized_gap)).unwrap();
        let (k, ratio) = small_xi_slope(&m, 0.2).unwrap();
        let linear = (0.5..=2.0).contains(&ratio);
        pass &= exact_zero && worst.normalized_gap <= 0.05 && linear;
        parts.push(format!(
            "{} max normalized gap {:.3} at xi = {}; small-xi gap/|xi| <= {k:.3} (ratio {ratio:.2}); z = 0 {}",
            sig.label(),
            worst.normalized_gap,
            worst.z.im,
            if exact_zero { "equals the count comparison" } else { "does NOT reduce to the count" }
        ));
        let ek = euler_kronecker_experiment(gammas(sig), &[c(0.0, 0.0), c(0.5, 0.0), c(0.0, 1.0)]).unwrap();
        pass &= ek.rows[0].empirical == c(v.len() as f64, 0.0);
        parts.push(format!(
            "{} Euler-Kronecker normalized gaps at z = 0, 0.5, i: {}",
            sig.label(),
            ek.rows.iter().map(|r| format!("{:.3}", r.normalized_gap)).collect::<Vec<_>>().join(", ")
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// CLI reproducibility

/// Runs one command line in `dir` and returns stdout, stderr, exit status and every file written.
fn run_cli(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_artin")).args(args).current_dir(dir).output().expect("spawn artin");
    let mut blob = format!("status {:?}\n", out.status.code()).into_bytes();
    blob.extend(&out.stdout);
    blob.extend(&out.stderr);
    let mut files: Vec<_> = walk(dir);
    files.sort();
    for f in files {
        blob.extend(f.to_string_lossy().as_bytes());
        blob.extend(std::fs::read(dir.join(&f)).unwrap());
    }
    blob
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p).into_iter().map(|q| Path::new(p.file_name().unwrap()).join(q)));
        } else {
            out.push(p.file_name().unwrap().into());
        }
    }
    out
}

fn reproducibility() -> Outcome {
    let runs: &[&[&str]] = &[
        &["selftest"],
        &["enumerate", "--X", "20000", "--out", "tables"],
        &["ingest", "--in", "tables/minus.csv", "--X", "20000", "--out", "minus.csv"],
        &["density", "--kind", "K", "--sigma", "1.5", "--out", "d.csv"],
        &["euler", "--kind", "Gstar", "--sigma", "1", "--z", "0,2", "--z", "1.5", "--out", "e.json"],
        &["montecarlo", "--sigma", "1", "--samples", "20000", "--seed", "5", "--out", "mc.json"],
        &["lvalue", "--X", "2000", "--signature", "minus", "--z", "0.5,1", "--out", "l.csv"],
        &["moments", "--X", "5000", "--signature", "plus", "--out", "m.json"],
        &["cdf", "--X", "5000", "--out", "cdf.json"],
        &["classnumber", "--X", "5000", "--out", "cn.json"],
        &["splitfreq", "--X", "20000", "--prime", "3", "--out", "s.json"],
        &["constant-c", "--out", "c.json"],
        &["density", "--no-such-flag"],
    ];
    let root = std::env::temp_dir().join(format!("artin-acceptance-{}", std::process::id()));
    let mut unstable = Vec::new();
    let mut digests = Vec::new();
    for (i, threads) in ["1", "1", "2", "3"].iter().enumerate() {
        let dir = root.join(format!("run{i}"));
        std::fs::create_dir_all(&dir).unwrap();
        let mut blobs = Vec::new();
        for args in runs {
            let mut a = args.to_vec();
            a.extend(["--threads", threads]);
            blobs.push(run_cli(&dir, &a));
        }
        digests.push(blobs);
    }
    for (j, args) in runs.iter().enumerate() {
        if digests.iter().any(|d| d[j] != digests[0][j]) {
            unstable.push(args[0].to_string());
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    Outcome::new(
        unstable.is_empty(),
        format!(
            "{} command lines, each run twice with --threads 1 and once each with 2 and 3: {}",
            runs.len(),
            if unstable.is_empty() { "byte-identical outputs and files".to_string() } else { format!("differences in {}", unstable.join(", ")) }
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "exact weight identities", exact_weights),
        (2, "truncation bounds", truncation_bounds),
        (3, "characteristic-function invariants", characteristic_functions),
        (4, "density normalisation and moments", density_checks),
        (5, "Monte Carlo against inversion", monte_carlo_vs_inversion),
        (6, "L-value path consistency", lvalue_paths),
        (7, "field population", field_population),
        (8, "distribution of log L(1)", distribution_of_log_l1),
        (9, "class-number sums and c", class_numbers),
        (10, "moments", moments),
        (11, "CLI reproducibility", reproducibility),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} ({name}, {:.1} s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
