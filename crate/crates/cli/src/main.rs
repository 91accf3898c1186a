//! `artin`: command-line driver for the artin-core library.
//!
//! Exit codes: 0 on success, 1 on a domain or input error, 2 on an invariant violation,
//! 64 on a usage error.

use artin_core::cubic_fields::{enumerate, ingest, EnumerateConfig, FieldTable, Signature};
use artin_core::density::{build_density, cdf, DensityKind};
use artin_core::error::{Error, Result};
use artin_core::euler_products::{evaluate, ProductConfig, ProductKind};
use artin_core::experiments::{
    cdf_experiment_with, class_number_experiment, constant_c, euler_kronecker_values,
    kolmogorov_distance, log_l_values, moment_experiment, monte_carlo, splitting_frequency_experiment, ExperimentReport,
    MomentCase, MonteCarloConfig, ModelWeights,
};
use artin_core::lvalues::{log_deriv_l_direct, log_l_direct, results_csv, smoothed_g, LValueResult, Method, YPolicy};
use artin_core::local_arithmetic::LCase;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod selftest;

#[derive(Parser, Debug)]
#[command(name = "artin", version, about = "Value distribution of Artin L-functions of non-Galois cubic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Enumerate cubic fields with |d| < X
    Enumerate,
    /// Validate a field table and write it back in canonical form
    Ingest,
    /// Density and distribution function on a grid
    Density,
    /// Evaluate an Euler product at (sigma, z)
    Euler,
    /// L-values for every field of a table
    Lvalue,
    /// Complex moments over a table against the predictions
    Moments,
    /// Kolmogorov distance between field values and the limiting distribution
    Cdf,
    /// Sums of h_K R_K against the class-number asymptotic
    Classnumber,
    /// Samples of the random Euler product
    Montecarlo,
    /// Splitting frequencies at one prime
    Splitfreq,
    /// The constant c by independent routes
    ConstantC,
    /// Exact identities and invariant checks
    Selftest,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SigArg {
    Plus,
    Minus,
}

impl From<SigArg> for Signature {
    fn from(s: SigArg) -> Self {
        match s {
            SigArg::Plus => Signature::Plus,
            SigArg::Minus => Signature::Minus,
        }
    }
}

/// Every flag is optional; unset flags fall back to the config file, then to the defaults.
#[derive(clap::Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Flags {
    #[arg(long, global = true, value_enum)]
    signature: Option<SigArg>,
    #[arg(long = "X", global = true)]
    #[serde(rename = "X")]
    x: Option<u64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// complex number "re,im" or "re"; repeatable
    #[arg(long, global = true, value_parser = parse_complex)]
    z: Vec<Complex64>,
    #[arg(long = "Y", global = true)]
    #[serde(rename = "Y")]
    y: Option<f64>,
    #[arg(long = "P", global = true)]
    #[serde(rename = "P")]
    p: Option<u64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// number of Monte Carlo samples
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// density kind (C, K, Cplain, Kplain) or product kind (F, G, Fstar, Gstar)
    #[arg(long, global = true)]
    kind: Option<String>,
    /// L-value case: I (log) or II (log derivative)
    #[arg(long, global = true)]
    case: Option<String>,
    /// prime for the splitting-frequency report
    #[arg(long, global = true)]
    prime: Option<u64>,
    #[arg(long = "in", global = true)]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// JSON file with the same keys as the flags
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re,im\", got {s:?}")),
    }
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: Command,
    signature: Option<SigArg>,
    #[serde(rename = "X")]
    x: u64,
    sigma: f64,
    z: Vec<[f64; 2]>,
    #[serde(rename = "Y")]
    y: Option<f64>,
    #[serde(rename = "P")]
    p: Option<u64>,
    points: usize,
    seed: u64,
    samples: usize,
    kind: Option<String>,
    case: String,
    prime: u64,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    precision_bits: u32,
}

impl RunConfig {
    fn resolve(command: Command, flags: Flags) -> Result<RunConfig> {
        let file: Flags = match &flags.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => Flags::default(),
        };
        let z = if flags.z.is_empty() { file.z } else { flags.z };
        Ok(RunConfig {
            command,
            signature: flags.signature.or(file.signature),
            x: flags.x.or(file.x).unwrap_or(10_000),
            sigma: flags.sigma.or(file.sigma).unwrap_or(1.0),
            z: z.iter().map(|c| [c.re, c.im]).collect(),
            y: flags.y.or(file.y),
            p: flags.p.or(file.p),
            points: flags.points.or(file.points).unwrap_or(1024),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            samples: flags.samples.or(file.samples).unwrap_or(100_000),
            kind: flags.kind.or(file.kind),
            case: flags.case.or(file.case).unwrap_or_else(|| "I".into()),
            prime: flags.prime.or(file.prime).unwrap_or(2),
            input: flags.input.or(file.input),
            out: flags.out.or(file.out),
            precision_bits: flags.precision_bits.or(file.precision_bits).unwrap_or(53),
        })
    }

    fn z_values(&self, default: &[Complex64]) -> Vec<Complex64> {
        if self.z.is_empty() {
            default.to_vec()
        } else {
            self.z.iter().map(|c| Complex64::new(c[0], c[1])).collect()
        }
    }

    fn signatures(&self) -> Vec<Signature> {
        match self.signature {
            Some(s) => vec![s.into()],
            None => Signature::BOTH.to_vec(),
        }
    }

    fn case(&self) -> Result<MomentCase> {
        match self.case.as_str() {
            "I" | "1" | "log" => Ok(MomentCase::Log),
            "II" | "2" | "logderiv" => Ok(MomentCase::LogDerivative),
            other => Err(Error::domain(format!("unknown case {other:?}; use I or II"))),
        }
    }

    fn y_policy(&self) -> YPolicy {
        match self.y {
            Some(y) => YPolicy::fixed(y),
            None => YPolicy::default(),
        }
    }

    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is plain data")
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = RunConfig::resolve(cli.command, cli.opts).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cfg: &RunConfig) -> Result<()> {
    if cfg.precision_bits > 53 {
        return Err(Error::domain(format!(
            "precision_bits = {} requested; only IEEE double (53 bits) is implemented",
            cfg.precision_bits
        )));
    }
    match cfg.command {
        Command::Enumerate => cmd_enumerate(cfg),
        Command::Ingest => cmd_ingest(cfg),
        Command::Density => cmd_density(cfg),
        Command::Euler => cmd_euler(cfg),
        Command::Lvalue => cmd_lvalue(cfg),
        Command::Moments => cmd_moments(cfg),
        Command::Cdf => cmd_cdf(cfg),
        Command::Classnumber => cmd_classnumber(cfg),
        Command::Montecarlo => cmd_montecarlo(cfg),
        Command::Splitfreq => cmd_splitfreq(cfg),
        Command::ConstantC => cmd_constant_c(cfg),
        Command::Selftest => selftest::run(),
    }
}

// ---------------------------------------------------------------------------
// output helpers

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes reports as a JSON array to `--out` with the CSV rows beside it (`.csv`), or a summary to stdout.
/// An `--out` ending in `.csv` receives the CSV rows only.
fn emit(cfg: &RunConfig, mut reports: Vec<ExperimentReport>) -> Result<()> {
    for r in &mut reports {
        let extra = std::mem::take(&mut r.config);
        r.config = json!({ "run": cfg.json(), "experiment": extra });
    }
    let csv: String = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let sig = r.signature.map(|s| s.label()).unwrap_or("");
            let body = r.to_csv();
            let mut lines = body.lines();
            let header = lines.next().unwrap_or("");
            let mut s = String::new();
            if i == 0 {
                s.push_str(&format!("experiment,signature,{header}\n"));
            }
            for l in lines {
                s.push_str(&format!("{},{sig},{l}\n", r.experiment));
            }
            s
        })
        .collect();
    let json_text = format!("{}\n", serde_json::to_string_pretty(&reports)?);
    match &cfg.out {
        Some(path) if path.extension().is_some_and(|e| e == "csv") => write_text(path, &csv)?,
        Some(path) => {
            write_text(path, &json_text)?;
            write_text(&path.with_extension("csv"), &csv)?;
        }
        None => print!("{json_text}"),
    }
    Ok(())
}

fn load_table(cfg: &RunConfig, signature: Signature) -> Result<FieldTable> {
    match &cfg.input {
        Some(path) => {
            let t = ingest(path, Some(cfg.x))?;
            if t.signature != signature && !t.is_empty() {
                return Err(Error::domain(format!(
                    "{} holds {} fields but --signature {} was requested",
                    path.display(),
                    t.signature.label(),
                    signature.label()
                )));
            }
            Ok(t)
        }
        None => enumerate(signature, cfg.x, &EnumerateConfig::default()),
    }
}

fn input_signatures(cfg: &RunConfig) -> Result<Vec<Signature>> {
    match (&cfg.input, cfg.signature) {
        (Some(path), None) => Ok(vec![ingest(path, Some(cfg.x))?.signature]),
        _ => Ok(cfg.signatures()),
    }
}

// ---------------------------------------------------------------------------
// commands

fn cmd_enumerate(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out.as_ref();
    for sig in cfg.signatures() {
        let t = enumerate(sig, cfg.x, &EnumerateConfig::default())?;
        println!("{} fields with 0 < {}d < {}: {}", sig.label(), if sig == Signature::Plus { "" } else { "-" }, cfg.x, t.len());
        if let Some(out) = out {
            let path = if cfg.signature.is_some() { out.clone() } else { out.join(format!("{}.csv", sig.label())) };
            write_text(&path, &t.to_cache_csv())?;
        }
    }
    Ok(())
}

fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    let path = cfg.input.as_ref().ok_or_else(|| Error::domain("ingest needs --in"))?;
    let t = ingest(path, Some(cfg.x))?;
    println!("{} fields of signature {} validated (|d| < {})", t.len(), t.signature.label(), t.x_bound);
    if let Some(out) = &cfg.out {
        write_text(out, &t.to_cache_csv())?;
    }
    Ok(())
}

fn density_kind(cfg: &RunConfig) -> Result<DensityKind> {
    let k = cfg.kind.as_deref().unwrap_or("C");
    DensityKind::parse(k).ok_or_else(|| Error::domain(format!("unknown density kind {k:?}")))
}

fn cmd_density(cfg: &RunConfig) -> Result<()> {
    let kind = density_kind(cfg)?;
    let grid = build_density(kind, cfg.sigma, 1e-10, cfg.points)?;
    let c = cdf(&grid);
    let mut s = String::from("x,density,cdf\n");
    for j in 0..grid.len() {
        s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", grid.x(j), grid.values[j], c.values[j]));
    }
    println!(
        "{} sigma={} points={} mass={:.15} quad_error_estimate={:.3e} xi_cutoff={}",
        kind.label(),
        cfg.sigma,
        grid.len(),
        grid.mass(),
        grid.quad_error_estimate,
        grid.xi_cutoff
    );
    match &cfg.out {
        Some(p) => write_text(p, &s),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn cmd_euler(cfg: &RunConfig) -> Result<()> {
    let k = cfg.kind.as_deref().unwrap_or("F");
    let kind = ProductKind::parse(k).ok_or_else(|| Error::domain(format!("unknown product kind {k:?}")))?;
    let mut pc = ProductConfig::for_sigma(cfg.sigma);
    if let Some(p) = cfg.p {
        pc = pc.with_cutoff(p);
    }
    pc.precision_bits = cfg.precision_bits;
    let mut rows = Vec::new();
    for z in cfg.z_values(&[Complex64::new(1.0, 0.0)]) {
        let e = evaluate(kind, Complex64::new(cfg.sigma, 0.0), z, &pc)?;
        rows.push(json!({
            "z_re": z.re, "z_im": z.im,
            "value_re": e.value.re, "value_im": e.value.im,
            "log_re": e.log_value.re, "log_im": e.log_value.im,
            "tail_bound": e.tail_bound,
        }));
    }
    emit(
        cfg,
        vec![ExperimentReport {
            experiment: "euler".into(),
            signature: None,
            x: None,
            sigma: Some(cfg.sigma),
            config: json!({ "kind": kind.label(), "prime_cutoff": pc.prime_cutoff }),
            rows,
            paper_refs: vec!["characteristic-function Euler products over local weights".into()],
        }],
    )
}

fn cmd_lvalue(cfg: &RunConfig) -> Result<()> {
    let case = match cfg.case()? {
        MomentCase::Log => LCase::I,
        MomentCase::LogDerivative => LCase::II,
    };
    let zs = cfg.z_values(&[Complex64::new(1.0, 0.0)]);
    let policy = cfg.y_policy();
    let mut rows: Vec<LValueResult> = Vec::new();
    for sig in input_signatures(cfg)? {
        let t = load_table(cfg, sig)?;
        for f in &t.fields {
            for &z in &zs {
                // the direct product serves z = 1 at sigma > 1 when P is given
                if let (Some(p), true) = (cfg.p, cfg.sigma > 1.0 && z == Complex64::new(1.0, 0.0)) {
                    let (v, tail) = match case {
                        LCase::I => log_l_direct(f, cfg.sigma, p)?,
                        LCase::II => log_deriv_l_direct(f, cfg.sigma, p)?,
                    };
                    rows.push(LValueResult {
                        disc: f.disc,
                        poly: f.poly,
                        sigma: cfg.sigma,
                        case,
                        z,
                        value: Complex64::new(v, 0.0),
                        method: Method::Euler,
                        y: None,
                        error_estimate: tail,
                    });
                } else {
                    rows.push(smoothed_g(f, cfg.sigma, z, case, policy.y_for(f))?);
                }
            }
        }
    }
    let csv = results_csv(&rows);
    match &cfg.out {
        Some(p) => write_text(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_moments(cfg: &RunConfig) -> Result<()> {
    let case = cfg.case()?;
    let default: Vec<Complex64> = [0.0, 0.5, 1.0, 2.0].iter().map(|&x| Complex64::new(0.0, x)).collect();
    let zs = cfg.z_values(&default);
    let mut reports = Vec::new();
    for sig in input_signatures(cfg)? {
        let t = load_table(cfg, sig)?;
        let values = match case {
            MomentCase::Log => log_l_values(&t, cfg.sigma, &cfg.y_policy())?,
            MomentCase::LogDerivative => {
                if cfg.sigma != 1.0 {
                    return Err(Error::domain("log-derivative moments are computed at sigma = 1"));
                }
                let mut g = euler_kronecker_values(&t, &cfg.y_policy())?;
                for v in &mut g.values {
                    *v -= artin_core::special::EULER_GAMMA;
                }
                g
            }
        };
        reports.push(moment_experiment(&values, cfg.sigma, case, &zs)?.report());
    }
    emit(cfg, reports)
}

fn cmd_cdf(cfg: &RunConfig) -> Result<()> {
    let kind = density_kind(cfg)?;
    let grid = build_density(kind, cfg.sigma, 1e-10, cfg.points)?;
    let model = cdf(&grid);
    let mut reports = Vec::new();
    for sig in input_signatures(cfg)? {
        let t = load_table(cfg, sig)?;
        let values = match kind {
            DensityKind::CScript => log_l_values(&t, cfg.sigma, &cfg.y_policy())?.values,
            DensityKind::CPlain if cfg.sigma == 1.0 => euler_kronecker_values(&t, &cfg.y_policy())?
                .values
                .iter()
                .map(|g| g - artin_core::special::EULER_GAMMA)
                .collect(),
            _ => {
                return Err(Error::domain(
                    "field distributions are compared with C (log L) or with Cplain (L'/L at sigma = 1)",
                ))
            }
        };
        reports.push(cdf_experiment_with(&values, &model)?.report(Some(sig), Some(cfg.x as f64)));
    }
    emit(cfg, reports)
}

fn cmd_classnumber(cfg: &RunConfig) -> Result<()> {
    let rs: Vec<f64> = cfg.z_values(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).iter().map(|z| z.re).collect();
    let mut reports = Vec::new();
    for sig in input_signatures(cfg)? {
        let t = load_table(cfg, sig)?;
        let v = log_l_values(&t, 1.0, &cfg.y_policy())?;
        reports.push(class_number_experiment(&v, &rs)?.report());
    }
    emit(cfg, reports)
}

fn cmd_montecarlo(cfg: &RunConfig) -> Result<()> {
    let kind = density_kind(cfg)?;
    let (weights, case) = match kind {
        DensityKind::CScript => (ModelWeights::C, MomentCase::Log),
        DensityKind::KScript => (ModelWeights::K, MomentCase::Log),
        DensityKind::CPlain => (ModelWeights::C, MomentCase::LogDerivative),
        DensityKind::KPlain => (ModelWeights::K, MomentCase::LogDerivative),
    };
    let mut mc = MonteCarloConfig { weights, case, ..Default::default() };
    if let Some(p) = cfg.p {
        mc.prime_cutoff = p;
        mc.exact_moment_cutoff = mc.exact_moment_cutoff.max(p);
    }
    let sample = monte_carlo(cfg.sigma, cfg.samples, cfg.seed, &mc)?;
    let model = cdf(&build_density(kind, cfg.sigma, 1e-10, cfg.points)?);
    let ks = kolmogorov_distance(&sample.samples, &model);
    let mut report = sample.report();
    if let serde_json::Value::Object(m) = &mut report.config {
        m.insert("kolmogorov_distance".into(), json!(ks));
        m.insert("mean".into(), json!(sample.mean()));
        m.insert("std_dev".into(), json!(sample.std_dev()));
    }
    eprintln!("kolmogorov distance to the inverted distribution: {ks:.6}");
    emit(cfg, vec![report])
}

fn cmd_splitfreq(cfg: &RunConfig) -> Result<()> {
    let mut reports = Vec::new();
    for sig in input_signatures(cfg)? {
        let t = load_table(cfg, sig)?;
        reports.push(splitting_frequency_experiment(&t, cfg.prime)?.report());
    }
    emit(cfg, reports)
}

fn cmd_constant_c(cfg: &RunConfig) -> Result<()> {
    let c = constant_c()?;
    println!("route product  pi^2 zeta(3)/432 prod Q_p : {:.15}", c.route_product);
    println!("route moment   F_1(1)/(72 zeta(3))        : {:.15}", c.route_moment);
    println!("difference                                : {:.3e}", c.difference);
    println!("printed alternative with zeta(2)/72       : {:.15}", c.printed_alternative);
    println!("verdict: {}", c.verdict);
    if cfg.out.is_some() {
        emit(cfg, vec![c.report()])?;
    }
    Ok(())
}
