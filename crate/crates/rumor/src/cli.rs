//! Command-line front end: exact computation, simulation, verification
//! suites, and bound sweeps. All randomized commands are reproducible from
//! the master seed alone, independent of worker count.

use crate::dist::RadiusDistribution;
use crate::firework::FpOutcome;
use crate::mc::{trial_rng, Estimate};
use crate::parse::parse_dist;
use crate::renewal::{
    inter_arrival, mu_sigma, renewal_sequence, tail_bound, BoundVariant, Certification, Mean,
    Variance,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

/// Analyze Firework / Reverse Firework rumor processes via renewal theory.
#[derive(Parser, Debug)]
#[command(name = "rumor", version, about)]
struct Cli {
    /// Optional key=value file whose entries mirror flags of the subcommand
    /// (e.g. `dist=frac:c=2`); explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads (0 = all cores). Does not affect results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Radius distribution, e.g. finite:0.5,0.3,0.2 | frac:c=2 | powratio:a=4
    /// | geomdefect:C=0.5,r=0.5 | harmonic:r=0.3 | sparse(eps=0.5;frac:c=2)
    /// | pgf(geom1:p=0.5;frac:c=2) | suscept(recip;frac:c=2)
    #[arg(long)]
    dist: Option<String>,
    /// Horizon (largest site / sequence index).
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Certified numerical tolerance for truncated series.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the command's CSV table to this path (stdout table otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact renewal quantities: q_k, u_n, mu, sigma^2, class, survival.
    Exact(Common),
    /// Simulate the Firework process; per-site reach estimates with CIs.
    FpSim(Common),
    /// Simulate the Reverse Firework process; per-path spreader counts.
    RfpSim(Common),
    /// Run a named verification suite and print PASS/FAIL verdicts.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Which suite to run.
        #[arg(long)]
        suite: Suite,
    },
    /// Sweep u_k against a closed-form tail bound; emits k,u_k,bound_k,ratio.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Bound family.
        #[arg(long)]
        variant: BoundKind,
        /// Geometric ratio r (exp and harmonic variants).
        #[arg(long)]
        r: Option<f64>,
        /// Exponent alpha (polylog and regvar variants).
        #[arg(long)]
        alpha: Option<f64>,
        /// Log exponent beta (polylog variant).
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Constant C_r in (0, ln(1/r)) (exp variant); default r.
        #[arg(long)]
        c_r: Option<f64>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Suite {
    Lemma1,
    Lemma2,
    Crossmodel,
    Geometric,
    Clt,
    Hchain,
    Bounds,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BoundKind {
    Exp,
    Polylog,
    Harmonic,
    Regvar,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<crate::dist::DistError> for CliError {
    fn from(e: crate::dist::DistError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Render with 17 significant digits so round-tripping is lossless.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parse argv, run, and map outcomes to exit codes
/// (0 = success/pass, 1 = verification failure, 2 = invalid input).
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.workers > 0 {
        // best effort: a global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match dispatch(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    let overrides = match &cli.config {
        Some(path) => read_config(path)?,
        None => Vec::new(),
    };
    match cli.command {
        Command::Exact(c) => cmd_exact(apply_config(c, &overrides)?),
        Command::FpSim(c) => cmd_fp_sim(apply_config(c, &overrides)?),
        Command::RfpSim(c) => cmd_rfp_sim(apply_config(c, &overrides)?),
        Command::Verify { common, suite } => cmd_verify(apply_config(common, &overrides)?, suite),
        Command::Bounds {
            common,
            variant,
            r,
            alpha,
            beta,
            c_r,
        } => cmd_bounds(apply_config(common, &overrides)?, variant, r, alpha, beta, c_r),
    }
}

fn read_config(path: &PathBuf) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("config line is not key=value: {line}")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Fill unset flags from the config file; explicit flags win. Only `dist`
/// and `out` are optional at parse time, so numeric keys override defaults.
fn apply_config(mut c: Common, overrides: &[(String, String)]) -> Result<Common, CliError> {
    let bad = |k: &str, v: &str| CliError::Invalid(format!("config {k}={v}: invalid value"));
    for (k, v) in overrides {
        match k.as_str() {
            "dist" if c.dist.is_none() => c.dist = Some(v.clone()),
            "dist" => {}
            "n" => c.n = v.parse().map_err(|_| bad(k, v))?,
            "reps" => c.reps = v.parse().map_err(|_| bad(k, v))?,
            "tol" => c.tol = v.parse().map_err(|_| bad(k, v))?,
            "seed" => c.seed = v.parse().map_err(|_| bad(k, v))?,
            "out" if c.out.is_none() => c.out = Some(PathBuf::from(v)),
            "out" => {}
            other => return Err(CliError::Invalid(format!("unknown config key: {other}"))),
        }
    }
    if c.n == 0 || c.reps == 0 || c.tol <= 0.0 {
        return Err(CliError::Invalid(
            "n, reps must be positive and tol > 0".into(),
        ));
    }
    Ok(c)
}

fn require_dist(c: &Common) -> Result<RadiusDistribution, CliError> {
    let spec = c
        .dist
        .as_deref()
        .ok_or_else(|| CliError::Invalid("--dist is required".into()))?;
    Ok(parse_dist(spec)?)
}

fn emit(c: &Common, csv: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_exact(c: Common) -> Result<bool, CliError> {
    let dist = require_dist(&c)?;
    let n = c.n as usize;
    let law = inter_arrival(&dist, n);
    let u = renewal_sequence(&law, n);
    let stats = mu_sigma(&dist, c.tol);
    let mu_inv = match stats.mu {
        Mean::Finite(mu) => 1.0 / mu,
        Mean::Infinite => 0.0,
    };

    println!("dist: {dist}");
    match stats.mu {
        Mean::Finite(mu) => println!("mu: {}", sig17(mu)),
        Mean::Infinite => println!("mu: inf"),
    }
    match stats.sigma2 {
        Variance::Finite(s2) => println!("sigma2: {}", sig17(s2)),
        Variance::Infinite => println!("sigma2: inf"),
        Variance::Undefined => println!("sigma2: undefined (mu = inf)"),
    }
    match stats.class {
        Some(class) => println!("class: {class}"),
        None => println!("class: unknown (no certified tail for this law)"),
    }
    let cert = match stats.cert {
        Certification::Certified => format!("certified to tol={:e}", c.tol),
        Certification::HorizonLimited { horizon } => {
            format!("NOT certified (horizon-limited at k={horizon})")
        }
    };
    println!("survival: {} ({cert})", sig17(stats.survival_prob));

    let mut csv = String::from("n,q_n,u_n,mu_inv,abs_gap\n");
    for k in 0..=n {
        let q = if k == 0 { 0.0 } else { law.q(k) };
        let gap = (u.u(k) - mu_inv).abs();
        writeln!(
            csv,
            "{k},{},{},{},{}",
            sig17(q),
            sig17(u.u(k)),
            sig17(mu_inv),
            sig17(gap)
        )
        .unwrap();
    }
    emit(&c, &csv)?;
    Ok(true)
}

fn cmd_fp_sim(c: Common) -> Result<bool, CliError> {
    let dist = require_dist(&c)?;
    let n = c.n as usize;
    let law = inter_arrival(&dist, n);
    let u = renewal_sequence(&law, n);
    let horizon = (c.n + 1).max(64);
    // one FP run per trial yields the indicator of every reach event at once
    let hits = (0..c.reps)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, i| {
                let mut rng = trial_rng(c.seed, i);
                match crate::firework::simulate_fp(&dist, horizon, &mut rng) {
                    FpOutcome::Died { m } => {
                        for site in 1..=n.min(m as usize) {
                            acc[site - 1] += 1;
                        }
                    }
                    FpOutcome::AliveAtHorizon { .. } => {
                        for h in acc.iter_mut() {
                            *h += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut csv = String::from("n,P_exact,P_hat,stderr\n");
    for site in 1..=n {
        let est = Estimate::from_hits(hits[site - 1], c.reps);
        writeln!(
            csv,
            "{site},{},{},{}",
            sig17(u.u(site)),
            sig17(est.p_hat),
            sig17(est.stderr)
        )
        .unwrap();
        if site <= 10 {
            println!(
                "site {site}: P_exact={:.6} P_hat={:.6} ci95=[{:.6},{:.6}]",
                u.u(site),
                est.p_hat,
                est.ci95.0,
                est.ci95.1
            );
        }
    }
    emit(&c, &csv)?;
    Ok(true)
}

fn cmd_rfp_sim(c: Common) -> Result<bool, CliError> {
    let dist = require_dist(&c)?;
    let counts: Vec<u64> = crate::mc::sample(
        |rng| crate::rfp::simulate_spreader_count(&dist, c.n, rng),
        c.reps,
        c.seed,
    );
    let mut csv = String::from("n,N_n,ratio\n");
    for count in &counts {
        writeln!(csv, "{},{count},{}", c.n, sig17(*count as f64 / c.n as f64)).unwrap();
    }
    let mean = counts.iter().sum::<u64>() as f64 / c.reps as f64;
    let (mu, _) = crate::rfp::lln_clt_params(&dist);
    println!(
        "mean N({})/n over {} paths: {:.6} (LLN limit 1/mu = {:.6})",
        c.n,
        c.reps,
        mean / c.n as f64,
        if mu.is_finite() { 1.0 / mu } else { 0.0 }
    );
    emit(&c, &csv)?;
    Ok(true)
}

fn cmd_verify(c: Common, suite: Suite) -> Result<bool, CliError> {
    use crate::suites;
    let invalid = |e: suites::SuiteError| CliError::Invalid(e.to_string());
    let report = match suite {
        Suite::Lemma1 => {
            let dist = require_dist(&c)?;
            suites::lemma1(&dist, c.n.min(8) as usize).map_err(invalid)?
        }
        Suite::Lemma2 => {
            let dist = require_dist(&c)?;
            suites::lemma2(&dist, c.n.min(6) as usize, c.reps, c.seed).map_err(invalid)?
        }
        Suite::Crossmodel => {
            let dist = require_dist(&c)?;
            suites::crossmodel(&dist, c.n.min(8) as usize, c.n.min(20) as usize, c.reps, c.seed)
                .map_err(invalid)?
        }
        Suite::Geometric => {
            let dist = require_dist(&c)?;
            suites::geometric(&dist, c.reps, c.seed).map_err(invalid)?
        }
        Suite::Clt => {
            let dist = require_dist(&c)?;
            suites::clt(&dist, c.n.max(10_000), c.reps.max(1_000).min(10_000), c.seed)
                .map_err(invalid)?
        }
        Suite::Hchain => {
            let dist = require_dist(&c)?;
            suites::hchain(&dist, c.reps.min(10_000), c.seed)
        }
        Suite::Bounds => suites::bounds(c.seed),
    };
    let mut csv = String::from("name,pass,detail\n");
    for check in &report.checks {
        let verdict = if check.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", check.name, check.detail);
        writeln!(
            csv,
            "{},{},{}",
            check.name.replace(',', ";"),
            check.pass,
            check.detail.replace(',', ";")
        )
        .unwrap();
    }
    let pass = report.pass();
    println!(
        "{} suite {} ({}/{} checks)",
        if pass { "PASS" } else { "FAIL" },
        report.suite,
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len()
    );
    emit(&c, &csv)?;
    Ok(pass)
}

fn cmd_bounds(
    c: Common,
    kind: BoundKind,
    r: Option<f64>,
    alpha: Option<f64>,
    beta: f64,
    c_r: Option<f64>,
) -> Result<bool, CliError> {
    let dist = require_dist(&c)?;
    let need = |o: Option<f64>, name: &str| {
        o.ok_or_else(|| CliError::Invalid(format!("--{name} is required for this variant")))
    };
    let variant = match kind {
        BoundKind::Exp => {
            let r = need(r, "r")?;
            BoundVariant::Exp {
                r,
                c_r: c_r.unwrap_or(r),
            }
        }
        BoundKind::Polylog => BoundVariant::PolyLog {
            alpha: need(alpha, "alpha")?,
            beta,
        },
        BoundKind::Harmonic => BoundVariant::Harmonic { r: need(r, "r")? },
        BoundKind::Regvar => BoundVariant::RegVar {
            alpha: need(alpha, "alpha")?,
        },
    };
    let n = c.n as usize;
    let u = renewal_sequence(&inter_arrival(&dist, n), n);
    let mut csv = String::from("k,u_k,bound_k,ratio\n");
    let mut all_finite = true;
    for k in 1..=n {
        let b = tail_bound(variant, k as u64)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let ratio = u.u(k) / b;
        all_finite &= ratio.is_finite();
        writeln!(csv, "{k},{},{},{}", sig17(u.u(k)), sig17(b), sig17(ratio)).unwrap();
    }
    if !variant.verdict_meaningful() {
        println!("NOTE verdict withheld for this parameter range (shape data only)");
    }
    println!(
        "{} bound sweep over k=1..={n} (ratios all finite: {all_finite})",
        if all_finite { "PASS" } else { "FAIL" }
    );
    emit(&c, &csv)?;
    Ok(all_finite)
}
