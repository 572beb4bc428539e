use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use pseudoshift::construct::{build_dhc_vector, enumerate_targets, verify_schedule, BuildOutcome, ScheduleCertificate};
use pseudoshift::criterion::{find_witness, verify_certificate, TargetFamily, WitnessCertificate, WitnessOutcome};
use pseudoshift::dynamics::{orbit, orbit_csv, return_set, upper_banach_density, OrbitMode};
use pseudoshift::family::{inverse_family, make_family, threshold_table, FamilyParams};
use pseudoshift::{PseudoShift, SupportedVector};

/// Exit status for a search that ran but found nothing (no witness, failed build).
const EXIT_NOT_FOUND: u8 = 2;
/// Exit status for a verification report with at least one failed check.
const EXIT_REJECTED: u8 = 3;

#[derive(Parser)]
#[command(name = "pseudoshift", version, about = "Weighted pseudo-shift dynamics: witnesses, schedules, orbits")]
struct Cli {
    /// ℓ^p exponent (default 2; certificates default to their own).
    #[arg(long, global = true, value_parser = parse_p)]
    p: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-level translation family, its constants and thresholds.
    Family(FamilyArgs),
    /// Search for, or re-verify, a blow-up/collapse witness.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Build, or re-verify, an approximate disjoint hypercyclic vector.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Per-step norms and distances of the joint orbit, as CSV.
    Orbit(OrbitArgs),
    /// Finite upper-Banach-density estimate of a set of times.
    Density(DensityArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// FamilyParams document {N, steps, lambdas, cutoffs, p}.
    params: PathBuf,
    /// Also emit the inverse family and its thresholds.
    #[arg(long)]
    inverse: bool,
    /// Tolerances for the threshold table.
    #[arg(long = "epsilon", value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001], value_parser = parse_positive)]
    epsilons: Vec<f64>,
    /// Block radii M for the threshold table.
    #[arg(long = "radius", value_delimiter = ',', default_values_t = [0, 1, 2])]
    radii: Vec<u32>,
}

#[derive(Subcommand)]
enum WitnessCommand {
    /// Scan n = K..=n_max for a time satisfying all witness conditions.
    Run(WitnessArgs),
    /// Recompute every value of a certificate.
    Verify {
        #[arg(long)]
        operators: PathBuf,
        certificate: PathBuf,
    },
}

#[derive(Args)]
struct WitnessArgs {
    /// Operator descriptions (a list, or any document with an `operators` field).
    #[arg(long)]
    operators: PathBuf,
    /// One target vector per operator, or a single vector shared by all.
    #[arg(long)]
    targets: PathBuf,
    /// Block radius M; defaults to the largest target radius.
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long, value_parser = parse_positive)]
    epsilon: f64,
    #[arg(long = "k-min", default_value_t = 1)]
    k_min: u64,
    #[arg(long = "n-max")]
    n_max: u64,
    /// Vectors whose orbits must collapse below ε (JSON list of vectors).
    #[arg(long)]
    collapse: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCommand {
    /// Greedy schedule over a list of targets.
    Run(BuildArgs),
    /// Recompute every visit and budget of a schedule certificate.
    Verify {
        /// Defaults to the operators recorded in the certificate.
        #[arg(long)]
        operators: Option<PathBuf>,
        certificate: PathBuf,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    operators: PathBuf,
    /// JSON list of target vectors.
    #[arg(long, conflicts_with = "enumerate", required_unless_present = "enumerate")]
    targets: Option<PathBuf>,
    /// Enumerated targets `M_MAX,GRID,COUNT`.
    #[arg(long, value_parser = parse_enumeration)]
    enumerate: Option<(u32, f64, usize)>,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    epsilon0: f64,
    #[arg(long = "n-max-per-step", default_value_t = 2000)]
    n_max_per_step: u64,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long)]
    operators: PathBuf,
    /// Starting vector, or a schedule certificate whose built vector is used.
    #[arg(long)]
    x: PathBuf,
    #[arg(long = "n-max")]
    n_max: u64,
    /// Distances are measured to this vector (default 0).
    #[arg(long)]
    target: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// JSON list of natural numbers.
    #[arg(long, conflicts_with = "operators", required_unless_present = "operators")]
    set: Option<PathBuf>,
    /// Derive the set as the joint return set of an orbit instead.
    #[arg(long, requires_all = ["x", "target", "delta", "n_max"])]
    operators: Option<PathBuf>,
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, value_parser = parse_positive)]
    delta: Option<f64>,
    #[arg(long = "n-max")]
    n_max: Option<u64>,
    /// Window length N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    #[arg(long = "m-max")]
    m_max: u64,
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("p must lie in [1, ∞), got {s}"))
    }
}

fn parse_enumeration(s: &str) -> std::result::Result<(u32, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [m, g, c] = parts.as_slice() else {
        return Err("expected M_MAX,GRID,COUNT".into());
    };
    let m = m.trim().parse().map_err(|e| format!("M_MAX: {e}"))?;
    let g = parse_positive(g.trim())?;
    let c = c.trim().parse().map_err(|e| format!("COUNT: {e}"))?;
    Ok((m, g, c))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_operators(path: &Path) -> Result<Vec<PseudoShift>> {
    let doc: Value = read_json(path)?;
    let list = match doc {
        Value::Object(mut obj) => obj
            .remove("operators")
            .with_context(|| format!("{} has no `operators` field", path.display()))?,
        other => other,
    };
    let shifts: Vec<PseudoShift> = serde_json::from_value(list).with_context(|| format!("operators in {}", path.display()))?;
    if shifts.is_empty() {
        bail!("{} lists no operators", path.display());
    }
    Ok(shifts)
}

/// A plain vector, or the `x` of a schedule certificate.
fn read_vector(path: &Path) -> Result<SupportedVector> {
    let doc: Value = read_json(path)?;
    let v = match doc {
        Value::Object(mut obj) => obj
            .remove("x")
            .with_context(|| format!("{} has no `x` field", path.display()))?,
        other => other,
    };
    serde_json::from_value(v).with_context(|| format!("vector in {}", path.display()))
}

/// Accepts a list of vectors, or one vector to be shared by all operators.
fn read_targets(path: &Path, n_ops: usize) -> Result<Vec<SupportedVector>> {
    let doc: Value = read_json(path)?;
    if let Ok(list) = serde_json::from_value::<Vec<SupportedVector>>(doc.clone()) {
        return Ok(list);
    }
    let single: SupportedVector = serde_json::from_value(doc).with_context(|| format!("targets in {}", path.display()))?;
    Ok(vec![single; n_ops])
}

struct Output {
    path: Option<PathBuf>,
    pretty: bool,
}

impl Output {
    fn text(&self, body: &str) -> Result<()> {
        match &self.path {
            Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }

    /// Keys come out sorted because `Value` objects are ordered maps.
    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let value = serde_json::to_value(value)?;
        let mut body = if self.pretty {
            serde_json::to_string_pretty(&value)?
        } else {
            serde_json::to_string(&value)?
        };
        body.push('\n');
        self.text(&body)
    }
}

fn cmd_family(args: &FamilyArgs, p: Option<f64>, out: &Output) -> Result<u8> {
    let mut params: FamilyParams = read_json(&args.params)?;
    if let Some(p) = p {
        params = params.with_p(p)?;
    }
    let shifts = make_family(&params)?;
    let constants = params.constants();
    let thresholds = threshold_table(&params, &args.epsilons, &args.radii)?;
    eprintln!(
        "γ = {}, α = {}, β = {}, L = {}",
        constants.gamma, constants.alpha, constants.beta, constants.big_l
    );
    eprintln!("{:>10} {:>3} {:>8} {:>8} {:>10}", "ε", "M", "ℓ>i", "i>ℓ", "i>ℓ (lat)");
    for row in &thresholds {
        eprintln!(
            "{:>10} {:>3} {:>8} {:>8} {:>10}",
            row.epsilon, row.radius, row.ell_gt_i, row.i_gt_ell, row.i_gt_ell_lattice
        );
    }
    let mut doc = serde_json::json!({
        "params": params,
        "constants": constants,
        "operators": shifts,
        "thresholds": thresholds,
    });
    if args.inverse {
        let conjugate = params.inverse_conjugate();
        doc["inverse"] = serde_json::json!({
            "operators": inverse_family(&shifts)?,
            "constants": conjugate.constants(),
            "thresholds": threshold_table(&conjugate, &args.epsilons, &args.radii)?,
        });
    }
    out.json(&doc)?;
    Ok(0)
}

fn cmd_witness(cmd: &WitnessCommand, p: Option<f64>, out: &Output) -> Result<u8> {
    match cmd {
        WitnessCommand::Run(args) => {
            let shifts = read_operators(&args.operators)?;
            let vectors = read_targets(&args.targets, shifts.len())?;
            let radius = match args.radius {
                Some(r) => r,
                None => vectors
                    .iter()
                    .filter_map(SupportedVector::radius)
                    .max()
                    .unwrap_or(0)
                    .try_into()
                    .context("target radius too large")?,
            };
            let targets = TargetFamily::from_vectors(radius, &vectors)?;
            let y: Vec<SupportedVector> = match &args.collapse {
                Some(path) => read_json(path)?,
                None => Vec::new(),
            };
            let outcome = find_witness(&shifts, &targets, p.unwrap_or(2.0), args.epsilon, args.k_min, args.n_max, &y)?;
            out.json(&outcome)?;
            Ok(match outcome {
                WitnessOutcome::Found(_) => 0,
                WitnessOutcome::NoWitness(_) => EXIT_NOT_FOUND,
            })
        }
        WitnessCommand::Verify { operators, certificate } => {
            let shifts = read_operators(operators)?;
            let cert: WitnessCertificate = read_json(certificate)?;
            let report = verify_certificate(&shifts, &cert, p.unwrap_or(cert.p))?;
            out.json(&report)?;
            Ok(if report.passed { 0 } else { EXIT_REJECTED })
        }
    }
}

fn cmd_build(cmd: &BuildCommand, p: Option<f64>, out: &Output) -> Result<u8> {
    match cmd {
        BuildCommand::Run(args) => {
            let shifts = read_operators(&args.operators)?;
            let targets = match (&args.targets, args.enumerate) {
                (Some(path), _) => read_json(path)?,
                (None, Some((m_max, grid, count))) => enumerate_targets(m_max, grid, count)?,
                (None, None) => bail!("either --targets or --enumerate is required"),
            };
            let outcome = build_dhc_vector(&shifts, &targets, args.epsilon0, p.unwrap_or(2.0), args.n_max_per_step)?;
            out.json(&outcome)?;
            Ok(match outcome {
                BuildOutcome::Complete(_) => 0,
                BuildOutcome::Failed { step, reason, .. } => {
                    eprintln!("build stopped at step {step}: {reason}");
                    EXIT_NOT_FOUND
                }
            })
        }
        BuildCommand::Verify { operators, certificate } => {
            let doc: Value = read_json(certificate)?;
            // A full BuildOutcome is accepted as well as a bare certificate.
            let cert: ScheduleCertificate = match serde_json::from_value::<BuildOutcome>(doc.clone()) {
                Ok(outcome) => outcome.certificate().clone(),
                Err(_) => serde_json::from_value(doc).with_context(|| format!("certificate in {}", certificate.display()))?,
            };
            let shifts = match operators {
                Some(path) => read_operators(path)?,
                None => cert.operators.clone(),
            };
            let report = verify_schedule(&shifts, &cert)?;
            out.json(&report)?;
            Ok(if report.passed { 0 } else { EXIT_REJECTED })
        }
    }
}

fn cmd_orbit(args: &OrbitArgs, p: Option<f64>, out: &Output) -> Result<u8> {
    let shifts = read_operators(&args.operators)?;
    let x = read_vector(&args.x)?;
    let target = match &args.target {
        Some(path) => read_vector(path)?,
        None => SupportedVector::zero(),
    };
    let mode = OrbitMode::Stats { target, p: p.unwrap_or(2.0) };
    let orb = orbit(&shifts, &x, args.n_max, mode)?;
    out.text(&orbit_csv(&orb)?)?;
    Ok(0)
}

fn cmd_density(args: &DensityArgs, p: Option<f64>, out: &Output) -> Result<u8> {
    let set: BTreeSet<u64> = match (&args.set, &args.operators) {
        (Some(path), _) => read_json(path)?,
        (None, Some(ops)) => {
            let shifts = read_operators(ops)?;
            let (Some(x), Some(target), Some(delta), Some(n_max)) = (&args.x, &args.target, args.delta, args.n_max) else {
                bail!("--operators needs --x, --target, --delta and --n-max");
            };
            let x = read_vector(x)?;
            let target = read_vector(target)?;
            let p = p.unwrap_or(2.0);
            let orb = orbit(&shifts, &x, n_max, OrbitMode::Stats { target: target.clone(), p })?;
            return_set(&orb, &target, delta, p)?
        }
        (None, None) => bail!("either --set or --operators is required"),
    };
    out.json(&upper_banach_density(&set, args.window, args.m_max)?)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    let out = Output {
        path: cli.out.clone(),
        pretty: cli.pretty,
    };
    match &cli.command {
        Command::Family(args) => cmd_family(args, cli.p, &out),
        Command::Witness(cmd) => cmd_witness(cmd, cli.p, &out),
        Command::Build(cmd) => cmd_build(cmd, cli.p, &out),
        Command::Orbit(args) => cmd_orbit(args, cli.p, &out),
        Command::Density(args) => cmd_density(args, cli.p, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
