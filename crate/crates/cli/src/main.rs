//! Batch command-line harness over the spectral factorization toolkit.
//!
//! Every subcommand echoes its configuration into the files it writes and
//! runs deterministically from its seed: identical invocations produce
//! byte-identical outputs. Exit codes: 0 success, 2 precondition or usage
//! failure, 3 numerical failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use specfactor::digital::{solve_couplings, Assignment, SubsetOrder, TargetKind};
use specfactor::measure::{enumerate_paths, FactorizationRun, Variant};
use specfactor::numtheory::{goldbach_check, sieve, spectrum_values, SpectrumSpec};
use specfactor::susy::{
    assemble_potential, build_superpotentials, eigen_solve, equivalence_experiment, Grid,
    PotentialTable, RealizationOptions,
};
use specfactor::{factorize, PrimeTable};

const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] specfactor::Error),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_precondition() => 2,
            CliError::Core(_) => 3,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "specfactor",
    version,
    about = "Measurement-driven factorization on engineered spectra: protocol simulation, \
             multi-spin operator synthesis, and inverse-spectral potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor an integer by simulated projective measurements
    Factor(FactorArgs),
    /// Enumerate every measurement path and emit the outcome graph
    Paths(PathsArgs),
    /// Synthesize diagonal multi-spin couplings with a prescribed spectrum
    SynthDigital(SynthDigitalArgs),
    /// Construct a potential whose spectrum is a prescribed level list
    Potential(PotentialArgs),
    /// Recover the spectrum of a gridded potential read from CSV
    VerifySpectrum(VerifySpectrumArgs),
    /// Even-number coverage and two-copy spectrum desk checks
    Goldbach(GoldbachArgs),
}

/// Resource cap on the cutoff exponent, configurable via SPECFACTOR_MAX_D.
fn max_d() -> u32 {
    std::env::var("SPECFACTOR_MAX_D")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(20)
}

fn check_d(d: u32) -> Result<u32, CliError> {
    let cap = max_d();
    if d == 0 || d > cap {
        return Err(CliError::Usage(format!(
            "d = {d} outside [1, {cap}] (cap set by SPECFACTOR_MAX_D)"
        )));
    }
    Ok(d)
}

fn write_json<T: Serialize>(path: &Path, payload: &T) -> CliResult {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, payload).map_err(std::io::Error::other)?;
    out.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// factor

#[derive(Args, Debug, Clone, Serialize)]
struct FactorArgs {
    /// Integer to factor (2 <= N <= 2^d)
    n: u64,
    /// Protocol variant: A measures once per prime with multiplicity,
    /// B once per distinct prime with classical division in between
    #[arg(long, default_value = "B")]
    variant: Variant,
    /// Cutoff exponent; the device realizes the first 2^d primes.
    /// Defaults to the smallest d with N <= 2^d
    #[arg(long)]
    d: Option<u32>,
    /// Seed of the run (sweeps use seed, seed+1, ...)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run this many consecutive seeds instead of one
    #[arg(long)]
    sweep: Option<u64>,
    /// Worker threads for seed sweeps
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the full JSON trace here
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Serialize)]
struct FactorOutput<'a> {
    schema: u32,
    config: &'a FactorArgs,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<FactorizationRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<Vec<FactorizationRun>>,
}

fn default_exponent_for(n: u64) -> u32 {
    let mut d = 1;
    while (1u64 << d) < n && d < 63 {
        d += 1;
    }
    d
}

fn cmd_factor(args: FactorArgs) -> CliResult {
    let d = check_d(args.d.unwrap_or_else(|| default_exponent_for(args.n)))?;
    let table = PrimeTable::for_cutoff_exponent(d)?;
    let sweep = args.sweep.unwrap_or(1);
    if sweep == 0 {
        return Err(CliError::Usage("--sweep must be at least 1".into()));
    }
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }

    let seeds: Vec<u64> = (0..sweep).map(|i| args.seed.wrapping_add(i)).collect();
    let runs = run_seeds(args.n, args.variant, &table, &seeds, args.jobs)?;

    let first = &runs[0];
    if first.result.is_prime() {
        println!(
            "{} is prime ({} measurement)",
            args.n, first.counts.measurements
        );
    } else {
        println!("{} = {}", args.n, first.result);
        let m = first.counts.measurements;
        println!(
            "variant {:?}: {} measurement{}, {} classical divisions (seed {})",
            args.variant,
            m,
            if m == 1 { "" } else { "s" },
            first.counts.divisions,
            first.seed
        );
    }
    if sweep > 1 {
        let consistent = runs.iter().all(|r| {
            r.result == first.result && r.counts.measurements == first.counts.measurements
        });
        println!(
            "sweep over {} seeds starting at {}: results {}",
            sweep,
            args.seed,
            if consistent {
                "all identical"
            } else {
                "DIVERGED"
            }
        );
        if !consistent {
            return Err(CliError::Numerical(
                "sweep produced inconsistent factorizations".into(),
            ));
        }
    }

    if let Some(path) = &args.trace {
        let output = if sweep == 1 {
            FactorOutput {
                schema: SCHEMA,
                config: &args,
                run: Some(runs.into_iter().next().unwrap()),
                runs: None,
            }
        } else {
            FactorOutput {
                schema: SCHEMA,
                config: &args,
                run: None,
                runs: Some(runs),
            }
        };
        write_json(path, &output)?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}

fn run_seeds(
    n: u64,
    variant: Variant,
    table: &PrimeTable,
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<FactorizationRun>, CliError> {
    if jobs <= 1 || seeds.len() < 2 {
        return seeds
            .iter()
            .map(|&s| factorize(n, variant, table, s).map_err(CliError::from))
            .collect();
    }
    let chunk = seeds.len().div_ceil(jobs);
    let mut results: Vec<Option<FactorizationRun>> = vec![None; seeds.len()];
    let mut first_error = None;
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .zip(results.chunks_mut(chunk))
            .map(|(seed_chunk, slot_chunk)| {
                scope.spawn(move || -> Result<(), specfactor::Error> {
                    for (seed, slot) in seed_chunk.iter().zip(slot_chunk.iter_mut()) {
                        *slot = Some(factorize(n, variant, table, *seed)?);
                    }
                    Ok(())
                })
            })
            .collect();
        for handle in handles {
            if let Err(e) = handle.join().expect("worker panicked") {
                first_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e.into());
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("all slots filled"))
        .collect())
}

// ---------------------------------------------------------------------------
// paths

#[derive(Args, Debug, Clone, Serialize)]
struct PathsArgs {
    /// Integer whose measurement graph to enumerate
    n: u64,
    /// Cutoff exponent (defaults to the smallest d with N <= 2^d)
    #[arg(long)]
    d: Option<u32>,
    /// Write the JSON outcome tree here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a from,to,prime,multiplicity edge list here
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Serialize)]
struct PathsOutput<'a> {
    schema: u32,
    config: &'a PathsArgs,
    leaves: usize,
    depth: usize,
    tree: specfactor::measure::PathNode,
}

fn cmd_paths(args: PathsArgs) -> CliResult {
    let d = check_d(args.d.unwrap_or_else(|| default_exponent_for(args.n)))?;
    let table = PrimeTable::for_cutoff_exponent(d)?;
    let tree = enumerate_paths(args.n, &table)?;
    println!(
        "{}: {} distinct measurement paths, {} stages deep",
        args.n,
        tree.leaf_count(),
        tree.depth()
    );
    let first: Vec<u64> = tree.children.iter().map(|e| e.prime).collect();
    println!("first-stage outcomes: {first:?}");

    if let Some(path) = &args.edges {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "from,to,prime,multiplicity")?;
        for (from, to, prime, mult) in tree.dedup_edges() {
            writeln!(out, "{from},{to},{prime},{mult}")?;
        }
        println!("edge list written to {}", path.display());
    }
    if let Some(path) = &args.out {
        let output = PathsOutput {
            schema: SCHEMA,
            config: &args,
            leaves: tree.leaf_count(),
            depth: tree.depth(),
            tree,
        };
        write_json(path, &output)?;
        println!("outcome tree written to {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth-digital

#[derive(Args, Debug, Clone, Serialize)]
struct SynthDigitalArgs {
    /// Qubit count of the register
    #[arg(long)]
    d: u32,
    /// Spectrum to realize on the 2^d basis states
    #[arg(long, default_value = "primes", value_parser = parse_target)]
    target: TargetKind,
    /// Basis-state assignment: canonical (popcount then lexicographic)
    /// or paper (the published small-table ordering, d <= 3)
    #[arg(long, default_value = "canonical", value_parser = clap::value_parser!(SubsetOrder))]
    assignment: SubsetOrder,
    /// Write the coupling set JSON here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recover the eigenvalue multiset and compare it against the targets
    #[arg(long)]
    verify: bool,
}

fn parse_target(s: &str) -> Result<TargetKind, String> {
    match s {
        "primes" => Ok(TargetKind::Primes),
        "logprimes" => Ok(TargetKind::LogPrimes),
        other => Err(format!(
            "unknown target {other:?} (expected primes or logprimes)"
        )),
    }
}

#[derive(Serialize)]
struct SynthOutput<'a> {
    schema: u32,
    config: &'a SynthDigitalArgs,
    couplings: specfactor::digital::CouplingSet,
}

fn cmd_synth_digital(args: SynthDigitalArgs) -> CliResult {
    let d = check_d(args.d)?;
    let primes = sieve(1usize << d)?;
    let targets: Vec<f64> = match args.target {
        TargetKind::Primes => primes.iter().map(|&p| p as f64).collect(),
        TargetKind::LogPrimes => primes.iter().map(|&p| (p as f64).ln()).collect(),
        TargetKind::Custom => {
            return Err(CliError::Usage(
                "custom targets are not exposed here".into(),
            ))
        }
    };
    let assignment = Assignment::canonical(d, args.assignment)?;
    let coupling_set = solve_couplings(d, &targets, &assignment, args.target)?;

    let nonzero = coupling_set
        .couplings()
        .iter()
        .filter(|j| **j != 0.0)
        .count();
    println!(
        "d = {d}: solved {} couplings ({} nonzero) for target {:?}",
        coupling_set.couplings().len(),
        nonzero,
        args.target
    );

    if args.verify {
        let mut recovered = coupling_set.eigenvalues();
        recovered.sort_by(|a, b| a.total_cmp(b));
        let tolerance = match args.target {
            TargetKind::Primes => 0.0,
            _ => 1e-9,
        };
        let worst = recovered
            .iter()
            .zip(&targets)
            .map(|(r, t)| (r - t).abs())
            .fold(0.0f64, f64::max);
        if worst <= tolerance {
            println!(
                "verify: eigenvalue multiset matches the first {} targets (max dev {worst:.1e})",
                targets.len()
            );
        } else {
            println!("verify: FAILED, max deviation {worst:.3e}");
            return Err(CliError::Numerical(format!(
                "recovered spectrum deviates by {worst:.3e}"
            )));
        }
    }

    if let Some(path) = &args.out {
        let output = SynthOutput {
            schema: SCHEMA,
            config: &args,
            couplings: coupling_set,
        };
        write_json(path, &output)?;
        println!("couplings written to {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// potential

#[derive(Args, Debug, Clone, Serialize)]
struct PotentialArgs {
    /// Spectrum family: logprimes, logintegers, or custom
    #[arg(long, default_value = "logprimes")]
    spectrum: String,
    /// Number of levels to realize
    #[arg(long, default_value_t = 8)]
    levels: usize,
    /// Comma-separated level list for --spectrum custom
    #[arg(long)]
    targets: Option<String>,
    /// Box half-width (default: wide enough for the slowest kink)
    #[arg(long = "L")]
    l: Option<f64>,
    /// Grid step (default: L / 2^9)
    #[arg(long)]
    h: Option<f64>,
    /// Auxiliary confinement levels above the requested spectrum
    #[arg(long, default_value_t = 1)]
    aux: usize,
    /// Spacing of the auxiliary levels (default: max(1, top gap))
    #[arg(long)]
    aux_gap: Option<f64>,
    /// Output CSV of x,V (a .meta.json sidecar is written next to it)
    #[arg(long)]
    out: PathBuf,
    /// Emit the first-order matrix system and its residual report
    #[arg(long)]
    lloyd_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PotentialMetaOutput<'a, 'b> {
    schema: u32,
    config: &'a PotentialArgs,
    #[serde(flatten)]
    metadata: specfactor::susy::PotentialMetadata<'b>,
    aux_levels: usize,
    realized_levels: &'b [f64],
}

#[derive(Serialize)]
struct LloydOutput<'a> {
    schema: u32,
    config: &'a PotentialArgs,
    point: specfactor::susy::LloydPoint,
    report: specfactor::susy::LloydReport,
}

fn parse_custom_targets(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad target value {part:?}")))
        })
        .collect()
}

fn resolve_targets(args: &PotentialArgs) -> Result<Vec<f64>, CliError> {
    const MAX_LEVELS: usize = 256;
    if args.levels == 0 || args.levels > MAX_LEVELS {
        return Err(CliError::Usage(format!(
            "--levels must lie in [1, {MAX_LEVELS}]"
        )));
    }
    let spec = match args.spectrum.as_str() {
        "logprimes" => SpectrumSpec::LogPrimes {
            levels: args.levels,
        },
        "logintegers" => SpectrumSpec::LogIntegers {
            levels: args.levels,
            include_unity: false,
        },
        "custom" => {
            let raw = args
                .targets
                .as_ref()
                .ok_or_else(|| CliError::Usage("--spectrum custom requires --targets".into()))?;
            let values = parse_custom_targets(raw)?;
            SpectrumSpec::Custom { values }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown spectrum {other:?} (expected logprimes, logintegers, or custom)"
            )))
        }
    };
    Ok(spectrum_values(&spec)?)
}

fn cmd_potential(args: PotentialArgs) -> CliResult {
    let targets = resolve_targets(&args)?;
    let opts = RealizationOptions {
        aux_levels: args.aux,
        aux_gap: args.aux_gap,
        ..RealizationOptions::default()
    };
    let grid = match (args.l, args.h) {
        (Some(l), Some(h)) => Grid::new(l, h)?,
        (Some(l), None) => Grid::with_step_exponent(l, 9)?,
        (None, Some(h)) => {
            let suggested = specfactor::susy::suggested_grid(&targets, &opts)?;
            Grid::new(suggested.half_width(), h)?
        }
        (None, None) => specfactor::susy::suggested_grid(&targets, &opts)?,
    };

    let sps = build_superpotentials(&targets, grid, &opts)?;
    let pt = assemble_potential(&sps)?;
    let levels = eigen_solve(&pt, targets.len())?;

    println!(
        "built {} levels on [{:+.3}, {:+.3}] with step {:.5} ({} auxiliary)",
        targets.len(),
        -pt.grid().half_width(),
        pt.grid().half_width(),
        pt.grid().step(),
        sps.aux_levels(),
    );
    println!(
        "offset {:+.6}; valid half-width {:.3}",
        pt.offset(),
        sps.valid_half_width()
    );
    if let Some(res) = pt.residual() {
        println!(
            "ladder residual: {:.2e} in the core region (|W| <= 1), {:.2e} overall",
            res.max_in_core, res.max_overall
        );
    }
    let worst = levels
        .iter()
        .zip(&targets)
        .map(|(l, t)| (l - t).abs())
        .fold(0.0f64, f64::max);
    println!("recovered levels deviate from targets by at most {worst:.2e} (unrefined grid)");

    let csv = File::create(&args.out)?;
    pt.write_csv(BufWriter::new(csv))?;
    println!("potential written to {}", args.out.display());

    let meta_path = args.out.with_extension("meta.json");
    let meta = PotentialMetaOutput {
        schema: SCHEMA,
        config: &args,
        metadata: pt.metadata(),
        aux_levels: sps.aux_levels(),
        realized_levels: &levels,
    };
    write_json(&meta_path, &meta)?;
    println!("metadata written to {}", meta_path.display());

    if let Some(path) = &args.lloyd_out {
        let report = equivalence_experiment(&sps, 1e-4)?;
        for line in &report.lines {
            println!("{line}");
        }
        let node = sps.grid().half_nodes() + sps.valid_half_nodes_common() / 2;
        let point = specfactor::susy::lloyd_system_at(&sps, node)?;
        let output = LloydOutput {
            schema: SCHEMA,
            config: &args,
            point,
            report,
        };
        write_json(path, &output)?;
        println!("matrix system written to {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify-spectrum

#[derive(Args, Debug, Clone, Serialize)]
struct VerifySpectrumArgs {
    /// Potential table CSV (x,V)
    csv: PathBuf,
    /// Number of levels to recover
    #[arg(long)]
    levels: usize,
    /// Metadata sidecar with declared targets (default: <csv>.meta.json)
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Maximum tolerated spacing deviation when targets are declared
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

fn cmd_verify_spectrum(args: VerifySpectrumArgs) -> CliResult {
    let file = File::open(&args.csv)?;
    let pt = PotentialTable::from_csv(BufReader::new(file))?;
    let levels = eigen_solve(&pt, args.levels)?;

    let meta_path = args
        .meta
        .clone()
        .unwrap_or_else(|| args.csv.with_extension("meta.json"));
    let declared: Option<Vec<f64>> = std::fs::read_to_string(&meta_path)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| {
            v["targets"]
                .as_array()
                .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        });

    println!("lowest {} levels of {}:", args.levels, args.csv.display());
    for (k, lam) in levels.iter().enumerate() {
        match declared.as_ref().and_then(|t| t.get(k)) {
            Some(target) => println!(
                "  e_{k} = {lam:+.6}   target {target:+.6}   dev {:+.2e}",
                lam - target
            ),
            None => println!("  e_{k} = {lam:+.6}"),
        }
    }
    for (k, pair) in levels.windows(2).enumerate() {
        println!("  spacing e_{} - e_{} = {:.6}", k + 1, k, pair[1] - pair[0]);
    }

    if let Some(targets) = declared {
        let worst_spacing = levels
            .windows(2)
            .zip(targets.windows(2))
            .map(|(l, t)| ((l[1] - l[0]) - (t[1] - t[0])).abs())
            .fold(0.0f64, f64::max);
        println!("max spacing deviation from declared targets: {worst_spacing:.3e}");
        if worst_spacing > args.tol {
            return Err(CliError::Numerical(format!(
                "spacing deviation {worst_spacing:.3e} exceeds tolerance {:.1e}",
                args.tol
            )));
        }
    } else {
        println!("(no metadata sidecar found; spectrum printed without comparison)");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// goldbach

#[derive(Args, Debug, Clone, Serialize)]
struct GoldbachArgs {
    /// Largest even number to cover
    #[arg(long, default_value_t = 100)]
    max: u64,
    /// Cutoff exponent of the prime table
    #[arg(long, default_value_t = 5)]
    d: u32,
    /// Print each decomposition instead of a summary
    #[arg(long)]
    full: bool,
}

fn cmd_goldbach(args: GoldbachArgs) -> CliResult {
    let d = check_d(args.d)?;
    let report = goldbach_check(args.max, d)?;
    let covered = report
        .entries
        .iter()
        .filter(|e| e.witness.is_some())
        .count();
    println!(
        "even numbers 4..={} against the first 2^{} primes: {covered}/{} decomposable",
        args.max,
        d,
        report.entries.len()
    );
    if args.full {
        for entry in &report.entries {
            match entry.witness {
                Some((p, q)) => println!("  {} = {} + {}", entry.even, p, q),
                None => println!("  {} = no table decomposition", entry.even),
            }
        }
    } else {
        let uncovered = report.uncovered();
        if !uncovered.is_empty() {
            println!("not decomposable: {uncovered:?}");
        }
    }
    println!(
        "two-copy spectrum over {} pairs: max |ln p + ln q - ln(pq)| = {:.2e}, products {}",
        report.two_copy.pair_count,
        report.two_copy.max_abs_dev,
        if report.two_copy.exact_products {
            "recovered exactly"
        } else {
            "NOT recovered"
        }
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Factor(args) => cmd_factor(args),
        Command::Paths(args) => cmd_paths(args),
        Command::SynthDigital(args) => cmd_synth_digital(args),
        Command::Potential(args) => cmd_potential(args),
        Command::VerifySpectrum(args) => cmd_verify_spectrum(args),
        Command::Goldbach(args) => cmd_goldbach(args),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}
