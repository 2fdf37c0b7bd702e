use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isolab::asymptotics::{
    constants, probe_separation, probe_separation_nested, solve_c_n, Budget, ConstantsEntry, ConstantsTable,
};
use isolab::experiments::{
    configuration_sample, expectation_scan, poisson_gof, run_sweep, scaling_probe, GofEstimator, ScalingConfig,
    ScanConfig, SweepConfig,
};
use isolab::geometry::all_pairs;
use isolab::isolation::{count_record, read_records, write_records, StarCap};
use isolab::pointprocess::{replicate_rng, sample_replicate, PointSet};
use isolab::{Conn, Error, Flavor};

#[derive(Parser)]
#[command(name = "isolab", version, about = "Isolated faces in random Čech and Rips complexes on the torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a Poisson process on the torus and write it as CSV.
    Sample {
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        replicate_id: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count one realization and print its record.
    Count(CountArgs),
    /// Build or refresh a constants table.
    Constants(ConstantsArgs),
    /// Solve for c_n and the radius r_n(c_n).
    SolveCn(SolveArgs),
    /// Run a sweep described by a JSON config.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Poisson goodness of fit of the J column of a records CSV.
    Gof {
        records: PathBuf,
        /// Compare against Poisson(e^-alpha) instead of the empirical mean.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Empirical and integral E[J] across schedule offsets.
    Scan {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Search for small separation volumes between overlapping faces.
    ProbeLemma {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct FaceArgs {
    #[arg(long, default_value = "R")]
    p: Flavor,
    #[arg(long, default_value = "U")]
    q: Conn,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    face: FaceArgs,
    #[arg(long)]
    r: f64,
    /// Point CSV; otherwise a replicate is sampled from --n/--d/--seed.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    replicate_id: u64,
    /// J* cap as a multiple of r.
    #[arg(long, default_value_t = 4.0, conflicts_with = "cap_absolute")]
    cap_factor: f64,
    #[arg(long)]
    cap_absolute: Option<f64>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Table to create or update.
    #[arg(long)]
    out: PathBuf,
    /// Flavor/connectivity pairs such as R/U; all four by default.
    #[arg(long, value_delimiter = ',')]
    pq: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    face: FaceArgs,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_delimiter = ',')]
    n: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    constants: Option<PathBuf>,
    /// Configuration draws when k >= 2.
    #[arg(long, default_value_t = 20_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also tabulate n r^d m - log n - (1 - a) log log n (k = 1).
    #[arg(long)]
    scaling: bool,
    #[arg(long)]
    a: Option<f64>,
}

fn parse_pair(s: &str) -> isolab::Result<(Flavor, Conn)> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("expected p/q such as R/U, got {s:?}")))?;
    Ok((p.parse()?, q.parse()?))
}

fn out_writer(path: Option<&Path>) -> isolab::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Entry from `path`, or computed on the spot with the default budget.
fn lookup(path: Option<&Path>, p: Flavor, q: Conn, k: usize, d: usize, seed: u64) -> isolab::Result<ConstantsTable> {
    match path {
        Some(path) => {
            let t = ConstantsTable::load(path)?;
            t.get(p, q, k, d)?;
            Ok(t)
        }
        None => {
            let mut rng = replicate_rng(seed, u64::MAX - 1);
            let mut t = ConstantsTable::default();
            t.insert(constants(p, q, k, d, &Budget::default(), &mut rng)?);
            Ok(t)
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> isolab::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> isolab::Result<ExitCode> {
    match cli.cmd {
        Cmd::Sample {
            n,
            d,
            seed,
            replicate_id,
            out,
        } => {
            let ps = sample_replicate(n, d, seed, replicate_id)?;
            ps.write_csv(out_writer(out.as_deref())?)?;
        }
        Cmd::Count(a) => {
            let ps = match (&a.points, a.n) {
                (Some(path), _) => PointSet::read_csv(File::open(path)?)?,
                (None, Some(n)) => sample_replicate(n, a.d, a.seed, a.replicate_id)?,
                (None, None) => return Err(Error::InvalidArgument("count needs --points or --n".into())),
            };
            let cap = match a.cap_absolute {
                Some(c) => StarCap::Absolute(c),
                None => StarCap::Factor(a.cap_factor),
            };
            let (rec, star) = count_record(&ps, a.r, a.face.k, a.face.p, a.face.q, cap, a.replicate_id)?;
            write_records(io::stdout().lock(), &[rec])?;
            if star.near_cap > 0 {
                eprintln!("note: {} tuples counted in J* were born within 25% of the cap {}", star.near_cap, star.cap);
            }
        }
        Cmd::Constants(a) => {
            let pairs: Vec<(Flavor, Conn)> = if a.pq.is_empty() {
                all_pairs().to_vec()
            } else {
                a.pq.iter().map(|s| parse_pair(s)).collect::<isolab::Result<_>>()?
            };
            let mut table = if a.out.exists() {
                ConstantsTable::load(&a.out)?
            } else {
                ConstantsTable::default()
            };
            let mut budget = Budget::default();
            if let Some(s) = a.starts {
                budget.starts = s;
            }
            let mut rng = replicate_rng(a.seed, 0);
            for &d in &a.d {
                for &k in &a.k {
                    for &(p, q) in &pairs {
                        let e: ConstantsEntry = constants(p, q, k, d, &budget, &mut rng)?;
                        eprintln!("{}: m = {:.6}, M = {:.6}", ConstantsTable::key(p, q, k, d), e.m.value, e.big_m.value);
                        table.insert(e);
                    }
                }
            }
            table.save(&a.out)?;
        }
        Cmd::SolveCn(a) => {
            let (p, q, k) = (a.face.p, a.face.q, a.face.k);
            if a.n.is_empty() {
                return Err(Error::InvalidArgument("solve-cn needs --n".into()));
            }
            let table = lookup(a.constants.as_deref(), p, q, k, a.d, a.seed)?;
            if a.scaling {
                let cfg = ScalingConfig {
                    p,
                    q,
                    d: a.d,
                    n: a.n.clone(),
                    alpha: a.alpha,
                    a: a.a,
                    window: isolab::experiments::DRIFT_WINDOW,
                };
                return print_json(&scaling_probe(&cfg, &table)?).map(|_| ExitCode::SUCCESS);
            }
            let e = table.get(p, q, k, a.d)?;
            let mut rng = replicate_rng(a.seed, u64::MAX);
            let sample = configuration_sample(p, q, k, a.d, a.draws, &mut rng)?;
            let sched = isolab::asymptotics::RadiusSchedule {
                k,
                d: a.d,
                alpha: a.alpha,
                a_vol: e.a_vol.value,
                m: e.m.value,
                c: e.m.value,
            };
            let sols = a
                .n
                .iter()
                .map(|&n| solve_c_n(n, &sample, &sched, e.big_m.value))
                .collect::<isolab::Result<Vec<_>>>()?;
            print_json(&sols)?;
        }
        Cmd::Sweep { config, seed, constants } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let table = lookup(constants.as_deref(), cfg.p, cfg.q, cfg.k, cfg.d, cfg.master_seed)?;
            let out = run_sweep(&cfg, &table)?;
            if cfg.output.is_none() {
                write_records(io::stdout().lock(), &out.records)?;
            }
            for c in &out.cells {
                eprintln!(
                    "cell {} n={} {}: r={:?} P(J=0)={:?} P(J*=0)={:?}",
                    c.index, c.n, c.label, c.r, c.p_j_zero, c.p_j_star_zero
                );
            }
            if out.all_skipped() {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Gof { records, alpha } => {
            let recs = read_records(File::open(records)?)?;
            let est = match alpha {
                Some(alpha) => GofEstimator::Target { alpha },
                None => GofEstimator::EmpiricalMean,
            };
            print_json(&poisson_gof(&recs, est)?)?;
        }
        Cmd::Scan { config, seed, constants } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg: ScanConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("scan config: {e}")))?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let table = lookup(constants.as_deref(), cfg.p, cfg.q, cfg.k, cfg.d, cfg.master_seed)?;
            let rows = expectation_scan(&cfg, &table)?;
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
            if rows.iter().all(|r| r.skipped) {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::ProbeLemma {
            k,
            d,
            j,
            delta,
            trials,
            seed,
        } => {
            let mut rng = replicate_rng(seed, 0);
            let results = delta
                .iter()
                .map(|&dl| probe_separation(k, d, j, dl, trials, &mut rng))
                .collect::<isolab::Result<Vec<_>>>()?;
            let nested = if delta.len() > 1 {
                Some(probe_separation_nested(k, d, j, &delta, trials.max(delta.len()), &mut rng)?)
            } else {
                None
            };
            print_json(&serde_json::json!({ "probes": results, "nested_minima": nested }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
