use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sumfree_core::dilation::{extract_dilate_exhaustive, extract_dilate_folner, extract_dilate_sampled};
use sumfree_core::harness::{self, geometric_schedule};
use sumfree_core::measures::{build_mu, uniform_provider};
use sumfree_core::nat::{fmt_rational, parse_rational};
use sumfree_core::periodic::{check_inequality_star, fls_step, periodic_hull, verify_density_drop};
use sumfree_core::solver::max_k_sum_free;
use sumfree_core::sumfree::{find_violation, is_strongly_k_sum_free};
use sumfree_core::{
    Algorithm, Error, FiniteSet, FlsInstance, FlsOutcome, FolnerGrid, HorizonSet, Nat, Rational, SolveStatus,
};

const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_FALSIFIED: u8 = 4;

#[derive(Parser)]
#[command(name = "sumfree", version, about = "k-sum-free sets: extraction, exact optima, Følner grids, periodic steps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a set for k-sum-freeness and print the smallest violation.
    Check {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// Require l-sum-freeness for every l in 2..=k.
        #[arg(long)]
        strong: bool,
    },
    #[command(subcommand)]
    Solve(Solve),
    #[command(subcommand)]
    Extract(Extract),
    #[command(subcommand)]
    Folner(Folner),
    #[command(subcommand)]
    Periodic(Periodic),
    #[command(subcommand)]
    Measure(Measure),
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Solve {
    /// Largest k-sum-free subset, exactly.
    Max {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "bb")]
        algo: Algorithm,
        #[arg(long)]
        strong: bool,
        /// Time budget in seconds; on expiry the best set found is reported.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
    },
}

#[derive(Subcommand)]
enum Extract {
    /// Dilate into the sum-free arc of the circle.
    Erdos {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// Sample this many dilators instead of sweeping every breakpoint.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dilate multiplicatively into a sum-free subset of a Følner grid.
    Folner {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// `m` for the diagonal grid, or `r,b`.
        #[arg(long)]
        grid: FolnerGrid,
        /// Sum-free subset of the grid; computed exactly when omitted.
        #[arg(long = "sumfree-subset")]
        subset: Option<PathBuf>,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
    },
}

#[derive(Subcommand)]
enum Folner {
    /// Print the grid in set file format.
    Gen {
        #[arg(long)]
        grid: FolnerGrid,
        #[arg(long, default_value_t = sumfree_core::folner::DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// `|(aF) △ F| / |F|`, by enumeration and by the closed form.
    Defect {
        #[arg(long)]
        grid: FolnerGrid,
        #[arg(long)]
        a: Nat,
    },
}

#[derive(Args)]
struct FlsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long = "Q")]
    q: u64,
    #[arg(long)]
    i: u64,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[arg(long)]
    n0: Nat,
    /// n_1,n_2,...; at least k*n0 terms.
    #[arg(long, value_delimiter = ',', conflicts_with = "ratio")]
    schedule: Option<Vec<Nat>>,
    /// Build the schedule as n0*ratio^j instead of listing it.
    #[arg(long)]
    ratio: Option<Nat>,
    #[arg(long = "in")]
    input: PathBuf,
    /// The file lists A only up to this bound.
    #[arg(long)]
    horizon: Option<Nat>,
    /// Directory for payload files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Periodic {
    /// Residues mod Q of A ∩ [1, n0].
    Hull {
        #[arg(long = "Q")]
        q: u64,
        #[arg(long)]
        n0: Nat,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// One density-increment step.
    FlsStep(FlsArgs),
}

#[derive(Subcommand)]
enum Measure {
    /// The contraction recursion, printed as `point weight` lines.
    BuildMu {
        #[arg(long)]
        k: usize,
        #[arg(long = "Q")]
        q: Nat,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "uniform")]
        provider: String,
        /// Support bound of the first measure.
        #[arg(long, default_value = "1")]
        n: Nat,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Exact maximum k-sum-free fraction of F_1..F_m.
    Ratio {
        #[arg(long)]
        k: usize,
        #[arg(long = "m-max")]
        m_max: usize,
        #[arg(long, default_value_t = 120.0)]
        timeout: f64,
        /// Fill the wall_time column (otherwise NA, keeping output reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Følner defect of a fixed multiplier along the diagonal grids.
    Defect {
        #[arg(long)]
        a: Nat,
        #[arg(long = "m-max")]
        m_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Circle extraction on seeded random sets.
    Extract {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded density-drop, translate-inequality and fLS-step instances.
    Fls {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances of each kind per k in {2, 3}.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Where falsifying instances are written.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn read_set(path: &Path) -> anyhow::Result<FiniteSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FiniteSet::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn budget(seconds: f64) -> anyhow::Result<Duration> {
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(Error::InvalidParameter(format!("timeout must be positive, got {seconds}")).into());
    }
    Ok(Duration::from_secs_f64(seconds))
}

fn emit(text: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_payload(dir: &Path, name: &str, value: &serde_json::Value) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn residues_json(r: &sumfree_core::ResidueSet) -> serde_json::Value {
    json!({ "modulus": r.modulus(), "residues": r.residues() })
}

/// Result of a command that ran to completion.
enum Done {
    Ok,
    Falsified,
}

fn run(cli: Cli) -> anyhow::Result<Done> {
    match cli.command {
        Command::Check { k, input, strong } => {
            let a = read_set(&input)?;
            if strong {
                let ok = is_strongly_k_sum_free(&a, k)?;
                println!("strongly-sum-free={ok}");
                if !ok {
                    for l in 2..=k {
                        if let Some(v) = find_violation(&a, l)? {
                            print_violation(&v);
                            break;
                        }
                    }
                }
            } else {
                let v = find_violation(&a, k)?;
                println!("sum-free={}", v.is_none());
                if let Some(v) = v {
                    print_violation(&v);
                }
            }
        }
        Command::Solve(Solve::Max { k, input, algo, strong, timeout }) => {
            let a = read_set(&input)?;
            let r = max_k_sum_free(&a, k, algo, budget(timeout)?, strong)?;
            println!("size={} status={} nodes={}", r.size, r.status, r.nodes_explored);
            print!("{}", r.witness.to_text());
        }
        Command::Extract(Extract::Erdos { k, input, samples, seed }) => {
            let a = read_set(&input)?;
            let r = match samples {
                Some(n) => extract_dilate_sampled(&a, k, n, seed)?,
                None => extract_dilate_exhaustive(&a, k)?,
            };
            println!("dilator={}", fmt_rational(&r.dilator));
            println!("score={}", r.score);
            println!("bound={}", fmt_rational(&r.bound));
            print!("{}", r.subset.to_text());
        }
        Command::Extract(Extract::Folner { k, input, grid, subset, timeout }) => {
            let a = read_set(&input)?;
            let f = grid.generate()?;
            let target = match subset {
                Some(path) => read_set(&path)?,
                None => {
                    let r = max_k_sum_free(&f, k, Algorithm::BranchAndBound, budget(timeout)?, false)?;
                    if r.status != SolveStatus::Optimal {
                        eprintln!("note: grid subset is a lower bound ({})", r.status);
                    }
                    r.witness
                }
            };
            let r = extract_dilate_folner(&a, &f, &target, k)?;
            println!("dilator={}", r.dilator);
            println!("score={}", r.score);
            println!("bound={}", fmt_rational(&r.bound));
            print!("{}", r.subset.to_text());
        }
        Command::Folner(Folner::Gen { grid, cap }) => {
            print!("{}", grid.generate_with_cap(cap)?.to_text());
        }
        Command::Folner(Folner::Defect { grid, a }) => {
            let d = grid.defect(&a);
            let c = grid.defect_closed_form(&a);
            println!("defect={} closed_form={} match={}", fmt_rational(&d), fmt_rational(&c), d == c);
        }
        Command::Periodic(Periodic::Hull { q, n0, input }) => {
            let a = read_set(&input)?;
            let hull = periodic_hull(&a, &n0, q)?;
            println!("hull={hull}");
            println!("density={}", fmt_rational(&hull.density()));
        }
        Command::Periodic(Periodic::FlsStep(args)) => return fls_command(args),
        Command::Measure(Measure::BuildMu { k, q, steps, provider, n }) => {
            if provider != "uniform" {
                bail!(Error::InvalidParameter(format!("unknown provider {provider:?}, expected uniform")));
            }
            let mu = build_mu(&n, steps, &q, k, uniform_provider)?;
            print!("{}", mu.to_text());
        }
        Command::Experiment(e) => return experiment(e),
    }
    Ok(Done::Ok)
}

fn print_violation(v: &sumfree_core::Violation) {
    let terms: Vec<String> = v.summands.iter().map(|s| s.to_string()).collect();
    println!("violation={} = {}", terms.join(" + "), v.total);
}

fn fls_command(args: FlsArgs) -> anyhow::Result<Done> {
    let a = read_set(&args.input)?;
    let set = match args.horizon {
        Some(h) => HorizonSet::truncated(a, h),
        None => HorizonSet::complete(a),
    };
    let schedule = match (args.schedule, args.ratio) {
        (Some(s), _) => s,
        (None, Some(r)) => {
            let len = args.k.saturating_mul(args.n0.to_u64().context("n0 too large for a generated schedule")? as usize);
            geometric_schedule(&args.n0, r.get(), len)
        }
        (None, None) => bail!(Error::InvalidParameter("pass --schedule or --ratio".into())),
    };
    let instance = FlsInstance {
        set,
        k: args.k,
        n0: args.n0,
        modulus: args.q,
        i: args.i,
        eps: args.eps,
        schedule,
    };
    let outcome = fls_step(&instance)?;
    let payload = match &outcome {
        FlsOutcome::PeriodicContainment { hull } => json!({ "hull": residues_json(hull) }),
        FlsOutcome::DensityDrop { index, density, ap_start, ap_difference } => json!({
            "index": index,
            "n": instance.schedule[index - 1].to_string(),
            "density": fmt_rational(density),
            "ap_start": ap_start.to_string(),
            "ap_difference": ap_difference,
            "ap_length": instance.i,
        }),
        FlsOutcome::ApNotFound { kernel } => json!({ "kernel": residues_json(kernel) }),
        FlsOutcome::Falsified(inst) => serde_json::to_value(inst)?,
    };
    let path = write_payload(&args.out, &format!("fls-{}.json", outcome.tag()), &payload)?;
    println!("{} {}", outcome.tag(), path.display());
    Ok(match outcome {
        FlsOutcome::Falsified(_) => Done::Falsified,
        _ => Done::Ok,
    })
}

fn experiment(e: Experiment) -> anyhow::Result<Done> {
    match e {
        Experiment::Ratio { k, m_max, timeout, timing, out } => {
            let rows = harness::run_ratio_experiment(k, m_max, budget(timeout)?)?;
            emit(&harness::ratio_csv(&rows, timing), &out)?;
        }
        Experiment::Defect { a, m_max, out } => {
            let rows = harness::run_defect_experiment(&a, m_max)?;
            emit(&harness::defect_csv(&rows), &out)?;
            if !rows.iter().all(harness::DefectRow::matches) {
                return Ok(Done::Falsified);
            }
        }
        Experiment::Extract { k, trials, size, seed, out } => {
            let rows = harness::run_extraction_experiment(k, trials, size, seed)?;
            emit(&harness::extraction_csv(&rows), &out)?;
            if !rows.iter().all(harness::ExtractionRow::meets_guarantee) {
                return Ok(Done::Falsified);
            }
        }
        Experiment::Fls { seed, count, out } => return fls_experiment(seed, count, &out),
    }
    Ok(Done::Ok)
}

fn fls_experiment(seed: u64, count: usize, out: &Path) -> anyhow::Result<Done> {
    let mut rng = harness::rng(seed);
    let mut falsified = 0;
    let mut tags: std::collections::BTreeMap<&'static str, usize> = Default::default();
    for k in [2, 3] {
        for t in 0..count {
            let inst = harness::random_density_drop_instance(&mut rng, k)?;
            if !verify_density_drop(&inst)? {
                falsified += 1;
                let value: serde_json::Value = serde_json::from_str(&inst.to_json())?;
                let path = write_payload(out, &format!("falsified-density-drop-k{k}-{t}.json"), &value)?;
                eprintln!("density drop falsified: {}", path.display());
            }
            let star = harness::random_star_instance(&mut rng, k)?;
            if !check_inequality_star(&star.set, &star.n, &star.x, star.m, star.i, star.k)? {
                falsified += 1;
                let path = write_payload(out, &format!("falsified-star-k{k}-{t}.json"), &serde_json::to_value(&star)?)?;
                eprintln!("inequality falsified: {}", path.display());
            }
            let fls = harness::random_fls_instance(&mut rng, k)?;
            let outcome = fls_step(&fls)?;
            *tags.entry(outcome.tag()).or_default() += 1;
            if let FlsOutcome::Falsified(inst) = outcome {
                falsified += 1;
                let path = write_payload(out, &format!("falsified-fls-k{k}-{t}.json"), &serde_json::to_value(&inst)?)?;
                eprintln!("fls step falsified: {}", path.display());
            }
        }
    }
    println!("instances={} falsified={falsified}", 2 * count);
    for (tag, n) in tags {
        println!("fls {tag}={n}");
    }
    Ok(if falsified > 0 { Done::Falsified } else { Done::Ok })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::ResourceLimit { .. }) => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Falsified) => ExitCode::from(EXIT_FALSIFIED),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

