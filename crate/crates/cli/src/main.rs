//! `fairdiv`: run, benchmark, verify and generate cake-cutting instances.

mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use fairdiv_core::crossing::{
    lift_pk, solve_crossing_det, solve_crossing_rand, solve_mon_crossing, CrossingAnswer,
};
use fairdiv_core::experiment::{bench, parse_param_range, run_protocol, BenchProtocol};
use fairdiv_core::oracle::{
    check_fair, gen_equitable_hard, gen_perfect_hard, random_crossing, random_mon_crossing,
    random_valuation, FairnessNotion, FairnessReport, Notion,
};
use fairdiv_core::rational::{parse_q, qu};
use fairdiv_core::{Allocation, CostProfile, PublicCoins, Transcript, Q};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "Bit-metered cake-cutting protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol and print its allocation, cost and fairness verdict.
    Run(RunArgs),
    /// Measure worst-case costs over a parameter range and write a CSV.
    Bench(BenchArgs),
    /// Check an allocation against valuations; exit 1 when it is unfair.
    Verify(VerifyArgs),
    /// Generate valuations or crossing instances.
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// proportional, equitable2, perfect2, perfect2-rand, ef3,
    /// perfect-rand-noncomm, austin, rw:<program>, crossing, crossing-rand
    /// or mon-crossing.
    #[arg(long)]
    protocol: String,
    /// Valuations JSON: an array, or an object with a `valuations` field.
    #[arg(long)]
    valuations: Option<PathBuf>,
    /// Crossing instance JSON, bare or under an `instance` field.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Accuracy as a rational, e.g. `1/4096`.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
    seed: u64,
    /// Also write the transcript (a list of rounds) to this file.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    protocol: String,
    /// Geometric range `START..END[:FACTOR]`, e.g. `2^4..2^16` or `2^-4..2^-20`.
    #[arg(long)]
    param_range: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    allocation: PathBuf,
    #[arg(long)]
    valuations: PathBuf,
    /// proportional, envy-free, equitable or perfect.
    #[arg(long)]
    notion: String,
    #[arg(long)]
    epsilon: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    RandomValuation,
    CrossingRandom,
    EquitableHard,
    PerfectHard,
    PkLift,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Instance size.
    #[arg(long, default_value_t = 8)]
    m: u64,
    /// Value bound for monotone instances, block count for `pk-lift`.
    #[arg(long)]
    k: Option<u64>,
    /// Block holding the crossing for `pk-lift` (1-based, default 1).
    #[arg(long, default_value_t = 1)]
    z: u64,
    /// Draw a monotone instance for `crossing-random`.
    #[arg(long)]
    monotone: bool,
    #[arg(long, default_value_t = 4)]
    segments: usize,
    /// Density bound for `random-valuation`.
    #[arg(long, default_value = "2")]
    density: String,
    #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exits with a usage error (status 2).
fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn parse_protocol(name: &str) -> BenchProtocol {
    name.parse()
        .unwrap_or_else(|e| usage(ErrorKind::InvalidValue, format!("--protocol: {e}")))
}

fn parse_eps(s: &str) -> Result<Q> {
    parse_q(s).with_context(|| format!("bad --epsilon {s:?}"))
}

#[derive(Serialize)]
struct FairRun<'a> {
    allocation: &'a Allocation,
    cost: CostProfile,
    fairness: FairnessReport,
}

#[derive(Serialize)]
struct CrossingRun {
    #[serde(flatten)]
    answer: CrossingAnswer,
    valid: bool,
    cost: CostProfile,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let protocol = parse_protocol(&args.protocol);
    let mut coins = PublicCoins::new(args.seed);
    let (json, transcript) = if protocol.takes_size() {
        let Some(path) = &args.instance else {
            usage(ErrorKind::MissingRequiredArgument, "--instance is required for crossing protocols");
        };
        let mut tr = Transcript::new();
        let (answer, valid) = match protocol {
            BenchProtocol::MonCrossing => {
                let inst = files::read_mon_instance(path)?;
                let a = solve_mon_crossing(&inst, &mut tr)?;
                (a, inst.is_valid_answer(a.index))
            }
            BenchProtocol::Crossing => {
                let inst = files::read_crossing_instance(path)?;
                let a = solve_crossing_det(&inst, &mut tr)?;
                (a, inst.is_valid_answer(a.index))
            }
            _ => {
                let inst = files::read_crossing_instance(path)?;
                let a = solve_crossing_rand(&inst, &mut tr, &mut coins)?;
                (a, inst.is_valid_answer(a.index))
            }
        };
        let tr = tr.finished();
        let run = CrossingRun {
            answer,
            valid,
            cost: tr.cost()?,
        };
        (serde_json::to_string_pretty(&run)?, tr)
    } else {
        let Some(eps) = &args.epsilon else {
            usage(ErrorKind::MissingRequiredArgument, format!("--epsilon is required for {protocol}"));
        };
        let Some(path) = &args.valuations else {
            usage(ErrorKind::MissingRequiredArgument, "--valuations is required");
        };
        let eps = parse_eps(eps)?;
        let vals = files::read_valuations(path)?;
        let (out, notion) = run_protocol(&protocol, &vals, &eps, &mut coins)?;
        let fairness = check_fair(&out.allocation, &vals, &FairnessNotion::new(notion, eps)?)?;
        let run = FairRun {
            allocation: &out.allocation,
            cost: out.cost(),
            fairness,
        };
        (serde_json::to_string_pretty(&run)?, out.transcript)
    };
    if let Some(path) = &args.transcript {
        files::write(Some(path), &serde_json::to_string_pretty(transcript.rounds())?)?;
    }
    files::print(&json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let protocol = parse_protocol(&args.protocol);
    let params = parse_param_range(&args.param_range)
        .unwrap_or_else(|e| usage(ErrorKind::InvalidValue, format!("--param-range: {e}")));
    let rows = bench(&protocol, &params, args.trials, args.seed)?;
    let mut w = csv::Writer::from_path(&args.csv)
        .with_context(|| format!("cannot write {}", args.csv.display()))?;
    if rows.is_empty() {
        w.write_record(fairdiv_core::experiment::BENCH_HEADER.split(','))?;
    }
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let notion: Notion = args
        .notion
        .parse()
        .unwrap_or_else(|e| usage(ErrorKind::InvalidValue, format!("--notion: {e}")));
    let eps = parse_eps(&args.epsilon)?;
    let alloc: Allocation = files::read_json(&args.allocation)?;
    alloc.validate()?;
    let vals = files::read_valuations(&args.valuations)?;
    let report = check_fair(&alloc, &vals, &FairnessNotion::new(notion, eps)?)?;
    files::print(&serde_json::to_string_pretty(&report)?)?;
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct HardPair<I> {
    instance: I,
    valuations: Vec<fairdiv_core::DensityValuation>,
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let (m, seed) = (args.m, args.seed);
    if m == 0 {
        bail!("--m must be positive");
    }
    let json = match args.kind {
        GenKind::RandomValuation => {
            let d = parse_q(&args.density).context("bad --density")?;
            if d < qu(1) || args.segments == 0 {
                bail!("need --density >= 1 and --segments >= 1");
            }
            serde_json::to_string_pretty(&random_valuation(seed, args.segments, &d))?
        }
        GenKind::CrossingRandom if args.monotone => {
            serde_json::to_string_pretty(&random_mon_crossing(seed, m, args.k.unwrap_or(m)))?
        }
        GenKind::CrossingRandom => serde_json::to_string_pretty(&random_crossing(seed, m))?,
        GenKind::EquitableHard => {
            let inst = random_mon_crossing(seed, m, m);
            let (a, b) = gen_equitable_hard(&inst)?;
            serde_json::to_string_pretty(&HardPair {
                instance: inst,
                valuations: vec![a, b],
            })?
        }
        GenKind::PerfectHard => {
            let inst = random_crossing(seed, m);
            let (a, b) = gen_perfect_hard(&inst)?;
            serde_json::to_string_pretty(&HardPair {
                instance: inst,
                valuations: vec![a, b],
            })?
        }
        GenKind::PkLift => {
            let k = args.k.unwrap_or(2);
            let xs: Vec<Vec<u64>> = (0..k)
                .map(|j| random_mon_crossing(seed.wrapping_add(j + 1), m, m).x)
                .collect();
            let y = random_mon_crossing(seed, m, m).y;
            serde_json::to_string_pretty(&lift_pk(&xs, &y, args.z)?)?
        }
    };
    files::write(args.out.as_deref(), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
