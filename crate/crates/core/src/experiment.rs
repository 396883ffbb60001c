//! Seeded cost measurements: run a protocol on random inputs and aggregate
//! the worst-case transcript cost per parameter value.

use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::comm::{CostProfile, PublicCoins, Transcript};
use crate::crossing::{solve_crossing_det, solve_crossing_rand, solve_mon_crossing};
use crate::error::{Error, Result};
use crate::movingknife::austin;
use crate::oracle::{
    check_fair, random_crossing, random_hungry_valuation, random_mon_crossing, random_valuation,
    FairnessNotion, Notion,
};
use crate::protocols::{
    envy_free_three, equitable_two, perfect_random_noncomm, perfect_two, program_by_name,
    proportional_simultaneous, run_rw_simulated, CrossingMode, Outcome,
};
use crate::rational::{parse_q, qi, qu, serde_q, Q};
use crate::valuation::DensityValuation;

/// Density bound of the random valuations used by benchmarks.
pub const BENCH_DENSITY: i64 = 4;
/// Segment count of the random valuations used by benchmarks.
pub const BENCH_SEGMENTS: usize = 8;

/// Protocols that can be benchmarked. The parameter is `m` for the crossing
/// solvers and `eps` for everything else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BenchProtocol {
    MonCrossing,
    Crossing,
    CrossingRand,
    Equitable2,
    Perfect2,
    Perfect2Rand,
    Ef3,
    Proportional(usize),
    PerfectRandNoncomm,
    Austin,
    Rw(String),
}

impl FromStr for BenchProtocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mon-crossing" => BenchProtocol::MonCrossing,
            "crossing" => BenchProtocol::Crossing,
            "crossing-rand" => BenchProtocol::CrossingRand,
            "equitable2" => BenchProtocol::Equitable2,
            "perfect2" => BenchProtocol::Perfect2,
            "perfect2-rand" => BenchProtocol::Perfect2Rand,
            "ef3" => BenchProtocol::Ef3,
            "proportional" => BenchProtocol::Proportional(2),
            "perfect-rand-noncomm" => BenchProtocol::PerfectRandNoncomm,
            "austin" => BenchProtocol::Austin,
            _ => {
                if let Some(n) = s.strip_prefix("proportional:") {
                    let n = n
                        .parse::<usize>()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad party count in {s:?}")))?;
                    BenchProtocol::Proportional(n)
                } else if let Some(p) = s.strip_prefix("rw:") {
                    program_by_name(p)?;
                    BenchProtocol::Rw(p.to_string())
                } else {
                    return Err(Error::Parse(format!("unknown protocol {s:?}")));
                }
            }
        })
    }
}

impl std::fmt::Display for BenchProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchProtocol::MonCrossing => f.write_str("mon-crossing"),
            BenchProtocol::Crossing => f.write_str("crossing"),
            BenchProtocol::CrossingRand => f.write_str("crossing-rand"),
            BenchProtocol::Equitable2 => f.write_str("equitable2"),
            BenchProtocol::Perfect2 => f.write_str("perfect2"),
            BenchProtocol::Perfect2Rand => f.write_str("perfect2-rand"),
            BenchProtocol::Ef3 => f.write_str("ef3"),
            BenchProtocol::Proportional(n) => write!(f, "proportional:{n}"),
            BenchProtocol::PerfectRandNoncomm => f.write_str("perfect-rand-noncomm"),
            BenchProtocol::Austin => f.write_str("austin"),
            BenchProtocol::Rw(p) => write!(f, "rw:{p}"),
        }
    }
}

impl BenchProtocol {
    /// True when the parameter is an instance size rather than an accuracy.
    pub fn takes_size(&self) -> bool {
        matches!(
            self,
            BenchProtocol::MonCrossing | BenchProtocol::Crossing | BenchProtocol::CrossingRand
        )
    }

    /// Number of parties that receive a valuation.
    pub fn parties(&self) -> Result<usize> {
        Ok(match self {
            BenchProtocol::Ef3 => 3,
            BenchProtocol::Proportional(n) => *n,
            BenchProtocol::Rw(p) => program_by_name(p)?.players(),
            _ => 2,
        })
    }
}

/// Result of one seeded run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trial {
    pub cost: CostProfile,
    pub success: bool,
}

/// One line of a benchmark CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub protocol: String,
    #[serde(with = "serde_q")]
    pub parameter: Q,
    pub trials: u64,
    pub rounds_max: u64,
    pub bits_total_max: u64,
    pub bits_per_round_max: u64,
    #[serde(with = "serde_q")]
    pub success_rate: Q,
}

/// CSV header matching [`BenchRow`]'s field order.
pub const BENCH_HEADER: &str =
    "protocol,parameter,trials,rounds_max,bits_total_max,bits_per_round_max,success_rate";

/// Seed of trial `index` under the master `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index)
}

/// Random valuations for one trial. Protocols that need hungry valuations
/// get them.
pub fn trial_valuations(protocol: &BenchProtocol, seed: u64) -> Result<Vec<DensityValuation>> {
    let d = qi(BENCH_DENSITY);
    let hungry = matches!(protocol, BenchProtocol::Ef3);
    Ok((0..protocol.parties()? as u64)
        .map(|i| {
            let s = seed.wrapping_mul(8).wrapping_add(i);
            if hungry {
                random_hungry_valuation(s, BENCH_SEGMENTS, &d)
            } else {
                random_valuation(s, BENCH_SEGMENTS, &d)
            }
        })
        .collect())
}

fn size_param(p: &Q) -> Result<u64> {
    if !p.is_integer() || *p < Q::one() {
        return Err(Error::Precondition(format!(
            "crossing size must be a positive integer, got {p}"
        )));
    }
    p.to_integer()
        .to_u64()
        .ok_or_else(|| Error::Precondition("crossing size too large".into()))
}

/// Runs one trial of `protocol` at `param` with inputs drawn from `seed`.
pub fn run_trial(protocol: &BenchProtocol, param: &Q, seed: u64) -> Result<Trial> {
    let mut coins = PublicCoins::new(seed ^ 0x5EED);
    if protocol.takes_size() {
        let m = size_param(param)?;
        let mut tr = Transcript::new();
        let success = match protocol {
            BenchProtocol::MonCrossing => {
                let inst = random_mon_crossing(seed, m, m);
                inst.is_valid_answer(solve_mon_crossing(&inst, &mut tr)?.index)
            }
            BenchProtocol::Crossing => {
                let inst = random_crossing(seed, m);
                inst.is_valid_answer(solve_crossing_det(&inst, &mut tr)?.index)
            }
            _ => {
                let inst = random_crossing(seed, m);
                inst.is_valid_answer(solve_crossing_rand(&inst, &mut tr, &mut coins)?.index)
            }
        };
        return Ok(Trial {
            cost: tr.finished().cost()?,
            success,
        });
    }
    let vals = trial_valuations(protocol, seed)?;
    let (out, notion) = run_protocol(protocol, &vals, param, &mut coins)?;
    let report = check_fair(&out.allocation, &vals, &FairnessNotion::new(notion, param.clone())?)?;
    Ok(Trial {
        cost: out.cost(),
        success: report.pass,
    })
}

/// Runs a division protocol and names the fairness notion it promises.
/// Crossing solvers are rejected here; they take instances, not valuations.
pub fn run_protocol(
    protocol: &BenchProtocol,
    vals: &[DensityValuation],
    eps: &Q,
    coins: &mut PublicCoins,
) -> Result<(Outcome, Notion)> {
    let want = match protocol {
        BenchProtocol::Proportional(_) => vals.len().max(1),
        _ => protocol.parties()?,
    };
    if protocol.takes_size() {
        return Err(Error::Precondition(format!("{protocol} takes an instance")));
    }
    if vals.len() != want {
        return Err(Error::Precondition(format!(
            "{protocol} needs {want} valuations, got {}",
            vals.len()
        )));
    }
    Ok(match protocol {
        BenchProtocol::Equitable2 => (equitable_two(&vals[0], &vals[1], eps)?, Notion::Equitable),
        BenchProtocol::Perfect2 | BenchProtocol::Perfect2Rand => {
            let mode = if *protocol == BenchProtocol::Perfect2 {
                CrossingMode::Deterministic
            } else {
                CrossingMode::Randomized
            };
            (perfect_two(&vals[0], &vals[1], eps, mode, coins)?, Notion::Perfect)
        }
        BenchProtocol::Ef3 => (
            envy_free_three(&vals[0], &vals[1], &vals[2], eps)?,
            Notion::EnvyFree,
        ),
        BenchProtocol::Proportional(_) => {
            (proportional_simultaneous(vals, eps)?, Notion::Proportional)
        }
        BenchProtocol::PerfectRandNoncomm => {
            (perfect_random_noncomm(vals, eps, coins)?, Notion::Perfect)
        }
        BenchProtocol::Austin => (austin(&vals[0], &vals[1], eps, coins)?.0, Notion::Perfect),
        BenchProtocol::Rw(p) => {
            let program = program_by_name(p)?;
            (run_rw_simulated(program.as_ref(), vals, eps)?, Notion::Proportional)
        }
        BenchProtocol::MonCrossing | BenchProtocol::Crossing | BenchProtocol::CrossingRand => {
            unreachable!("rejected above")
        }
    })
}

/// Runs `trials` seeded trials at one parameter value.
pub fn bench_row(protocol: &BenchProtocol, param: &Q, trials: u64, seed: u64) -> Result<BenchRow> {
    let mut row = BenchRow {
        protocol: protocol.to_string(),
        parameter: param.clone(),
        trials,
        rounds_max: 0,
        bits_total_max: 0,
        bits_per_round_max: 0,
        success_rate: Q::zero(),
    };
    let mut successes = 0u64;
    for i in 0..trials {
        let t = run_trial(protocol, param, trial_seed(seed, i))?;
        row.rounds_max = row.rounds_max.max(t.cost.rounds as u64);
        row.bits_total_max = row.bits_total_max.max(t.cost.total_bits as u64);
        row.bits_per_round_max = row.bits_per_round_max.max(t.cost.t as u64);
        successes += t.success as u64;
    }
    if trials > 0 {
        row.success_rate = qu(successes) / qu(trials);
    }
    Ok(row)
}

/// One row per parameter; with zero trials the result is empty.
pub fn bench(protocol: &BenchProtocol, params: &[Q], trials: u64, seed: u64) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    params
        .iter()
        .map(|p| bench_row(protocol, p, trials, seed))
        .collect()
}

fn parse_term(s: &str) -> Result<Q> {
    let s = s.trim();
    match s.strip_prefix("2^") {
        Some(e) => {
            let e: i32 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            if e.unsigned_abs() > 62 {
                return Err(Error::Parse(format!("exponent out of range in {s:?}")));
            }
            let p = qu(1u64 << e.unsigned_abs());
            Ok(if e < 0 { p.recip() } else { p })
        }
        None => parse_q(s),
    }
}

/// Parses a geometric range `START..END[:FACTOR]`, endpoints inclusive.
/// Endpoints are rationals or powers of two written `2^k` / `2^-k`; the
/// integer factor (default 2) is applied upward or downward toward `END`.
/// A single term is a one-element range.
pub fn parse_param_range(s: &str) -> Result<Vec<Q>> {
    let (range, factor) = match s.split_once(':') {
        Some((r, f)) => {
            let f: u64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad factor in {s:?}")))?;
            if f < 2 {
                return Err(Error::Parse("factor must be at least 2".into()));
            }
            (r, f)
        }
        None => (s, 2),
    };
    let Some((a, b)) = range.split_once("..") else {
        return Ok(vec![parse_term(range)?]);
    };
    let (start, end) = (parse_term(a)?, parse_term(b)?);
    if start <= Q::zero() || end <= Q::zero() {
        return Err(Error::Parse("range endpoints must be positive".into()));
    }
    let step = if end >= start { qu(factor) } else { qu(factor).recip() };
    let mut out = Vec::new();
    let mut x = start.clone();
    while (end >= start && x <= end) || (end < start && x >= end) {
        out.push(x.clone());
        x = &x * &step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn ranges() {
        assert_eq!(parse_param_range("2^4..2^6").unwrap(), vec![qi(16), qi(32), qi(64)]);
        assert_eq!(
            parse_param_range("2^-2..1/16").unwrap(),
            vec![q(1, 4), q(1, 8), q(1, 16)]
        );
        assert_eq!(parse_param_range("1..100:10").unwrap(), vec![qi(1), qi(10), qi(100)]);
        assert_eq!(parse_param_range("1/3").unwrap(), vec![q(1, 3)]);
        assert!(parse_param_range("0..4").is_err());
        assert!(parse_param_range("1..4:1").is_err());
    }

    #[test]
    fn protocol_names_round_trip() {
        for name in [
            "mon-crossing",
            "crossing",
            "crossing-rand",
            "equitable2",
            "perfect2",
            "perfect2-rand",
            "ef3",
            "proportional:3",
            "perfect-rand-noncomm",
            "austin",
            "rw:cut-and-choose",
            "rw:even-paz:4",
        ] {
            assert_eq!(name.parse::<BenchProtocol>().unwrap().to_string(), name);
        }
        assert!("rw:greedy".parse::<BenchProtocol>().is_err());
        assert!("nope".parse::<BenchProtocol>().is_err());
    }

    #[test]
    fn zero_trials_give_no_rows() {
        let p = BenchProtocol::MonCrossing;
        assert!(bench(&p, &[qi(16)], 0, 1).unwrap().is_empty());
    }

    #[test]
    fn rows_are_deterministic() {
        let p = BenchProtocol::Equitable2;
        let a = bench(&p, &[q(1, 64)], 5, 9).unwrap();
        assert_eq!(a, bench(&p, &[q(1, 64)], 5, 9).unwrap());
        assert_eq!(a[0].success_rate, qi(1));
        assert_eq!(a[0].trials, 5);
    }

    #[test]
    fn size_protocols_reject_fractions() {
        assert!(run_trial(&BenchProtocol::Crossing, &q(1, 2), 0).is_err());
    }
}
