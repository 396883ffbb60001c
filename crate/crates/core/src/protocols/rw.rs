//! Running Robertson-Webb query programs as communication protocols.
//!
//! A program only talks to an [`RwOracle`]. The simulator answers each query
//! from the queried party's `m`-simple valuation: the party sends the answer
//! through [`encode_query_answer`] in a round of its own, and the program
//! receives the value decoded from the transcript. The program is
//! deterministic, so everyone can replay which query comes next and queries
//! themselves are never sent.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::{check_eps, max_bound, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Message, Transcript};
use crate::error::{Error, Result};
use crate::rational::{ceil_u64, fmt_q, q, qi, qu, Q};
use crate::valuation::{
    decode_query_answer, encode_query_answer, simplify_lazy, DensityValuation, LazySimple, Query,
};

/// Query access for a running program. Answers are exact rationals.
pub trait RwOracle {
    /// Leftmost `y` with `v_player([0, y]) = alpha`.
    fn cut(&mut self, player: usize, alpha: &Q) -> Result<Q>;
    /// `v_player([0, y])`.
    fn eval(&mut self, player: usize, y: &Q) -> Result<Q>;
}

/// A deterministic query program with declared bounds.
pub trait RwProgram {
    fn name(&self) -> &str;
    fn players(&self) -> usize;
    /// Exact number of queries `r` the program issues.
    fn query_bound(&self) -> usize;
    /// Largest number of cuts `C` in the output allocation.
    fn cut_bound(&self) -> usize;
    fn run(&self, oracle: &mut dyn RwOracle) -> Result<Allocation>;
}

/// Grid size `⌈4(C+1)(D+1)/eps⌉`.
pub fn rw_grid(cut_bound: usize, d: &Q, eps: &Q) -> u64 {
    ceil_u64(&(qi(4) * qu(cut_bound as u64 + 1) * (d + qi(1)) / eps)).max(2)
}

struct Simulator {
    sims: Vec<LazySimple>,
    m: u64,
    transcript: Transcript,
    bound: usize,
    used: usize,
    /// Points demarcated by queries: cut answers and eval arguments.
    points: BTreeSet<Q>,
}

impl Simulator {
    fn ask(&mut self, player: usize, query: Query) -> Result<Q> {
        if player >= self.sims.len() {
            return Err(Error::ProtocolContract(format!("no player {player}")));
        }
        self.used += 1;
        if self.used > self.bound {
            return Err(Error::QueryBound { bound: self.bound });
        }
        let bits = encode_query_answer(&self.sims[player], &query)?;
        self.transcript.round_exchange(vec![Message::new(player, bits)])?;
        let sent = &self.transcript.rounds().last().expect("round just appended")[0].bits;
        decode_query_answer(&query, self.m, sent)
    }
}

impl RwOracle for Simulator {
    fn cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        let y = self.ask(player, Query::Cut { alpha: alpha.clone() })?;
        self.points.insert(y.clone());
        Ok(y)
    }

    fn eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        let v = self.ask(player, Query::Eval { y: y.clone() })?;
        self.points.insert(y.clone());
        Ok(v)
    }
}

pub fn run_rw_simulated(
    program: &dyn RwProgram,
    vals: &[DensityValuation],
    eps: &Q,
) -> Result<Outcome> {
    check_eps(eps)?;
    if vals.len() != program.players() {
        return Err(Error::Precondition(format!(
            "{} needs {} players, got {}",
            program.name(),
            program.players(),
            vals.len()
        )));
    }
    let refs: Vec<&DensityValuation> = vals.iter().collect();
    let m = rw_grid(program.cut_bound(), &max_bound(&refs), eps);
    let mut sim = Simulator {
        sims: vals.iter().map(|v| simplify_lazy(v, m)).collect(),
        m,
        transcript: Transcript::new(),
        bound: program.query_bound(),
        used: 0,
        points: BTreeSet::from([Q::zero(), Q::one()]),
    };
    let alloc = program.run(&mut sim)?;
    alloc.validate()?;
    if alloc.cut_count() > program.cut_bound() {
        return Err(Error::ProtocolContract(format!(
            "{} cuts exceed the declared {}",
            alloc.cut_count(),
            program.cut_bound()
        )));
    }
    if let Some(c) = alloc.cuts.iter().find(|c| !sim.points.contains(c)) {
        return Err(Error::ProtocolContract(format!(
            "cut {} was not produced by a query",
            fmt_q(c)
        )));
    }
    Ok(Outcome::new(alloc, sim.transcript))
}

/// Alice cuts the cake into two halves of equal value to her, Bob evaluates
/// the left half and picks.
#[derive(Clone, Copy, Debug, Default)]
pub struct CutAndChoose;

impl RwProgram for CutAndChoose {
    fn name(&self) -> &str {
        "cut-and-choose"
    }

    fn players(&self) -> usize {
        2
    }

    fn query_bound(&self) -> usize {
        2
    }

    fn cut_bound(&self) -> usize {
        1
    }

    fn run(&self, oracle: &mut dyn RwOracle) -> Result<Allocation> {
        let y = oracle.cut(0, &q(1, 2))?;
        // With exact real answers an irrational `y` would have Alice keep the
        // whole cake. Answers here are always rational, so the split is kept.
        let left = oracle.eval(1, &y)?;
        let assignment = if left >= q(1, 2) { vec![1, 0] } else { vec![0, 1] };
        Allocation::new(vec![y], assignment)
    }
}

/// Recursive halving: every player in a group marks the point splitting the
/// group's interval in proportion `⌊k/2⌋ : ⌈k/2⌉`, and the group splits at
/// the `⌊k/2⌋`-th smallest mark.
#[derive(Clone, Copy, Debug)]
pub struct EvenPaz {
    pub n: usize,
}

impl EvenPaz {
    fn queries(k: usize) -> usize {
        if k <= 1 {
            0
        } else {
            3 * k + Self::queries(k / 2) + Self::queries(k - k / 2)
        }
    }

    fn split(
        oracle: &mut dyn RwOracle,
        group: &[usize],
        a: Q,
        b: Q,
        out: &mut Vec<(Q, usize)>,
    ) -> Result<()> {
        if let [p] = group {
            out.push((b, *p));
            return Ok(());
        }
        let k = group.len();
        let h = k / 2;
        let mut marks = Vec::with_capacity(k);
        for &p in group {
            let lo = oracle.eval(p, &a)?;
            let hi = oracle.eval(p, &b)?;
            let target = &lo + (&hi - &lo) * qu(h as u64) / qu(k as u64);
            marks.push((oracle.cut(p, &target)?, p));
        }
        marks.sort();
        let mid = marks[h - 1].0.clone();
        let left: Vec<usize> = marks[..h].iter().map(|(_, p)| *p).collect();
        let right: Vec<usize> = marks[h..].iter().map(|(_, p)| *p).collect();
        Self::split(oracle, &left, a, mid.clone(), out)?;
        Self::split(oracle, &right, mid, b, out)
    }
}

impl RwProgram for EvenPaz {
    fn name(&self) -> &str {
        "even-paz"
    }

    fn players(&self) -> usize {
        self.n
    }

    fn query_bound(&self) -> usize {
        Self::queries(self.n)
    }

    fn cut_bound(&self) -> usize {
        self.n.saturating_sub(1)
    }

    fn run(&self, oracle: &mut dyn RwOracle) -> Result<Allocation> {
        if self.n == 0 {
            return Err(Error::Precondition("no players".into()));
        }
        let group: Vec<usize> = (0..self.n).collect();
        let mut pieces = Vec::with_capacity(self.n);
        Self::split(oracle, &group, Q::zero(), Q::one(), &mut pieces)?;
        let owners = pieces.iter().map(|(_, p)| *p).collect();
        let cuts = pieces[..pieces.len() - 1].iter().map(|(c, _)| c.clone()).collect();
        Allocation::new(cuts, owners)
    }
}

/// Looks up a reference program by name: `cut-and-choose` or `even-paz:<n>`.
pub fn program_by_name(name: &str) -> Result<Box<dyn RwProgram>> {
    match name {
        "cut-and-choose" => Ok(Box::new(CutAndChoose)),
        _ => {
            let n = name
                .strip_prefix("even-paz:")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Parse(format!("unknown RW program {name:?}")))?;
            Ok(Box::new(EvenPaz { n }))
        }
    }
}
