//! Two-party crossing search.
//!
//! Alice holds `x_0..x_m`, Bob holds `y_0..y_m`, with `x_0 ≤ y_0` and
//! `x_m ≥ y_m`. They must agree on an index `i ∈ 1..=m` where the order of the
//! sequences flips between `i−1` and `i`. The monotone variant additionally
//! has `x` increasing from 0 to `k` and `y` decreasing from `k` to 0.
//!
//! Solvers read the parties' sequences through closures so that protocols
//! can feed lazily computed sequences over large grids. Every joint decision
//! is taken from decoded transcript messages, never from the closures
//! directly.

mod general;
mod lift;
mod mon;

pub use general::{compare_randomized, crossing_det, crossing_rand, solve_crossing_det, solve_crossing_rand};
pub use lift::{lift_pk, LiftedInstance};
pub use mon::{mon_crossing, solve_mon_crossing};

use serde::{Deserialize, Serialize};

use crate::comm::{Bits, Message, Transcript};
use crate::error::{Error, Result};

/// Which of the two flip patterns holds at the answer index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `x_{i−1} ≤ y_{i−1}` and `x_i ≥ y_i`.
    BelowThenAbove,
    /// `x_{i−1} ≥ y_{i−1}` and `x_i ≤ y_i`.
    AboveThenBelow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingAnswer {
    pub index: u64,
    pub orientation: Orientation,
}

impl CrossingAnswer {
    pub(crate) fn below_then_above(index: u64) -> Self {
        CrossingAnswer {
            index,
            orientation: Orientation::BelowThenAbove,
        }
    }
}

/// General crossing instance. Entries lie in `0..=k`; `k` defaults to `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingInstance {
    pub m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

impl CrossingInstance {
    pub fn new(m: u64, x: Vec<u64>, y: Vec<u64>) -> Result<Self> {
        let inst = CrossingInstance { m, k: None, x, y };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_bound(m: u64, k: u64, x: Vec<u64>, y: Vec<u64>) -> Result<Self> {
        let inst = CrossingInstance { m, k: Some(k), x, y };
        inst.validate()?;
        Ok(inst)
    }

    pub fn bound(&self) -> u64 {
        self.k.unwrap_or(self.m)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, k) = (self.m, self.bound());
        check_shape(m, &self.x, &self.y)?;
        if self.x.iter().chain(&self.y).any(|&v| v > k) {
            return Err(Error::MalformedInstance(format!("entry above bound {k}")));
        }
        if self.x[0] > self.y[0] || self.x[m as usize] < self.y[m as usize] {
            return Err(Error::MalformedInstance(
                "need x_0 <= y_0 and x_m >= y_m".into(),
            ));
        }
        Ok(())
    }

    /// True when `i` satisfies either flip pattern.
    pub fn is_valid_answer(&self, i: u64) -> bool {
        valid_index(&self.x, &self.y, i)
    }
}

/// Monotone crossing instance: `x` rises from 0 to `k`, `y` falls from `k` to 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMon")]
pub struct MonCrossingInstance {
    pub m: u64,
    pub k: u64,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

#[derive(Deserialize)]
struct RawMon {
    m: u64,
    k: u64,
    x: Vec<u64>,
    y: Vec<u64>,
}

impl TryFrom<RawMon> for MonCrossingInstance {
    type Error = Error;
    fn try_from(r: RawMon) -> Result<Self> {
        MonCrossingInstance::new(r.m, r.k, r.x, r.y)
    }
}

impl MonCrossingInstance {
    pub fn new(m: u64, k: u64, x: Vec<u64>, y: Vec<u64>) -> Result<Self> {
        check_shape(m, &x, &y)?;
        if k == 0 {
            return Err(Error::MalformedInstance("k must be positive".into()));
        }
        let mu = m as usize;
        if x[0] != 0 || x[mu] != k || y[0] != k || y[mu] != 0 {
            return Err(Error::MalformedInstance(
                "need x_0 = 0, x_m = k, y_0 = k, y_m = 0".into(),
            ));
        }
        if x.windows(2).any(|w| w[0] > w[1]) || y.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::MalformedInstance(
                "x must be weakly increasing and y weakly decreasing".into(),
            ));
        }
        Ok(MonCrossingInstance { m, k, x, y })
    }

    pub fn is_valid_answer(&self, i: u64) -> bool {
        valid_index(&self.x, &self.y, i)
    }
}

fn check_shape(m: u64, x: &[u64], y: &[u64]) -> Result<()> {
    if m == 0 {
        return Err(Error::MalformedInstance("m must be positive".into()));
    }
    let want = m as usize + 1;
    if x.len() != want || y.len() != want {
        return Err(Error::MalformedInstance(format!(
            "sequences need {want} entries, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

pub(crate) fn valid_index(x: &[u64], y: &[u64], i: u64) -> bool {
    let i = i as usize;
    if i == 0 || i >= x.len() {
        return false;
    }
    (x[i - 1] <= y[i - 1] && x[i] >= y[i]) || (x[i - 1] >= y[i - 1] && x[i] <= y[i])
}

/// Runs one round in which both parties send, and returns the decoded
/// payloads in `(alice, bob)` order.
pub(crate) fn exchange(
    tr: &mut Transcript,
    (alice, bob): (usize, usize),
    a: Bits,
    b: Bits,
) -> Result<(Bits, Bits)> {
    tr.round_exchange(vec![Message::new(alice, a), Message::new(bob, b)])?;
    let round = tr.rounds().last().expect("round just appended");
    let find = |p: usize| {
        round
            .iter()
            .find(|msg| msg.sender.0 == p)
            .map(|msg| msg.bits.clone())
            .expect("sender present")
    };
    Ok((find(alice), find(bob)))
}

/// Encodes a party's sequence entry, rejecting values above the public bound.
pub(crate) fn encode_entry(value: u64, bound: u64, width: u32) -> Result<Bits> {
    if value > bound {
        return Err(Error::MalformedInstance(format!(
            "entry {value} exceeds bound {bound}"
        )));
    }
    let mut b = Bits::new();
    b.push_uint(value, width);
    Ok(b)
}

pub(crate) fn decode_entry(bits: &Bits, width: u32) -> Result<u64> {
    let mut r = bits.reader();
    let v = r.read_uint(width)?;
    r.finish()?;
    Ok(v)
}
