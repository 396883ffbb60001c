//! Fairness protocols on top of the crossing solvers and the RW simulator.
//!
//! Every protocol runs each party on an m-simple rounding of its own
//! valuation and records every message in a [`Transcript`]. The transcript
//! covers the interactive phase only; the final allocation is a public
//! function of it and is not charged.

mod ef3;
mod equitable;
mod fallback;
mod noncomm;
mod perfect;
mod proportional;
pub mod rw;

pub use ef3::{ef3_grid, envy_free_three};
pub use equitable::{equitable_grid, equitable_two};
pub use fallback::{fallback_grid, full_disclosure, FALLBACK_GRID_LIMIT};
pub use noncomm::{noncomm_cells, perfect_random_noncomm};
pub use perfect::{perfect_grid, perfect_two, perturb_median, CrossingMode};
pub use proportional::{proportional_grid, proportional_simultaneous};
pub use rw::{program_by_name, run_rw_simulated, rw_grid, CutAndChoose, EvenPaz, RwOracle, RwProgram};

pub use crate::allocation::Allocation;

use num_traits::{One, Signed};

use crate::comm::{Bits, CostProfile, Transcript};
use crate::error::{Error, Result};
use crate::rational::{ceil_u64, next_pow2, width_for, Q};
use crate::valuation::DensityValuation;

/// A finished protocol run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub allocation: Allocation,
    pub transcript: Transcript,
}

impl Outcome {
    pub(crate) fn new(allocation: Allocation, mut transcript: Transcript) -> Self {
        transcript.finish();
        Outcome {
            allocation,
            transcript,
        }
    }

    pub fn cost(&self) -> CostProfile {
        self.transcript.cost().expect("outcome transcripts are finished")
    }
}

pub(crate) fn check_eps(eps: &Q) -> Result<()> {
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(Error::Precondition("eps must lie in (0,1)".into()));
    }
    Ok(())
}

/// Largest declared density bound among the parties.
pub(crate) fn max_bound(vals: &[&DensityValuation]) -> Q {
    vals.iter()
        .map(|v| v.density_bound().clone())
        .max()
        .expect("at least one valuation")
}

/// `⌈x⌉` rounded up to a power of two.
pub(crate) fn pow2_grid(x: &Q) -> u64 {
    next_pow2(ceil_u64(x))
}

/// Fixed-width encoding of grid integers in `0..=m`.
pub(crate) fn encode_ints(values: &[u64], m: u64) -> Bits {
    let w = width_for(m);
    let mut b = Bits::new();
    for &v in values {
        b.push_uint(v, w);
    }
    b
}

pub(crate) fn decode_ints(bits: &Bits, count: usize, m: u64) -> Result<Vec<u64>> {
    let w = width_for(m);
    let mut r = bits.reader();
    let out = (0..count).map(|_| r.read_uint(w)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    if let Some(v) = out.iter().find(|&&v| v > m) {
        return Err(Error::Decode(format!("grid value {v} exceeds {m}")));
    }
    Ok(out)
}

/// Payload sent by `party` in the most recent round.
pub(crate) fn last_from(tr: &Transcript, party: usize) -> Result<&Bits> {
    tr.rounds()
        .last()
        .and_then(|r| r.iter().find(|m| m.sender.0 == party))
        .map(|m| &m.bits)
        .ok_or_else(|| Error::ProtocolStructure(format!("party {party} did not speak")))
}
