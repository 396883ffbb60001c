//! Robertson-Webb queries answered by an m-simple valuation, with a
//! fixed-width message encoding of the exact answer.
//!
//! Every field is `width_for(m)` bits. A grid-aligned answer costs one tag bit
//! plus one or two fields; an answer inside cell `k` costs the tag plus `k`
//! and the two surrounding prefix values, from which the receiver (who knows
//! the public query) recomputes the exact interpolated answer.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{GridValuation, Valuation};
use crate::comm::Bits;
use crate::error::{Error, Result};
use crate::rational::{floor_u64, qu, width_for, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Query {
    /// Leftmost `y` with `v([0, y]) = alpha`.
    Cut {
        #[serde(with = "crate::rational::serde_q")]
        alpha: Q,
    },
    /// `v([0, y])`.
    Eval {
        #[serde(with = "crate::rational::serde_q")]
        y: Q,
    },
}

impl Query {
    fn check(&self) -> Result<&Q> {
        let x = match self {
            Query::Cut { alpha } => alpha,
            Query::Eval { y } => y,
        };
        if x.is_negative() || *x > Q::one() {
            return Err(Error::Precondition("query argument outside [0,1]".into()));
        }
        Ok(x)
    }
}

/// The exact answer, computed directly.
pub fn answer_query<G: GridValuation + Valuation + ?Sized>(v: &G, query: &Query) -> Result<Q> {
    query.check()?;
    match query {
        Query::Cut { alpha } => v.cut(&Q::zero(), alpha),
        Query::Eval { y } => Ok(v.prefix(y)),
    }
}

pub fn encode_query_answer<G: GridValuation + ?Sized>(v: &G, query: &Query) -> Result<Bits> {
    let x = query.check()?;
    let m = v.grid();
    let b = width_for(m);
    let mut out = Bits::new();
    match query {
        Query::Eval { .. } => {
            let my = x * qu(m);
            let k = floor_u64(&my);
            if my.is_integer() {
                out.push(false);
                out.push_uint(k, b);
                out.push_uint(v.prefix_units(k), b);
            } else {
                out.push(true);
                out.push_uint(k, b);
                out.push_uint(v.prefix_units(k), b);
                out.push_uint(v.prefix_units(k + 1), b);
            }
        }
        Query::Cut { .. } => {
            let t = x * qu(m);
            // First grid point whose prefix reaches t.
            let k = v.first_reaching(crate::rational::ceil_u64(&t), 1);
            if qu(v.prefix_units(k)) == t {
                out.push(false);
                out.push_uint(k, b);
            } else {
                let c = k - 1;
                out.push(true);
                out.push_uint(c, b);
                out.push_uint(v.prefix_units(c), b);
                out.push_uint(v.prefix_units(k), b);
            }
        }
    }
    Ok(out)
}

/// Recovers the exact answer from a message, given the public query and `m`.
pub fn decode_query_answer(query: &Query, m: u64, bits: &Bits) -> Result<Q> {
    let x = query.check()?;
    let b = width_for(m);
    let mq = qu(m);
    let mut r = bits.reader();
    let inside = r.read_bit()?;
    let k = r.read_uint(b)?;
    if k > m {
        return Err(Error::Decode(format!("grid index {k} exceeds {m}")));
    }
    let ans = match (query, inside) {
        (Query::Eval { .. }, false) => qu(r.read_uint(b)?) / &mq,
        (Query::Eval { .. }, true) => {
            let (p0, p1) = (r.read_uint(b)?, r.read_uint(b)?);
            let frac = x * &mq - qu(k);
            (qu(p0) + frac * (qu(p1) - qu(p0))) / &mq
        }
        (Query::Cut { .. }, false) => qu(k) / &mq,
        (Query::Cut { .. }, true) => {
            let (p0, p1) = (r.read_uint(b)?, r.read_uint(b)?);
            if p1 <= p0 {
                return Err(Error::Decode("empty cell for an interior cut".into()));
            }
            (qu(k) + (x * &mq - qu(p0)) / qu(p1 - p0)) / &mq
        }
    };
    r.finish()?;
    Ok(ans)
}
