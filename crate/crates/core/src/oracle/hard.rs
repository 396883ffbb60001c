//! Cake instances that encode crossing instances, and the maps from fair
//! cuts back to crossing indices.
//!
//! Equitable encoding (monotone crossing over `0..=m`, values `0..=m`):
//! Alice's mass on `[0,1/3]` and `[2/3,1]` is `(1−1/m)/2` each, and the
//! middle third is split into `m` cells of width `1/(3m)` where cell `i`
//! carries `(x_i − x_{i−1})/m²`. Bob is built the same way from `m − y_i`.
//! Then `v_A([0,p_i]) − v_B([p_i,1]) = (x_i − y_i)/m²` at the cell
//! boundaries `p_i`, and any cut that is equitable to within `1/m²` lies in
//! a cell whose index is a crossing.
//!
//! Perfect encoding (general crossing over `0..=m`, values `0..=m`): the
//! instance is first padded to `x' = (0, x, m)`, `y' = (m, y, 0)` over
//! `0..=n` with `n = m + 2`. With `H = 2n² + n` and `S_i = x'_i + H + 2ni`,
//! each player has density 1 on `[0,1/4]`, mass `1/4` on `[1/4, S_0/(3H)]`,
//! mass `1/(4n)` on each cell `[S_{i−1}/(3H), S_i/(3H)]` and mass `1/4` on
//! the tail. A left cut `a` in `[(i−1)/(4n), i/(4n)]` forces the right cut of
//! a half-valued middle piece into cell `i` of both players, where the two
//! positions differ by an interpolation of `x'_{i−1} − y'_{i−1}` and
//! `x'_i − y'_i`, scaled by `1/(3H)`. The padding makes both the transition
//! and the tail of the two players differ, which rules out near-perfect
//! allocations with a left cut past `1/4`. Densities lie in `[3/8, 3]`.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::crossing::{CrossingInstance, MonCrossingInstance};
use crate::error::{Error, Result};
use crate::rational::{ceil_int, fmt_q, q, qi, qu, Q};
use crate::valuation::DensityValuation;

fn equitable_side(m: u64, x: &[u64]) -> Result<DensityValuation> {
    let mq = qu(m);
    let outer = (Q::one() - mq.recip()) / qi(2);
    let mut bp = vec![qi(0), q(1, 3)];
    let mut masses = vec![outer.clone()];
    for i in 1..=m {
        bp.push(q(1, 3) + qu(i) / (qi(3) * &mq));
        masses.push(qu(x[i as usize] - x[i as usize - 1]) / (&mq * &mq));
    }
    bp.push(qi(1));
    masses.push(outer);
    DensityValuation::from_masses(bp, &masses, qi(3))
}

/// Valuation pair whose near-equitable cuts solve `inst` (which needs `k = m`).
pub fn gen_equitable_hard(inst: &MonCrossingInstance) -> Result<(DensityValuation, DensityValuation)> {
    if inst.k != inst.m {
        return Err(Error::Precondition("equitable encoding needs k = m".into()));
    }
    let m = inst.m;
    let xb: Vec<u64> = inst.y.iter().map(|&v| m - v).collect();
    Ok((equitable_side(m, &inst.x)?, equitable_side(m, &xb)?))
}

/// Largest accuracy at which [`recover_equitable`] is guaranteed.
pub fn equitable_threshold(m: u64) -> Q {
    q(1, 2) / (qu(m) * qu(m))
}

/// Crossing index of the cell holding the equitable cut `x`.
pub fn recover_equitable(x: &Q, m: u64) -> Result<u64> {
    if *x < q(1, 3) || *x > q(2, 3) {
        return Err(Error::ReductionContract(format!(
            "cut {} outside the encoding third",
            fmt_q(x)
        )));
    }
    let i = ceil_int(&((x - q(1, 3)) * qi(3) * qu(m)));
    Ok(u64::try_from(i).expect("nonnegative").max(1))
}

fn perfect_h(n: u64) -> u64 {
    2 * n * n + n
}

fn perfect_side(n: u64, x: &[u64]) -> Result<DensityValuation> {
    let h = perfect_h(n);
    let z = qu(3 * h);
    let s = |i: u64| qu(x[i as usize] + h + 2 * n * i) / &z;
    let mut bp = vec![qi(0), q(1, 4)];
    let mut masses = vec![q(1, 4), q(1, 4)];
    for i in 0..=n {
        bp.push(s(i));
        if i > 0 {
            masses.push(Q::one() / qu(4 * n));
        }
    }
    bp.push(qi(1));
    masses.push(q(1, 4));
    DensityValuation::from_masses(bp, &masses, qi(3))
}

/// Valuation pair whose near-perfect two-cut allocations solve `inst`.
/// Entries must lie in `0..=m`.
pub fn gen_perfect_hard(inst: &CrossingInstance) -> Result<(DensityValuation, DensityValuation)> {
    inst.validate()?;
    let m = inst.m;
    if inst.bound() != m {
        return Err(Error::Precondition("perfect encoding needs entries in 0..=m".into()));
    }
    let pad = |first: u64, v: &[u64], last: u64| {
        let mut out = Vec::with_capacity(v.len() + 2);
        out.push(first);
        out.extend_from_slice(v);
        out.push(last);
        out
    };
    let n = m + 2;
    Ok((
        perfect_side(n, &pad(0, &inst.x, m))?,
        perfect_side(n, &pad(m, &inst.y, 0))?,
    ))
}

/// Accuracy used for the perfect round trip: `1/(16·H·n)` with `n = m + 2`.
pub fn perfect_threshold(m: u64) -> Q {
    let n = m + 2;
    Q::one() / qu(16 * perfect_h(n) * n)
}

/// Crossing index from the left cut `a` of a near-perfect allocation.
pub fn recover_perfect(a: &Q, m: u64) -> Result<u64> {
    if a.is_negative() || *a > q(1, 4) {
        return Err(Error::ReductionContract(format!(
            "left cut {} outside the encoding quarter",
            fmt_q(a)
        )));
    }
    let n = m + 2;
    let j = u64::try_from(ceil_int(&(a * qu(4 * n)))).expect("nonnegative");
    // Padded index j corresponds to original index j − 1; the two padding
    // cells can only host a crossing when the adjacent end index is valid.
    Ok(j.saturating_sub(1).clamp(1, m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    Equitable,
    Perfect,
}

/// Maps a protocol's allocation on a generated instance back to a crossing index.
pub fn recover_crossing_index(alloc: &Allocation, m: u64, reduction: Reduction) -> Result<u64> {
    let first = alloc
        .cuts
        .first()
        .ok_or_else(|| Error::ReductionContract("allocation has no cut".into()))?;
    match reduction {
        Reduction::Equitable => recover_equitable(first, m),
        Reduction::Perfect => recover_perfect(first, m),
    }
}
