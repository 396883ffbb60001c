//! Exact ε-fairness checkers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::rational::{qu, serde_q, Q};
use crate::valuation::{DensityValuation, GridKernel, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Proportional,
    EnvyFree,
    Equitable,
    Perfect,
}

impl std::str::FromStr for Notion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(Notion::Proportional),
            "envy-free" | "ef" => Ok(Notion::EnvyFree),
            "equitable" => Ok(Notion::Equitable),
            "perfect" => Ok(Notion::Perfect),
            _ => Err(Error::Parse(format!("unknown fairness notion {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessNotion {
    pub tag: Notion,
    pub eps: Q,
}

impl FairnessNotion {
    pub fn new(tag: Notion, eps: Q) -> Result<Self> {
        if eps.is_negative() {
            return Err(Error::Precondition("eps must be nonnegative".into()));
        }
        Ok(FairnessNotion { tag, eps })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub pass: bool,
    /// Minimum over all defining inequalities of (allowed − observed).
    #[serde(with = "serde_q")]
    pub slack: Q,
    /// The `(i, j)` pair attaining the minimum slack, when the check fails.
    pub witness: Option<(usize, usize)>,
}

/// Largest common denominator handled on the integer grid path.
const KERNEL_GRID_LIMIT: u64 = 1 << 40;

fn common_grid(cuts: &[Q]) -> Option<u64> {
    let mut l = BigInt::one();
    for c in cuts {
        l = l.lcm(c.denom());
        if l > BigInt::from(KERNEL_GRID_LIMIT) {
            return None;
        }
    }
    l.to_u64()
}

/// `values[i][j] = v_i(A_j)`.
pub fn value_matrix(alloc: &Allocation, vals: &[DensityValuation]) -> Result<Vec<Vec<Q>>> {
    alloc.validate()?;
    let n = vals.len();
    if let Some(&p) = alloc.assignment.iter().find(|&&p| p >= n) {
        return Err(Error::Structural(format!(
            "piece assigned to party {p}, but only {n} valuations"
        )));
    }
    let mut out = vec![vec![Q::zero(); n]; n];
    match common_grid(&alloc.cuts) {
        Some(l) if alloc.cuts.len() > 8 => {
            // Signed grid points per owner: +hi, -lo for each interval.
            let lq = qu(l);
            let idx = |c: &Q| (c * &lq).to_integer().to_u64().expect("grid index");
            let mut pts: Vec<Vec<(u64, i64)>> = vec![Vec::new(); n];
            let mut lo = 0u64;
            for (c, &p) in alloc
                .cuts
                .iter()
                .map(idx)
                .chain(std::iter::once(l))
                .zip(&alloc.assignment)
            {
                pts[p].push((c, 1));
                pts[p].push((lo, -1));
                lo = c;
            }
            for (i, v) in vals.iter().enumerate() {
                let kern = GridKernel::new(v, l);
                for (j, pj) in pts.iter().enumerate() {
                    out[i][j] = kern.signed_sum(pj.iter().copied());
                }
            }
        }
        _ => {
            for (lo, hi, p) in alloc.intervals() {
                for (i, v) in vals.iter().enumerate() {
                    out[i][p] += v.prefix(&hi) - v.prefix(&lo);
                }
            }
        }
    }
    Ok(out)
}

/// Evaluates every defining inequality of `notion` exactly.
pub fn check_fair(
    alloc: &Allocation,
    vals: &[DensityValuation],
    notion: &FairnessNotion,
) -> Result<FairnessReport> {
    let n = vals.len();
    if n == 0 {
        return Err(Error::Precondition("no valuations".into()));
    }
    let v = value_matrix(alloc, vals)?;
    let eps = &notion.eps;
    let share = Q::new(BigInt::one(), BigInt::from(n));
    let mut worst: Option<(Q, (usize, usize))> = None;
    let mut consider = |s: Q, w: (usize, usize)| {
        if worst.as_ref().is_none_or(|(b, _)| s < *b) {
            worst = Some((s, w));
        }
    };
    for i in 0..n {
        match notion.tag {
            Notion::Proportional => consider(&v[i][i] - &share + eps, (i, i)),
            Notion::EnvyFree => {
                for j in 0..n {
                    consider(&v[i][i] - &v[i][j] + eps, (i, j));
                }
            }
            Notion::Equitable => {
                for j in 0..n {
                    consider(eps - (&v[i][i] - &v[j][j]).abs(), (i, j));
                }
            }
            Notion::Perfect => {
                for j in 0..n {
                    consider(eps - (&v[i][j] - &share).abs(), (i, j));
                }
            }
        }
    }
    let (slack, w) = worst.expect("at least one inequality");
    let pass = !slack.is_negative();
    Ok(FairnessReport {
        pass,
        slack,
        witness: if pass { None } else { Some(w) },
    })
}
