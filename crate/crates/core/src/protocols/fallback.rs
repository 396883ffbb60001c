//! Full disclosure: every party sends its whole `m`-simple valuation in one
//! round, and the best connected grid allocation is found by exhaustive
//! search. The search is exponential in the cut count, so it is limited to
//! at most three parties and coarse grids.

use super::{check_eps, decode_ints, encode_ints, last_from, max_bound, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Message, Transcript};
use crate::error::{Error, Result};
use crate::oracle::Notion;
use crate::rational::{ceil_u64, qi, qu, Q};
use crate::valuation::{simplify, DensityValuation, GridValuation, SimpleValuation};

/// Largest grid the search accepts.
pub const FALLBACK_GRID_LIMIT: u64 = 1 << 10;

/// Grid size `⌈8(D+1)/eps⌉`.
pub fn fallback_grid(d: &Q, eps: &Q) -> u64 {
    ceil_u64(&(qi(8) * (d + qi(1)) / eps)).max(2)
}

/// Score of an allocation, scaled by `n`; larger is fairer. `v[i][j]` is
/// party `i`'s value of party `j`'s piece in grid units.
fn score(notion: Notion, v: &[Vec<i64>], m: i64) -> i64 {
    let n = v.len() as i64;
    let idx = 0..v.len();
    match notion {
        Notion::Proportional => idx.map(|i| n * v[i][i] - m).min(),
        Notion::EnvyFree => idx
            .flat_map(|i| (0..v.len()).map(move |j| (i, j)))
            .map(|(i, j)| n * (v[i][i] - v[i][j]))
            .min(),
        Notion::Equitable => idx
            .flat_map(|i| (0..v.len()).map(move |j| (i, j)))
            .map(|(i, j)| -(n * (v[i][i] - v[j][j])).abs())
            .min(),
        Notion::Perfect => idx
            .flat_map(|i| (0..v.len()).map(move |j| (i, j)))
            .map(|(i, j)| -(n * v[i][j] - m).abs())
            .min(),
    }
    .expect("at least one party")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Every grid allocation with `n − 1` cuts, with the best score found.
fn search(sims: &[SimpleValuation], notion: Notion, m: u64) -> (Vec<u64>, Vec<usize>) {
    let n = sims.len();
    let perms = permutations(n);
    let mut best: Option<(i64, Vec<u64>, Vec<usize>)> = None;
    let mut cuts = vec![0u64; n - 1];
    loop {
        let mut bounds = Vec::with_capacity(n + 1);
        bounds.push(0);
        bounds.extend(&cuts);
        bounds.push(m);
        for perm in &perms {
            // v[i][j]: party i's value of the piece owned by party j.
            let mut v = vec![vec![0i64; n]; n];
            for (piece, &owner) in perm.iter().enumerate() {
                for (i, s) in sims.iter().enumerate() {
                    v[i][owner] = s.units_between(bounds[piece], bounds[piece + 1]) as i64;
                }
            }
            let sc = score(notion, &v, m as i64);
            if best.as_ref().is_none_or(|(b, _, _)| sc > *b) {
                best = Some((sc, cuts.clone(), perm.clone()));
            }
        }
        // Next nondecreasing cut vector.
        let mut pos = cuts.len();
        loop {
            if pos == 0 {
                let (_, c, p) = best.expect("searched at least one allocation");
                return (c, p);
            }
            pos -= 1;
            if cuts[pos] < m {
                cuts[pos] += 1;
                for c in pos + 1..cuts.len() {
                    cuts[c] = cuts[pos];
                }
                break;
            }
        }
    }
}

pub fn full_disclosure(vals: &[DensityValuation], eps: &Q, notion: Notion) -> Result<Outcome> {
    check_eps(eps)?;
    let n = vals.len();
    if !(1..=3).contains(&n) {
        return Err(Error::Precondition("full disclosure handles 1 to 3 parties".into()));
    }
    let refs: Vec<&DensityValuation> = vals.iter().collect();
    let m = fallback_grid(&max_bound(&refs), eps);
    if m > FALLBACK_GRID_LIMIT {
        return Err(Error::Precondition(format!(
            "grid {m} too fine for exhaustive search; use a coarser eps"
        )));
    }
    let mut tr = Transcript::new();
    tr.round_exchange(
        vals.iter()
            .enumerate()
            .map(|(p, v)| Message::new(p, encode_ints(simplify(v, m).cell_weights(), m)))
            .collect(),
    )?;
    let sims = (0..n)
        .map(|p| SimpleValuation::new(m, decode_ints(last_from(&tr, p)?, m as usize, m)?))
        .collect::<Result<Vec<_>>>()?;
    let (cuts, perm) = search(&sims, notion, m);
    let alloc = Allocation::new(cuts.into_iter().map(|c| qu(c) / qu(m)).collect(), perm)?;
    Ok(Outcome::new(alloc, tr))
}
