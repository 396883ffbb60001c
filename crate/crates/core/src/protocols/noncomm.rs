//! Perfect division without communication.
//!
//! The cake is split into `N` equal cells and every cell goes to a party
//! drawn from the public coins. For `N ≥ D²n²/eps²` each party's share of
//! every piece concentrates around `1/n`. Nobody speaks, so the transcript
//! is empty; the price is `N − 1` cuts.

use super::{check_eps, max_bound, Outcome};
use crate::allocation::Allocation;
use crate::comm::{PublicCoins, Transcript};
use crate::error::{Error, Result};
use crate::rational::{ceil_u64, qu, Q};
use crate::valuation::DensityValuation;

/// Number of cells `⌈D²n²/eps²⌉`.
pub fn noncomm_cells(d: &Q, n: usize, eps: &Q) -> u64 {
    let nq = qu(n as u64);
    ceil_u64(&(d * d * &nq * &nq / (eps * eps))).max(1)
}

pub fn perfect_random_noncomm(
    vals: &[DensityValuation],
    eps: &Q,
    coins: &mut PublicCoins,
) -> Result<Outcome> {
    check_eps(eps)?;
    let n = vals.len();
    if n == 0 {
        return Err(Error::Precondition("no valuations".into()));
    }
    if n == 1 {
        return Ok(Outcome::new(Allocation::whole(0), Transcript::new()));
    }
    let refs: Vec<&DensityValuation> = vals.iter().collect();
    let cells = noncomm_cells(&max_bound(&refs), n, eps);
    let mut cuts = Vec::new();
    let mut owners = vec![coins.draw_below(n as u64) as usize];
    for c in 1..cells {
        let p = coins.draw_below(n as u64) as usize;
        if p != *owners.last().expect("nonempty") {
            cuts.push(qu(c) / qu(cells));
            owners.push(p);
        }
    }
    Ok(Outcome::new(Allocation::new(cuts, owners)?, Transcript::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_fair, FairnessNotion, Notion};
    use crate::rational::{q, qi};

    #[test]
    fn cell_count() {
        assert_eq!(noncomm_cells(&qi(1), 2, &q(1, 10)), 400);
        assert_eq!(noncomm_cells(&qi(2), 3, &q(1, 2)), 144);
    }

    #[test]
    fn silent_and_usually_perfect() {
        let vals = vec![
            DensityValuation::uniform(),
            DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![q(3, 2), q(1, 2)], qi(2))
                .unwrap(),
        ];
        let eps = q(1, 5);
        let notion = FairnessNotion::new(Notion::Perfect, eps.clone()).unwrap();
        let mut hits = 0;
        for seed in 0..20 {
            let out = perfect_random_noncomm(&vals, &eps, &mut PublicCoins::new(seed)).unwrap();
            assert_eq!(out.cost().rounds, 0);
            assert_eq!(out.cost().total_bits, 0);
            assert!(out.allocation.cut_count() < 400);
            hits += check_fair(&out.allocation, &vals, &notion).unwrap().pass as u32;
        }
        assert!(hits >= 18, "{hits}/20");
    }

    #[test]
    fn single_party_takes_everything() {
        let out = perfect_random_noncomm(
            &[DensityValuation::uniform()],
            &q(1, 2),
            &mut PublicCoins::new(0),
        )
        .unwrap();
        assert_eq!(out.allocation, Allocation::whole(0));
    }
}
