//! One-round proportional division: every party announces its `1/n`,
//! `2/n`, ... marks and the referee hands out pieces greedily from the left.

use super::{check_eps, decode_ints, encode_ints, last_from, max_bound, pow2_grid, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Message, Transcript};
use crate::error::{Error, Result};
use crate::rational::{qi, qu, Q};
use crate::valuation::{simplify_lazy, DensityValuation, GridValuation};

/// Grid size `⌈max(2n, D + 2)/eps⌉`, rounded up to a power of two.
pub fn proportional_grid(n: usize, d: &Q, eps: &Q) -> u64 {
    let need = qi(2 * n as i64).max(d + qi(2));
    pow2_grid(&(need / eps))
}

pub fn proportional_simultaneous(vals: &[DensityValuation], eps: &Q) -> Result<Outcome> {
    check_eps(eps)?;
    let n = vals.len();
    if n < 2 {
        return Err(Error::Precondition("proportional division needs n >= 2".into()));
    }
    let refs: Vec<&DensityValuation> = vals.iter().collect();
    let m = proportional_grid(n, &max_bound(&refs), eps);
    let nu = n as u64;
    let mut tr = Transcript::new();
    let msgs = vals
        .iter()
        .enumerate()
        .map(|(p, v)| {
            let s = simplify_lazy(v, m);
            let marks: Vec<u64> = (1..nu).map(|j| s.first_reaching(j * m, nu)).collect();
            Message::new(p, encode_ints(&marks, m))
        })
        .collect();
    tr.round_exchange(msgs)?;
    let marks = (0..n)
        .map(|p| decode_ints(last_from(&tr, p)?, n - 1, m))
        .collect::<Result<Vec<_>>>()?;

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut cuts = Vec::with_capacity(n - 1);
    let mut owners = Vec::with_capacity(n);
    let mut prev = 0u64;
    for j in 0..n - 1 {
        // Smallest j-th mark wins; ties go to the lower index.
        let (pos, &winner) = remaining
            .iter()
            .enumerate()
            .min_by_key(|&(_, &p)| (marks[p][j], p))
            .expect("someone remains");
        let c = marks[winner][j].max(prev);
        cuts.push(qu(c) / qu(m));
        owners.push(winner);
        remaining.remove(pos);
        prev = c;
    }
    owners.push(remaining[0]);
    Ok(Outcome::new(Allocation::new(cuts, owners)?, tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_fair, FairnessNotion, Notion};
    use crate::rational::q;
    use num_traits::Signed;

    fn skew() -> DensityValuation {
        DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(2), qi(0)], qi(4)).unwrap()
    }

    #[test]
    fn two_uniform_split_in_half() {
        let vals = vec![DensityValuation::uniform(), DensityValuation::uniform()];
        let out = proportional_simultaneous(&vals, &q(1, 100)).unwrap();
        assert_eq!(out.allocation.cuts, vec![q(1, 2)]);
        assert_eq!(out.cost().rounds, 1);
    }

    #[test]
    fn skewed_bob_takes_the_left_quarter() {
        let vals = vec![DensityValuation::uniform(), skew()];
        let eps = q(1, 100);
        let out = proportional_simultaneous(&vals, &eps).unwrap();
        assert_eq!(out.allocation.assignment, vec![1, 0]);
        assert!((&out.allocation.cuts[0] - q(1, 4)).abs() <= eps);
        let notion = FairnessNotion::new(Notion::Proportional, eps).unwrap();
        assert!(check_fair(&out.allocation, &vals, &notion).unwrap().pass);
    }

    #[test]
    fn three_uniform_thirds() {
        let vals = vec![DensityValuation::uniform(); 3];
        let eps = q(1, 100);
        let out = proportional_simultaneous(&vals, &eps).unwrap();
        let m = proportional_grid(3, &qi(1), &eps);
        assert_eq!(out.allocation.cuts.len(), 2);
        assert!((&out.allocation.cuts[0] - q(1, 3)).abs() <= qu(1) / qu(m));
        assert!((&out.allocation.cuts[1] - q(2, 3)).abs() <= qu(1) / qu(m));
    }
}
