//! Two-party equitable division through monotone crossing.
//!
//! With `x_i = m·v'_A([0,i/m])` and `y_i = m − m·v'_B([0,i/m])`, a crossing
//! cell `i` holds the point where Alice's left value meets Bob's right value.
//! Both simple valuations are linear inside the cell, so one extra round
//! exchanging the cell's four endpoint values pins the cut exactly.

use num_traits::Zero;

use super::{check_eps, decode_ints, encode_ints, last_from, max_bound, pow2_grid, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Message, Transcript};
use crate::crossing::mon_crossing;
use crate::error::Result;
use crate::rational::{qi, qu, Q};
use crate::valuation::{simplify_lazy, DensityValuation, GridValuation};

/// Grid size `⌈(4 + D)/(2·eps)⌉`, rounded up to a power of two.
pub fn equitable_grid(d: &Q, eps: &Q) -> u64 {
    pow2_grid(&((qi(4) + d) / (qi(2) * eps)))
}

/// Alice (party 0) gets `[0, x*]`, Bob (party 1) gets `[x*, 1]`.
pub fn equitable_two(va: &DensityValuation, vb: &DensityValuation, eps: &Q) -> Result<Outcome> {
    check_eps(eps)?;
    let m = equitable_grid(&max_bound(&[va, vb]), eps);
    let (sa, sb) = (simplify_lazy(va, m), simplify_lazy(vb, m));
    let x = |i: u64| sa.prefix_units(i);
    let y = |i: u64| m - sb.prefix_units(i);
    let mut tr = Transcript::new();
    let i = mon_crossing(m, m, &x, &y, (0, 1), &mut tr)?.index;

    tr.round_exchange(vec![
        Message::new(0, encode_ints(&[x(i - 1), x(i)], m)),
        Message::new(1, encode_ints(&[y(i - 1), y(i)], m)),
    ])?;
    let xs = decode_ints(last_from(&tr, 0)?, 2, m)?;
    let ys = decode_ints(last_from(&tr, 1)?, 2, m)?;
    let (x0, x1, y0, y1) = (qu(xs[0]), qu(xs[1]), qu(ys[0]), qu(ys[1]));
    let den = &x1 - &x0 + &y0 - &y1;
    let s = if den.is_zero() {
        Q::zero()
    } else {
        (&y0 - &x0) / den
    };
    let cut = (qu(i - 1) + s) / qu(m);
    Ok(Outcome::new(Allocation::new(vec![cut], vec![0, 1])?, tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_fair, FairnessNotion, Notion};
    use crate::rational::q;
    use num_traits::Signed;

    #[test]
    fn uniform_pair_cuts_at_half() {
        let u = DensityValuation::uniform();
        let out = equitable_two(&u, &u, &q(1, 1000)).unwrap();
        assert_eq!(out.allocation.cuts, vec![q(1, 2)]);
    }

    #[test]
    fn skewed_bob_moves_cut_to_a_third() {
        let u = DensityValuation::uniform();
        let skew =
            DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(2), qi(0)], qi(4)).unwrap();
        let eps = q(1, 1000);
        let out = equitable_two(&u, &skew, &eps).unwrap();
        assert!((&out.allocation.cuts[0] - q(1, 3)).abs() <= eps);
        let notion = FairnessNotion::new(Notion::Equitable, eps).unwrap();
        assert!(check_fair(&out.allocation, &[u, skew], &notion).unwrap().pass);
    }
}
