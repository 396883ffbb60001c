//! Two-party perfect division through general crossing.
//!
//! Each party first nudges its valuation so that its median sits exactly on
//! a grid point `k`. The party with the smaller median, Alice, owns the
//! search range `0..=k_A`. For each left cut `i` both parties name the right
//! cut `b ≥ i` that makes `[i, b]` closest to half; a crossing index of those
//! two sequences gives a middle piece that both value at about one half.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{check_eps, decode_ints, encode_ints, last_from, max_bound, pow2_grid, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Message, PublicCoins, Transcript};
use crate::crossing::{crossing_det, crossing_rand};
use crate::error::{Error, Result};
use crate::rational::{floor_int, q, qi, qu, Q};
use crate::valuation::{simplify_lazy, DensityValuation, GridValuation, Valuation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingMode {
    #[default]
    Deterministic,
    Randomized,
}

/// Grid size `⌈5D/eps⌉`, rounded up to a power of two.
pub fn perfect_grid(d: &Q, eps: &Q) -> u64 {
    pow2_grid(&(qi(5) * d / eps))
}

/// Moves at most `D/(2m)` of mass within one grid cell so that
/// `v([0, k/m]) = 1/2` for `k = round(m · median)`.
pub fn perturb_median(v: &DensityValuation, m: u64) -> Result<DensityValuation> {
    let mq = qu(m);
    let mu = v.median();
    let k = floor_int(&(&mu * &mq + q(1, 2)));
    let k: u64 = k.try_into().map_err(|_| Error::Precondition("grid too large".into()))?;
    let kq = qu(k) / &mq;
    if kq == mu {
        return Ok(v.clone());
    }
    let (zero_lo, zero_hi, cell_lo, delta) = if kq < mu {
        if k == 0 {
            return Err(Error::Precondition("grid too coarse for the median".into()));
        }
        (kq.clone(), mu.clone(), qu(k - 1) / &mq, q(1, 2) - v.prefix(&kq))
    } else {
        if k >= m {
            return Err(Error::Precondition("grid too coarse for the median".into()));
        }
        (mu.clone(), kq.clone(), kq.clone(), v.prefix(&kq) - q(1, 2))
    };
    let cell_hi = &cell_lo + mq.recip();
    let mut bp: Vec<Q> = v.breakpoints().to_vec();
    bp.extend([zero_lo.clone(), zero_hi.clone(), cell_lo.clone(), cell_hi.clone()]);
    bp.sort();
    bp.dedup();
    let masses: Vec<Q> = bp
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if *a >= zero_lo && *b <= zero_hi {
                Q::zero()
            } else if *a >= cell_lo && *b <= cell_hi {
                v.eval(a, b).expect("ordered points") + &delta * (b - a) * &mq
            } else {
                v.eval(a, b).expect("ordered points")
            }
        })
        .collect();
    let bound = v.density_bound() + &delta * &mq;
    DensityValuation::from_masses(bp, &masses, bound)
}

/// Leftmost `b ≥ i` minimizing `|P[b] − P[i] − m/2|`.
fn half_partner<G: GridValuation>(s: &G, i: u64) -> u64 {
    let m = s.grid();
    let target = s.prefix_units(i) + m / 2;
    let b1 = s.first_reaching(target.min(m), 1);
    let p1 = s.prefix_units(b1);
    if p1 == target || b1 == 0 {
        return b1;
    }
    let below = s.prefix_units(b1 - 1);
    if target - below <= p1.saturating_sub(target) {
        s.first_reaching(below, 1).max(i)
    } else {
        b1
    }
}

pub fn perfect_two(
    va: &DensityValuation,
    vb: &DensityValuation,
    eps: &Q,
    mode: CrossingMode,
    coins: &mut PublicCoins,
) -> Result<Outcome> {
    check_eps(eps)?;
    let m = perfect_grid(&max_bound(&[va, vb]), eps);
    let sims = [
        simplify_lazy(&perturb_median(va, m)?, m),
        simplify_lazy(&perturb_median(vb, m)?, m),
    ];
    let mut tr = Transcript::new();
    tr.round_exchange(
        (0..2)
            .map(|p| Message::new(p, encode_ints(&[sims[p].first_reaching(m, 2)], m)))
            .collect(),
    )?;
    let k0 = decode_ints(last_from(&tr, 0)?, 1, m)?[0];
    let k1 = decode_ints(last_from(&tr, 1)?, 1, m)?[0];
    let (alice, bob, ka) = if k0 <= k1 { (0, 1, k0) } else { (1, 0, k1) };
    if ka == 0 {
        return Err(Error::ProtocolContract("median mark at 0".into()));
    }
    let (sa, sb) = (&sims[alice], &sims[bob]);
    let x = |i: u64| if i >= ka { m } else { half_partner(sa, i) };
    let y = |i: u64| half_partner(sb, i);
    let ans = match mode {
        CrossingMode::Deterministic => crossing_det(ka, m, &x, &y, (alice, bob), &mut tr)?,
        CrossingMode::Randomized => crossing_rand(ka, m, &x, &y, (alice, bob), &mut tr, coins)?,
    };
    let i = ans.index;
    tr.round_exchange(vec![
        Message::new(alice, encode_ints(&[x(i)], m)),
        Message::new(bob, encode_ints(&[y(i)], m)),
    ])?;
    let xi = decode_ints(last_from(&tr, alice)?, 1, m)?[0];
    let yi = decode_ints(last_from(&tr, bob)?, 1, m)?[0];
    let z = xi.min(yi).max(i);
    let middle = coins.draw_below(2) as usize;
    let outer = 1 - middle;
    let cuts = vec![qu(i) / qu(m), qu(z) / qu(m)];
    Ok(Outcome::new(
        Allocation::new(cuts, vec![outer, middle, outer])?,
        tr,
    ))
}

/// Largest prefix difference over the union of breakpoints.
#[cfg(test)]
fn max_interval_shift(a: &DensityValuation, b: &DensityValuation) -> Q {
    let mut pts: Vec<Q> = a.breakpoints().iter().chain(b.breakpoints()).cloned().collect();
    pts.sort();
    pts.iter()
        .map(|p| {
            let d = a.prefix(p) - b.prefix(p);
            if d < Q::zero() {
                -d
            } else {
                d
            }
        })
        .max()
        .unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_fair, FairnessNotion, Notion};

    fn skew() -> DensityValuation {
        DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(2), qi(0)], qi(4)).unwrap()
    }

    #[test]
    fn perturbation_aligns_the_median() {
        let v = DensityValuation::from_masses(
            vec![qi(0), q(1, 7), q(3, 5), qi(1)],
            &[q(1, 5), q(1, 2), q(3, 10)],
            qi(4),
        )
        .unwrap();
        for m in [8u64, 64, 1024] {
            let p = perturb_median(&v, m).unwrap();
            let k = floor_int(&(v.median() * qu(m) + q(1, 2)));
            assert_eq!(p.prefix(&(Q::from_integer(k) / qu(m))), q(1, 2), "m={m}");
            assert!(max_interval_shift(&v, &p) <= qi(4) / qu(2 * m));
        }
    }

    #[test]
    fn uniform_pair_is_perfect() {
        let u = DensityValuation::uniform();
        let eps = q(1, 100);
        let out =
            perfect_two(&u, &u, &eps, CrossingMode::Deterministic, &mut PublicCoins::new(1)).unwrap();
        assert_eq!(out.allocation.cuts.len(), 2);
        let notion = FairnessNotion::new(Notion::Perfect, eps).unwrap();
        assert!(check_fair(&out.allocation, &[u.clone(), u], &notion).unwrap().pass);
    }

    #[test]
    fn skewed_pair_is_perfect_either_way_round() {
        let u = DensityValuation::uniform();
        let eps = q(1, 1000);
        let notion = FairnessNotion::new(Notion::Perfect, eps.clone()).unwrap();
        for mode in [CrossingMode::Deterministic, CrossingMode::Randomized] {
            let out = perfect_two(&u, &skew(), &eps, mode, &mut PublicCoins::new(5)).unwrap();
            let vals = [u.clone(), skew()];
            assert!(check_fair(&out.allocation, &vals, &notion).unwrap().pass);
            // Swapping who gets the middle leaves the verdict unchanged.
            let mut swapped = out.allocation.clone();
            for p in &mut swapped.assignment {
                *p = 1 - *p;
            }
            assert!(check_fair(&swapped, &vals, &notion).unwrap().pass);
        }
    }
}
