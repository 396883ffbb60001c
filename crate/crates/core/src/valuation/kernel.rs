//! Integer evaluation of a density valuation at the points `k/L` of a grid.
//!
//! On segment `s` the prefix is affine: `v([0, k/L]) = (a_s + b_s·k) / g_s`
//! with integers `a_s`, `b_s` and a positive common denominator `g_s`. Hot
//! loops (simplification, checking allocations with thousands of cells)
//! then run on machine integers, falling back to big integers on overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::DensityValuation;
use crate::rational::Q;

#[derive(Clone, Debug)]
struct Segment {
    a: BigInt,
    b: BigInt,
    g: BigInt,
    small: Option<(i128, i128, i128)>,
}

/// Prefix values of one valuation on the grid `{k/L : 0 ≤ k ≤ L}`.
#[derive(Clone, Debug)]
pub struct GridKernel {
    l: u64,
    /// First grid index at or right of each segment's left breakpoint.
    kstart: Vec<u64>,
    segs: Vec<Segment>,
}

fn small(x: &BigInt) -> Option<i128> {
    if x.bits() <= 62 {
        x.to_i128()
    } else {
        None
    }
}

impl GridKernel {
    pub fn new(v: &DensityValuation, l: u64) -> Self {
        assert!(l >= 1, "grid needs at least one cell");
        let lq = Q::from_integer(BigInt::from(l));
        let bp = v.breakpoints();
        let cum = v.cumulative();
        let mut kstart = Vec::with_capacity(v.segment_count());
        let mut segs = Vec::with_capacity(v.segment_count());
        for (s, d) in v.densities().iter().enumerate() {
            kstart.push(
                (&bp[s] * &lq)
                    .ceil()
                    .to_integer()
                    .to_u64()
                    .expect("grid index fits"),
            );
            let alpha = &cum[s] - d * &bp[s];
            let beta = d / &lq;
            let g = alpha.denom().lcm(beta.denom());
            let a = alpha.numer() * (&g / alpha.denom());
            let b = beta.numer() * (&g / beta.denom());
            let sm = match (small(&a), small(&b), small(&g)) {
                (Some(a), Some(b), Some(g)) => Some((a, b, g)),
                _ => None,
            };
            segs.push(Segment { a, b, g, small: sm });
        }
        GridKernel { l, kstart, segs }
    }

    pub fn grid(&self) -> u64 {
        self.l
    }

    fn seg(&self, k: u64) -> &Segment {
        let s = self.kstart.partition_point(|&ks| ks <= k);
        &self.segs[s.saturating_sub(1)]
    }

    /// Exact `v([0, k/L])`.
    pub fn value(&self, k: u64) -> Q {
        debug_assert!(k <= self.l);
        let sg = self.seg(k);
        Q::new(&sg.a + &sg.b * BigInt::from(k), sg.g.clone())
    }

    /// `⌈m · v([0, k/L])⌉` where `m` is the caller's unit count.
    pub fn ceil_units(&self, k: u64, m: u64) -> u64 {
        debug_assert!(k <= self.l);
        let sg = self.seg(k);
        if let Some((a, b, g)) = sg.small {
            let t = b
                .checked_mul(k as i128)
                .and_then(|x| x.checked_add(a))
                .and_then(|x| x.checked_mul(m as i128));
            if let Some(t) = t {
                let c = -((-t).div_euclid(g));
                return c.clamp(0, m as i128) as u64;
            }
        }
        let t = (&sg.a + &sg.b * BigInt::from(k)) * BigInt::from(m);
        let c = t.div_ceil(&sg.g);
        c.to_u64().expect("units fit").min(m)
    }

    /// `Σ sign · v([0, k/L])` over the given grid points.
    pub fn signed_sum<I: IntoIterator<Item = (u64, i64)>>(&self, points: I) -> Q {
        let mut count = vec![0i64; self.segs.len()];
        let mut ksum = vec![0i128; self.segs.len()];
        for (k, sign) in points {
            let s = self.kstart.partition_point(|&ks| ks <= k).saturating_sub(1);
            count[s] += sign;
            ksum[s] += sign as i128 * k as i128;
        }
        let mut total = Q::zero();
        for (s, sg) in self.segs.iter().enumerate() {
            if count[s] == 0 && ksum[s] == 0 {
                continue;
            }
            let num = &sg.a * BigInt::from(count[s]) + &sg.b * BigInt::from(ksum[s]);
            total += Q::new(num, sg.g.clone());
        }
        total
    }

    /// True when every segment fits the machine-integer fast path.
    pub fn is_small(&self) -> bool {
        self.segs.iter().all(|s| s.small.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi, qu};
    use crate::valuation::Valuation;

    #[test]
    fn matches_exact_prefix() {
        let v = DensityValuation::from_masses(
            vec![qi(0), q(1, 3), q(5, 7), qi(1)],
            &[q(1, 4), q(1, 2), q(1, 4)],
            qi(4),
        )
        .unwrap();
        for l in [1u64, 2, 3, 7, 21, 64, 1000] {
            let kern = GridKernel::new(&v, l);
            for k in 0..=l {
                let y = q(k as i64, l as i64);
                let exact = v.prefix(&y);
                assert_eq!(kern.value(k), exact, "l={l} k={k}");
                let units = (exact * qu(l)).ceil().to_integer();
                assert_eq!(BigInt::from(kern.ceil_units(k, l)), units);
            }
        }
    }

    #[test]
    fn signed_sum_matches() {
        let v = DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![q(3, 2), q(1, 2)], qi(4))
            .unwrap();
        let kern = GridKernel::new(&v, 10);
        let pts = [(7u64, 1i64), (2, -1), (10, 1), (9, -1)];
        let expect: Q = pts
            .iter()
            .map(|&(k, s)| v.prefix(&q(k as i64, 10)) * qi(s))
            .sum();
        assert_eq!(kern.signed_sum(pts), expect);
    }
}
