//! Monotone crossing by simultaneous halving of the index and value ranges.
//!
//! The search keeps an index window `(lo, hi)` with `x_lo < y_lo` and
//! `x_hi ≥ y_hi`, and a half-open value window `[off, off + kcur)`. Each
//! round both parties say whether their midpoint value reaches the middle of
//! the value window: disagreement halves the index window, agreement halves
//! the value window. Values outside the window are viewed as follows:
//! `x` below it and `y` above it become strict sentinels, `x` above it and
//! `y` below it are clamped to the window. After an agreement, `x` can only
//! drop below the new window left of the midpoint, where `y` is inside or
//! above it, and `y` can only rise above it left of the midpoint too; the
//! clamped cases occur right of the midpoint, where `x ≥ y` holds anyway. So
//! the view preserves `x_i ≥ y_i` at every index still in play.
use super::{exchange, CrossingAnswer, MonCrossingInstance};
use crate::comm::{Bits, Transcript};
use crate::error::{Error, Result};
use crate::rational::next_pow2;

fn bit(b: bool) -> Bits {
    Bits::from(vec![b])
}

fn read_bit(bits: &Bits) -> Result<bool> {
    let mut r = bits.reader();
    let b = r.read_bit()?;
    r.finish()?;
    Ok(b)
}

/// Solves monotone crossing over `0..=m` with values in `0..=k`.
///
/// `parties` are the transcript ids of the holders of `x` and `y`. Non
/// power-of-two sizes are padded: `x_i = k`, `y_i = 0` for `i > m`, and the
/// value range is widened to the next power of two.
pub fn mon_crossing(
    m: u64,
    k: u64,
    x: &dyn Fn(u64) -> u64,
    y: &dyn Fn(u64) -> u64,
    parties: (usize, usize),
    tr: &mut Transcript,
) -> Result<CrossingAnswer> {
    if m == 0 || k == 0 {
        return Err(Error::MalformedInstance("m and k must be positive".into()));
    }
    let read = |f: &dyn Fn(u64) -> u64, i: u64, pad: u64| -> Result<u64> {
        if i > m {
            return Ok(pad);
        }
        let v = f(i);
        if v > k {
            return Err(Error::MalformedInstance(format!("entry {v} exceeds k = {k}")));
        }
        Ok(v)
    };
    let (mut lo, mut hi) = (0u64, next_pow2(m));
    let (mut off, mut kcur) = (0u64, next_pow2(k + 1));
    while hi - lo > 1 {
        let c = lo + (hi - lo) / 2;
        let (xc, yc) = (read(x, c, k)?, read(y, c, 0)?);
        // Alice says whether x_c reaches `mid`, Bob whether y_c does. In a
        // single-value window `mid` is that value and `x_c ≥ y_c` holds
        // exactly when both are in it.
        let (xa, yb) = if kcur >= 2 {
            let mid = off + kcur / 2;
            (xc >= mid, yc >= mid)
        } else {
            (xc >= off, yc < off + 1)
        };
        let (ma, mb) = exchange(tr, parties, bit(xa), bit(yb))?;
        let (xa, yb) = (read_bit(&ma)?, read_bit(&mb)?);
        if kcur >= 2 {
            let half = kcur / 2;
            match (xa, yb) {
                (false, false) => kcur = half,
                (true, true) => {
                    off += half;
                    kcur = half;
                }
                (true, false) => hi = c,
                (false, true) => lo = c,
            }
        } else if xa && yb {
            hi = c;
        } else {
            lo = c;
        }
    }
    Ok(CrossingAnswer::below_then_above(hi.min(m)))
}

pub fn solve_mon_crossing(inst: &MonCrossingInstance, tr: &mut Transcript) -> Result<CrossingAnswer> {
    let (x, y) = (&inst.x, &inst.y);
    mon_crossing(
        inst.m,
        inst.k,
        &|i| x[i as usize],
        &|i| y[i as usize],
        (0, 1),
        tr,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(m: u64, k: u64, x: Vec<u64>, y: Vec<u64>) -> (u64, usize) {
        let inst = MonCrossingInstance::new(m, k, x, y).unwrap();
        let mut tr = Transcript::new();
        let ans = solve_mon_crossing(&inst, &mut tr).unwrap();
        assert!(inst.is_valid_answer(ans.index), "{inst:?} -> {}", ans.index);
        (ans.index, tr.finished().cost().unwrap().total_bits)
    }

    #[test]
    fn identity_against_reverse() {
        let (i, bits) = solve(4, 4, vec![0, 1, 2, 3, 4], vec![4, 3, 2, 1, 0]);
        assert!(i == 2 || i == 3);
        // Two bits per round, log m index halvings, log(k+1) value halvings.
        assert!(bits <= 2 * (2 + 3));
    }

    #[test]
    fn ties_at_the_window_edge() {
        let (i, _) = solve(3, 2, vec![0, 0, 1, 2], vec![2, 1, 1, 0]);
        assert_eq!(i, 2);
        let (i, _) = solve(4, 4, vec![0, 0, 3, 3, 4], vec![4, 3, 3, 0, 0]);
        assert_eq!(i, 2);
    }

    #[test]
    fn every_small_instance() {
        fn seqs(len: usize, k: u64) -> Vec<Vec<u64>> {
            if len == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for s in seqs(len - 1, k) {
                let lo = s.last().copied().unwrap_or(0);
                for v in lo..=k {
                    let mut t = s.clone();
                    t.push(v);
                    out.push(t);
                }
            }
            out
        }
        for m in 1..=5u64 {
            for k in 1..=5u64 {
                let inner = seqs(m as usize - 1, k);
                for a in &inner {
                    for b in &inner {
                        let x = [vec![0], a.clone(), vec![k]].concat();
                        let y = [vec![k], b.iter().rev().copied().collect(), vec![0]].concat();
                        solve(m, k, x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn step_instance() {
        let (i, _) = solve(2, 2, vec![0, 0, 2], vec![2, 0, 0]);
        assert!(i == 1 || i == 2);
    }

    #[test]
    fn odd_sizes_are_padded() {
        solve(3, 5, vec![0, 1, 4, 5], vec![5, 5, 2, 0]);
        solve(5, 3, vec![0, 0, 0, 1, 3, 3], vec![3, 3, 3, 3, 1, 0]);
        solve(1, 1, vec![0, 1], vec![1, 0]);
    }

    #[test]
    fn out_of_range_entry_is_malformed() {
        let mut tr = Transcript::new();
        let r = mon_crossing(4, 4, &|i| if i == 2 { 9 } else { i }, &|i| 4 - i, (0, 1), &mut tr);
        assert!(matches!(r, Err(Error::MalformedInstance(_))));
    }
}
