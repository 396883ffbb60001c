//! General crossing by binary search over indices, with either exact or
//! fingerprinted comparisons.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::{decode_entry, encode_entry, exchange, CrossingAnswer, CrossingInstance};
use crate::comm::{Bits, PublicCoins, Transcript};
use crate::error::{Error, Result};
use crate::rational::{ceil_log2, ceil_log2_inv, q, width_for, Q};

/// Deterministic binary search. Keeps `x_a ≤ y_a` (or `a = 0`) and
/// `x_b ≥ y_b`, moving `b` left on ties, so the answer always has the
/// below-then-above orientation.
pub fn crossing_det(
    m: u64,
    bound: u64,
    x: &dyn Fn(u64) -> u64,
    y: &dyn Fn(u64) -> u64,
    parties: (usize, usize),
    tr: &mut Transcript,
) -> Result<CrossingAnswer> {
    if m == 0 {
        return Err(Error::MalformedInstance("m must be positive".into()));
    }
    let w = width_for(bound);
    let (mut a, mut b) = (0u64, m);
    while b - a > 1 {
        let c = a + (b - a) / 2;
        let (ma, mb) = exchange(
            tr,
            parties,
            encode_entry(x(c), bound, w)?,
            encode_entry(y(c), bound, w)?,
        )?;
        if decode_entry(&ma, w)? >= decode_entry(&mb, w)? {
            b = c;
        } else {
            a = c;
        }
    }
    Ok(CrossingAnswer::below_then_above(b))
}

pub fn solve_crossing_det(inst: &CrossingInstance, tr: &mut Transcript) -> Result<CrossingAnswer> {
    inst.validate()?;
    let (x, y) = (&inst.x, &inst.y);
    crossing_det(
        inst.m,
        inst.bound(),
        &|i| x[i as usize],
        &|i| y[i as usize],
        (0, 1),
        tr,
    )
}

fn parity(v: u64) -> bool {
    v.count_ones() % 2 == 1
}

/// Fingerprint length for one prefix probe.
fn fingerprint_bits(k_bits: u32, delta: &Q) -> u32 {
    let probes = ceil_log2(k_bits as u64 + 1);
    ceil_log2_inv(delta) + ceil_log2(probes.max(1) as u64).max(2)
}

/// Compares Alice's `a` with Bob's `b`, both below `2^k_bits`.
///
/// Binary search for the length of the common most-significant prefix; each
/// probe exchanges random GF(2)-linear fingerprints of the two prefixes,
/// drawn from public coins. Once the prefix length `ℓ` is known, Alice sends
/// her bit at position `ℓ`. Errs with probability at most `delta`.
pub fn compare_randomized(
    a: u64,
    b: u64,
    k_bits: u32,
    delta: &Q,
    parties: (usize, usize),
    tr: &mut Transcript,
    coins: &mut PublicCoins,
) -> Result<Ordering> {
    if *delta <= Q::zero() || *delta >= Q::one() {
        return Err(Error::Precondition("delta must lie in (0,1)".into()));
    }
    if k_bits > 64 || (k_bits < 64 && (a >> k_bits != 0 || b >> k_bits != 0)) {
        return Err(Error::Precondition(format!(
            "operands must fit in {k_bits} bits"
        )));
    }
    if k_bits == 0 {
        return Ok(Ordering::Equal);
    }
    let f = fingerprint_bits(k_bits, delta);
    let prefix = |v: u64, len: u32| if len == 0 { 0 } else { v >> (k_bits - len) };
    let (mut lo, mut hi) = (0u32, k_bits);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let masks: Vec<u64> = (0..f).map(|_| coins.draw_uint(mid)).collect();
        let fp = |v: u64| {
            let p = prefix(v, mid);
            Bits::from(masks.iter().map(|&mk| parity(p & mk)).collect::<Vec<_>>())
        };
        let (fa, fb) = exchange(tr, parties, fp(a), fp(b))?;
        if fa == fb {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    if lo == k_bits {
        return Ok(Ordering::Equal);
    }
    let a_bit = (a >> (k_bits - 1 - lo)) & 1 == 1;
    tr.say(parties.0, Bits::from(vec![a_bit]))?;
    let sent = tr.rounds().last().expect("round just appended")[0].bits.as_slice()[0];
    Ok(if sent {
        Ordering::Greater
    } else {
        Ordering::Less
    })
}

/// Binary search with fingerprinted comparisons at error `1/(4L²)` each,
/// `L = ⌈log2 m⌉`, so the whole search errs with probability below `1/4`.
pub fn crossing_rand(
    m: u64,
    bound: u64,
    x: &dyn Fn(u64) -> u64,
    y: &dyn Fn(u64) -> u64,
    parties: (usize, usize),
    tr: &mut Transcript,
    coins: &mut PublicCoins,
) -> Result<CrossingAnswer> {
    if m == 0 {
        return Err(Error::MalformedInstance("m must be positive".into()));
    }
    let levels = ceil_log2(m).max(1) as i64;
    let delta = q(1, 4 * levels * levels);
    let w = width_for(bound);
    let (mut a, mut b) = (0u64, m);
    while b - a > 1 {
        let c = a + (b - a) / 2;
        let (xc, yc) = (x(c), y(c));
        if xc > bound || yc > bound {
            return Err(Error::MalformedInstance(format!(
                "entry exceeds bound {bound}"
            )));
        }
        if compare_randomized(xc, yc, w, &delta, parties, tr, coins)? == Ordering::Less {
            a = c;
        } else {
            b = c;
        }
    }
    Ok(CrossingAnswer::below_then_above(b))
}

pub fn solve_crossing_rand(
    inst: &CrossingInstance,
    tr: &mut Transcript,
    coins: &mut PublicCoins,
) -> Result<CrossingAnswer> {
    inst.validate()?;
    let (x, y) = (&inst.x, &inst.y);
    crossing_rand(
        inst.m,
        inst.bound(),
        &|i| x[i as usize],
        &|i| y[i as usize],
        (0, 1),
        tr,
        coins,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn det_examples() {
        let inst = CrossingInstance::new(2, vec![0, 2, 2], vec![2, 1, 0]).unwrap();
        let mut tr = Transcript::new();
        assert_eq!(solve_crossing_det(&inst, &mut tr).unwrap().index, 1);
        let zeros = CrossingInstance::new(4, vec![0; 5], vec![0; 5]).unwrap();
        let mut tr = Transcript::new();
        let ans = solve_crossing_det(&zeros, &mut tr).unwrap();
        assert!(zeros.is_valid_answer(ans.index));
        let cost = tr.finished().cost().unwrap();
        assert_eq!(cost.rounds, 2);
        assert_eq!(cost.t, 3);
    }

    #[test]
    fn compare_extremes_and_equality() {
        let mut coins = PublicCoins::new(7);
        let d = q(1, 100);
        for (a, b, want) in [
            (5u64, 5u64, Ordering::Equal),
            (0, 1023, Ordering::Less),
            (1023, 0, Ordering::Greater),
            (512, 511, Ordering::Greater),
        ] {
            let mut tr = Transcript::new();
            assert_eq!(
                compare_randomized(a, b, 10, &d, (0, 1), &mut tr, &mut coins).unwrap(),
                want
            );
        }
    }

    #[test]
    fn compare_error_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut coins = PublicCoins::new(11);
        let d = q(1, 100);
        let mut wrong = 0;
        for _ in 0..10_000 {
            let (a, b) = (rng.random_range(0..1024u64), rng.random_range(0..1024u64));
            let mut tr = Transcript::new();
            if compare_randomized(a, b, 10, &d, (0, 1), &mut tr, &mut coins).unwrap() != a.cmp(&b) {
                wrong += 1;
            }
        }
        assert!(wrong <= 200, "{wrong} errors");
    }

    #[test]
    fn rand_all_zero_always_valid() {
        let inst = CrossingInstance::new(8, vec![0; 9], vec![0; 9]).unwrap();
        for seed in 0..20 {
            let mut tr = Transcript::new();
            let ans = solve_crossing_rand(&inst, &mut tr, &mut PublicCoins::new(seed)).unwrap();
            assert!(inst.is_valid_answer(ans.index));
        }
    }
}
