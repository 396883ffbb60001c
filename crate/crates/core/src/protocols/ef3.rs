//! Three-party connected envy-free division through monotone crossing.
//!
//! Roles are assigned by 1/3-marks: Alice has the smallest mark, then Bob,
//! then Carol (party index breaks ties). Alice proposes her three
//! near-equal pieces. If some assignment of them is already ε/2-envy-free
//! it is returned. Otherwise Bob and Carol both strongly prefer the middle
//! piece (case 1) or the right piece (case 2), and Alice and Bob slide one
//! cut while each keeps their own two best pieces tied. The position where
//! their ties meet is a monotone crossing. Carol then picks first.
//!
//! All reasoning happens on `m`-simple valuations with `m ≥ 10(D+1)/eps`,
//! so every grid cell is worth at most `eps/10` and all cuts are grid
//! points.

use super::{check_eps, decode_ints, encode_ints, last_from, max_bound, pow2_grid, Outcome};
use crate::allocation::Allocation;
use crate::comm::{Bits, Message, Transcript};
use crate::crossing::mon_crossing;
use crate::error::{Error, Result};
use crate::rational::{qi, qu, Q};
use crate::valuation::{simplify_lazy, DensityValuation, GridValuation, LazySimple};

/// Grid size `⌈10(D+1)/eps⌉`, rounded up to a power of two.
pub fn ef3_grid(d: &Q, eps: &Q) -> u64 {
    pow2_grid(&(qi(10) * (d + qi(1)) / eps))
}

/// Grid marks each party announces in the first round.
#[derive(Clone, Copy, Debug)]
struct Marks {
    third: u64,
    /// Largest right cut leaving a right piece at least the 1/3 piece.
    right: u64,
    half: u64,
    two_thirds: u64,
}

impl Marks {
    fn of(s: &LazySimple) -> Self {
        let m = s.grid();
        let third = s.first_reaching(m, 3);
        Marks {
            third,
            right: s.last_not_above(m - s.prefix_units(third), 1),
            half: s.last_not_above(m, 2),
            two_thirds: s.first_reaching(2 * m, 3),
        }
    }

    fn encode(&self, m: u64) -> Bits {
        encode_ints(&[self.third, self.right, self.half, self.two_thirds], m)
    }

    fn decode(bits: &Bits, m: u64) -> Result<Self> {
        let v = decode_ints(bits, 4, m)?;
        Ok(Marks {
            third: v[0],
            right: v[1],
            half: v[2],
            two_thirds: v[3],
        })
    }
}

/// Unit values of the three pieces cut at `(a, b)`.
fn piece_units(s: &LazySimple, a: u64, b: u64) -> [u64; 3] {
    let m = s.grid();
    [s.units_between(0, a), s.units_between(a, b), s.units_between(b, m)]
}

fn favorite(vals: &[u64; 3], allowed: &[usize]) -> usize {
    // Leftmost piece of maximal value.
    let mut best = allowed[0];
    for &p in allowed {
        if vals[p] > vals[best] {
            best = p;
        }
    }
    best
}

/// All six ways of handing pieces to roles, `perm[role] = piece`.
const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// First assignment in which nobody envies anyone by more than `slack` units.
fn envy_free_assignment(values: &[[u64; 3]; 3], slack: &Q) -> Option<[usize; 3]> {
    PERMS.into_iter().find(|perm| {
        (0..3).all(|r| {
            let own = qu(values[r][perm[r]]);
            (0..3).all(|p| own.clone() + slack >= qu(values[r][p]))
        })
    })
}

fn read_small(bits: &Bits, width: u32) -> Result<u64> {
    let mut r = bits.reader();
    let v = r.read_uint(width)?;
    r.finish()?;
    Ok(v)
}

pub fn envy_free_three(
    va: &DensityValuation,
    vb: &DensityValuation,
    vc: &DensityValuation,
    eps: &Q,
) -> Result<Outcome> {
    check_eps(eps)?;
    let m = ef3_grid(&max_bound(&[va, vb, vc]), eps);
    let sims = [simplify_lazy(va, m), simplify_lazy(vb, m), simplify_lazy(vc, m)];
    let mut tr = Transcript::new();

    // Round 1: everyone's marks.
    tr.round_exchange(
        (0..3)
            .map(|p| Message::new(p, Marks::of(&sims[p]).encode(m)))
            .collect(),
    )?;
    let marks = (0..3)
        .map(|p| Marks::decode(last_from(&tr, p)?, m))
        .collect::<Result<Vec<_>>>()?;
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&p| (marks[p].third, p));
    let [alice, bob, carol] = order;
    let (a0, b0) = (marks[alice].third, marks[alice].right);
    let sim = |role: usize| &sims[order[role]];

    // Round 2: everyone values Alice's three pieces.
    tr.round_exchange(
        (0..3)
            .map(|p| Message::new(p, encode_ints(&piece_units(&sims[p], a0, b0), m)))
            .collect(),
    )?;
    let mut values = [[0u64; 3]; 3];
    for (role, &p) in order.iter().enumerate() {
        let v = decode_ints(last_from(&tr, p)?, 3, m)?;
        values[role] = [v[0], v[1], v[2]];
    }
    let half_eps = eps * qu(m) / qi(2);
    let finish = |cuts: (u64, u64), perm: [usize; 3], tr: Transcript| -> Result<Outcome> {
        let mut assignment = vec![0usize; 3];
        for (role, &piece) in perm.iter().enumerate() {
            assignment[piece] = order[role];
        }
        let alloc = Allocation::new(vec![qu(cuts.0) / qu(m), qu(cuts.1) / qu(m)], assignment)?;
        Ok(Outcome::new(alloc, tr))
    };
    if let Some(perm) = envy_free_assignment(&values, &half_eps) {
        return finish((a0, b0), perm, tr);
    }
    let fav_b = favorite(&values[1], &[0, 1, 2]);
    let fav_c = favorite(&values[2], &[0, 1, 2]);
    if fav_b != fav_c || fav_b == 0 {
        return Err(Error::ProtocolContract(format!(
            "no envy-free split at Alice's marks, yet favorites are {fav_b} and {fav_c}"
        )));
    }
    let middle_case = fav_b == 1;

    // Sliding phase. `x` is Alice's sequence and `y` Bob's, over i in j..=k.
    let (sa, sb) = (sim(0), sim(1));
    let (j, k) = if middle_case {
        (a0, marks[alice].half.min(marks[bob].half).max(a0))
    } else {
        (b0, marks[bob].two_thirds.max(b0))
    };
    let x = |i: u64| -> u64 {
        if middle_case {
            // Right cut keeping Alice's right piece at least her left piece.
            sa.last_not_above(m - sa.prefix_units(i), 1)
        } else {
            // Left cut making Alice's left piece at least her middle piece.
            sa.first_reaching(sa.prefix_units(i), 2)
        }
    };
    let y = |i: u64| -> u64 {
        if middle_case {
            // Smallest right cut where Bob's middle beats both outer pieces.
            let p = sb.prefix_units(i);
            sb.first_reaching((4 * p).max(m + p), 2)
        } else {
            // Largest left cut keeping Bob's left piece at most his right piece.
            sb.last_not_above(m - sb.prefix_units(i), 1)
        }
    };
    // Monotone instance over t in 0..=n+1, i = j + t − 1, padded at both ends.
    let n = k - j + 1;
    let (inc, dec): (&dyn Fn(u64) -> u64, &dyn Fn(u64) -> u64) = if middle_case {
        (&y, &x)
    } else {
        (&x, &y)
    };
    let xs = |t: u64| match t {
        0 => 0,
        t if t > n => m,
        t => inc(j + t - 1),
    };
    let ys = |t: u64| match t {
        0 => m,
        t if t > n => 0,
        t => dec(j + t - 1),
    };
    let parties = if middle_case { (bob, alice) } else { (alice, bob) };
    let t = mon_crossing(n + 1, m, &xs, &ys, parties, &mut tr)?.index;
    let endpoint = t == n + 1;
    let i = if endpoint { k } else { j + t - 1 };
    let prev = if t >= 2 && !endpoint { i - 1 } else { i };

    // Round: the two sequence values that fix the second cut.
    let (xa, yb) = if middle_case { (x(prev), y(i)) } else { (x(i), y(prev)) };
    tr.round_exchange(vec![
        Message::new(alice, encode_ints(&[xa], m)),
        Message::new(bob, encode_ints(&[yb], m)),
    ])?;
    let xa = decode_ints(last_from(&tr, alice)?, 1, m)?[0];
    let yb = decode_ints(last_from(&tr, bob)?, 1, m)?[0];
    let cuts = if middle_case {
        (i, xa.min(yb))
    } else if endpoint {
        (yb, i)
    } else {
        (xa.min(yb), i)
    };
    if cuts.0 > cuts.1 {
        return Err(Error::ProtocolContract("crossing produced crossed cuts".into()));
    }

    // Round: Carol names her favorite; Bob names his better outer piece.
    let piece_vals = |role: usize| piece_units(sim(role), cuts.0, cuts.1);
    let carol_allowed: &[usize] = if !middle_case && endpoint { &[1, 2] } else { &[0, 1, 2] };
    let choice = favorite(&piece_vals(2), carol_allowed);
    let bob_outer = favorite(&piece_vals(1), &[0, 2]);
    let mut cb = Bits::new();
    cb.push_uint(choice as u64, 2);
    let mut bb = Bits::new();
    bb.push(bob_outer == 2);
    tr.round_exchange(vec![Message::new(carol, cb), Message::new(bob, bb)])?;
    let choice = read_small(last_from(&tr, carol)?, 2)? as usize;
    let bob_outer = if read_small(last_from(&tr, bob)?, 1)? == 1 { 2 } else { 0 };
    if choice > 2 {
        return Err(Error::Decode(format!("piece choice {choice}")));
    }

    // perm[role] = piece for (Alice, Bob, Carol).
    let perm = match (middle_case, endpoint, choice) {
        (true, _, 0) => [2, 1, 0],
        (true, _, 1) => [2 - bob_outer, bob_outer, 1],
        (true, _, _) => [0, 1, 2],
        (false, true, c) => [0, 3 - c, c],
        (false, false, 0) => [1, 2, 0],
        (false, false, 1) => [0, 2, 1],
        (false, false, _) => [1, 0, 2],
    };
    finish(cuts, perm, tr)
}
