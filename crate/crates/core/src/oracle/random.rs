//! Seeded random valuations for tests and benchmarks.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crossing::{CrossingInstance, MonCrossingInstance};
use crate::rational::{q, qi, qu, Q};
use crate::valuation::DensityValuation;

/// Breakpoints are drawn from multiples of `1/GRID`.
const GRID: u64 = 1024;

fn draw(seed: u64, segments: usize, d: &Q, hungry: bool) -> DensityValuation {
    assert!(segments >= 1, "need at least one segment");
    assert!(*d >= Q::one(), "density bound below 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = segments.min(GRID as usize);
    let mut cuts: Vec<u64> = rand::seq::index::sample(&mut rng, GRID as usize - 1, segments - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut bp = vec![Q::zero()];
    bp.extend(cuts.iter().map(|&c| q(c as i64, GRID as i64)));
    bp.push(Q::one());
    let weights: Vec<u64> = (0..segments)
        .map(|_| {
            if !hungry && rng.random_range(0..4) == 0 {
                0
            } else {
                rng.random_range(1..=100)
            }
        })
        .collect();
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return DensityValuation::uniform()
            .with_density_bound(d.clone())
            .expect("uniform fits any bound >= 1");
    }
    let mut dens: Vec<Q> = weights
        .iter()
        .zip(bp.windows(2))
        .map(|(&w, b)| qu(w) / (qu(total) * (&b[1] - &b[0])))
        .collect();
    let max = dens.iter().max().cloned().unwrap_or_else(Q::one);
    if max > *d {
        // Mix with the uniform density so the maximum lands exactly on D.
        let lambda = (d - qi(1)) / (&max - qi(1));
        let rest = Q::one() - &lambda;
        for x in &mut dens {
            *x = &lambda * &*x + &rest;
        }
    }
    DensityValuation::new(bp, dens, d.clone()).expect("construction keeps the invariants")
}

/// A valuation with at most `segments` pieces and densities at most `d`.
pub fn random_valuation(seed: u64, segments: usize, d: &Q) -> DensityValuation {
    draw(seed, segments, d, false)
}

/// Like [`random_valuation`] but with every density positive.
pub fn random_hungry_valuation(seed: u64, segments: usize, d: &Q) -> DensityValuation {
    draw(seed, segments, d, true)
}

fn sorted_draws(rng: &mut ChaCha8Rng, len: usize, k: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..len).map(|_| rng.random_range(0..=k)).collect();
    v.sort_unstable();
    v
}

/// Monotone instance with `x` and `y` built from sorted uniform draws in `0..=k`.
pub fn random_mon_crossing(seed: u64, m: u64, k: u64) -> MonCrossingInstance {
    assert!(m >= 1 && k >= 1, "need m, k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = m as usize - 1;
    let mut x = vec![0];
    x.extend(sorted_draws(&mut rng, inner, k));
    x.push(k);
    let mut y = vec![k];
    y.extend(sorted_draws(&mut rng, inner, k).into_iter().rev());
    y.push(0);
    MonCrossingInstance::new(m, k, x, y).expect("sorted draws are monotone")
}

/// General instance with uniform entries in `0..=m`; the two endpoint pairs
/// are swapped as needed to meet the boundary conditions.
pub fn random_crossing(seed: u64, m: u64) -> CrossingInstance {
    assert!(m >= 1, "need m >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = m as usize + 1;
    let mut x: Vec<u64> = (0..len).map(|_| rng.random_range(0..=m)).collect();
    let mut y: Vec<u64> = (0..len).map(|_| rng.random_range(0..=m)).collect();
    for i in [0, len - 1] {
        let swap = if i == 0 { x[i] > y[i] } else { x[i] < y[i] };
        if swap {
            std::mem::swap(&mut x[i], &mut y[i]);
        }
    }
    CrossingInstance::new(m, x, y).expect("endpoints fixed up")
}
