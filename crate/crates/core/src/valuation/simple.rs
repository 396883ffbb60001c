use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{check_point, DensityValuation, GridKernel, Valuation};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, qu, Q};

/// Read access to an m-simple valuation through its grid prefix values.
///
/// `prefix_units(k)` is `m · v'([0, k/m])`, an integer in `0..=m`.
pub trait GridValuation {
    fn grid(&self) -> u64;
    fn prefix_units(&self, k: u64) -> u64;

    fn cell_units(&self, k: u64) -> u64 {
        self.prefix_units(k + 1) - self.prefix_units(k)
    }

    /// Smallest `k` with `den · P[k] ≥ num`. Requires `num ≤ den · m`.
    fn first_reaching(&self, num: u64, den: u64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.grid());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if den as u128 * self.prefix_units(mid) as u128 >= num as u128 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Largest `k` with `den · P[k] ≤ num`.
    fn last_not_above(&self, num: u64, den: u64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.grid());
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if den as u128 * self.prefix_units(mid) as u128 <= num as u128 {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Value of `[i/m, j/m]` in units of `1/m`.
    fn units_between(&self, i: u64, j: u64) -> u64 {
        self.prefix_units(j) - self.prefix_units(i)
    }
}

fn grid_prefix<G: GridValuation + ?Sized>(g: &G, y: &Q) -> Q {
    let m = g.grid();
    if !y.is_positive() {
        return Q::zero();
    }
    if *y >= Q::one() {
        return Q::one();
    }
    let my = y * qu(m);
    let k = my.floor().to_integer();
    let k: u64 = k.try_into().expect("grid index fits");
    let frac = &my - qu(k);
    let p = qu(g.prefix_units(k)) + frac * qu(g.cell_units(k));
    p / qu(m)
}

fn grid_cut<G: GridValuation + ?Sized>(g: &G, a: &Q, alpha: &Q) -> Result<Q> {
    check_point(a)?;
    if alpha.is_negative() {
        return Err(Error::Precondition("cut needs alpha >= 0".into()));
    }
    let start = grid_prefix(g, a);
    let remaining = Q::one() - &start;
    if *alpha > remaining {
        return Err(Error::InfeasibleCut {
            requested: fmt_q(alpha),
            remaining: fmt_q(&remaining),
        });
    }
    if alpha.is_zero() {
        return Ok(a.clone());
    }
    let m = g.grid();
    let target = (start + alpha) * qu(m);
    // First grid point whose prefix reaches the target.
    let (mut lo, mut hi) = (0u64, m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if qu(g.prefix_units(mid)) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let pk = qu(g.prefix_units(lo));
    if pk == target {
        return Ok(qu(lo) / qu(m));
    }
    // Strictly inside cell lo-1, which therefore has positive weight.
    let c = lo - 1;
    let y = qu(c) + (target - qu(g.prefix_units(c))) / qu(g.cell_units(c));
    Ok(y / qu(m))
}

/// An m-simple valuation with materialized cell weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSimple", into = "RawSimple")]
pub struct SimpleValuation {
    m: u64,
    cell_weights: Vec<u64>,
    prefix: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawSimple {
    m: u64,
    cell_weights: Vec<u64>,
}

impl TryFrom<RawSimple> for SimpleValuation {
    type Error = Error;
    fn try_from(r: RawSimple) -> Result<Self> {
        SimpleValuation::new(r.m, r.cell_weights)
    }
}

impl From<SimpleValuation> for RawSimple {
    fn from(v: SimpleValuation) -> Self {
        RawSimple {
            m: v.m,
            cell_weights: v.cell_weights,
        }
    }
}

impl SimpleValuation {
    pub fn new(m: u64, cell_weights: Vec<u64>) -> Result<Self> {
        if m == 0 || cell_weights.len() as u64 != m {
            return Err(Error::InvalidValuation(format!(
                "an {m}-simple valuation needs {m} cells, got {}",
                cell_weights.len()
            )));
        }
        let mut prefix = Vec::with_capacity(cell_weights.len() + 1);
        prefix.push(0u64);
        for w in &cell_weights {
            prefix.push(prefix.last().unwrap() + w);
        }
        if *prefix.last().unwrap() != m {
            return Err(Error::InvalidValuation(format!(
                "cell weights sum to {}, not {m}",
                prefix.last().unwrap()
            )));
        }
        Ok(SimpleValuation {
            m,
            cell_weights,
            prefix,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn cell_weights(&self) -> &[u64] {
        &self.cell_weights
    }
}

impl GridValuation for SimpleValuation {
    fn grid(&self) -> u64 {
        self.m
    }

    fn prefix_units(&self, k: u64) -> u64 {
        self.prefix[k as usize]
    }

    fn cell_units(&self, k: u64) -> u64 {
        self.cell_weights[k as usize]
    }
}

impl Valuation for SimpleValuation {
    fn prefix(&self, y: &Q) -> Q {
        grid_prefix(self, y)
    }

    fn cut(&self, a: &Q, alpha: &Q) -> Result<Q> {
        grid_cut(self, a, alpha)
    }
}

/// The m-simple rounding of a density valuation, computed on demand.
///
/// Agrees exactly with [`simplify`] but never allocates the `m` cells, so
/// protocols can use grids with millions of cells.
#[derive(Clone, Debug)]
pub struct LazySimple {
    m: u64,
    kernel: GridKernel,
}

impl GridValuation for LazySimple {
    fn grid(&self) -> u64 {
        self.m
    }

    fn prefix_units(&self, k: u64) -> u64 {
        self.kernel.ceil_units(k, self.m)
    }
}

impl Valuation for LazySimple {
    fn prefix(&self, y: &Q) -> Q {
        grid_prefix(self, y)
    }

    fn cut(&self, a: &Q, alpha: &Q) -> Result<Q> {
        grid_cut(self, a, alpha)
    }
}

/// Rounds every grid prefix `v([0,k/m])` up to a multiple of `1/m`.
pub fn simplify_lazy(v: &DensityValuation, m: u64) -> LazySimple {
    assert!(m >= 1, "grid needs at least one cell");
    LazySimple {
        m,
        kernel: GridKernel::new(v, m),
    }
}

/// Materialized form of [`simplify_lazy`].
pub fn simplify(v: &DensityValuation, m: u64) -> SimpleValuation {
    let lazy = simplify_lazy(v, m);
    let mut weights = Vec::with_capacity(m as usize);
    let mut prev = 0u64;
    for k in 1..=m {
        let p = lazy.prefix_units(k);
        weights.push(p - prev);
        prev = p;
    }
    SimpleValuation::new(m, weights).expect("rounded prefixes sum to m")
}

/// Largest `|v'(I) − v(I)|` over intervals `I` with grid endpoints.
pub fn grid_interval_error(v: &DensityValuation, s: &impl GridValuation) -> Q {
    let m = s.grid();
    let kern = GridKernel::new(v, m);
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    for k in 0..=m {
        let e = Q::new(BigInt::from(s.prefix_units(k)), BigInt::from(m)) - kern.value(k);
        if lo.as_ref().is_none_or(|l| e < *l) {
            lo = Some(e.clone());
        }
        if hi.as_ref().is_none_or(|h| e > *h) {
            hi = Some(e);
        }
    }
    hi.unwrap() - lo.unwrap()
}
