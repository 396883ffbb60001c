//! Valuations over the cake `[0,1]`.
//!
//! A [`DensityValuation`] is a party's private input: a piecewise-constant
//! density with exact rational breakpoints. Protocols run on m-simple
//! approximations ([`SimpleValuation`] or the lazy [`LazySimple`]) whose
//! grid-point prefix values are integer multiples of `1/m`.

mod kernel;
mod query;
mod simple;

pub use kernel::GridKernel;
pub use query::{answer_query, decode_query_answer, encode_query_answer, Query};
pub use simple::{
    grid_interval_error, simplify, simplify_lazy, GridValuation, LazySimple, SimpleValuation,
};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, qi, serde_q, serde_qvec, Q};

/// Common query surface of exact and simplified valuations.
pub trait Valuation {
    /// `v([0, y])` for `y ∈ [0,1]`.
    fn prefix(&self, y: &Q) -> Q;

    /// Leftmost `y ≥ a` with `v([a, y]) = alpha`.
    fn cut(&self, a: &Q, alpha: &Q) -> Result<Q>;

    fn eval(&self, a: &Q, b: &Q) -> Result<Q> {
        check_point(a)?;
        check_point(b)?;
        if a > b {
            return Err(Error::Precondition(format!(
                "eval needs a <= b, got a={} b={}",
                fmt_q(a),
                fmt_q(b)
            )));
        }
        Ok(self.prefix(b) - self.prefix(a))
    }
}

pub(crate) fn check_point(y: &Q) -> Result<()> {
    if y.is_negative() || *y > Q::one() {
        return Err(Error::Precondition(format!("point {} outside [0,1]", fmt_q(y))));
    }
    Ok(())
}

/// A point of the cake.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CakePoint(Q);

impl CakePoint {
    pub fn new(value: Q) -> Result<Self> {
        check_point(&value)?;
        Ok(CakePoint(value))
    }

    pub fn value(&self) -> &Q {
        &self.0
    }
}

impl From<CakePoint> for Q {
    fn from(p: CakePoint) -> Q {
        p.0
    }
}

/// Piecewise-constant density on `[0,1]` with total mass exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct DensityValuation {
    breakpoints: Vec<Q>,
    densities: Vec<Q>,
    density_bound: Q,
    /// `cum[s]` is the mass of `[0, breakpoints[s]]`.
    cum: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    #[serde(with = "serde_qvec")]
    breakpoints: Vec<Q>,
    #[serde(with = "serde_qvec")]
    densities: Vec<Q>,
    #[serde(with = "serde_q")]
    density_bound: Q,
}

impl TryFrom<RawDensity> for DensityValuation {
    type Error = Error;
    fn try_from(r: RawDensity) -> Result<Self> {
        DensityValuation::new(r.breakpoints, r.densities, r.density_bound)
    }
}

impl From<DensityValuation> for RawDensity {
    fn from(v: DensityValuation) -> Self {
        RawDensity {
            breakpoints: v.breakpoints,
            densities: v.densities,
            density_bound: v.density_bound,
        }
    }
}

impl DensityValuation {
    pub fn new(breakpoints: Vec<Q>, densities: Vec<Q>, density_bound: Q) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidValuation(m));
        if breakpoints.len() < 2 {
            return bad("need at least two breakpoints".into());
        }
        if densities.len() + 1 != breakpoints.len() {
            return bad(format!(
                "{} breakpoints need {} densities, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                densities.len()
            ));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().unwrap().is_one() {
            return bad("breakpoints must start at 0 and end at 1".into());
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing".into());
        }
        for d in &densities {
            if d.is_negative() {
                return bad(format!("negative density {}", fmt_q(d)));
            }
            if *d > density_bound {
                return bad(format!(
                    "density {} exceeds bound {}",
                    fmt_q(d),
                    fmt_q(&density_bound)
                ));
            }
        }
        let mut cum = Vec::with_capacity(breakpoints.len());
        cum.push(Q::zero());
        for (s, d) in densities.iter().enumerate() {
            let next = cum[s].clone() + d * (&breakpoints[s + 1] - &breakpoints[s]);
            cum.push(next);
        }
        if !cum.last().unwrap().is_one() {
            return bad(format!("total mass is {}, not 1", fmt_q(cum.last().unwrap())));
        }
        Ok(DensityValuation {
            breakpoints,
            densities,
            density_bound,
            cum,
        })
    }

    /// Builds a valuation from segment masses instead of densities.
    pub fn from_masses(breakpoints: Vec<Q>, masses: &[Q], density_bound: Q) -> Result<Self> {
        if masses.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidValuation("one mass per segment".into()));
        }
        let mut densities = Vec::with_capacity(masses.len());
        for (s, mass) in masses.iter().enumerate() {
            let len = &breakpoints[s + 1] - &breakpoints[s];
            if !len.is_positive() {
                return Err(Error::InvalidValuation(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
            densities.push(mass / len);
        }
        Self::new(breakpoints, densities, density_bound)
    }

    pub fn uniform() -> Self {
        Self::new(vec![qi(0), qi(1)], vec![qi(1)], qi(1)).expect("uniform is valid")
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Q] {
        &self.densities
    }

    pub fn density_bound(&self) -> &Q {
        &self.density_bound
    }

    pub fn segment_count(&self) -> usize {
        self.densities.len()
    }

    /// Mass of `[0, breakpoints[s]]`.
    pub fn cumulative(&self) -> &[Q] {
        &self.cum
    }

    pub fn max_density(&self) -> Q {
        self.densities.iter().max().cloned().unwrap_or_else(Q::zero)
    }

    pub fn min_density(&self) -> Q {
        self.densities.iter().min().cloned().unwrap_or_else(Q::zero)
    }

    /// Strictly positive density everywhere.
    pub fn is_hungry(&self) -> bool {
        self.densities.iter().all(|d| d.is_positive())
    }

    /// Same valuation with a different declared density bound.
    pub fn with_density_bound(&self, bound: Q) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.densities.clone(), bound)
    }

    fn segment_of(&self, y: &Q) -> usize {
        let s = self.breakpoints.partition_point(|b| b <= y);
        s.saturating_sub(1).min(self.densities.len() - 1)
    }

    /// `(1 − eps/2)·v + eps/2`: every density becomes at least `eps/2`.
    pub fn make_hungry(&self, eps: &Q) -> Result<Self> {
        if !eps.is_positive() || *eps >= Q::one() {
            return Err(Error::Precondition("make_hungry needs 0 < eps < 1".into()));
        }
        let half = eps / qi(2);
        let keep = Q::one() - &half;
        let densities = self
            .densities
            .iter()
            .map(|d| &keep * d + &half)
            .collect();
        let bound = &keep * &self.density_bound + &half;
        Self::new(self.breakpoints.clone(), densities, bound)
    }

    /// Leftmost point `y` with `v([0,y]) = 1/2`.
    pub fn median(&self) -> Q {
        self.cut(&Q::zero(), &q(1, 2)).expect("half is always feasible")
    }
}

impl Valuation for DensityValuation {
    fn prefix(&self, y: &Q) -> Q {
        if y.is_negative() || y.is_zero() {
            return Q::zero();
        }
        if *y >= Q::one() {
            return Q::one();
        }
        let s = self.segment_of(y);
        &self.cum[s] + &self.densities[s] * (y - &self.breakpoints[s])
    }

    fn cut(&self, a: &Q, alpha: &Q) -> Result<Q> {
        check_point(a)?;
        if alpha.is_negative() {
            return Err(Error::Precondition("cut needs alpha >= 0".into()));
        }
        let start = self.prefix(a);
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
        let target = start + alpha;
        // First segment whose right end reaches the target. Its density is
        // positive because the target strictly exceeds the mass before it.
        let s = self.cum[1..].partition_point(|c| *c < target);
        let y = &self.breakpoints[s] + (&target - &self.cum[s]) / &self.densities[s];
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_density() -> DensityValuation {
        DensityValuation::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(2), qi(0)], qi(4)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let u = DensityValuation::uniform();
        assert_eq!(u.eval(&qi(0), &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(u.eval(&q(1, 3), &q(1, 3)).unwrap(), qi(0));
        assert_eq!(half_density().eval(&q(1, 4), &q(3, 4)).unwrap(), q(1, 2));
        assert!(u.eval(&q(1, 2), &q(1, 4)).is_err());
    }

    #[test]
    fn cut_examples() {
        let u = DensityValuation::uniform();
        assert_eq!(u.cut(&qi(0), &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(u.cut(&q(1, 4), &q(1, 4)).unwrap(), q(1, 2));
        assert_eq!(half_density().cut(&qi(0), &q(1, 2)).unwrap(), q(1, 4));
        assert!(matches!(
            u.cut(&q(1, 2), &q(3, 4)),
            Err(Error::InfeasibleCut { .. })
        ));
    }

    #[test]
    fn cut_is_leftmost_on_plateau() {
        let v = half_density();
        // All of [1/2, 1] has zero density, so the leftmost point of full mass is 1/2.
        assert_eq!(v.cut(&qi(0), &qi(1)).unwrap(), q(1, 2));
    }

    #[test]
    fn hungry_examples() {
        let h = half_density().make_hungry(&q(1, 2)).unwrap();
        assert_eq!(h.densities(), &[q(7, 4), q(1, 4)]);
        let h = half_density().make_hungry(&q(1, 1000)).unwrap();
        assert_eq!(h.densities()[1], q(5, 10000));
        let u = DensityValuation::uniform();
        assert_eq!(u.make_hungry(&q(1, 3)).unwrap().densities(), u.densities());
    }

    #[test]
    fn rejects_invalid() {
        assert!(DensityValuation::new(vec![qi(0), qi(1)], vec![qi(2)], qi(4)).is_err());
        assert!(DensityValuation::new(vec![qi(0), qi(1)], vec![qi(1)], q(1, 2)).is_err());
        assert!(DensityValuation::new(vec![qi(0), q(1, 2), q(1, 2), qi(1)], vec![qi(1); 3], qi(4))
            .is_err());
        assert!(DensityValuation::new(vec![q(1, 8), qi(1)], vec![qi(1)], qi(4)).is_err());
    }

    #[test]
    fn json_shape() {
        let v = half_density();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"breakpoints":["0","1/2","1"],"densities":["2","0"],"density_bound":"4"}"#
        );
        let back: DensityValuation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        let bad = r#"{"breakpoints":["0","1"],"densities":["2"],"density_bound":"4"}"#;
        assert!(serde_json::from_str::<DensityValuation>(bad).is_err());
    }
}
