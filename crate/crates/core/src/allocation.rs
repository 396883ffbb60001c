use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, serde_qvec, Q};

/// Sorted cut points plus the owner of each of the `cuts.len() + 1` intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    #[serde(with = "serde_qvec")]
    pub cuts: Vec<Q>,
    pub assignment: Vec<usize>,
}

impl Allocation {
    pub fn new(cuts: Vec<Q>, assignment: Vec<usize>) -> Result<Self> {
        let a = Allocation { cuts, assignment };
        a.validate()?;
        Ok(a)
    }

    /// The single-piece allocation giving the whole cake to `party`.
    pub fn whole(party: usize) -> Self {
        Allocation {
            cuts: vec![],
            assignment: vec![party],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.assignment.len() != self.cuts.len() + 1 {
            return Err(Error::Structural(format!(
                "{} cuts need {} owners, got {}",
                self.cuts.len(),
                self.cuts.len() + 1,
                self.assignment.len()
            )));
        }
        let mut prev = Q::zero();
        for c in &self.cuts {
            if *c < prev || *c > Q::one() {
                return Err(Error::Structural(format!(
                    "cut {} out of order or outside [0,1]",
                    fmt_q(c)
                )));
            }
            prev = c.clone();
        }
        Ok(())
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    /// Interval endpoints `(lo, hi, owner)` in cake order.
    pub fn intervals(&self) -> Vec<(Q, Q, usize)> {
        let mut pts = Vec::with_capacity(self.cuts.len() + 2);
        pts.push(Q::zero());
        pts.extend(self.cuts.iter().cloned());
        pts.push(Q::one());
        pts.windows(2)
            .zip(&self.assignment)
            .map(|(w, &p)| (w[0].clone(), w[1].clone(), p))
            .collect()
    }
}
