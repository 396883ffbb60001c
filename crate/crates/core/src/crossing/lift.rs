//! Embedding `k` monotone instances that share Bob's sequence into a single
//! instance of size `k·m`, with only block `z` able to host a crossing.

use serde::{Deserialize, Serialize};

use super::MonCrossingInstance;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedInstance {
    pub instance: MonCrossingInstance,
    pub block_len: u64,
    pub z: u64,
}

impl LiftedInstance {
    /// Maps a crossing index of the lifted instance back into block `z`.
    pub fn back_map(&self, w: u64) -> Result<u64> {
        let start = (self.z - 1) * self.block_len;
        if w <= start || w > start + self.block_len {
            return Err(Error::ReductionContract(format!(
                "index {w} lies outside block {}",
                self.z
            )));
        }
        Ok(w - start)
    }
}

/// Alice's block `j` is shifted up by `(j−1)m`. Bob's sequence is `km`
/// before block `z`, 0 after it, and shifted by `(z−1)m` inside it; at the
/// two block boundaries the outer values win.
pub fn lift_pk(xs: &[Vec<u64>], y: &[u64], z: u64) -> Result<LiftedInstance> {
    let k = xs.len() as u64;
    if k == 0 || z == 0 || z > k {
        return Err(Error::MalformedInstance(format!(
            "need 1 <= z <= k, got z = {z}, k = {k}"
        )));
    }
    let m = y.len() as u64 - 1;
    for xj in xs {
        MonCrossingInstance::new(m, m, xj.clone(), y.to_vec())?;
    }
    let n = k * m;
    let mut big_x = vec![0u64; n as usize + 1];
    for (j, xj) in xs.iter().enumerate() {
        for (i, &v) in xj.iter().enumerate() {
            big_x[j * m as usize + i] = v + j as u64 * m;
        }
    }
    let (lo, hi) = ((z - 1) * m, z * m);
    let big_y = (0..=n)
        .map(|w| {
            if w <= lo {
                n
            } else if w >= hi {
                0
            } else {
                y[(w - lo) as usize] + lo
            }
        })
        .collect();
    Ok(LiftedInstance {
        instance: MonCrossingInstance::new(n, n, big_x, big_y)?,
        block_len: m,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_formula() {
        let xs = vec![vec![0, 1, 2], vec![0, 2, 2]];
        let lifted = lift_pk(&xs, &[2, 1, 0], 1).unwrap();
        assert_eq!(lifted.instance.x, vec![0, 1, 2, 4, 4]);
        assert_eq!(lifted.instance.y, vec![4, 1, 0, 0, 0]);
        assert_eq!(lifted.back_map(1).unwrap(), 1);
        assert!(lifted.back_map(3).is_err());
    }

    #[test]
    fn rejects_bad_z() {
        let xs = vec![vec![0, 1]];
        assert!(lift_pk(&xs, &[1, 0], 0).is_err());
        assert!(lift_pk(&xs, &[1, 0], 2).is_err());
    }
}
