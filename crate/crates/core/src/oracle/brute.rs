use crate::crossing::valid_index;

/// Every index `i ∈ 1..=m` satisfying either flip pattern, by linear scan.
pub fn brute_crossing(x: &[u64], y: &[u64]) -> Vec<u64> {
    assert_eq!(x.len(), y.len(), "sequences differ in length");
    (1..x.len() as u64).filter(|&i| valid_index(x, y, i)).collect()
}
