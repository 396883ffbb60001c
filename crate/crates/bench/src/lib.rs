//! Wall-clock benchmarks for the protocol simulator; see `benches/`.
