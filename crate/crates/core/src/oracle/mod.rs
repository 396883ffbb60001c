//! Ground truth: exact fairness checkers, brute-force crossing, hard
//! instance generators with their back-maps, and random valuations.

mod brute;
mod fair;
mod hard;
mod random;

pub use brute::brute_crossing;
pub use fair::{check_fair, value_matrix, FairnessNotion, FairnessReport, Notion};
pub use hard::{
    equitable_threshold, gen_equitable_hard, gen_perfect_hard, perfect_threshold,
    recover_crossing_index, recover_equitable, recover_perfect, Reduction,
};
pub use random::{random_crossing, random_hungry_valuation, random_mon_crossing, random_valuation};
