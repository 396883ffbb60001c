//! Bit-metered simulation of cake-cutting communication protocols.

pub mod allocation;
pub mod comm;
pub mod crossing;
pub mod error;
pub mod experiment;
pub mod movingknife;
pub mod oracle;
pub mod protocols;
pub mod rational;
pub mod valuation;

pub use allocation::Allocation;
pub use comm::{Bits, CostProfile, Message, PartyId, PublicCoins, Transcript};
pub use error::{Error, Result};
pub use rational::Q;
pub use valuation::{
    simplify, simplify_lazy, CakePoint, DensityValuation, GridValuation, LazySimple, Query,
    SimpleValuation, Valuation,
};
