//! Two-stage duopoly model of mobile network operators.
//!
//! Operators first choose network capacity (a simultaneous capacity game),
//! then compete on price in a sequential game. Users are described by a
//! single type `α ∈ [0, 1]` that is both their willingness to pay and their
//! QoS requirement; QoS degrades linearly with congestion.
//!
//! * [`market`] solves user demand for a pair of prices.
//! * [`bertrand`] holds best responses, the unregulated price war and the
//!   price-change-limit regulation.
//! * [`cournot`] solves the capacity stage and the joint equilibrium.
//! * [`regulator`] evaluates tax and subsidy policies.
//! * [`oracle`] contains brute-force references used to check the above.

pub mod bertrand;
pub mod cournot;
mod error;
pub mod market;
pub mod oracle;
pub mod regulator;

pub use error::{MarketError, Result};
pub use market::{MarketOutcome, MarketParams, Operator, UserTypeDistribution};
