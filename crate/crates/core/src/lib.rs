//! Strategic voting inside a negotiating team.
//!
//! A team aggregates its members' rankings with a positional scoring rule,
//! then bargains with another party under alternating offers and vetoes.
//! This crate computes the bargaining outcome, decides whether team members
//! can steer it by misreporting, and checks those decisions against
//! exhaustive search.

pub mod error;
pub mod experiment;
pub mod instance;
pub mod manipulation;
pub mod negotiation;
pub mod oracle;
pub mod voting;

pub use error::{Error, Result};
pub use instance::{parse_instance, Instance};
pub use manipulation::{
    c_manego, cc_manego, d_manego, dc_manego, h_set, solve, verify, Decision, GateMode, HSet, IterationRecord,
    ManipulationQuery, ManipulationResult, Mode, StageRecord,
};
pub use negotiation::{top_set, NegotiationInstance, Party, RcResult};
pub use oracle::{
    brute_force, permutation_sum, spe_unmemoized, ud_sets, OracleLimits, OracleOutcome, PermutationSumInstance, UdTrace,
};
pub use voting::{aggregate, position, realize_vector, swf, Order, Outcome, Profile, Rule, ScoreTable};
