//! Goal-conditioned reinforcement learning with hindsight relabeling and
//! weighted-reward bias correction.
//!
//! The crate bundles a from-scratch MLP substrate ([`numcore`]), analytic
//! goal-reaching environments ([`envs`]), the task reward functions and
//! real/hindsight trade-off weighting ([`rewards`]), a ring replay buffer
//! with hindsight relabeling ([`replay`]), a DDPG actor-critic ([`agent`]),
//! and a multi-seed experiment harness ([`harness`]) exposed through the
//! `archer` binary.

pub mod error;
pub mod harness;
pub mod agent;
pub mod envs;
pub mod numcore;
pub mod replay;
pub mod rewards;

pub use error::{Error, Result};
