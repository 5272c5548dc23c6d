//! Task reward functions and the real/hindsight trade-off weighting.
//!
//! Three reward shapes are supported: -1/0 (penalize failure), 0/+1 (reward
//! success), and the negative Euclidean distance to the goal. Rewards for
//! real and hindsight transitions are scaled by `lambda_r` and `lambda_h`
//! at storage time; a configuration is aggressive ("archer") when the
//! weighted hindsight reward dominates the weighted real reward, which flips
//! with the reward's sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::envs::euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    BinaryNegative,
    BinaryPositive,
    Shaped,
}

impl RewardKind {
    /// Sign of the reward's range: -1 for the non-positive kinds, +1 for the
    /// non-negative kind.
    fn sign(self) -> f64 {
        match self {
            RewardKind::BinaryNegative | RewardKind::Shaped => -1.0,
            RewardKind::BinaryPositive => 1.0,
        }
    }
}

/// Multipliers applied to real (`lambda_r`) and hindsight (`lambda_h`)
/// rewards at buffer-insertion time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeOff {
    pub lambda_r: f64,
    pub lambda_h: f64,
}

impl TradeOff {
    pub fn vanilla() -> Self {
        TradeOff {
            lambda_r: 1.0,
            lambda_h: 1.0,
        }
    }
}

/// How a `(reward kind, trade-off)` pair behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeOffClass {
    /// Weighted hindsight rewards dominate weighted real rewards.
    Archer,
    /// Both multipliers are exactly 1; plain hindsight replay.
    Vanilla,
    /// The dominance is reversed (or the multipliers are equal but not 1);
    /// amplifies rather than counters the replay bias. Permitted, used in
    /// ablations.
    AntiArcher,
}

/// Unweighted task reward for one transition, evaluated on the achieved goal.
pub fn base_reward(kind: RewardKind, achieved: &[f64], goal: &[f64], tolerance: f64) -> Result<f64> {
    if achieved.len() != goal.len() {
        return Err(Error::shape("base_reward goal", achieved.len(), goal.len()));
    }
    debug_assert!(tolerance > 0.0);
    let distance = euclidean(achieved, goal);
    Ok(match kind {
        RewardKind::BinaryNegative => {
            if distance > tolerance {
                -1.0
            } else {
                0.0
            }
        }
        RewardKind::BinaryPositive => {
            if distance > tolerance {
                0.0
            } else {
                1.0
            }
        }
        RewardKind::Shaped => -distance,
    })
}

/// Applies the storage-time multiplier: `lambda_h` for hindsight transitions,
/// `lambda_r` for real ones.
pub fn weighted_reward(tradeoff: &TradeOff, is_hindsight: bool, base: f64) -> f64 {
    if is_hindsight {
        tradeoff.lambda_h * base
    } else {
        tradeoff.lambda_r * base
    }
}

/// Classifies a trade-off configuration for the given reward kind.
///
/// For non-positive rewards the aggressive direction is `lambda_r > lambda_h`
/// (shrinking hindsight penalties); for the positive kind it is
/// `lambda_r < lambda_h` (inflating hindsight payoffs). Both multipliers must
/// be strictly positive.
pub fn validate_tradeoff(kind: RewardKind, tradeoff: &TradeOff) -> Result<TradeOffClass> {
    if !(tradeoff.lambda_r > 0.0 && tradeoff.lambda_h > 0.0)
        || !tradeoff.lambda_r.is_finite()
        || !tradeoff.lambda_h.is_finite()
    {
        return Err(Error::Config(format!(
            "trade-off multipliers must be finite and positive, got lambda_r={}, lambda_h={}",
            tradeoff.lambda_r, tradeoff.lambda_h
        )));
    }
    if tradeoff.lambda_r == 1.0 && tradeoff.lambda_h == 1.0 {
        return Ok(TradeOffClass::Vanilla);
    }
    let aggressive = if kind.sign() < 0.0 {
        tradeoff.lambda_r > tradeoff.lambda_h
    } else {
        tradeoff.lambda_r < tradeoff.lambda_h
    };
    Ok(if aggressive {
        TradeOffClass::Archer
    } else {
        TradeOffClass::AntiArcher
    })
}
