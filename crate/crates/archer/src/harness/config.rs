//! Experiment configuration: JSON-backed, with defaults matching the
//! published training setup. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::AgentSpec;
use crate::envs::{EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::rewards::{validate_tradeoff, RewardKind, TradeOff, TradeOffClass};

/// How hindsight goals are chosen. `None` disables hindsight storage
/// entirely (plain DDPG baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Final,
    Future,
    None,
}

fn default_env() -> EnvKind {
    EnvKind::Reacher
}
fn default_reward() -> RewardKind {
    RewardKind::BinaryNegative
}
fn one() -> f64 {
    1.0
}
fn default_k() -> usize {
    4
}
fn default_cycles() -> usize {
    300
}
fn default_episodes_per_cycle() -> usize {
    16
}
fn default_opt_steps() -> usize {
    40
}
fn default_batch_size() -> usize {
    128
}
fn default_buffer_capacity() -> usize {
    100_000
}
fn default_gamma() -> f64 {
    0.98
}
fn default_tau() -> f64 {
    0.001
}
fn default_actor_lr() -> f64 {
    1e-4
}
fn default_critic_lr() -> f64 {
    1e-3
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_epsilon_decay() -> f64 {
    0.99
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}
fn default_tolerance() -> f64 {
    0.05
}
fn default_episode_length() -> usize {
    50
}
fn default_link_length() -> f64 {
    0.5
}
fn default_max_displacement() -> f64 {
    0.1
}
fn default_workspace_half_width() -> f64 {
    1.0
}
fn default_hidden_sizes() -> Vec<usize> {
    vec![400, 300]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Everything one experiment run needs. Every field has a default, so a
/// partial JSON file is enough; unknown keys fail loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_env")]
    pub env: EnvKind,
    #[serde(default = "default_reward")]
    pub reward: RewardKind,
    #[serde(default = "one")]
    pub lambda_r: f64,
    #[serde(default = "one")]
    pub lambda_h: f64,
    #[serde(default)]
    pub strategy: Strategy,
    /// Hindsight goals drawn per step under the future strategy.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    #[serde(default = "default_episodes_per_cycle")]
    pub episodes_per_cycle: usize,
    #[serde(default = "default_opt_steps")]
    pub opt_steps_per_cycle: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_buffer_capacity")]
    pub buffer_capacity: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_actor_lr")]
    pub actor_lr: f64,
    #[serde(default = "default_critic_lr")]
    pub critic_lr: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_epsilon_decay")]
    pub epsilon_decay: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_episode_length")]
    pub episode_length: usize,
    #[serde(default = "default_link_length")]
    pub l1: f64,
    #[serde(default = "default_link_length")]
    pub l2: f64,
    #[serde(default = "default_max_displacement")]
    pub max_displacement: f64,
    #[serde(default = "default_workspace_half_width")]
    pub workspace_half_width: f64,
    #[serde(default = "default_hidden_sizes")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn tradeoff(&self) -> TradeOff {
        TradeOff {
            lambda_r: self.lambda_r,
            lambda_h: self.lambda_h,
        }
    }

    /// Checks ranges and classifies the trade-off configuration.
    pub fn validate(&self) -> Result<TradeOffClass> {
        let counts_ok = self.cycles >= 1
            && self.episodes_per_cycle >= 1
            && self.opt_steps_per_cycle >= 1
            && self.batch_size >= 1
            && self.buffer_capacity >= 1
            && self.episode_length >= 1;
        if !counts_ok {
            return Err(Error::Config("all counts must be >= 1".into()));
        }
        if self.strategy == Strategy::Future && self.k == 0 {
            return Err(Error::Config("future strategy needs k >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1), got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must be in (0, 1), got {}", self.tau)));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if self.epsilon < 0.0 || !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(Error::Config("invalid exploration scale or decay".into()));
        }
        self.env_spec().validate()?;
        validate_tradeoff(self.reward, &self.tradeoff())
    }

    pub fn env_spec(&self) -> EnvSpec {
        EnvSpec {
            kind: self.env,
            l1: self.l1,
            l2: self.l2,
            workspace_half_width: self.workspace_half_width,
            max_displacement: self.max_displacement,
            success_tolerance: self.tolerance,
            episode_length: self.episode_length,
        }
    }

    pub fn agent_spec(&self) -> AgentSpec {
        let env = self.env_spec();
        AgentSpec {
            state_dim: env.state_dim(),
            goal_dim: env.goal_dim(),
            action_dim: env.action_dim(),
            hidden: self.hidden_sizes.clone(),
            gamma: self.gamma,
            tau: self.tau,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
        }
    }

    /// SHA-256 of the canonical JSON form, hex-encoded. Stable across runs.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
