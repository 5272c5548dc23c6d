//! Agent checkpoints: the four networks concatenated in the flat binary
//! snapshot format, plus a JSON sidecar carrying scalars and the environment
//! spec so `eval` can run standalone.
//!
//! Record order in the binary file: actor, critic, target actor, target
//! critic.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{DdpgAgent, OuNoise};
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::numcore::{read_params, write_params, Activation, AdamState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSidecar {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub epsilon: f64,
    pub epsilon_decay: f64,
    pub actor_steps: u64,
    pub critic_steps: u64,
    pub hidden_layers: usize,
    pub env: EnvSpec,
}

pub struct Checkpoint {
    pub agent: DdpgAgent,
    pub noise: OuNoise,
    pub env_spec: EnvSpec,
}

fn sidecar_path(bin_path: &Path) -> PathBuf {
    bin_path.with_extension("json")
}

/// Writes `<stem>.bin` and `<stem>.json` next to each other.
pub fn save_checkpoint(
    bin_path: &Path,
    agent: &DdpgAgent,
    noise: &OuNoise,
    env_spec: &EnvSpec,
) -> Result<()> {
    let mut bin = Vec::new();
    write_params(&agent.actor, &mut bin)?;
    write_params(&agent.critic, &mut bin)?;
    write_params(&agent.target_actor, &mut bin)?;
    write_params(&agent.target_critic, &mut bin)?;
    std::fs::write(bin_path, bin)?;

    let sidecar = CheckpointSidecar {
        gamma: agent.gamma,
        tau: agent.tau,
        actor_lr: agent.actor_lr,
        critic_lr: agent.critic_lr,
        epsilon: noise.epsilon(),
        epsilon_decay: noise.epsilon_decay,
        actor_steps: agent.actor_adam.step_count(),
        critic_steps: agent.critic_adam.step_count(),
        hidden_layers: agent.actor.layers().len() - 1,
        env: env_spec.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(sidecar_path(bin_path), json + "\n")?;
    Ok(())
}

/// Loads a checkpoint pair. Adam moments are not persisted; step counters
/// are restored so further diagnostics stay consistent.
pub fn load_checkpoint(bin_path: &Path) -> Result<Checkpoint> {
    let sidecar_text = std::fs::read_to_string(sidecar_path(bin_path))?;
    let sidecar: CheckpointSidecar = serde_json::from_str(&sidecar_text)?;
    sidecar.env.validate()?;

    let actor_acts: Vec<Activation> = stack(sidecar.hidden_layers, Activation::Tanh);
    let critic_acts: Vec<Activation> = stack(sidecar.hidden_layers, Activation::Linear);

    let bytes = std::fs::read(bin_path)?;
    let mut cursor = bytes.as_slice();
    let actor = read_params(&mut cursor, &actor_acts)?;
    let critic = read_params(&mut cursor, &critic_acts)?;
    let target_actor = read_params(&mut cursor, &actor_acts)?;
    let target_critic = read_params(&mut cursor, &critic_acts)?;
    if !cursor.is_empty() {
        return Err(Error::Snapshot(format!(
            "{} trailing bytes after four records",
            cursor.len()
        )));
    }

    let mut actor_adam = AdamState::new(&actor);
    actor_adam.set_step_count(sidecar.actor_steps);
    let mut critic_adam = AdamState::new(&critic);
    critic_adam.set_step_count(sidecar.critic_steps);

    let agent = DdpgAgent {
        actor,
        critic,
        target_actor,
        target_critic,
        actor_adam,
        critic_adam,
        gamma: sidecar.gamma,
        tau: sidecar.tau,
        actor_lr: sidecar.actor_lr,
        critic_lr: sidecar.critic_lr,
    };
    let mut noise = OuNoise::with_defaults(sidecar.env.action_dim());
    noise.set_epsilon(sidecar.epsilon);
    Ok(Checkpoint {
        agent,
        noise,
        env_spec: sidecar.env,
    })
}

fn stack(hidden_layers: usize, output: Activation) -> Vec<Activation> {
    let mut acts = vec![Activation::Relu; hidden_layers];
    acts.push(output);
    acts
}
