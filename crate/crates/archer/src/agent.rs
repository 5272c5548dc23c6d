//! DDPG actor-critic: target networks, Ornstein-Uhlenbeck exploration,
//! temporal-difference critic targets, and soft target updates.
//!
//! The actor maps `state || goal` to a tanh-bounded action; the critic maps
//! `state || goal || action` to a scalar value. Stored rewards already carry
//! their real/hindsight multiplier, so the TD target is simply
//! `r + gamma * Q'(s' || g, mu'(s' || g))`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numcore::{
    adam_step, fanin_init, final_layer_init, mlp_backward, mlp_forward, uniform_vec, Activation,
    AdamState, Layer, MlpGradients, MlpParams,
};
use crate::replay::Transition;

/// Ornstein-Uhlenbeck exploration noise with a decaying output scale.
///
/// The internal state relaxes toward zero at rate `theta` and is excited by
/// Gaussian increments of magnitude `sigma`; samples are multiplied by
/// `epsilon` before being added to actions.
#[derive(Debug, Clone)]
pub struct OuNoise {
    state: Vec<f64>,
    pub theta: f64,
    pub sigma: f64,
    epsilon: f64,
    pub epsilon_decay: f64,
}

impl OuNoise {
    pub const DEFAULT_THETA: f64 = 0.15;
    pub const DEFAULT_SIGMA: f64 = 0.2;
    pub const DEFAULT_EPSILON: f64 = 0.1;
    pub const DEFAULT_EPSILON_DECAY: f64 = 0.99;

    pub fn new(action_dim: usize, theta: f64, sigma: f64, epsilon: f64, epsilon_decay: f64) -> Self {
        OuNoise {
            state: vec![0.0; action_dim],
            theta,
            sigma,
            epsilon,
            epsilon_decay,
        }
    }

    pub fn with_defaults(action_dim: usize) -> Self {
        Self::new(
            action_dim,
            Self::DEFAULT_THETA,
            Self::DEFAULT_SIGMA,
            Self::DEFAULT_EPSILON,
            Self::DEFAULT_EPSILON_DECAY,
        )
    }

    /// Advances the process one step and returns the new state:
    /// `x <- x + theta * (0 - x) + sigma * eta`, `eta ~ N(0, 1)` per component.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        for x in &mut self.state {
            let eta: f64 = rng.sample(StandardNormal);
            *x = *x + self.theta * (0.0 - *x) + self.sigma * eta;
        }
        self.state.clone()
    }

    /// Zeroes the process state; called at every episode start. The output
    /// scale `epsilon` is untouched (it decays per cycle, not per episode).
    pub fn reset_state(&mut self) {
        self.state.fill(0.0);
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    /// Shrinks the exploration scale: `epsilon <- epsilon * decay`.
    pub fn decay_epsilon(&mut self) {
        self.epsilon *= self.epsilon_decay;
    }
}

/// Shapes and hyperparameters needed to build a fresh agent.
#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub state_dim: usize,
    pub goal_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

impl AgentSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.state_dim >= 1
            && self.goal_dim >= 1
            && self.action_dim >= 1
            && self.gamma > 0.0
            && self.gamma < 1.0
            && self.tau > 0.0
            && self.tau < 1.0
            && self.actor_lr > 0.0
            && self.critic_lr > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("invalid agent hyperparameters".into()))
        }
    }
}

/// Loss values observed on a batch before the corresponding updates applied.
#[derive(Debug, Clone, Copy)]
pub struct TrainStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

/// DDPG networks plus optimizer state.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub actor: MlpParams,
    pub critic: MlpParams,
    pub target_actor: MlpParams,
    pub target_critic: MlpParams,
    pub actor_adam: AdamState,
    pub critic_adam: AdamState,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

/// Builds one network: fan-in initialized hidden ReLU layers, small-uniform
/// initialized output layer. Biases share their layer's init range.
fn build_network<R: Rng + ?Sized>(
    input_dim: usize,
    hidden: &[usize],
    output_dim: usize,
    output_activation: Activation,
    rng: &mut R,
) -> Result<MlpParams> {
    let mut dims = vec![input_dim];
    dims.extend_from_slice(hidden);
    dims.push(output_dim);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let (rows, cols) = (dims[i + 1], dims[i]);
        let last = i == dims.len() - 2;
        let (weight, bound) = if last {
            (final_layer_init(rows, cols, rng), 3e-3)
        } else {
            (fanin_init(rows, cols, rng), 1.0 / (cols as f64).sqrt())
        };
        let bias = uniform_vec(rows, bound, rng);
        let activation = if last { output_activation } else { Activation::Relu };
        layers.push(Layer::new(weight, bias, activation)?);
    }
    MlpParams::new(layers)
}

fn concat2(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn concat3(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len() + c.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v.extend_from_slice(c);
    v
}

impl DdpgAgent {
    /// Fresh agent with target networks initialized as exact copies.
    pub fn new<R: Rng + ?Sized>(spec: &AgentSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let actor = build_network(
            spec.state_dim + spec.goal_dim,
            &spec.hidden,
            spec.action_dim,
            Activation::Tanh,
            rng,
        )?;
        let critic = build_network(
            spec.state_dim + spec.goal_dim + spec.action_dim,
            &spec.hidden,
            1,
            Activation::Linear,
            rng,
        )?;
        let actor_adam = AdamState::new(&actor);
        let critic_adam = AdamState::new(&critic);
        Ok(DdpgAgent {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            actor_adam,
            critic_adam,
            gamma: spec.gamma,
            tau: spec.tau,
            actor_lr: spec.actor_lr,
            critic_lr: spec.critic_lr,
        })
    }

    /// Actor forward on `state || goal`, optionally perturbed by scaled OU
    /// noise and clamped back into `[-1, 1]`. Pass no noise when evaluating.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: &[f64],
        goal: &[f64],
        noise: Option<&mut OuNoise>,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let input = concat2(state, goal);
        let (mut action, _) = mlp_forward(&self.actor, &input)?;
        if let Some(noise) = noise {
            let epsilon = noise.epsilon();
            let sample = noise.step(rng);
            if sample.len() != action.len() {
                return Err(Error::shape("noise dimension", action.len(), sample.len()));
            }
            for (a, n) in action.iter_mut().zip(sample) {
                *a = (*a + epsilon * n).clamp(-1.0, 1.0);
            }
        }
        Ok(action)
    }

    /// TD targets from the target networks:
    /// `y_i = r_i + gamma * Q'(s'_i || g_i, mu'(s'_i || g_i))`.
    ///
    /// Stored rewards already carry their lambda weight. The online networks
    /// are never consulted, so no gradient can flow through the targets.
    pub fn critic_targets(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        let mut targets = Vec::with_capacity(batch.len());
        for t in batch {
            let next_input = concat2(&t.next_state, &t.goal);
            let (next_action, _) = mlp_forward(&self.target_actor, &next_input)?;
            let critic_input = concat3(&t.next_state, &t.goal, &next_action);
            let (q_next, _) = mlp_forward(&self.target_critic, &critic_input)?;
            targets.push(t.reward + self.gamma * q_next[0]);
        }
        Ok(targets)
    }

    /// Mean squared TD error and its gradient with respect to the online
    /// critic, holding the targets fixed.
    pub fn critic_loss_and_grads(
        &self,
        batch: &[&Transition],
        targets: &[f64],
    ) -> Result<(f64, MlpGradients)> {
        let n = batch.len() as f64;
        let mut grads = MlpGradients::zeros_like(&self.critic);
        let mut loss = 0.0;
        for (t, &y) in batch.iter().zip(targets) {
            let input = concat3(&t.state, &t.goal, &t.action);
            let (q, cache) = mlp_forward(&self.critic, &input)?;
            let err = q[0] - y;
            loss += err * err;
            let bp = mlp_backward(&self.critic, &cache, &[2.0 * err / n])?;
            grads.accumulate(&bp.grads);
        }
        Ok((loss / n, grads))
    }

    /// Mean critic value of the actor's own actions and the gradient of its
    /// negation with respect to the actor. The critic only routes the
    /// gradient; its parameter gradients are discarded.
    pub fn actor_objective_and_grads(&self, batch: &[&Transition]) -> Result<(f64, MlpGradients)> {
        let n = batch.len() as f64;
        let mut grads = MlpGradients::zeros_like(&self.actor);
        let mut objective = 0.0;
        let sg_dim = batch[0].state.len() + batch[0].goal.len();
        for t in batch {
            let actor_input = concat2(&t.state, &t.goal);
            let (action, actor_cache) = mlp_forward(&self.actor, &actor_input)?;
            let critic_input = concat3(&t.state, &t.goal, &action);
            let (q, critic_cache) = mlp_forward(&self.critic, &critic_input)?;
            objective += q[0];
            // d(-J)/dQ = -1/n, routed through the critic input to the action slice.
            let bp = mlp_backward(&self.critic, &critic_cache, &[-1.0 / n])?;
            let d_action = &bp.input_grad[sg_dim..];
            let abp = mlp_backward(&self.actor, &actor_cache, d_action)?;
            grads.accumulate(&abp.grads);
        }
        Ok((objective / n, grads))
    }

    /// One optimization step on a minibatch: critic first (MSE against the
    /// TD targets), then the actor (ascent on the updated critic). Returns
    /// the losses observed before the respective updates.
    pub fn train_step(&mut self, batch: &[&Transition]) -> Result<TrainStats> {
        assert!(!batch.is_empty(), "train_step needs a non-empty batch");
        let targets = self.critic_targets(batch)?;
        let (critic_loss, critic_grads) = self.critic_loss_and_grads(batch, &targets)?;
        if !critic_loss.is_finite() {
            return Err(Error::Numeric("critic loss"));
        }
        adam_step(
            &mut self.critic,
            &critic_grads,
            &mut self.critic_adam,
            self.critic_lr,
        )?;

        let (actor_objective, actor_grads) = self.actor_objective_and_grads(batch)?;
        if !actor_objective.is_finite() {
            return Err(Error::Numeric("actor objective"));
        }
        adam_step(
            &mut self.actor,
            &actor_grads,
            &mut self.actor_adam,
            self.actor_lr,
        )?;

        Ok(TrainStats {
            critic_loss,
            actor_objective,
        })
    }

    /// Conservative target tracking: `theta' <- tau * theta + (1 - tau) * theta'`
    /// elementwise, for both target networks.
    pub fn soft_update(&mut self) {
        soft_update_params(&self.actor, &mut self.target_actor, self.tau);
        soft_update_params(&self.critic, &mut self.target_critic, self.tau);
    }
}

fn soft_update_params(source: &MlpParams, target: &mut MlpParams, tau: f64) {
    for (src, dst) in source.layers().iter().zip(target.layers_mut()) {
        for (s, d) in src.weight.data().iter().zip(dst.weight.data_mut()) {
            *d = tau * *s + (1.0 - tau) * *d;
        }
        for (s, d) in src.bias.iter().zip(dst.bias.iter_mut()) {
            *d = tau * *s + (1.0 - tau) * *d;
        }
    }
}
