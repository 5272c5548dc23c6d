//! Ring replay buffer with uniform minibatch sampling, plus the two hindsight
//! relabeling strategies (terminal-state goals and future-state goals).
//!
//! Rewards are weighted before a transition is stored, so buffer contents are
//! self-describing: the `is_hindsight` flag records which multiplier was
//! applied.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rewards::{base_reward, weighted_reward, RewardKind, TradeOff};

/// One experience tuple. `state`/`next_state` hold the physical state; the
/// goal is kept separate and concatenated at network-input time.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub goal: Vec<f64>,
    pub action: Vec<f64>,
    /// Already multiplied by its lambda.
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub is_hindsight: bool,
    pub success: bool,
}

/// A complete episode: its real transitions in order, plus the goal achieved
/// after each step (`achieved[t]` is the goal realized in `next_state` of
/// transition `t`).
#[derive(Debug, Clone)]
pub struct Episode {
    transitions: Vec<Transition>,
    achieved: Vec<Vec<f64>>,
}

impl Episode {
    pub fn new(transitions: Vec<Transition>, achieved: Vec<Vec<f64>>) -> Result<Self> {
        if transitions.len() != achieved.len() {
            return Err(Error::shape(
                "episode achieved goals",
                transitions.len(),
                achieved.len(),
            ));
        }
        if transitions.is_empty() {
            return Err(Error::Config("episode must contain at least one step".into()));
        }
        Ok(Episode {
            transitions,
            achieved,
        })
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn achieved_goals(&self) -> &[Vec<f64>] {
        &self.achieved
    }

    /// Sum of stored (already weighted) rewards.
    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// Fixed-capacity ring: once full, the oldest entry is overwritten.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    cursor: usize,
    total_pushes: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayBuffer {
            capacity,
            storage: Vec::new(),
            cursor: 0,
            total_pushes: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_pushes(&self) -> u64 {
        self.total_pushes
    }

    /// Evictions so far: pushes beyond capacity overwrite the oldest entry.
    pub fn evictions(&self) -> u64 {
        self.total_pushes.saturating_sub(self.capacity as u64)
    }

    pub fn push(&mut self, transition: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(transition);
        } else {
            self.storage[self.cursor] = transition;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        self.total_pushes += 1;
    }

    /// Draws `n` transitions uniformly with replacement.
    pub fn sample_minibatch<'a, R: Rng + ?Sized>(
        &'a self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<&'a Transition>> {
        if self.storage.is_empty() {
            return Err(Error::NotReady("sampling an empty replay buffer"));
        }
        Ok((0..n)
            .map(|_| &self.storage[rng.random_range(0..self.storage.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    /// Debug dump, one transition per row.
    pub fn dump_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if let Some(first) = self.storage.first() {
            let mut header = Vec::new();
            for i in 0..first.state.len() {
                header.push(format!("state_{i}"));
            }
            for i in 0..first.goal.len() {
                header.push(format!("goal_{i}"));
            }
            for i in 0..first.action.len() {
                header.push(format!("action_{i}"));
            }
            header.push("reward".into());
            for i in 0..first.next_state.len() {
                header.push(format!("next_state_{i}"));
            }
            header.push("is_hindsight".into());
            writeln!(w, "{}", header.join(","))?;
        }
        for t in &self.storage {
            let mut row: Vec<String> = Vec::new();
            row.extend(t.state.iter().map(|v| v.to_string()));
            row.extend(t.goal.iter().map(|v| v.to_string()));
            row.extend(t.action.iter().map(|v| v.to_string()));
            row.push(t.reward.to_string());
            row.extend(t.next_state.iter().map(|v| v.to_string()));
            row.push(t.is_hindsight.to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Relabels every step of an episode against the goal achieved at the final
/// step. Rewards are recomputed and weighted by `lambda_h`; state, action,
/// and next state are copied unchanged.
pub fn relabel_final(
    episode: &Episode,
    kind: RewardKind,
    tradeoff: &TradeOff,
    tolerance: f64,
) -> Result<Vec<Transition>> {
    let hindsight_goal = episode
        .achieved
        .last()
        .expect("episode is non-empty by construction");
    episode
        .transitions
        .iter()
        .zip(&episode.achieved)
        .map(|(t, achieved)| hindsight_transition(t, achieved, hindsight_goal, kind, tradeoff, tolerance))
        .collect()
}

/// For each step `t`, draws `k` goals from the achieved goals at steps
/// `t..T-1` of the same episode (the step's own outcome counts), emitting
/// `k` hindsight transitions per step.
pub fn relabel_future<R: Rng + ?Sized>(
    episode: &Episode,
    k: usize,
    kind: RewardKind,
    tradeoff: &TradeOff,
    tolerance: f64,
    rng: &mut R,
) -> Result<Vec<Transition>> {
    if k == 0 {
        return Err(Error::Config("future strategy needs k >= 1".into()));
    }
    let len = episode.len();
    let mut out = Vec::with_capacity(k * len);
    for (t, (transition, achieved)) in episode
        .transitions
        .iter()
        .zip(&episode.achieved)
        .enumerate()
    {
        for _ in 0..k {
            let j = rng.random_range(t..len);
            out.push(hindsight_transition(
                transition,
                achieved,
                &episode.achieved[j],
                kind,
                tradeoff,
                tolerance,
            )?);
        }
    }
    Ok(out)
}

fn hindsight_transition(
    source: &Transition,
    achieved: &[f64],
    hindsight_goal: &[f64],
    kind: RewardKind,
    tradeoff: &TradeOff,
    tolerance: f64,
) -> Result<Transition> {
    let base = base_reward(kind, achieved, hindsight_goal, tolerance)?;
    let distance_ok = crate::envs::euclidean(achieved, hindsight_goal) <= tolerance;
    Ok(Transition {
        state: source.state.clone(),
        goal: hindsight_goal.to_vec(),
        action: source.action.clone(),
        reward: weighted_reward(tradeoff, true, base),
        next_state: source.next_state.clone(),
        is_hindsight: true,
        success: distance_ok,
    })
}
