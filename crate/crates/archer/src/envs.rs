//! Goal-conditioned environments: a 2-link planar reacher with closed-form
//! kinematics and a point-mass sanity environment.
//!
//! Both expose the same surface: `reset` draws a start state and a reachable
//! goal, `step` applies a bounded relative displacement, `achieved_goal` maps
//! state to goal space, and `is_success` is tolerance-ball membership around
//! the target.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which environment an experiment runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Reacher,
    PointGoal,
}

/// Geometry and episode parameters shared by both environments.
///
/// `l1`/`l2` are the reacher's link lengths; `workspace_half_width` bounds the
/// point-mass square. `max_displacement` scales a unit action into radians
/// (reacher) or meters (point mass) per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub l1: f64,
    pub l2: f64,
    pub workspace_half_width: f64,
    pub max_displacement: f64,
    pub success_tolerance: f64,
    pub episode_length: usize,
}

impl EnvSpec {
    pub fn reacher() -> Self {
        EnvSpec {
            kind: EnvKind::Reacher,
            l1: 0.5,
            l2: 0.5,
            workspace_half_width: 1.0,
            max_displacement: 0.1,
            success_tolerance: 0.05,
            episode_length: 50,
        }
    }

    pub fn point_goal() -> Self {
        EnvSpec {
            kind: EnvKind::PointGoal,
            l1: 0.5,
            l2: 0.5,
            workspace_half_width: 1.0,
            max_displacement: 0.1,
            success_tolerance: 0.05,
            episode_length: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.l1 > 0.0
            && self.l2 > 0.0
            && self.workspace_half_width > 0.0
            && self.max_displacement > 0.0
            && self.success_tolerance > 0.0
            && self.episode_length > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("environment spec fields must be positive".into()))
        }
    }

    /// Positions plus velocities: 4 for both environments.
    pub fn state_dim(&self) -> usize {
        4
    }

    /// Planar coordinates.
    pub fn goal_dim(&self) -> usize {
        2
    }

    /// One relative displacement per degree of freedom.
    pub fn action_dim(&self) -> usize {
        2
    }
}

/// Physical state, the episode's target goal, and the step counter.
///
/// The physical layout is `[q1, q2, v1, v2]` for the reacher (joint angles in
/// `(-pi, pi]` and per-step angular displacements) and `[x, y, vx, vy]` for
/// the point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalEnvState {
    pub physical: Vec<f64>,
    pub goal: Vec<f64>,
    pub step_index: usize,
}

/// Environment instance: the spec plus a diagnostics counter for actions that
/// arrived outside `[-1, 1]` and had to be clamped.
#[derive(Debug, Clone)]
pub struct GoalEnv {
    spec: EnvSpec,
    clamped_actions: u64,
}

impl GoalEnv {
    pub fn new(spec: EnvSpec) -> Result<Self> {
        spec.validate()?;
        Ok(GoalEnv {
            spec,
            clamped_actions: 0,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    /// How many action components have been clamped into `[-1, 1]` so far.
    pub fn clamped_actions(&self) -> u64 {
        self.clamped_actions
    }

    /// Draws an initial state and a reachable goal; velocities start at zero.
    ///
    /// Reacher goals are sampled in joint space and pushed through the
    /// forward kinematics, which keeps them inside the workspace annulus by
    /// construction. Point-mass goals are uniform over the square.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> GoalEnvState {
        match self.spec.kind {
            EnvKind::Reacher => {
                let mut angle = || wrap_angle(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                let q1 = angle();
                let q2 = angle();
                let g1 = angle();
                let g2 = angle();
                let goal = forward_kinematics(self.spec.l1, self.spec.l2, g1, g2);
                GoalEnvState {
                    physical: vec![q1, q2, 0.0, 0.0],
                    goal: goal.to_vec(),
                    step_index: 0,
                }
            }
            EnvKind::PointGoal => {
                let w = self.spec.workspace_half_width;
                let x = rng.random_range(-w..w);
                let y = rng.random_range(-w..w);
                let gx = rng.random_range(-w..w);
                let gy = rng.random_range(-w..w);
                GoalEnvState {
                    physical: vec![x, y, 0.0, 0.0],
                    goal: vec![gx, gy],
                    step_index: 0,
                }
            }
        }
    }

    /// Applies one relative displacement. Action components outside `[-1, 1]`
    /// are clamped and counted. Deterministic.
    pub fn step(&mut self, state: &GoalEnvState, action: &[f64]) -> Result<GoalEnvState> {
        if action.len() != self.spec.action_dim() {
            return Err(Error::shape("env action", self.spec.action_dim(), action.len()));
        }
        let mut a = [0.0; 2];
        for (i, &raw) in action.iter().enumerate() {
            let clamped = raw.clamp(-1.0, 1.0);
            if clamped != raw {
                self.clamped_actions += 1;
            }
            a[i] = clamped;
        }
        let d = self.spec.max_displacement;
        let physical = match self.spec.kind {
            EnvKind::Reacher => {
                let q1 = wrap_angle(state.physical[0] + d * a[0]);
                let q2 = wrap_angle(state.physical[1] + d * a[1]);
                vec![q1, q2, d * a[0], d * a[1]]
            }
            EnvKind::PointGoal => {
                let w = self.spec.workspace_half_width;
                let x = (state.physical[0] + d * a[0]).clamp(-w, w);
                let y = (state.physical[1] + d * a[1]).clamp(-w, w);
                vec![x, y, x - state.physical[0], y - state.physical[1]]
            }
        };
        Ok(GoalEnvState {
            physical,
            goal: state.goal.clone(),
            step_index: state.step_index + 1,
        })
    }

    /// The goal realized in `state`: end-effector position (reacher) or the
    /// position itself (point mass).
    pub fn achieved_goal(&self, state: &GoalEnvState) -> Vec<f64> {
        match self.spec.kind {
            EnvKind::Reacher => {
                forward_kinematics(self.spec.l1, self.spec.l2, state.physical[0], state.physical[1])
                    .to_vec()
            }
            EnvKind::PointGoal => vec![state.physical[0], state.physical[1]],
        }
    }

    /// True iff the achieved goal lies within the success tolerance of `goal`
    /// (boundary inclusive).
    pub fn is_success(&self, state: &GoalEnvState, goal: &[f64]) -> bool {
        let achieved = self.achieved_goal(state);
        euclidean(&achieved, goal) <= self.spec.success_tolerance
    }
}

/// End-effector position of a 2-link planar arm.
pub fn forward_kinematics(l1: f64, l2: f64, q1: f64, q2: f64) -> [f64; 2] {
    [
        l1 * q1.cos() + l2 * (q1 + q2).cos(),
        l1 * q1.sin() + l2 * (q1 + q2).sin(),
    ]
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(q: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = q % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn reset_is_deterministic_under_a_fixed_seed() {
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let a = env.reset(&mut ChaCha8Rng::seed_from_u64(77));
        let b = env.reset(&mut ChaCha8Rng::seed_from_u64(77));
        assert_eq!(a, b);
    }

    #[test]
    fn reacher_goals_stay_in_the_workspace_annulus() {
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let spec = env.spec().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inner = (spec.l1 - spec.l2).abs();
        let outer = spec.l1 + spec.l2;
        for _ in 0..10_000 {
            let s = env.reset(&mut rng);
            let r = (s.goal[0] * s.goal[0] + s.goal[1] * s.goal[1]).sqrt();
            assert!(r >= inner - 1e-12 && r <= outer + 1e-12, "goal radius {r}");
        }
    }

    #[test]
    fn point_goal_resets_stay_in_the_square() {
        let env = GoalEnv::new(EnvSpec::point_goal()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = env.spec().workspace_half_width;
        for _ in 0..1000 {
            let s = env.reset(&mut rng);
            assert!(s.goal.iter().all(|v| v.abs() <= w));
            assert!(s.physical[0].abs() <= w && s.physical[1].abs() <= w);
            assert_eq!(&s.physical[2..], &[0.0, 0.0]);
            assert_eq!(s.step_index, 0);
        }
    }

    #[test]
    fn zero_action_is_stationary() {
        let mut env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let s0 = env.reset(&mut ChaCha8Rng::seed_from_u64(3));
        let s1 = env.step(&s0, &[0.0, 0.0]).unwrap();
        assert_eq!(s1.physical[0], s0.physical[0]);
        assert_eq!(s1.physical[1], s0.physical[1]);
        assert_eq!(&s1.physical[2..], &[0.0, 0.0]);
        assert_eq!(s1.step_index, 1);
    }

    #[test]
    fn reacher_step_displaces_joints_proportionally() {
        let mut env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let state = GoalEnvState {
            physical: vec![0.0, 0.0, 0.0, 0.0],
            goal: vec![1.0, 0.0],
            step_index: 0,
        };
        let next = env.step(&state, &[1.0, 0.0]).unwrap();
        assert!((next.physical[0] - 0.1).abs() < 1e-15);
        assert_eq!(next.physical[1], 0.0);
        assert!((next.physical[2] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn repeated_fixed_action_matches_hand_unrolled_recurrence() {
        // Oracle: unroll q_{n} = q_{n-1} + d*a with wrap, independently of
        // the step implementation.
        let mut env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let mut state = GoalEnvState {
            physical: vec![0.3, -0.2, 0.0, 0.0],
            goal: vec![1.0, 0.0],
            step_index: 0,
        };
        let action = [0.7, -0.4];
        let d = env.spec().max_displacement;
        let mut q1 = 0.3;
        let mut q2 = -0.2;
        for n in 1..=60 {
            state = env.step(&state, &action).unwrap();
            q1 = wrap_angle(q1 + d * action[0]);
            q2 = wrap_angle(q2 + d * action[1]);
            assert_eq!(state.physical[0], q1, "step {n}");
            assert_eq!(state.physical[1], q2, "step {n}");
            assert_eq!(state.step_index, n);
        }
    }

    #[test]
    fn out_of_range_actions_are_clamped_and_counted() {
        let mut env = GoalEnv::new(EnvSpec::point_goal()).unwrap();
        let state = GoalEnvState {
            physical: vec![0.0, 0.0, 0.0, 0.0],
            goal: vec![0.5, 0.5],
            step_index: 0,
        };
        let next = env.step(&state, &[2.0, -3.0]).unwrap();
        assert_eq!(env.clamped_actions(), 2);
        assert!((next.physical[0] - 0.1).abs() < 1e-15);
        assert!((next.physical[1] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn fully_extended_arm_reaches_one_zero() {
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let state = GoalEnvState {
            physical: vec![0.0, 0.0, 0.0, 0.0],
            goal: vec![1.0, 0.0],
            step_index: 0,
        };
        let g = env.achieved_goal(&state);
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn arm_rotated_quarter_turn_reaches_zero_one() {
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let state = GoalEnvState {
            physical: vec![PI / 2.0, 0.0, 0.0, 0.0],
            goal: vec![0.0, 1.0],
            step_index: 0,
        };
        let g = env.achieved_goal(&state);
        assert!(g[0].abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bent_arm_matches_hand_evaluated_trig() {
        // q = (pi/2, pi/2), l1 = l2 = 0.5: x = 0.5*cos(pi/2) + 0.5*cos(pi) = -0.5,
        // y = 0.5*sin(pi/2) + 0.5*sin(pi) = 0.5.
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let state = GoalEnvState {
            physical: vec![PI / 2.0, PI / 2.0, 0.0, 0.0],
            goal: vec![0.0, 0.0],
            step_index: 0,
        };
        let g = env.achieved_goal(&state);
        assert!((g[0] + 0.5).abs() < 1e-12, "x {}", g[0]);
        assert!((g[1] - 0.5).abs() < 1e-12, "y {}", g[1]);
    }

    #[test]
    fn success_boundary_is_inclusive() {
        let env = GoalEnv::new(EnvSpec::point_goal()).unwrap();
        let tol = env.spec().success_tolerance;
        let state = GoalEnvState {
            physical: vec![0.0, 0.0, 0.0, 0.0],
            goal: vec![0.0, 0.0],
            step_index: 0,
        };
        assert!(env.is_success(&state, &[0.0, 0.0]));
        assert!(env.is_success(&state, &[tol, 0.0]));
        assert!(!env.is_success(&state, &[2.0 * tol, 0.0]));
    }

    #[test]
    fn success_predicate_agrees_with_the_metric() {
        let env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tol = env.spec().success_tolerance;
        for _ in 0..500 {
            let s = env.reset(&mut rng);
            let g: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = euclidean(&env.achieved_goal(&s), &g);
            assert_eq!(env.is_success(&s, &g), d <= tol);
        }
    }

    #[test]
    fn trajectories_are_bitwise_deterministic() {
        let spec = EnvSpec::reacher();
        let run = |seed: u64| {
            let mut env = GoalEnv::new(spec.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = env.reset(&mut rng);
            let mut trace = Vec::new();
            for _ in 0..50 {
                let action = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                state = env.step(&state, &action).unwrap();
                trace.extend_from_slice(&state.physical);
            }
            trace
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn end_effector_stays_in_annulus_and_finite_under_random_actions() {
        let mut env = GoalEnv::new(EnvSpec::reacher()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut state = env.reset(&mut rng);
        let outer = env.spec().l1 + env.spec().l2;
        for _ in 0..2000 {
            let action = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            state = env.step(&state, &action).unwrap();
            assert!(state.physical.iter().all(|v| v.is_finite()));
            let g = env.achieved_goal(&state);
            let r = (g[0] * g[0] + g[1] * g[1]).sqrt();
            assert!(r <= outer + 1e-12);
            assert!(state.physical[0] > -PI && state.physical[0] <= PI);
            assert!(state.physical[1] > -PI && state.physical[1] <= PI);
        }
    }
}
