//! The outer training loop: episode generation, real + hindsight storage,
//! optimization cycles, multi-seed evaluation, smoothing, and artifact
//! emission.
//!
//! Every run derives independent, named RNG streams from its seed (network
//! init, environment resets, exploration noise, buffer sampling, evaluation),
//! so toggling one feature never shifts the random draws of another and
//! reruns are byte-identical. Seeds are embarrassingly parallel: with the
//! `parallel` feature the per-seed runs execute on a rayon pool, and results
//! are reduced in seed order either way.

pub mod checkpoint;
pub mod config;
pub mod plot;
pub mod record;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointSidecar};
pub use config::{ExperimentConfig, Strategy};
pub use record::{
    cycles_to_threshold, median_cycles, read_record_csv, CycleRow, RunRecord, RunSummary,
    CSV_HEADER,
};

use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{DdpgAgent, OuNoise};
use crate::envs::GoalEnv;
use crate::error::{Error, Result};
use crate::replay::{relabel_final, relabel_future, Episode, ReplayBuffer, Transition};
use crate::rewards::{base_reward, weighted_reward, RewardKind, TradeOff};

/// Noise-free evaluation episodes after every cycle.
pub const EVAL_EPISODES: usize = 20;
/// Trailing window for smoothed success curves.
pub const SMOOTH_WINDOW: usize = 50;
/// Smoothed success rate that counts as "learned" in summaries.
pub const SUCCESS_THRESHOLD: f64 = 0.8;

const STREAM_INIT: u64 = 0;
const STREAM_ENV: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_BUFFER: u64 = 3;
const STREAM_EVAL: u64 = 4;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent RNG streams owned by one seed's run.
pub struct SeedStreams {
    pub env: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub buffer: ChaCha8Rng,
    pub eval: ChaCha8Rng,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        SeedStreams {
            env: stream_rng(seed, STREAM_ENV),
            noise: stream_rng(seed, STREAM_NOISE),
            buffer: stream_rng(seed, STREAM_BUFFER),
            eval: stream_rng(seed, STREAM_EVAL),
        }
    }
}

/// Runner switches that are not part of the experiment configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Store raw task rewards, ignoring the configured multipliers. Used to
    /// check that unit multipliers reproduce the unweighted code path
    /// bit for bit.
    pub bypass_weighting: bool,
}

impl RunOptions {
    fn effective_tradeoff(&self, config: &ExperimentConfig) -> TradeOff {
        if self.bypass_weighting {
            TradeOff::vanilla()
        } else {
            config.tradeoff()
        }
    }
}

/// Rolls out one episode with the behavior policy and packages it for
/// storage: real goal, real rewards already weighted by `lambda_r`.
///
/// Environment resets draw from `env_rng`; exploration noise draws from
/// `noise_rng`. The OU process is zeroed at the episode start.
pub fn run_episode<R1, R2>(
    env: &mut GoalEnv,
    agent: &DdpgAgent,
    mut noise: Option<&mut OuNoise>,
    kind: RewardKind,
    tradeoff: &TradeOff,
    env_rng: &mut R1,
    noise_rng: &mut R2,
) -> Result<Episode>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    if let Some(noise) = noise.as_deref_mut() {
        noise.reset_state();
    }
    let tolerance = env.spec().success_tolerance;
    let episode_length = env.spec().episode_length;
    let mut state = env.reset(env_rng);
    let goal = state.goal.clone();
    let mut transitions = Vec::with_capacity(episode_length);
    let mut achieved_goals = Vec::with_capacity(episode_length);
    for _ in 0..episode_length {
        let action =
            agent.select_action(&state.physical, &goal, noise.as_deref_mut(), noise_rng)?;
        let next = env.step(&state, &action)?;
        let achieved = env.achieved_goal(&next);
        let base = base_reward(kind, &achieved, &goal, tolerance)?;
        let success = crate::envs::euclidean(&achieved, &goal) <= tolerance;
        transitions.push(Transition {
            state: state.physical.clone(),
            goal: goal.clone(),
            action,
            reward: weighted_reward(tradeoff, false, base),
            next_state: next.physical.clone(),
            is_hindsight: false,
            success,
        });
        achieved_goals.push(achieved);
        state = next;
    }
    Episode::new(transitions, achieved_goals)
}

/// Pushes the episode's real transitions, then its hindsight relabelings
/// according to the strategy. Returns `(real, hindsight)` push counts.
#[allow(clippy::too_many_arguments)]
pub fn store_with_hindsight<R: Rng + ?Sized>(
    buffer: &mut ReplayBuffer,
    episode: &Episode,
    strategy: Strategy,
    k: usize,
    kind: RewardKind,
    tradeoff: &TradeOff,
    tolerance: f64,
    rng: &mut R,
) -> Result<(usize, usize)> {
    for t in episode.transitions() {
        buffer.push(t.clone());
    }
    let hindsight = match strategy {
        Strategy::None => Vec::new(),
        Strategy::Final => relabel_final(episode, kind, tradeoff, tolerance)?,
        Strategy::Future => relabel_future(episode, k, kind, tradeoff, tolerance, rng)?,
    };
    let count = hindsight.len();
    for t in hindsight {
        buffer.push(t);
    }
    Ok((episode.len(), count))
}

/// Statistics of one data-collection + optimization cycle.
#[derive(Debug, Clone, Copy)]
pub struct CycleStats {
    pub mean_critic_loss: f64,
    pub mean_return: f64,
    pub real_stored: usize,
    pub hindsight_stored: usize,
}

/// One cycle: `episodes_per_cycle` rollouts stored with hindsight, then
/// `opt_steps_per_cycle` minibatch updates each followed by a soft target
/// update, then the exploration scale decays.
pub fn run_cycle(
    config: &ExperimentConfig,
    tradeoff: &TradeOff,
    agent: &mut DdpgAgent,
    buffer: &mut ReplayBuffer,
    env: &mut GoalEnv,
    noise: &mut OuNoise,
    streams: &mut SeedStreams,
) -> Result<CycleStats> {
    let mut return_sum = 0.0;
    let mut real_stored = 0;
    let mut hindsight_stored = 0;
    for _ in 0..config.episodes_per_cycle {
        let episode = run_episode(
            env,
            agent,
            Some(noise),
            config.reward,
            tradeoff,
            &mut streams.env,
            &mut streams.noise,
        )?;
        return_sum += episode.total_reward();
        let (real, hindsight) = store_with_hindsight(
            buffer,
            &episode,
            config.strategy,
            config.k,
            config.reward,
            tradeoff,
            config.tolerance,
            &mut streams.buffer,
        )?;
        real_stored += real;
        hindsight_stored += hindsight;
    }

    let mut loss_sum = 0.0;
    for _ in 0..config.opt_steps_per_cycle {
        let batch = buffer.sample_minibatch(config.batch_size, &mut streams.buffer)?;
        let stats = agent.train_step(&batch)?;
        agent.soft_update();
        loss_sum += stats.critic_loss;
    }
    noise.decay_epsilon();

    Ok(CycleStats {
        mean_critic_loss: loss_sum / config.opt_steps_per_cycle as f64,
        mean_return: return_sum / config.episodes_per_cycle as f64,
        real_stored,
        hindsight_stored,
    })
}

/// Fraction of noise-free episodes whose final step satisfies the goal.
/// Never mutates the agent.
pub fn evaluate<R: Rng + ?Sized>(
    env: &mut GoalEnv,
    agent: &DdpgAgent,
    n_episodes: usize,
    rng: &mut R,
) -> Result<f64> {
    assert!(n_episodes >= 1);
    let episode_length = env.spec().episode_length;
    let mut successes = 0usize;
    for _ in 0..n_episodes {
        let mut state = env.reset(rng);
        let goal = state.goal.clone();
        for _ in 0..episode_length {
            let action = agent.select_action(&state.physical, &goal, None, rng)?;
            state = env.step(&state, &action)?;
        }
        if env.is_success(&state, &goal) {
            successes += 1;
        }
    }
    Ok(successes as f64 / n_episodes as f64)
}

/// Trailing moving average: element `i` averages entries
/// `max(0, i - window + 1) ..= i`.
pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1);
    (0..series.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(window);
            let span = &series[start..=i];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect()
}

/// Per-index lower median across several equally long series.
pub fn median_series(series: &[Vec<f64>]) -> Vec<f64> {
    assert!(!series.is_empty());
    let len = series[0].len();
    assert!(series.iter().all(|s| s.len() == len), "series lengths differ");
    let mut out = Vec::with_capacity(len);
    let mut column = vec![0.0; series.len()];
    for i in 0..len {
        for (j, s) in series.iter().enumerate() {
            column[j] = s[i];
        }
        column.sort_by(|a, b| a.partial_cmp(b).expect("success rates are finite"));
        out.push(column[(column.len() - 1) / 2]);
    }
    out
}

/// One seed's complete run: its trace plus the trained agent for
/// checkpointing.
pub struct SeedRun {
    pub record: RunRecord,
    pub agent: DdpgAgent,
    pub noise: OuNoise,
}

/// Trains one seed to completion. Deterministic in `(config, options, seed)`.
pub fn run_seed(config: &ExperimentConfig, options: &RunOptions, seed: u64) -> Result<SeedRun> {
    config.validate()?;
    let tradeoff = options.effective_tradeoff(config);
    let mut init_rng = stream_rng(seed, STREAM_INIT);
    let mut agent = DdpgAgent::new(&config.agent_spec(), &mut init_rng)?;
    let mut env = GoalEnv::new(config.env_spec())?;
    let mut noise = OuNoise::new(
        env.spec().action_dim(),
        OuNoise::DEFAULT_THETA,
        OuNoise::DEFAULT_SIGMA,
        config.epsilon,
        config.epsilon_decay,
    );
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut streams = SeedStreams::new(seed);

    let mut rows = Vec::with_capacity(config.cycles);
    for cycle in 1..=config.cycles {
        let stats = run_cycle(
            config,
            &tradeoff,
            &mut agent,
            &mut buffer,
            &mut env,
            &mut noise,
            &mut streams,
        )
        .map_err(|e| Error::Run(format!("seed {seed}, cycle {cycle}: {e}")))?;
        let success_rate = evaluate(&mut env, &agent, EVAL_EPISODES, &mut streams.eval)
            .map_err(|e| Error::Run(format!("seed {seed}, cycle {cycle} evaluation: {e}")))?;
        rows.push(CycleRow {
            cycle,
            success_rate,
            critic_loss: stats.mean_critic_loss,
            mean_return: stats.mean_return,
            epsilon: noise.epsilon(),
        });
    }
    Ok(SeedRun {
        record: RunRecord { seed, rows },
        agent,
        noise,
    })
}

/// Runs every seed on the current thread, in order.
pub fn run_seeds_sequential(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Vec<(u64, Result<SeedRun>)> {
    config
        .seeds
        .iter()
        .map(|&seed| (seed, run_seed(config, options, seed)))
        .collect()
}

/// Runs seeds on the rayon pool. Output order (and content) is identical to
/// the sequential runner.
#[cfg(feature = "parallel")]
pub fn run_seeds_parallel(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Vec<(u64, Result<SeedRun>)> {
    use rayon::prelude::*;
    config
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_seed(config, options, seed)))
        .collect()
}

fn run_all_seeds(config: &ExperimentConfig, options: &RunOptions) -> Vec<(u64, Result<SeedRun>)> {
    #[cfg(feature = "parallel")]
    {
        run_seeds_parallel(config, options)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_seeds_sequential(config, options)
    }
}

/// Everything a finished experiment produced, in seed order.
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    /// Smoothed success series per successful seed, aligned with `records`.
    pub smoothed: Vec<Vec<f64>>,
    pub summary: RunSummary,
    /// Seeds whose runs errored, with the error text.
    pub failures: Vec<(u64, String)>,
}

impl ExperimentOutcome {
    /// Lower-median smoothed success across seeds, per cycle.
    pub fn median_smoothed(&self) -> Vec<f64> {
        median_series(&self.smoothed)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(config, &RunOptions::default())
}

/// Trains every seed, writes artifacts under `config.output_dir`, and
/// returns the in-memory outcome. Individual seed failures are recorded and
/// the rest continue; it is an error only if every seed fails.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;

    let results = run_all_seeds(config, options);

    let mut records = Vec::new();
    let mut smoothed = Vec::new();
    let mut per_seed_cycles = Vec::new();
    let mut failures = Vec::new();
    let env_spec = config.env_spec();
    for (seed, result) in results {
        match result {
            Ok(seed_run) => {
                let csv_path = config.output_dir.join(format!("seed_{seed}.csv"));
                std::fs::write(&csv_path, seed_run.record.to_csv_string())?;
                let ckpt_path = config.output_dir.join(format!("checkpoint_seed_{seed}.bin"));
                save_checkpoint(&ckpt_path, &seed_run.agent, &seed_run.noise, &env_spec)?;
                let series = smooth(&seed_run.record.success_series(), SMOOTH_WINDOW);
                per_seed_cycles.push(cycles_to_threshold(&series, SUCCESS_THRESHOLD));
                smoothed.push(series);
                records.push(seed_run.record);
            }
            Err(e) => {
                per_seed_cycles.push(None);
                failures.push((seed, e.to_string()));
            }
        }
    }
    if records.is_empty() {
        let detail: Vec<String> = failures.iter().map(|(s, e)| format!("seed {s}: {e}")).collect();
        return Err(Error::Run(format!("all seeds failed: {}", detail.join("; "))));
    }

    let summary = RunSummary {
        median_cycles_to_threshold: median_cycles(&per_seed_cycles),
        per_seed_cycles,
        threshold: SUCCESS_THRESHOLD,
        config_digest: config.digest(),
    };
    write_averaged_csv(&config.output_dir.join("averaged.csv"), &records)?;
    write_chart(&config.output_dir.join("success_rate.svg"), config, &records, &smoothed)?;
    let summary_json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(config.output_dir.join("summary.json"), summary_json + "\n")?;

    Ok(ExperimentOutcome {
        records,
        smoothed,
        summary,
        failures,
    })
}

/// Seed-mean success per cycle, then the smoothed mean.
fn write_averaged_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let cycles = records[0].rows.len();
    let mut mean = Vec::with_capacity(cycles);
    for i in 0..cycles {
        let sum: f64 = records.iter().map(|r| r.rows[i].success_rate).sum();
        mean.push(sum / records.len() as f64);
    }
    let smoothed = smooth(&mean, SMOOTH_WINDOW);
    let mut buf = Vec::new();
    writeln!(buf, "cycle,mean_success_rate,smoothed_success_rate")?;
    for i in 0..cycles {
        writeln!(buf, "{},{},{}", records[0].rows[i].cycle, mean[i], smoothed[i])?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

fn write_chart(
    path: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
    smoothed: &[Vec<f64>],
) -> Result<()> {
    let mut curves = Vec::new();
    for (record, series) in records.iter().zip(smoothed) {
        curves.push(plot::Curve {
            label: String::new(),
            color: "#c0c0c0".into(),
            width: 1.0,
            points: record
                .rows
                .iter()
                .zip(series)
                .map(|(row, &v)| (row.cycle as f64, v))
                .collect(),
        });
    }
    let cycles = records[0].rows.len();
    let mut mean = Vec::with_capacity(cycles);
    for i in 0..cycles {
        let sum: f64 = records.iter().map(|r| r.rows[i].success_rate).sum();
        mean.push(sum / records.len() as f64);
    }
    let mean_smoothed = smooth(&mean, SMOOTH_WINDOW);
    curves.push(plot::Curve {
        label: format!("mean of {} seeds, smoothed", records.len()),
        color: "#1f77b4".into(),
        width: 2.0,
        points: (0..cycles)
            .map(|i| (records[0].rows[i].cycle as f64, mean_smoothed[i]))
            .collect(),
    });
    let title = format!(
        "{:?} / {:?} / {:?}  lambda_r={} lambda_h={}",
        config.env, config.reward, config.strategy, config.lambda_r, config.lambda_h
    );
    plot::write_success_chart(path, &title, &curves)
}
