//! Command-line front end: `run` trains experiments from a JSON config,
//! `eval` scores a saved checkpoint, `plot` turns a run CSV into an SVG.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use archer::envs::{EnvKind, GoalEnv};
use archer::harness::{
    self, load_checkpoint, read_record_csv, ExperimentConfig, RunOptions, Strategy,
};
use archer::rewards::{RewardKind, TradeOffClass};

#[derive(Parser)]
#[command(name = "archer", about = "Goal-conditioned RL with weighted hindsight replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one experiment (all configured seeds) and write artifacts.
    Run(RunArgs),
    /// Evaluate a saved checkpoint with the deterministic policy.
    Eval(EvalArgs),
    /// Render a success-rate CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; missing fields take their defaults.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = parse_env)]
    env: Option<EnvKind>,
    #[arg(long, value_parser = parse_reward)]
    reward: Option<RewardKind>,
    #[arg(long)]
    lambda_r: Option<f64>,
    #[arg(long)]
    lambda_h: Option<f64>,
    /// final | future | none (none disables hindsight storage).
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    /// Comma-separated seed list, e.g. --seeds 1,2,3.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Store raw task rewards, ignoring lambda_r/lambda_h (ablation switch).
    #[arg(long, default_value_t = false)]
    bypass_weighting: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Path to a checkpoint .bin (its .json sidecar must sit next to it).
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PlotArgs {
    /// Input CSV (a per-seed record or averaged.csv).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long = "out")]
    output: PathBuf,
}

fn parse_env(s: &str) -> Result<EnvKind, String> {
    match s {
        "reacher" => Ok(EnvKind::Reacher),
        "pointgoal" => Ok(EnvKind::PointGoal),
        other => Err(format!("unknown env {other:?} (reacher | pointgoal)")),
    }
}

fn parse_reward(s: &str) -> Result<RewardKind, String> {
    match s {
        "binary_negative" => Ok(RewardKind::BinaryNegative),
        "binary_positive" => Ok(RewardKind::BinaryPositive),
        "shaped" => Ok(RewardKind::Shaped),
        other => Err(format!(
            "unknown reward {other:?} (binary_negative | binary_positive | shaped)"
        )),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "final" => Ok(Strategy::Final),
        "future" => Ok(Strategy::Future),
        "none" => Ok(Strategy::None),
        other => Err(format!("unknown strategy {other:?} (final | future | none)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
        Command::Plot(args) => plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> archer::Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(env) = args.env {
        config.env = env;
    }
    if let Some(reward) = args.reward {
        config.reward = reward;
    }
    if let Some(v) = args.lambda_r {
        config.lambda_r = v;
    }
    if let Some(v) = args.lambda_h {
        config.lambda_h = v;
    }
    if let Some(s) = args.strategy {
        config.strategy = s;
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(c) = args.cycles {
        config.cycles = c;
    }
    if let Some(seeds) = args.seeds {
        config.seeds = seeds;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }

    let class = config.validate()?;
    if class == TradeOffClass::AntiArcher {
        eprintln!(
            "warning: lambda_r={}, lambda_h={} weights hindsight rewards below real ones for this \
             reward sign (anti-aggressive ablation)",
            config.lambda_r, config.lambda_h
        );
    }

    let options = RunOptions {
        bypass_weighting: args.bypass_weighting,
    };
    let outcome = harness::run_experiment_with(&config, &options)?;
    for (seed, error) in &outcome.failures {
        eprintln!("seed {seed} failed: {error}");
    }
    println!(
        "{} seed(s) finished, artifacts in {}",
        outcome.records.len(),
        config.output_dir.display()
    );
    match outcome.summary.median_cycles_to_threshold {
        Some(c) => println!(
            "median cycles to smoothed success >= {}: {c}",
            outcome.summary.threshold
        ),
        None => println!(
            "median run never reached smoothed success >= {}",
            outcome.summary.threshold
        ),
    }
    Ok(())
}

fn eval(args: EvalArgs) -> archer::Result<()> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let mut env = GoalEnv::new(checkpoint.env_spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let rate = harness::evaluate(&mut env, &checkpoint.agent, args.episodes, &mut rng)?;
    println!("success rate over {} episodes: {rate}", args.episodes);
    Ok(())
}

fn plot(args: PlotArgs) -> archer::Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let header = text
        .lines()
        .next()
        .ok_or_else(|| archer::Error::Config("empty CSV".into()))?;

    let mut curves = Vec::new();
    if header == harness::CSV_HEADER {
        let rows = read_record_csv(&args.input)?;
        let raw: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.cycle as f64, r.success_rate))
            .collect();
        let smoothed = harness::smooth(
            &rows.iter().map(|r| r.success_rate).collect::<Vec<_>>(),
            harness::SMOOTH_WINDOW,
        );
        curves.push(archer::harness::plot::Curve {
            label: "success rate".into(),
            color: "#c0c0c0".into(),
            width: 1.0,
            points: raw,
        });
        curves.push(archer::harness::plot::Curve {
            label: format!("smoothed (window {})", harness::SMOOTH_WINDOW),
            color: "#1f77b4".into(),
            width: 2.0,
            points: rows
                .iter()
                .zip(&smoothed)
                .map(|(r, &v)| (r.cycle as f64, v))
                .collect(),
        });
    } else {
        // Generic fallback: first column is the cycle, every other column
        // becomes one curve.
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 2 || columns[0] != "cycle" {
            return Err(archer::Error::Config(format!(
                "unrecognized CSV header {header:?}"
            )));
        }
        let palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];
        let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); columns.len() - 1];
        for (i, line) in text.lines().skip(1).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(archer::Error::Config(format!("row {}: field count", i + 2)));
            }
            let cycle: f64 = fields[0]
                .parse()
                .map_err(|e| archer::Error::Config(format!("row {}: {e}", i + 2)))?;
            for (j, field) in fields.iter().enumerate().skip(1) {
                let v: f64 = field
                    .parse()
                    .map_err(|e| archer::Error::Config(format!("row {}: {e}", i + 2)))?;
                series[j - 1].push((cycle, v));
            }
        }
        for (j, points) in series.into_iter().enumerate() {
            curves.push(archer::harness::plot::Curve {
                label: columns[j + 1].to_string(),
                color: palette[j % palette.len()].to_string(),
                width: if j == 0 { 1.0 } else { 2.0 },
                points,
            });
        }
    }

    archer::harness::plot::write_success_chart(
        &args.output,
        &format!("{}", args.input.display()),
        &curves,
    )?;
    println!("wrote {}", args.output.display());
    Ok(())
}
