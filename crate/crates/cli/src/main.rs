use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use schnapsen_core::arena::{export, run_matrix, Format};
use schnapsen_core::bots::{play_deal, BotSpec};
use schnapsen_core::engine::Player;
use schnapsen_core::neuralnet::{Mlp, DEFAULT_LR, DEFAULT_WEIGHT_DECAY};
use schnapsen_core::store;
use schnapsen_core::trainer::{
    generate_replay, rl_train_from, train_supervised, RlConfig, SupervisedConfig,
};
use schnapsen_core::{Error, StoreError};

const ABOUT: &str = "Schnapsen bots: replay generation, supervised and reinforcement training, \
seeded tournaments.

Every command is reproducible from its flags: deal i of a run uses seed `--seed + i`, bot
randomness derives from the seed in each bot spec, and network initialisation from `--seed`.

Bot specs: rand:<seed>, bully:<seed>, rdeep:d=<depth>,s=<samples>,seed=<seed>, mlp:<model>,
rl:<model>, rl+look:<model>,d=<depth>,s=<samples>,seed=<seed>";

#[derive(Parser)]
#[command(name = "schnapsen", version, about = "Schnapsen bots, training and tournaments", long_about = ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record every decision of a bot-vs-bot series, labelled with the deal result.
    GenReplay(GenReplay),
    /// Train the value network on a replay dataset (binary cross entropy).
    TrainMlp(TrainMlp),
    /// Train the value network by playing against a fixed opponent.
    TrainRl(TrainRl),
    /// Play every player against every opponent and report win rates with Z-test verdicts.
    Tournament(Tournament),
    /// Play a single deal and print the result, optionally with the full transcript.
    Match(Match),
}

#[derive(Args)]
struct GenReplay {
    /// First bot; it leads the even-numbered deals.
    #[arg(long)]
    a: BotSpec,
    #[arg(long)]
    b: BotSpec,
    #[arg(long, default_value_t = 20_000)]
    games: u64,
    /// Deal i uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainMlp {
    /// Dataset written by gen-replay.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: u32,
    #[arg(long, default_value_t = DEFAULT_LR)]
    lr: f64,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_DECAY)]
    wd: f64,
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    /// Seeds weight initialisation and the epoch shuffles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct TrainRl {
    #[arg(long)]
    opponent: BotSpec,
    #[arg(long, default_value_t = 1_200_000)]
    games: u64,
    /// Exploration schedule `start:end`, linear over `--games`.
    #[arg(long, default_value = "0.23:0.02", value_parser = parse_eps)]
    eps: (f64, f64),
    #[arg(long, default_value_t = 100_000)]
    buffer: usize,
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    /// Buffer size before the first update.
    #[arg(long, default_value_t = 10_000)]
    warmup: usize,
    /// Self-play threads. 1 runs everything on one thread and is bit-reproducible.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Games between weight refreshes of the playing policy.
    #[arg(long, default_value_t = 256)]
    snapshot_interval: u64,
    #[arg(long, default_value_t = DEFAULT_LR)]
    lr: f64,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_DECAY)]
    wd: f64,
    /// Game i uses deal seed `seed + i`; also seeds weight initialisation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Continue from an existing checkpoint instead of a fresh network.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Training log CSV (games,eps,buffer,loss,winrate).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    log_interval: u64,
}

#[derive(Args)]
struct Tournament {
    #[arg(long, num_args = 1.., required = true)]
    players: Vec<BotSpec>,
    #[arg(long, num_args = 1.., required = true)]
    opponents: Vec<BotSpec>,
    /// Games per pairing.
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    /// Pairing k (row-major) uses seeds from `seed + k * n`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write `matrix.<ext>` here instead of printing to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct Match {
    #[arg(long)]
    a: BotSpec,
    #[arg(long)]
    b: BotSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Player that leads the first trick (0 = a, 1 = b).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    leader: u8,
    /// Print the move transcript: ply;player;kind;card;points0;points1.
    #[arg(long)]
    trace: bool,
}

fn parse_eps(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected start:end, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn gen_replay(args: GenReplay) -> Result<()> {
    let data = generate_replay(&args.a, &args.b, args.games, args.seed)?;
    ensure_parent(&args.out)?;
    store::save_dataset(&data, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{} samples from {} games -> {}",
        data.len(),
        args.games,
        args.out.display()
    );
    Ok(())
}

fn train_mlp(args: TrainMlp) -> Result<()> {
    let data = store::load_dataset(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let cfg = SupervisedConfig {
        epochs: args.epochs,
        lr: args.lr,
        weight_decay: args.wd,
        minibatch: args.batch,
        shuffle_seed: args.seed,
    };
    let (mlp, log) = train_supervised(&data, &cfg, args.seed)?;
    ensure_parent(&args.out)?;
    store::save_model(&mlp, &args.out)?;
    if let Some(path) = &args.log {
        ensure_parent(path)?;
        let mut text = String::from("epoch,loss\n");
        for (i, l) in log.epoch_losses.iter().enumerate() {
            text.push_str(&format!("{},{l:.6}\n", i + 1));
        }
        fs::write(path, text)?;
    }
    println!(
        "{} samples, {} epochs, final loss {:.6} -> {}",
        data.len(),
        args.epochs,
        log.epoch_losses.last().copied().unwrap_or(f64::NAN),
        args.out.display()
    );
    Ok(())
}

fn train_rl(args: TrainRl) -> Result<()> {
    let cfg = RlConfig {
        total_games: args.games,
        eps_start: args.eps.0,
        eps_end: args.eps.1,
        minibatch: args.batch,
        buffer_capacity: args.buffer,
        warmup_samples: args.warmup,
        snapshot_interval: args.snapshot_interval,
        workers: args.workers,
        base_seed: args.seed,
        lr: args.lr,
        weight_decay: args.wd,
        log_interval: args.log_interval,
        ..RlConfig::default()
    };
    let initial = match &args.init {
        Some(path) => {
            store::load_model(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => Mlp::init(args.seed),
    };
    let (mlp, log) = rl_train_from(initial, &args.opponent, &cfg)?;
    ensure_parent(&args.out)?;
    store::save_model(&mlp, &args.out)?;
    if let Some(path) = &args.log {
        ensure_parent(path)?;
        fs::write(path, log.to_lines())?;
    }
    if let Some(last) = log.records.last() {
        println!("{}", schnapsen_core::trainer::TrainingLog::HEADER);
        println!("{last}");
    }
    println!("-> {}", args.out.display());
    Ok(())
}

fn tournament(args: Tournament) -> Result<()> {
    let lanes = args
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_matrix(&args.players, &args.opponents, args.n, args.seed, lanes)?;
    let text = export(&report, args.format)?;
    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("matrix.{}", args.format.extension()));
            fs::write(&path, text)?;
            println!(
                "{} pairings -> {}",
                report.grid.len() * args.opponents.len(),
                path.display()
            );
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn play_match(args: Match) -> Result<()> {
    let agents = [args.a.build()?, args.b.build()?];
    let leader = Player::from_index(usize::from(args.leader));
    let end = play_deal(&agents, args.seed, leader, |_, _, _| {})?;
    let mut out = std::io::stdout().lock();
    if args.trace {
        for line in end.transcript() {
            writeln!(out, "{line}")?;
        }
    }
    let outcome = end.outcome()?;
    let name = [&args.a, &args.b][outcome.winner.index()];
    writeln!(
        out,
        "winner {} ({name}), {} game points, {:?}, points {}:{}",
        outcome.winner,
        outcome.game_points,
        outcome.reason,
        end.countable_points(Player::P0),
        end.countable_points(Player::P1)
    )?;
    Ok(())
}

/// Exit status for a failure: the store error code when a file was rejected, else 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    e.chain()
        .find_map(|cause| match cause.downcast_ref::<Error>() {
            Some(e) => e.store_error().map(StoreError::code),
            None => cause.downcast_ref::<StoreError>().map(StoreError::code),
        })
        .map_or(1, |c| c as u8)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenReplay(a) => gen_replay(a),
        Command::TrainMlp(a) => train_mlp(a),
        Command::TrainRl(a) => train_rl(a),
        Command::Tournament(a) => tournament(a),
        Command::Match(a) => play_match(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
