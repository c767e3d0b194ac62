use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, RwLock};

use super::policy::choose_rl;
use super::replay::{ReplayBuffer, ReplaySample};
use crate::bots::{play_deal, Agent, Bot, BotSpec};
use crate::encoder::encode;
use crate::engine::{Move, Perspective, Player};
use crate::error::{Error, Result};
use crate::neuralnet::{AdamState, LossKind, Mlp, DEFAULT_LR, DEFAULT_WEIGHT_DECAY};
use crate::rng::{mix_seed, DetRng};

#[derive(Clone, Debug, PartialEq)]
pub struct RlConfig {
    pub total_games: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub minibatch: usize,
    pub buffer_capacity: usize,
    /// Buffer size before the first update.
    pub warmup_samples: usize,
    pub updates_per_game: u32,
    /// Games between refreshes of the workers' weight snapshot.
    pub snapshot_interval: u64,
    pub workers: usize,
    pub base_seed: u64,
    pub lr: f64,
    pub weight_decay: f64,
    /// Games per training-log record.
    pub log_interval: u64,
    /// Finished episodes the worker-to-learner queue holds before workers block.
    pub queue_capacity: usize,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            total_games: 1_200_000,
            eps_start: 0.23,
            eps_end: 0.02,
            minibatch: 1024,
            buffer_capacity: 100_000,
            warmup_samples: 10_000,
            updates_per_game: 1,
            snapshot_interval: 256,
            workers: 1,
            base_seed: 0,
            lr: DEFAULT_LR,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            log_interval: 1000,
            queue_capacity: 64,
        }
    }
}

impl RlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0 <= self.eps_end && self.eps_end <= self.eps_start && self.eps_start <= 1.0) {
            return bad("need 0 <= eps_end <= eps_start <= 1");
        }
        if self.total_games == 0 {
            return bad("total_games must be >= 1");
        }
        if self.minibatch == 0 || self.minibatch > self.buffer_capacity {
            return bad("need 1 <= minibatch <= buffer_capacity");
        }
        if self.workers == 0 || self.snapshot_interval == 0 || self.log_interval == 0 {
            return bad("workers, snapshot_interval and log_interval must be >= 1");
        }
        if self.queue_capacity == 0 {
            return bad("queue_capacity must be >= 1");
        }
        let rates_ok = self.lr > 0.0 && self.weight_decay >= 0.0;
        if !rates_ok {
            return bad("lr must be > 0 and weight decay >= 0");
        }
        Ok(())
    }
}

/// Exploration rate after `games_played` games: linear from `eps_start` to `eps_end` over
/// `total_games`, constant afterwards.
pub fn epsilon(games_played: u64, cfg: &RlConfig) -> f64 {
    let frac = games_played.min(cfg.total_games) as f64 / cfg.total_games as f64;
    cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRecord {
    pub games: u64,
    pub eps: f64,
    pub buffer: usize,
    /// Mean minibatch loss over the interval; `None` before warmup.
    pub loss: Option<f64>,
    /// Training-policy win rate over the interval.
    pub winrate: f64,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loss = self.loss.map_or("nan".to_string(), |l| format!("{l:.6}"));
        write!(
            f,
            "{},{:.6},{},{},{:.4}",
            self.games, self.eps, self.buffer, loss, self.winrate
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<LogRecord>,
}

impl TrainingLog {
    pub const HEADER: &'static str = "games,eps,buffer,loss,winrate";

    /// Header plus one line per record.
    pub fn to_lines(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

/// Epsilon-greedy learner on a shared weight snapshot.
struct Explorer {
    mlp: Arc<Mlp>,
    eps: f64,
}

impl Bot for Explorer {
    fn choose(&self, view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
        choose_rl(&self.mlp, view, valid, self.eps, rng)
    }
}

struct Episode {
    index: u64,
    samples: Vec<ReplaySample>,
    won: bool,
}

const RL_SEAT_SALT: u64 = 0x005E_A70F_1EA2;

/// Plays game `index` with the learner at `P0` leading even games.
fn play_episode(
    snapshot: &Arc<Mlp>,
    opponent: &Agent,
    cfg: &RlConfig,
    index: u64,
    eps: f64,
) -> Result<Episode> {
    let seed = cfg.base_seed.wrapping_add(index);
    let leader = if index.is_multiple_of(2) {
        Player::P0
    } else {
        Player::P1
    };
    // The learner's generator is keyed by game index so results do not depend on scheduling.
    let rl_seed = mix_seed(cfg.base_seed ^ RL_SEAT_SALT, index);
    let explorer = Arc::new(Explorer {
        mlp: Arc::clone(snapshot),
        eps,
    });
    let me = Agent::new(BotSpec::Rand { seed: rl_seed }, explorer);
    let agents = [me, opponent.clone()];
    let mut xs = Vec::new();
    let end = play_deal(&agents, seed, leader, |who, view, mv| {
        if who == Player::P0 {
            xs.push(encode(view, mv));
        }
    })?;
    let won = end.outcome()?.winner == Player::P0;
    let g = u8::from(won);
    Ok(Episode {
        index,
        samples: xs.into_iter().map(|x| ReplaySample { x, g }).collect(),
        won,
    })
}

/// Learner-side state: buffer, optimizer, and logging accumulators.
struct Learner {
    mlp: Mlp,
    adam: AdamState,
    buffer: ReplayBuffer,
    rng: DetRng,
    log: TrainingLog,
    games: u64,
    interval_losses: Vec<f64>,
    interval_wins: u64,
    interval_games: u64,
}

impl Learner {
    fn absorb(&mut self, episode: Episode, cfg: &RlConfig) -> Result<()> {
        self.buffer.push(episode.samples);
        self.games += 1;
        self.interval_games += 1;
        self.interval_wins += u64::from(episode.won);
        let need = cfg.warmup_samples.max(cfg.minibatch);
        if self.buffer.len() >= need {
            for _ in 0..cfg.updates_per_game {
                let batch = self.buffer.sample_batch(cfg.minibatch, &mut self.rng)?;
                let (loss, grads) = self.mlp.loss_and_gradients(&batch, LossKind::Mse);
                self.adam.step(&mut self.mlp, &grads)?;
                self.interval_losses.push(f64::from(loss));
            }
        }
        if self.games.is_multiple_of(cfg.log_interval) || self.games == cfg.total_games {
            let loss = (!self.interval_losses.is_empty()).then(|| {
                self.interval_losses.iter().sum::<f64>() / self.interval_losses.len() as f64
            });
            self.log.records.push(LogRecord {
                games: self.games,
                eps: epsilon(self.games, cfg),
                buffer: self.buffer.len(),
                loss,
                winrate: self.interval_wins as f64 / self.interval_games.max(1) as f64,
            });
            self.interval_losses.clear();
            self.interval_wins = 0;
            self.interval_games = 0;
        }
        Ok(())
    }
}

/// Monte Carlo value learning against a fixed opponent with experience replay.
///
/// Workers play full deals with an epsilon-greedy policy on a weight snapshot and send every
/// decision's features, labelled with the deal result, to the learner. The learner appends them
/// to the replay buffer and, once warm, runs `updates_per_game` MSE minibatch steps per received
/// game, publishing a fresh snapshot every `snapshot_interval` games. With one worker the whole
/// run executes on the calling thread and is deterministic.
pub fn rl_train(opponent: &BotSpec, cfg: &RlConfig, init_seed: u64) -> Result<(Mlp, TrainingLog)> {
    rl_train_from(Mlp::init(init_seed), opponent, cfg)
}

/// As [`rl_train`], continuing from an existing network.
pub fn rl_train_from(
    initial: Mlp,
    opponent: &BotSpec,
    cfg: &RlConfig,
) -> Result<(Mlp, TrainingLog)> {
    cfg.validate()?;
    let opponent = opponent.build()?;
    let adam = AdamState::for_model(&initial, cfg.lr, cfg.weight_decay);
    let mut learner = Learner {
        mlp: initial,
        adam,
        buffer: ReplayBuffer::new(cfg.buffer_capacity),
        rng: DetRng::new(mix_seed(cfg.base_seed, 0x01EA_24E2)),
        log: TrainingLog::default(),
        games: 0,
        interval_losses: Vec::new(),
        interval_wins: 0,
        interval_games: 0,
    };
    if cfg.workers == 1 {
        let mut snapshot = Arc::new(learner.mlp.clone());
        for index in 0..cfg.total_games {
            if index > 0 && index % cfg.snapshot_interval == 0 {
                snapshot = Arc::new(learner.mlp.clone());
            }
            let episode = play_episode(&snapshot, &opponent, cfg, index, epsilon(index, cfg))?;
            learner.absorb(episode, cfg)?;
        }
    } else {
        run_workers(&mut learner, &opponent, cfg)?;
    }
    Ok((learner.mlp, learner.log))
}

fn run_workers(learner: &mut Learner, opponent: &Agent, cfg: &RlConfig) -> Result<()> {
    let next_game = AtomicU64::new(0);
    let snapshot = RwLock::new(Arc::new(learner.mlp.clone()));
    let (tx, rx) = mpsc::sync_channel::<Result<Episode>>(cfg.queue_capacity);
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..cfg.workers {
            let tx = tx.clone();
            let next_game = &next_game;
            let snapshot = &snapshot;
            scope.spawn(move || loop {
                let index = next_game.fetch_add(1, Ordering::Relaxed);
                if index >= cfg.total_games {
                    break;
                }
                let weights = Arc::clone(&snapshot.read().expect("snapshot lock"));
                let episode = play_episode(&weights, opponent, cfg, index, epsilon(index, cfg));
                // The learner hung up after an error; nothing left to do.
                if tx.send(episode).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut failure = None;
        for received in rx.iter() {
            match received {
                Ok(episode) => {
                    debug_assert!(episode.index < cfg.total_games);
                    if let Err(e) = learner.absorb(episode, cfg) {
                        failure = Some(e);
                        break;
                    }
                    if learner.games.is_multiple_of(cfg.snapshot_interval) {
                        *snapshot.write().expect("snapshot lock") = Arc::new(learner.mlp.clone());
                    }
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failure {
            // Stop handing out games and drain so blocked workers can exit.
            next_game.store(cfg.total_games, Ordering::Relaxed);
            for _ in rx.iter() {}
            return Err(e);
        }
        Ok(())
    })
}
