//! Baseline agents and the shared bot interface.

mod search;
mod spec;

use std::sync::Arc;

pub use search::{choose_rdeep, determinize, evaluate_state, playout};
pub use spec::BotSpec;

use crate::engine::{DealState, Move, Perspective, Player};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, DetRng};
use crate::store;
use crate::trainer::{GreedyBot, LookaheadBot};

/// A move-selection policy. Implementations see only the player's [`Perspective`] and must
/// return a member of `valid`.
pub trait Bot: Send + Sync {
    fn choose(&self, view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move>;
}

pub fn choose_rand(valid: &[Move], rng: &mut DetRng) -> Result<Move> {
    rng.choose(valid).copied().ok_or(Error::NoMoves)
}

/// Priority play: a trump if possible, else follow the led suit, else the highest-scoring card.
/// Ties inside a priority class are broken uniformly. Marriages and exchanges are never chosen.
pub fn choose_bully(view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
    if valid.is_empty() {
        return Err(Error::NoMoves);
    }
    let plays: Vec<Move> = valid
        .iter()
        .copied()
        .filter(|m| matches!(m, Move::Play(_)))
        .collect();
    let trumps: Vec<Move> = plays
        .iter()
        .copied()
        .filter(|m| m.card().suit == view.trump_suit)
        .collect();
    if !trumps.is_empty() {
        return Ok(trumps[rng.below(trumps.len())]);
    }
    if let Some(lead) = view.on_table {
        let followers: Vec<Move> = plays
            .iter()
            .copied()
            .filter(|m| m.card().suit == lead.suit)
            .collect();
        if !followers.is_empty() {
            return Ok(followers[rng.below(followers.len())]);
        }
    }
    let best = plays
        .iter()
        .map(|m| m.card().points())
        .max()
        .ok_or(Error::NoMoves)?;
    let top: Vec<Move> = plays
        .into_iter()
        .filter(|m| m.card().points() == best)
        .collect();
    Ok(top[rng.below(top.len())])
}

pub struct RandBot;

impl Bot for RandBot {
    fn choose(&self, _view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
        choose_rand(valid, rng)
    }
}

pub struct BullyBot;

impl Bot for BullyBot {
    fn choose(&self, view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
        choose_bully(view, valid, rng)
    }
}

pub struct RdeepBot {
    pub depth: u32,
    pub num_samples: u32,
}

impl Bot for RdeepBot {
    fn choose(&self, view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
        choose_rdeep(view, valid, self.depth, self.num_samples, rng)
    }
}

/// A constructed bot plus the seed its per-game generators derive from.
#[derive(Clone)]
pub struct Agent {
    pub spec: BotSpec,
    bot: Arc<dyn Bot>,
}

impl Agent {
    pub fn new(spec: BotSpec, bot: Arc<dyn Bot>) -> Self {
        Agent { spec, bot }
    }

    pub fn bot(&self) -> &dyn Bot {
        self.bot.as_ref()
    }

    /// Generator for one deal: a function of the bot seed and the deal seed only, so games can
    /// run in any order or thread.
    pub fn game_rng(&self, deal_seed: u64) -> DetRng {
        DetRng::new(mix_seed(self.spec.seed(), deal_seed))
    }
}

/// Plays one deal to the end. `agents[0]` sits at `P0`. `observe` sees every decision with
/// the deciding player's perspective before the move is applied.
pub fn play_deal(
    agents: &[Agent; 2],
    seed: u64,
    leader: Player,
    mut observe: impl FnMut(Player, &Perspective, Move),
) -> Result<DealState> {
    let mut state = DealState::new_deal(seed, leader);
    let mut rngs = [agents[0].game_rng(seed), agents[1].game_rng(seed)];
    while !state.is_terminal() {
        let who = state.to_move();
        let valid = state.valid_moves()?;
        let view = state.perspective(who);
        let mv = agents[who.index()]
            .bot()
            .choose(&view, &valid, &mut rngs[who.index()])?;
        observe(who, &view, mv);
        state.apply_in_place(mv)?;
    }
    Ok(state)
}

impl BotSpec {
    /// Builds the bot, loading any referenced checkpoint.
    pub fn build(&self) -> Result<Agent> {
        let bot: Arc<dyn Bot> = match self {
            BotSpec::Rand { .. } => Arc::new(RandBot),
            BotSpec::Bully { .. } => Arc::new(BullyBot),
            BotSpec::Rdeep {
                depth, num_samples, ..
            } => Arc::new(RdeepBot {
                depth: *depth,
                num_samples: *num_samples,
            }),
            BotSpec::Mlp { model } | BotSpec::Rl { model } => {
                Arc::new(GreedyBot::new(Arc::new(store::load_model(model)?)))
            }
            BotSpec::RlLookahead {
                model,
                depth,
                num_samples,
                ..
            } => Arc::new(LookaheadBot::new(
                Arc::new(store::load_model(model)?),
                *depth,
                *num_samples,
            )),
        };
        Ok(Agent {
            spec: self.clone(),
            bot,
        })
    }
}
