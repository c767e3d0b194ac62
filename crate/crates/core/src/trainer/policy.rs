use std::sync::Arc;

use ndarray::Array2;

use crate::bots::{choose_rand, determinize, evaluate_state, Bot};
use crate::encoder::{encode, FEATURES};
use crate::engine::{DealState, Move, Perspective, Player};
use crate::error::{Error, Result};
use crate::neuralnet::Mlp;
use crate::rng::DetRng;

/// Network value of every move in `valid`, in order.
pub fn q_values(mlp: &Mlp, view: &Perspective, valid: &[Move]) -> Result<Vec<f32>> {
    let mut x = Array2::zeros((valid.len(), FEATURES));
    for (mut row, &mv) in x.rows_mut().into_iter().zip(valid) {
        row.assign(&ndarray::ArrayView1::from(&encode(view, mv).0[..]));
    }
    Ok(mlp.forward_batch(x.view())?.to_vec())
}

/// Index of the first maximum.
fn first_max(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn choose_greedy(mlp: &Mlp, view: &Perspective, valid: &[Move]) -> Result<Move> {
    match valid {
        [] => Err(Error::NoMoves),
        [only] => Ok(*only),
        _ => Ok(valid[first_max(&q_values(mlp, view, valid)?)]),
    }
}

/// Epsilon-greedy over network values. `eps <= 0` and `eps >= 1` consume no coin flip, so
/// `eps = 1` draws exactly like [`choose_rand`] on the same generator.
pub fn choose_rl(
    mlp: &Mlp,
    view: &Perspective,
    valid: &[Move],
    eps: f64,
    rng: &mut DetRng,
) -> Result<Move> {
    if valid.is_empty() {
        return Err(Error::NoMoves);
    }
    let explore = if eps >= 1.0 {
        true
    } else if eps <= 0.0 {
        false
    } else {
        rng.unit_f64() < eps
    };
    if explore {
        choose_rand(valid, rng)
    } else {
        choose_greedy(mlp, view, valid)
    }
}

/// Scores a lookahead leaf from `me`'s point of view, in `[0, 1]`.
pub trait LeafEvaluator {
    fn value(&self, state: &DealState, me: Player) -> Result<f64>;
}

/// Point-share heuristic of the baseline search bot.
pub struct HeuristicLeaf;

impl LeafEvaluator for HeuristicLeaf {
    fn value(&self, state: &DealState, me: Player) -> Result<f64> {
        Ok(evaluate_state(state, me))
    }
}

/// Network leaf value: the greedy move's value for whoever is to move, mirrored to `me`
/// when that is the opponent. Decided deals score 1 or 0.
pub struct QLeaf<'a>(pub &'a Mlp);

impl LeafEvaluator for QLeaf<'_> {
    fn value(&self, state: &DealState, me: Player) -> Result<f64> {
        if let Ok(outcome) = state.outcome() {
            return Ok(if outcome.winner == me { 1.0 } else { 0.0 });
        }
        let mover = state.to_move();
        let valid = state.valid_moves()?;
        let view = state.perspective(mover);
        let best = q_values(self.0, &view, &valid)?
            .into_iter()
            .fold(f32::NEG_INFINITY, f32::max) as f64;
        Ok(if mover == me { best } else { 1.0 - best })
    }
}

/// Determinized random lookahead with a pluggable leaf evaluator. Consumes the generator
/// exactly like [`crate::bots::choose_rdeep`].
pub fn choose_lookahead<E: LeafEvaluator>(
    view: &Perspective,
    valid: &[Move],
    depth: u32,
    num_samples: u32,
    rng: &mut DetRng,
    leaf: &E,
) -> Result<Move> {
    if valid.is_empty() {
        return Err(Error::NoMoves);
    }
    if valid.len() == 1 {
        return Ok(valid[0]);
    }
    let scores = valid
        .iter()
        .map(|&mv| {
            let mut sum = 0.0;
            for _ in 0..num_samples {
                let mut sim = determinize(view, rng)?;
                sim.apply_in_place(mv)?;
                for _ in 1..depth {
                    let Ok(moves) = sim.valid_moves() else { break };
                    sim.apply_in_place(moves[rng.below(moves.len())])?;
                }
                sum += leaf.value(&sim, view.me)?;
            }
            Ok(sum / f64::from(num_samples))
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, &s)| if s > scores[b] { i } else { b });
    Ok(valid[best])
}

pub fn choose_rl_lookahead(
    mlp: &Mlp,
    view: &Perspective,
    valid: &[Move],
    depth: u32,
    num_samples: u32,
    rng: &mut DetRng,
) -> Result<Move> {
    choose_lookahead(view, valid, depth, num_samples, rng, &QLeaf(mlp))
}

/// Picks the move with the highest network value. Used for both the supervised and the
/// reinforcement-learned networks.
pub struct GreedyBot {
    mlp: Arc<Mlp>,
}

impl GreedyBot {
    pub fn new(mlp: Arc<Mlp>) -> Self {
        GreedyBot { mlp }
    }
}

impl Bot for GreedyBot {
    fn choose(&self, view: &Perspective, valid: &[Move], _rng: &mut DetRng) -> Result<Move> {
        choose_greedy(&self.mlp, view, valid)
    }
}

pub struct LookaheadBot {
    mlp: Arc<Mlp>,
    depth: u32,
    num_samples: u32,
}

impl LookaheadBot {
    pub fn new(mlp: Arc<Mlp>, depth: u32, num_samples: u32) -> Self {
        LookaheadBot {
            mlp,
            depth,
            num_samples,
        }
    }
}

impl Bot for LookaheadBot {
    fn choose(&self, view: &Perspective, valid: &[Move], rng: &mut DetRng) -> Result<Move> {
        choose_rl_lookahead(&self.mlp, view, valid, self.depth, self.num_samples, rng)
    }
}
