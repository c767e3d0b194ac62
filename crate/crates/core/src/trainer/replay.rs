use std::collections::VecDeque;

use ndarray::{Array1, Array2};

use crate::bots::{play_deal, BotSpec};
use crate::encoder::{encode, FeatureVector, ENCODER_VERSION, FEATURES};
use crate::engine::Player;
use crate::error::{Error, Result};
use crate::neuralnet::Batch;
use crate::rng::DetRng;

/// One encoded decision and the final result of the deal for the player who made it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySample {
    pub x: FeatureVector,
    /// 1 if the deciding player won the deal, else 0.
    pub g: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayDataset {
    pub encoder_version: u16,
    pub samples: Vec<ReplaySample>,
}

impl Default for ReplayDataset {
    fn default() -> Self {
        ReplayDataset {
            encoder_version: ENCODER_VERSION,
            samples: Vec::new(),
        }
    }
}

impl ReplayDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// All inputs as an `n x 173` matrix and the labels.
    pub fn to_arrays(&self) -> (Array2<f32>, Array1<f32>) {
        let flat: Vec<f32> = self
            .samples
            .iter()
            .flat_map(|s| s.x.0.iter().copied())
            .collect();
        let x = Array2::from_shape_vec((self.samples.len(), FEATURES), flat)
            .expect("rows are FEATURES wide");
        let g = self.samples.iter().map(|s| f32::from(s.g)).collect();
        (x, g)
    }
}

/// Plays `n_games` deals between `a` and `b` and records every decision of both players,
/// labelled with that player's deal result. Game `i` uses deal seed `seed_start + i`; `a` leads
/// the even games.
pub fn generate_replay(
    a: &BotSpec,
    b: &BotSpec,
    n_games: u64,
    seed_start: u64,
) -> Result<ReplayDataset> {
    if n_games == 0 {
        return Err(Error::Config("n_games must be >= 1".into()));
    }
    let agents = [a.build()?, b.build()?];
    let games: Vec<u64> = (0..n_games).collect();
    let per_game = crate::par::map(&games, |&i| -> Result<Vec<ReplaySample>> {
        let seed = seed_start.wrapping_add(i);
        let leader = if i % 2 == 0 { Player::P0 } else { Player::P1 };
        let mut decisions: Vec<(Player, FeatureVector)> = Vec::new();
        let end = play_deal(&agents, seed, leader, |who, view, mv| {
            decisions.push((who, encode(view, mv)));
        })?;
        let winner = end.outcome()?.winner;
        Ok(decisions
            .into_iter()
            .map(|(who, x)| ReplaySample {
                x,
                g: u8::from(who == winner),
            })
            .collect())
    });
    let mut samples = Vec::new();
    for game in per_game {
        samples.extend(game?);
    }
    Ok(ReplayDataset {
        encoder_version: ENCODER_VERSION,
        samples,
    })
}

/// Bounded FIFO of samples; pushing beyond capacity evicts the oldest entries.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    entries: VecDeque<ReplaySample>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        ReplayBuffer {
            entries: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, samples: impl IntoIterator<Item = ReplaySample>) {
        for s in samples {
            if self.entries.len() == self.capacity {
                self.entries.pop_front();
            }
            self.entries.push_back(s);
        }
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &ReplaySample> {
        self.entries.iter()
    }

    /// `k` uniform draws with replacement.
    pub fn sample(&self, k: usize, rng: &mut DetRng) -> Result<Vec<&ReplaySample>> {
        let idx = self.sample_indices(k, rng)?;
        Ok(idx.into_iter().map(|i| &self.entries[i]).collect())
    }

    pub fn sample_indices(&self, k: usize, rng: &mut DetRng) -> Result<Vec<usize>> {
        if self.entries.len() < k || self.entries.is_empty() {
            return Err(Error::WarmupIncomplete {
                have: self.entries.len(),
                need: k,
            });
        }
        Ok((0..k).map(|_| rng.below(self.entries.len())).collect())
    }

    /// A training batch of `k` uniform draws.
    pub fn sample_batch(&self, k: usize, rng: &mut DetRng) -> Result<Batch<f32>> {
        let picked = self.sample(k, rng)?;
        let mut x = Array2::zeros((k, FEATURES));
        for (mut row, s) in x.rows_mut().into_iter().zip(&picked) {
            row.assign(&ndarray::ArrayView1::from(&s.x.0[..]));
        }
        let g = picked.iter().map(|s| f32::from(s.g)).collect();
        Batch::new(x, g)
    }
}
