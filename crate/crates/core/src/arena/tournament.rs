use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{z_test, Verdict};
use crate::bots::{play_deal, Agent, BotSpec};
use crate::engine::Player;
use crate::error::{Error, Result};

/// Which side of a pairing won a deal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Player,
    Opponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub player: BotSpec,
    pub opponent: BotSpec,
    pub n: u64,
    pub wins: u64,
    pub p_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub verdict: Verdict,
    pub seed_start: u64,
}

impl PairingResult {
    pub fn from_wins(
        player: BotSpec,
        opponent: BotSpec,
        n: u64,
        wins: u64,
        seed_start: u64,
    ) -> Result<Self> {
        let t = z_test(wins, n)?;
        Ok(PairingResult {
            player,
            opponent,
            n,
            wins,
            p_hat: t.p_hat,
            z: t.z,
            p_value: t.p_value,
            verdict: t.verdict,
            seed_start,
        })
    }
}

/// Leader of game `i` of a pairing: the player leads the even games.
pub fn leader_for(i: u64) -> Side {
    if i.is_multiple_of(2) {
        Side::Player
    } else {
        Side::Opponent
    }
}

fn play_agents(player: &Agent, opponent: &Agent, seed: u64, leader: Side) -> Result<Side> {
    let agents = [player.clone(), opponent.clone()];
    let lead = match leader {
        Side::Player => Player::P0,
        Side::Opponent => Player::P1,
    };
    let end = play_deal(&agents, seed, lead, |_, _, _| {})?;
    Ok(match end.outcome()?.winner {
        Player::P0 => Side::Player,
        Player::P1 => Side::Opponent,
    })
}

/// Plays one deal and reports the winner.
pub fn play_game(player: &BotSpec, opponent: &BotSpec, seed: u64, leader: Side) -> Result<Side> {
    play_agents(&player.build()?, &opponent.build()?, seed, leader)
}

fn with_context<T>(player: &BotSpec, opponent: &BotSpec, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Pairing {
        player: player.to_string(),
        opponent: opponent.to_string(),
        cause: Box::new(e),
    })
}

/// `n` deals with seeds `seed_start..seed_start + n`.
pub fn run_pairing(
    player: &BotSpec,
    opponent: &BotSpec,
    n: u64,
    seed_start: u64,
) -> Result<PairingResult> {
    let agents = with_context(
        player,
        opponent,
        player.build().and_then(|p| Ok((p, opponent.build()?))),
    )?;
    run_pairing_agents(&agents.0, &agents.1, n, seed_start)
}

/// As [`run_pairing`] with already built agents.
pub fn run_pairing_agents(
    player: &Agent,
    opponent: &Agent,
    n: u64,
    seed_start: u64,
) -> Result<PairingResult> {
    if n == 0 {
        return Err(Error::Config("a pairing needs n >= 1".into()));
    }
    let games: Vec<u64> = (0..n).collect();
    let outcomes = crate::par::map(&games, |&i| {
        play_agents(player, opponent, seed_start.wrapping_add(i), leader_for(i))
    });
    let mut wins = 0;
    for o in outcomes {
        wins += u64::from(with_context(&player.spec, &opponent.spec, o)? == Side::Player);
    }
    PairingResult::from_wins(
        player.spec.clone(),
        opponent.spec.clone(),
        n,
        wins,
        seed_start,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub players: Vec<BotSpec>,
    pub opponents: Vec<BotSpec>,
    /// Row-major: `grid[i][j]` is `players[i]` against `opponents[j]`.
    pub grid: Vec<Vec<PairingResult>>,
    pub n: u64,
    pub seed_start: u64,
    /// Seconds since the Unix epoch when the run finished.
    pub timestamp: u64,
    /// SHA-256 over the specs, `n` and `seed_start`.
    pub config_hash: String,
}

impl MatrixReport {
    pub fn pairings(&self) -> impl Iterator<Item = &PairingResult> {
        self.grid.iter().flatten()
    }

    /// Equality ignoring the timestamp.
    pub fn same_content(&self, other: &MatrixReport) -> bool {
        MatrixReport {
            timestamp: 0,
            ..self.clone()
        } == MatrixReport {
            timestamp: 0,
            ..other.clone()
        }
    }
}

pub fn config_hash(players: &[BotSpec], opponents: &[BotSpec], n: u64, seed_start: u64) -> String {
    let mut h = Sha256::new();
    for (tag, list) in [("players", players), ("opponents", opponents)] {
        h.update(tag.as_bytes());
        for s in list {
            h.update(b"\n");
            h.update(s.to_string().as_bytes());
        }
        h.update(b"\0");
    }
    h.update(n.to_le_bytes());
    h.update(seed_start.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Every player against every opponent, `n` games each. Pairing `k` (row-major) uses seeds
/// from `seed_start + k * n`. Games are spread over `parallelism` threads; the report does not
/// depend on that number.
pub fn run_matrix(
    players: &[BotSpec],
    opponents: &[BotSpec],
    n: u64,
    seed_start: u64,
    parallelism: usize,
) -> Result<MatrixReport> {
    if players.is_empty() || opponents.is_empty() {
        return Err(Error::Config(
            "player and opponent lists must be non-empty".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Config("a pairing needs n >= 1".into()));
    }
    let build = |s: &BotSpec, p: &BotSpec, o: &BotSpec| with_context(p, o, s.build());
    let mut pairs = Vec::with_capacity(players.len() * opponents.len());
    for p in players {
        for o in opponents {
            pairs.push((build(p, p, o)?, build(o, p, o)?));
        }
    }
    let total = pairs.len() as u64 * n;
    let games: Vec<u64> = (0..total).collect();
    let outcomes = crate::par::with_threads(parallelism, || {
        crate::par::map(&games, |&g| {
            let (k, i) = (g / n, g % n);
            let (p, o) = &pairs[k as usize];
            let seed = seed_start.wrapping_add(k * n).wrapping_add(i);
            play_agents(p, o, seed, leader_for(i))
        })
    });
    let mut wins = vec![0u64; pairs.len()];
    for (g, o) in outcomes.into_iter().enumerate() {
        let k = g / n as usize;
        let (p, q) = &pairs[k];
        wins[k] += u64::from(with_context(&p.spec, &q.spec, o)? == Side::Player);
    }
    let mut grid = Vec::with_capacity(players.len());
    for (r, p) in players.iter().enumerate() {
        let mut row = Vec::with_capacity(opponents.len());
        for (c, o) in opponents.iter().enumerate() {
            let k = r * opponents.len() + c;
            let start = seed_start.wrapping_add(k as u64 * n);
            row.push(PairingResult::from_wins(
                p.clone(),
                o.clone(),
                n,
                wins[k],
                start,
            )?);
        }
        grid.push(row);
    }
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Ok(MatrixReport {
        players: players.to_vec(),
        opponents: opponents.to_vec(),
        grid,
        n,
        seed_start,
        timestamp,
        config_hash: config_hash(players, opponents, n, seed_start),
    })
}
