//! Simplified Schnapsen rules: one deal, no voluntary closing of the talon.

mod card;
mod perspective;
mod state;

pub use card::{card_points, Card, CardSet, Rank, Suit};
pub use perspective::Perspective;
pub use state::{
    trick_winner, DealOutcome, DealState, EndReason, HistoryEntry, Move, MoveKind, MoveList, Phase,
    Player, TrickRole, WINNING_POINTS,
};
