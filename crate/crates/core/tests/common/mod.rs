//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use schnapsen_core::engine::{Card, CardSet, Move, Suit};

/// Phase-two replies allowed by the rules, written without the engine's helpers: follow suit,
/// beat the led card if possible, trump when void, otherwise anything.
pub fn naive_phase_two_replies(hand: CardSet, lead: Card, trump: Suit) -> Vec<Move> {
    let cards: Vec<Card> = Card::deck().filter(|c| hand.contains(*c)).collect();
    let same: Vec<Card> = cards
        .iter()
        .copied()
        .filter(|c| c.suit == lead.suit)
        .collect();
    let allowed: Vec<Card> = if !same.is_empty() {
        let higher: Vec<Card> = same
            .iter()
            .copied()
            .filter(|c| c.points() > lead.points())
            .collect();
        if higher.is_empty() {
            same
        } else {
            higher
        }
    } else {
        let trumps: Vec<Card> = cards.iter().copied().filter(|c| c.suit == trump).collect();
        if trumps.is_empty() {
            cards
        } else {
            trumps
        }
    };
    allowed.into_iter().map(Move::Play).collect()
}
