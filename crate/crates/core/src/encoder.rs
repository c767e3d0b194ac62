//! Fixed 173-wide encoding of a (perspective, candidate move) pair.
//!
//! | indices | content |
//! |---------|---------|
//! | 0-119   | per card (canonical order), one-hot over [`Knowledge`] (6 wide) |
//! | 120-139 | opponent's card on the table, one-hot (zero when I lead) |
//! | 140     | I lead the current trick |
//! | 141     | my countable points / 66, clamped to 1 |
//! | 142     | opponent countable points / 66, clamped to 1 |
//! | 143     | my declared but not yet countable marriage points / 40 |
//! | 144     | opponent's pending marriage points / 40 |
//! | 145-148 | trump suit one-hot |
//! | 149     | phase two |
//! | 150     | undrawn cards (indicator included) / 10 |
//! | 151     | move is a marriage |
//! | 152     | move is a trump exchange |
//! | 153-172 | move card one-hot (led card for a marriage, trump Jack for an exchange) |
//!
//! Changing the layout requires bumping [`ENCODER_VERSION`]; checkpoints and datasets record it.

use crate::engine::{Card, Move, Perspective, Phase};

pub const FEATURES: usize = 173;
pub const ENCODER_VERSION: u16 = 1;

const TABLE_OFFSET: usize = 120;
const LEAD: usize = 140;
const MY_POINTS: usize = 141;
const OPP_POINTS: usize = 142;
const MY_PENDING: usize = 143;
const OPP_PENDING: usize = 144;
const TRUMP_OFFSET: usize = 145;
const PHASE_TWO: usize = 149;
const TALON: usize = 150;
const IS_MARRIAGE: usize = 151;
const IS_EXCHANGE: usize = 152;
const MOVE_OFFSET: usize = 153;

/// Where a card is, as far as the perspective's owner knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Knowledge {
    Unseen,
    OwnHand,
    OppKnown,
    TrumpIndicator,
    WonByMe,
    WonByOpp,
}

impl Knowledge {
    pub fn slot(self) -> usize {
        self as usize
    }
}

/// The card on the table belongs to its player: `OwnHand` if I led it, `OppKnown` otherwise.
pub fn knowledge_tag(card: Card, view: &Perspective) -> Knowledge {
    if view.my_hand.contains(card) {
        Knowledge::OwnHand
    } else if view.won_by_me.contains(card) {
        Knowledge::WonByMe
    } else if view.won_by_opp.contains(card) {
        Knowledge::WonByOpp
    } else if view.trump_indicator == Some(card) {
        Knowledge::TrumpIndicator
    } else if view.on_table == Some(card) {
        if view.i_lead {
            Knowledge::OwnHand
        } else {
            Knowledge::OppKnown
        }
    } else if view.opp_known.contains(card) {
        Knowledge::OppKnown
    } else {
        Knowledge::Unseen
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f32; FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

impl std::fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let hot: Vec<(usize, f32)> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        f.debug_tuple("FeatureVector").field(&hot).finish()
    }
}

pub fn encode(view: &Perspective, mv: Move) -> FeatureVector {
    let mut x = [0f32; FEATURES];
    for card in Card::deck() {
        x[card.index() * 6 + knowledge_tag(card, view).slot()] = 1.0;
    }
    if !view.i_lead {
        if let Some(c) = view.on_table {
            x[TABLE_OFFSET + c.index()] = 1.0;
        }
    }
    x[LEAD] = if view.i_lead { 1.0 } else { 0.0 };
    x[MY_POINTS] = (view.my_points as f32 / 66.0).min(1.0);
    x[OPP_POINTS] = (view.opp_points as f32 / 66.0).min(1.0);
    x[MY_PENDING] = (view.my_pending as f32 / 40.0).min(1.0);
    x[OPP_PENDING] = (view.opp_pending as f32 / 40.0).min(1.0);
    x[TRUMP_OFFSET + view.trump_suit.index()] = 1.0;
    x[PHASE_TWO] = if view.phase == Phase::Two { 1.0 } else { 0.0 };
    x[TALON] = view.talon_size as f32 / 10.0;
    match mv {
        Move::Marriage(_) => x[IS_MARRIAGE] = 1.0,
        Move::TrumpExchange(_) => x[IS_EXCHANGE] = 1.0,
        Move::Play(_) => {}
    }
    x[MOVE_OFFSET + mv.card().index()] = 1.0;
    FeatureVector(x)
}
