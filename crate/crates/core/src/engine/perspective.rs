use super::card::{Card, CardSet, Suit};
use super::state::{DealState, HistoryEntry, Phase, Player};

/// Everything one player may legally observe about a deal. Bots only ever see this.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perspective {
    pub me: Player,
    pub my_hand: CardSet,
    /// Cards of my hand the opponent has seen.
    pub my_revealed: CardSet,
    pub trump_suit: Suit,
    pub trump_indicator: Option<Card>,
    /// Undrawn cards, face-up indicator included.
    pub talon_size: usize,
    pub phase: Phase,
    pub on_table: Option<Card>,
    pub my_points: u32,
    pub opp_points: u32,
    pub my_pending: u32,
    pub opp_pending: u32,
    /// Cards the opponent has revealed and still holds.
    pub opp_known: CardSet,
    pub won_by_me: CardSet,
    pub won_by_opp: CardSet,
    pub i_lead: bool,
    /// Public move log.
    pub history: Vec<HistoryEntry>,
}

impl Perspective {
    pub fn of(state: &DealState, me: Player) -> Perspective {
        let opp = me.other();
        Perspective {
            me,
            my_hand: state.hands[me.index()],
            my_revealed: state.revealed[me.index()],
            trump_suit: state.trump_suit,
            trump_indicator: state.trump_indicator,
            talon_size: state.talon_size(),
            phase: state.phase(),
            on_table: state.on_table,
            my_points: state.countable_points(me),
            opp_points: state.countable_points(opp),
            my_pending: state.pending_points(me),
            opp_pending: state.pending_points(opp),
            opp_known: state.revealed[opp.index()],
            won_by_me: state.won[me.index()],
            won_by_opp: state.won[opp.index()],
            i_lead: state.leader == me,
            history: state.history.clone(),
        }
    }

    pub fn gone(&self) -> CardSet {
        self.won_by_me.union(self.won_by_opp)
    }

    /// Cards whose location is unknown to me: opponent hand minus its revealed part, plus the
    /// face-down talon.
    pub fn unseen(&self) -> CardSet {
        let mut seen = self.my_hand.union(self.gone()).union(self.opp_known);
        if let Some(c) = self.trump_indicator {
            seen.insert(c);
        }
        if let Some(c) = self.on_table {
            seen.insert(c);
        }
        CardSet::FULL.difference(seen)
    }

    pub fn opp_hand_size(&self) -> usize {
        let n = self.my_hand.len();
        match (self.on_table, self.i_lead) {
            (Some(_), true) => n + 1,
            (Some(_), false) => n.saturating_sub(1),
            (None, _) => n,
        }
    }

    pub fn my_turn(&self) -> bool {
        self.i_lead == self.on_table.is_none()
    }
}

impl DealState {
    pub fn perspective(&self, player: Player) -> Perspective {
        Perspective::of(self, player)
    }
}
