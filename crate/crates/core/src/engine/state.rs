use std::fmt;

use arrayvec::ArrayVec;

use super::card::{Card, CardSet, Rank, Suit};
use crate::error::{Error, Result};
use crate::rng::DetRng;

pub const WINNING_POINTS: u32 = 66;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P0,
    P1,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::P0, Player::P1];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Player {
        match self {
            Player::P0 => Player::P1,
            Player::P1 => Player::P0,
        }
    }

    pub fn from_index(i: usize) -> Player {
        if i.is_multiple_of(2) {
            Player::P0
        } else {
            Player::P1
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    PlayCard,
    Marriage,
    TrumpExchange,
}

impl MoveKind {
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::PlayCard => "play",
            MoveKind::Marriage => "marriage",
            MoveKind::TrumpExchange => "exchange",
        }
    }
}

/// A move. The derived ordering (kind, then canonical card index) is the canonical move order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Play(Card),
    /// Declares the King+Queen pair of the card's suit and leads the given card.
    Marriage(Card),
    /// Swaps the trump Jack for the face-up trump indicator.
    TrumpExchange(Card),
}

impl Move {
    pub fn kind(self) -> MoveKind {
        match self {
            Move::Play(_) => MoveKind::PlayCard,
            Move::Marriage(_) => MoveKind::Marriage,
            Move::TrumpExchange(_) => MoveKind::TrumpExchange,
        }
    }

    pub fn card(self) -> Card {
        match self {
            Move::Play(c) | Move::Marriage(c) | Move::TrumpExchange(c) => c,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind().name(), self.card())
    }
}

/// At most 5 plays, 4 marriage leads and 1 exchange.
pub type MoveList = ArrayVec<Move, 12>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrickRole {
    Leader,
    Follower,
}

/// Who takes a trick: trump beats non-trump, then the higher card of the led suit; an off-suit
/// non-trump reply always loses.
pub fn trick_winner(lead: Card, reply: Card, trump: Suit) -> TrickRole {
    debug_assert_ne!(lead, reply);
    if reply.suit == lead.suit {
        // lower rank index is stronger
        if reply.rank < lead.rank {
            TrickRole::Follower
        } else {
            TrickRole::Leader
        }
    } else if reply.suit == trump {
        TrickRole::Follower
    } else {
        TrickRole::Leader
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndReason {
    Reached66,
    LastTrick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DealOutcome {
    pub winner: Player,
    pub game_points: u32,
    pub reason: EndReason,
}

/// One logged move with both players' countable points right after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HistoryEntry {
    pub player: Player,
    pub mv: Move,
    pub points: [u32; 2],
}

/// Full authoritative state of one deal. A plain value: applying a move yields a new state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DealState {
    pub hands: [CardSet; 2],
    /// Face-down talon; the last element is drawn next.
    pub talon: ArrayVec<Card, 9>,
    /// Face-up card under the talon, drawn last. `None` once taken.
    pub trump_indicator: Option<Card>,
    pub trump_suit: Suit,
    pub leader: Player,
    pub on_table: Option<Card>,
    pub direct_points: [u32; 2],
    /// Declared marriage points; countable only once the declarer has won a trick.
    pub marriage_points: [u32; 2],
    pub tricks_won: [u32; 2],
    /// Captured cards per captor.
    pub won: [CardSet; 2],
    /// Cards each player has shown from hand (marriage partner, exchanged indicator) and still holds.
    pub revealed: [CardSet; 2],
    pub history: Vec<HistoryEntry>,
}

impl DealState {
    /// Shuffles with the seeded generator, deals 3+3, flips the indicator, deals 2+2. The first
    /// leader receives cards first; the rest forms the talon.
    pub fn new_deal(seed: u64, first_leader: Player) -> DealState {
        let mut deck: Vec<Card> = Card::deck().collect();
        DetRng::new(seed).shuffle(&mut deck);
        let follower = first_leader.other();
        let mut hands = [CardSet::EMPTY; 2];
        for &c in &deck[0..3] {
            hands[first_leader.index()].insert(c);
        }
        for &c in &deck[3..6] {
            hands[follower.index()].insert(c);
        }
        let indicator = deck[6];
        for &c in &deck[7..9] {
            hands[first_leader.index()].insert(c);
        }
        for &c in &deck[9..11] {
            hands[follower.index()].insert(c);
        }
        // deck[11] is drawn first, so it sits at the end of the stack.
        let talon: ArrayVec<Card, 9> = deck[11..20].iter().rev().copied().collect();
        DealState {
            hands,
            talon,
            trump_indicator: Some(indicator),
            trump_suit: indicator.suit,
            leader: first_leader,
            on_table: None,
            direct_points: [0; 2],
            marriage_points: [0; 2],
            tricks_won: [0; 2],
            won: [CardSet::EMPTY; 2],
            revealed: [CardSet::EMPTY; 2],
            history: Vec::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        if self.talon.is_empty() && self.trump_indicator.is_none() {
            Phase::Two
        } else {
            Phase::One
        }
    }

    /// Undrawn cards including the face-up indicator.
    pub fn talon_size(&self) -> usize {
        self.talon.len() + usize::from(self.trump_indicator.is_some())
    }

    pub fn to_move(&self) -> Player {
        if self.on_table.is_some() {
            self.leader.other()
        } else {
            self.leader
        }
    }

    pub fn countable_points(&self, player: Player) -> u32 {
        let p = player.index();
        if self.tricks_won[p] >= 1 {
            self.direct_points[p] + self.marriage_points[p]
        } else {
            self.direct_points[p]
        }
    }

    /// Marriage points declared but not yet countable.
    pub fn pending_points(&self, player: Player) -> u32 {
        let p = player.index();
        if self.tricks_won[p] == 0 {
            self.marriage_points[p]
        } else {
            0
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.decide().is_some()
    }

    fn decide(&self) -> Option<(Player, EndReason)> {
        for p in Player::BOTH {
            if self.countable_points(p) >= WINNING_POINTS {
                return Some((p, EndReason::Reached66));
            }
        }
        if self.won[0].union(self.won[1]) == CardSet::FULL {
            // The last trick's winner leads next.
            return Some((self.leader, EndReason::LastTrick));
        }
        None
    }

    /// Winner, game points (3/2/1) and reason of a finished deal.
    pub fn outcome(&self) -> Result<DealOutcome> {
        let (winner, reason) = self.decide().ok_or(Error::DealNotDecided)?;
        let loser = winner.other();
        let game_points = if self.tricks_won[loser.index()] == 0 {
            3
        } else if self.countable_points(loser) < 33 {
            2
        } else {
            1
        };
        Ok(DealOutcome {
            winner,
            game_points,
            reason,
        })
    }

    fn exchange_allowed(&self, player: Player) -> Option<Card> {
        let jack = Card::new(self.trump_suit, Rank::Jack);
        (self.on_table.is_none()
            && self.phase() == Phase::One
            && self.talon_size() >= 2
            && self.hands[player.index()].contains(jack))
        .then_some(jack)
    }

    /// Legal moves in canonical order.
    pub fn valid_moves(&self) -> Result<MoveList> {
        if self.is_terminal() {
            return Err(Error::DealDecided);
        }
        let mover = self.to_move();
        let hand = self.hands[mover.index()];
        let mut moves = MoveList::new();
        match self.on_table {
            None => {
                moves.extend(hand.iter().map(Move::Play));
                for c in hand.iter() {
                    if let Some(partner) = c.marriage_partner() {
                        if hand.contains(partner) {
                            moves.push(Move::Marriage(c));
                        }
                    }
                }
                if let Some(jack) = self.exchange_allowed(mover) {
                    moves.push(Move::TrumpExchange(jack));
                }
            }
            Some(lead) => {
                let playable = match self.phase() {
                    Phase::One => hand,
                    Phase::Two => follower_obligation(hand, lead, self.trump_suit),
                };
                moves.extend(playable.iter().map(Move::Play));
            }
        }
        Ok(moves)
    }

    /// Names the first rule `mv` violates, if any.
    pub fn check_move(&self, mv: Move) -> Result<(), &'static str> {
        if self.is_terminal() {
            return Err("deal already decided");
        }
        let mover = self.to_move();
        let hand = self.hands[mover.index()];
        let card = mv.card();
        if !hand.contains(card) {
            return Err("card not in mover's hand");
        }
        match (mv, self.on_table) {
            (Move::Play(_), None) => Ok(()),
            (Move::Marriage(_) | Move::TrumpExchange(_), Some(_)) => {
                Err("only the leader may declare a marriage or exchange the trump")
            }
            (Move::Marriage(c), None) => match c.marriage_partner() {
                Some(partner) if hand.contains(partner) => Ok(()),
                _ => Err("marriage requires the King and Queen of one suit"),
            },
            (Move::TrumpExchange(c), None) => {
                if c != Card::new(self.trump_suit, Rank::Jack) {
                    Err("only the trump Jack can be exchanged")
                } else if self.phase() == Phase::Two || self.talon_size() < 2 {
                    Err("trump exchange needs at least two undrawn cards")
                } else {
                    Ok(())
                }
            }
            (Move::Play(c), Some(lead)) => {
                if self.phase() == Phase::One {
                    return Ok(());
                }
                let same = hand.of_suit(lead.suit);
                if !same.is_empty() {
                    if c.suit != lead.suit {
                        return Err("must follow suit");
                    }
                    let beats = same.iter().any(|h| h.rank < lead.rank);
                    if beats && c.rank > lead.rank {
                        return Err("must beat the led card when able");
                    }
                    Ok(())
                } else if !hand.of_suit(self.trump_suit).is_empty() && c.suit != self.trump_suit {
                    Err("must trump when void in the led suit")
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn apply_move(&self, mv: Move) -> Result<DealState> {
        let mut next = self.clone();
        next.apply_in_place(mv)?;
        Ok(next)
    }

    pub fn apply_in_place(&mut self, mv: Move) -> Result<()> {
        if self.is_terminal() {
            return Err(Error::DealDecided);
        }
        self.check_move(mv).map_err(|rule| Error::IllegalMove {
            mv: mv.to_string(),
            rule,
        })?;
        let mover = self.to_move();
        let m = mover.index();
        match mv {
            Move::TrumpExchange(jack) => {
                let indicator = self
                    .trump_indicator
                    .expect("exchange allowed only with the indicator undrawn");
                self.hands[m].remove(jack);
                self.revealed[m].remove(jack);
                self.hands[m].insert(indicator);
                self.revealed[m].insert(indicator);
                self.trump_indicator = Some(jack);
            }
            Move::Play(card) | Move::Marriage(card) if self.on_table.is_none() => {
                if let Move::Marriage(_) = mv {
                    let partner = card.marriage_partner().expect("checked");
                    self.marriage_points[m] += if card.suit == self.trump_suit { 40 } else { 20 };
                    self.revealed[m].insert(partner);
                }
                self.hands[m].remove(card);
                self.revealed[m].remove(card);
                self.on_table = Some(card);
            }
            Move::Play(reply) => {
                let lead = self.on_table.take().expect("follower reply");
                self.hands[m].remove(reply);
                self.revealed[m].remove(reply);
                let winner = match trick_winner(lead, reply, self.trump_suit) {
                    TrickRole::Leader => self.leader,
                    TrickRole::Follower => mover,
                };
                let w = winner.index();
                self.won[w].insert(lead);
                self.won[w].insert(reply);
                self.direct_points[w] += lead.points() + reply.points();
                self.tricks_won[w] += 1;
                self.leader = winner;
                if self.phase() == Phase::One {
                    for p in [winner, winner.other()] {
                        let drawn = self.talon.pop().or_else(|| self.trump_indicator.take());
                        if let Some(c) = drawn {
                            self.hands[p.index()].insert(c);
                        }
                    }
                }
            }
            Move::Marriage(_) => unreachable!("rejected by check_move"),
        }
        self.history.push(HistoryEntry {
            player: mover,
            mv,
            points: [
                self.countable_points(Player::P0),
                self.countable_points(Player::P1),
            ],
        });
        Ok(())
    }

    /// One line per move: `<ply>;<player>;<kind>;<card>;<points0>;<points1>`, points being
    /// countable points after the move.
    pub fn transcript(&self) -> Vec<String> {
        self.history
            .iter()
            .enumerate()
            .map(|(ply, h)| {
                format!(
                    "{};{};{};{};{};{}",
                    ply,
                    h.player,
                    h.mv.kind().name(),
                    h.mv.card(),
                    h.points[0],
                    h.points[1]
                )
            })
            .collect()
    }

    /// Structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = CardSet::EMPTY;
        let mut count = 0;
        let mut add = |set: CardSet, what: &str| -> Result<(), String> {
            if !seen.is_disjoint(set) {
                return Err(format!("{what} overlaps other piles"));
            }
            seen = seen.union(set);
            count += set.len();
            Ok(())
        };
        add(self.hands[0], "hand 0")?;
        add(self.hands[1], "hand 1")?;
        add(self.talon.iter().copied().collect(), "talon")?;
        if self.talon.iter().copied().collect::<CardSet>().len() != self.talon.len() {
            return Err("talon holds duplicates".into());
        }
        add(self.trump_indicator.into_iter().collect(), "indicator")?;
        add(self.on_table.into_iter().collect(), "table")?;
        add(self.won[0], "won 0")?;
        add(self.won[1], "won 1")?;
        if seen != CardSet::FULL || count != 20 {
            return Err(format!("cards not conserved: {count} accounted"));
        }
        for p in 0..2 {
            if !self.revealed[p].is_subset(self.hands[p]) {
                return Err(format!("revealed {p} not within hand"));
            }
            if self.won[p].points() != self.direct_points[p] {
                return Err(format!("direct points {p} disagree with captured cards"));
            }
            if self.won[p].len() != 2 * self.tricks_won[p] as usize {
                return Err(format!("trick count {p} disagrees with captured cards"));
            }
        }
        if self.on_table.is_none() && self.hands[0].len() != self.hands[1].len() {
            return Err("hand sizes differ between tricks".into());
        }
        if self.trump_indicator.is_none() && !self.talon.is_empty() {
            return Err("indicator drawn before talon".into());
        }
        if self.direct_points[0] + self.direct_points[1] > 120 {
            return Err("more than 120 card points captured".into());
        }
        Ok(())
    }
}

/// Phase-2 reply obligation: follow suit and beat if able; if void, trump if able; else anything.
fn follower_obligation(hand: CardSet, lead: Card, trump: Suit) -> CardSet {
    let same = hand.of_suit(lead.suit);
    if !same.is_empty() {
        let beating: CardSet = same.iter().filter(|c| c.rank < lead.rank).collect();
        if beating.is_empty() {
            same
        } else {
            beating
        }
    } else {
        let trumps = hand.of_suit(trump);
        if trumps.is_empty() {
            hand
        } else {
            trumps
        }
    }
}
