use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Clubs,
    Diamonds,
    Hearts,
    Spades,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
        }
    }
}

/// Ranks in canonical order, strongest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Ace,
    Ten,
    King,
    Queen,
    Jack,
}

impl Rank {
    pub const ALL: [Rank; 5] = [Rank::Ace, Rank::Ten, Rank::King, Rank::Queen, Rank::Jack];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Rank::Ace => 'A',
            Rank::Ten => 'T',
            Rank::King => 'K',
            Rank::Queen => 'Q',
            Rank::Jack => 'J',
        }
    }
}

/// Card points captured with a trick.
pub fn card_points(rank: Rank) -> u32 {
    match rank {
        Rank::Ace => 11,
        Rank::Ten => 10,
        Rank::King => 4,
        Rank::Queen => 3,
        Rank::Jack => 2,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: Suit,
    pub rank: Rank,
}

impl Card {
    pub const fn new(suit: Suit, rank: Rank) -> Self {
        Card { suit, rank }
    }

    /// `suit * 5 + rank`, in `0..20`.
    pub fn index(self) -> usize {
        self.suit.index() * 5 + self.rank.index()
    }

    pub fn from_index(index: usize) -> Card {
        assert!(index < 20, "card index {index} out of range");
        Card {
            suit: Suit::ALL[index / 5],
            rank: Rank::ALL[index % 5],
        }
    }

    pub fn points(self) -> u32 {
        card_points(self.rank)
    }

    /// The other half of a marriage pair, if this card is a King or Queen.
    pub fn marriage_partner(self) -> Option<Card> {
        match self.rank {
            Rank::King => Some(Card::new(self.suit, Rank::Queen)),
            Rank::Queen => Some(Card::new(self.suit, Rank::King)),
            _ => None,
        }
    }

    /// All 20 cards in canonical order.
    pub fn deck() -> impl Iterator<Item = Card> {
        (0..20).map(Card::from_index)
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Two-letter form: rank then suit, e.g. `AH` for the Ace of Hearts, `TC` for the Ten of Clubs.
impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank.letter(), self.suit.letter())
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let (Some(r), Some(su), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(Error::Parse(format!("bad card '{s}'")));
        };
        let rank = Rank::ALL
            .into_iter()
            .find(|x| x.letter() == r.to_ascii_uppercase())
            .ok_or_else(|| Error::Parse(format!("bad rank in '{s}'")))?;
        let suit = Suit::ALL
            .into_iter()
            .find(|x| x.letter() == su.to_ascii_uppercase())
            .ok_or_else(|| Error::Parse(format!("bad suit in '{s}'")))?;
        Ok(Card::new(suit, rank))
    }
}

/// A set of cards as a 20-bit mask over canonical indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CardSet(u32);

impl CardSet {
    pub const EMPTY: CardSet = CardSet(0);
    pub const FULL: CardSet = CardSet((1 << 20) - 1);

    pub fn from_bits(bits: u32) -> Self {
        CardSet(bits & Self::FULL.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, card: Card) -> bool {
        self.0 & (1 << card.index()) != 0
    }

    pub fn insert(&mut self, card: Card) {
        self.0 |= 1 << card.index();
    }

    pub fn remove(&mut self, card: Card) -> bool {
        let had = self.contains(card);
        self.0 &= !(1 << card.index());
        had
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CardSet) -> CardSet {
        CardSet(self.0 | other.0)
    }

    pub fn intersection(self, other: CardSet) -> CardSet {
        CardSet(self.0 & other.0)
    }

    pub fn difference(self, other: CardSet) -> CardSet {
        CardSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: CardSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: CardSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn of_suit(self, suit: Suit) -> CardSet {
        CardSet(self.0 & (0b11111 << (suit.index() * 5)))
    }

    pub fn points(self) -> u32 {
        self.iter().map(Card::points).sum()
    }

    /// Cards in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Card> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(Card::from_index(i))
            }
        })
    }
}

impl FromIterator<Card> for CardSet {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        let mut set = CardSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Debug for CardSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
