use arrayvec::ArrayVec;

use crate::engine::{Card, CardSet, DealState, Move, Perspective, Player};
use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Samples a full deal consistent with `view`: revealed opponent cards stay in the opponent's
/// hand, the remaining unseen cards are dealt randomly between the rest of that hand and the
/// face-down talon. Public fields are copied as-is.
pub fn determinize(view: &Perspective, rng: &mut DetRng) -> Result<DealState> {
    let me = view.me;
    let opp = me.other();
    let opp_size = view.opp_hand_size();
    let face_down = match view.trump_indicator {
        Some(_) => view.talon_size.checked_sub(1),
        None if view.talon_size == 0 => Some(0),
        None => None,
    }
    .ok_or_else(|| Error::InconsistentPerspective("talon without indicator".into()))?;
    let unseen = view.unseen();
    let hidden_opp = opp_size.checked_sub(view.opp_known.len()).ok_or_else(|| {
        Error::InconsistentPerspective("opponent reveals more than it holds".into())
    })?;
    if unseen.len() != hidden_opp + face_down {
        return Err(Error::InconsistentPerspective(format!(
            "{} unseen cards for {} hidden hand cards and {} talon cards",
            unseen.len(),
            hidden_opp,
            face_down
        )));
    }
    if !view.my_hand.is_disjoint(view.opp_known)
        || !view.my_hand.is_disjoint(view.gone())
        || !view.my_revealed.is_subset(view.my_hand)
    {
        return Err(Error::InconsistentPerspective(
            "overlapping card sets".into(),
        ));
    }

    let mut pool: ArrayVec<Card, 20> = unseen.iter().collect();
    rng.shuffle(&mut pool);
    let mut opp_hand = view.opp_known;
    for &c in &pool[..hidden_opp] {
        opp_hand.insert(c);
    }
    let talon: ArrayVec<Card, 9> = pool[hidden_opp..].iter().copied().collect();

    let mut hands = [CardSet::EMPTY; 2];
    hands[me.index()] = view.my_hand;
    hands[opp.index()] = opp_hand;
    let mut won = [CardSet::EMPTY; 2];
    won[me.index()] = view.won_by_me;
    won[opp.index()] = view.won_by_opp;
    let mut revealed = [CardSet::EMPTY; 2];
    revealed[opp.index()] = view.opp_known;
    revealed[me.index()] = view.my_revealed;

    let mut direct_points = [0; 2];
    let mut tricks_won = [0; 2];
    let mut marriage_points = [0; 2];
    for (p, points, pending) in [
        (me, view.my_points, view.my_pending),
        (opp, view.opp_points, view.opp_pending),
    ] {
        let i = p.index();
        direct_points[i] = won[i].points();
        tricks_won[i] = (won[i].len() / 2) as u32;
        marriage_points[i] = if tricks_won[i] == 0 {
            pending
        } else {
            points.checked_sub(direct_points[i]).ok_or_else(|| {
                Error::InconsistentPerspective("points below captured card value".into())
            })?
        };
    }

    Ok(DealState {
        hands,
        talon,
        trump_indicator: view.trump_indicator,
        trump_suit: view.trump_suit,
        leader: if view.i_lead { me } else { opp },
        on_table: view.on_table,
        direct_points,
        marriage_points,
        tricks_won,
        won,
        revealed,
        history: view.history.clone(),
    })
}

/// Plays up to `plies` uniformly random legal moves, stopping at a terminal state.
pub fn playout(state: &DealState, plies: u32, rng: &mut DetRng) -> DealState {
    let mut s = state.clone();
    playout_in_place(&mut s, plies, rng);
    s
}

pub(crate) fn playout_in_place(state: &mut DealState, plies: u32, rng: &mut DetRng) {
    for _ in 0..plies {
        let Ok(moves) = state.valid_moves() else {
            break;
        };
        let m = moves[rng.below(moves.len())];
        state
            .apply_in_place(m)
            .expect("moves from valid_moves always apply");
    }
}

/// 1/0 for a decided deal, otherwise the player's share of countable points (0.5 if both 0).
pub fn evaluate_state(state: &DealState, player: Player) -> f64 {
    if let Ok(outcome) = state.outcome() {
        return if outcome.winner == player { 1.0 } else { 0.0 };
    }
    let mine = state.countable_points(player) as f64;
    let theirs = state.countable_points(player.other()) as f64;
    if mine + theirs == 0.0 {
        0.5
    } else {
        mine / (mine + theirs)
    }
}

/// Determinized random lookahead: each move is scored by the mean of `num_samples` leaf
/// evaluations, where a leaf is a fresh determinization with the move applied followed by
/// `depth - 1` random plies. Returns the first move with the highest mean.
pub fn choose_rdeep(
    view: &Perspective,
    valid: &[Move],
    depth: u32,
    num_samples: u32,
    rng: &mut DetRng,
) -> Result<Move> {
    match valid {
        [] => return Err(Error::NoMoves),
        [only] => return Ok(*only),
        _ => {}
    }
    let mut best = valid[0];
    let mut best_score = f64::NEG_INFINITY;
    for &mv in valid {
        let mut total = 0.0;
        for _ in 0..num_samples {
            let mut state = determinize(view, rng)?;
            state.apply_in_place(mv)?;
            playout_in_place(&mut state, depth.saturating_sub(1), rng);
            total += evaluate_state(&state, view.me);
        }
        let score = total / num_samples as f64;
        if score > best_score {
            best_score = score;
            best = mv;
        }
    }
    Ok(best)
}
