use std::sync::Arc;

use ndarray::Array1;
use schnapsen_core::bots::{choose_rdeep, play_deal, BotSpec};
use schnapsen_core::encoder::{encode, FeatureVector, FEATURES};
use schnapsen_core::engine::{DealState, Move, Player};
use schnapsen_core::neuralnet::Mlp;
use schnapsen_core::rng::DetRng;
use schnapsen_core::store::model_to_bytes;
use schnapsen_core::trainer::{
    choose_lookahead, choose_rl, epsilon, generate_replay, q_values, rl_train, train_supervised,
    GreedyBot, HeuristicLeaf, ReplayBuffer, ReplayDataset, ReplaySample, RlConfig,
    SupervisedConfig,
};

fn spec(s: &str) -> BotSpec {
    s.parse().unwrap()
}

fn tagged(i: usize) -> ReplaySample {
    let mut x = [0f32; FEATURES];
    x[0] = i as f32;
    ReplaySample {
        x: FeatureVector(x),
        g: 0,
    }
}

#[test]
fn labels_split_by_winner() {
    let (a, b) = (spec("rand:4"), spec("bully:5"));
    let agents = [a.build().unwrap(), b.build().unwrap()];
    for i in 0..200u64 {
        // Game 0 of a replay run: the first bot leads.
        let leader = Player::P0;
        let mut per_player = [0usize; 2];
        let end = play_deal(&agents, 1000 + i, leader, |p, _, _| {
            per_player[p.index()] += 1
        })
        .unwrap();
        let winner = end.outcome().unwrap().winner;
        let data = generate_replay(&a, &b, 1, 1000 + i).unwrap();
        let ones = data.samples.iter().filter(|s| s.g == 1).count();
        assert_eq!(ones, per_player[winner.index()]);
        assert_eq!(data.len() - ones, per_player[winner.other().index()]);
        assert!(ones > 0 && ones < data.len());
    }
}

#[test]
fn decisions_per_deal_bounds() {
    let a = spec("rand:1");
    let b = spec("rand:2");
    let (mut lo, mut hi) = (usize::MAX, 0);
    for i in 0..1000 {
        let n = generate_replay(&a, &b, 1, i).unwrap().len();
        lo = lo.min(n);
        hi = hi.max(n);
    }
    // A deal can end on a marriage declaration after two tricks.
    assert!(lo >= 3 && hi <= 21, "{lo}..{hi}");
}

#[test]
fn replay_is_seed_deterministic() {
    let a = spec("rdeep:d=2,s=2,seed=1");
    let b = spec("rand:2");
    assert_eq!(
        generate_replay(&a, &b, 6, 40).unwrap(),
        generate_replay(&a, &b, 6, 40).unwrap()
    );
}

#[test]
fn buffer_capacity_and_eviction() {
    let mut buf = ReplayBuffer::new(100_000);
    buf.push((0..100_001).map(tagged));
    assert_eq!(buf.len(), 100_000);
    assert_eq!(buf.iter().next().unwrap().x.0[0], 1.0);
    assert_eq!(buf.iter().last().unwrap().x.0[0], 100_000.0);
    let mut rng = DetRng::new(1);
    assert_eq!(buf.sample(1024, &mut rng).unwrap().len(), 1024);
    assert_eq!(buf.sample_batch(1024, &mut rng).unwrap().len(), 1024);
}

#[test]
fn buffer_sampling_is_uniform() {
    let mut buf = ReplayBuffer::new(10);
    buf.push((0..10).map(tagged));
    let mut rng = DetRng::new(33);
    let mut counts = [0u32; 10];
    let draws = 100_000;
    // Draws of size 10 each: a sample may not exceed the buffer's current size.
    for _ in 0..draws / 10 {
        for i in buf.sample_indices(10, &mut rng).unwrap() {
            counts[i] += 1;
        }
    }
    let n = draws as f64;
    let sigma = (n * 0.1 * 0.9).sqrt();
    for c in counts {
        assert!((f64::from(c) - 0.1 * n).abs() <= 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn epsilon_schedule() {
    let cfg = RlConfig::default();
    assert_eq!(epsilon(0, &cfg), 0.23);
    assert!((epsilon(1_200_000, &cfg) - 0.02).abs() < 1e-15);
    assert!((epsilon(600_000, &cfg) - 0.125).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for g in (0..1_500_000).step_by(997) {
        let e = epsilon(g, &cfg);
        assert!(e <= prev && (0.02 - 1e-15..=0.23).contains(&e));
        prev = e;
    }
}

fn decision_points(n: usize) -> Vec<(DealState, Vec<Move>)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < n {
        let mut s = DealState::new_deal(seed, Player::from_index(seed as usize));
        let mut rng = DetRng::new(seed + 7);
        while !s.is_terminal() && out.len() < n {
            let valid = s.valid_moves().unwrap().to_vec();
            out.push((s.clone(), valid.clone()));
            s.apply_in_place(valid[rng.below(valid.len())]).unwrap();
        }
        seed += 1;
    }
    out
}

#[test]
fn greedy_choice_ignores_monotone_output_shift() {
    let mut mlp = Mlp::<f32>::init(8);
    let points = decision_points(300);
    let base: Vec<Move> = points
        .iter()
        .map(|(s, v)| {
            choose_rl(
                &mlp,
                &s.perspective(s.to_move()),
                v,
                0.0,
                &mut DetRng::new(0),
            )
            .unwrap()
        })
        .collect();
    for shift in [-3.0, 0.5, 2.0] {
        mlp.b2 += shift;
        for ((s, v), want) in points.iter().zip(&base) {
            let got = choose_rl(
                &mlp,
                &s.perspective(s.to_move()),
                v,
                0.0,
                &mut DetRng::new(0),
            )
            .unwrap();
            assert_eq!(got, *want);
        }
    }
}

#[test]
fn greedy_picks_engineered_move() {
    let s = DealState::new_deal(3, Player::P0);
    let view = s.perspective(Player::P0);
    let valid = s.valid_moves().unwrap();
    let target = valid[valid.len() / 2];
    // One hidden unit that fires only for the target's move-card feature.
    let mut mlp = Mlp::<f32>::zeros(FEATURES, 1);
    let probe = encode(&view, target);
    let hot = (153..173).find(|&i| probe.0[i] == 1.0).unwrap();
    mlp.w1[[0, hot]] = 1.0;
    mlp.w2 = Array1::from(vec![3.0]);
    let q = q_values(&mlp, &view, &valid).unwrap();
    assert!(valid
        .iter()
        .zip(&q)
        .all(|(m, &v)| (*m == target) == (v > 0.6)));
    let mut rng = DetRng::new(0);
    assert_eq!(
        choose_rl(&mlp, &view, &valid, 0.0, &mut rng).unwrap(),
        target
    );
}

#[test]
fn full_exploration_matches_random_bot() {
    let mlp = Mlp::<f32>::init(1);
    for (s, valid) in decision_points(200) {
        let view = s.perspective(s.to_move());
        let mut r1 = DetRng::new(5);
        let mut r2 = DetRng::new(5);
        let a = choose_rl(&mlp, &view, &valid, 1.0, &mut r1).unwrap();
        let b = schnapsen_core::bots::choose_rand(&valid, &mut r2).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn heuristic_lookahead_equals_rdeep() {
    for (k, (s, valid)) in decision_points(1000).into_iter().enumerate() {
        let view = s.perspective(s.to_move());
        let depth = 1 + (k % 5) as u32;
        let samples = 1 + (k % 4) as u32;
        let mut r1 = DetRng::new(k as u64);
        let mut r2 = DetRng::new(k as u64);
        let a = choose_lookahead(&view, &valid, depth, samples, &mut r1, &HeuristicLeaf).unwrap();
        let b = choose_rdeep(&view, &valid, depth, samples, &mut r2).unwrap();
        assert_eq!(a, b, "point {k}");
        assert_eq!(r1.next_u64(), r2.next_u64());
    }
}

#[test]
fn supervised_first_epoch_near_ln2() {
    let mut rng = DetRng::new(3);
    let samples = (0..1000)
        .map(|_| {
            let mut x = [0f32; FEATURES];
            for v in x.iter_mut() {
                *v = f32::from(rng.below(4) == 0);
            }
            ReplaySample {
                x: FeatureVector(x),
                g: rng.below(2) as u8,
            }
        })
        .collect();
    let data = ReplayDataset {
        samples,
        ..ReplayDataset::default()
    };
    let cfg = SupervisedConfig {
        epochs: 1,
        ..SupervisedConfig::default()
    };
    let (_, log) = train_supervised(&data, &cfg, 9).unwrap();
    let first = log.epoch_losses[0];
    assert!((first - std::f64::consts::LN_2).abs() <= 0.15, "{first}");
}

#[test]
fn supervised_loss_falls_on_real_replay() {
    let data = generate_replay(&spec("bully:1"), &spec("rand:2"), 900, 500).unwrap();
    assert!(data.len() >= 10_000, "{}", data.len());
    let cfg = SupervisedConfig {
        epochs: 6,
        ..SupervisedConfig::default()
    };
    let (mlp, log) = train_supervised(&data, &cfg, 1).unwrap();
    assert!(
        log.epoch_losses.last().unwrap() < &log.epoch_losses[0],
        "{:?}",
        log.epoch_losses
    );
    assert!(mlp.is_finite());
}

#[test]
fn single_worker_rl_is_reproducible() {
    let cfg = RlConfig {
        total_games: 150,
        minibatch: 64,
        warmup_samples: 200,
        buffer_capacity: 5_000,
        log_interval: 50,
        base_seed: 17,
        ..RlConfig::default()
    };
    let (a, log_a) = rl_train(&spec("rand:3"), &cfg, 2).unwrap();
    let (b, log_b) = rl_train(&spec("rand:3"), &cfg, 2).unwrap();
    assert_eq!(model_to_bytes(&a), model_to_bytes(&b));
    assert_eq!(log_a, log_b);
    assert_ne!(a, Mlp::init(2));
    // The trained network plugs into the bot interface.
    let bot = GreedyBot::new(Arc::new(a));
    let s = DealState::new_deal(1, Player::P0);
    let valid = s.valid_moves().unwrap();
    let m = schnapsen_core::bots::Bot::choose(
        &bot,
        &s.perspective(Player::P0),
        &valid,
        &mut DetRng::new(0),
    )
    .unwrap();
    assert!(valid.contains(&m));
}
