//! Acceptance gate. Prints one line per criterion and exits non-zero if any fails.
//!
//! `cargo test --test acceptance` runs all twelve; `cargo test --test acceptance -- 3 5` runs a
//! subset.

mod common;

use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use schnapsen_core::arena::{normal_cdf, run_matrix, run_pairing, z_test, Verdict};
use schnapsen_core::bots::{choose_rdeep, play_deal, BotSpec};
use schnapsen_core::encoder::{FeatureVector, FEATURES};
use schnapsen_core::engine::{DealState, EndReason, Move, Phase, Player};
use schnapsen_core::neuralnet::{loss, AdamState, Batch, Gradients, LossKind, Mlp};
use schnapsen_core::rng::DetRng;
use schnapsen_core::store::{model_to_bytes, save_dataset, save_model};
use schnapsen_core::trainer::{
    choose_lookahead, epsilon, generate_replay, rl_train, train_supervised, HeuristicLeaf,
    ReplayBuffer, ReplaySample, RlConfig, SupervisedConfig,
};

type Check = Result<String, String>;

fn spec(s: &str) -> BotSpec {
    s.parse().expect("valid bot spec")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn engine_soundness() -> Check {
    let agents = [
        spec("rand:101").build().map_err(err)?,
        spec("rand:202").build().map_err(err)?,
    ];
    let mut last_trick = 0;
    for seed in 0..10_000u64 {
        let lead = Player::from_index(seed as usize);
        let end = play_deal(&agents, seed, lead, |_, _, _| {}).map_err(err)?;
        end.check_invariants()?;
        if end.outcome().map_err(err)?.reason == EndReason::LastTrick {
            last_trick += 1;
            let total = end.direct_points[0] + end.direct_points[1];
            ensure(
                total == 120,
                format!("deal {seed} ended by last trick with {total} points"),
            )?;
        }
    }
    let mut states = 0u64;
    let mut seed = 1_000_000u64;
    while states < 100_000 {
        let mut s = DealState::new_deal(seed, Player::from_index(seed as usize));
        let mut rng = DetRng::new(seed);
        while !s.is_terminal() {
            let valid = s.valid_moves().map_err(err)?;
            if let (Phase::Two, Some(lead)) = (s.phase(), s.on_table) {
                let hand = s.hands[s.to_move().index()];
                let want = common::naive_phase_two_replies(hand, lead, s.trump_suit);
                ensure(
                    valid.to_vec() == want,
                    format!("phase-two disagreement, deal {seed}"),
                )?;
                states += 1;
            }
            s.apply_in_place(valid[rng.below(valid.len())])
                .map_err(err)?;
        }
        seed += 1;
    }
    Ok(format!(
        "10000 deals clean, {last_trick} last-trick deals all at 120 points, {states} phase-two states agree with the oracle"
    ))
}

/// Standard normal CDF reference values (mpmath, 40 digits).
const PHI_REFERENCE: [(f64, f64); 11] = [
    (0.0, 0.5),
    (0.5, 0.691_462_461_274_013_1),
    (-0.5, 0.308_537_538_725_986_9),
    (1.0, 0.841_344_746_068_542_9),
    (-1.0, 0.158_655_253_931_457_05),
    (1.96, 0.975_002_104_851_779_6),
    (-1.96, 0.024_997_895_148_220_436),
    (2.58, 0.995_059_984_242_229_4),
    (-2.58, 0.004_940_015_757_770_645),
    (4.0, 0.999_968_328_758_166_9),
    (-4.0, 0.000_031_671_241_833_119_92),
];

fn statistics_oracle() -> Check {
    let t = z_test(5000, 10_000).map_err(err)?;
    ensure(t.se == 0.005, format!("SE at n=10000 is {}", t.se))?;
    let t = z_test(5721, 10_000).map_err(err)?;
    ensure((t.z - 14.42).abs() <= 0.01, format!("z = {}", t.z))?;
    let mut worst: f64 = 0.0;
    for (z, want) in PHI_REFERENCE {
        worst = worst.max((normal_cdf(z) - want).abs());
    }
    ensure(worst <= 1e-7, format!("CDF error {worst:e}"))?;
    Ok(format!(
        "SE = 0.005, z(0.5721) = {:.4}, max CDF error {worst:.1e}",
        t.z
    ))
}

fn rdeep_beats_rand() -> Check {
    let r = run_pairing(
        &spec("rdeep:d=2,s=4,seed=11"),
        &spec("rand:12"),
        1000,
        30_000,
    )
    .map_err(err)?;
    let line = format!("p_hat {:.3}, z {:.2}, verdict {}", r.p_hat, r.z, r.verdict);
    ensure(r.verdict == Verdict::B && r.p_hat >= 0.55, line.clone())?;
    Ok(line)
}

fn more_samples_help() -> Check {
    let r = run_pairing(
        &spec("rdeep:d=4,s=20,seed=21"),
        &spec("rdeep:d=4,s=4,seed=22"),
        500,
        40_000,
    )
    .map_err(err)?;
    let line = format!("p_hat {:.3}, z {:.2}, verdict {}", r.p_hat, r.z, r.verdict);
    ensure(r.p_hat > 0.5, line.clone())?;
    Ok(line)
}

fn supervised_mlp_trails_rdeep() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let a = spec("rdeep:d=2,s=4,seed=4564654644");
    let b = spec("rdeep:d=2,s=4,seed=68438");
    let data = generate_replay(&a, &b, 2000, 0).map_err(err)?;
    save_dataset(&data, dir.path().join("replay.snpd")).map_err(err)?;
    let cfg = SupervisedConfig {
        epochs: 20,
        ..SupervisedConfig::default()
    };
    let (mlp, log) = train_supervised(&data, &cfg, 1).map_err(err)?;
    let path = dir.path().join("mlp.snpw");
    save_model(&mlp, &path).map_err(err)?;
    let r = run_pairing(
        &BotSpec::Mlp { model: path },
        &spec("rdeep:d=2,s=4,seed=31"),
        500,
        50_000,
    )
    .map_err(err)?;
    let line = format!(
        "{} samples, loss {:.4} -> {:.4}, MLP vs Rdeep-D2 p_hat {:.3} ({})",
        data.len(),
        log.epoch_losses[0],
        log.epoch_losses.last().unwrap(),
        r.p_hat,
        r.verdict
    );
    ensure(r.p_hat < 0.5, line.clone())?;
    Ok(line)
}

fn fd_batch(seed: u64) -> Batch<f64> {
    let mut rng = DetRng::new(seed);
    let x = Array2::from_shape_fn((8, FEATURES), |_| rng.unit_f64());
    let g = Array1::from_shape_fn(8, |_| f64::from(rng.below(2) as u8));
    Batch::new(x, g).expect("well-formed batch")
}

fn fd_loss(m: &Mlp<f64>, b: &Batch<f64>) -> f64 {
    let y = m.forward_batch(b.inputs.view()).expect("finite");
    loss(
        y.as_slice().unwrap(),
        b.targets.as_slice().unwrap(),
        LossKind::Bce,
    )
    .expect("sizes")
}

fn gradient_check() -> Check {
    const H: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..20 {
        let m = Mlp::<f64>::init_with(FEATURES, 16, seed);
        let b = fd_batch(500 + seed);
        let (_, g) = m.loss_and_gradients(&b, LossKind::Bce);
        let analytic: Vec<f64> =
            g.w1.iter()
                .chain(g.b1.iter())
                .chain(g.w2.iter())
                .chain(std::iter::once(&g.b2))
                .copied()
                .collect();
        let mut probe = m.clone();
        for (i, &a) in analytic.iter().enumerate() {
            let numeric = {
                let mut at = |delta: f64| {
                    let slot = param_slot(&mut probe, i);
                    let orig = *slot;
                    *slot = orig + delta;
                    let l = fd_loss(&probe, &b);
                    *param_slot(&mut probe, i) = orig;
                    l
                };
                (at(H) - at(-H)) / (2.0 * H)
            };
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR));
            checked += 1;
        }
    }
    ensure(worst <= 1e-4, format!("max relative error {worst:e}"))?;
    Ok(format!(
        "{checked} parameters over 20 seeds, max relative error {worst:.2e}"
    ))
}

fn param_slot(m: &mut Mlp<f64>, i: usize) -> &mut f64 {
    let (w1, h) = (m.w1.len(), m.b1.len());
    if i < w1 {
        &mut m.w1.as_slice_mut().unwrap()[i]
    } else if i < w1 + h {
        &mut m.b1[i - w1]
    } else if i < w1 + 2 * h {
        &mut m.w2[i - w1 - h]
    } else {
        &mut m.b2
    }
}

fn adam_oracle() -> Check {
    let (lr, wd) = (5e-4, 1e-5);
    let mut net = Mlp::<f64>::zeros(1, 1);
    net.w1[[0, 0]] = 0.8;
    let mut adam = AdamState::for_model(&net, lr, wd);
    let (mut theta, mut m, mut v) = (0.8f64, 0.0f64, 0.0f64);
    let mut worst: f64 = 0.0;
    for t in 1..=100 {
        let mut g = Gradients::zeros(1, 1);
        g.w1[[0, 0]] = 2.0 * net.w1[[0, 0]];
        adam.step(&mut net, &g).map_err(err)?;
        let grad = 2.0 * theta + wd * theta;
        m = 0.9 * m + 0.1 * grad;
        v = 0.999 * v + 0.001 * grad * grad;
        let m_hat = m / (1.0 - 0.9f64.powi(t));
        let v_hat = v / (1.0 - 0.999f64.powi(t));
        theta -= lr * m_hat / (v_hat.sqrt() + 1e-8);
        worst = worst.max((net.w1[[0, 0]] - theta).abs());
    }
    ensure(
        worst <= 1e-10,
        format!("drift from scalar oracle {worst:e}"),
    )?;
    let mut one = Mlp::<f64>::zeros(1, 1);
    one.w1[[0, 0]] = 0.1;
    let mut adam = AdamState::for_model(&one, lr, wd);
    let mut g = Gradients::zeros(1, 1);
    g.w1[[0, 0]] = 1.0;
    adam.step(&mut one, &g).map_err(err)?;
    let first = one.w1[[0, 0]];
    ensure(
        (first - 0.0995).abs() <= 1e-9,
        format!("first step gives {first}"),
    )?;
    Ok(format!(
        "100 steps within {worst:.1e} of the scalar oracle, first step {first:.10}"
    ))
}

fn buffer_law() -> Check {
    let tagged = |i: usize| {
        let mut x = [0f32; FEATURES];
        x[0] = i as f32;
        ReplaySample {
            x: FeatureVector(x),
            g: 0,
        }
    };
    let mut buf = ReplayBuffer::new(100_000);
    for i in 0..100_001 {
        buf.push([tagged(i)]);
    }
    ensure(buf.len() == 100_000, format!("size {}", buf.len()))?;
    let first = buf.iter().next().map(|s| s.x.0[0] as usize);
    ensure(first == Some(1), "oldest sample not evicted")?;
    let in_order = buf
        .iter()
        .enumerate()
        .all(|(k, s)| s.x.0[0] as usize == k + 1);
    ensure(in_order, "eviction order differs from insertion order")?;
    let mut rng = DetRng::new(8);
    let batch = buf.sample_batch(1024, &mut rng).map_err(err)?;
    ensure(batch.len() == 1024, "minibatch size")?;

    let mut small = ReplayBuffer::new(10);
    small.push((0..10).map(tagged));
    let mut counts = [0u32; 10];
    for _ in 0..10_000 {
        for i in small.sample_indices(10, &mut rng).map_err(err)? {
            counts[i] += 1;
        }
    }
    let sigma = (100_000.0f64 * 0.1 * 0.9).sqrt();
    let worst = counts
        .iter()
        .map(|&c| (f64::from(c) - 10_000.0).abs() / sigma)
        .fold(0.0, f64::max);
    ensure(
        worst <= 4.0,
        format!("frequency off by {worst:.2} sigma: {counts:?}"),
    )?;
    Ok(format!(
        "FIFO exact at 100000, minibatch 1024, worst frequency {worst:.2} sigma"
    ))
}

fn epsilon_schedule() -> Check {
    let cfg = RlConfig::default();
    let (e0, e_end, e_mid) = (
        epsilon(0, &cfg),
        epsilon(1_200_000, &cfg),
        epsilon(600_000, &cfg),
    );
    ensure((e0 - 0.23).abs() < 1e-12, format!("eps(0) = {e0}"))?;
    ensure((e_end - 0.02).abs() < 1e-12, format!("eps(1.2M) = {e_end}"))?;
    ensure(
        (e_mid - 0.125).abs() < 1e-12,
        format!("eps(600k) = {e_mid}"),
    )?;
    let mut prev = f64::INFINITY;
    for g in 0..=1_300_000u64 {
        let e = epsilon(g, &cfg);
        ensure(e <= prev, format!("eps increases at {g}"))?;
        prev = e;
    }
    Ok(format!(
        "eps(0) = {e0}, eps(600k) = {e_mid}, eps(1.2M) = {e_end}, non-increasing"
    ))
}

fn determinism() -> Check {
    let cfg = RlConfig {
        total_games: 1000,
        // About 8000 learner decisions in 1000 games; start updating early enough that the
        // comparison covers several hundred optimizer steps.
        warmup_samples: 2048,
        base_seed: 77,
        ..RlConfig::default()
    };
    let (a, _) = rl_train(&spec("rand:5"), &cfg, 3).map_err(err)?;
    let (b, _) = rl_train(&spec("rand:5"), &cfg, 3).map_err(err)?;
    let (ba, bb) = (model_to_bytes(&a), model_to_bytes(&b));
    ensure(ba == bb, "checkpoints differ between identical runs")?;
    ensure(a != Mlp::init(3), "training never updated the network")?;
    let players = [spec("rdeep:d=2,s=2,seed=1"), spec("bully:2")];
    let opponents = [spec("rand:3"), spec("rdeep:d=1,s=3,seed=4")];
    let one = run_matrix(&players, &opponents, 50, 60_000, 1).map_err(err)?;
    let eight = run_matrix(&players, &opponents, 50, 60_000, 8).map_err(err)?;
    ensure(
        one.same_content(&eight),
        "matrix differs between 1 and 8 lanes",
    )?;
    Ok(format!(
        "two 1000-game runs give identical {}-byte checkpoints; 2x2 matrix identical at 1 and 8 lanes",
        ba.len()
    ))
}

fn rl_smoke() -> Check {
    let cfg = RlConfig {
        total_games: 20_000,
        base_seed: 20_000,
        ..RlConfig::default()
    };
    let (mlp, log) = rl_train(&spec("rand:7"), &cfg, 20).map_err(err)?;
    let dir = tempfile::tempdir().map_err(err)?;
    let path = dir.path().join("rl.snpw");
    save_model(&mlp, &path).map_err(err)?;
    let r =
        run_pairing(&BotSpec::Rl { model: path }, &spec("rand:8"), 1000, 70_000).map_err(err)?;
    let last = log.records.last().expect("log has records");
    let line = format!(
        "greedy RL vs rand p_hat {:.3} ({}), final eps {:.3}, last-interval training win rate {:.3}",
        r.p_hat, r.verdict, last.eps, last.winrate
    );
    ensure(r.p_hat >= 0.60, line.clone())?;
    Ok(line)
}

fn evaluator_swap() -> Check {
    let mut points = 0;
    let mut seed = 0u64;
    while points < 1000 {
        let mut s = DealState::new_deal(seed, Player::from_index(seed as usize));
        let mut walk = DetRng::new(seed ^ 0xFEED);
        while !s.is_terminal() && points < 1000 {
            let valid: Vec<Move> = s.valid_moves().map_err(err)?.to_vec();
            let view = s.perspective(s.to_move());
            let depth = 1 + (points % 6) as u32;
            let samples = 1 + (points % 5) as u32;
            let mut r1 = DetRng::new(points as u64);
            let mut r2 = DetRng::new(points as u64);
            let a = choose_lookahead(&view, &valid, depth, samples, &mut r1, &HeuristicLeaf)
                .map_err(err)?;
            let b = choose_rdeep(&view, &valid, depth, samples, &mut r2).map_err(err)?;
            ensure(a == b, format!("decision point {points}: {a} vs {b}"))?;
            points += 1;
            s.apply_in_place(valid[walk.below(valid.len())])
                .map_err(err)?;
        }
        seed += 1;
    }
    Ok(format!("{points} decision points identical"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "engine soundness",
            limit: Some(Duration::from_secs(30)),
            run: engine_soundness,
        },
        Criterion {
            id: 2,
            name: "statistics oracle",
            limit: Some(Duration::from_secs(1)),
            run: statistics_oracle,
        },
        Criterion {
            id: 3,
            name: "Rdeep-D2 beats RandBot",
            limit: None,
            run: rdeep_beats_rand,
        },
        Criterion {
            id: 4,
            name: "20 samples beat 4 samples",
            limit: None,
            run: more_samples_help,
        },
        Criterion {
            id: 5,
            name: "supervised MLP trails Rdeep-D2",
            limit: None,
            run: supervised_mlp_trails_rdeep,
        },
        Criterion {
            id: 6,
            name: "gradient check",
            limit: Some(Duration::from_secs(10)),
            run: gradient_check,
        },
        Criterion {
            id: 7,
            name: "Adam oracle",
            limit: Some(Duration::from_secs(1)),
            run: adam_oracle,
        },
        Criterion {
            id: 8,
            name: "replay buffer law",
            limit: Some(Duration::from_secs(5)),
            run: buffer_law,
        },
        Criterion {
            id: 9,
            name: "epsilon schedule",
            limit: Some(Duration::from_secs(1)),
            run: epsilon_schedule,
        },
        Criterion {
            id: 10,
            name: "determinism",
            limit: None,
            run: determinism,
        },
        Criterion {
            id: 11,
            name: "RL smoke learning",
            limit: None,
            run: rl_smoke,
        },
        Criterion {
            id: 12,
            name: "evaluator swap",
            limit: Some(Duration::from_secs(60)),
            run: evaluator_swap,
        },
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria
        .iter()
        .filter(|c| wanted.is_empty() || wanted.contains(&c.id))
    {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let over = c.limit.filter(|&l| took > l);
        let (status, detail) = match (&result, over) {
            (Ok(d), None) => ("PASS", d.clone()),
            (Ok(d), Some(l)) => ("FAIL", format!("{d}; over the {:.0?} limit", l)),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        ran += 1;
        println!(
            "criterion {:>2} [{status}] {}: {detail} ({:.1} s)",
            c.id,
            c.name,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
