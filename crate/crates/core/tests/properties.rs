use proptest::prelude::*;
use schnapsen_core::arena::{normal_cdf, z_test};
use schnapsen_core::bots::{determinize, BotSpec};
use schnapsen_core::encoder::{encode, FeatureVector, FEATURES};
use schnapsen_core::engine::{Card, CardSet, DealState, EndReason, Player};
use schnapsen_core::rng::DetRng;
use schnapsen_core::store::{dataset_from_bytes, dataset_to_bytes};
use schnapsen_core::trainer::{ReplayBuffer, ReplayDataset, ReplaySample};

fn bot_spec() -> impl Strategy<Value = BotSpec> {
    prop_oneof![
        any::<u64>().prop_map(|seed| BotSpec::Rand { seed }),
        any::<u64>().prop_map(|seed| BotSpec::Bully { seed }),
        (1u32..20, 1u32..100, any::<u64>()).prop_map(|(depth, num_samples, seed)| {
            BotSpec::Rdeep {
                depth,
                num_samples,
                seed,
            }
        }),
        "[a-z/_.,=-]{1,30}".prop_map(|p| BotSpec::Mlp { model: p.into() }),
        ("[a-z/_.,=-]{1,30}", 1u32..9, 1u32..9, any::<u64>()).prop_map(
            |(p, depth, num_samples, seed)| {
                BotSpec::RlLookahead {
                    model: p.into(),
                    depth,
                    num_samples,
                    seed,
                }
            }
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_deals_keep_invariants(seed in any::<u64>(), lead in 0usize..2, rng_seed in any::<u64>()) {
        let mut s = DealState::new_deal(seed, Player::from_index(lead));
        let mut rng = DetRng::new(rng_seed);
        while !s.is_terminal() {
            prop_assert!(s.check_invariants().is_ok());
            let moves = s.valid_moves().unwrap();
            prop_assert!(!moves.is_empty());
            let view = s.perspective(s.to_move());
            let d = determinize(&view, &mut rng).unwrap();
            prop_assert_eq!(d.perspective(s.to_move()), view.clone());
            for &m in &moves {
                prop_assert_eq!(encode(&view, m), encode(&d.perspective(s.to_move()), m));
            }
            s.apply_in_place(moves[rng.below(moves.len())]).unwrap();
        }
        let out = s.outcome().unwrap();
        prop_assert!((1..=3).contains(&out.game_points));
        if out.reason == EndReason::LastTrick {
            prop_assert_eq!(s.direct_points[0] + s.direct_points[1], 120);
        }
    }

    #[test]
    fn cardset_algebra(a in 0u32..(1 << 20), b in 0u32..(1 << 20)) {
        let (x, y) = (CardSet::from_bits(a), CardSet::from_bits(b));
        prop_assert_eq!(x.union(y).len() + x.intersection(y).len(), x.len() + y.len());
        prop_assert!(x.difference(y).is_disjoint(y));
        prop_assert!(x.intersection(y).is_subset(x));
        prop_assert_eq!(x.iter().collect::<CardSet>(), x);
        prop_assert_eq!(x.points(), x.iter().map(Card::points).sum::<u32>());
    }

    #[test]
    fn z_test_mirrors(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let w = ((n as f64) * frac).floor() as u64;
        let a = z_test(w, n).unwrap();
        let b = z_test(n - w, n).unwrap();
        prop_assert!((a.z + b.z).abs() < 1e-9);
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        prop_assert_eq!(a.verdict.mirror(), b.verdict);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn cdf_symmetry(z in -10.0f64..10.0) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bot_spec_text_round_trip(spec in bot_spec()) {
        let text = spec.to_string();
        prop_assert_eq!(text.parse::<BotSpec>().unwrap(), spec);
    }

    #[test]
    fn dataset_bytes_round_trip(rows in prop::collection::vec((prop::collection::vec(-4.0f32..4.0, FEATURES), 0u8..2), 0..20)) {
        let samples = rows
            .into_iter()
            .map(|(x, g)| ReplaySample { x: FeatureVector(x.try_into().unwrap()), g })
            .collect();
        let d = ReplayDataset { samples, ..ReplayDataset::default() };
        prop_assert_eq!(dataset_from_bytes(&dataset_to_bytes(&d)).unwrap(), d);
    }

    #[test]
    fn buffer_keeps_the_newest(cap in 1usize..50, pushes in prop::collection::vec(1usize..10, 0..30)) {
        let mut buf = ReplayBuffer::new(cap);
        let mut next = 0usize;
        for k in pushes {
            buf.push((next..next + k).map(|i| {
                let mut x = [0f32; FEATURES];
                x[0] = i as f32;
                ReplaySample { x: FeatureVector(x), g: 0 }
            }));
            next += k;
            let kept: Vec<usize> = buf.iter().map(|s| s.x.0[0] as usize).collect();
            let lo = next.saturating_sub(cap);
            prop_assert_eq!(kept, (lo..next).collect::<Vec<_>>());
        }
    }
}
