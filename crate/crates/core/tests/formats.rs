mod common;

use std::collections::BTreeMap;

use goalrec::dataset::{self, make_shots, Example};
use goalrec::encoder::TrailBitmap;
use goalrec::nn::load_tensors;
use goalrec::planner::NoisyHeuristicParams;
use goalrec::recognizer::Network;
use proptest::prelude::*;

fn example_strategy(n: usize) -> impl Strategy<Value = Example> {
    (
        proptest::collection::vec(0u8..5, n * n),
        0u8..10,
        prop::sample::select(vec![25u8, 50, 75, 100]),
        any::<u32>(),
    )
        .prop_map(move |(cells, label, observability, path_id)| Example {
            bitmap: TrailBitmap::from_indices(n, cells).unwrap(),
            label,
            observability,
            path_id,
        })
}

fn dataset_strategy() -> impl Strategy<Value = (usize, Vec<Example>)> {
    prop::sample::select(vec![2usize, 4, 8, 16])
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(example_strategy(n), 0..24)))
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let bytes = Network::new(8, 1).unwrap().save();
    assert!(Network::load(&bytes[..bytes.len() - 1]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(Network::load(&extra).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(load_tensors(&magic).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grd1_round_trip((n, examples) in dataset_strategy()) {
        let bytes = dataset::save(&examples).unwrap();
        prop_assert_eq!(bytes.len(), 11 + examples.len() * (6 + n * n));
        prop_assert_eq!(dataset::load(&bytes).unwrap(), examples);
    }

    #[test]
    fn grd1_rejects_truncation((_n, examples) in dataset_strategy(), cut in 1usize..64) {
        let bytes = dataset::save(&examples).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(dataset::load(&bytes[..keep]).is_err());
    }

    #[test]
    fn shot_sets_follow_4n_g(n in 0usize..=10, seed in any::<u64>()) {
        let sc = common::random_scenario(16, seed);
        let shots = make_shots(&sc, n, &NoisyHeuristicParams::standard(0), seed).unwrap();
        prop_assert_eq!(shots.len(), 4 * n * 10);
        let mut pairs = BTreeMap::new();
        for e in &shots {
            *pairs.entry((e.label, e.observability)).or_insert(0usize) += 1;
        }
        prop_assert!(pairs.values().all(|&c| c == n));
    }

    #[test]
    fn nnw1_round_trip(seed in any::<u64>(), grid in prop::sample::select(vec![8usize, 16]), plain in any::<bool>()) {
        let net = if plain { Network::plain(grid, seed) } else { Network::new(grid, seed) }.unwrap();
        let bytes = net.save();
        let back = Network::load(&bytes).unwrap();
        prop_assert_eq!(back.to_tensors(), net.to_tensors());
        prop_assert_eq!(back.save(), bytes);
    }
}
