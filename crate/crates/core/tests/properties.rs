//! Randomized properties of small models checked against the grid oracle.

use permissive_core::document::PafDocument;
use permissive_core::engine::{compute_permissiveness, compute_with, Options, StepKind};
use permissive_core::model::parse_model;
use permissive_core::numerics::{rat, ExtendedRational};
use permissive_core::oracle::{random_model_text, GridParams, ModelKind, Oracle};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Linear), Just(ModelKind::Branching), Just(ModelKind::Game)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_value_tracks_the_grid_oracle(
        seed in 1000u64..100_000,
        clocks in 1usize..=2,
        locations in 2usize..=4,
        kind in kind(),
        xs in proptest::collection::vec(0i64..=24, 2),
    ) {
        let m = parse_model(&random_model_text(seed, clocks, locations, kind)).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let mut o = Oracle::new(&m, &GridParams::new(rat(1, 16), m.locations.len())).unwrap();
        let v: Vec<_> = xs[..clocks].iter().map(|&k| rat(k, 8)).collect();
        let exact = s.functions[m.initial].eval(&v).unwrap();
        let grid = o.value(m.initial, &v).unwrap();
        match (&exact, &grid) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => {
                let d = if a > b { a - b } else { b - a };
                prop_assert!(d <= rat(4, 16), "{v:?}: {exact} vs {grid}");
                // The grid player is restricted, so it cannot beat the exact value.
                prop_assert!(b <= a, "{v:?}: {exact} vs {grid}");
            }
            _ => prop_assert_eq!(exact, grid),
        }
    }

    #[test]
    fn chain_steps_agree_with_endpoint_steps_on_linear_models(
        seed in 0u64..100_000,
        clocks in 1usize..=3,
        locations in 2usize..=5,
        xs in proptest::collection::vec(0i64..=40, 3),
    ) {
        let m = parse_model(&random_model_text(seed, clocks, locations, ModelKind::Linear)).unwrap();
        let a = compute_with(&m, Options { max_iter: None, steps: StepKind::Endpoints }).unwrap();
        let b = compute_with(&m, Options { max_iter: None, steps: StepKind::Chains }).unwrap();
        let v: Vec<_> = xs[..clocks].iter().map(|&k| rat(k, 8)).collect();
        for l in 0..m.locations.len() {
            prop_assert_eq!(a.functions[l].eval(&v).unwrap(), b.functions[l].eval(&v).unwrap());
        }
    }

    #[test]
    fn documents_round_trip(seed in 0u64..100_000, kind in kind()) {
        let text = random_model_text(seed, 2, 4, kind);
        let m = parse_model(&text).unwrap();
        let s = compute_permissiveness(&m).unwrap();
        let doc = PafDocument::from_solution(&m, &text, &s);
        let back = PafDocument::from_json(&doc.to_json()).unwrap();
        for (l, loc) in m.locations.iter().enumerate() {
            let f = back.function(&loc.name).unwrap();
            for i in 0..=24 {
                for j in 0..=24 {
                    let v = [rat(i, 4), rat(j, 4)];
                    prop_assert_eq!(f.eval(&v).unwrap(), s.functions[l].eval(&v).unwrap());
                }
            }
        }
    }
}
