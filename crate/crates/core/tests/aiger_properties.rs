use ltlsyn_core::aiger::{parse_aiger, run_lasso, IoRoles, LatchState, Simulator};
use ltlsyn_core::ltl::LassoWord;
use ltlsyn_core::random;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn serialize_parse_round_trip(seed in any::<u64>(), i in 0usize..5, l in 0usize..4, o in 0usize..5, a in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random::circuit(&mut rng, i, l, o, a);
        let text = c.serialize();
        let back = parse_aiger(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn run_lasso_matches_stepwise_simulation(seed in any::<u64>(), l in 0usize..4, a in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random::circuit(&mut rng, 2, l, 2, a);
        let roles = IoRoles::new(["x0", "x1"], ["y0", "y1"]);
        let w = random::lasso(&mut rng, &roles.inputs, 3, 3);
        let trace = run_lasso(&c, &roles, &w).unwrap();
        // loop closes within 2^L * period steps after the prefix
        prop_assert!(trace.prefix.len() + trace.period.len() <= w.prefix.len() + (1 << l) * w.period.len());

        let sim = Simulator::new(&c).unwrap();
        let mut s = LatchState::initial(&c);
        let horizon = trace.prefix.len() + 3 * trace.period.len() + w.prefix.len() + 3 * w.period.len();
        for t in 0..horizon {
            let letter = w.letter_at(t);
            let inputs: Vec<bool> = roles.inputs.iter().map(|p| letter.contains(p)).collect();
            let (out, next) = sim.step(&s, &inputs);
            let (again, next_again) = sim.step(&s, &inputs);
            prop_assert_eq!(&out, &again);
            prop_assert_eq!(&next, &next_again);
            let got = trace.letter_at(t);
            for (k, p) in roles.inputs.iter().enumerate() {
                prop_assert_eq!(got.contains(p), inputs[k]);
            }
            for (k, p) in roles.outputs.iter().enumerate() {
                prop_assert_eq!(got.contains(p), out[k]);
            }
            s = next;
        }
    }
}

#[test]
fn arbiter_runs_alternate_for_any_inputs() {
    let c = parse_aiger("aag 3 2 1 2 0\n2\n4\n6 7\n6\n7\n").unwrap();
    let roles = IoRoles::new(["r1", "r2"], ["g1", "g2"]);
    let w = LassoWord::from_names(&[&["r1"], &["r2"]], &[&["r1", "r2"], &[]]);
    let trace = run_lasso(&c, &roles, &w).unwrap();
    for t in 0..12 {
        let l = trace.letter_at(t);
        assert_eq!(l.contains("g1"), t % 2 == 1);
        assert_eq!(l.contains("g2"), t % 2 == 0);
    }
}
