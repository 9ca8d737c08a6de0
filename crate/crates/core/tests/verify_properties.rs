use std::collections::BTreeSet;

use ltlsyn_core::aiger::{parse_aiger, run_lasso, Circuit, IoRoles};
use ltlsyn_core::ltl::Formula;
use ltlsyn_core::random;
use ltlsyn_core::specs::Specification;
use ltlsyn_core::verify::{
    bounded_lasso_oracle, check_circuit, completeness_bound, ltl_to_buchi, nnf, system_roles,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG4: &str = "aag 11 5 1 5 5\n2\n4\n6\n8\n10\n12 1\n1\n0\n14\n16\n22\n14 12 10\n16 13 10\n18 4 2\n20 19 11\n22 21 13\n";
const FIG5: &str = "aag 7 5 1 5 1\n2\n4\n6\n8\n10\n12 4\n14\n0\n13\n14\n0\n14 12 5\n";

fn f(s: &str) -> Formula {
    s.parse().unwrap()
}

fn fig1_spec() -> Specification {
    let assumptions = ["G F !i0", "X G(!o2 | ((!i4 & !i1) U (!i4 & i1)))"];
    let guarantees = [
        "G(i0 -> F(!i0 | o4))",
        "G(i2 -> F o0)",
        "G(i1 -> F o0)",
        "(G F o4) -> G(F i4 & F i1)",
        "G(i4 -> F o3)",
        "X G(!o4 | !o2)",
        "G(o1 -> X(i1 R ((i1 -> o2) & (!i1 -> o0))))",
        "G((X o3) -> i3)",
    ];
    Specification::new(
        random::names("i", 5),
        random::names("o", 5),
        assumptions.iter().map(|s| f(s)).collect(),
        guarantees.iter().map(|s| f(s)).collect(),
    )
    .unwrap()
}

fn fig5_formula() -> Formula {
    f("(G F !r_m) -> (G(!g_m | !g_0) & G(r_0 -> F g_0) & G(r_m -> X(!g_0 U g_m)))")
}

#[test]
fn five_pin_circuit_satisfies_its_spec() {
    let c = parse_aiger(FIG4).unwrap();
    let s = fig1_spec();
    let v = check_circuit(&c, &s.to_formula(), &system_roles(&s)).unwrap();
    assert!(v.holds, "counterexample: {:?}", v.counterexample);
}

#[test]
fn fig5_circuit_satisfies_prioritized_arbiter() {
    let c = parse_aiger(FIG5).unwrap();
    let phi = fig5_formula();
    // The circuit drives the prioritized arbiter through i1 -> r_m,
    // i0 -> r_0, o0 -> g_m, o2 -> g_0; the unused pins get fresh names.
    let roles = IoRoles::new(["r_0", "r_m", "x2", "x3", "x4"], ["g_m", "y1", "g_0", "y3", "y4"]);
    assert!(check_circuit(&c, &phi, &roles).unwrap().holds);

    // exhaustive over role assignments: exactly the mappings that put the
    // four signals on these pins verify
    let mut working = BTreeSet::new();
    for rm in 0..5 {
        for r0 in (0..5).filter(|&x| x != rm) {
            for gm in 0..5 {
                for g0 in (0..5).filter(|&x| x != gm) {
                    let mut ins: Vec<String> = (0..5).map(|k| format!("x{k}")).collect();
                    let mut outs: Vec<String> = (0..5).map(|k| format!("y{k}")).collect();
                    ins[rm] = "r_m".into();
                    ins[r0] = "r_0".into();
                    outs[gm] = "g_m".into();
                    outs[g0] = "g_0".into();
                    let v = check_circuit(&c, &phi, &IoRoles::new(ins, outs)).unwrap();
                    if v.holds {
                        working.insert((rm, r0, gm, g0));
                    }
                }
            }
        }
    }
    assert!(working.contains(&(1, 0, 0, 2)));
    assert!(working.iter().all(|&(rm, _, gm, g0)| rm == 1 && g0 == 2 && (gm == 0 || gm == 3)));
}

#[test]
fn oracle_agrees_with_model_checker_on_reference_circuits() {
    let c = parse_aiger("aag 3 2 1 2 0\n2\n4\n6 7\n6\n7\n").unwrap();
    let roles = IoRoles::new(["r1", "r2"], ["g1", "g2"]);
    for text in ["G(!g1 | !g2)", "G F g1 & G F g2", "G(r1 -> X g1)", "F G g1", "g2 U g1"] {
        let phi = f(text);
        let k = completeness_bound(&c, &phi, &roles).unwrap().min(6);
        let a = check_circuit(&c, &phi, &roles).unwrap().holds;
        let b = bounded_lasso_oracle(&c, &phi, &roles, k).unwrap().holds;
        assert_eq!(a, b, "{text}");
    }
}

fn small_instance(seed: u64) -> (Circuit, Formula, IoRoles) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_in = rng.gen_range(1..=2);
    let n_out = rng.gen_range(1..=2);
    let roles = IoRoles::new(random::names("x", n_in), random::names("y", n_out));
    let (latches, ands) = (rng.gen_range(0..=2), rng.gen_range(0..=5));
    let c = random::circuit(&mut rng, n_in, latches, n_out, ands);
    let phi = random::formula(&mut rng, &roles.universe(), 8);
    (c, phi, roles)
}

/// Number of (input lasso, loop start) pairs up to length `k`.
fn enumeration_cost(n_in: usize, k: usize) -> f64 {
    (1..=k).map(|n| n as f64 * 2f64.powi((n_in * n) as i32)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn buchi_membership_matches_eval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = random::names("p", 3);
        let phi = random::formula(&mut rng, &atoms, 10);
        let a = ltl_to_buchi(&phi, Some(&atoms)).unwrap();
        for _ in 0..10 {
            let w = random::lasso(&mut rng, &atoms, 3, 3);
            prop_assert_eq!(a.accepts_lasso(&w), phi.eval_lasso(&w), "{} on {}", phi, w);
        }
    }

    #[test]
    fn nnf_is_equivalent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = random::names("p", 3);
        let phi = random::formula(&mut rng, &atoms, 14);
        let n = nnf(&phi);
        let negations_on_atoms = |g: &Formula| {
            fn ok(g: &Formula) -> bool {
                match g {
                    Formula::Not(a) => matches!(**a, Formula::Atom(_)),
                    Formula::Implies(..) | Formula::Iff(..) => false,
                    _ => g.children().into_iter().all(ok),
                }
            }
            ok(g)
        };
        prop_assert!(negations_on_atoms(&n));
        for _ in 0..10 {
            let w = random::lasso(&mut rng, &atoms, 3, 3);
            prop_assert_eq!(n.eval_lasso(&w), phi.eval_lasso(&w));
        }
    }

    #[test]
    fn check_matches_oracle_and_counterexamples_are_sound(seed in any::<u64>()) {
        let (c, phi, roles) = small_instance(seed);
        let v = check_circuit(&c, &phi, &roles).unwrap();
        if let Some(w) = &v.counterexample {
            prop_assert!(!v.holds);
            prop_assert!(Formula::not(phi.clone()).eval_lasso(w));
            let inputs: BTreeSet<String> = roles.inputs.iter().cloned().collect();
            let replay = run_lasso(&c, &roles, &w.project(&inputs)).unwrap();
            prop_assert!(replay.same_word(w));
        } else {
            prop_assert!(v.holds);
        }
        let k = completeness_bound(&c, &phi, &roles).unwrap();
        if enumeration_cost(c.num_inputs(), k) <= 2e5 {
            let o = bounded_lasso_oracle(&c, &phi, &roles, k).unwrap();
            prop_assert_eq!(o.holds, v.holds, "{} bound {}", phi, k);
        } else if !v.holds {
            // a violation found by the checker is always witnessed by a lasso
            // no longer than the one it reported
            let w = v.counterexample.unwrap();
            let len = w.prefix.len() + w.period.len();
            if enumeration_cost(c.num_inputs(), len) <= 2e5 {
                prop_assert!(!bounded_lasso_oracle(&c, &phi, &roles, len).unwrap().holds);
            }
        }
    }

    #[test]
    fn formula_and_negation_never_both_hold(seed in any::<u64>()) {
        let (c, phi, roles) = small_instance(seed);
        let pos = check_circuit(&c, &phi, &roles).unwrap().holds;
        let neg = check_circuit(&c, &Formula::not(phi), &roles).unwrap().holds;
        prop_assert!(!(pos && neg));
    }
}
