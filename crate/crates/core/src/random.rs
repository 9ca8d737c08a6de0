//! Random formulas, circuits and lasso words for testing and benchmarking.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::aiger::{AndGate, Circuit, Latch, Lit, Symbols};
use crate::ltl::{Formula, LassoWord, Letter};

/// A random formula over `atoms` with at most `max_size` nodes.
pub fn formula<R: Rng>(rng: &mut R, atoms: &[String], max_size: usize) -> Formula {
    assert!(max_size >= 1);
    let size = rng.gen_range(1..=max_size);
    formula_of_size(rng, atoms, size)
}

fn formula_of_size<R: Rng>(rng: &mut R, atoms: &[String], size: usize) -> Formula {
    if size == 1 {
        return if atoms.is_empty() || rng.gen_ratio(1, 10) {
            Formula::Const(rng.gen())
        } else {
            Formula::atom(atoms.choose(rng).unwrap().clone())
        };
    }
    if size == 2 || rng.gen_bool(0.4) {
        let a = formula_of_size(rng, atoms, size - 1);
        return match rng.gen_range(0..4) {
            0 => Formula::not(a),
            1 => Formula::next(a),
            2 => Formula::eventually(a),
            _ => Formula::globally(a),
        };
    }
    let left = rng.gen_range(1..size - 1);
    let a = formula_of_size(rng, atoms, left);
    let b = formula_of_size(rng, atoms, size - 1 - left);
    match rng.gen_range(0..6) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        2 => Formula::implies(a, b),
        3 => Formula::iff(a, b),
        4 => Formula::until(a, b),
        _ => Formula::release(a, b),
    }
}

/// A random valid circuit. Gates only read earlier variables, so the result
/// is acyclic by construction.
pub fn circuit<R: Rng>(rng: &mut R, inputs: usize, latches: usize, outputs: usize, ands: usize) -> Circuit {
    let max_var = (inputs + latches + ands) as u32;
    let input_lits: Vec<Lit> = (1..=inputs as u32).map(|v| Lit::from_var(v, false)).collect();
    let latch_vars: Vec<u32> = (inputs as u32 + 1..=(inputs + latches) as u32).collect();
    let mut pool: Vec<u32> = (1..=(inputs + latches) as u32).collect();
    let any_lit = |rng: &mut R, pool: &[u32]| {
        if pool.is_empty() || rng.gen_ratio(1, 12) {
            Lit(rng.gen_range(0..2))
        } else {
            Lit::from_var(*pool.choose(rng).unwrap(), rng.gen())
        }
    };
    let mut gates = Vec::new();
    for k in 0..ands {
        let lhs = Lit::from_var((inputs + latches + k + 1) as u32, false);
        let rhs0 = any_lit(rng, &pool);
        let rhs1 = any_lit(rng, &pool);
        gates.push(AndGate { lhs, rhs0, rhs1 });
        pool.push(lhs.var());
    }
    let latches = latch_vars
        .iter()
        .map(|&v| Latch {
            current: Lit::from_var(v, false),
            next: any_lit(rng, &pool),
        })
        .collect();
    let outputs = (0..outputs).map(|_| any_lit(rng, &pool)).collect();
    Circuit {
        max_var,
        inputs: input_lits,
        latches,
        outputs,
        ands: gates,
        symbols: Symbols::default(),
    }
}

/// A random lasso word over `universe` with prefix length in
/// `0..=max_prefix` and period length in `1..=max_period`.
pub fn lasso<R: Rng>(rng: &mut R, universe: &[String], max_prefix: usize, max_period: usize) -> LassoWord {
    let letter = |rng: &mut R| -> Letter {
        universe.iter().filter(|_| rng.gen()).cloned().collect()
    };
    let p = rng.gen_range(0..=max_prefix);
    let q = rng.gen_range(1..=max_period);
    let prefix = (0..p).map(|_| letter(rng)).collect();
    let period = (0..q).map(|_| letter(rng)).collect();
    LassoWord::new(prefix, period)
}

/// Proposition names `prefix0 .. prefix{n-1}`.
pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}
