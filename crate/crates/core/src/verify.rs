//! Explicit-state model checking of circuits against LTL formulas.
//!
//! Formulas are translated to Büchi automata with a tableau expansion over
//! obligation sets (transition-based generalized acceptance, one set per
//! `U` subformula) followed by a counter degeneralization. The product with a
//! circuit is explored on the fly and checked for emptiness with a nested
//! depth-first search.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;
use std::rc::Rc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::aiger::{run_packed, AigerError, Circuit, IoRoles, Simulator};
use crate::ltl::{CompiledFormula, Formula, LassoWord};
use crate::specs::Specification;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("role mapping mismatch: {0}")]
    RoleMismatch(String),
    #[error("counter-strategy reads the current system outputs in latch state {state:#b}")]
    NotMoore { state: u64 },
    #[error("verification budget exhausted after {states} product states")]
    BudgetExceeded { states: usize },
    #[error("too many {0}")]
    TooLarge(&'static str),
    #[error(transparent)]
    Aiger(#[from] AigerError),
}

/// Outcome of a universal check. `counterexample` is present exactly when
/// the property fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<LassoWord>,
}

impl Verdict {
    pub fn holds() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }
    pub fn fails(w: LassoWord) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(w),
        }
    }
}

/// Resource limits for a single emptiness check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub time: Option<Duration>,
    pub max_states: Option<usize>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }
    pub fn with_time(time: Duration) -> Self {
        Budget {
            time: Some(time),
            max_states: None,
        }
    }
}

struct Meter {
    deadline: Option<Instant>,
    max_states: Option<usize>,
    states: usize,
}

impl Meter {
    fn new(b: Budget) -> Self {
        Meter {
            deadline: b.time.map(|t| Instant::now() + t),
            max_states: b.max_states,
            states: 0,
        }
    }

    fn tick(&mut self) -> Result<(), VerifyError> {
        self.states += 1;
        let over_states = self.max_states.is_some_and(|m| self.states > m);
        let over_time = self.states % 256 == 0 && self.deadline.is_some_and(|d| Instant::now() > d);
        if over_states || over_time {
            Err(VerifyError::BudgetExceeded { states: self.states })
        } else {
            Ok(())
        }
    }
}

/// Negation normal form: negations only on atoms, no `->`/`<->`.
/// `F` and `G` are kept.
pub fn nnf(f: &Formula) -> Formula {
    nnf_signed(f, false)
}

fn nnf_signed(f: &Formula, neg: bool) -> Formula {
    use Formula as F;
    match (f, neg) {
        (F::Const(b), _) => F::Const(*b != neg),
        (F::Atom(_), false) => f.clone(),
        (F::Atom(_), true) => F::not(f.clone()),
        (F::Not(a), _) => nnf_signed(a, !neg),
        (F::And(a, b), false) | (F::Or(a, b), true) => F::and(nnf_signed(a, neg), nnf_signed(b, neg)),
        (F::Or(a, b), false) | (F::And(a, b), true) => F::or(nnf_signed(a, neg), nnf_signed(b, neg)),
        (F::Implies(a, b), false) => F::or(nnf_signed(a, true), nnf_signed(b, false)),
        (F::Implies(a, b), true) => F::and(nnf_signed(a, false), nnf_signed(b, true)),
        (F::Iff(a, b), false) => F::or(
            F::and(nnf_signed(a, false), nnf_signed(b, false)),
            F::and(nnf_signed(a, true), nnf_signed(b, true)),
        ),
        (F::Iff(a, b), true) => F::or(
            F::and(nnf_signed(a, false), nnf_signed(b, true)),
            F::and(nnf_signed(a, true), nnf_signed(b, false)),
        ),
        (F::Next(a), _) => F::next(nnf_signed(a, neg)),
        (F::Until(a, b), false) | (F::Release(a, b), true) => {
            F::until(nnf_signed(a, neg), nnf_signed(b, neg))
        }
        (F::Release(a, b), false) | (F::Until(a, b), true) => {
            F::release(nnf_signed(a, neg), nnf_signed(b, neg))
        }
        (F::Eventually(a), false) | (F::Globally(a), true) => F::eventually(nnf_signed(a, neg)),
        (F::Globally(a), false) | (F::Eventually(a), true) => F::globally(nnf_signed(a, neg)),
    }
}

type Id = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(u8, bool),
    And(Id, Id),
    Or(Id, Id),
    Next(Id),
    Until(Id, Id),
    Release(Id, Id),
}

/// One expansion of an obligation set: a conjunction of literals on the
/// current letter, the obligations for the next position, and the mask of
/// `U` subformulas fulfilled (or not pending) on this transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Expansion {
    pos: u64,
    neg: u64,
    next: u32,
    acc: u64,
}

/// On-the-fly tableau for one formula over a fixed proposition universe.
struct Tableau {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    untils: HashMap<Id, u32>,
    sets: Vec<Vec<Id>>,
    set_index: HashMap<Vec<Id>, u32>,
    cache: HashMap<(u32, Option<u64>), Rc<Vec<Expansion>>>,
}

/// A state of the degeneralized automaton: obligation set and counter level.
type BState = (u32, u8);

impl Tableau {
    fn new(f: &Formula, universe: &[String]) -> Result<Self, VerifyError> {
        if universe.len() > 64 {
            return Err(VerifyError::TooLarge("propositions (limit 64)"));
        }
        let mut t = Tableau {
            nodes: Vec::new(),
            index: HashMap::new(),
            untils: HashMap::new(),
            sets: Vec::new(),
            set_index: HashMap::new(),
            cache: HashMap::new(),
        };
        let root = t.build(&nnf(f), universe)?;
        if t.untils.len() > 64 {
            return Err(VerifyError::TooLarge("until subformulas (limit 64)"));
        }
        t.intern_set(vec![root]);
        Ok(t)
    }

    fn node(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.index.insert(n, id);
        if let Node::Until(..) = n {
            let k = self.untils.len() as u32;
            self.untils.insert(id, k);
        }
        id
    }

    fn build(&mut self, f: &Formula, universe: &[String]) -> Result<Id, VerifyError> {
        use Formula as F;
        let n = match f {
            F::Const(true) => Node::True,
            F::Const(false) => Node::False,
            F::Atom(a) => Node::Lit(lookup(universe, a)?, true),
            F::Not(a) => match a.as_ref() {
                F::Atom(name) => Node::Lit(lookup(universe, name)?, false),
                _ => unreachable!("input is in negation normal form"),
            },
            F::And(a, b) => Node::And(self.build(a, universe)?, self.build(b, universe)?),
            F::Or(a, b) => Node::Or(self.build(a, universe)?, self.build(b, universe)?),
            F::Next(a) => Node::Next(self.build(a, universe)?),
            F::Until(a, b) => Node::Until(self.build(a, universe)?, self.build(b, universe)?),
            F::Release(a, b) => Node::Release(self.build(a, universe)?, self.build(b, universe)?),
            F::Eventually(a) => {
                let t = self.node(Node::True);
                Node::Until(t, self.build(a, universe)?)
            }
            F::Globally(a) => {
                let ff = self.node(Node::False);
                Node::Release(ff, self.build(a, universe)?)
            }
            F::Implies(..) | F::Iff(..) => unreachable!("input is in negation normal form"),
        };
        Ok(self.node(n))
    }

    fn intern_set(&mut self, mut s: Vec<Id>) -> u32 {
        s.retain(|&id| self.nodes[id as usize] != Node::True);
        s.sort_unstable();
        s.dedup();
        if let Some(&i) = self.set_index.get(&s) {
            return i;
        }
        let i = self.sets.len() as u32;
        self.sets.push(s.clone());
        self.set_index.insert(s, i);
        i
    }

    fn num_acc(&self) -> u8 {
        self.untils.len() as u8
    }

    /// All expansions of obligation set `set`; with `letter` given, only those
    /// consistent with it (literal masks are then left empty).
    fn expand(&mut self, set: u32, letter: Option<u64>) -> Rc<Vec<Expansion>> {
        if let Some(e) = self.cache.get(&(set, letter)) {
            return e.clone();
        }
        struct Branch {
            todo: Vec<Id>,
            done: HashSet<Id>,
            pos: u64,
            neg: u64,
            next: Vec<Id>,
            postponed: u64,
        }
        let all_acc = if self.untils.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.untils.len()) - 1
        };
        let mut results: Vec<(u64, u64, Vec<Id>, u64)> = Vec::new();
        let mut stack = vec![Branch {
            todo: self.sets[set as usize].clone(),
            done: HashSet::new(),
            pos: 0,
            neg: 0,
            next: Vec::new(),
            postponed: 0,
        }];
        'branches: while let Some(mut b) = stack.pop() {
            while let Some(id) = b.todo.pop() {
                if !b.done.insert(id) {
                    continue;
                }
                match self.nodes[id as usize] {
                    Node::True => {}
                    Node::False => continue 'branches,
                    Node::Lit(v, p) => {
                        let bit = 1u64 << v;
                        match letter {
                            Some(l) => {
                                if (l & bit != 0) != p {
                                    continue 'branches;
                                }
                            }
                            None => {
                                if p {
                                    b.pos |= bit
                                } else {
                                    b.neg |= bit
                                }
                                if b.pos & b.neg != 0 {
                                    continue 'branches;
                                }
                            }
                        }
                    }
                    Node::And(x, y) => {
                        b.todo.push(x);
                        b.todo.push(y);
                    }
                    Node::Or(x, y) => {
                        let mut other = Branch {
                            todo: b.todo.clone(),
                            done: b.done.clone(),
                            next: b.next.clone(),
                            ..b
                        };
                        other.todo.push(y);
                        stack.push(other);
                        b.todo.push(x);
                    }
                    Node::Next(x) => b.next.push(x),
                    Node::Until(x, y) => {
                        let mut later = Branch {
                            todo: b.todo.clone(),
                            done: b.done.clone(),
                            next: b.next.clone(),
                            ..b
                        };
                        later.todo.push(x);
                        later.next.push(id);
                        later.postponed |= 1u64 << self.untils[&id];
                        stack.push(later);
                        b.todo.push(y);
                    }
                    Node::Release(x, y) => {
                        let mut later = Branch {
                            todo: b.todo.clone(),
                            done: b.done.clone(),
                            next: b.next.clone(),
                            ..b
                        };
                        later.todo.push(y);
                        later.next.push(id);
                        stack.push(later);
                        b.todo.push(x);
                        b.todo.push(y);
                    }
                }
            }
            results.push((b.pos, b.neg, b.next, all_acc & !b.postponed));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (pos, neg, next, acc) in results {
            let next = self.intern_set(next);
            let e = Expansion { pos, neg, next, acc };
            if seen.insert(e.clone()) {
                out.push(e);
            }
        }
        let out = Rc::new(out);
        self.cache.insert((set, letter), out.clone());
        out
    }

    fn advance(&self, level: u8, acc: u64) -> u8 {
        let k = self.num_acc();
        let mut l = if level == k { 0 } else { level };
        while l < k && acc >> l & 1 == 1 {
            l += 1;
        }
        l
    }

    fn initial(&self) -> BState {
        (0, 0)
    }

    fn accepting(&self, s: BState) -> bool {
        s.1 == self.num_acc()
    }

    fn step(&mut self, s: BState, letter: u64) -> Vec<BState> {
        let exps = self.expand(s.0, Some(letter));
        let mut out: Vec<BState> = exps.iter().map(|e| (e.next, self.advance(s.1, e.acc))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn lookup(universe: &[String], atom: &str) -> Result<u8, VerifyError> {
    universe
        .iter()
        .position(|p| p == atom)
        .map(|i| i as u8)
        .ok_or_else(|| VerifyError::RoleMismatch(format!("atom `{atom}` is not a circuit input or output")))
}

/// An explicit state-based Büchi automaton over letters in `2^props`.
/// Transition labels are conjunctions of literals: `pos` bits must be set
/// and `neg` bits clear.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    pub props: Vec<String>,
    pub num_states: usize,
    pub initial: Vec<usize>,
    pub accepting: BTreeSet<usize>,
    pub transitions: Vec<BuchiTransition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BuchiTransition {
    pub from: usize,
    pub pos: u64,
    pub neg: u64,
    pub to: usize,
}

impl BuchiTransition {
    pub fn enabled(&self, letter: u64) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }
}

/// Builds the automaton for `f` over `props` (defaults to the atoms of `f`).
pub fn ltl_to_buchi(f: &Formula, props: Option<&[String]>) -> Result<BuchiAutomaton, VerifyError> {
    let props: Vec<String> = match props {
        Some(p) => p.to_vec(),
        None => f.atoms().into_iter().collect(),
    };
    let mut t = Tableau::new(f, &props)?;
    let mut ids: HashMap<BState, usize> = HashMap::new();
    let mut order = vec![t.initial()];
    ids.insert(t.initial(), 0);
    let mut transitions = HashSet::new();
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for e in t.expand(s.0, None).iter() {
            let succ = (e.next, t.advance(s.1, e.acc));
            let n = ids.len();
            let to = *ids.entry(succ).or_insert_with(|| {
                order.push(succ);
                n
            });
            transitions.insert(BuchiTransition {
                from: i,
                pos: e.pos,
                neg: e.neg,
                to,
            });
        }
        i += 1;
    }
    let mut transitions: Vec<_> = transitions.into_iter().collect();
    transitions.sort_by_key(|tr| (tr.from, tr.to, tr.pos, tr.neg));
    let accepting = order
        .iter()
        .enumerate()
        .filter(|(_, s)| t.accepting(**s))
        .map(|(i, _)| i)
        .collect();
    Ok(BuchiAutomaton {
        props,
        num_states: order.len(),
        initial: vec![0],
        accepting,
        transitions,
    })
}

impl BuchiAutomaton {
    /// Membership of a lasso word (letters over `self.props`).
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let (letters, loop_start) = w.to_masks(&self.props);
        let mut out: Vec<Vec<BuchiTransition>> = vec![Vec::new(); self.num_states];
        for tr in &self.transitions {
            out[tr.from].push(*tr);
        }
        let n = letters.len();
        let mut succ = |&(q, p): &(usize, usize)| -> Result<Vec<((usize, usize), ())>, VerifyError> {
            let np = if p + 1 == n { loop_start } else { p + 1 };
            Ok(out[q]
                .iter()
                .filter(|tr| tr.enabled(letters[p]))
                .map(|tr| ((tr.to, np), ()))
                .collect())
        };
        let init: Vec<_> = self.initial.iter().map(|&q| (q, 0)).collect();
        let acc = |&(q, _): &(usize, usize)| self.accepting.contains(&q);
        nested_dfs(init, &mut succ, &acc, &mut Meter::new(Budget::unlimited()))
            .expect("unlimited budget")
            .is_some()
    }
}

/// Classic nested depth-first search. Returns the edge labels of an
/// accepting lasso as `(stem, cycle)`.
fn nested_dfs<N, L>(
    init: Vec<N>,
    succ: &mut dyn FnMut(&N) -> Result<Vec<(N, L)>, VerifyError>,
    accepting: &dyn Fn(&N) -> bool,
    meter: &mut Meter,
) -> Result<Option<(Vec<L>, Vec<L>)>, VerifyError>
where
    N: Clone + Eq + Hash,
    L: Clone,
{
    let mut memo: HashMap<N, Rc<Vec<(N, L)>>> = HashMap::new();
    let mut get = |n: &N, meter: &mut Meter| -> Result<Rc<Vec<(N, L)>>, VerifyError> {
        if let Some(s) = memo.get(n) {
            return Ok(s.clone());
        }
        meter.tick()?;
        let s = Rc::new(succ(n)?);
        memo.insert(n.clone(), s.clone());
        Ok(s)
    };
    let mut blue: HashSet<N> = HashSet::new();
    let mut red: HashSet<N> = HashSet::new();
    for root in init {
        if !blue.insert(root.clone()) {
            continue;
        }
        let first = get(&root, meter)?;
        let mut stack: Vec<(N, Rc<Vec<(N, L)>>, usize)> = vec![(root, first, 0)];
        let mut path: Vec<L> = Vec::new();
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let (m, l) = top.1[top.2].clone();
                top.2 += 1;
                if blue.insert(m.clone()) {
                    let s = get(&m, meter)?;
                    stack.push((m, s, 0));
                    path.push(l);
                }
                continue;
            }
            let (seed, _, _) = stack.pop().expect("nonempty");
            if accepting(&seed) {
                let mut inner: Vec<(N, Rc<Vec<(N, L)>>, usize)> = vec![(seed.clone(), get(&seed, meter)?, 0)];
                let mut cpath: Vec<L> = Vec::new();
                while let Some(top) = inner.last_mut() {
                    if top.2 < top.1.len() {
                        let (m, l) = top.1[top.2].clone();
                        top.2 += 1;
                        if m == seed {
                            cpath.push(l);
                            return Ok(Some((path, cpath)));
                        }
                        if red.insert(m.clone()) {
                            let s = get(&m, meter)?;
                            inner.push((m, s, 0));
                            cpath.push(l);
                        }
                    } else {
                        inner.pop();
                        cpath.pop();
                    }
                }
            }
            path.pop();
        }
    }
    Ok(None)
}

fn check_roles(c: &Circuit, roles: &IoRoles) -> Result<(), VerifyError> {
    if roles.inputs.len() != c.num_inputs() || roles.outputs.len() != c.num_outputs() {
        return Err(VerifyError::RoleMismatch(format!(
            "circuit has {} inputs and {} outputs, roles name {} and {}",
            c.num_inputs(),
            c.num_outputs(),
            roles.inputs.len(),
            roles.outputs.len()
        )));
    }
    let mut seen = HashSet::new();
    for p in roles.universe() {
        if !seen.insert(p.clone()) {
            return Err(VerifyError::RoleMismatch(format!("`{p}` is named twice")));
        }
    }
    if roles.inputs.len() + roles.outputs.len() > 64 {
        return Err(VerifyError::TooLarge("circuit pins (limit 64)"));
    }
    if roles.inputs.len() > 20 {
        return Err(VerifyError::TooLarge("circuit inputs (limit 20)"));
    }
    Ok(())
}

/// Does every trace of `c`, for every infinite input sequence, satisfy `f`?
pub fn check_circuit(c: &Circuit, f: &Formula, roles: &IoRoles) -> Result<Verdict, VerifyError> {
    check_circuit_with(c, f, roles, Budget::unlimited())
}

pub fn check_circuit_with(
    c: &Circuit,
    f: &Formula,
    roles: &IoRoles,
    budget: Budget,
) -> Result<Verdict, VerifyError> {
    check_roles(c, roles)?;
    let sim = Simulator::new(c)?;
    let universe = roles.universe();
    let mut tab = Tableau::new(&Formula::not(f.clone()), &universe)?;
    let n_in = c.num_inputs();
    let k = tab.num_acc();
    let mut succ = |&(s, q): &(u64, BState)| -> Result<Vec<((u64, BState), u64)>, VerifyError> {
        let mut out = Vec::new();
        for x in 0..(1u64 << n_in) {
            let (y, next) = sim.step_packed(s, x);
            let letter = x | (y << n_in);
            for q2 in tab.step(q, letter) {
                out.push(((next, q2), letter));
            }
        }
        Ok(out)
    };
    let acc = |&(_, q): &(u64, BState)| q.1 == k;
    let found = nested_dfs(vec![(0u64, (0, 0))], &mut succ, &acc, &mut Meter::new(budget))?;
    Ok(match found {
        None => Verdict::holds(),
        Some((stem, cycle)) => {
            let loop_start = stem.len();
            let letters: Vec<u64> = stem.into_iter().chain(cycle).collect();
            Verdict::fails(LassoWord::from_masks(&letters, loop_start, &universe))
        }
    })
}

/// Roles of a system circuit for `s`: spec inputs drive the circuit inputs.
pub fn system_roles(s: &Specification) -> IoRoles {
    IoRoles::new(s.inputs.clone(), s.outputs.clone())
}

/// Roles of an environment circuit for `s`: it reads the system outputs and
/// drives the spec inputs.
pub fn environment_roles(s: &Specification) -> IoRoles {
    system_roles(s).swapped()
}

/// Checks that `c_env` (reading system outputs, emitting environment inputs
/// as described by `roles`) wins against every system: all composed traces
/// violate the specification. The environment must commit to its outputs
/// before seeing the current system outputs.
pub fn check_counter_strategy(
    c_env: &Circuit,
    s: &Specification,
    roles: &IoRoles,
) -> Result<Verdict, VerifyError> {
    check_counter_strategy_with(c_env, s, roles, Budget::unlimited())
}

pub fn check_counter_strategy_with(
    c_env: &Circuit,
    s: &Specification,
    roles: &IoRoles,
    budget: Budget,
) -> Result<Verdict, VerifyError> {
    check_roles(c_env, roles)?;
    let sim = Simulator::new(c_env)?;
    for state in sim.reachable_states() {
        let (first, _) = sim.step_packed(state, 0);
        if (1..(1u64 << c_env.num_inputs())).any(|x| sim.step_packed(state, x).0 != first) {
            return Err(VerifyError::NotMoore { state });
        }
    }
    check_circuit_with(c_env, &Formula::not(s.to_formula()), roles, budget)
}

/// Number of states of the degeneralized automaton for `f` over `props`.
pub fn buchi_size(f: &Formula, props: &[String]) -> Result<usize, VerifyError> {
    Ok(ltl_to_buchi(f, Some(props))?.num_states)
}

/// Input-lasso length at which [`bounded_lasso_oracle`] becomes complete.
pub fn completeness_bound(c: &Circuit, f: &Formula, roles: &IoRoles) -> Result<usize, VerifyError> {
    let sim = Simulator::new(c)?;
    let latch_states = sim.reachable_states().len();
    let b = buchi_size(&Formula::not(f.clone()), &roles.universe())?;
    Ok(2 * latch_states * b)
}

/// Brute force: simulates `c` on every input lasso with
/// `|prefix| + |period| <= k` and evaluates `f` on each trace.
pub fn bounded_lasso_oracle(
    c: &Circuit,
    f: &Formula,
    roles: &IoRoles,
    k: usize,
) -> Result<Verdict, VerifyError> {
    assert!(k >= 1, "bound must be positive");
    check_roles(c, roles)?;
    let sim = Simulator::new(c)?;
    let universe = roles.universe();
    let compiled = CompiledFormula::new(f, &universe);
    let n_in = c.num_inputs();
    let alphabet = 1u64 << n_in;
    for len in 1..=k {
        let mut word = vec![0u64; len];
        loop {
            for loop_start in 0..len {
                let (trace, trace_loop) = run_packed(&sim, &word, loop_start);
                let letters: Vec<u64> = trace.iter().map(|&(x, y)| x | (y << n_in)).collect();
                if !compiled.eval(&letters, trace_loop) {
                    return Ok(Verdict::fails(LassoWord::from_masks(&letters, trace_loop, &universe)));
                }
            }
            // next word in lexicographic order
            let mut i = 0;
            while i < len {
                word[i] += 1;
                if word[i] < alphabet {
                    break;
                }
                word[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
        }
    }
    Ok(Verdict::holds())
}
