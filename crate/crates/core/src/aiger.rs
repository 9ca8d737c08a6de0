//! AIGER ASCII (`aag`, version 20071012) circuits: parsing with validation,
//! canonical serialization, literal arithmetic and Mealy-style simulation.
//!
//! Latches start at 0. Outputs at step `t` are computed from the latch state
//! and the inputs at step `t`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ltl::{LassoWord, Letter};

/// A literal: variable `lit / 2`, negated when odd. `0` is false, `1` true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn from_var(var: u32, negated: bool) -> Lit {
        Lit(2 * var + negated as u32)
    }
    pub fn var(self) -> u32 {
        self.0 / 2
    }
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }
    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Latch {
    pub current: Lit,
    pub next: Lit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub lhs: Lit,
    pub rhs0: Lit,
    pub rhs1: Lit,
}

/// Optional names for inputs, latches and outputs, keyed by position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Symbols {
    pub inputs: BTreeMap<usize, String>,
    pub latches: BTreeMap<usize, String>,
    pub outputs: BTreeMap<usize, String>,
}

impl Symbols {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.latches.is_empty() && self.outputs.is_empty()
    }
}

/// An and-inverter graph with latches. Header counts `I, L, O, A` are the
/// lengths of the definition lists; `max_var` is `M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub max_var: u32,
    pub inputs: Vec<Lit>,
    pub latches: Vec<Latch>,
    pub outputs: Vec<Lit>,
    pub ands: Vec<AndGate>,
    pub symbols: Symbols,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AigerError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("expected {expected} {what} lines, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: input literal {lit} must be even and positive")]
    OddInput { line: usize, lit: u32 },
    #[error("line {line}: literal {lit} exceeds 2M+1 = {limit}")]
    LiteralOutOfRange { line: usize, lit: u32, limit: u32 },
    #[error("variable {var} is defined more than once")]
    DoublyDefined { var: u32 },
    #[error("literal {lit} refers to an undefined variable")]
    Undefined { lit: u32 },
    #[error("combinational cycle through variable {var}")]
    Cycle { var: u32 },
    #[error("variable {var} is not assigned")]
    Unassigned { var: u32 },
    #[error("circuit has {count} {what}; at most 64 are supported by the simulator")]
    TooWide { what: &'static str, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitStats {
    pub max_var: u32,
    pub latches: usize,
    pub ands: usize,
}

impl Circuit {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }
    pub fn num_latches(&self) -> usize {
        self.latches.len()
    }
    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }
    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    pub fn stats(&self) -> CircuitStats {
        CircuitStats {
            max_var: self.max_var,
            latches: self.latches.len(),
            ands: self.ands.len(),
        }
    }

    /// Header line `aag M I L O A`.
    pub fn header(&self) -> String {
        format!(
            "aag {} {} {} {} {}",
            self.max_var,
            self.inputs.len(),
            self.latches.len(),
            self.outputs.len(),
            self.ands.len()
        )
    }

    /// Definition lines only, without header and symbol table.
    pub fn body_lines(&self) -> Vec<Vec<u32>> {
        let mut lines = Vec::new();
        lines.extend(self.inputs.iter().map(|l| vec![l.0]));
        lines.extend(self.latches.iter().map(|l| vec![l.current.0, l.next.0]));
        lines.extend(self.outputs.iter().map(|l| vec![l.0]));
        lines.extend(self.ands.iter().map(|g| vec![g.lhs.0, g.rhs0.0, g.rhs1.0]));
        lines
    }

    /// The same circuit without its symbol table.
    pub fn without_symbols(&self) -> Circuit {
        Circuit {
            symbols: Symbols::default(),
            ..self.clone()
        }
    }

    /// Canonical text: header, definitions, symbols (if any); no comments.
    pub fn serialize(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for line in self.body_lines() {
            let parts: Vec<String> = line.iter().map(|x| x.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        for (prefix, table) in [
            ('i', &self.symbols.inputs),
            ('l', &self.symbols.latches),
            ('o', &self.symbols.outputs),
        ] {
            for (idx, name) in table {
                out.push_str(&format!("{prefix}{idx} {name}\n"));
            }
        }
        out
    }

    /// Checks the structural invariants and returns AND gates in a
    /// topological evaluation order (indices into `ands`).
    pub fn validate(&self) -> Result<Vec<usize>, AigerError> {
        let limit = 2 * self.max_var + 1;
        let check = |lit: Lit| {
            if lit.0 > limit {
                Err(AigerError::LiteralOutOfRange {
                    line: 0,
                    lit: lit.0,
                    limit,
                })
            } else {
                Ok(())
            }
        };
        let mut defined: HashMap<u32, Def> = HashMap::new();
        let mut define = |var: u32, def: Def| {
            if defined.insert(var, def).is_some() {
                Err(AigerError::DoublyDefined { var })
            } else {
                Ok(())
            }
        };
        for &i in &self.inputs {
            if i.is_negated() || i.0 < 2 {
                return Err(AigerError::OddInput { line: 0, lit: i.0 });
            }
            check(i)?;
            define(i.var(), Def::Leaf)?;
        }
        for l in &self.latches {
            if l.current.is_negated() || l.current.0 < 2 {
                return Err(AigerError::Malformed {
                    line: 0,
                    msg: format!("latch literal {} must be even and positive", l.current),
                });
            }
            check(l.current)?;
            check(l.next)?;
            define(l.current.var(), Def::Leaf)?;
        }
        for (k, g) in self.ands.iter().enumerate() {
            if g.lhs.is_negated() || g.lhs.0 < 2 {
                return Err(AigerError::Malformed {
                    line: 0,
                    msg: format!("AND output literal {} must be even and positive", g.lhs),
                });
            }
            check(g.lhs)?;
            check(g.rhs0)?;
            check(g.rhs1)?;
            define(g.lhs.var(), Def::Gate(k))?;
        }
        let known = |lit: Lit| lit.var() == 0 || defined.contains_key(&lit.var());
        let referenced = self
            .latches
            .iter()
            .map(|l| l.next)
            .chain(self.outputs.iter().copied())
            .chain(self.ands.iter().flat_map(|g| [g.rhs0, g.rhs1]));
        for lit in referenced {
            check(lit)?;
            if !known(lit) {
                return Err(AigerError::Undefined { lit: lit.0 });
            }
        }
        topo_order(&self.ands, &defined)
    }

    pub fn parse(text: &str) -> Result<Circuit, AigerError> {
        parse_aiger(text)
    }
}

/// Serialized as AIGER ASCII text.
impl serde::Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.serialize())
    }
}

impl<'de> serde::Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let text = String::deserialize(de)?;
        parse_aiger(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy)]
enum Def {
    Leaf,
    Gate(usize),
}

fn topo_order(ands: &[AndGate], defined: &HashMap<u32, Def>) -> Result<Vec<usize>, AigerError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark = vec![0u8; ands.len()];
    let mut order = Vec::with_capacity(ands.len());
    for root in 0..ands.len() {
        if mark[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, u8)> = vec![(root, 0)];
        mark[root] = 1;
        while let Some((k, child)) = stack.pop() {
            let g = ands[k];
            let operands = [g.rhs0, g.rhs1];
            if (child as usize) < operands.len() {
                stack.push((k, child + 1));
                if let Some(Def::Gate(j)) = defined.get(&operands[child as usize].var()) {
                    match mark[*j] {
                        0 => {
                            mark[*j] = 1;
                            stack.push((*j, 0));
                        }
                        1 => return Err(AigerError::Cycle { var: ands[*j].lhs.var() }),
                        _ => {}
                    }
                }
            } else {
                mark[k] = 2;
                order.push(k);
            }
        }
    }
    Ok(order)
}

fn parse_numbers(line: &str, lineno: usize, n: usize) -> Result<Vec<u32>, AigerError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != n {
        return Err(AigerError::Malformed {
            line: lineno,
            msg: format!("expected {n} literal(s), found `{line}`"),
        });
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<u32>().map_err(|_| AigerError::Malformed {
                line: lineno,
                msg: format!("`{p}` is not a non-negative integer"),
            })
        })
        .collect()
}

/// Parses and validates an ASCII AIGER circuit. The symbol table is kept and
/// the comment section ignored.
pub fn parse_aiger(text: &str) -> Result<Circuit, AigerError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(AigerError::Header {
        line: 1,
        msg: "empty input".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != "aag" {
        return Err(AigerError::Header {
            line: 1,
            msg: format!("expected `aag M I L O A`, found `{header}`"),
        });
    }
    let nums: Vec<u32> = parts[1..]
        .iter()
        .map(|p| {
            p.parse::<u32>().map_err(|_| AigerError::Header {
                line: 1,
                msg: format!("`{p}` is not a non-negative integer"),
            })
        })
        .collect::<Result<_, _>>()?;
    let (m, ni, nl, no, na) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    let limit = 2 * m + 1;

    let mut take = |what: &'static str, count: u32, width: usize| {
        let mut rows = Vec::with_capacity(count as usize);
        for found in 0..count as usize {
            let Some((lineno, line)) = lines.next() else {
                return Err(AigerError::CountMismatch {
                    what,
                    expected: count as usize,
                    found,
                });
            };
            let vals = parse_numbers(line, lineno, width)?;
            for &v in &vals {
                if v > limit {
                    return Err(AigerError::LiteralOutOfRange {
                        line: lineno,
                        lit: v,
                        limit,
                    });
                }
            }
            rows.push((lineno, vals));
        }
        Ok(rows)
    };
    let input_rows = take("input", ni, 1)?;
    let latch_rows = take("latch", nl, 2)?;
    let output_rows = take("output", no, 1)?;
    let and_rows = take("AND", na, 3)?;

    let mut inputs = Vec::new();
    for (lineno, v) in input_rows {
        if v[0] % 2 == 1 || v[0] == 0 {
            return Err(AigerError::OddInput {
                line: lineno,
                lit: v[0],
            });
        }
        inputs.push(Lit(v[0]));
    }
    let latches = latch_rows
        .into_iter()
        .map(|(_, v)| Latch {
            current: Lit(v[0]),
            next: Lit(v[1]),
        })
        .collect();
    let outputs = output_rows.into_iter().map(|(_, v)| Lit(v[0])).collect();
    let ands = and_rows
        .into_iter()
        .map(|(_, v)| AndGate {
            lhs: Lit(v[0]),
            rhs0: Lit(v[1]),
            rhs1: Lit(v[2]),
        })
        .collect();

    let mut symbols = Symbols::default();
    for (lineno, line) in lines.by_ref() {
        if line.starts_with('c') && (line.len() == 1 || line[1..].starts_with(char::is_whitespace)) {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (kind, rest) = line.split_at(1);
        let (idx, name) = rest.split_once(' ').ok_or_else(|| AigerError::Malformed {
            line: lineno,
            msg: format!("bad symbol line `{line}`"),
        })?;
        let idx: usize = idx.parse().map_err(|_| AigerError::Malformed {
            line: lineno,
            msg: format!("bad symbol index in `{line}`"),
        })?;
        let (table, bound) = match kind {
            "i" => (&mut symbols.inputs, ni),
            "l" => (&mut symbols.latches, nl),
            "o" => (&mut symbols.outputs, no),
            _ => {
                return Err(AigerError::Malformed {
                    line: lineno,
                    msg: format!("unexpected line `{line}` after definitions"),
                })
            }
        };
        if idx >= bound as usize || table.insert(idx, name.to_string()).is_some() {
            return Err(AigerError::Malformed {
                line: lineno,
                msg: format!("invalid or duplicate symbol `{line}`"),
            });
        }
    }

    let circuit = Circuit {
        max_var: m,
        inputs,
        latches,
        outputs,
        ands,
        symbols,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Value of `lit` under a variable assignment.
pub fn lit_value(lit: Lit, assignment: &HashMap<u32, bool>) -> Result<bool, AigerError> {
    match lit.0 {
        0 => Ok(false),
        1 => Ok(true),
        _ => assignment
            .get(&lit.var())
            .map(|v| v ^ lit.is_negated())
            .ok_or(AigerError::Unassigned { var: lit.var() }),
    }
}

/// Latch values; the initial state is all zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatchState(pub Vec<bool>);

impl LatchState {
    pub fn initial(c: &Circuit) -> Self {
        LatchState(vec![false; c.num_latches()])
    }

    fn pack(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| m | ((b as u64) << i))
    }

    fn unpack(bits: u64, len: usize) -> Self {
        LatchState((0..len).map(|i| bits >> i & 1 == 1).collect())
    }
}

/// A validated circuit prepared for repeated simulation. Inputs, latch
/// states and outputs are packed into `u64` bit vectors (bit `k` is the
/// `k`-th definition).
#[derive(Debug, Clone)]
pub struct Simulator<'c> {
    circuit: &'c Circuit,
    order: Vec<usize>,
}

impl<'c> Simulator<'c> {
    pub fn new(circuit: &'c Circuit) -> Result<Self, AigerError> {
        for (what, count) in [
            ("inputs", circuit.num_inputs()),
            ("latches", circuit.num_latches()),
            ("outputs", circuit.num_outputs()),
        ] {
            if count > 64 {
                return Err(AigerError::TooWide { what, count });
            }
        }
        let order = circuit.validate()?;
        Ok(Simulator { circuit, order })
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    /// One step: returns `(outputs, next latch state)`.
    pub fn step_packed(&self, state: u64, inputs: u64) -> (u64, u64) {
        let c = self.circuit;
        let mut vals = vec![false; c.max_var as usize + 1];
        for (k, lit) in c.inputs.iter().enumerate() {
            vals[lit.var() as usize] = inputs >> k & 1 == 1;
        }
        for (k, l) in c.latches.iter().enumerate() {
            vals[l.current.var() as usize] = state >> k & 1 == 1;
        }
        let value = |vals: &[bool], lit: Lit| vals[lit.var() as usize] ^ lit.is_negated();
        for &k in &self.order {
            let g = c.ands[k];
            vals[g.lhs.var() as usize] = value(&vals, g.rhs0) && value(&vals, g.rhs1);
        }
        let outputs = c
            .outputs
            .iter()
            .enumerate()
            .fold(0u64, |m, (k, &l)| m | ((value(&vals, l) as u64) << k));
        let next = c
            .latches
            .iter()
            .enumerate()
            .fold(0u64, |m, (k, l)| m | ((value(&vals, l.next) as u64) << k));
        (outputs, next)
    }

    pub fn step(&self, state: &LatchState, inputs: &[bool]) -> (Vec<bool>, LatchState) {
        assert_eq!(state.0.len(), self.circuit.num_latches());
        assert_eq!(inputs.len(), self.circuit.num_inputs());
        let packed_in = inputs
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
        let (out, next) = self.step_packed(state.pack(), packed_in);
        let outputs = (0..self.circuit.num_outputs())
            .map(|k| out >> k & 1 == 1)
            .collect();
        (outputs, LatchState::unpack(next, self.circuit.num_latches()))
    }

    /// Latch states reachable from the initial state under any inputs.
    pub fn reachable_states(&self) -> BTreeSet<u64> {
        let n_in = self.circuit.num_inputs();
        let mut seen = BTreeSet::from([0u64]);
        let mut todo = vec![0u64];
        while let Some(s) = todo.pop() {
            for x in 0..(1u64 << n_in) {
                let (_, next) = self.step_packed(s, x);
                if seen.insert(next) {
                    todo.push(next);
                }
            }
        }
        seen
    }
}

/// One step of `c` from `state` under `inputs`.
pub fn step(
    c: &Circuit,
    state: &LatchState,
    inputs: &[bool],
) -> Result<(Vec<bool>, LatchState), AigerError> {
    Ok(Simulator::new(c)?.step(state, inputs))
}

/// Names for a circuit's input and output pins, in definition order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoRoles {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl IoRoles {
    pub fn new<S: Into<String>>(
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
    ) -> Self {
        IoRoles {
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        }
    }

    /// Roles with inputs and outputs exchanged.
    pub fn swapped(&self) -> Self {
        IoRoles {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
        }
    }

    /// Inputs followed by outputs; the proposition order of packed letters.
    pub fn universe(&self) -> Vec<String> {
        self.inputs.iter().chain(&self.outputs).cloned().collect()
    }
}

/// Simulates `c` on an input lasso (letters over `roles.inputs`) until the
/// pair (latch state, position in the input period) repeats, and returns
/// the combined input/output trace as a lasso.
pub fn run_lasso(c: &Circuit, roles: &IoRoles, inputs: &LassoWord) -> Result<LassoWord, AigerError> {
    let sim = Simulator::new(c)?;
    assert_eq!(roles.inputs.len(), c.num_inputs(), "input role count");
    assert_eq!(roles.outputs.len(), c.num_outputs(), "output role count");
    let (in_masks, loop_start) = inputs.to_masks(&roles.inputs);
    let (trace, trace_loop) = run_packed(&sim, &in_masks, loop_start);
    let letters: Vec<Letter> = trace
        .iter()
        .map(|&(x, y)| {
            let mut l = Letter::new();
            for (k, name) in roles.inputs.iter().enumerate() {
                if x >> k & 1 == 1 {
                    l.insert(name.clone());
                }
            }
            for (k, name) in roles.outputs.iter().enumerate() {
                if y >> k & 1 == 1 {
                    l.insert(name.clone());
                }
            }
            l
        })
        .collect();
    Ok(LassoWord::new(
        letters[..trace_loop].to_vec(),
        letters[trace_loop..].to_vec(),
    ))
}

/// Packed core of [`run_lasso`]: returns `(input, output)` letter pairs and
/// the loop-back index of the resulting trace lasso.
pub fn run_packed(sim: &Simulator<'_>, inputs: &[u64], loop_start: usize) -> (Vec<(u64, u64)>, usize) {
    let period = inputs.len() - loop_start;
    let mut state = 0u64;
    let mut trace = Vec::new();
    for &x in &inputs[..loop_start] {
        let (y, next) = sim.step_packed(state, x);
        trace.push((x, y));
        state = next;
    }
    let mut seen: HashMap<(u64, usize), usize> = HashMap::new();
    let mut pos = 0;
    loop {
        if let Some(&first) = seen.get(&(state, pos)) {
            return (trace, first);
        }
        seen.insert((state, pos), trace.len());
        let x = inputs[loop_start + pos];
        let (y, next) = sim.step_packed(state, x);
        trace.push((x, y));
        state = next;
        pos = (pos + 1) % period;
    }
}
