//! Realizability oracles: a subprocess adapter for external synthesis tools
//! and a bounded synthesizer that searches small Mealy (system) and Moore
//! (environment) machines.
//!
//! Every artifact is model checked before it is returned.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::debug;

use crate::aiger::{parse_aiger, AigerError, AndGate, Circuit, IoRoles, Latch, Lit, Symbols};
use crate::ltl::Formula;
use crate::specs::{RealizabilityStatus, Specification};
use crate::verify::{
    check_circuit_with, check_counter_strategy_with, environment_roles, system_roles, Budget,
    VerifyError,
};

/// Environment variable that overrides the external tool command.
pub const TOOL_ENV: &str = "LTLSYN_SYNTH_TOOL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OracleMode {
    /// `command` and `args` may contain `{input}` (path of the spec JSON
    /// file) and `{timeout}` (seconds); the spec is also written to stdin.
    External { command: String, args: Vec<String> },
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub timeout_secs: f64,
    pub max_system_states: usize,
    pub max_env_states: usize,
    /// Per-check model checking budget in seconds.
    pub verify_secs: f64,
    /// Deterministic limits for bounded mode: model-checked candidate tables
    /// and partial-table steps per state count, and product states per check.
    #[serde(default)]
    pub max_candidates: Option<usize>,
    #[serde(default)]
    pub max_search_steps: Option<usize>,
    #[serde(default)]
    pub max_verify_states: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mode: OracleMode::Bounded,
            timeout_secs: 120.0,
            max_system_states: 2,
            max_env_states: 2,
            verify_secs: 10.0,
            max_candidates: None,
            max_search_steps: None,
            max_verify_states: None,
        }
    }
}

impl OracleConfig {
    /// Bounded mode with only deterministic limits; wall-clock limits are
    /// kept as a generous safety net.
    pub fn deterministic(max_candidates: usize, max_search_steps: usize, max_verify_states: usize) -> Self {
        OracleConfig {
            timeout_secs: 3600.0,
            verify_secs: 600.0,
            max_candidates: Some(max_candidates),
            max_search_steps: Some(max_search_steps),
            max_verify_states: Some(max_verify_states),
            ..OracleConfig::default()
        }
    }

    pub fn limits(&self) -> SearchLimits {
        SearchLimits {
            deadline: Instant::now() + Duration::from_secs_f64(self.timeout_secs),
            verify: Budget {
                time: Some(Duration::from_secs_f64(self.verify_secs)),
                max_states: self.max_verify_states,
            },
            max_candidates: self.max_candidates,
            max_steps: self.max_search_steps,
        }
    }

    fn verify_budget(&self) -> Budget {
        self.limits().verify
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: RealizabilityStatus,
    pub artifact: Option<Circuit>,
    pub elapsed: f64,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error("failed to run synthesis tool: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("synthesis tool exited abnormally ({status}): {stderr}")]
    Crash { status: String, stderr: String },
    #[error("synthesis tool protocol violation: {0}")]
    Protocol(String),
    #[error("tool output is not a valid circuit: {0}")]
    Circuit(#[from] AigerError),
    #[error("{status} artifact does not verify: {reason}")]
    Certification {
        status: RealizabilityStatus,
        reason: String,
    },
}

/// Decides realizability of `s` according to `cfg`.
pub fn query(s: &Specification, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    if !(cfg.timeout_secs > 0.0) {
        return Err(OracleError::Config("timeout must be positive".into()));
    }
    match &cfg.mode {
        OracleMode::Bounded => Ok(bounded_synthesize_with(s, cfg)),
        OracleMode::External { command, args } => {
            let command = std::env::var(TOOL_ENV).unwrap_or_else(|_| command.clone());
            query_external(s, &command, args, cfg)
        }
    }
}

fn query_external(
    s: &Specification,
    command: &str,
    args: &[String],
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    use std::os::unix::process::CommandExt;

    let start = Instant::now();
    let json = s.to_json();
    let mut file = tempfile::Builder::new().suffix(".json").tempfile()?;
    file.write_all(json.as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();
    let timeout = format!("{}", cfg.timeout_secs.ceil() as u64);
    let fill = |a: &str| a.replace("{input}", &path).replace("{timeout}", &timeout);

    let mut child = Command::new(fill(command))
        .args(args.iter().map(|a| fill(a)))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()?;
    let pid = child.id() as i32;
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // a tool that ignores stdin may close it early
        let _ = stdin.write_all(json.as_bytes());
    }
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        stdout.read_to_string(&mut buf).map(|_| buf)
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = start + Duration::from_secs_f64(cfg.timeout_secs);
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break Some(st);
        }
        if Instant::now() >= deadline {
            // SAFETY: plain syscall on the child's own process group.
            unsafe {
                libc::killpg(pid, libc::SIGKILL);
            }
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let stdout = out_reader.join().expect("reader thread")?;
    let stderr = err_reader.join().expect("reader thread");
    let elapsed = start.elapsed().as_secs_f64();
    let Some(status) = status else {
        debug!(elapsed, "synthesis tool timed out");
        return Ok(OracleResult {
            status: RealizabilityStatus::Unknown,
            artifact: None,
            elapsed,
        });
    };

    let (first, rest) = stdout.split_once('\n').unwrap_or((stdout.as_str(), ""));
    let verdict = match first.trim() {
        "REALIZABLE" => RealizabilityStatus::Realizable,
        "UNREALIZABLE" => RealizabilityStatus::Unrealizable,
        "UNKNOWN" => RealizabilityStatus::Unknown,
        _ if !status.success() => {
            return Err(OracleError::Crash {
                status: status.to_string(),
                stderr: stderr.trim().to_string(),
            })
        }
        other => return Err(OracleError::Protocol(format!("unexpected status line `{other}`"))),
    };
    if verdict == RealizabilityStatus::Unknown {
        return Ok(OracleResult {
            status: verdict,
            artifact: None,
            elapsed,
        });
    }
    let circuit = parse_aiger(rest)?;
    certify(s, verdict, &circuit, cfg.verify_budget())?;
    Ok(OracleResult {
        status: verdict,
        artifact: Some(circuit),
        elapsed,
    })
}

/// Model checks an artifact against the status it claims.
pub fn certify(
    s: &Specification,
    status: RealizabilityStatus,
    c: &Circuit,
    budget: Budget,
) -> Result<(), OracleError> {
    let verdict = match status {
        RealizabilityStatus::Realizable => {
            check_circuit_with(c, &s.to_formula(), &system_roles(s), budget)
        }
        RealizabilityStatus::Unrealizable => {
            check_counter_strategy_with(c, s, &environment_roles(s), budget)
        }
        RealizabilityStatus::Unknown => return Ok(()),
    };
    match verdict {
        Ok(v) if v.holds => Ok(()),
        Ok(v) => Err(OracleError::Certification {
            status,
            reason: format!("counterexample {}", v.counterexample.expect("failing verdict")),
        }),
        Err(e) => Err(OracleError::Certification {
            status,
            reason: e.to_string(),
        }),
    }
}

/// Bounded synthesis with default timing and the given state bounds.
pub fn bounded_synthesize(s: &Specification, max_system_states: usize, max_env_states: usize) -> OracleResult {
    bounded_synthesize_with(
        s,
        &OracleConfig {
            max_system_states,
            max_env_states,
            ..OracleConfig::default()
        },
    )
}

/// Searches system machines with 1, 2, ... states, then environment machines.
pub fn bounded_synthesize_with(s: &Specification, cfg: &OracleConfig) -> OracleResult {
    let start = Instant::now();
    let done = |status, artifact| OracleResult {
        status,
        artifact,
        elapsed: start.elapsed().as_secs_f64(),
    };
    let limits = cfg.limits();
    match system_search(s, cfg.max_system_states, &limits) {
        Ok(Some(c)) => return done(RealizabilityStatus::Realizable, Some(c)),
        Ok(None) => {}
        Err(OutOfTime) => return done(RealizabilityStatus::Unknown, None),
    }
    match environment_search(s, cfg.max_env_states, &limits) {
        Ok(Some(c)) => done(RealizabilityStatus::Unrealizable, Some(c)),
        Ok(None) | Err(OutOfTime) => done(RealizabilityStatus::Unknown, None),
    }
}

/// The search ran past its deadline or verification budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfTime;

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub deadline: Instant,
    pub verify: Budget,
    pub max_candidates: Option<usize>,
    pub max_steps: Option<usize>,
}

impl SearchLimits {
    pub fn timed(deadline: Instant, verify_secs: f64) -> Self {
        SearchLimits {
            deadline,
            verify: Budget::with_time(Duration::from_secs_f64(verify_secs)),
            max_candidates: None,
            max_steps: None,
        }
    }
}

/// Smallest certified system circuit with at most `max_states` states.
pub fn system_search(
    s: &Specification,
    max_states: usize,
    limits: &SearchLimits,
) -> Result<Option<Circuit>, OutOfTime> {
    let (ins, outs) = s.occurring();
    let phi = s.to_formula();
    for n in 1..=max_states {
        match search(&Problem::system(&ins, &outs, &phi), n, limits) {
            Search::Found(table) => {
                let c = table.to_circuit(&s.inputs, &ins, &s.outputs, &outs);
                certify(s, RealizabilityStatus::Realizable, &c, limits.verify)
                    .map_err(|_| OutOfTime)?;
                return Ok(Some(c));
            }
            Search::Exhausted => {}
            Search::OutOfTime => return Err(OutOfTime),
        }
    }
    Ok(None)
}

/// Smallest certified environment (counter-strategy) circuit with at most
/// `max_states` states. It reads the spec outputs and drives the inputs.
pub fn environment_search(
    s: &Specification,
    max_states: usize,
    limits: &SearchLimits,
) -> Result<Option<Circuit>, OutOfTime> {
    let (ins, outs) = s.occurring();
    let neg = Formula::not(s.to_formula());
    for n in 1..=max_states {
        match search(&Problem::environment(&ins, &outs, &neg), n, limits) {
            Search::Found(table) => {
                let c = table.to_circuit(&s.outputs, &outs, &s.inputs, &ins);
                certify(s, RealizabilityStatus::Unrealizable, &c, limits.verify)
                    .map_err(|_| OutOfTime)?;
                return Ok(Some(c));
            }
            Search::Exhausted => {}
            Search::OutOfTime => return Err(OutOfTime),
        }
    }
    Ok(None)
}

/// Find a machine reading `reads` and writing `writes` all of whose traces
/// satisfy `goal`. Moore machines choose outputs per state only.
struct Problem<'a> {
    reads: &'a [String],
    writes: &'a [String],
    goal: &'a Formula,
    moore: bool,
}

impl<'a> Problem<'a> {
    fn system(ins: &'a [String], outs: &'a [String], goal: &'a Formula) -> Self {
        Problem {
            reads: ins,
            writes: outs,
            goal,
            moore: false,
        }
    }
    fn environment(ins: &'a [String], outs: &'a [String], goal: &'a Formula) -> Self {
        Problem {
            reads: outs,
            writes: ins,
            goal,
            moore: true,
        }
    }
}

/// A complete machine: `next[s * A + a]`, `out[s * A + a]` (Mealy) or
/// `out[s]` (Moore), where `A = 2^|reads|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineTable {
    pub states: usize,
    pub reads: usize,
    pub moore: bool,
    pub next: Vec<u32>,
    pub out: Vec<u64>,
}

impl MachineTable {
    fn output(&self, s: usize, a: u64) -> u64 {
        if self.moore {
            self.out[s]
        } else {
            self.out[s << self.reads | a as usize]
        }
    }

    /// Realizes the table as a circuit whose input pins are `read_pins` and
    /// output pins `write_pins`; the table's read and write propositions
    /// (`reads`, `writes`) are located among them by name and unused output
    /// pins are tied to 0.
    pub fn to_circuit(
        &self,
        read_pins: &[String],
        reads: &[String],
        write_pins: &[String],
        writes: &[String],
    ) -> Circuit {
        let latches = state_bits(self.states);
        let mut b = AigBuilder::new(read_pins.len(), latches);
        let mut vars: Vec<Lit> = reads
            .iter()
            .map(|r| b.input(read_pins.iter().position(|p| p == r).expect("read pin")))
            .collect();
        vars.extend((0..latches).map(|k| b.latch(k)));
        let rows = 1usize << vars.len();
        let a_mask = (1usize << reads.len()) - 1;
        let entry = |idx: usize| -> Option<(u32, u64)> {
            let (a, s) = (idx & a_mask, idx >> reads.len());
            (s < self.states).then(|| (self.next[s << self.reads | a], self.output(s, a as u64)))
        };
        let next: Vec<Lit> = (0..latches)
            .map(|bit| {
                let table: Vec<bool> = (0..rows)
                    .map(|i| entry(i).is_some_and(|(n, _)| n >> bit & 1 == 1))
                    .collect();
                b.truth_table(&vars, &table)
            })
            .collect();
        let outputs: Vec<Lit> = write_pins
            .iter()
            .map(|p| match writes.iter().position(|w| w == p) {
                None => Lit::FALSE,
                Some(k) => {
                    let table: Vec<bool> = (0..rows)
                        .map(|i| entry(i).is_some_and(|(_, o)| o >> k & 1 == 1))
                        .collect();
                    b.truth_table(&vars, &table)
                }
            })
            .collect();
        b.finish(&next, &outputs)
    }
}

fn state_bits(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

enum Search {
    Found(MachineTable),
    Exhausted,
    OutOfTime,
}

#[derive(Debug, Clone, Copy)]
enum Missing {
    Next(usize),
    Out(usize),
}

struct Partial {
    states: usize,
    reads: usize,
    moore: bool,
    next: Vec<Option<u32>>,
    out: Vec<Option<u64>>,
}

impl Partial {
    fn out_index(&self, s: usize, a: u64) -> usize {
        if self.moore {
            s
        } else {
            s << self.reads | a as usize
        }
    }

    /// Trace letters (reads in the low bits) of the run on an input lasso.
    fn run(&self, word: &[u64], loop_start: usize) -> Result<(Vec<u64>, usize), Missing> {
        let period = word.len() - loop_start;
        let mut s = 0usize;
        let mut trace = Vec::new();
        // trace index of the first visit to (state, loop position)
        let mut seen = vec![usize::MAX; self.states * period];
        let mut t = 0;
        loop {
            let pos = if t < loop_start { t } else { loop_start + (t - loop_start) % period };
            if t >= loop_start {
                let key = s * period + pos - loop_start;
                if seen[key] != usize::MAX {
                    return Ok((trace, seen[key]));
                }
                seen[key] = trace.len();
            }
            let a = word[pos];
            let oi = self.out_index(s, a);
            let o = self.out[oi].ok_or(Missing::Out(oi))?;
            let ni = s << self.reads | a as usize;
            let n = self.next[ni].ok_or(Missing::Next(ni))?;
            trace.push(a | o << self.reads);
            s = n as usize;
            t += 1;
        }
    }

    fn complete(&self) -> MachineTable {
        MachineTable {
            states: self.states,
            reads: self.reads,
            moore: self.moore,
            next: self.next.iter().map(|x| x.unwrap_or(0)).collect(),
            out: self.out.iter().map(|x| x.unwrap_or(0)).collect(),
        }
    }
}

/// Counterexample-guided enumeration of `n`-state tables. Entries are only
/// assigned when a stored counterexample run needs them; a table consistent
/// with all stored counterexamples is completed with zeros and model
/// checked, and a failure adds its input projection to the store.
fn search(p: &Problem<'_>, n: usize, limits: &SearchLimits) -> Search {
    let reads = p.reads.len();
    let writes = p.writes.len();
    if reads > 6 || writes > 6 {
        return Search::OutOfTime;
    }
    let alphabet = 1usize << reads;
    let universe: Vec<String> = p.reads.iter().chain(p.writes).cloned().collect();
    let roles = IoRoles::new(p.reads.to_vec(), p.writes.to_vec());
    let compiled = crate::ltl::CompiledFormula::new(p.goal, &universe);
    let mut partial = Partial {
        states: n,
        reads,
        moore: p.moore,
        next: vec![None; n * alphabet],
        out: vec![None; if p.moore { n } else { n * alphabet }],
    };
    let mut cexs: Vec<(Vec<u64>, usize)> = Vec::new();
    // undo log of assigned entries with the remaining value to try
    let mut trail: Vec<(Missing, u64)> = Vec::new();

    let max_out = 1u64 << writes;
    let mut candidates = 0usize;
    let mut steps = 0usize;
    loop {
        steps += 1;
        if limits.max_steps.is_some_and(|m| steps > m) {
            return Search::OutOfTime;
        }
        if Instant::now() > limits.deadline {
            return Search::OutOfTime;
        }
        // first entry needed by some counterexample, or a violation
        let mut need = None;
        let mut violated = false;
        for (w, ls) in &cexs {
            match partial.run(w, *ls) {
                Err(m) => {
                    need = Some(m);
                    break;
                }
                Ok((trace, tl)) => {
                    if !compiled.eval(&trace, tl) {
                        violated = true;
                        break;
                    }
                }
            }
        }
        if violated {
            if !backtrack(&mut partial, &mut trail, n, max_out) {
                return Search::Exhausted;
            }
            continue;
        }
        if let Some(m) = need {
            assign(&mut partial, m, 0);
            trail.push((m, 0));
            continue;
        }
        candidates += 1;
        if limits.max_candidates.is_some_and(|m| candidates > m) {
            return Search::OutOfTime;
        }
        let table = partial.complete();
        let circuit = table.to_circuit(p.reads, p.reads, p.writes, p.writes);
        match check_circuit_with(&circuit, p.goal, &roles, limits.verify) {
            Ok(v) if v.holds => return Search::Found(table),
            Ok(v) => {
                let w = v.counterexample.expect("failing verdict");
                let (letters, ls) = w.to_masks(&universe);
                let mask = (1u64 << reads) - 1;
                cexs.push((letters.iter().map(|l| l & mask).collect(), ls));
            }
            Err(VerifyError::BudgetExceeded { .. }) => return Search::OutOfTime,
            Err(e) => panic!("table circuit failed to check: {e}"),
        }
    }
}

fn assign(p: &mut Partial, m: Missing, v: u64) {
    match m {
        Missing::Next(i) => p.next[i] = Some(v as u32),
        Missing::Out(i) => p.out[i] = Some(v),
    }
}

fn unassign(p: &mut Partial, m: Missing) {
    match m {
        Missing::Next(i) => p.next[i] = None,
        Missing::Out(i) => p.out[i] = None,
    }
}

/// Moves to the next untried value of the latest entry that has one.
/// New state indices are only introduced in increasing order.
fn backtrack(p: &mut Partial, trail: &mut Vec<(Missing, u64)>, n: usize, max_out: u64) -> bool {
    while let Some((m, v)) = trail.pop() {
        unassign(p, m);
        let limit = match m {
            Missing::Out(_) => max_out,
            Missing::Next(_) => {
                let used = p.next.iter().flatten().map(|&x| x as u64 + 1).max().unwrap_or(1);
                (used + 1).min(n as u64)
            }
        };
        if v + 1 < limit {
            assign(p, m, v + 1);
            trail.push((m, v + 1));
            return true;
        }
    }
    false
}

/// Structurally hashed AIG construction with constant propagation.
#[derive(Debug, Clone)]
pub struct AigBuilder {
    inputs: usize,
    latches: usize,
    gates: Vec<(Lit, Lit)>,
    strash: HashMap<(Lit, Lit), Lit>,
}

impl AigBuilder {
    pub fn new(inputs: usize, latches: usize) -> Self {
        AigBuilder {
            inputs,
            latches,
            gates: Vec::new(),
            strash: HashMap::new(),
        }
    }

    pub fn input(&self, k: usize) -> Lit {
        assert!(k < self.inputs);
        Lit::from_var(k as u32 + 1, false)
    }

    pub fn latch(&self, k: usize) -> Lit {
        assert!(k < self.latches);
        Lit::from_var((self.inputs + k) as u32 + 1, false)
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == b.negate() {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if let Some(&l) = self.strash.get(&(a, b)) {
            return l;
        }
        let var = (self.inputs + self.latches + self.gates.len()) as u32 + 1;
        let l = Lit::from_var(var, false);
        self.gates.push((a, b));
        self.strash.insert((a, b), l);
        l
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        self.and(a.negate(), b.negate()).negate()
    }

    pub fn mux(&mut self, sel: Lit, then: Lit, els: Lit) -> Lit {
        if then == els {
            return then;
        }
        let t = self.and(sel, then);
        let e = self.and(sel.negate(), els);
        self.or(t, e)
    }

    /// Function given by `table[i]` for the assignment where `vars[k]` is
    /// bit `k` of `i`.
    pub fn truth_table(&mut self, vars: &[Lit], table: &[bool]) -> Lit {
        assert_eq!(table.len(), 1 << vars.len());
        let mut memo = HashMap::new();
        self.shannon(vars, table, &mut memo)
    }

    fn shannon(&mut self, vars: &[Lit], table: &[bool], memo: &mut HashMap<Vec<bool>, Lit>) -> Lit {
        if table.iter().all(|&b| !b) {
            return Lit::FALSE;
        }
        if table.iter().all(|&b| b) {
            return Lit::TRUE;
        }
        if let Some(&l) = memo.get(table) {
            return l;
        }
        let half = table.len() / 2;
        let (lo, hi) = table.split_at(half);
        let top = vars[vars.len() - 1];
        let rest = &vars[..vars.len() - 1];
        let e = self.shannon(rest, lo, memo);
        let t = self.shannon(rest, hi, memo);
        let l = self.mux(top, t, e);
        memo.insert(table.to_vec(), l);
        l
    }

    /// Assembles the circuit, dropping gates outside the cone of influence
    /// of the outputs and latch inputs.
    pub fn finish(&self, latch_next: &[Lit], outputs: &[Lit]) -> Circuit {
        assert_eq!(latch_next.len(), self.latches);
        let base = (self.inputs + self.latches) as u32;
        let mut live = vec![false; self.gates.len()];
        let mut stack: Vec<Lit> = latch_next.iter().chain(outputs).copied().collect();
        while let Some(l) = stack.pop() {
            if l.var() > base {
                let g = (l.var() - base - 1) as usize;
                if !live[g] {
                    live[g] = true;
                    stack.push(self.gates[g].0);
                    stack.push(self.gates[g].1);
                }
            }
        }
        let mut renum = vec![0u32; self.gates.len()];
        let mut next_var = base;
        for (g, &alive) in live.iter().enumerate() {
            if alive {
                next_var += 1;
                renum[g] = next_var;
            }
        }
        let map = |l: Lit| {
            if l.var() > base {
                Lit::from_var(renum[(l.var() - base - 1) as usize], l.is_negated())
            } else {
                l
            }
        };
        let ands = self
            .gates
            .iter()
            .enumerate()
            .filter(|(g, _)| live[*g])
            .map(|(g, &(a, b))| {
                let (a, b) = (map(a), map(b));
                // conventional ordering: larger operand first
                let (a, b) = if a >= b { (a, b) } else { (b, a) };
                AndGate {
                    lhs: Lit::from_var(renum[g], false),
                    rhs0: a,
                    rhs1: b,
                }
            })
            .collect();
        Circuit {
            max_var: next_var,
            inputs: (0..self.inputs).map(|k| self.input(k)).collect(),
            latches: (0..self.latches)
                .map(|k| Latch {
                    current: self.latch(k),
                    next: map(latch_next[k]),
                })
                .collect(),
            outputs: outputs.iter().map(|&l| map(l)).collect(),
            ands,
            symbols: Symbols::default(),
        }
    }
}
