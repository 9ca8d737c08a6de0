//! Dataset generation: specifications are grown from instantiated patterns,
//! alternating between adding guarantees until the specification becomes
//! unrealizable and adding assumptions until it is realizable again.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::{debug, info, warn};

use crate::aiger::Circuit;
use crate::ltl::Formula;
use crate::mine::{instantiate, Pattern, PatternPool};
use crate::oracle::{certify, query, OracleConfig, OracleError, OracleMode};
use crate::specs::{RealizabilityStatus, Specification};
use crate::verify::Budget;

/// Every circuit in a dataset has this many input and output pins.
pub const PINS: usize = 5;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("pattern pool has no usable guarantee patterns")]
    EmptyPool,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("sample {line}: {reason}")]
    Sample { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub max_guarantees: usize,
    pub max_assumptions: usize,
    pub assumption_trials: usize,
    pub var_cap: u32,
    pub and_cap_fraction: f64,
    pub target_samples: usize,
    /// train, validation, test
    pub split_fractions: [f64; 3],
    pub seed: u64,
    /// Patterns are instantiated over the first `universe_inputs` of
    /// `i0..i4` and the first `universe_outputs` of `o0..o4`.
    pub universe_inputs: usize,
    pub universe_outputs: usize,
    /// Attempts to run before giving up on the target; 0 means 50 per sample.
    pub max_attempts: usize,
    pub rebalance: bool,
    pub oracle: OracleConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_guarantees: 10,
            max_assumptions: 3,
            assumption_trials: 5,
            var_cap: 50,
            and_cap_fraction: 0.2,
            target_samples: 1000,
            split_fractions: [0.8, 0.1, 0.1],
            seed: 0,
            universe_inputs: PINS,
            universe_outputs: PINS,
            max_attempts: 0,
            rebalance: true,
            oracle: OracleConfig::default(),
        }
    }
}

impl GenConfig {
    /// Full-scale settings: 250k samples with an external synthesis tool.
    pub fn full_scale() -> Self {
        GenConfig {
            target_samples: 250_000,
            oracle: OracleConfig {
                mode: OracleMode::External {
                    command: "strix".into(),
                    args: vec!["--from-bosy".into(), "{input}".into()],
                },
                ..OracleConfig::default()
            },
            ..GenConfig::default()
        }
    }

    /// Small deterministic settings used for desk runs.
    pub fn desk(target_samples: usize, seed: u64) -> Self {
        GenConfig {
            target_samples,
            seed,
            universe_inputs: 2,
            universe_outputs: 2,
            oracle: OracleConfig::deterministic(400, 20_000, 200_000),
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Config(m.into()));
        if self.max_guarantees == 0 || self.max_assumptions == 0 || self.assumption_trials == 0 {
            return bad("caps and trial counts must be positive");
        }
        if self.var_cap == 0 || !(self.and_cap_fraction > 0.0 && self.and_cap_fraction <= 1.0) {
            return bad("var cap must be positive and AND-bucket fraction in (0, 1]");
        }
        if self.split_fractions.iter().any(|f| !(*f >= 0.0)) {
            return bad("split fractions must be non-negative");
        }
        if (self.split_fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("split fractions must sum to 1");
        }
        if self.universe_inputs > PINS || self.universe_outputs > PINS {
            return bad("instantiation universe exceeds the circuit pins");
        }
        if !(self.oracle.timeout_secs > 0.0) {
            return bad("oracle timeout must be positive");
        }
        Ok(())
    }

    fn attempt_budget(&self) -> usize {
        if self.max_attempts == 0 {
            self.target_samples.saturating_mul(50).max(100)
        } else {
            self.max_attempts
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Terminal,
    Predecessor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub attempt: u64,
    pub kind: SampleKind,
    pub oracle: String,
    /// Indices into the pool's guarantee and assumption lists.
    pub guarantee_patterns: Vec<usize>,
    pub assumption_patterns: Vec<usize>,
    pub assumption_trials: usize,
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSample {
    pub spec: Specification,
    pub status: RealizabilityStatus,
    pub circuit: Circuit,
    pub meta: SampleMeta,
}

impl DatasetSample {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("sample serializes")
    }

    /// Re-runs certification of the circuit against the status.
    pub fn recertify(&self, budget: Budget) -> Result<(), OracleError> {
        certify(&self.spec, self.status, &self.circuit, budget)
    }
}

/// A specification under construction with the pattern ids it was built from.
#[derive(Debug, Clone)]
struct Grown {
    spec: Specification,
    guarantees: Vec<usize>,
    assumptions: Vec<usize>,
}

impl Grown {
    fn with_guarantee(&self, id: usize, f: Formula) -> Grown {
        let mut g = self.clone();
        g.spec.guarantees.push(f);
        g.guarantees.push(id);
        g
    }

    fn with_assumption(&self, id: usize, f: Formula) -> Grown {
        let mut g = self.clone();
        g.spec.assumptions.push(f);
        g.assumptions.push(id);
        g
    }
}

struct Certified {
    grown: Grown,
    status: RealizabilityStatus,
    circuit: Option<Circuit>,
}

fn eligible(patterns: &[Pattern], cfg: &GenConfig) -> Vec<usize> {
    patterns
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_trivial() && p.inputs() <= cfg.universe_inputs && p.outputs() <= cfg.universe_outputs)
        .map(|(k, _)| k)
        .collect()
}

/// The RNG stream of attempt `attempt` under master seed `seed`.
pub fn attempt_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    rng
}

fn oracle_name(cfg: &OracleConfig) -> String {
    match &cfg.mode {
        OracleMode::Bounded => "bounded".into(),
        OracleMode::External { command, .. } => format!("external:{command}"),
    }
}

/// Runs one generation attempt and returns 0, 1 or 2 certified samples: the
/// terminal specification and, if it is unrealizable, its realizable
/// predecessor.
pub fn generate_sample<R: Rng>(
    pool: &PatternPool,
    cfg: &GenConfig,
    rng: &mut R,
    attempt: u64,
) -> Result<Vec<DatasetSample>, GenError> {
    let guarantee_ids = eligible(&pool.guarantees, cfg);
    let assumption_ids = eligible(&pool.assumptions, cfg);
    if guarantee_ids.is_empty() {
        return Err(GenError::EmptyPool);
    }
    let ins = crate::random::names("i", PINS);
    let outs = crate::random::names("o", PINS);
    let (u_ins, u_outs) = (&ins[..cfg.universe_inputs], &outs[..cfg.universe_outputs]);

    let mut queries = 0usize;
    let mut trials = 0usize;
    let mut ask = |g: &Grown| -> Result<Option<Certified>, GenError> {
        queries += 1;
        match query(&g.spec, &cfg.oracle) {
            Ok(r) if r.status == RealizabilityStatus::Unknown => Ok(None),
            Ok(r) => Ok(Some(Certified {
                grown: g.clone(),
                status: r.status,
                circuit: r.artifact,
            })),
            Err(e) => Err(GenError::Sample {
                line: attempt as usize,
                reason: e.to_string(),
            }),
        }
    };

    let empty = Grown {
        spec: Specification::new(ins.clone(), outs.clone(), vec![], vec![]).expect("pin names are distinct"),
        guarantees: vec![],
        assumptions: vec![],
    };
    // the empty specification is realizable; it has no artifact and is never emitted
    let mut current = Certified {
        grown: empty,
        status: RealizabilityStatus::Realizable,
        circuit: None,
    };
    let mut predecessor: Option<Certified> = None;

    'grow: loop {
        if current.status == RealizabilityStatus::Realizable {
            if current.grown.spec.guarantees.len() >= cfg.max_guarantees {
                break;
            }
            let id = *guarantee_ids.choose(rng).expect("nonempty");
            let f = instantiate(&pool.guarantees[id], rng, u_ins, u_outs);
            let Some(next) = ask(&current.grown.with_guarantee(id, f))? else {
                break;
            };
            if next.status == RealizabilityStatus::Unrealizable {
                predecessor = Some(std::mem::replace(&mut current, next));
            } else {
                current = next;
            }
            continue;
        }
        if current.grown.spec.assumptions.len() >= cfg.max_assumptions || assumption_ids.is_empty() {
            break;
        }
        for _ in 0..cfg.assumption_trials {
            trials += 1;
            let id = *assumption_ids.choose(rng).expect("nonempty");
            let f = instantiate(&pool.assumptions[id], rng, u_ins, u_outs);
            if let Some(next) = ask(&current.grown.with_assumption(id, f))? {
                if next.status == RealizabilityStatus::Realizable {
                    current = next;
                    predecessor = None;
                    continue 'grow;
                }
            }
        }
        break;
    }

    let meta = |g: &Grown, kind| SampleMeta {
        seed: cfg.seed,
        attempt,
        kind,
        oracle: oracle_name(&cfg.oracle),
        guarantee_patterns: g.guarantees.clone(),
        assumption_patterns: g.assumptions.clone(),
        assumption_trials: trials,
        queries,
    };
    let mut out = Vec::new();
    let mut emit = |c: Certified, kind| {
        if let Some(circuit) = c.circuit {
            out.push(DatasetSample {
                meta: meta(&c.grown, kind),
                spec: c.grown.spec,
                status: c.status,
                circuit,
            });
        }
    };
    let unrealizable = current.status == RealizabilityStatus::Unrealizable;
    emit(current, SampleKind::Terminal);
    if unrealizable {
        if let Some(p) = predecessor {
            emit(p, SampleKind::Predecessor);
        }
    }
    Ok(out)
}

/// Online circuit filter: a variable-index cap and a per-AND-count bucket cap
/// relative to the number of samples accepted so far.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitFilter {
    pub var_cap: u32,
    pub fraction: f64,
    pub accepted: usize,
    pub buckets: BTreeMap<usize, usize>,
    pub dropped_var: usize,
    pub dropped_and: usize,
}

impl CircuitFilter {
    pub fn new(var_cap: u32, fraction: f64) -> Self {
        CircuitFilter {
            var_cap,
            fraction,
            ..CircuitFilter::default()
        }
    }

    /// Accepts a circuit with `k` AND gates iff its bucket holds at most
    /// `fraction` of the samples accepted so far.
    pub fn offer(&mut self, c: &Circuit) -> bool {
        if c.max_var > self.var_cap {
            self.dropped_var += 1;
            return false;
        }
        let k = c.ands.len();
        let count = self.buckets.get(&k).copied().unwrap_or(0);
        if count as f64 > self.fraction * self.accepted as f64 {
            self.dropped_and += 1;
            return false;
        }
        *self.buckets.entry(k).or_default() += 1;
        self.accepted += 1;
        true
    }
}

pub fn apply_circuit_filters(samples: Vec<DatasetSample>, cfg: &GenConfig) -> Vec<DatasetSample> {
    let mut filter = CircuitFilter::new(cfg.var_cap, cfg.and_cap_fraction);
    samples.into_iter().filter(|s| filter.offer(&s.circuit)).collect()
}

/// Drops samples of the surplus status class, always from the currently
/// largest AND-count bucket (latest sample first), until the two classes
/// differ by at most one.
pub fn rebalance(samples: &mut Vec<DatasetSample>) -> usize {
    let real = |s: &DatasetSample| s.status == RealizabilityStatus::Realizable;
    let mut dropped = 0;
    loop {
        let r = samples.iter().filter(|s| real(s)).count();
        let u = samples.len() - r;
        if r.abs_diff(u) <= 1 {
            return dropped;
        }
        let surplus = r > u;
        let mut buckets: BTreeMap<usize, usize> = BTreeMap::new();
        for s in samples.iter() {
            *buckets.entry(s.circuit.ands.len()).or_default() += 1;
        }
        let mut order: Vec<(usize, usize)> = buckets.into_iter().collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let victim = order.iter().find_map(|&(k, _)| {
            samples
                .iter()
                .rposition(|s| real(s) == surplus && s.circuit.ands.len() == k)
        });
        samples.remove(victim.expect("surplus class is nonempty"));
        dropped += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub attempts: usize,
    pub attempt_errors: usize,
    pub empty_attempts: usize,
    pub emitted: usize,
    pub filter: CircuitFilter,
    /// Unrealizable terminals whose predecessor was filtered out.
    pub unpaired: usize,
    pub unrealizable_before_rebalance: f64,
    pub rebalanced_away: usize,
    pub unrealizable_after_rebalance: f64,
    pub reached_target: bool,
    pub split_sizes: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<DatasetSample>,
    /// Sample indices of the train, validation and test splits.
    pub splits: [Vec<usize>; 3],
    pub report: GenReport,
}

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

fn unrealizable_fraction(samples: &[DatasetSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let u = samples.iter().filter(|s| s.status == RealizabilityStatus::Unrealizable).count();
    u as f64 / samples.len() as f64
}

/// Generates samples in parallel batches until the target is reached or the
/// attempt budget runs out, committing them in attempt order through the
/// circuit filter; then rebalances and splits. The result depends only on
/// the pool and config (with bounded-mode oracles limited deterministically).
pub fn build_dataset(pool: &PatternPool, cfg: &GenConfig) -> Result<Dataset, GenError> {
    cfg.validate()?;
    if eligible(&pool.guarantees, cfg).is_empty() {
        return Err(GenError::EmptyPool);
    }
    let mut report = GenReport::default();
    let mut filter = CircuitFilter::new(cfg.var_cap, cfg.and_cap_fraction);
    let mut samples: Vec<DatasetSample> = Vec::new();
    let budget = cfg.attempt_budget();
    let batch = (rayon::current_num_threads() * 4).max(16);
    let mut next = 0usize;
    while samples.len() < cfg.target_samples && next < budget {
        let end = (next + batch).min(budget);
        let results: Vec<_> = (next..end)
            .into_par_iter()
            .map(|a| generate_sample(pool, cfg, &mut attempt_rng(cfg.seed, a as u64), a as u64))
            .collect();
        for result in results {
            if samples.len() >= cfg.target_samples {
                break;
            }
            report.attempts += 1;
            let batch_samples = match result {
                Ok(v) => v,
                Err(e) => {
                    warn!("attempt dropped: {e}");
                    report.attempt_errors += 1;
                    continue;
                }
            };
            if batch_samples.is_empty() {
                report.empty_attempts += 1;
            }
            let mut terminal_unreal = false;
            for s in batch_samples {
                report.emitted += 1;
                let accepted = samples.len() < cfg.target_samples && filter.offer(&s.circuit);
                match s.meta.kind {
                    SampleKind::Terminal => terminal_unreal = accepted && s.status == RealizabilityStatus::Unrealizable,
                    SampleKind::Predecessor if terminal_unreal && !accepted => {
                        debug!(attempt = s.meta.attempt, "predecessor filtered out");
                        report.unpaired += 1;
                    }
                    SampleKind::Predecessor => {}
                }
                if accepted {
                    samples.push(s);
                }
            }
        }
        next = end;
        debug!(attempts = next, samples = samples.len(), "generation progress");
    }
    report.reached_target = samples.len() >= cfg.target_samples;
    if !report.reached_target {
        warn!(
            samples = samples.len(),
            target = cfg.target_samples,
            "attempt budget exhausted before reaching the target"
        );
    }
    report.filter = filter;
    report.unrealizable_before_rebalance = unrealizable_fraction(&samples);
    if cfg.rebalance {
        report.rebalanced_away = rebalance(&mut samples);
    }
    report.unrealizable_after_rebalance = unrealizable_fraction(&samples);

    let splits = split_indices(samples.len(), cfg.split_fractions, cfg.seed);
    report.split_sizes = [splits[0].len(), splits[1].len(), splits[2].len()];
    info!(
        samples = samples.len(),
        attempts = report.attempts,
        unrealizable = report.unrealizable_before_rebalance,
        "dataset generated"
    );
    Ok(Dataset { samples, splits, report })
}

/// Random disjoint split; validation and test sizes are rounded down and the
/// remainder goes to training.
pub fn split_indices(n: usize, fractions: [f64; 3], seed: u64) -> [Vec<usize>; 3] {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut attempt_rng(seed, u64::MAX));
    let val = (n as f64 * fractions[1]).floor() as usize;
    let test = (n as f64 * fractions[2]).floor() as usize;
    let train = n - val - test;
    let mut parts = [
        idx[..train].to_vec(),
        idx[train..train + val].to_vec(),
        idx[train + val..].to_vec(),
    ];
    for p in &mut parts {
        p.sort_unstable();
    }
    parts
}

fn line_hash(line: &str) -> String {
    hex::encode(Sha256::digest(line.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub splits: BTreeMap<String, Vec<String>>,
}

fn write(path: &Path, text: &str) -> Result<(), GenError> {
    fs::write(path, text).map_err(|source| GenError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `{train,val,test}.jsonl`, `manifest.json` (line hashes per split)
/// and `report.json` into `dir`.
pub fn write_dataset(d: &Dataset, dir: &Path) -> Result<(), GenError> {
    fs::create_dir_all(dir).map_err(|source| GenError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut manifest = Manifest {
        splits: BTreeMap::new(),
    };
    for (name, split) in SPLIT_NAMES.iter().zip(&d.splits) {
        let lines: Vec<String> = split.iter().map(|&i| d.samples[i].to_line()).collect();
        manifest
            .splits
            .insert(name.to_string(), lines.iter().map(|l| line_hash(l)).collect());
        let mut text = lines.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        write(&dir.join(format!("{name}.jsonl")), &text)?;
    }
    write(
        &dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    write(
        &dir.join("report.json"),
        &serde_json::to_string_pretty(&d.report).expect("report serializes"),
    )
}

pub fn read_samples(path: &Path) -> Result<Vec<DatasetSample>, GenError> {
    let text = fs::read_to_string(path).map_err(|source| GenError::Io {
        path: path.display().to_string(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| GenError::Sample {
                line: k + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
