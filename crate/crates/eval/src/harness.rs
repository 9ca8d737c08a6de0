use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use ltlsyn_core::aiger::Circuit;
use ltlsyn_core::datagen::{DatasetSample, PINS};
use ltlsyn_core::specs::{RealizabilityStatus, Specification};
use ltlsyn_core::tokenizer::{decode_circuit, rename_to_pins, EOS};
use ltlsyn_core::verify::{
    check_circuit_with, check_counter_strategy_with, environment_roles, system_roles, Budget, VerifyError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::predictor::Predictor;
use crate::reference;
use crate::{EvalError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub dataset: String,
    pub beams: Vec<usize>,
    /// Time budget per candidate verification.
    pub verify_secs: f64,
    /// Optional product-state budget per verification; unlike the time
    /// budget it makes timeouts reproducible.
    pub verify_states: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            dataset: "test".into(),
            beams: reference::BEAM_SIZES.to_vec(),
            verify_secs: 10.0,
            verify_states: None,
        }
    }
}

impl EvalConfig {
    fn budget(&self) -> Budget {
        Budget {
            time: Some(Duration::from_secs_f64(self.verify_secs)),
            max_states: self.verify_states,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamOutcome {
    pub beam: usize,
    pub candidates: usize,
    pub parsed: usize,
    pub syntactic: bool,
    /// `None` when no candidate verified and some verification timed out.
    pub semantic: Option<bool>,
    pub satisfying: usize,
    pub timeouts: usize,
    pub top_status: Option<RealizabilityStatus>,
    /// Status and circuit of the first verifying candidate.
    pub certificate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub reference_status: RealizabilityStatus,
    pub reference_ands: usize,
    pub beams: Vec<BeamOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamMetrics {
    pub beam: usize,
    pub samples: usize,
    pub syntactic: f64,
    /// Over samples with a definite verdict.
    pub semantic: f64,
    pub timeouts: usize,
    /// Samples none of whose candidates decode to a circuit.
    pub unparseable: usize,
    pub mean_satisfying: f64,
    pub realizable_syntactic: Option<f64>,
    pub realizable_semantic: Option<f64>,
    pub unrealizable_syntactic: Option<f64>,
    pub unrealizable_semantic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub low: usize,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub beams: Vec<BeamMetrics>,
    /// Top candidate's status token equals the reference status, at beam 1.
    pub status_token_accuracy: Option<f64>,
    /// Semantic accuracy at the largest beam, by reference AND count in bins of 5.
    pub and_bins: Vec<BinMetrics>,
    /// Adjacent beam sizes whose semantic accuracy decreases.
    pub beam_monotonicity_violations: Vec<String>,
    pub samples: Vec<SampleOutcome>,
}

enum Check {
    Holds,
    Fails,
    Timeout,
}

fn verify(spec: &Specification, status: RealizabilityStatus, c: &Circuit, budget: Budget) -> Check {
    let verdict = match status {
        RealizabilityStatus::Realizable => check_circuit_with(c, &spec.to_formula(), &system_roles(spec), budget),
        RealizabilityStatus::Unrealizable => check_counter_strategy_with(c, spec, &environment_roles(spec), budget),
        RealizabilityStatus::Unknown => return Check::Fails,
    };
    match verdict {
        Ok(v) if v.holds => Check::Holds,
        Ok(_) => Check::Fails,
        Err(VerifyError::BudgetExceeded { .. }) => Check::Timeout,
        Err(_) => Check::Fails,
    }
}

fn same_structure(a: &Circuit, b: &Circuit) -> bool {
    a.inputs.len() == b.inputs.len()
        && a.latches.len() == b.latches.len()
        && a.outputs.len() == b.outputs.len()
        && a.ands.len() == b.ands.len()
        && a.body_lines() == b.body_lines()
}

fn evaluate_sample(
    predictor: &dyn Predictor,
    index: usize,
    sample: &DatasetSample,
    cfg: &EvalConfig,
) -> Result<SampleOutcome> {
    let vocab = predictor.vocabulary();
    let eos = vocab.special(EOS);
    let (pins, _) = rename_to_pins(&sample.spec)?;
    let mut beams = vec![];
    for &k in &cfg.beams {
        let cands = predictor.predict(&sample.spec, k)?;
        let mut out = BeamOutcome {
            beam: k,
            candidates: cands.len(),
            parsed: 0,
            syntactic: false,
            semantic: Some(false),
            satisfying: 0,
            timeouts: 0,
            top_status: None,
            certificate: None,
        };
        for (rank, ids) in cands.iter().enumerate() {
            let end = ids.iter().position(|&i| i == eos).map_or(ids.len(), |p| p + 1);
            let Ok((status, c)) = decode_circuit(&ids[..end], vocab, PINS, PINS) else {
                continue;
            };
            out.parsed += 1;
            if rank == 0 {
                out.top_status = Some(status);
            }
            if status == sample.status && same_structure(&c, &sample.circuit) {
                out.syntactic = true;
            }
            match verify(&pins, status, &c, cfg.budget()) {
                Check::Holds => {
                    out.satisfying += 1;
                    out.certificate
                        .get_or_insert_with(|| format!("{status}\n{}", c.serialize()));
                }
                Check::Fails => {}
                Check::Timeout => out.timeouts += 1,
            }
        }
        if out.satisfying > 0 {
            out.semantic = Some(true);
        } else if out.timeouts > 0 {
            out.semantic = None;
        }
        beams.push(out);
    }
    Ok(SampleOutcome {
        index,
        reference_status: sample.status,
        reference_ands: sample.circuit.ands.len(),
        beams,
    })
}

fn rate(hits: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| hits as f64 / n as f64)
}

fn beam_metrics(samples: &[SampleOutcome], j: usize) -> BeamMetrics {
    let syn = |f: &dyn Fn(&SampleOutcome) -> bool| {
        let sel: Vec<_> = samples.iter().filter(|s| f(s)).collect();
        rate(sel.iter().filter(|s| s.beams[j].syntactic).count(), sel.len())
    };
    let sem = |f: &dyn Fn(&SampleOutcome) -> bool| {
        let sel: Vec<_> = samples.iter().filter(|s| f(s) && s.beams[j].semantic.is_some()).collect();
        rate(sel.iter().filter(|s| s.beams[j].semantic == Some(true)).count(), sel.len())
    };
    let real = |s: &SampleOutcome| s.reference_status == RealizabilityStatus::Realizable;
    let unreal = |s: &SampleOutcome| s.reference_status == RealizabilityStatus::Unrealizable;
    let n = samples.len();
    BeamMetrics {
        beam: samples.first().map_or(0, |s| s.beams[j].beam),
        samples: n,
        syntactic: syn(&|_| true).unwrap_or(0.0),
        semantic: sem(&|_| true).unwrap_or(0.0),
        timeouts: samples.iter().filter(|s| s.beams[j].semantic.is_none()).count(),
        unparseable: samples.iter().filter(|s| s.beams[j].parsed == 0).count(),
        mean_satisfying: samples.iter().map(|s| s.beams[j].satisfying as f64).sum::<f64>() / n.max(1) as f64,
        realizable_syntactic: syn(&real),
        realizable_semantic: sem(&real),
        unrealizable_syntactic: syn(&unreal),
        unrealizable_semantic: sem(&unreal),
    }
}

/// Runs the predictor on every sample at every configured beam size.
/// Samples are processed on the current rayon pool.
pub fn evaluate(predictor: &dyn Predictor, samples: &[DatasetSample], cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.beams.is_empty() || cfg.beams.contains(&0) {
        return Err(EvalError::Config("beam sizes must be positive".into()));
    }
    let mut beams = cfg.beams.clone();
    beams.sort_unstable();
    beams.dedup();
    let cfg = EvalConfig { beams, ..cfg.clone() };
    let outcomes = samples
        .par_iter()
        .enumerate()
        .map(|(k, s)| evaluate_sample(predictor, k, s, &cfg))
        .collect::<Result<Vec<_>>>()?;

    let metrics: Vec<BeamMetrics> = (0..cfg.beams.len()).map(|j| beam_metrics(&outcomes, j)).collect();
    let mut violations = vec![];
    for w in metrics.windows(2) {
        if w[1].semantic < w[0].semantic {
            let msg = format!(
                "semantic accuracy drops from {:.3} at beam {} to {:.3} at beam {}",
                w[0].semantic, w[0].beam, w[1].semantic, w[1].beam
            );
            warn!("{msg}");
            violations.push(msg);
        }
    }
    let status_token_accuracy = (cfg.beams[0] == 1)
        .then(|| {
            rate(
                outcomes
                    .iter()
                    .filter(|s| s.beams[0].top_status == Some(s.reference_status))
                    .count(),
                outcomes.len(),
            )
        })
        .flatten();
    let last = cfg.beams.len() - 1;
    let mut bins: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for s in &outcomes {
        if let Some(hit) = s.beams[last].semantic {
            let e = bins.entry(s.reference_ands / 5 * 5).or_default();
            e.0 += hit as usize;
            e.1 += 1;
        }
    }
    let and_bins = bins
        .into_iter()
        .map(|(low, (hits, n))| BinMetrics {
            low,
            n,
            accuracy: hits as f64 / n as f64,
        })
        .collect();
    for m in &metrics {
        info!(dataset = %cfg.dataset, beam = m.beam, syntactic = m.syntactic, semantic = m.semantic, "evaluated");
    }
    Ok(EvalReport {
        dataset: cfg.dataset.clone(),
        beams: metrics,
        status_token_accuracy,
        and_bins,
        beam_monotonicity_violations: violations,
        samples: outcomes,
    })
}

impl EvalReport {
    /// `(dataset, beam, metric, value)` rows.
    pub fn metric_rows(&self) -> Vec<(String, usize, String, f64)> {
        let mut rows = vec![];
        let mut push = |beam: usize, metric: &str, value: Option<f64>| {
            if let Some(v) = value {
                rows.push((self.dataset.clone(), beam, metric.to_string(), v));
            }
        };
        for m in &self.beams {
            push(m.beam, "syntactic", Some(m.syntactic));
            push(m.beam, "semantic", Some(m.semantic));
            push(m.beam, "timeouts", Some(m.timeouts as f64));
            push(m.beam, "unparseable", Some(m.unparseable as f64));
            push(m.beam, "mean_satisfying", Some(m.mean_satisfying));
            push(m.beam, "realizable_syntactic", m.realizable_syntactic);
            push(m.beam, "realizable_semantic", m.realizable_semantic);
            push(m.beam, "unrealizable_syntactic", m.unrealizable_syntactic);
            push(m.beam, "unrealizable_semantic", m.unrealizable_semantic);
        }
        push(1, "status_token", self.status_token_accuracy);
        rows
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `metrics.csv`, `and_bins.csv`, `samples.csv` and `reference.csv`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
    w.write_record(["dataset", "beam", "metric", "value"])?;
    for (d, b, m, v) in report.metric_rows() {
        w.write_record([d, b.to_string(), m, v.to_string()])?;
    }
    w.flush().map_err(io_err(dir))?;

    let mut w = csv::Writer::from_path(dir.join("and_bins.csv"))?;
    w.write_record(["dataset", "and_gate_bin_low", "accuracy", "n"])?;
    for b in &report.and_bins {
        w.write_record([report.dataset.clone(), b.low.to_string(), b.accuracy.to_string(), b.n.to_string()])?;
    }
    w.flush().map_err(io_err(dir))?;

    let mut w = csv::Writer::from_path(dir.join("samples.csv"))?;
    w.write_record([
        "dataset",
        "index",
        "beam",
        "reference_status",
        "top_status",
        "syntactic",
        "semantic",
        "satisfying",
        "timeouts",
        "certificate",
    ])?;
    for s in &report.samples {
        for b in &s.beams {
            w.write_record([
                report.dataset.clone(),
                s.index.to_string(),
                b.beam.to_string(),
                s.reference_status.to_string(),
                b.top_status.map(|t| t.to_string()).unwrap_or_default(),
                b.syntactic.to_string(),
                b.semantic.map(|x| x.to_string()).unwrap_or_else(|| "unknown".into()),
                b.satisfying.to_string(),
                b.timeouts.to_string(),
                b.certificate.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(io_err(dir))?;

    let mut w = csv::Writer::from_path(dir.join("reference.csv"))?;
    w.write_record(["dataset", "beam", "metric", "value"])?;
    for (d, b, m, v) in reference::rows() {
        w.write_record([d, b.to_string(), m, v.to_string()])?;
    }
    w.flush().map_err(io_err(dir))?;
    Ok(())
}

/// Keeps specifications with at most 5 inputs, at most 5 outputs, at most 12
/// properties and no property with more than 25 syntax-tree nodes.
pub fn filter_benchmarks(specs: Vec<Specification>) -> Vec<Specification> {
    specs
        .into_iter()
        .filter(|s| {
            s.inputs.len() <= 5
                && s.outputs.len() <= 5
                && s.assumptions.len() + s.guarantees.len() <= 12
                && s.assumptions.iter().chain(&s.guarantees).all(|f| f.ast_size() <= 25)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlsyn_core::ltl::Formula;

    const LISTING: &str = r#"{"semantics":"mealy","inputs":["r_m","r_0"],"outputs":["g_m","g_0"],
        "assumptions":["(G (F (! (r_m))))"],
        "guarantees":["(true)","(G ((! (g_m)) || (! (g_0))))","(G ((r_0) -> (F (g_0))))","(G ((r_m) -> (X ((! (g_0)) U (g_m)))))"]}"#;

    fn with_guarantees(gs: Vec<Formula>) -> Specification {
        Specification::new(vec!["a".into()], vec!["b".into()], vec![], gs).unwrap()
    }

    /// `X X ... X b` with `n` nodes.
    fn chain(n: usize) -> Formula {
        (1..n).fold(Formula::atom("b"), |f, _| Formula::next(f))
    }

    #[test]
    fn benchmark_filter_boundaries() {
        let listing = Specification::from_json(LISTING).unwrap();
        assert_eq!(filter_benchmarks(vec![listing.clone()]), vec![listing]);

        let twelve = with_guarantees(vec![Formula::atom("b"); 12]);
        let thirteen = with_guarantees(vec![Formula::atom("b"); 13]);
        assert_eq!(chain(25).ast_size(), 25);
        let size25 = with_guarantees(vec![chain(25)]);
        let size26 = with_guarantees(vec![chain(26)]);
        let wide = Specification::new(
            (0..6).map(|k| format!("x{k}")).collect(),
            vec!["b".into()],
            vec![],
            vec![Formula::atom("b")],
        )
        .unwrap();
        let kept = filter_benchmarks(vec![twelve.clone(), thirteen, size25.clone(), size26, wide]);
        assert_eq!(kept, vec![twelve, size25]);
    }
}
