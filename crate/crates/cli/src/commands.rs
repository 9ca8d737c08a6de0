use std::path::{Path, PathBuf};
use std::time::Duration;

use candle::{DType, Device};
use ltlsyn_core::aiger::{parse_aiger, Circuit};
use ltlsyn_core::datagen::{build_dataset, read_samples, write_dataset, DatasetSample, GenConfig, PINS};
use ltlsyn_core::mine::{load_corpus, mine_patterns, PatternPool};
use ltlsyn_core::oracle::{query, OracleError, OracleMode};
use ltlsyn_core::specs::{RealizabilityStatus, Specification};
use ltlsyn_core::tokenizer::{decode_circuit, rename_to_pins, render, Vocabulary};
use ltlsyn_core::verify::{
    check_circuit_with, check_counter_strategy_with, environment_roles, system_roles, Budget, VerifyError,
};
use ltlsyn_eval::{write_report, EvalConfig, ModelPredictor};
use ltlsyn_model::data::until_eos;
use ltlsyn_model::{beam_search, greedy, BeamHypothesis, Checkpoint, Example, ModelConfig, OptimizerConfig, TrainConfig, Transformer};
use serde::Serialize;
use tracing::info;

use crate::config::{layer, ConfigFile, Globals};
use crate::error::{io, CliError};
use crate::{OracleChoice, Scale};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io(path))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    std::fs::write(path, text).map_err(io(path))
}

#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    command: &'a str,
    globals: &'a Globals,
    config: &'a T,
}

fn record<T: Serialize>(path: &Path, command: &str, globals: &Globals, config: &T) -> Result<(), CliError> {
    let r = RunRecord { command, globals, config };
    write(path, &serde_json::to_string_pretty(&r).expect("run record serializes"))
}

fn read_spec(path: &Path) -> Result<Specification, CliError> {
    Specification::from_json(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn mine(corpus: &Path, out: &Path) -> Result<(), CliError> {
    let specs = load_corpus(corpus)?;
    let pool = mine_patterns(&specs);
    write(out, &pool.to_json())?;
    let s = &pool.stats;
    println!("specifications {}", s.specifications);
    println!("assumption patterns {}", pool.assumptions.len());
    println!("guarantee patterns {}", pool.guarantees.len());
    println!("duplicates removed {}", s.duplicates);
    println!("filtered {}", s.filtered);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn gen(
    file: &ConfigFile,
    globals: &Globals,
    pool: &Path,
    out: &Path,
    oracle: OracleChoice,
    target: Option<usize>,
    tool: Option<String>,
    tool_args: Vec<String>,
) -> Result<(), CliError> {
    let pool = PatternPool::from_json(&read(pool)?)?;
    let preset = match oracle {
        OracleChoice::Bounded => GenConfig::desk(1000, globals.seed),
        OracleChoice::External => GenConfig::full_scale(),
    };
    let mut cfg = layer(preset, file.gen.as_ref(), "gen")?;
    cfg.seed = globals.seed;
    if let Some(t) = target {
        cfg.target_samples = t;
    }
    if let OracleMode::External { command, args } = &mut cfg.oracle.mode {
        if let Some(t) = tool {
            *command = t;
        }
        if !tool_args.is_empty() {
            *args = tool_args;
        }
    } else if tool.is_some() || !tool_args.is_empty() {
        return Err(CliError::Usage("--tool and --tool-arg require --oracle external".into()));
    }
    cfg.validate()?;

    // surface a missing or broken tool before spending the attempt budget
    if cfg.target_samples > 0 {
        let probe = Specification::new(vec![], vec!["o0".into()], vec![], vec!["G o0".parse().expect("formula")])
            .expect("probe specification");
        match query(&probe, &cfg.oracle) {
            Err(e @ (OracleError::Config(_) | OracleError::Spawn(_) | OracleError::Crash { .. } | OracleError::Protocol(_))) => {
                return Err(CliError::Tool(format!("oracle misconfigured: {e}")));
            }
            _ => {}
        }
    }

    let dataset = build_dataset(&pool, &cfg)?;
    let r = &dataset.report;
    if r.attempts > 0 && r.attempt_errors == r.attempts {
        return Err(CliError::Tool(format!("all {} oracle attempts failed", r.attempts)));
    }
    write_dataset(&dataset, out)?;
    record(&out.join("run.json"), "gen", globals, &cfg)?;
    println!("samples {}", dataset.samples.len());
    println!(
        "splits train {} val {} test {}",
        r.split_sizes[0], r.split_sizes[1], r.split_sizes[2]
    );
    println!("attempts {} (errors {}, empty {})", r.attempts, r.attempt_errors, r.empty_attempts);
    println!("unrealizable before rebalancing {:.4}", r.unrealizable_before_rebalance);
    println!("unrealizable after rebalancing {:.4}", r.unrealizable_after_rebalance);
    println!(
        "filter drops: var cap {}, AND buckets {}, rebalancing {}",
        r.filter.dropped_var, r.filter.dropped_and, r.rebalanced_away
    );
    if !r.reached_target {
        println!("target not reached within the attempt budget");
    }
    Ok(())
}

pub struct TrainFlags {
    pub steps: Option<usize>,
    pub batch_size: Option<usize>,
    pub warmup: Option<usize>,
    pub eval_every: Option<usize>,
    pub target_accuracy: Option<f64>,
}

/// Training defaults for a model scale.
pub fn train_preset(scale: Scale) -> TrainConfig {
    match scale {
        Scale::Full => TrainConfig {
            optimizer: OptimizerConfig::default(),
            ..TrainConfig::default()
        },
        Scale::Desk => TrainConfig {
            optimizer: OptimizerConfig {
                warmup_steps: 400,
                batch_size: 32,
                steps: 4000,
                ..OptimizerConfig::default()
            },
            eval_every: 100,
            ..TrainConfig::default()
        },
    }
}

fn load_examples(path: &Path, vocab: &Vocabulary, cfg: &ModelConfig) -> Result<Vec<Example>, CliError> {
    read_samples(path)?
        .iter()
        .enumerate()
        .map(|(k, s)| {
            Example::from_sample(s, vocab, cfg)
                .map_err(|e| CliError::Data(format!("{} sample {}: {e}", path.display(), k + 1)))
        })
        .collect()
}

pub fn train(
    file: &ConfigFile,
    globals: &Globals,
    data: &Path,
    out: &Path,
    metrics: Option<&Path>,
    scale: Scale,
    flags: TrainFlags,
) -> Result<(), CliError> {
    let vocab = Vocabulary::standard();
    let preset = match scale {
        Scale::Desk => ModelConfig::desk(vocab.len()),
        Scale::Full => ModelConfig::full_scale(vocab.len()),
    };
    let model_cfg = layer(preset, file.model.as_ref(), "model")?;
    if model_cfg.vocab_size != vocab.len() {
        return Err(CliError::Usage(format!("vocabulary has {} tokens", vocab.len())));
    }
    let mut cfg = layer(train_preset(scale), file.train.as_ref(), "train")?;
    cfg.seed = globals.seed;
    if let Some(v) = flags.steps {
        cfg.optimizer.steps = v;
    }
    if let Some(v) = flags.batch_size {
        cfg.optimizer.batch_size = v;
    }
    if let Some(v) = flags.warmup {
        cfg.optimizer.warmup_steps = v;
    }
    if let Some(v) = flags.eval_every {
        cfg.eval_every = v;
    }
    if flags.target_accuracy.is_some() {
        cfg.target_train_accuracy = flags.target_accuracy;
    }

    let train_set = load_examples(&data.join("train.jsonl"), &vocab, &model_cfg)?;
    let val_path = data.join("val.jsonl");
    let val_set = if val_path.exists() {
        load_examples(&val_path, &vocab, &model_cfg)?
    } else {
        vec![]
    };
    let model = Transformer::new(&model_cfg, globals.seed, DType::F32, &Device::Cpu)?;
    info!(params = model.params().scalar_count(), train = train_set.len(), val = val_set.len(), "training");
    let report = ltlsyn_model::train(&model, &train_set, &val_set, &vocab, &cfg, metrics)?;
    model.to_checkpoint(&vocab)?.save(out)?;

    #[derive(Serialize)]
    struct TrainRun<'a> {
        model: &'a ModelConfig,
        train: &'a TrainConfig,
        data: &'a Path,
    }
    let mut run_path = out.as_os_str().to_owned();
    run_path.push(".run.json");
    record(
        &PathBuf::from(run_path),
        "train",
        globals,
        &TrainRun {
            model: &model_cfg,
            train: &cfg,
            data,
        },
    )?;
    println!("steps {}", report.steps);
    println!("train accuracy {:.4}", report.final_train_accuracy);
    if let Some(v) = report.best_val_accuracy {
        println!("best validation accuracy {v:.4} at step {}", report.best_step);
    }
    if cfg.target_train_accuracy.is_some() {
        println!("target reached {}", report.reached_target);
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<(Transformer, Vocabulary), CliError> {
    let c = Checkpoint::load(path)?;
    Ok(Transformer::from_checkpoint(&c, &Device::Cpu)?)
}

/// Names the circuit's pins after the declared propositions.
fn name_pins(c: &mut Circuit, spec: &Specification, status: RealizabilityStatus) {
    let (ins, outs) = match status {
        RealizabilityStatus::Unrealizable => (&spec.outputs, &spec.inputs),
        _ => (&spec.inputs, &spec.outputs),
    };
    for (k, n) in ins.iter().enumerate().take(c.inputs.len()) {
        c.symbols.inputs.insert(k, n.clone());
    }
    for (k, n) in outs.iter().enumerate().take(c.outputs.len()) {
        c.symbols.outputs.insert(k, n.clone());
    }
}

enum Outcome {
    Holds,
    Fails(String),
    Unknown(String),
}

fn check_status(spec: &Specification, status: RealizabilityStatus, c: &Circuit, budget: Budget) -> Result<Outcome, CliError> {
    let verdict = match status {
        RealizabilityStatus::Unrealizable => check_counter_strategy_with(c, spec, &environment_roles(spec), budget),
        _ => check_circuit_with(c, &spec.to_formula(), &system_roles(spec), budget),
    };
    match verdict {
        Ok(v) if v.holds => Ok(Outcome::Holds),
        Ok(v) => Ok(Outcome::Fails(v.counterexample.map(|w| w.to_string()).unwrap_or_default())),
        Err(e @ VerifyError::BudgetExceeded { .. }) => Ok(Outcome::Unknown(e.to_string())),
        Err(e @ VerifyError::NotMoore { .. }) => Ok(Outcome::Fails(e.to_string())),
        Err(e) => Err(CliError::Data(e.to_string())),
    }
}

pub fn predict(model: &Path, spec: &Path, beam: Option<usize>, verify: bool) -> Result<(), CliError> {
    let (model, vocab) = load_model(model)?;
    let spec = read_spec(spec)?;
    let ex = Example::from_spec(&spec, &vocab, model.config())?;
    let hyps: Vec<BeamHypothesis> = match beam {
        None => vec![greedy(&model, &ex, &vocab)?],
        Some(k) if k >= 1 => beam_search(&model, &ex, &vocab, k)?,
        Some(_) => return Err(CliError::Usage("beam size must be at least 1".into())),
    };
    let (pins, _) = rename_to_pins(&spec)?;
    for (rank, h) in hyps.iter().enumerate() {
        println!("candidate {} score {:.6}", rank + 1, h.score);
        match decode_circuit(&until_eos(&h.ids, &vocab), &vocab, PINS, PINS) {
            Ok((status, mut c)) => {
                println!("{status}");
                if verify {
                    let verdict = match check_status(&pins, status, &c, Budget::with_time(Duration::from_secs(10)))? {
                        Outcome::Holds => "HOLDS".to_string(),
                        Outcome::Fails(_) => "FAILS".to_string(),
                        Outcome::Unknown(why) => format!("UNKNOWN ({why})"),
                    };
                    println!("verdict {verdict}");
                }
                name_pins(&mut c, &spec, status);
                print!("{}", c.serialize());
            }
            Err(e) => {
                println!("unparseable: {e}");
                println!("{}", render(&h.ids, &vocab));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    file: &ConfigFile,
    globals: &Globals,
    model: &Path,
    data: &Path,
    out: &Path,
    beams: Option<Vec<usize>>,
    name: Option<String>,
    verify_secs: Option<f64>,
    limit: Option<usize>,
) -> Result<(), CliError> {
    let (model, vocab) = load_model(model)?;
    let data = if data.is_dir() { data.join("test.jsonl") } else { data.to_path_buf() };
    let mut samples: Vec<DatasetSample> = read_samples(&data)?;
    if let Some(n) = limit {
        samples.truncate(n);
    }
    for (k, s) in samples.iter().enumerate() {
        Example::from_sample(s, &vocab, model.config()).map_err(|e| {
            CliError::Data(format!(
                "{} sample {} does not fit the checkpoint's vocabulary or limits: {e}",
                data.display(),
                k + 1
            ))
        })?;
    }
    let mut cfg = layer(EvalConfig::default(), file.eval.as_ref(), "eval")?;
    if let Some(b) = beams {
        cfg.beams = b;
    }
    if let Some(n) = name {
        cfg.dataset = n;
    }
    if let Some(s) = verify_secs {
        cfg.verify_secs = s;
    }
    let predictor = ModelPredictor { model, vocab };
    let report = ltlsyn_eval::evaluate(&predictor, &samples, &cfg)?;
    write_report(&report, out)?;
    record(&out.join("run.json"), "evaluate", globals, &cfg)?;
    println!("dataset {} ({} samples)", report.dataset, samples.len());
    for m in &report.beams {
        println!(
            "beam {:>2}: semantic {:.4} syntactic {:.4} timeouts {} unparseable {} mean satisfying {:.2}",
            m.beam, m.semantic, m.syntactic, m.timeouts, m.unparseable, m.mean_satisfying
        );
    }
    if let Some(a) = report.status_token_accuracy {
        println!("realizability token accuracy {a:.4}");
    }
    for v in &report.beam_monotonicity_violations {
        println!("note: {v}");
    }
    Ok(())
}

pub fn check(circuit: &Path, spec: &Path, counter_strategy: bool, verify_secs: Option<f64>) -> Result<(), CliError> {
    let c = parse_aiger(&read(circuit)?).map_err(|e| CliError::Data(format!("{}: {e}", circuit.display())))?;
    let spec = read_spec(spec)?;
    let budget = Budget {
        time: verify_secs.map(Duration::from_secs_f64),
        max_states: None,
    };
    let status = if counter_strategy {
        RealizabilityStatus::Unrealizable
    } else {
        RealizabilityStatus::Realizable
    };
    match check_status(&spec, status, &c, budget)? {
        Outcome::Holds => println!("HOLDS"),
        Outcome::Fails(cex) => {
            println!("FAILS");
            if !cex.is_empty() {
                println!("counterexample {cex}");
            }
        }
        Outcome::Unknown(why) => return Err(CliError::Tool(format!("UNKNOWN: {why}"))),
    }
    Ok(())
}
