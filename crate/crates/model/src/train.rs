use std::path::Path;

use candle::DType;
use candle_nn::{AdamW, Optimizer, ParamsAdamW};
use ltlsyn_core::tokenizer::Vocabulary;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::data::{Batch, Example};
use crate::transformer::{teacher_forced_hits, Dropout, Transformer};
use crate::{ModelError, OptimizerConfig, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    pub eval_every: usize,
    /// Stop as soon as teacher-forced sequence accuracy on the training set
    /// reaches this value.
    pub target_train_accuracy: Option<f64>,
    pub eval_batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerConfig::default(),
            seed: 0,
            eval_every: 500,
            target_train_accuracy: None,
            eval_batch_size: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: usize,
    pub split: String,
    pub loss: f64,
    /// Fraction of sequences predicted entirely correctly under teacher forcing.
    pub accuracy: f64,
    pub token_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub steps: usize,
    pub best_step: usize,
    pub best_val_accuracy: Option<f64>,
    pub final_train_accuracy: f64,
    pub reached_target: bool,
    /// Training-mode loss of each optimizer step's batch.
    pub batch_losses: Vec<f64>,
    /// Evaluation rows.
    pub rows: Vec<MetricRow>,
}

/// Loss and teacher-forced accuracies over a set of examples.
pub fn evaluate(
    model: &Transformer,
    examples: &[Example],
    vocab: &Vocabulary,
    batch_size: usize,
) -> Result<(f64, f64, f64)> {
    let (mut nll, mut seqs, mut toks, mut total) = (0.0, 0, 0, 0);
    for chunk in examples.chunks(batch_size.max(1)) {
        let refs: Vec<&Example> = chunk.iter().collect();
        let batch = Batch::new(&refs, vocab, model.config(), model.device(), model.dtype())?;
        let (loss, lp) = model.loss(&batch, &mut None)?;
        let (s, t, n) = teacher_forced_hits(&lp, &batch)?;
        nll += loss.to_dtype(DType::F64)?.to_scalar::<f64>()? * n as f64;
        seqs += s;
        toks += t;
        total += n;
    }
    let n = examples.len().max(1) as f64;
    Ok((nll / total.max(1) as f64, seqs as f64 / n, toks as f64 / total.max(1) as f64))
}

/// Trains in place. When validation examples are given, the parameters with
/// the best validation accuracy (latest on ties) are restored at the end.
pub fn train(
    model: &Transformer,
    train_set: &[Example],
    val_set: &[Example],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    metrics: Option<&Path>,
) -> Result<TrainReport> {
    cfg.optimizer.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::Input("empty training set".into()));
    }
    let mut opt = AdamW::new(
        model.params().vars(),
        ParamsAdamW {
            lr: 0.0,
            beta1: cfg.optimizer.beta1,
            beta2: cfg.optimizer.beta2,
            eps: cfg.optimizer.eps,
            weight_decay: 0.0,
        },
    )?;
    let mut writer = match metrics {
        Some(p) => Some(csv::Writer::from_path(p)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut drop_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    drop_rng.set_stream(1);
    let rate = model.config().dropout;
    let d = model.config().d_model;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut cursor = order.len();

    let mut report = TrainReport {
        steps: 0,
        best_step: 0,
        best_val_accuracy: None,
        final_train_accuracy: 0.0,
        reached_target: false,
        batch_losses: vec![],
        rows: vec![],
    };
    let mut best = None;
    let eval_every = cfg.eval_every.max(1);
    for step in 1..=cfg.optimizer.steps {
        if cursor >= order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let end = (cursor + cfg.optimizer.batch_size).min(order.len());
        let refs: Vec<&Example> = order[cursor..end].iter().map(|&k| &train_set[k]).collect();
        cursor = end;
        let batch = Batch::new(&refs, vocab, model.config(), model.device(), model.dtype())?;
        opt.set_learning_rate(cfg.optimizer.learning_rate(step, d));
        let mut drop = Some(Dropout {
            rate,
            rng: &mut drop_rng,
        });
        let (loss, lp) = model.loss(&batch, &mut drop)?;
        let value = loss.to_dtype(DType::F64)?.to_scalar::<f64>()?;
        if !value.is_finite() {
            return Err(ModelError::Divergence { step, loss: value });
        }
        let (seqs, toks, total) = teacher_forced_hits(&lp, &batch)?;
        opt.backward_step(&loss)?;
        report.steps = step;
        report.batch_losses.push(value);
        if let Some(w) = writer.as_mut() {
            w.serialize(MetricRow {
                step,
                split: "batch".into(),
                loss: value,
                accuracy: seqs as f64 / refs.len() as f64,
                token_accuracy: toks as f64 / total.max(1) as f64,
            })?;
        }

        if step % eval_every != 0 && step != cfg.optimizer.steps {
            continue;
        }
        let mut rows = vec![];
        let (l, acc, tok) = evaluate(model, train_set, vocab, cfg.eval_batch_size)?;
        rows.push(MetricRow {
            step,
            split: "train".into(),
            loss: l,
            accuracy: acc,
            token_accuracy: tok,
        });
        report.final_train_accuracy = acc;
        if !val_set.is_empty() {
            let (vl, vacc, vtok) = evaluate(model, val_set, vocab, cfg.eval_batch_size)?;
            rows.push(MetricRow {
                step,
                split: "val".into(),
                loss: vl,
                accuracy: vacc,
                token_accuracy: vtok,
            });
            if report.best_val_accuracy.is_none_or(|b| vacc >= b) {
                report.best_val_accuracy = Some(vacc);
                report.best_step = step;
                best = Some(model.params().snapshot()?);
            }
        } else {
            report.best_step = step;
        }
        for r in &rows {
            info!(step, split = %r.split, loss = r.loss, accuracy = r.accuracy, "eval");
            if let Some(w) = writer.as_mut() {
                w.serialize(r)?;
            }
        }
        if let Some(w) = writer.as_mut() {
            w.flush().map_err(|source| ModelError::Io {
                path: metrics.map(|p| p.display().to_string()).unwrap_or_default(),
                source,
            })?;
        }
        report.rows.extend(rows);
        if cfg.target_train_accuracy.is_some_and(|t| acc >= t) {
            report.reached_target = true;
            break;
        }
    }
    if let Some(b) = best {
        model.params().restore(&b)?;
    }
    Ok(report)
}
