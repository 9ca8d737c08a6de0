//! Central finite-difference check of the analytic gradients.

use candle::{DType, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Batch, Example};
use crate::transformer::Transformer;
use crate::{ModelConfig, ModelError, Result};

const PAD: u32 = 0;
const START: u32 = 1;

/// One local, one global and one decoder layer of width 8 over 16 token ids.
pub fn miniature() -> ModelConfig {
    ModelConfig {
        d_model: 8,
        d_ff: 16,
        local_layers: 1,
        global_layers: 1,
        decoder_layers: 1,
        heads: 2,
        vocab_size: 16,
        max_properties: 4,
        max_property_len: 8,
        max_target_len: 8,
        dropout: 0.0,
        tree_depth: 3,
    }
}

/// Random examples whose ids avoid the pad and start ids.
pub fn synthetic_examples(cfg: &ModelConfig, count: usize, rng: &mut ChaCha8Rng) -> Vec<Example> {
    let id = |rng: &mut ChaCha8Rng| rng.gen_range(2..cfg.vocab_size as u32);
    (0..count)
        .map(|_| {
            let props = rng.gen_range(1..=cfg.max_properties.min(3));
            let mut properties = vec![];
            let mut positions = vec![];
            for _ in 0..props {
                let len = rng.gen_range(1..=cfg.max_property_len.min(5));
                properties.push((0..len).map(|_| id(rng)).collect());
                positions.push(
                    (0..len)
                        .map(|_| (0..2 * cfg.tree_depth).map(|_| rng.gen_range(0..2u8)).collect())
                        .collect(),
                );
            }
            let t = rng.gen_range(2..=cfg.max_target_len.min(5));
            Example {
                properties,
                positions,
                target: (0..t).map(|_| id(rng)).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub tensors: usize,
    pub coordinates: usize,
    /// Largest `‖a − n‖ / max(‖a‖, ‖n‖)` over parameter tensors, with `a` the
    /// analytic and `n` the numeric gradient of the tensor. Tensors whose
    /// gradient norm is below `1e-7` count as near-zero instead.
    pub max_tensor_relative_error: f64,
    pub worst_tensor: String,
    /// Largest per-coordinate `|a − n| / max(|a|, |n|)` over coordinates where
    /// either estimate exceeds `1e-7`.
    pub max_relative_error: f64,
    pub worst: String,
    /// Over the remaining near-zero coordinates and tensors.
    pub max_absolute_error_near_zero: f64,
}

/// Compares the backpropagated gradient of the loss on `examples` with
/// `(L(θ + h) − L(θ − h)) / 2h` for every coordinate of every parameter.
/// The model must use double precision.
pub fn check_gradients(model: &Transformer, examples: &[Example], h: f64) -> Result<GradientReport> {
    if model.dtype() != DType::F64 {
        return Err(ModelError::Config("gradient check requires f64 parameters".into()));
    }
    let refs: Vec<&Example> = examples.iter().collect();
    let batch = Batch::with_specials(&refs, PAD, START, model.config(), model.device(), DType::F64)?;
    let loss = |m: &Transformer| -> Result<f64> { Ok(m.loss(&batch, &mut None)?.0.to_scalar::<f64>()?) };
    let grads = model.loss(&batch, &mut None)?.0.backward()?;
    let mut report = GradientReport {
        tensors: 0,
        coordinates: 0,
        max_tensor_relative_error: 0.0,
        worst_tensor: String::new(),
        max_relative_error: 0.0,
        worst: String::new(),
        max_absolute_error_near_zero: 0.0,
    };
    for (name, var) in model.params().named() {
        let analytic: Vec<f64> = match grads.get(var) {
            Some(g) => g.flatten_all()?.to_vec1()?,
            None => vec![0.0; var.elem_count()],
        };
        let base: Vec<f64> = var.as_tensor().flatten_all()?.to_vec1()?;
        let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
        let set = |values: Vec<f64>| -> Result<()> {
            Ok(var.set(&Tensor::from_vec(values, var.shape(), model.device())?)?)
        };
        for k in 0..base.len() {
            let mut p = base.clone();
            p[k] = base[k] + h;
            set(p.clone())?;
            let up = loss(model)?;
            p[k] = base[k] - h;
            set(p)?;
            let down = loss(model)?;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[k];
            diff2 += (a - numeric).powi(2);
            a2 += a * a;
            n2 += numeric * numeric;
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-7 {
                let rel = (a - numeric).abs() / scale;
                if rel > report.max_relative_error {
                    report.max_relative_error = rel;
                    report.worst = format!("{name}[{k}]: analytic {a:e}, numeric {numeric:e}");
                }
            } else {
                report.max_absolute_error_near_zero = report.max_absolute_error_near_zero.max((a - numeric).abs());
            }
            report.coordinates += 1;
        }
        set(base)?;
        // attention key biases have identically zero gradient
        let scale = a2.sqrt().max(n2.sqrt());
        let rel = if scale > 1e-7 { diff2.sqrt() / scale } else { 0.0 };
        if scale <= 1e-7 {
            report.max_absolute_error_near_zero = report.max_absolute_error_near_zero.max(diff2.sqrt());
        }
        if rel > report.max_tensor_relative_error {
            report.max_tensor_relative_error = rel;
            report.worst_tensor = name.clone();
        }
        report.tensors += 1;
    }
    Ok(report)
}
