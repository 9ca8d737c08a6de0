use candle::{DType, Device, Tensor, Var, D};
use candle_nn::ops::{layer_norm_slow, log_softmax, softmax};
use ltlsyn_core::tokenizer::Vocabulary;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Batch, MASKED};
use crate::params::{dtype_name, parse_dtype, Params, CHECKPOINT_FORMAT};
use crate::{Checkpoint, ModelConfig, ModelError, Result};

const LN_EPS: f32 = 1e-6;

/// Dropout driven by a caller-owned generator. `None` means evaluation mode.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

fn dropout(x: Tensor, drop: &mut Option<Dropout>) -> Result<Tensor> {
    let Some(d) = drop else { return Ok(x) };
    if d.rate == 0.0 {
        return Ok(x);
    }
    let keep = 1.0 / (1.0 - d.rate);
    let mask: Vec<f64> = (0..x.elem_count())
        .map(|_| if d.rng.gen::<f64>() < d.rate { 0.0 } else { keep })
        .collect();
    let mask = Tensor::from_vec(mask, x.shape(), x.device())?.to_dtype(x.dtype())?;
    Ok((x * mask)?)
}

struct Linear {
    w: Var,
    b: Option<Var>,
}

impl Linear {
    fn new(p: &mut Params, name: &str, rows: usize, cols: usize, bias: bool, rng: &mut ChaCha8Rng) -> Result<Self> {
        let w = p.glorot(format!("{name}.weight"), rows, cols, rng)?;
        let b = if bias {
            Some(p.constant(format!("{name}.bias"), cols, 0.0)?)
        } else {
            None
        };
        Ok(Linear { w, b })
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let dims = x.dims().to_vec();
        let (rows, cols) = self.w.dims2()?;
        let n = x.elem_count() / rows;
        let y = x.reshape((n, rows))?.matmul(self.w.as_tensor())?;
        let y = match &self.b {
            Some(b) => y.broadcast_add(b.as_tensor())?,
            None => y,
        };
        let mut out = dims;
        *out.last_mut().expect("nonempty shape") = cols;
        Ok(y.reshape(out)?)
    }
}

struct Norm {
    gain: Var,
    bias: Var,
}

impl Norm {
    fn new(p: &mut Params, name: &str, d: usize) -> Result<Self> {
        Ok(Norm {
            gain: p.constant(format!("{name}.gain"), d, 1.0)?,
            bias: p.constant(format!("{name}.bias"), d, 0.0)?,
        })
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(layer_norm_slow(x, self.gain.as_tensor(), self.bias.as_tensor(), LN_EPS)?)
    }
}

struct Attention {
    q: Linear,
    k: Linear,
    v: Linear,
    o: Linear,
    heads: usize,
}

impl Attention {
    fn new(p: &mut Params, name: &str, cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let d = cfg.d_model;
        Ok(Attention {
            q: Linear::new(p, &format!("{name}.q"), d, d, true, rng)?,
            k: Linear::new(p, &format!("{name}.k"), d, d, true, rng)?,
            v: Linear::new(p, &format!("{name}.v"), d, d, true, rng)?,
            o: Linear::new(p, &format!("{name}.o"), d, d, true, rng)?,
            heads: cfg.heads,
        })
    }

    /// `mask` is additive and broadcastable to `(B, heads, Lq, Lk)`.
    fn forward(&self, x: &Tensor, kv: &Tensor, mask: Option<&Tensor>) -> Result<Tensor> {
        let (b, lq, d) = x.dims3()?;
        let lk = kv.dim(1)?;
        let (h, hd) = (self.heads, d / self.heads);
        let split = |t: Tensor, l: usize| -> candle::Result<Tensor> {
            t.reshape((b, l, h, hd))?.transpose(1, 2)?.contiguous()
        };
        let q = split(self.q.forward(x)?, lq)?;
        let k = split(self.k.forward(kv)?, lk)?;
        let v = split(self.v.forward(kv)?, lk)?;
        let scores = (q.matmul(&k.t()?.contiguous()?)? * (1.0 / (hd as f64).sqrt()))?;
        let scores = match mask {
            Some(m) => scores.broadcast_add(m)?,
            None => scores,
        };
        let att = softmax(&scores, D::Minus1)?;
        let out = att.matmul(&v)?.transpose(1, 2)?.reshape((b, lq, d))?;
        self.o.forward(&out)
    }
}

struct FeedForward {
    up: Linear,
    down: Linear,
}

impl FeedForward {
    fn new(p: &mut Params, name: &str, cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(FeedForward {
            up: Linear::new(p, &format!("{name}.up"), cfg.d_model, cfg.d_ff, true, rng)?,
            down: Linear::new(p, &format!("{name}.down"), cfg.d_ff, cfg.d_model, true, rng)?,
        })
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.down.forward(&self.up.forward(x)?.relu()?)
    }
}

struct EncoderLayer {
    attn: Attention,
    norm1: Norm,
    ff: FeedForward,
    norm2: Norm,
}

impl EncoderLayer {
    fn new(p: &mut Params, name: &str, cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(EncoderLayer {
            attn: Attention::new(p, &format!("{name}.attn"), cfg, rng)?,
            norm1: Norm::new(p, &format!("{name}.norm1"), cfg.d_model)?,
            ff: FeedForward::new(p, &format!("{name}.ff"), cfg, rng)?,
            norm2: Norm::new(p, &format!("{name}.norm2"), cfg.d_model)?,
        })
    }

    fn forward(&self, x: &Tensor, mask: &Tensor, drop: &mut Option<Dropout>) -> Result<Tensor> {
        let a = dropout(self.attn.forward(x, x, Some(mask))?, drop)?;
        let x = self.norm1.forward(&(x + a)?)?;
        let f = dropout(self.ff.forward(&x)?, drop)?;
        self.norm2.forward(&(x + f)?)
    }
}

struct DecoderLayer {
    self_attn: Attention,
    norm1: Norm,
    cross_attn: Attention,
    norm2: Norm,
    ff: FeedForward,
    norm3: Norm,
}

impl DecoderLayer {
    fn new(p: &mut Params, name: &str, cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(DecoderLayer {
            self_attn: Attention::new(p, &format!("{name}.self_attn"), cfg, rng)?,
            norm1: Norm::new(p, &format!("{name}.norm1"), cfg.d_model)?,
            cross_attn: Attention::new(p, &format!("{name}.cross_attn"), cfg, rng)?,
            norm2: Norm::new(p, &format!("{name}.norm2"), cfg.d_model)?,
            ff: FeedForward::new(p, &format!("{name}.ff"), cfg, rng)?,
            norm3: Norm::new(p, &format!("{name}.norm3"), cfg.d_model)?,
        })
    }

    fn forward(
        &self,
        y: &Tensor,
        memory: &Tensor,
        causal: &Tensor,
        memory_mask: &Tensor,
        drop: &mut Option<Dropout>,
    ) -> Result<Tensor> {
        let a = dropout(self.self_attn.forward(y, y, Some(causal))?, drop)?;
        let y = self.norm1.forward(&(y + a)?)?;
        let c = dropout(self.cross_attn.forward(&y, memory, Some(memory_mask))?, drop)?;
        let y = self.norm2.forward(&(y + c)?)?;
        let f = dropout(self.ff.forward(&y)?, drop)?;
        self.norm3.forward(&(y + f)?)
    }
}

/// Encoder-decoder transformer whose encoder first runs `local_layers` on
/// each property in isolation and then `global_layers` over all properties.
pub struct Transformer {
    cfg: ModelConfig,
    params: Params,
    source_embed: Var,
    target_embed: Var,
    position: Linear,
    local: Vec<EncoderLayer>,
    global: Vec<EncoderLayer>,
    decoder: Vec<DecoderLayer>,
    out: Linear,
    sinusoid: Tensor,
}

impl Transformer {
    pub fn new(cfg: &ModelConfig, seed: u64, dtype: DType, device: &Device) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Params::new(dtype, device.clone());
        let d = cfg.d_model;
        let std = (d as f64).powf(-0.5);
        let source_embed = p.uniform_std("source_embed".into(), &[cfg.vocab_size, d], std, &mut rng)?;
        let target_embed = p.uniform_std("target_embed".into(), &[cfg.vocab_size, d], std, &mut rng)?;
        let position = Linear::new(&mut p, "tree_position", 2 * cfg.tree_depth, d, false, &mut rng)?;
        let local = (0..cfg.local_layers)
            .map(|k| EncoderLayer::new(&mut p, &format!("local.{k}"), cfg, &mut rng))
            .collect::<Result<_>>()?;
        let global = (0..cfg.global_layers)
            .map(|k| EncoderLayer::new(&mut p, &format!("global.{k}"), cfg, &mut rng))
            .collect::<Result<_>>()?;
        let decoder = (0..cfg.decoder_layers)
            .map(|k| DecoderLayer::new(&mut p, &format!("decoder.{k}"), cfg, &mut rng))
            .collect::<Result<_>>()?;
        // small output weights keep the initial prediction close to uniform
        let out = Linear {
            w: p.uniform_std("out.weight".into(), &[d, cfg.vocab_size], 1.0 / d as f64, &mut rng)?,
            b: Some(p.constant("out.bias".into(), cfg.vocab_size, 0.0)?),
        };
        let sinusoid = sinusoid_table(cfg.max_target_len + 1, d, dtype, device)?;
        Ok(Transformer {
            cfg: cfg.clone(),
            params: p,
            source_embed,
            target_embed,
            position,
            local,
            global,
            decoder,
            out,
            sinusoid,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn dtype(&self) -> DType {
        self.params.dtype()
    }

    pub fn device(&self) -> &Device {
        self.params.device()
    }

    pub fn to_checkpoint(&self, vocab: &Vocabulary) -> Result<Checkpoint> {
        Ok(Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            config: self.cfg.clone(),
            vocabulary: vocab.to_json(),
            dtype: dtype_name(self.dtype()).into(),
            tensors: self.params.stored()?,
        })
    }

    pub fn from_checkpoint(c: &Checkpoint, device: &Device) -> Result<(Self, Vocabulary)> {
        let vocab = Vocabulary::from_json(&c.vocabulary)?;
        if vocab.len() != c.config.vocab_size {
            return Err(ModelError::Checkpoint("vocabulary size does not match the model".into()));
        }
        let m = Transformer::new(&c.config, 0, parse_dtype(&c.dtype)?, device)?;
        m.params.load(&c.tensors)?;
        Ok((m, vocab))
    }

    fn embed_tokens(&self, table: &Var, ids: &Tensor) -> Result<Tensor> {
        let shape = ids.dims().to_vec();
        let flat = ids.flatten_all()?;
        let e = table.as_tensor().index_select(&flat, 0)?;
        let mut out = shape;
        out.push(self.cfg.d_model);
        Ok((e.reshape(out)? * (self.cfg.d_model as f64).sqrt())?)
    }

    /// States after the per-property layers, `(B * P, L, d)`.
    pub fn encode_local(&self, batch: &Batch, drop: &mut Option<Dropout>) -> Result<Tensor> {
        let (b, p, l) = batch.src.dims3()?;
        let d = self.cfg.d_model;
        let tok = self.embed_tokens(&self.source_embed, &batch.src)?.reshape((b * p, l, d))?;
        let pos = self.position.forward(&batch.pos)?.reshape((b * p, l, d))?;
        let mut x = dropout((tok + pos)?, drop)?;
        for layer in &self.local {
            x = layer.forward(&x, &batch.local_mask, drop)?;
        }
        Ok(x)
    }

    /// Encoder output `(B, P * L, d)`.
    pub fn encode(&self, batch: &Batch, drop: &mut Option<Dropout>) -> Result<Tensor> {
        let (b, p, l) = batch.src.dims3()?;
        let mut x = self.encode_local(batch, drop)?.reshape((b, p * l, self.cfg.d_model))?;
        for layer in &self.global {
            x = layer.forward(&x, &batch.global_mask, drop)?;
        }
        Ok(x)
    }

    /// Log-probabilities `(B, T, V)` of the next token at every target position.
    pub fn decode(
        &self,
        memory: &Tensor,
        memory_mask: &Tensor,
        tgt_in: &Tensor,
        drop: &mut Option<Dropout>,
    ) -> Result<Tensor> {
        let t = tgt_in.dim(1)?;
        if t > self.sinusoid.dim(0)? {
            return Err(ModelError::Input(format!("target length {t} exceeds the model bound")));
        }
        let y = self.embed_tokens(&self.target_embed, tgt_in)?.broadcast_add(&self.sinusoid.narrow(0, 0, t)?)?;
        let mut y = dropout(y, drop)?;
        let causal = causal_mask(t, self.dtype(), self.device())?;
        for layer in &self.decoder {
            y = layer.forward(&y, memory, &causal, memory_mask, drop)?;
        }
        Ok(log_softmax(&self.out.forward(&y)?, D::Minus1)?)
    }

    pub fn forward(&self, batch: &Batch, drop: &mut Option<Dropout>) -> Result<Tensor> {
        let tgt_in = batch
            .tgt_in
            .as_ref()
            .ok_or_else(|| ModelError::Input("batch has no targets".into()))?;
        let memory = self.encode(batch, drop)?;
        self.decode(&memory, &batch.global_mask, tgt_in, drop)
    }

    /// Mean token cross-entropy over non-padding targets, with the
    /// log-probabilities it was computed from.
    pub fn loss(&self, batch: &Batch, drop: &mut Option<Dropout>) -> Result<(Tensor, Tensor)> {
        let lp = self.forward(batch, drop)?;
        let (tgt, w) = targets(batch)?;
        let picked = lp.gather(&tgt.unsqueeze(2)?.contiguous()?, 2)?.squeeze(2)?;
        let total = (picked * w)?.sum_all()?;
        let loss = (total.neg()? / w.sum_all()?)?;
        Ok((loss, lp))
    }
}

fn targets(batch: &Batch) -> Result<(&Tensor, &Tensor)> {
    match (&batch.tgt_out, &batch.tgt_weight) {
        (Some(t), Some(w)) => Ok((t, w)),
        _ => Err(ModelError::Input("batch has no targets".into())),
    }
}

/// Count of sequences whose every non-padding target is the argmax, and of
/// correct non-padding tokens, as `(sequences, tokens, total tokens)`.
pub fn teacher_forced_hits(lp: &Tensor, batch: &Batch) -> Result<(usize, usize, usize)> {
    let (tgt, w) = targets(batch)?;
    let pred: Vec<Vec<u32>> = lp.argmax(D::Minus1)?.to_vec2()?;
    let tgt: Vec<Vec<u32>> = tgt.to_vec2()?;
    let w: Vec<Vec<f64>> = w.to_dtype(DType::F64)?.to_vec2()?;
    let (mut seqs, mut toks, mut total) = (0, 0, 0);
    for ((p, t), w) in pred.iter().zip(&tgt).zip(&w) {
        let mut all = true;
        for k in 0..t.len() {
            if w[k] > 0.0 {
                total += 1;
                if p[k] == t[k] {
                    toks += 1;
                } else {
                    all = false;
                }
            }
        }
        seqs += all as usize;
    }
    Ok((seqs, toks, total))
}

fn causal_mask(t: usize, dtype: DType, device: &Device) -> Result<Tensor> {
    let m: Vec<f32> = (0..t * t)
        .map(|k| if k % t > k / t { MASKED as f32 } else { 0.0 })
        .collect();
    Ok(Tensor::from_vec(m, (1, 1, t, t), device)?.to_dtype(dtype)?)
}

fn sinusoid_table(n: usize, d: usize, dtype: DType, device: &Device) -> Result<Tensor> {
    let mut v = vec![0f64; n * d];
    for pos in 0..n {
        for i in 0..d {
            let angle = pos as f64 / 10000f64.powf((2 * (i / 2)) as f64 / d as f64);
            v[pos * d + i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    Ok(Tensor::from_vec(v, (n, d), device)?.to_dtype(dtype)?)
}
