use candle::{DType, Device, Tensor};
use ltlsyn_core::datagen::DatasetSample;
use ltlsyn_core::ltl::Formula;
use ltlsyn_core::specs::Specification;
use ltlsyn_core::tokenizer::{
    encode_circuit, encode_spec, rename_to_pins, Vocabulary, EOS, PAD, START,
};

use crate::{ModelConfig, ModelError, Result};

/// One specification as unpadded per-property token rows, with an optional
/// target sequence (status token, circuit body, `EOS`).
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub properties: Vec<Vec<u32>>,
    /// Per property, one tree position vector per token.
    pub positions: Vec<Vec<Vec<u8>>>,
    pub target: Vec<u32>,
}

impl Example {
    /// Encodes a specification after renaming its propositions to circuit pins.
    pub fn from_spec(spec: &Specification, vocab: &Vocabulary, cfg: &ModelConfig) -> Result<Self> {
        let (mut renamed, _) = rename_to_pins(spec)?;
        if renamed.assumptions.is_empty() && renamed.guarantees.is_empty() {
            renamed.guarantees.push(Formula::Const(true));
        }
        let n = renamed.assumptions.len() + renamed.guarantees.len();
        if n > cfg.max_properties {
            return Err(ModelError::Input(format!(
                "{n} properties, at most {} supported",
                cfg.max_properties
            )));
        }
        let enc = encode_spec(&renamed, vocab, cfg.tree_depth, cfg.max_property_len)?;
        let (properties, positions) = enc
            .properties
            .into_iter()
            .map(|mut p| {
                p.ids.truncate(p.len);
                p.positions.truncate(p.len);
                (p.ids, p.positions)
            })
            .unzip();
        Ok(Example {
            properties,
            positions,
            target: vec![],
        })
    }

    pub fn from_sample(sample: &DatasetSample, vocab: &Vocabulary, cfg: &ModelConfig) -> Result<Self> {
        let mut ex = Example::from_spec(&sample.spec, vocab, cfg)?;
        let target = encode_circuit(&sample.circuit, sample.status, vocab)?;
        if target.len() > cfg.max_target_len {
            return Err(ModelError::Input(format!(
                "target has {} tokens, at most {} supported",
                target.len(),
                cfg.max_target_len
            )));
        }
        ex.target = target;
        Ok(ex)
    }
}

/// Padded tensors for a group of examples. Padding extends to the longest
/// row in the group, not to the configured maximum.
#[derive(Debug, Clone)]
pub struct Batch {
    /// `(B, P, L)` token ids.
    pub src: Tensor,
    /// `(B, P, L, 2 * depth)` tree positions.
    pub pos: Tensor,
    /// Additive key mask `(B * P, 1, 1, L)` for the per-property layers.
    pub local_mask: Tensor,
    /// Additive key mask `(B, 1, 1, P * L)` for the global layers and the
    /// decoder's cross-attention.
    pub global_mask: Tensor,
    /// `(B, T)` decoder inputs: `START` followed by the target without its
    /// last token.
    pub tgt_in: Option<Tensor>,
    /// `(B, T)` target ids.
    pub tgt_out: Option<Tensor>,
    /// `(B, T)` one where the target is not padding.
    pub tgt_weight: Option<Tensor>,
    pub properties: usize,
    pub property_len: usize,
}

pub(crate) const MASKED: f64 = -1e9;

impl Batch {
    pub fn new(
        examples: &[&Example],
        vocab: &Vocabulary,
        cfg: &ModelConfig,
        device: &Device,
        dtype: DType,
    ) -> Result<Self> {
        Batch::with_specials(examples, vocab.special(PAD), vocab.special(START), cfg, device, dtype)
    }

    pub fn with_specials(
        examples: &[&Example],
        pad: u32,
        start: u32,
        cfg: &ModelConfig,
        device: &Device,
        dtype: DType,
    ) -> Result<Self> {
        let b = examples.len();
        if b == 0 {
            return Err(ModelError::Input("empty batch".into()));
        }
        let width = 2 * cfg.tree_depth;
        let p = examples.iter().map(|e| e.properties.len()).max().unwrap_or(0).max(1);
        let l = examples
            .iter()
            .flat_map(|e| e.properties.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
            .max(1);
        let mut src = vec![pad; b * p * l];
        let mut pos = vec![0f32; b * p * l * width];
        let mut local = vec![MASKED; b * p * l];
        for (bi, e) in examples.iter().enumerate() {
            for (pi, (ids, ps)) in e.properties.iter().zip(&e.positions).enumerate() {
                for (ti, (&id, v)) in ids.iter().zip(ps).enumerate() {
                    let k = (bi * p + pi) * l + ti;
                    src[k] = id;
                    local[k] = 0.0;
                    for (j, &x) in v.iter().enumerate() {
                        pos[k * width + j] = x as f32;
                    }
                }
            }
        }
        let global = local.clone();
        let src = Tensor::from_vec(src, (b, p, l), device)?;
        let pos = Tensor::from_vec(pos, (b, p, l, width), device)?.to_dtype(dtype)?;
        let local_mask = Tensor::from_vec(local, (b * p, 1, 1, l), device)?.to_dtype(dtype)?;
        let global_mask = Tensor::from_vec(global, (b, 1, 1, p * l), device)?.to_dtype(dtype)?;

        let mut batch = Batch {
            src,
            pos,
            local_mask,
            global_mask,
            tgt_in: None,
            tgt_out: None,
            tgt_weight: None,
            properties: p,
            property_len: l,
        };
        let t = examples.iter().map(|e| e.target.len()).max().unwrap_or(0);
        if t > 0 {
            let mut tin = vec![pad; b * t];
            let mut tout = vec![pad; b * t];
            let mut w = vec![0f32; b * t];
            for (bi, e) in examples.iter().enumerate() {
                for (ti, &id) in e.target.iter().enumerate() {
                    tin[bi * t + ti] = if ti == 0 { start } else { e.target[ti - 1] };
                    tout[bi * t + ti] = id;
                    w[bi * t + ti] = 1.0;
                }
            }
            batch.tgt_in = Some(Tensor::from_vec(tin, (b, t), device)?);
            batch.tgt_out = Some(Tensor::from_vec(tout, (b, t), device)?);
            batch.tgt_weight = Some(Tensor::from_vec(w, (b, t), device)?.to_dtype(dtype)?);
        }
        Ok(batch)
    }

    pub fn batch_size(&self) -> usize {
        self.src.dims()[0]
    }
}

/// Ids up to and including the first `EOS`.
pub fn until_eos(ids: &[u32], vocab: &Vocabulary) -> Vec<u32> {
    let eos = vocab.special(EOS);
    match ids.iter().position(|&i| i == eos) {
        Some(k) => ids[..=k].to_vec(),
        None => ids.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(gs: &[&str]) -> Specification {
        Specification::new(
            vec!["r".into()],
            vec!["g".into()],
            vec![],
            gs.iter().map(|g| g.parse().unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn renames_and_trims() {
        let v = Vocabulary::standard();
        let cfg = ModelConfig::desk(v.len());
        let e = Example::from_spec(&spec(&["G (r -> F g)"]), &v, &cfg).unwrap();
        let toks: Vec<&str> = e.properties[0].iter().map(|&i| v.token(i).unwrap()).collect();
        assert_eq!(toks, ["G", "->", "i0", "F", "o0"]);
        assert_eq!(e.positions[0].len(), 5);
        assert!(e.positions[0].iter().all(|p| p.len() == 2 * cfg.tree_depth));
    }

    #[test]
    fn batch_masks_and_shift() {
        let v = Vocabulary::standard();
        let cfg = ModelConfig::desk(v.len());
        let mut a = Example::from_spec(&spec(&["G g", "G (r -> F g)"]), &v, &cfg).unwrap();
        let mut b = Example::from_spec(&spec(&["F g"]), &v, &cfg).unwrap();
        a.target = vec![5, 6, 7];
        b.target = vec![8];
        let batch = Batch::new(&[&a, &b], &v, &cfg, &Device::Cpu, DType::F32).unwrap();
        assert_eq!(batch.src.dims(), [2, 2, 5]);
        let m: Vec<f32> = batch.global_mask.flatten_all().unwrap().to_vec1().unwrap();
        let open: Vec<usize> = (0..m.len()).filter(|&k| m[k] == 0.0).collect();
        // a: rows of length 2 and 5; b: one row of length 2
        assert_eq!(open, [0, 1, 5, 6, 7, 8, 9, 10, 11]);
        let tin: Vec<Vec<u32>> = batch.tgt_in.unwrap().to_vec2().unwrap();
        let start = v.special(START);
        let pad = v.special(PAD);
        assert_eq!(tin, [vec![start, 5, 6], vec![start, pad, pad]]);
        let w: Vec<Vec<f32>> = batch.tgt_weight.unwrap().to_vec2().unwrap();
        assert_eq!(w, [vec![1.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]]);
    }
}
