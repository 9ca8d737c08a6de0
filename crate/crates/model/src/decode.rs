use std::cmp::Ordering;

use candle::{DType, Tensor};
use ltlsyn_core::tokenizer::{Vocabulary, EOS, START};

use crate::data::{Batch, Example};
use crate::transformer::Transformer;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Generated ids without the start token; ends with `EOS` when finished.
    pub ids: Vec<u32>,
    /// Sum of token log-probabilities.
    pub score: f64,
    pub finished: bool,
}

/// Index of the largest value, preferring the lowest index among ties.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = k;
        }
    }
    best
}

struct Encoded {
    memory: Tensor,
    mask: Tensor,
}

fn encode(model: &Transformer, example: &Example, vocab: &Vocabulary) -> Result<Encoded> {
    let mut source = example.clone();
    source.target.clear();
    let batch = Batch::new(&[&source], vocab, model.config(), model.device(), model.dtype())?;
    Ok(Encoded {
        memory: model.encode(&batch, &mut None)?,
        mask: batch.global_mask,
    })
}

/// Next-token log-probabilities for each prefix (all prefixes share a length).
fn step(model: &Transformer, enc: &Encoded, prefixes: &[Vec<u32>], vocab: &Vocabulary) -> Result<Vec<Vec<f64>>> {
    let k = prefixes.len();
    let t = prefixes[0].len() + 1;
    let start = vocab.special(START);
    let ids: Vec<u32> = prefixes
        .iter()
        .flat_map(|p| std::iter::once(start).chain(p.iter().copied()))
        .collect();
    let tgt = Tensor::from_vec(ids, (k, t), model.device())?;
    let (_, s, d) = enc.memory.dims3()?;
    let memory = enc.memory.broadcast_as((k, s, d))?.contiguous()?;
    let mask = enc.mask.broadcast_as((k, 1, 1, s))?.contiguous()?;
    let lp = model.decode(&memory, &mask, &tgt, &mut None)?;
    Ok(lp.narrow(1, t - 1, 1)?.squeeze(1)?.to_dtype(DType::F64)?.to_vec2()?)
}

pub fn greedy(model: &Transformer, example: &Example, vocab: &Vocabulary) -> Result<BeamHypothesis> {
    let enc = encode(model, example, vocab)?;
    let eos = vocab.special(EOS);
    let mut ids = vec![];
    let mut score = 0.0;
    while ids.len() < model.config().max_target_len {
        let row = &step(model, &enc, std::slice::from_ref(&ids), vocab)?[0];
        let next = argmax(row);
        score += row[next];
        ids.push(next as u32);
        if next as u32 == eos {
            return Ok(BeamHypothesis { ids, score, finished: true });
        }
    }
    Ok(BeamHypothesis { ids, score, finished: false })
}

/// Beam search without length normalization. Candidates with equal scores are
/// ordered by beam position and then by lower token id. Returns up to `beam`
/// hypotheses, best first.
pub fn beam_search(
    model: &Transformer,
    example: &Example,
    vocab: &Vocabulary,
    beam: usize,
) -> Result<Vec<BeamHypothesis>> {
    let beam = beam.max(1);
    let enc = encode(model, example, vocab)?;
    let eos = vocab.special(EOS);
    let mut alive: Vec<(Vec<u32>, f64)> = vec![(vec![], 0.0)];
    let mut finished: Vec<BeamHypothesis> = vec![];
    for _ in 0..model.config().max_target_len {
        if alive.is_empty() {
            break;
        }
        if finished.len() >= beam && alive.iter().all(|(_, s)| *s <= finished[beam - 1].score) {
            // scores only decrease, so no live hypothesis can enter the top beam
            alive.clear();
            break;
        }
        let prefixes: Vec<Vec<u32>> = alive.iter().map(|(p, _)| p.clone()).collect();
        let rows = step(model, &enc, &prefixes, vocab)?;
        let mut cand: Vec<(f64, usize, usize)> = vec![];
        for (i, row) in rows.iter().enumerate() {
            for (v, &lp) in row.iter().enumerate() {
                cand.push((alive[i].1 + lp, i, v));
            }
        }
        cand.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut next = vec![];
        for &(score, i, v) in cand.iter().take(beam) {
            let mut ids = alive[i].0.clone();
            ids.push(v as u32);
            if v as u32 == eos {
                finished.push(BeamHypothesis { ids, score, finished: true });
            } else {
                next.push((ids, score));
            }
        }
        sort_hyps(&mut finished);
        alive = next;
    }
    finished.extend(alive.into_iter().map(|(ids, score)| BeamHypothesis {
        ids,
        score,
        finished: false,
    }));
    sort_hyps(&mut finished);
    finished.truncate(beam);
    Ok(finished)
}

fn sort_hyps(h: &mut [BeamHypothesis]) {
    h.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
}
