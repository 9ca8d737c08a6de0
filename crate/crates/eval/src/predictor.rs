use ltlsyn_core::specs::Specification;
use ltlsyn_core::tokenizer::Vocabulary;
use ltlsyn_model::{beam_search, greedy, Example, Transformer};

use crate::Result;

/// Produces up to `beam` token sequences (status token, circuit body, `EOS`)
/// for a specification, best first.
pub trait Predictor: Sync {
    fn vocabulary(&self) -> &Vocabulary;
    fn predict(&self, spec: &Specification, beam: usize) -> Result<Vec<Vec<u32>>>;
}

pub struct ModelPredictor {
    pub model: Transformer,
    pub vocab: Vocabulary,
}

impl Predictor for ModelPredictor {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict(&self, spec: &Specification, beam: usize) -> Result<Vec<Vec<u32>>> {
        let ex = Example::from_spec(spec, &self.vocab, self.model.config())?;
        if beam <= 1 {
            return Ok(vec![greedy(&self.model, &ex, &self.vocab)?.ids]);
        }
        Ok(beam_search(&self.model, &ex, &self.vocab, beam)?
            .into_iter()
            .map(|h| h.ids)
            .collect())
    }
}
