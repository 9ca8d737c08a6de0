use serde::{Deserialize, Serialize};

use crate::{ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub d_ff: usize,
    /// Layers applied to each property separately. Zero gives a plain
    /// transformer encoder made of the global layers only.
    pub local_layers: usize,
    pub global_layers: usize,
    pub decoder_layers: usize,
    pub heads: usize,
    pub vocab_size: usize,
    pub max_properties: usize,
    pub max_property_len: usize,
    pub max_target_len: usize,
    pub dropout: f64,
    /// Depth bound of the tree positional encoding; position vectors have
    /// length `2 * tree_depth`.
    pub tree_depth: usize,
}

impl ModelConfig {
    /// 256-wide model with 4 local, 4 global and 8 decoder layers.
    pub fn full_scale(vocab_size: usize) -> Self {
        ModelConfig {
            d_model: 256,
            d_ff: 1024,
            local_layers: 4,
            global_layers: 4,
            decoder_layers: 8,
            heads: 4,
            vocab_size,
            max_properties: 13,
            max_property_len: 32,
            max_target_len: 160,
            dropout: 0.1,
            tree_depth: 12,
        }
    }

    pub fn desk(vocab_size: usize) -> Self {
        ModelConfig {
            d_model: 64,
            d_ff: 128,
            local_layers: 1,
            global_layers: 1,
            decoder_layers: 2,
            heads: 4,
            vocab_size,
            max_properties: 13,
            max_property_len: 32,
            max_target_len: 160,
            dropout: 0.0,
            tree_depth: 12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::Config(m.into()));
        if self.heads == 0 || self.d_model % self.heads != 0 {
            return bad("d_model must be divisible by the number of heads");
        }
        if self.d_model == 0 || self.d_ff == 0 || self.global_layers == 0 || self.decoder_layers == 0 {
            return bad("widths and global/decoder layer counts must be positive");
        }
        if self.vocab_size == 0 || self.max_properties == 0 || self.max_property_len == 0 || self.max_target_len == 0 {
            return bad("vocabulary and length bounds must be positive");
        }
        if self.tree_depth == 0 {
            return bad("tree depth must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub warmup_steps: usize,
    pub batch_size: usize,
    pub steps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-9,
            warmup_steps: 4000,
            batch_size: 256,
            steps: 30_000,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(ModelError::Config("betas must lie in (0, 1)".into()));
        }
        if self.warmup_steps == 0 || self.batch_size == 0 || !(self.eps > 0.0) {
            return Err(ModelError::Config("warmup, batch size and eps must be positive".into()));
        }
        Ok(())
    }

    /// `d^-0.5 * min(step^-0.5, step * warmup^-1.5)`, with steps counted from 1.
    pub fn learning_rate(&self, step: usize, d_model: usize) -> f64 {
        let s = step.max(1) as f64;
        let w = self.warmup_steps as f64;
        (d_model as f64).powf(-0.5) * s.powf(-0.5).min(s * w.powf(-1.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let o = OptimizerConfig::default();
        // independent evaluation of the closed form at the knee and at step 1
        let knee = 1.0 / (256f64.sqrt() * 4000f64.sqrt());
        assert!((o.learning_rate(4000, 256) - knee).abs() < 1e-15);
        assert!((o.learning_rate(4000, 256) - 9.882e-4).abs() < 1e-6);
        let first = 1.0 / 256f64.sqrt() / 4000f64.powf(1.5);
        assert!((o.learning_rate(1, 256) - first).abs() < 1e-18);
        assert!((o.learning_rate(1, 256) - 2.47e-7).abs() < 1e-9);
        // increasing during warmup, decreasing afterwards
        assert!(o.learning_rate(2000, 256) < o.learning_rate(4000, 256));
        assert!(o.learning_rate(8000, 256) < o.learning_rate(4000, 256));
    }

    proptest::proptest! {
        #[test]
        fn schedule_peaks_at_warmup(step in 1usize..200_000, warmup in 1usize..10_000, d in 1usize..1024) {
            let o = OptimizerConfig { warmup_steps: warmup, ..OptimizerConfig::default() };
            let lr = o.learning_rate(step, d);
            proptest::prop_assert!(lr > 0.0);
            proptest::prop_assert!(lr <= o.learning_rate(warmup, d) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn full_scale_config() {
        let c = ModelConfig::full_scale(130);
        c.validate().unwrap();
        assert_eq!((c.d_model, c.d_ff, c.heads), (256, 1024, 4));
        assert_eq!((c.local_layers, c.global_layers, c.decoder_layers), (4, 4, 8));
        OptimizerConfig::default().validate().unwrap();
        assert!(ModelConfig { heads: 3, ..c.clone() }.validate().is_err());
        assert!(OptimizerConfig { beta2: 1.0, ..OptimizerConfig::default() }.validate().is_err());
    }
}
