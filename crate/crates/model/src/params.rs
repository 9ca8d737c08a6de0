use candle::{DType, Device, Tensor, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{ModelConfig, ModelError, Result};

pub const CHECKPOINT_FORMAT: &str = "ltlsyn-checkpoint-1";

/// Named trainable tensors in creation order.
#[derive(Debug, Clone)]
pub struct Params {
    entries: Vec<(String, Var)>,
    dtype: DType,
    device: Device,
}

impl Params {
    pub fn new(dtype: DType, device: Device) -> Self {
        Params {
            entries: vec![],
            dtype,
            device,
        }
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    fn add(&mut self, name: String, values: Vec<f64>, shape: &[usize]) -> Result<Var> {
        debug_assert!(self.entries.iter().all(|(n, _)| *n != name), "duplicate {name}");
        let t = Tensor::from_vec(values, shape, &self.device)?.to_dtype(self.dtype)?;
        let v = Var::from_tensor(&t)?;
        self.entries.push((name, v.clone()));
        Ok(v)
    }

    /// Glorot-uniform initialization.
    pub fn glorot(&mut self, name: String, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Var> {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let values = (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect();
        self.add(name, values, &[rows, cols])
    }

    /// Uniform with the given standard deviation.
    pub fn uniform_std(&mut self, name: String, shape: &[usize], std: f64, rng: &mut ChaCha8Rng) -> Result<Var> {
        let limit = std * 3f64.sqrt();
        let n = shape.iter().product();
        let values = (0..n).map(|_| rng.gen_range(-limit..limit)).collect();
        self.add(name, values, shape)
    }

    pub fn constant(&mut self, name: String, len: usize, value: f64) -> Result<Var> {
        self.add(name, vec![value; len], &[len])
    }

    pub fn vars(&self) -> Vec<Var> {
        self.entries.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn named(&self) -> &[(String, Var)] {
        &self.entries
    }

    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|(_, v)| v.elem_count()).sum()
    }

    /// Detached copies of the current values.
    pub fn snapshot(&self) -> Result<Vec<Tensor>> {
        Ok(self
            .entries
            .iter()
            .map(|(_, v)| v.as_tensor().copy())
            .collect::<candle::Result<_>>()?)
    }

    pub fn restore(&self, values: &[Tensor]) -> Result<()> {
        if values.len() != self.entries.len() {
            return Err(ModelError::Checkpoint("parameter count mismatch".into()));
        }
        for ((_, v), t) in self.entries.iter().zip(values) {
            v.set(t)?;
        }
        Ok(())
    }

    pub(crate) fn stored(&self) -> Result<Vec<StoredTensor>> {
        self.entries
            .iter()
            .map(|(name, v)| {
                let t = v.as_tensor();
                Ok(StoredTensor {
                    name: name.clone(),
                    shape: t.dims().to_vec(),
                    data: t.flatten_all()?.to_dtype(DType::F64)?.to_vec1()?,
                })
            })
            .collect()
    }

    pub(crate) fn load(&self, stored: &[StoredTensor]) -> Result<()> {
        if stored.len() != self.entries.len() {
            return Err(ModelError::Checkpoint(format!(
                "expected {} tensors, found {}",
                self.entries.len(),
                stored.len()
            )));
        }
        for ((name, v), s) in self.entries.iter().zip(stored) {
            if *name != s.name || v.dims() != s.shape.as_slice() {
                return Err(ModelError::Checkpoint(format!(
                    "tensor `{}` {:?} does not match `{name}` {:?}",
                    s.name,
                    s.shape,
                    v.dims()
                )));
            }
            let t = Tensor::from_vec(s.data.clone(), s.shape.as_slice(), &self.device)?.to_dtype(self.dtype)?;
            v.set(&t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// A trained model together with its vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub config: ModelConfig,
    /// Vocabulary document as produced by `Vocabulary::to_json`.
    pub vocabulary: String,
    pub dtype: String,
    pub tensors: Vec<StoredTensor>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(ModelError::Checkpoint(format!("unknown format `{}`", c.format)));
        }
        c.config.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Checkpoint::from_json(&text)
    }
}

pub(crate) fn dtype_name(d: DType) -> &'static str {
    match d {
        DType::F64 => "f64",
        _ => "f32",
    }
}

pub(crate) fn parse_dtype(s: &str) -> Result<DType> {
    match s {
        "f32" => Ok(DType::F32),
        "f64" => Ok(DType::F64),
        other => Err(ModelError::Checkpoint(format!("unsupported dtype `{other}`"))),
    }
}
