//! Token sequences for the model: one parenthesis-free pre-order stream with
//! tree positions per property, and a flat integer stream for circuits.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aiger::{parse_aiger, AigerError, Circuit};
use crate::datagen::PINS;
use crate::ltl::{Formula, LtlError};
use crate::specs::{RealizabilityStatus, Specification};

pub const PAD: &str = "<pad>";
pub const START: &str = "<start>";
pub const EOS: &str = "<eos>";
pub const NL: &str = "<nl>";
pub const ASSUME: &str = "<assume>";
pub const REAL: &str = "<real>";
pub const UNREAL: &str = "<unreal>";

const SPECIALS: [&str; 7] = [PAD, START, EOS, NL, ASSUME, REAL, UNREAL];
const OPERATORS: [&str; 12] = ["true", "false", "!", "&", "|", "->", "<->", "X", "U", "R", "F", "G"];

#[derive(Debug, Error, PartialEq)]
pub enum TokenizerError {
    #[error("token `{0}` is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("token id {0} is out of range")]
    BadId(u32),
    #[error(transparent)]
    Formula(#[from] LtlError),
    #[error("property `{formula}` has {len} tokens, more than {max}")]
    TooLong { formula: String, len: usize, max: usize },
    #[error("circuit variable index {max_var} exceeds the cap {cap}")]
    VarCap { max_var: u32, cap: u32 },
    #[error("unparseable prediction: {0}")]
    Structure(String),
    #[error("unparseable prediction: {0}")]
    Circuit(#[from] AigerError),
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),
    #[error("specification needs {0} pins but circuits have {PINS}")]
    TooManyPins(usize),
}

/// Dense bidirectional token table with `PAD` at id 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    var_cap: u32,
}

impl Vocabulary {
    /// Special tokens, LTL operators, `atoms`, and integers `0..=2*var_cap+1`.
    pub fn new(atoms: &[String], var_cap: u32) -> Self {
        let mut tokens: Vec<String> = SPECIALS.iter().chain(&OPERATORS).map(|s| s.to_string()).collect();
        tokens.extend(atoms.iter().cloned());
        tokens.extend((0..=2 * var_cap + 1).map(|n| n.to_string()));
        Vocabulary::from_tokens(tokens, var_cap).expect("standard vocabulary is well formed")
    }

    /// Atoms `i0..i4`, `o0..o4` and integers up to 101.
    pub fn standard() -> Self {
        let atoms: Vec<String> = (0..PINS)
            .map(|k| format!("i{k}"))
            .chain((0..PINS).map(|k| format!("o{k}")))
            .collect();
        Vocabulary::new(&atoms, 50)
    }

    fn from_tokens(tokens: Vec<String>, var_cap: u32) -> Result<Self, TokenizerError> {
        if tokens.first().map(String::as_str) != Some(PAD) {
            return Err(TokenizerError::Vocabulary("PAD must have id 0".into()));
        }
        let mut ids = HashMap::new();
        for (k, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), k as u32).is_some() {
                return Err(TokenizerError::Vocabulary(format!("duplicate token `{t}`")));
            }
        }
        for s in SPECIALS {
            if !ids.contains_key(s) {
                return Err(TokenizerError::Vocabulary(format!("missing `{s}`")));
            }
        }
        if let Some(n) = (0..=2 * var_cap + 1).find(|n| !ids.contains_key(&n.to_string())) {
            return Err(TokenizerError::Vocabulary(format!("missing integer {n}")));
        }
        Ok(Vocabulary { tokens, ids, var_cap })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn var_cap(&self) -> u32 {
        self.var_cap
    }

    pub fn id(&self, token: &str) -> Result<u32, TokenizerError> {
        self.ids
            .get(token)
            .copied()
            .ok_or_else(|| TokenizerError::OutOfVocabulary(token.to_string()))
    }

    pub fn token(&self, id: u32) -> Result<&str, TokenizerError> {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .ok_or(TokenizerError::BadId(id))
    }

    pub fn special(&self, token: &str) -> u32 {
        self.ids[token]
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            var_cap: u32,
            tokens: &'a [String],
        }
        serde_json::to_string_pretty(&Doc {
            var_cap: self.var_cap,
            tokens: &self.tokens,
        })
        .expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TokenizerError> {
        #[derive(Deserialize)]
        struct Doc {
            var_cap: u32,
            tokens: Vec<String>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| TokenizerError::Vocabulary(e.to_string()))?;
        Vocabulary::from_tokens(doc.tokens, doc.var_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedProperty {
    /// Padded to the configured length with `PAD`.
    pub ids: Vec<u32>,
    /// One `2 * max_depth` vector per id; zero at padding.
    pub positions: Vec<Vec<u8>>,
    pub len: usize,
    pub assumption: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSpec {
    /// Assumptions first, then guarantees.
    pub properties: Vec<EncodedProperty>,
    pub max_depth: usize,
    pub max_len: usize,
}

pub fn encode_property(
    f: &Formula,
    assumption: bool,
    vocab: &Vocabulary,
    max_depth: usize,
    max_len: usize,
) -> Result<EncodedProperty, TokenizerError> {
    let enc = f.tree_positions(max_depth)?;
    let width = 2 * max_depth;
    let mut ids = Vec::with_capacity(max_len);
    let mut positions = Vec::with_capacity(max_len);
    if assumption {
        ids.push(vocab.special(ASSUME));
        positions.push(vec![0; width]);
    }
    for (t, p) in enc.tokens.iter().zip(enc.positions) {
        ids.push(vocab.id(t)?);
        positions.push(p);
    }
    let len = ids.len();
    if len > max_len {
        return Err(TokenizerError::TooLong {
            formula: f.to_string(),
            len,
            max: max_len,
        });
    }
    ids.resize(max_len, vocab.special(PAD));
    positions.resize(max_len, vec![0; width]);
    Ok(EncodedProperty {
        ids,
        positions,
        len,
        assumption,
    })
}

pub fn encode_spec(
    s: &Specification,
    vocab: &Vocabulary,
    max_depth: usize,
    max_len: usize,
) -> Result<EncodedSpec, TokenizerError> {
    let properties = s
        .assumptions
        .iter()
        .map(|f| (f, true))
        .chain(s.guarantees.iter().map(|f| (f, false)))
        .map(|(f, a)| encode_property(f, a, vocab, max_depth, max_len))
        .collect::<Result<_, _>>()?;
    Ok(EncodedSpec {
        properties,
        max_depth,
        max_len,
    })
}

/// Renames declared inputs to `i0, i1, ...` and outputs to `o0, o1, ...` in
/// declaration order, padding the declarations to the five circuit pins.
pub fn rename_to_pins(s: &Specification) -> Result<(Specification, BTreeMap<String, String>), TokenizerError> {
    let n = s.inputs.len().max(s.outputs.len());
    if n > PINS {
        return Err(TokenizerError::TooManyPins(n));
    }
    let mut map = BTreeMap::new();
    for (k, p) in s.inputs.iter().enumerate() {
        map.insert(p.clone(), format!("i{k}"));
    }
    for (k, p) in s.outputs.iter().enumerate() {
        map.insert(p.clone(), format!("o{k}"));
    }
    let rename = |fs: &[Formula]| -> Result<Vec<Formula>, TokenizerError> {
        fs.iter().map(|f| f.rename(&map).map_err(TokenizerError::from)).collect()
    };
    let renamed = Specification {
        inputs: (0..PINS).map(|k| format!("i{k}")).collect(),
        outputs: (0..PINS).map(|k| format!("o{k}")).collect(),
        assumptions: rename(&s.assumptions)?,
        guarantees: rename(&s.guarantees)?,
    };
    Ok((renamed, map))
}

/// Status token, then the circuit body (no header, no symbols) with lines
/// separated by `NL`, then `EOS`.
pub fn encode_circuit(
    c: &Circuit,
    status: RealizabilityStatus,
    vocab: &Vocabulary,
) -> Result<Vec<u32>, TokenizerError> {
    if c.max_var > vocab.var_cap {
        return Err(TokenizerError::VarCap {
            max_var: c.max_var,
            cap: vocab.var_cap,
        });
    }
    let mut out = vec![match status {
        RealizabilityStatus::Realizable => vocab.special(REAL),
        RealizabilityStatus::Unrealizable => vocab.special(UNREAL),
        RealizabilityStatus::Unknown => {
            return Err(TokenizerError::Structure("no token for unknown status".into()))
        }
    }];
    for (k, line) in c.body_lines().iter().enumerate() {
        if k > 0 {
            out.push(vocab.special(NL));
        }
        for n in line {
            out.push(vocab.id(&n.to_string())?);
        }
    }
    out.push(vocab.special(EOS));
    Ok(out)
}

/// Inverse of [`encode_circuit`] for circuits with `inputs` input and
/// `outputs` output lines. Decoding stops at the first `EOS`.
pub fn decode_circuit(
    ids: &[u32],
    vocab: &Vocabulary,
    inputs: usize,
    outputs: usize,
) -> Result<(RealizabilityStatus, Circuit), TokenizerError> {
    let err = |m: &str| TokenizerError::Structure(m.to_string());
    let (&first, rest) = ids.split_first().ok_or_else(|| err("empty sequence"))?;
    let status = match vocab.token(first)? {
        REAL => RealizabilityStatus::Realizable,
        UNREAL => RealizabilityStatus::Unrealizable,
        t => return Err(err(&format!("expected a status token, found `{t}`"))),
    };
    let mut lines: Vec<Vec<u32>> = vec![vec![]];
    for &id in rest {
        match vocab.token(id)? {
            EOS => break,
            NL => lines.push(vec![]),
            t => {
                let n: u32 = t
                    .parse()
                    .map_err(|_| err(&format!("expected an integer, found `{t}`")))?;
                lines.last_mut().expect("nonempty").push(n);
            }
        }
    }
    if lines.len() == 1 && lines[0].is_empty() && inputs + outputs == 0 {
        lines.clear();
    }
    if lines.iter().any(Vec::is_empty) {
        return Err(err("empty line"));
    }
    if lines.len() < inputs + outputs || lines[..inputs].iter().any(|l| l.len() != 1) {
        return Err(err("missing input lines"));
    }
    let latches = lines[inputs..].iter().take_while(|l| l.len() == 2).count();
    let out_start = inputs + latches;
    let and_start = out_start + outputs;
    if lines.len() < and_start || lines[out_start..and_start].iter().any(|l| l.len() != 1) {
        return Err(err("missing output lines"));
    }
    if lines[and_start..].iter().any(|l| l.len() != 3) {
        return Err(err("malformed AND gate line"));
    }
    let ands = lines.len() - and_start;
    let max_var = lines.iter().flatten().map(|l| l / 2).max().unwrap_or(0);
    let mut text = format!("aag {max_var} {inputs} {latches} {outputs} {ands}\n");
    for l in &lines {
        let parts: Vec<String> = l.iter().map(u32::to_string).collect();
        text.push_str(&parts.join(" "));
        text.push('\n');
    }
    Ok((status, parse_aiger(&text)?))
}

/// Token strings, for display.
pub fn render(ids: &[u32], vocab: &Vocabulary) -> String {
    ids.iter()
        .map(|&i| vocab.token(i).unwrap_or("<?>"))
        .collect::<Vec<_>>()
        .join(" ")
}
