//! Decomposed specifications (inputs, outputs, assumptions, guarantees) and
//! their BoSy-style JSON document format.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Formula, LtlError};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid specification document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("formula `{text}`: {source}")]
    Formula { text: String, source: LtlError },
    #[error("unsupported semantics `{0}`; only `mealy` is accepted")]
    Semantics(String),
    #[error("proposition `{0}` is declared both as input and output")]
    Overlap(String),
    #[error("proposition `{0}` is declared more than once")]
    Duplicate(String),
    #[error("atom `{0}` is not a declared input or output")]
    UndeclaredAtom(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizabilityStatus {
    Realizable,
    Unrealizable,
    Unknown,
}

impl fmt::Display for RealizabilityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RealizabilityStatus::Realizable => "REALIZABLE",
            RealizabilityStatus::Unrealizable => "UNREALIZABLE",
            RealizabilityStatus::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Specification {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub assumptions: Vec<Formula>,
    pub guarantees: Vec<Formula>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    semantics: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    assumptions: Vec<String>,
    guarantees: Vec<String>,
}

impl Specification {
    /// Builds and validates a specification.
    pub fn new(
        inputs: Vec<String>,
        outputs: Vec<String>,
        assumptions: Vec<Formula>,
        guarantees: Vec<Formula>,
    ) -> Result<Self, SpecError> {
        let s = Specification {
            inputs,
            outputs,
            assumptions,
            guarantees,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = BTreeSet::new();
        for p in &self.inputs {
            if !seen.insert(p.as_str()) {
                return Err(SpecError::Duplicate(p.clone()));
            }
        }
        let inputs = seen.clone();
        for p in &self.outputs {
            if inputs.contains(p.as_str()) {
                return Err(SpecError::Overlap(p.clone()));
            }
            if !seen.insert(p.as_str()) {
                return Err(SpecError::Duplicate(p.clone()));
            }
        }
        for f in self.assumptions.iter().chain(&self.guarantees) {
            if let Some(a) = f.atoms().into_iter().find(|a| !seen.contains(a.as_str())) {
                return Err(SpecError::UndeclaredAtom(a));
            }
        }
        Ok(())
    }

    /// `(∧ assumptions) → (∧ guarantees)`, or just the guarantee conjunction
    /// when there are no assumptions.
    pub fn to_formula(&self) -> Formula {
        let g = Formula::conjunction(self.guarantees.iter().cloned());
        if self.assumptions.is_empty() {
            g
        } else {
            Formula::implies(Formula::conjunction(self.assumptions.iter().cloned()), g)
        }
    }

    /// Inputs followed by outputs.
    pub fn universe(&self) -> Vec<String> {
        self.inputs.iter().chain(&self.outputs).cloned().collect()
    }

    /// The declared inputs and outputs that actually occur in a formula.
    pub fn occurring(&self) -> (Vec<String>, Vec<String>) {
        let atoms: BTreeSet<String> = self
            .assumptions
            .iter()
            .chain(&self.guarantees)
            .flat_map(|f| f.atoms())
            .collect();
        let keep = |v: &[String]| v.iter().filter(|p| atoms.contains(*p)).cloned().collect();
        (keep(&self.inputs), keep(&self.outputs))
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Specification::from_document(serde_json::from_str(text)?)
    }

    fn from_document(doc: Document) -> Result<Self, SpecError> {
        if doc.semantics != "mealy" {
            return Err(SpecError::Semantics(doc.semantics));
        }
        let parse = |v: Vec<String>| -> Result<Vec<Formula>, SpecError> {
            v.into_iter()
                .map(|text| {
                    text.parse()
                        .map_err(|source| SpecError::Formula { text, source })
                })
                .collect()
        };
        Specification::new(
            doc.inputs,
            doc.outputs,
            parse(doc.assumptions)?,
            parse(doc.guarantees)?,
        )
    }

    /// Pretty-printed JSON with formulas in canonical print form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document()).expect("specification serializes")
    }

    fn document(&self) -> Document {
        Document {
            semantics: "mealy".into(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            assumptions: self.assumptions.iter().map(|f| f.to_string()).collect(),
            guarantees: self.guarantees.iter().map(|f| f.to_string()).collect(),
        }
    }
}

impl Serialize for Specification {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.document().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Specification {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let doc = Document::deserialize(de)?;
        Specification::from_document(doc).map_err(serde::de::Error::custom)
    }
}

pub fn read_spec(text: &str) -> Result<Specification, SpecError> {
    Specification::from_json(text)
}

pub fn write_spec(s: &Specification) -> String {
    s.to_json()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const LISTING: &str = r#"{
  "semantics": "mealy",
  "inputs": [
    "r_m",
    "r_0"
  ],
  "outputs": [
    "g_m",
    "g_0"
  ],
  "assumptions": [
    "(G (F (! (r_m))))"
  ],
  "guarantees": [
    "(true)",
    "(G ((! (g_m)) || (! (g_0))))",
    "(G ((r_0) -> (F (g_0))))",
    "(G ((r_m) -> (X ((! (g_0)) U (g_m)))))"
  ]
}"#;

    #[test]
    fn reads_listing() {
        let s = read_spec(LISTING).unwrap();
        assert_eq!(s.inputs, ["r_m", "r_0"]);
        assert_eq!(s.outputs, ["g_m", "g_0"]);
        assert_eq!(s.assumptions.len(), 1);
        assert_eq!(s.guarantees.len(), 4);
        assert_eq!(s.guarantees[0], Formula::Const(true));
        assert_eq!(write_spec(&s), LISTING);
        assert_eq!(read_spec(&write_spec(&s)).unwrap(), s);
    }

    #[test]
    fn assembles_formula() {
        let s = read_spec(LISTING).unwrap();
        let expected: Formula = "(G F !r_m) -> (true & (G(!g_m | !g_0) & (G(r_0 -> F g_0) & G(r_m -> X(!g_0 U g_m)))))"
            .parse()
            .unwrap();
        assert_eq!(s.to_formula(), expected);

        let only_g = Specification::new(vec![], vec!["a".into()], vec![], vec!["G a".parse().unwrap()]).unwrap();
        assert_eq!(only_g.to_formula().to_string(), "(G (a))");
        let empty = Specification::new(vec![], vec![], vec![], vec![]).unwrap();
        assert_eq!(empty.to_formula(), Formula::Const(true));
    }

    #[test]
    fn minimal_document() {
        let s = read_spec(
            r#"{"semantics":"mealy","inputs":[],"outputs":["o0"],"assumptions":[],"guarantees":["(G (o0))"]}"#,
        )
        .unwrap();
        assert_eq!(s.outputs, ["o0"]);
        assert_eq!(s.occurring(), (vec![], vec!["o0".to_string()]));
    }

    #[test]
    fn rejects_bad_documents() {
        let base = |sem: &str, ins: &str, g: &str| {
            format!(r#"{{"semantics":"{sem}","inputs":{ins},"outputs":["o0"],"assumptions":[],"guarantees":["{g}"]}}"#)
        };
        assert!(matches!(read_spec(&base("moore", "[]", "o0")), Err(SpecError::Semantics(_))));
        assert!(matches!(read_spec(&base("mealy", "[\"o0\"]", "o0")), Err(SpecError::Overlap(_))));
        assert!(matches!(read_spec(&base("mealy", "[]", "x1")), Err(SpecError::UndeclaredAtom(a)) if a == "x1"));
        assert!(matches!(read_spec(&base("mealy", "[]", "G (")), Err(SpecError::Formula { .. })));
        assert!(matches!(
            read_spec(r#"{"semantics":"mealy","inputs":[],"outputs":[],"assumptions":[]}"#),
            Err(SpecError::Json(_))
        ));
    }
}
