//! Mining assumption and guarantee patterns from a corpus of decomposed
//! specifications, and instantiating them over a fixed proposition universe.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::ltl::{default_role, Formula, LtlError, Role};
use crate::specs::{SpecError, Specification};

pub const MAX_PATTERN_INPUTS: usize = 5;
pub const MAX_PATTERN_OUTPUTS: usize = 5;
pub const MAX_PATTERN_SIZE: usize = 25;

#[derive(Debug, Error)]
pub enum MineError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Spec { path: String, source: SpecError },
    #[error("invalid pattern pool: {0}")]
    Pool(String),
}

/// A formula with atoms renamed to `i0, i1, ...` and `o0, o1, ...` in order
/// of first occurrence, plus the corpus entries it was found in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub formula: Formula,
    pub sources: Vec<String>,
}

impl Pattern {
    pub fn inputs(&self) -> usize {
        self.formula
            .atoms()
            .iter()
            .filter(|a| default_role(a) == Some(Role::Input))
            .count()
    }

    pub fn outputs(&self) -> usize {
        self.formula
            .atoms()
            .iter()
            .filter(|a| default_role(a) == Some(Role::Output))
            .count()
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.formula, Formula::Const(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineStats {
    pub specifications: usize,
    pub assumptions_seen: usize,
    pub guarantees_seen: usize,
    pub filtered: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternPool {
    pub assumptions: Vec<Pattern>,
    pub guarantees: Vec<Pattern>,
    pub stats: MineStats,
    /// Records that duplicates were removed on canonical forms, before any
    /// random instantiation.
    pub dedup: String,
}

impl PatternPool {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pool serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MineError> {
        let pool: PatternPool = serde_json::from_str(text).map_err(|e| MineError::Pool(e.to_string()))?;
        for p in pool.assumptions.iter().chain(&pool.guarantees) {
            if !passes_filter(&p.formula) || canonical(&p.formula, &|a| default_role(a)) != Some(p.formula.clone()) {
                return Err(MineError::Pool(format!("`{}` is not a canonical pattern", p.formula)));
            }
        }
        Ok(pool)
    }

    /// The pool's patterns as a corpus of single-property specifications
    /// over canonical atoms.
    pub fn as_corpus(&self) -> Vec<(String, Specification)> {
        let wrap = |p: &Pattern, assumption: bool| {
            let (f, empty) = (vec![p.formula.clone()], vec![]);
            let (a, g) = if assumption { (f, empty) } else { (empty, f) };
            Specification::new(
                (0..MAX_PATTERN_INPUTS).map(|k| format!("i{k}")).collect(),
                (0..MAX_PATTERN_OUTPUTS).map(|k| format!("o{k}")).collect(),
                a,
                g,
            )
            .expect("canonical pattern")
        };
        let a = self.assumptions.iter().enumerate().map(|(k, p)| (format!("a{k}"), wrap(p, true)));
        let g = self.guarantees.iter().enumerate().map(|(k, p)| (format!("g{k}"), wrap(p, false)));
        a.chain(g).collect()
    }
}

fn passes_filter(f: &Formula) -> bool {
    f.ast_size() <= MAX_PATTERN_SIZE
}

/// Renames atoms to `i<k>`/`o<k>` by first occurrence within each role.
/// `None` if an atom cannot be classified.
fn canonical(f: &Formula, role: &dyn Fn(&str) -> Option<Role>) -> Option<Formula> {
    let mut map = BTreeMap::new();
    let (mut ni, mut no) = (0, 0);
    for a in f.atoms_in_order() {
        if map.contains_key(&a) {
            continue;
        }
        let name = match role(&a)? {
            Role::Input => {
                ni += 1;
                format!("i{}", ni - 1)
            }
            Role::Output => {
                no += 1;
                format!("o{}", no - 1)
            }
        };
        map.insert(a, name);
    }
    f.rename(&map).ok()
}

/// Collects every assumption and guarantee that has at most five distinct
/// inputs, five distinct outputs and at most 25 syntax-tree nodes, and
/// deduplicates them on canonical form.
pub fn mine_patterns(corpus: &[(String, Specification)]) -> PatternPool {
    let mut pool = PatternPool {
        dedup: "canonical-before-instantiation".into(),
        ..PatternPool::default()
    };
    let mut index: [HashMap<Formula, usize>; 2] = [HashMap::new(), HashMap::new()];
    for (id, spec) in corpus {
        pool.stats.specifications += 1;
        let role = |a: &str| {
            if spec.inputs.iter().any(|p| p == a) {
                Some(Role::Input)
            } else if spec.outputs.iter().any(|p| p == a) {
                Some(Role::Output)
            } else {
                None
            }
        };
        for (kind, formulas) in [(0, &spec.assumptions), (1, &spec.guarantees)] {
            for f in formulas {
                if kind == 0 {
                    pool.stats.assumptions_seen += 1;
                } else {
                    pool.stats.guarantees_seen += 1;
                }
                let (ins, outs) = match f.propositions_with(|a| role(a).ok_or_else(|| LtlError::Unclassified(a.to_string()))) {
                    Ok(p) => p,
                    Err(_) => {
                        pool.stats.filtered += 1;
                        continue;
                    }
                };
                if ins.len() > MAX_PATTERN_INPUTS || outs.len() > MAX_PATTERN_OUTPUTS || !passes_filter(f) {
                    pool.stats.filtered += 1;
                    continue;
                }
                let c = canonical(f, &role).expect("classified atoms");
                let list = if kind == 0 {
                    &mut pool.assumptions
                } else {
                    &mut pool.guarantees
                };
                match index[kind].get(&c) {
                    Some(&k) => {
                        pool.stats.duplicates += 1;
                        if !list[k].sources.contains(id) {
                            list[k].sources.push(id.clone());
                        }
                    }
                    None => {
                        index[kind].insert(c.clone(), list.len());
                        list.push(Pattern {
                            formula: c,
                            sources: vec![id.clone()],
                        });
                    }
                }
            }
        }
    }
    info!(
        assumptions = pool.assumptions.len(),
        guarantees = pool.guarantees.len(),
        filtered = pool.stats.filtered,
        duplicates = pool.stats.duplicates,
        "mined patterns"
    );
    pool
}

/// Reads every `*.json` specification under `dir` (sorted by file name).
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, Specification)>, MineError> {
    let io = |e| MineError::Io {
        path: dir.display().to_string(),
        source: e,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|e| MineError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            let spec = Specification::from_json(&text).map_err(|e| MineError::Spec {
                path: p.display().to_string(),
                source: e,
            })?;
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((id, spec))
        })
        .collect()
}

/// Maps the pattern's distinct inputs injectively and uniformly at random
/// onto `inputs`, and likewise its outputs onto `outputs`.
pub fn instantiate<R: Rng>(p: &Pattern, rng: &mut R, inputs: &[String], outputs: &[String]) -> Formula {
    let ni = p.inputs();
    let no = p.outputs();
    assert!(ni <= inputs.len() && no <= outputs.len(), "universe too small for `{}`", p.formula);
    let mut map = BTreeMap::new();
    for (k, target) in inputs.choose_multiple(rng, ni).enumerate() {
        map.insert(format!("i{k}"), target.clone());
    }
    for (k, target) in outputs.choose_multiple(rng, no).enumerate() {
        map.insert(format!("o{k}"), target.clone());
    }
    p.formula.rename(&map).expect("canonical atoms are mapped")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::names;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn listing() -> Specification {
        Specification::from_json(crate::specs::tests::LISTING).unwrap()
    }

    fn pattern(text: &str) -> Pattern {
        Pattern {
            formula: text.parse().unwrap(),
            sources: vec![],
        }
    }

    #[test]
    fn mines_listing() {
        let pool = mine_patterns(&[("arbiter".into(), listing())]);
        assert_eq!(pool.assumptions.len(), 1);
        assert_eq!(pool.assumptions[0].formula.to_string(), "(G (F (! (i0))))");
        assert_eq!(pool.guarantees.len(), 4);
        assert!(pool.guarantees[0].is_trivial());
        assert_eq!(
            pool.guarantees[3].formula,
            "G(i0 -> X(!o0 U o1))".parse::<Formula>().unwrap()
        );
        assert_eq!(pool.guarantees[3].sources, ["arbiter"]);
    }

    #[test]
    fn filter_boundaries() {
        let outs = names("o", 1);
        let big_ok: Formula = "G(o0 & o0 & o0 & o0 & o0 & o0 & o0 & o0 & o0 & o0 & o0 & o0)".parse().unwrap();
        assert_eq!(big_ok.ast_size(), 24);
        let size25 = Formula::not(big_ok.clone());
        let size26 = Formula::not(Formula::not(big_ok));
        assert_eq!(size26.ast_size(), 26);
        let six: Formula = "G(i0 | i1 | i2 | i3 | i4 | i5)".parse().unwrap();
        let spec = Specification::new(names("i", 6), outs, vec![], vec![size25, size26, six]).unwrap();
        let pool = mine_patterns(&[("x".into(), spec)]);
        assert_eq!(pool.guarantees.len(), 1);
        assert_eq!(pool.guarantees[0].formula.ast_size(), 25);
        assert_eq!(pool.stats.filtered, 2);
    }

    #[test]
    fn dedup_is_idempotent() {
        let spec = Specification::new(
            vec!["r".into(), "q".into()],
            vec!["g".into()],
            vec![],
            vec!["G(r -> F g)".parse().unwrap(), "G(q -> F g)".parse().unwrap()],
        )
        .unwrap();
        let pool = mine_patterns(&[("a".into(), spec.clone()), ("b".into(), listing())]);
        // G(r -> F g), G(q -> F g) and the arbiter's G(r_0 -> F g_0) coincide
        assert_eq!(pool.stats.duplicates, 2);
        assert_eq!(pool.guarantees[0].sources, ["a", "b"]);
        let again = mine_patterns(&pool.as_corpus());
        assert_eq!(again.assumptions.len(), pool.assumptions.len());
        assert_eq!(again.guarantees.len(), pool.guarantees.len());
        assert_eq!(PatternPool::from_json(&pool.to_json()).unwrap(), pool);
    }

    #[test]
    fn instantiation_is_injective_and_seeded() {
        let p = pattern("G((i0 & i1 & i2) -> (o0 | o1))");
        let (ins, outs) = (names("i", 5), names("o", 5));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = instantiate(&p, &mut rng, &ins, &outs);
            let (i, o) = f.propositions().unwrap();
            assert_eq!((i.len(), o.len()), (3, 2));
        }
        let one = pattern("G F i0");
        let a = instantiate(&one, &mut ChaCha8Rng::seed_from_u64(9), &ins, &outs);
        let b = instantiate(&one, &mut ChaCha8Rng::seed_from_u64(9), &ins, &outs);
        assert_eq!(a, b);
    }
}
