//! Linear temporal logic: syntax trees, a parser and canonical printer for
//! the ASCII operator alphabet, structural metrics, tree positional
//! encodings, and evaluation on ultimately periodic words.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default maximum depth for tree positional encodings (vectors of length 64).
pub const DEFAULT_MAX_DEPTH: usize = 32;

/// An LTL formula.
///
/// Atom names follow `[a-zA-Z_][a-zA-Z0-9_]*`; the parser enforces this, the
/// constructors do not.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Const(bool),
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Atom(name.into())
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Self {
        Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Self {
        Iff(Box::new(a), Box::new(b))
    }
    pub fn next(f: Formula) -> Self {
        Next(Box::new(f))
    }
    pub fn until(a: Formula, b: Formula) -> Self {
        Until(Box::new(a), Box::new(b))
    }
    pub fn release(a: Formula, b: Formula) -> Self {
        Release(Box::new(a), Box::new(b))
    }
    pub fn eventually(f: Formula) -> Self {
        Eventually(Box::new(f))
    }
    pub fn globally(f: Formula) -> Self {
        Globally(Box::new(f))
    }

    /// Right-nested conjunction preserving list order; `true` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut items: Vec<Formula> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Const(true);
        };
        while let Some(f) = items.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Const(_) | Atom(_) => vec![],
            Not(a) | Next(a) | Eventually(a) | Globally(a) => vec![a],
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b) | Release(a, b) => {
                vec![a, b]
            }
        }
    }

    /// The token this node contributes to a parenthesis-free pre-order
    /// stream, e.g. `G`, `->`, `true` or the atom name.
    pub fn symbol(&self) -> &str {
        match self {
            Const(true) => "true",
            Const(false) => "false",
            Atom(a) => a,
            Not(_) => "!",
            And(..) => "&",
            Or(..) => "|",
            Implies(..) => "->",
            Iff(..) => "<->",
            Next(_) => "X",
            Until(..) => "U",
            Release(..) => "R",
            Eventually(_) => "F",
            Globally(_) => "G",
        }
    }

    /// Number of syntax-tree nodes.
    pub fn ast_size(&self) -> usize {
        1 + self.children().iter().map(|c| c.ast_size()).sum::<usize>()
    }

    /// Length of the longest root-to-leaf path counted in edges; an atom has
    /// depth 0.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Distinct atoms in order of first pre-order occurrence.
    pub fn atoms_in_order(&self) -> Vec<String> {
        fn walk(f: &Formula, seen: &mut Vec<String>) {
            if let Atom(a) = f {
                if !seen.contains(a) {
                    seen.push(a.clone());
                }
            }
            for c in f.children() {
                walk(c, seen);
            }
        }
        let mut seen = Vec::new();
        walk(self, &mut seen);
        seen
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.atoms_in_order().into_iter().collect()
    }

    /// Pre-order token stream without parentheses.
    pub fn preorder_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk_preorder(&mut |f| out.push(f.symbol().to_string()));
        out
    }

    fn walk_preorder<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk_preorder(visit);
        }
    }

    /// Substitutes atoms through `mapping`, which must cover every atom.
    pub fn rename(&self, mapping: &BTreeMap<String, String>) -> Result<Formula, LtlError> {
        self.try_map_atoms(&mut |a| {
            mapping
                .get(a)
                .cloned()
                .ok_or_else(|| LtlError::MissingMapping(a.to_string()))
        })
    }

    fn try_map_atoms(
        &self,
        map: &mut dyn FnMut(&str) -> Result<String, LtlError>,
    ) -> Result<Formula, LtlError> {
        if let Atom(a) = self {
            return Ok(Atom(map(a)?));
        }
        let mut b = |f: &Formula| f.try_map_atoms(map).map(Box::new);
        Ok(match self {
            Const(v) => Const(*v),
            Atom(_) => unreachable!(),
            Not(a) => Not(b(a)?),
            Next(a) => Next(b(a)?),
            Eventually(a) => Eventually(b(a)?),
            Globally(a) => Globally(b(a)?),
            And(x, y) => And(b(x)?, b(y)?),
            Or(x, y) => Or(b(x)?, b(y)?),
            Implies(x, y) => Implies(b(x)?, b(y)?),
            Iff(x, y) => Iff(b(x)?, b(y)?),
            Until(x, y) => Until(b(x)?, b(y)?),
            Release(x, y) => Release(b(x)?, b(y)?),
        })
    }

    /// Partitions the occurring atoms into inputs and outputs using the
    /// `i<k>` / `o<k>` naming convention.
    pub fn propositions(&self) -> Result<(BTreeSet<String>, BTreeSet<String>), LtlError> {
        self.propositions_with(|a| match default_role(a) {
            Some(r) => Ok(r),
            None => Err(LtlError::Unclassified(a.to_string())),
        })
    }

    /// Like [`Formula::propositions`] with a caller-supplied classifier.
    pub fn propositions_with(
        &self,
        mut classify: impl FnMut(&str) -> Result<Role, LtlError>,
    ) -> Result<(BTreeSet<String>, BTreeSet<String>), LtlError> {
        let mut ins = BTreeSet::new();
        let mut outs = BTreeSet::new();
        for a in self.atoms() {
            match classify(&a)? {
                Role::Input => ins.insert(a),
                Role::Output => outs.insert(a),
            };
        }
        Ok((ins, outs))
    }

    /// Tree positional encoding of every node in pre-order.
    pub fn tree_positions(&self, max_depth: usize) -> Result<TreePosEncoding, LtlError> {
        let depth = self.depth();
        if depth > max_depth {
            return Err(LtlError::TooDeep {
                depth,
                max: max_depth,
                formula: self.to_string(),
            });
        }
        let width = 2 * max_depth;
        let mut tokens = Vec::new();
        let mut positions = Vec::new();
        fn walk(
            f: &Formula,
            pos: Vec<u8>,
            tokens: &mut Vec<String>,
            positions: &mut Vec<Vec<u8>>,
        ) {
            tokens.push(f.symbol().to_string());
            let children = f.children();
            positions.push(pos.clone());
            for (i, c) in children.iter().enumerate() {
                let step: [u8; 2] = if i == 0 { [1, 0] } else { [0, 1] };
                let mut child = Vec::with_capacity(pos.len());
                child.extend_from_slice(&step);
                child.extend_from_slice(&pos[..pos.len() - 2]);
                walk(c, child, tokens, positions);
            }
        }
        if width == 0 {
            // depth 0 with D = 0: a single leaf with an empty vector
            return Ok(TreePosEncoding {
                max_depth,
                tokens: vec![self.symbol().to_string()],
                positions: vec![vec![]],
            });
        }
        walk(self, vec![0; width], &mut tokens, &mut positions);
        Ok(TreePosEncoding {
            max_depth,
            tokens,
            positions,
        })
    }

    /// Whether `word` satisfies the formula.
    pub fn eval_lasso(&self, word: &LassoWord) -> bool {
        let universe: Vec<String> = word.universe().into_iter().collect();
        let compiled = CompiledFormula::new(self, &universe);
        let (letters, loop_start) = word.to_masks(&universe);
        compiled.eval(&letters, loop_start)
    }
}

/// Role of a proposition in a specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
}

/// Classifies `i<k>` as an input and `o<k>` as an output.
pub fn default_role(name: &str) -> Option<Role> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if let Some(rest) = name.strip_prefix('i') {
        if digits(rest) {
            return Some(Role::Input);
        }
    }
    if let Some(rest) = name.strip_prefix('o') {
        if digits(rest) {
            return Some(Role::Output);
        }
    }
    None
}

pub fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
        _ => return false,
    }
    bytes.all(|c| c.is_ascii_alphanumeric() || c == b'_')
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown operator token `{token}` at byte {pos}")]
    UnknownOperator { pos: usize, token: String },
    #[error("no mapping for atom `{0}`")]
    MissingMapping(String),
    #[error("atom `{0}` is neither an input (i<k>) nor an output (o<k>)")]
    Unclassified(String),
    #[error("formula depth {depth} exceeds the maximum {max}: {formula}")]
    TooDeep {
        depth: usize,
        max: usize,
        formula: String,
    },
}

/// Fully parenthesized canonical form, e.g. `(G (F (! (r_m))))`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(v) => write!(f, "({v})"),
            Atom(a) => write!(f, "({a})"),
            Not(a) => write!(f, "(! {a})"),
            Next(a) => write!(f, "(X {a})"),
            Eventually(a) => write!(f, "(F {a})"),
            Globally(a) => write!(f, "(G {a})"),
            And(a, b) => write!(f, "({a} && {b})"),
            Or(a, b) => write!(f, "({a} || {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Iff(a, b) => write!(f, "({a} <-> {b})"),
            Until(a, b) => write!(f, "({a} U {b})"),
            Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = LtlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn print(f: &Formula) -> String {
    f.to_string()
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Until,
    Release,
    Eventually,
    Globally,
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let two = |s: &str| text[i..].starts_with(s);
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'!' => {
                i += 1;
                Tok::Not
            }
            b'&' => {
                i += if two("&&") { 2 } else { 1 };
                Tok::And
            }
            b'|' => {
                i += if two("||") { 2 } else { 1 };
                Tok::Or
            }
            b'-' if two("->") => {
                i += 2;
                Tok::Implies
            }
            b'<' if two("<->") => {
                i += 3;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                match &text[start..i] {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "F" => Tok::Eventually,
                    "G" => Tok::Globally,
                    id => Tok::Ident(id.to_string()),
                }
            }
            _ => {
                let mut end = i + 1;
                while end < bytes.len()
                    && !bytes[end].is_ascii_alphanumeric()
                    && !b" \t\r\n()".contains(&bytes[end])
                {
                    end += 1;
                }
                while !text.is_char_boundary(end) {
                    end += 1;
                }
                return Err(LtlError::UnknownOperator {
                    pos: start,
                    token: text[start..end].to_string(),
                });
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LtlError> {
        Err(LtlError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    // implication / equivalence: loosest, right-associative
    fn implication(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Some(Tok::Implies) => {
                self.at += 1;
                Ok(Formula::implies(lhs, self.implication()?))
            }
            Some(Tok::Iff) => {
                self.at += 1;
                Ok(Formula::iff(lhs, self.implication()?))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.temporal()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            lhs = Formula::and(lhs, self.temporal()?);
        }
        Ok(lhs)
    }

    // U and R, right-associative
    fn temporal(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        match self.peek() {
            Some(Tok::Until) => {
                self.at += 1;
                Ok(Formula::until(lhs, self.temporal()?))
            }
            Some(Tok::Release) => {
                self.at += 1;
                Ok(Formula::release(lhs, self.temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        self.at += 1;
        match tok {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::Next => Ok(Formula::next(self.unary()?)),
            Tok::Eventually => Ok(Formula::eventually(self.unary()?)),
            Tok::Globally => Ok(Formula::globally(self.unary()?)),
            Tok::True => Ok(Const(true)),
            Tok::False => Ok(Const(false)),
            Tok::Ident(name) => Ok(Atom(name)),
            Tok::LParen => {
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(inner)
            }
            other => {
                self.at -= 1;
                self.err(format!("unexpected token {other:?}"))
            }
        }
    }
}

/// Parses an LTL formula over the ASCII alphabet
/// `true false ! & | -> <-> X U R F G` (plus `&&`, `||`) and identifiers.
///
/// Precedence from tightest to loosest: unary operators, `U`/`R`
/// (right-associative), `&`, `|`, `->`/`<->` (right-associative).
pub fn parse(text: &str) -> Result<Formula, LtlError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let f = p.implication()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Tree positional encodings

/// Per-node binary path vectors for a formula in pre-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePosEncoding {
    pub max_depth: usize,
    pub tokens: Vec<String>,
    /// One vector of length `2 * max_depth` per token.
    pub positions: Vec<Vec<u8>>,
}

// ---------------------------------------------------------------------------
// Lasso words and evaluation

/// A letter: the set of propositions that hold.
pub type Letter = BTreeSet<String>;

/// An ultimately periodic word `prefix · period^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoWord {
    pub prefix: Vec<Letter>,
    pub period: Vec<Letter>,
}

impl LassoWord {
    /// Panics if `period` is empty.
    pub fn new(prefix: Vec<Letter>, period: Vec<Letter>) -> Self {
        assert!(!period.is_empty(), "lasso period must be nonempty");
        LassoWord { prefix, period }
    }

    /// Convenience constructor from slices of proposition names.
    pub fn from_names(prefix: &[&[&str]], period: &[&[&str]]) -> Self {
        let conv = |ls: &[&[&str]]| {
            ls.iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        LassoWord::new(conv(prefix), conv(period))
    }

    pub fn letter_at(&self, t: usize) -> &Letter {
        if t < self.prefix.len() {
            &self.prefix[t]
        } else {
            &self.period[(t - self.prefix.len()) % self.period.len()]
        }
    }

    /// The suffix starting one position later.
    pub fn shift(&self) -> LassoWord {
        if self.prefix.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            LassoWord {
                prefix: vec![],
                period,
            }
        } else {
            LassoWord {
                prefix: self.prefix[1..].to_vec(),
                period: self.period.clone(),
            }
        }
    }

    /// All propositions that occur in some letter.
    pub fn universe(&self) -> BTreeSet<String> {
        self.prefix
            .iter()
            .chain(&self.period)
            .flat_map(|l| l.iter().cloned())
            .collect()
    }

    /// Restriction of every letter to `props`.
    pub fn project(&self, props: &BTreeSet<String>) -> LassoWord {
        let p = |l: &Letter| l.intersection(props).cloned().collect();
        LassoWord {
            prefix: self.prefix.iter().map(p).collect(),
            period: self.period.iter().map(p).collect(),
        }
    }

    /// Letters as bit masks over `universe` and the loop-back index.
    /// Propositions outside `universe` are dropped.
    pub fn to_masks(&self, universe: &[String]) -> (Vec<u64>, usize) {
        assert!(universe.len() <= 64, "at most 64 propositions supported");
        let index: HashMap<&str, usize> = universe
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mask = |l: &Letter| {
            l.iter()
                .filter_map(|p| index.get(p.as_str()))
                .fold(0u64, |m, &i| m | (1 << i))
        };
        let letters = self.prefix.iter().chain(&self.period).map(mask).collect();
        (letters, self.prefix.len())
    }

    /// Inverse of [`LassoWord::to_masks`].
    pub fn from_masks(letters: &[u64], loop_start: usize, universe: &[String]) -> Self {
        let letter = |m: u64| -> Letter {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect()
        };
        LassoWord::new(
            letters[..loop_start].iter().map(|&m| letter(m)).collect(),
            letters[loop_start..].iter().map(|&m| letter(m)).collect(),
        )
    }

    /// Whether both words denote the same infinite sequence.
    pub fn same_word(&self, other: &LassoWord) -> bool {
        let horizon = self.prefix.len().max(other.prefix.len())
            + self.period.len() * other.period.len();
        (0..horizon).all(|t| self.letter_at(t) == other.letter_at(t))
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |l: &Letter| format!("{{{}}}", l.iter().cloned().collect::<Vec<_>>().join(","));
        let pre: Vec<String> = self.prefix.iter().map(show).collect();
        let per: Vec<String> = self.period.iter().map(show).collect();
        write!(f, "{} ({})^w", pre.join(" "), per.join(" "))
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Const(bool),
    Prop(Option<u32>),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
    Eventually(usize),
    Globally(usize),
}

/// A formula flattened over an indexed proposition universe, evaluated on
/// lassos given as bit-mask letters.
///
/// Every subformula is evaluated at every position of `prefix · period`; the
/// successor of the last position is the loop start. Until/eventually take a
/// least fixpoint and release/globally a greatest fixpoint over that graph.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    nodes: Vec<Node>,
}

impl CompiledFormula {
    /// Atoms not in `universe` evaluate to false everywhere.
    pub fn new(f: &Formula, universe: &[String]) -> Self {
        let index: HashMap<&str, u32> = universe
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let mut nodes = Vec::new();
        fn build(f: &Formula, index: &HashMap<&str, u32>, nodes: &mut Vec<Node>) -> usize {
            let mut go = |g: &Formula| build(g, index, nodes);
            let node = match f {
                Const(v) => Node::Const(*v),
                Atom(a) => Node::Prop(index.get(a.as_str()).copied()),
                Not(a) => Node::Not(go(a)),
                Next(a) => Node::Next(go(a)),
                Eventually(a) => Node::Eventually(go(a)),
                Globally(a) => Node::Globally(go(a)),
                And(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::And(x, y)
                }
                Or(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::Or(x, y)
                }
                Implies(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::Implies(x, y)
                }
                Iff(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::Iff(x, y)
                }
                Until(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::Until(x, y)
                }
                Release(a, b) => {
                    let (x, y) = (go(a), go(b));
                    Node::Release(x, y)
                }
            };
            nodes.push(node);
            nodes.len() - 1
        }
        build(f, &index, &mut nodes);
        CompiledFormula { nodes }
    }

    /// Truth value at position 0 of the lasso `letters[..loop_start] ·
    /// letters[loop_start..]^ω`.
    pub fn eval(&self, letters: &[u64], loop_start: usize) -> bool {
        let n = letters.len();
        assert!(loop_start < n, "lasso period must be nonempty");
        if n <= 64 {
            self.eval_bits(letters, loop_start)
        } else {
            self.eval_vec(letters, loop_start)
        }
    }

    fn eval_vec(&self, letters: &[u64], loop_start: usize) -> bool {
        let n = letters.len();
        let succ = |t: usize| if t + 1 < n { t + 1 } else { loop_start };
        let mut vals: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v: Vec<bool> = match *node {
                Node::Const(b) => vec![b; n],
                Node::Prop(None) => vec![false; n],
                Node::Prop(Some(i)) => letters.iter().map(|&l| l >> i & 1 == 1).collect(),
                Node::Not(a) => vals[a].iter().map(|x| !x).collect(),
                Node::And(a, b) => zip_with(&vals[a], &vals[b], |x, y| x && y),
                Node::Or(a, b) => zip_with(&vals[a], &vals[b], |x, y| x || y),
                Node::Implies(a, b) => zip_with(&vals[a], &vals[b], |x, y| !x || y),
                Node::Iff(a, b) => zip_with(&vals[a], &vals[b], |x, y| x == y),
                Node::Next(a) => (0..n).map(|t| vals[a][succ(t)]).collect(),
                Node::Until(a, b) => fixpoint(n, false, succ, |t, nx| {
                    vals[b][t] || (vals[a][t] && nx)
                }),
                Node::Eventually(a) => fixpoint(n, false, succ, |t, nx| vals[a][t] || nx),
                Node::Release(a, b) => fixpoint(n, true, succ, |t, nx| {
                    vals[b][t] && (vals[a][t] || nx)
                }),
                Node::Globally(a) => fixpoint(n, true, succ, |t, nx| vals[a][t] && nx),
            };
            vals.push(v);
        }
        vals.last().map(|v| v[0]).unwrap_or(true)
    }

    // Same semantics with one machine word per subformula; bit t is position t.
    fn eval_bits(&self, letters: &[u64], loop_start: usize) -> bool {
        let n = letters.len();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let next = |v: u64| (v >> 1) | ((v >> loop_start & 1) << (n - 1));
        let fix = |init: u64, step: &dyn Fn(u64) -> u64| {
            let mut v = init;
            loop {
                let w = step(next(v));
                if w == v {
                    return v;
                }
                v = w;
            }
        };
        let mut vals: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Const(b) => if b { full } else { 0 },
                Node::Prop(None) => 0,
                Node::Prop(Some(i)) => letters
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (t, &l)| acc | (l >> i & 1) << t),
                Node::Not(a) => !vals[a] & full,
                Node::And(a, b) => vals[a] & vals[b],
                Node::Or(a, b) => vals[a] | vals[b],
                Node::Implies(a, b) => (!vals[a] | vals[b]) & full,
                Node::Iff(a, b) => !(vals[a] ^ vals[b]) & full,
                Node::Next(a) => next(vals[a]),
                Node::Until(a, b) => {
                    let (x, y) = (vals[a], vals[b]);
                    fix(0, &|nx| y | (x & nx))
                }
                Node::Eventually(a) => {
                    let x = vals[a];
                    fix(0, &|nx| x | nx)
                }
                Node::Release(a, b) => {
                    let (x, y) = (vals[a], vals[b]);
                    fix(full, &|nx| y & (x | nx))
                }
                Node::Globally(a) => {
                    let x = vals[a];
                    fix(full, &|nx| x & nx)
                }
            };
            vals.push(v);
        }
        vals.last().map(|v| v & 1 == 1).unwrap_or(true)
    }
}

fn zip_with(a: &[bool], b: &[bool], f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

// Backward sweeps from `init` until stable; two sweeps settle the loop.
fn fixpoint(
    n: usize,
    init: bool,
    succ: impl Fn(usize) -> usize,
    step: impl Fn(usize, bool) -> bool,
) -> Vec<bool> {
    let mut v = vec![init; n];
    loop {
        let mut changed = false;
        for t in (0..n).rev() {
            let new = step(t, v[succ(t)]);
            if new != v[t] {
                v[t] = new;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn parses_listing_style() {
        let f = p("(G (F (! (r_m))))");
        assert_eq!(
            f,
            Formula::globally(Formula::eventually(Formula::not(Formula::atom("r_m"))))
        );
        assert_eq!(p("true"), Const(true));
        assert_eq!(
            p("G (r -> F g)"),
            Formula::globally(Formula::implies(
                Formula::atom("r"),
                Formula::eventually(Formula::atom("g"))
            ))
        );
        let g = p("(G ((r_m) -> (X ((! (g_0)) U (g_m)))))");
        assert_eq!(g.ast_size(), 8);
    }

    #[test]
    fn precedence_table() {
        assert_eq!(p("a | b & c"), p("a | (b & c)"));
        assert_eq!(p("a -> b -> c"), p("a -> (b -> c)"));
        assert_eq!(p("a U b U c"), p("a U (b U c)"));
        assert_eq!(p("!a U b & c"), p("((!a) U b) & c"));
        assert_eq!(p("a & b & c"), p("(a & b) & c"));
        assert_eq!(p("G a R b"), p("(G a) R b"));
        assert_eq!(p("a && b || c"), p("(a & b) | c"));
        assert_eq!(p("a <-> b | c"), p("a <-> (b | c)"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert!(matches!(parse("a & "), Err(LtlError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("(a"), Err(LtlError::Syntax { .. })));
        assert!(matches!(parse("a b"), Err(LtlError::Syntax { pos: 2, .. })));
        assert_eq!(
            parse("a => b"),
            Err(LtlError::UnknownOperator {
                pos: 2,
                token: "=>".into()
            })
        );
        assert!(matches!(parse("a # b"), Err(LtlError::UnknownOperator { pos: 2, .. })));
        assert!(parse("").is_err());
        assert!(parse("X").is_err());
    }

    #[test]
    fn prints_canonically() {
        assert_eq!(Const(true).to_string(), "(true)");
        assert_eq!(
            Formula::globally(Formula::eventually(Formula::not(Formula::atom("r_m")))).to_string(),
            "(G (F (! (r_m))))"
        );
        assert_eq!(
            Formula::until(Formula::atom("a"), Formula::atom("b")).to_string(),
            "((a) U (b))"
        );
        assert_eq!(
            p("G(!g_m | !g_0)").to_string(),
            "(G ((! (g_m)) || (! (g_0))))"
        );
    }

    #[test]
    fn sizes() {
        assert_eq!(Formula::atom("a").ast_size(), 1);
        assert_eq!(p("G F !r_m").ast_size(), 4);
        assert_eq!(p("G(r -> F g)").ast_size(), 5);
        assert_eq!(p("G(r -> F g)").depth(), 3);
    }

    #[test]
    fn proposition_partition() {
        let (i, o) = p("G(i0 -> F o0)").propositions().unwrap();
        assert_eq!(i, ["i0".to_string()].into());
        assert_eq!(o, ["o0".to_string()].into());
        let (i, o) = p("true").propositions().unwrap();
        assert!(i.is_empty() && o.is_empty());
        assert_eq!(
            p("G(r -> F o1)").propositions(),
            Err(LtlError::Unclassified("r".into()))
        );
        let (i, o) = p("G(r -> F g)")
            .propositions_with(|a| Ok(if a == "r" { Role::Input } else { Role::Output }))
            .unwrap();
        assert!(i.contains("r") && o.contains("g"));
        // five-pin guarantees only use i0..i4 / o0..o4
        let g = p("G((o1) -> (X ((i1) R (((i1) -> (o2)) & ((! (i1)) -> (o0))))))");
        let (i, o) = g.propositions().unwrap();
        assert!(i.iter().all(|a| default_role(a) == Some(Role::Input)));
        assert_eq!(o.len(), 3);
        assert_eq!(default_role("io"), None);
        assert_eq!(default_role("i"), None);
    }

    #[test]
    fn renaming() {
        let m: BTreeMap<String, String> = [("r_m".to_string(), "i0".to_string())].into();
        assert_eq!(p("G F r_m").rename(&m).unwrap(), p("G F i0"));
        let m: BTreeMap<String, String> = [("r", "i2"), ("g", "o0")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(p("G(r -> F g)").rename(&m).unwrap(), p("G(i2 -> F o0)"));
        let f = p("a U (b R !a)");
        let id: BTreeMap<String, String> = f.atoms().into_iter().map(|a| (a.clone(), a)).collect();
        assert_eq!(f.rename(&id).unwrap(), f);
        assert_eq!(
            p("a & b").rename(&[("a".to_string(), "x".to_string())].into()),
            Err(LtlError::MissingMapping("b".into()))
        );
    }

    #[test]
    fn response_formula_positions() {
        let enc = p("G (r -> F g)").tree_positions(3).unwrap();
        assert_eq!(enc.tokens, vec!["G", "->", "r", "F", "g"]);
        assert_eq!(
            enc.positions,
            vec![
                vec![0, 0, 0, 0, 0, 0],
                vec![1, 0, 0, 0, 0, 0],
                vec![1, 0, 1, 0, 0, 0],
                vec![0, 1, 1, 0, 0, 0],
                vec![1, 0, 0, 1, 1, 0],
            ]
        );
        assert!(matches!(
            p("G (r -> F g)").tree_positions(2),
            Err(LtlError::TooDeep { depth: 3, max: 2, .. })
        ));
    }

    #[test]
    fn lasso_basics() {
        let w = LassoWord::from_names(&[], &[&["a"]]);
        assert!(Const(true).eval_lasso(&w));
        assert!(p("G F a").eval_lasso(&w));
        let w = LassoWord::from_names(&[&["a"], &["a"]], &[&["b"]]);
        assert!(p("a U b").eval_lasso(&w));
        assert!(!p("b").eval_lasso(&w));
        assert!(p("X X b").eval_lasso(&w));
        assert!(p("F G b").eval_lasso(&w));
        let w = LassoWord::from_names(&[&["a"]], &[&[], &["a"]]);
        assert!(p("G F a").eval_lasso(&w));
        assert!(!p("F G a").eval_lasso(&w));
        assert!(p("a R true").eval_lasso(&w));
        assert!(!p("b R a").eval_lasso(&w));
    }

    #[test]
    fn shift_rotates() {
        let w = LassoWord::from_names(&[&["a"]], &[&["b"], &["c"]]);
        let s = w.shift();
        assert_eq!(s.letter_at(0), w.letter_at(1));
        let s2 = s.shift();
        assert_eq!(s2.prefix.len(), 0);
        assert_eq!(s2.letter_at(0), w.letter_at(2));
        assert!(w.same_word(&LassoWord::from_names(&[&["a"], &["b"]], &[&["c"], &["b"]])));
    }

    proptest::proptest! {
        #[test]
        fn word_and_vector_evaluation_agree(
            f in proptest::sample::select(vec![
                "a U (b R !c)", "G F (a <-> X b)", "F G (a -> X X c)", "(a R b) | X (c U !a)", "G (a -> F b) & F !c",
            ]),
            letters in proptest::collection::vec(0u64..8, 1..64),
            start in 0usize..64,
        ) {
            let c = CompiledFormula::new(&p(f), &["a".into(), "b".into(), "c".into()]);
            let start = start % letters.len();
            proptest::prop_assert_eq!(c.eval_bits(&letters, start), c.eval_vec(&letters, start));
        }
    }
}
