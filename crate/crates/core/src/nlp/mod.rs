//! Token annotations and the parser backend contract.
//!
//! A [`ParserBackend`] turns a sentence into [`TokenAnnotation`]s with
//! universal POS tags and dependency relations in the ClearNLP label set used
//! by common English dependency parsers. [`RuleParser`] is the deterministic
//! built-in backend; production deployments can plug in an external parser by
//! implementing the trait.

pub mod lexicon;
mod rule_parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use rule_parser::RuleParser;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Pos {
    pub fn is_verbal(self) -> bool {
        matches!(self, Pos::Verb | Pos::Aux)
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn | Pos::Pron)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        let s = s.as_ref().and_then(|v| v.as_str()).unwrap_or("X");
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dep {
    #[serde(rename = "ROOT")]
    Root,
    Nsubj,
    Nsubjpass,
    Dobj,
    Dative,
    Attr,
    Acomp,
    Aux,
    Auxpass,
    Neg,
    Agent,
    Prep,
    Pobj,
    Prt,
    Det,
    Poss,
    Case,
    Amod,
    Advmod,
    Npadvmod,
    Nummod,
    Compound,
    Xcomp,
    Ccomp,
    Advcl,
    Mark,
    Cc,
    Conj,
    Intj,
    Punct,
    Dep,
}

impl Dep {
    pub fn is_subject(self) -> bool {
        matches!(self, Dep::Nsubj | Dep::Nsubjpass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAnnotation {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub dep: Dep,
    /// Index of the syntactic head; the root points at itself.
    pub head: usize,
}

/// Sentence segmentation plus dependency parsing.
///
/// Implementations must be deterministic for a fixed [`version`](Self::version).
/// Backends holding mutable model state should be created once per worker or
/// synchronize internally; the trait requires `Sync` so a shared reference can
/// cross threads.
pub trait ParserBackend: Sync {
    fn version(&self) -> String;

    fn split_sentences(&self, text: &str) -> Vec<String>;

    fn parse(&self, sentence: &str) -> Result<Vec<TokenAnnotation>>;
}

/// Checks the structural contract of a parse: heads in range and exactly one
/// root that points at itself.
pub fn validate_parse(tokens: &[TokenAnnotation]) -> bool {
    if tokens.is_empty() {
        return false;
    }
    let mut roots = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.head >= tokens.len() {
            return false;
        }
        if t.dep == Dep::Root {
            roots += 1;
            if t.head != i {
                return false;
            }
        } else if t.head == i {
            return false;
        }
    }
    roots == 1
}

pub fn root_index(tokens: &[TokenAnnotation]) -> Option<usize> {
    tokens.iter().position(|t| t.dep == Dep::Root)
}

pub fn children(tokens: &[TokenAnnotation], head: usize) -> impl Iterator<Item = usize> + '_ {
    tokens
        .iter()
        .enumerate()
        .filter(move |(i, t)| *i != head && t.head == head)
        .map(|(i, _)| i)
}

/// Indices of the subtree rooted at `head`, in sentence order, skipping
/// children attached through any relation in `exclude`.
pub fn subtree(tokens: &[TokenAnnotation], head: usize, exclude: &[Dep]) -> Vec<usize> {
    let mut out = vec![head];
    let mut stack = vec![head];
    while let Some(h) = stack.pop() {
        for c in children(tokens, h) {
            if !exclude.contains(&tokens[c].dep) {
                out.push(c);
                stack.push(c);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn span_text(tokens: &[TokenAnnotation], indices: &[usize]) -> String {
    let mut s = String::new();
    for &i in indices {
        let surf = &tokens[i].surface;
        let attach = s.is_empty()
            || surf.starts_with('\'')
            || surf == "n't"
            || (tokens[i].pos == Pos::Punct && surf != "(" && surf != "\"");
        if !attach {
            s.push(' ');
        }
        s.push_str(surf);
    }
    s
}
