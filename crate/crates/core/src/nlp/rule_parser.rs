//! Deterministic rule-based English tagger and dependency parser.
//!
//! The parser is a chunker followed by clause-level attachment rules:
//! tokens are tagged from closed-class lists plus a verb lexicon with
//! contextual disambiguation, grouped into noun phrases, verb groups and
//! adjective phrases, split into clauses at subordinators, coordinators and
//! bare complement clauses, and finally attached with ClearNLP-style labels.
//! It covers the short declarative sentences typical of personal narratives
//! and commonsense event snippets; it is not a general-purpose parser.

use std::sync::OnceLock;

use regex::Regex;

use super::lexicon::{self as lx, VerbForm};
use super::{Dep, ParserBackend, Pos, TokenAnnotation};
use crate::error::{Error, Result};

const VERSION: &str = "rule-parser/1.0";

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "vs", "etc", "e.g", "i.e", "jr", "sr", "prof", "approx",
];

#[derive(Debug, Default, Clone, Copy)]
pub struct RuleParser;

impl RuleParser {
    pub fn new() -> Self {
        RuleParser
    }
}

impl ParserBackend for RuleParser {
    fn version(&self) -> String {
        VERSION.to_string()
    }

    fn split_sentences(&self, text: &str) -> Vec<String> {
        split_sentences(text)
    }

    fn parse(&self, sentence: &str) -> Result<Vec<TokenAnnotation>> {
        let tokens = tokenize(sentence);
        if tokens.is_empty() {
            return Err(Error::Parse("empty sentence".into()));
        }
        let tagged = tag(&tokens);
        Ok(attach(tagged))
    }
}

pub(crate) fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for para in text.lines() {
        let chars: Vec<(usize, char)> = para.char_indices().collect();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let (_, c) = chars[i];
            if matches!(c, '.' | '!' | '?') {
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | '’' | '”') {
                    j += 1;
                }
                let at_end = j >= chars.len();
                let followed_by_space = !at_end && chars[j].1.is_whitespace();
                if at_end || followed_by_space {
                    let mut k = j;
                    while k < chars.len() && chars[k].1.is_whitespace() {
                        k += 1;
                    }
                    let next_ok = k >= chars.len() || {
                        let n = chars[k].1;
                        n.is_uppercase() || n.is_ascii_digit() || matches!(n, '"' | '\'' | '(' | '“')
                    };
                    let end_byte = if at_end { para.len() } else { chars[j].0 };
                    let before = &para[chars.get(start).map_or(para.len(), |x| x.0)..chars[i].0];
                    let last_word = before
                        .rsplit(|ch: char| ch.is_whitespace())
                        .next()
                        .unwrap_or("")
                        .to_lowercase();
                    let is_abbrev = c == '.' && ABBREVIATIONS.contains(&last_word.as_str());
                    if next_ok && !is_abbrev {
                        let s = para[chars.get(start).map_or(para.len(), |x| x.0)..end_byte].trim();
                        if !s.is_empty() {
                            out.push(s.to_string());
                        }
                        start = k;
                        i = k;
                        continue;
                    }
                }
                i = j;
                continue;
            }
            i += 1;
        }
        if start < chars.len() {
            let s = para[chars[start].0..].trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
        }
    }
    out
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"___+|[\p{L}\p{N}]+(?:-[\p{L}\p{N}]+)*(?:['’][\p{L}]+)?|\S").unwrap()
    })
}

pub(crate) fn tokenize(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    for m in token_regex().find_iter(sentence) {
        let tok = m.as_str().replace('’', "'");
        let lower = tok.to_lowercase();
        if lower == "cannot" {
            out.push(tok[..3].to_string());
            out.push(tok[3..].to_string());
            continue;
        }
        if lower.ends_with("n't") && lower.len() > 3 {
            let base = &tok[..tok.len() - 3];
            let base = match lower.as_str() {
                "can't" => &tok[..2],
                "won't" => &tok[..2],
                "shan't" => &tok[..3],
                _ => base,
            };
            out.push(base.to_string());
            out.push("n't".to_string());
            continue;
        }
        if let Some(pos) = tok.find('\'') {
            let suffix = &lower[pos..];
            if pos > 0 && matches!(suffix, "'m" | "'re" | "'ve" | "'ll" | "'d" | "'s") {
                out.push(tok[..pos].to_string());
                out.push(suffix.to_string());
                continue;
            }
        }
        out.push(tok);
    }
    out
}

#[derive(Debug, Clone)]
struct Tagged {
    surface: String,
    lower: String,
    pos: Pos,
    lemma: String,
    form: Option<VerbForm>,
}

impl Tagged {
    fn is_neg(&self) -> bool {
        lx::NEGATION_WORDS.contains(&self.lower.as_str())
    }
}

fn is_punct(tok: &str) -> bool {
    !tok.chars().any(|c| c.is_alphanumeric() || c == '_')
}

fn is_capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_uppercase())
}

/// Lexical category guess without context, used for lookahead.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Punct,
    Pron,
    Det,
    Aux,
    Verb(VerbForm),
    Adj,
    Adv,
    Adp,
    Noun,
    Other,
}

fn shape(tokens: &[String], i: usize) -> Shape {
    let Some(tok) = tokens.get(i) else {
        return Shape::Punct;
    };
    let w = tok.to_lowercase();
    let w = w.as_str();
    if is_punct(w) {
        return Shape::Punct;
    }
    if lx::BE_FORMS.contains(&w) || lx::MODALS.contains(&w) || lx::HAVE_FORMS.contains(&w) || lx::DO_FORMS.contains(&w) {
        return Shape::Aux;
    }
    if matches!(w, "i" | "you" | "he" | "she" | "it" | "we" | "they" | "someone" | "everyone" | "nobody" | "somebody") {
        return Shape::Pron;
    }
    if lx::POSSESSIVE_DETERMINERS.contains(&w) || lx::DETERMINERS.contains(&w) {
        return Shape::Det;
    }
    if lx::PRONOUNS.contains(&w) {
        return Shape::Pron;
    }
    if lx::is_adjective(w) {
        return Shape::Adj;
    }
    if let Some((_, f)) = lx::analyze_verb(w) {
        return Shape::Verb(f);
    }
    if lx::is_listed_adverb(w) || lx::NEGATION_WORDS.contains(&w) {
        return Shape::Adv;
    }
    if lx::PREPOSITIONS.contains(&w) {
        return Shape::Adp;
    }
    if lx::COORDINATORS.contains(&w) || lx::SUBORDINATORS.contains(&w) {
        return Shape::Other;
    }
    Shape::Noun
}

fn next_content(tokens: &[String], i: usize) -> usize {
    let mut j = i + 1;
    while j < tokens.len() {
        let w = tokens[j].to_lowercase();
        if lx::is_listed_adverb(&w) || lx::NEGATION_WORDS.contains(&w.as_str()) {
            j += 1;
        } else {
            break;
        }
    }
    j
}

fn verb_ahead(tokens: &[String], i: usize, limit: usize) -> bool {
    for j in i + 1..(i + 1 + limit).min(tokens.len()) {
        match shape(tokens, j) {
            Shape::Punct => return false,
            Shape::Aux => return true,
            Shape::Verb(VerbForm::Past) | Shape::Verb(VerbForm::Present3) => return true,
            _ => {}
        }
    }
    false
}

fn tag(tokens: &[String]) -> Vec<Tagged> {
    let n = tokens.len();
    let mut out: Vec<Tagged> = Vec::with_capacity(n);
    for i in 0..n {
        let surface = tokens[i].clone();
        let lower = surface.to_lowercase();
        let w = lower.as_str();
        let prev: Option<&Tagged> = out.iter().rev().find(|t| t.pos != Pos::Adv && !t.is_neg());
        let prev_any = out.last();
        let sentence_start = out.iter().all(|t| t.pos == Pos::Punct);
        let next_shape = shape(tokens, i + 1);

        let mut form = None;
        let (pos, lemma): (Pos, String) = if surface.starts_with("___") {
            (Pos::Noun, surface.clone())
        } else if is_punct(w) {
            (Pos::Punct, surface.clone())
        } else if w == "n't" || w == "not" {
            (Pos::Part, "not".into())
        } else if w == "never" {
            (Pos::Adv, "never".into())
        } else if w == "'s" {
            let after_pron = prev_any.is_some_and(|p| {
                matches!(p.lower.as_str(), "he" | "she" | "it" | "that" | "there" | "what" | "who" | "here" | "everyone" | "nobody" | "someone")
            });
            if after_pron {
                (Pos::Aux, "be".into())
            } else {
                (Pos::Part, "'s".into())
            }
        } else if lx::BE_FORMS.contains(&w) || lx::MODALS.contains(&w) {
            (Pos::Aux, lx::aux_lemma(w).unwrap().to_string())
        } else if lx::HAVE_FORMS.contains(&w) {
            let j = next_content(tokens, i);
            let aux = matches!(shape(tokens, j), Shape::Verb(VerbForm::Past) | Shape::Verb(VerbForm::PastParticiple))
                || tokens.get(j).is_some_and(|t| t.eq_ignore_ascii_case("been"));
            (if aux { Pos::Aux } else { Pos::Verb }, "have".into())
        } else if lx::DO_FORMS.contains(&w) {
            let j = next_content(tokens, i);
            let aux = j > i + 1
                || matches!(shape(tokens, j), Shape::Verb(VerbForm::Base) | Shape::Pron)
                || tokens.get(j).is_some_and(|t| t == "n't");
            (if aux { Pos::Aux } else { Pos::Verb }, "do".into())
        } else if w == "to" {
            let inf = matches!(next_shape, Shape::Verb(VerbForm::Base))
                || tokens.get(i + 1).is_some_and(|t| lx::BE_FORMS.contains(&t.to_lowercase().as_str()) && t.eq_ignore_ascii_case("be"));
            (if inf { Pos::Part } else { Pos::Adp }, "to".into())
        } else if w == "that" {
            let p = match next_shape {
                Shape::Punct | Shape::Aux | Shape::Verb(_) => Pos::Pron,
                Shape::Pron | Shape::Det => Pos::Sconj,
                Shape::Noun if tokens.get(i + 1).is_some_and(|t| is_capitalized(t)) => Pos::Sconj,
                _ => Pos::Det,
            };
            (p, "that".into())
        } else if w == "her" || w == "his" {
            let det = matches!(next_shape, Shape::Adj | Shape::Noun)
                || tokens.get(i + 1).is_some_and(|t| lx::is_number(&t.to_lowercase()));
            (if det { Pos::Det } else { Pos::Pron }, w.to_string())
        } else if w == "no" {
            let det = matches!(next_shape, Shape::Adj | Shape::Noun | Shape::Verb(_));
            (if det { Pos::Det } else { Pos::Intj }, "no".into())
        } else if w == "so" {
            if matches!(next_shape, Shape::Adj | Shape::Adv) {
                (Pos::Adv, "so".into())
            } else {
                (Pos::Cconj, "so".into())
            }
        } else if w == "because" && tokens.get(i + 1).is_some_and(|t| t.eq_ignore_ascii_case("of")) {
            (Pos::Adp, "because".into())
        } else if matches!(w, "as" | "since" | "after" | "before" | "until" | "once" | "where") {
            if verb_ahead(tokens, i, 4) {
                (Pos::Sconj, w.to_string())
            } else if w == "once" || w == "where" {
                (Pos::Adv, w.to_string())
            } else {
                (Pos::Adp, w.to_string())
            }
        } else if w == "like" {
            let verbal = prev.is_some_and(|p| matches!(p.pos, Pos::Pron | Pos::Aux | Pos::Part | Pos::Noun | Pos::Propn));
            if verbal {
                form = Some(VerbForm::Base);
                (Pos::Verb, "like".into())
            } else {
                (Pos::Adp, "like".into())
            }
        } else if lx::PRONOUNS.contains(&w) && w != "one" {
            (Pos::Pron, w.to_string())
        } else if lx::POSSESSIVE_DETERMINERS.contains(&w) || lx::DETERMINERS.contains(&w) {
            (Pos::Det, w.to_string())
        } else if lx::COORDINATORS.contains(&w) {
            (Pos::Cconj, w.to_string())
        } else if lx::SUBORDINATORS.contains(&w) {
            (Pos::Sconj, w.to_string())
        } else if lx::PREPOSITIONS.contains(&w) {
            (Pos::Adp, w.to_string())
        } else if lx::INTERJECTIONS.contains(&w) && (w != "well" || sentence_start) && w != "please" {
            (Pos::Intj, w.to_string())
        } else if lx::is_number(w) {
            (Pos::Num, w.to_string())
        } else if let Some((vlemma, vform)) = lx::analyze_verb(w) {
            let adj = lx::is_adjective(w);
            let noun_reading = matches!(vform, VerbForm::Base | VerbForm::Present3);
            let verbal = resolve_verb_reading(prev, sentence_start, vform, adj, noun_reading, tokens, i);
            if verbal {
                form = Some(vform);
                (Pos::Verb, vlemma)
            } else if adj {
                (Pos::Adj, w.to_string())
            } else if !sentence_start && is_capitalized(&surface) {
                (Pos::Propn, surface.clone())
            } else {
                (Pos::Noun, lx::noun_lemma(w))
            }
        } else if lx::is_adjective(w) {
            (Pos::Adj, w.to_string())
        } else if lx::is_listed_adverb(w) || (w.len() > 4 && w.ends_with("ly") && !lx::is_person_noun(w)) {
            (Pos::Adv, w.to_string())
        } else if is_capitalized(&surface) && (!sentence_start || !lx::is_person_noun(w)) {
            (Pos::Propn, surface.clone())
        } else if (w.ends_with("ed") || w.ends_with("ing")) && w.len() > 4
            && prev.is_some_and(|p| matches!(p.pos, Pos::Pron | Pos::Propn | Pos::Aux))
            && !(w.ends_with("ing") && prev.is_some_and(|p| p.pos == Pos::Det))
        {
            let (l, f) = lx::guess_verb_lemma(w);
            form = Some(f);
            (Pos::Verb, l)
        } else {
            (Pos::Noun, lx::noun_lemma(w))
        };
        out.push(Tagged { surface, lower, pos, lemma, form });
    }
    passive_get(&mut out);
    out
}

fn resolve_verb_reading(
    prev: Option<&Tagged>,
    sentence_start: bool,
    form: VerbForm,
    adj: bool,
    noun_reading: bool,
    tokens: &[String],
    i: usize,
) -> bool {
    let next_is_by = tokens.get(i + 1).is_some_and(|t| t.eq_ignore_ascii_case("by"));
    let Some(p) = prev else {
        return !adj || matches!(form, VerbForm::Gerund);
    };
    if sentence_start {
        return !adj;
    }
    match p.pos {
        Pos::Det | Pos::Adj | Pos::Num => false,
        Pos::Part if p.lower == "'s" => false,
        Pos::Part => true,
        Pos::Aux => {
            if p.lemma == "be" {
                match form {
                    VerbForm::Gerund => true,
                    VerbForm::Past | VerbForm::PastParticiple => !adj || next_is_by,
                    _ => !adj && !noun_reading,
                }
            } else {
                true
            }
        }
        Pos::Pron | Pos::Propn => form != VerbForm::Gerund || !noun_reading,
        Pos::Noun => form != VerbForm::Gerund,
        Pos::Verb => match form {
            VerbForm::Gerund => true,
            VerbForm::Past | VerbForm::PastParticiple => {
                if p.lemma == "get" {
                    true
                } else {
                    !adj
                }
            }
            _ => !noun_reading,
        },
        Pos::Adp => form == VerbForm::Gerund || !noun_reading,
        Pos::Cconj | Pos::Sconj | Pos::Punct | Pos::Intj => !adj,
        _ => !noun_reading,
    }
}

/// "got engaged": `get` directly followed by a past form is a passive
/// auxiliary.
fn passive_get(tags: &mut [Tagged]) {
    for i in 0..tags.len().saturating_sub(1) {
        if tags[i].pos == Pos::Verb
            && tags[i].lemma == "get"
            && tags[i + 1].pos == Pos::Verb
            && matches!(tags[i + 1].form, Some(VerbForm::Past) | Some(VerbForm::PastParticiple))
        {
            tags[i].pos = Pos::Aux;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum UnitKind {
    Np,
    Vg,
    Adjp,
    Adv,
    Adp,
    Cconj,
    Sconj,
    Punct,
    Other,
}

#[derive(Debug, Clone)]
struct Unit {
    kind: UnitKind,
    head: usize,
    passive: bool,
    copular: bool,
    infinitival: bool,
}

impl Unit {
    fn simple(kind: UnitKind, i: usize) -> Self {
        Unit {
            kind,
            head: i,
            passive: false,
            copular: false,
            infinitival: false,
        }
    }
}

struct Builder {
    tags: Vec<Tagged>,
    heads: Vec<Option<usize>>,
    deps: Vec<Dep>,
}

impl Builder {
    fn set(&mut self, tok: usize, head: usize, dep: Dep) {
        if tok != head {
            self.heads[tok] = Some(head);
            self.deps[tok] = dep;
        }
    }
}

fn is_adv_like(t: &Tagged) -> bool {
    t.pos == Pos::Adv || (t.pos == Pos::Part && t.is_neg())
}

fn chunk(b: &mut Builder) -> Vec<Unit> {
    let n = b.tags.len();
    let mut units = Vec::new();
    let mut i = 0;
    while i < n {
        let t = &b.tags[i];
        // verb group: (adv|neg)* (aux|to)* (adv|neg)* verb?
        let mut j = i;
        while j < n && is_adv_like(&b.tags[j]) {
            j += 1;
        }
        let starts_vg = j < n
            && (b.tags[j].pos.is_verbal() || (b.tags[j].pos == Pos::Part && b.tags[j].lower == "to"))
            && (j == i || b.tags[j].pos.is_verbal() || b.tags[j].lower == "to");
        if starts_vg {
            let mut k = j;
            let mut verb = None;
            let mut last_aux = None;
            while k < n {
                let tk = &b.tags[k];
                if tk.pos == Pos::Verb {
                    verb = Some(k);
                    k += 1;
                    break;
                } else if tk.pos == Pos::Aux {
                    last_aux = Some(k);
                    k += 1;
                } else if (tk.pos == Pos::Part && tk.lower == "to") || is_adv_like(tk) {
                    // adverbs only stay in the group if a verbal follows
                    let mut m = k;
                    while m < n && (is_adv_like(&b.tags[m]) || b.tags[m].lower == "to") {
                        m += 1;
                    }
                    if m < n && b.tags[m].pos.is_verbal() {
                        k = m;
                    } else {
                        // trailing negation belongs to the group ("am not")
                        while k < n && b.tags[k].pos == Pos::Part && b.tags[k].is_neg() {
                            k += 1;
                        }
                        break;
                    }
                } else {
                    break;
                }
            }
            let head = verb.or(last_aux);
            if let Some(head) = head {
                let passive = verb.is_some()
                    && matches!(b.tags[head].form, Some(VerbForm::Past) | Some(VerbForm::PastParticiple))
                    && (i..head).any(|x| b.tags[x].pos == Pos::Aux && matches!(b.tags[x].lemma.as_str(), "be" | "get"));
                let infinitival = (i..head).any(|x| b.tags[x].pos == Pos::Part && b.tags[x].lower == "to");
                for x in i..k {
                    if x == head {
                        continue;
                    }
                    let tx = &b.tags[x];
                    let dep = if tx.is_neg() {
                        Dep::Neg
                    } else if tx.pos == Pos::Adv {
                        Dep::Advmod
                    } else if tx.pos == Pos::Aux && passive && matches!(tx.lemma.as_str(), "be" | "get") {
                        Dep::Auxpass
                    } else {
                        Dep::Aux
                    };
                    b.set(x, head, dep);
                }
                units.push(Unit {
                    kind: UnitKind::Vg,
                    head,
                    passive,
                    copular: verb.is_none(),
                    infinitival,
                });
                i = k;
                continue;
            }
        }

        match t.pos {
            Pos::Det | Pos::Pron | Pos::Propn | Pos::Noun | Pos::Num | Pos::Adj | Pos::Adv
                if np_starts(&b.tags, i) =>
            {
                let end = np_end(&b.tags, i);
                let head = attach_np(b, i, end);
                units.push(Unit { head, ..Unit::simple(UnitKind::Np, i) });
                i = end;
            }
            Pos::Adj | Pos::Adv if adjp_at(&b.tags, i).is_some() => {
                let end = adjp_at(&b.tags, i).unwrap();
                let head = end - 1;
                for x in i..head {
                    b.set(x, head, Dep::Advmod);
                }
                units.push(Unit { head, ..Unit::simple(UnitKind::Adjp, i) });
                i = end;
            }
            Pos::Adv | Pos::Part if is_adv_like(t) => {
                units.push(Unit::simple(UnitKind::Adv, i));
                i += 1;
            }
            Pos::Adp => {
                units.push(Unit::simple(UnitKind::Adp, i));
                i += 1;
            }
            Pos::Cconj => {
                units.push(Unit::simple(UnitKind::Cconj, i));
                i += 1;
            }
            Pos::Sconj => {
                units.push(Unit::simple(UnitKind::Sconj, i));
                i += 1;
            }
            Pos::Punct => {
                units.push(Unit::simple(UnitKind::Punct, i));
                i += 1;
            }
            _ => {
                units.push(Unit::simple(UnitKind::Other, i));
                i += 1;
            }
        }
    }
    units
}

fn np_member(t: &Tagged) -> bool {
    matches!(t.pos, Pos::Det | Pos::Adj | Pos::Num | Pos::Noun | Pos::Propn)
        || (t.pos == Pos::Part && t.lower == "'s")
}

fn np_starts(tags: &[Tagged], i: usize) -> bool {
    match tags[i].pos {
        Pos::Pron | Pos::Det | Pos::Noun | Pos::Propn | Pos::Num => true,
        Pos::Adj | Pos::Adv => {
            // (adv)* adj+ followed by a nominal
            let mut j = i;
            while j < tags.len() && tags[j].pos == Pos::Adv {
                j += 1;
            }
            let adj_start = j;
            while j < tags.len() && tags[j].pos == Pos::Adj {
                j += 1;
            }
            j > adj_start && j < tags.len() && matches!(tags[j].pos, Pos::Noun | Pos::Propn | Pos::Num)
        }
        _ => false,
    }
}

fn np_end(tags: &[Tagged], i: usize) -> usize {
    if tags[i].pos == Pos::Pron {
        return i + 1;
    }
    let mut j = i;
    while j < tags.len() {
        let t = &tags[j];
        if np_member(t) {
            // a determiner or adjective after a nominal starts a new phrase
            if j > i && matches!(t.pos, Pos::Det) && tags[j - 1].pos != Pos::Part {
                break;
            }
            if j > i && t.pos == Pos::Adj && matches!(tags[j - 1].pos, Pos::Noun | Pos::Propn) {
                break;
            }
            j += 1;
        } else if t.pos == Pos::Adv && j + 1 < tags.len() && tags[j + 1].pos == Pos::Adj && j > i && tags[j - 1].pos == Pos::Det {
            j += 1;
        } else if t.pos == Pos::Adv && j == i {
            j += 1;
        } else {
            break;
        }
    }
    // trailing adjectives belong to a predicate, not the phrase
    while j > i + 1 && tags[j - 1].pos == Pos::Adj {
        j -= 1;
    }
    if j > i + 1 && tags[j - 1].lower == "'s" {
        j -= 1;
    }
    j.max(i + 1)
}

fn adjp_at(tags: &[Tagged], i: usize) -> Option<usize> {
    let mut j = i;
    while j < tags.len() && tags[j].pos == Pos::Adv {
        j += 1;
    }
    if j < tags.len() && tags[j].pos == Pos::Adj {
        Some(j + 1)
    } else {
        None
    }
}

/// Attaches phrase-internal dependents and returns the phrase head.
fn attach_np(b: &mut Builder, start: usize, end: usize) -> usize {
    // split at possessive markers: [my sister] 's [car]
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut s = start;
    for x in start..end {
        if b.tags[x].lower == "'s" && b.tags[x].pos == Pos::Part {
            pieces.push((s, x));
            s = x + 1;
        }
    }
    pieces.push((s, end));
    let mut prev_head: Option<usize> = None;
    let mut head = start;
    for (ps, pe) in pieces {
        if ps >= pe {
            continue;
        }
        let h = (ps..pe)
            .rev()
            .find(|&x| matches!(b.tags[x].pos, Pos::Noun | Pos::Propn | Pos::Pron | Pos::Num))
            .unwrap_or(pe - 1);
        for x in ps..pe {
            if x == h {
                continue;
            }
            let tx = &b.tags[x];
            let dep = match tx.pos {
                Pos::Det if lx::POSSESSIVE_DETERMINERS.contains(&tx.lower.as_str()) => Dep::Poss,
                Pos::Det => Dep::Det,
                Pos::Adj => Dep::Amod,
                Pos::Num => Dep::Nummod,
                Pos::Adv => {
                    let target = (x + 1..pe).find(|&y| b.tags[y].pos == Pos::Adj).unwrap_or(h);
                    b.set(x, target, Dep::Advmod);
                    continue;
                }
                Pos::Noun | Pos::Propn if x < h => Dep::Compound,
                _ => Dep::Dep,
            };
            b.set(x, h, dep);
        }
        if let Some(ph) = prev_head {
            b.set(ph, h, Dep::Poss);
            // the marker sits right after the previous piece
            if ph + 1 < b.tags.len() && b.tags[ph + 1].lower == "'s" {
                b.set(ph + 1, ph, Dep::Case);
            } else if let Some(m) = (start..ps).rev().find(|&y| b.tags[y].lower == "'s") {
                b.set(m, ph, Dep::Case);
            }
        }
        prev_head = Some(h);
        head = h;
    }
    head
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SegKind {
    Main,
    Sub,
    Conj,
    Comp,
}

#[derive(Debug)]
struct Segment {
    kind: SegKind,
    marker: Option<usize>,
    units: Vec<usize>,
}

fn segment(units: &[Unit], tags: &[Tagged]) -> Vec<Segment> {
    let mut segs = vec![Segment { kind: SegKind::Main, marker: None, units: vec![] }];
    let next_non_adv = |j: usize| -> Option<usize> {
        (j..units.len()).find(|&k| units[k].kind != UnitKind::Adv)
    };
    for (j, u) in units.iter().enumerate() {
        let cur_has_vg = segs.last().unwrap().units.iter().any(|&x| units[x].kind == UnitKind::Vg);
        let all_sub = segs.iter().all(|s| s.kind == SegKind::Sub || s.units.is_empty());
        match u.kind {
            UnitKind::Sconj => {
                segs.push(Segment { kind: SegKind::Sub, marker: Some(j), units: vec![] });
                continue;
            }
            UnitKind::Cconj if cur_has_vg => {
                let n1 = next_non_adv(j + 1);
                let clause = match n1.map(|k| units[k].kind) {
                    Some(UnitKind::Vg) => true,
                    Some(UnitKind::Np) => next_non_adv(n1.unwrap() + 1)
                        .is_some_and(|k| units[k].kind == UnitKind::Vg && !units[k].infinitival),
                    _ => false,
                };
                if clause {
                    segs.push(Segment { kind: SegKind::Conj, marker: Some(j), units: vec![] });
                    continue;
                }
            }
            UnitKind::Np if cur_has_vg => {
                let prev = j.checked_sub(1).map(|p| &units[p]);
                let after_adp = prev.is_some_and(|p| p.kind == UnitKind::Adp);
                let next_vg = next_non_adv(j + 1)
                    .is_some_and(|k| units[k].kind == UnitKind::Vg && !units[k].infinitival);
                if next_vg && !after_adp {
                    let after_comma = prev.is_some_and(|p| p.kind == UnitKind::Punct && tags[p.head].lower == ",");
                    let kind = if after_comma {
                        if all_sub { SegKind::Main } else { SegKind::Conj }
                    } else if prev.is_some_and(|p| p.kind == UnitKind::Cconj) {
                        // handled by the coordinator branch
                        segs.last().unwrap().kind
                    } else {
                        SegKind::Comp
                    };
                    if !(prev.is_some_and(|p| p.kind == UnitKind::Cconj)) {
                        segs.push(Segment { kind, marker: None, units: vec![] });
                    }
                }
            }
            UnitKind::Vg if cur_has_vg && !u.infinitival => {
                // "..., then left": comma-separated verb without a subject
                let prev = j.checked_sub(1).map(|p| &units[p]);
                if prev.is_some_and(|p| p.kind == UnitKind::Punct && tags[p.head].lower == ",") {
                    segs.push(Segment { kind: SegKind::Conj, marker: None, units: vec![] });
                }
            }
            _ => {}
        }
        segs.last_mut().unwrap().units.push(j);
    }
    segs.retain(|s| !s.units.is_empty() || s.marker.is_some());
    segs
}

/// Attaches the units of one clause; returns the clause head.
fn attach_clause(b: &mut Builder, units: &[Unit], seg: &Segment) -> usize {
    let vg_pos = seg.units.iter().position(|&u| units[u].kind == UnitKind::Vg);
    let Some(vg_pos) = vg_pos else {
        // verbless fragment: head is the first nominal or the first content token
        let head_unit = seg
            .units
            .iter()
            .copied()
            .find(|&u| units[u].kind == UnitKind::Np)
            .or_else(|| seg.units.iter().copied().find(|&u| units[u].kind != UnitKind::Punct))
            .unwrap_or(seg.units[0]);
        let head = units[head_unit].head;
        let mut pending_prep: Option<usize> = None;
        for &u in &seg.units {
            let unit = &units[u];
            if unit.head == head {
                continue;
            }
            match unit.kind {
                UnitKind::Adp => {
                    b.set(unit.head, head, Dep::Prep);
                    pending_prep = Some(unit.head);
                }
                UnitKind::Np if pending_prep.is_some() => {
                    b.set(unit.head, pending_prep.take().unwrap(), Dep::Pobj);
                }
                UnitKind::Punct => b.set(unit.head, head, Dep::Punct),
                UnitKind::Adv => {
                    let d = if b.tags[unit.head].is_neg() { Dep::Neg } else { Dep::Advmod };
                    b.set(unit.head, head, d);
                }
                _ => b.set(unit.head, head, Dep::Dep),
            }
        }
        if let Some(m) = seg.marker {
            b.set(units[m].head, head, Dep::Dep);
        }
        return head;
    };

    let main = &units[seg.units[vg_pos]];
    let verb = main.head;
    let mut pending_prep: Option<usize> = None;
    let mut subject: Option<usize> = None;
    let mut pre_nps: Vec<usize> = Vec::new();

    // pre-verbal region
    let pre = &seg.units[..vg_pos];
    let mut k = 0;
    while k < pre.len() {
        let unit = &units[pre[k]];
        match unit.kind {
            UnitKind::Np => {
                if let Some(p) = pending_prep.take() {
                    b.set(unit.head, p, Dep::Pobj);
                } else if k > 0 && units[pre[k - 1]].kind == UnitKind::Cconj && subject.is_some() {
                    let s = subject.unwrap();
                    b.set(unit.head, s, Dep::Conj);
                    b.set(units[pre[k - 1]].head, s, Dep::Cc);
                } else {
                    if let Some(s) = subject {
                        pre_nps.push(s);
                    }
                    subject = Some(unit.head);
                }
            }
            UnitKind::Adp => {
                b.set(unit.head, verb, Dep::Prep);
                pending_prep = Some(unit.head);
            }
            UnitKind::Adv => {
                let d = if b.tags[unit.head].is_neg() { Dep::Neg } else { Dep::Advmod };
                b.set(unit.head, verb, d);
            }
            UnitKind::Punct => b.set(unit.head, verb, Dep::Punct),
            UnitKind::Cconj => {
                let next_np = pre.get(k + 1).is_some_and(|&x| units[x].kind == UnitKind::Np);
                if !(next_np && subject.is_some()) {
                    b.set(unit.head, verb, Dep::Cc);
                }
            }
            UnitKind::Other if b.tags[unit.head].pos == Pos::Intj => b.set(unit.head, verb, Dep::Intj),
            _ => b.set(unit.head, verb, Dep::Dep),
        }
        k += 1;
    }
    if let Some(s) = subject {
        let d = if main.passive { Dep::Nsubjpass } else { Dep::Nsubj };
        b.set(s, verb, d);
    }
    for np in pre_nps {
        b.set(np, verb, Dep::Npadvmod);
    }

    // post-verbal region
    let mut current = verb;
    let mut current_unit = main.clone();
    let mut dobj: Option<usize> = None;
    let mut last_np: Option<usize> = None;
    let mut pending_cc: Option<usize> = None;
    let post = &seg.units[vg_pos + 1..];
    for (idx, &u) in post.iter().enumerate() {
        let unit = &units[u];
        match unit.kind {
            UnitKind::Np => {
                if let Some(p) = pending_prep.take() {
                    b.set(unit.head, p, Dep::Pobj);
                } else if let (Some(cc), Some(prev_np)) = (pending_cc, last_np) {
                    b.set(unit.head, prev_np, Dep::Conj);
                    b.set(cc, prev_np, Dep::Cc);
                    pending_cc = None;
                    continue;
                } else if current_unit.copular && dobj.is_none() {
                    b.set(unit.head, current, Dep::Attr);
                    dobj = Some(unit.head);
                } else if let Some(d) = dobj {
                    if b.deps[d] == Dep::Dobj {
                        b.deps[d] = Dep::Dative;
                    }
                    b.set(unit.head, current, Dep::Dobj);
                    dobj = Some(unit.head);
                } else {
                    b.set(unit.head, current, Dep::Dobj);
                    dobj = Some(unit.head);
                }
                last_np = Some(unit.head);
            }
            UnitKind::Adjp => b.set(unit.head, current, Dep::Acomp),
            UnitKind::Vg => {
                b.set(unit.head, current, Dep::Xcomp);
                current = unit.head;
                current_unit = unit.clone();
                dobj = None;
            }
            UnitKind::Adv => {
                let d = if b.tags[unit.head].is_neg() { Dep::Neg } else { Dep::Advmod };
                b.set(unit.head, current, d);
            }
            UnitKind::Adp => {
                let next_np = post[idx + 1..]
                    .iter()
                    .find(|&&x| units[x].kind != UnitKind::Adv)
                    .is_some_and(|&x| units[x].kind == UnitKind::Np);
                if next_np {
                    let d = if b.tags[unit.head].lower == "by" && current_unit.passive {
                        Dep::Agent
                    } else {
                        Dep::Prep
                    };
                    b.set(unit.head, current, d);
                    pending_prep = Some(unit.head);
                } else {
                    b.set(unit.head, current, Dep::Prt);
                }
            }
            UnitKind::Cconj => {
                let next_np = post.get(idx + 1).is_some_and(|&x| units[x].kind == UnitKind::Np);
                if next_np && last_np.is_some() {
                    pending_cc = Some(unit.head);
                } else {
                    b.set(unit.head, current, Dep::Cc);
                }
            }
            UnitKind::Punct => b.set(unit.head, verb, Dep::Punct),
            UnitKind::Other if b.tags[unit.head].pos == Pos::Intj => b.set(unit.head, current, Dep::Intj),
            _ => b.set(unit.head, current, Dep::Dep),
        }
    }
    if let Some(cc) = pending_cc {
        b.set(cc, current, Dep::Cc);
    }
    if let Some(p) = pending_prep {
        // preposition without an object acts as a particle
        b.deps[p] = Dep::Prt;
    }
    verb
}

fn attach(tags: Vec<Tagged>) -> Vec<TokenAnnotation> {
    let n = tags.len();
    let mut b = Builder { tags, heads: vec![None; n], deps: vec![Dep::Dep; n] };
    let units = chunk(&mut b);
    let segs = segment(&units, &b.tags);

    let mut seg_heads = Vec::with_capacity(segs.len());
    for seg in &segs {
        if seg.units.is_empty() {
            seg_heads.push(None);
            continue;
        }
        seg_heads.push(Some(attach_clause(&mut b, &units, seg)));
    }
    let has_vg = |s: &Segment| s.units.iter().any(|&u| units[u].kind == UnitKind::Vg);
    let root_seg = segs
        .iter()
        .position(|s| s.kind != SegKind::Sub && has_vg(s) && !s.units.is_empty())
        .or_else(|| segs.iter().position(|s| has_vg(s)))
        .or_else(|| segs.iter().position(|s| !s.units.is_empty()));

    let root = match root_seg.and_then(|r| seg_heads[r]) {
        Some(r) => r,
        None => {
            // only markers: root is the first token
            0
        }
    };
    b.heads[root] = Some(root);
    b.deps[root] = Dep::Root;

    for (si, seg) in segs.iter().enumerate() {
        let Some(h) = seg_heads[si] else {
            if let Some(m) = seg.marker {
                if units[m].head != root {
                    b.set(units[m].head, root, Dep::Dep);
                }
            }
            continue;
        };
        if Some(si) != root_seg {
            let prev_head = seg_heads[..si].iter().rev().flatten().next().copied().unwrap_or(root);
            let (gov, dep) = match seg.kind {
                SegKind::Sub => {
                    let m = seg.marker.map(|m| b.tags[units[m].head].lower.clone()).unwrap_or_default();
                    if matches!(m.as_str(), "that" | "whether") && si > 0 {
                        (prev_head, Dep::Ccomp)
                    } else {
                        (root, Dep::Advcl)
                    }
                }
                SegKind::Conj => (if si > 0 { prev_head } else { root }, Dep::Conj),
                SegKind::Comp => (if si > 0 { prev_head } else { root }, Dep::Ccomp),
                SegKind::Main => (root, Dep::Dep),
            };
            if h != gov {
                b.set(h, gov, dep);
            }
        }
        if let Some(m) = seg.marker {
            let mt = units[m].head;
            match seg.kind {
                SegKind::Sub => b.set(mt, h, Dep::Mark),
                _ => {
                    let gov = b.heads[h].filter(|&g| g != h).unwrap_or(h);
                    b.set(mt, gov, Dep::Cc);
                }
            }
        }
    }

    // final punctuation hangs off the root; anything left unattached too
    for i in 0..n {
        if b.heads[i].is_none() {
            let dep = if b.tags[i].pos == Pos::Punct { Dep::Punct } else { Dep::Dep };
            b.heads[i] = Some(root);
            b.deps[i] = dep;
        }
    }
    if n > 0 && b.tags[n - 1].pos == Pos::Punct && n - 1 != root {
        b.heads[n - 1] = Some(root);
    }
    b.tags
        .into_iter()
        .zip(b.heads)
        .zip(b.deps)
        .map(|((t, h), d)| TokenAnnotation {
            surface: t.surface,
            lemma: t.lemma,
            pos: t.pos,
            dep: d,
            head: h.unwrap(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::validate_parse;

    fn parse(s: &str) -> Vec<TokenAnnotation> {
        let toks = RuleParser.parse(s).unwrap();
        assert!(validate_parse(&toks), "invalid parse for {s:?}: {toks:#?}");
        toks
    }

    fn find(toks: &[TokenAnnotation], surface: &str) -> usize {
        toks.iter().position(|t| t.surface == surface).unwrap()
    }

    fn rel(toks: &[TokenAnnotation], surface: &str) -> (Dep, String) {
        let i = find(toks, surface);
        (toks[i].dep, toks[toks[i].head].surface.clone())
    }

    #[test]
    fn tokenizer_splits_clitics() {
        assert_eq!(tokenize("I can't go, she's mad."), vec!["I", "ca", "n't", "go", ",", "she", "'s", "mad", "."]);
        assert_eq!(tokenize("John's car"), vec!["John", "'s", "car"]);
        assert_eq!(tokenize("PersonX abandons the ___ altogether"), vec!["PersonX", "abandons", "the", "___", "altogether"]);
    }

    #[test]
    fn sentence_splitting() {
        let s = split_sentences("I left. She cried! Mr. Smith laughed?\nnew line here");
        assert_eq!(s, vec!["I left.", "She cried!", "Mr. Smith laughed?", "new line here"]);
        assert!(split_sentences("").is_empty());
    }

    #[test]
    fn simple_transitive() {
        let t = parse("I forced her to apologize.");
        assert_eq!(rel(&t, "forced").0, Dep::Root);
        assert_eq!(rel(&t, "I"), (Dep::Nsubj, "forced".into()));
        assert_eq!(rel(&t, "her"), (Dep::Dobj, "forced".into()));
        assert_eq!(rel(&t, "apologize"), (Dep::Xcomp, "forced".into()));
        assert_eq!(rel(&t, "to"), (Dep::Aux, "apologize".into()));
    }

    #[test]
    fn passive_with_agent() {
        let t = parse("He was pushed by John");
        assert_eq!(rel(&t, "pushed").0, Dep::Root);
        assert_eq!(rel(&t, "He"), (Dep::Nsubjpass, "pushed".into()));
        assert_eq!(rel(&t, "was"), (Dep::Auxpass, "pushed".into()));
        assert_eq!(rel(&t, "by"), (Dep::Agent, "pushed".into()));
        assert_eq!(rel(&t, "John"), (Dep::Pobj, "by".into()));
    }

    #[test]
    fn copula_with_negation() {
        let t = parse("I am not happy");
        assert_eq!(rel(&t, "am").0, Dep::Root);
        assert_eq!(rel(&t, "not"), (Dep::Neg, "am".into()));
        assert_eq!(rel(&t, "happy"), (Dep::Acomp, "am".into()));
        assert_eq!(rel(&t, "I"), (Dep::Nsubj, "am".into()));
    }

    #[test]
    fn complement_clause() {
        let t = parse("My mom said I was rude");
        assert_eq!(rel(&t, "said").0, Dep::Root);
        assert_eq!(rel(&t, "mom"), (Dep::Nsubj, "said".into()));
        assert_eq!(rel(&t, "My"), (Dep::Poss, "mom".into()));
        assert_eq!(rel(&t, "was"), (Dep::Ccomp, "said".into()));
        assert_eq!(rel(&t, "I"), (Dep::Nsubj, "was".into()));
        assert_eq!(rel(&t, "rude"), (Dep::Acomp, "was".into()));
    }

    #[test]
    fn noun_phrase_internals() {
        let t = parse("I told my lazy brother");
        assert_eq!(rel(&t, "brother"), (Dep::Dobj, "told".into()));
        assert_eq!(rel(&t, "lazy"), (Dep::Amod, "brother".into()));
        assert_eq!(rel(&t, "my"), (Dep::Poss, "brother".into()));
        let t = parse("I borrowed my sister's car");
        assert_eq!(rel(&t, "sister"), (Dep::Poss, "car".into()));
        assert_eq!(rel(&t, "'s"), (Dep::Case, "sister".into()));
        assert_eq!(rel(&t, "car"), (Dep::Dobj, "borrowed".into()));
    }

    #[test]
    fn never_is_negation() {
        let t = parse("I never lied");
        assert_eq!(rel(&t, "never"), (Dep::Neg, "lied".into()));
        assert_eq!(t[find(&t, "lied")].lemma, "lie");
    }

    #[test]
    fn verbless_fragments() {
        for s in ["In the morning.", "Absolutely not.", "because of her."] {
            let t = parse(s);
            let r = crate::nlp::root_index(&t).unwrap();
            assert!(!t[r].pos.is_verbal(), "{s}: {t:?}");
        }
    }

    #[test]
    fn imperative_has_no_subject() {
        let t = parse("Stop calling me.");
        assert_eq!(rel(&t, "Stop").0, Dep::Root);
        assert!(t.iter().all(|x| !x.dep.is_subject()));
        assert_eq!(rel(&t, "calling"), (Dep::Xcomp, "Stop".into()));
    }

    #[test]
    fn subordinate_and_coordinate_clauses() {
        let t = parse("Because she lied, I left.");
        assert_eq!(rel(&t, "left").0, Dep::Root);
        assert_eq!(rel(&t, "lied"), (Dep::Advcl, "left".into()));
        assert_eq!(rel(&t, "Because"), (Dep::Mark, "lied".into()));
        let t = parse("I called my mom and she yelled at me.");
        assert_eq!(rel(&t, "called").0, Dep::Root);
        assert_eq!(rel(&t, "yelled"), (Dep::Conj, "called".into()));
        assert_eq!(rel(&t, "she"), (Dep::Nsubj, "yelled".into()));
        assert_eq!(rel(&t, "me"), (Dep::Pobj, "at".into()));
    }

    #[test]
    fn event_snippets() {
        let t = parse("PersonX abandons the ___ altogether");
        let v: Vec<_> = t.iter().filter(|x| x.pos == Pos::Verb).map(|x| x.lemma.as_str()).collect();
        assert_eq!(v, vec!["abandon"]);
        let t = parse("PersonX gets engaged");
        let v: Vec<_> = t.iter().filter(|x| x.pos == Pos::Verb).map(|x| x.lemma.as_str()).collect();
        assert_eq!(v, vec!["engage"]);
        let t = parse("we got engaged last June");
        let v: Vec<_> = t.iter().filter(|x| x.pos == Pos::Verb).map(|x| x.lemma.as_str()).collect();
        assert_eq!(v, vec!["engage"]);
    }
}
