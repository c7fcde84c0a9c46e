//! Sentence instances: splitting posts, text cleaning, event triples and
//! character mentions.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Post;
use crate::error::Result;
use crate::nlp::lexicon::{is_person_noun, FIRST_PERSON_SINGULAR, PERSONAL_PRONOUNS};
use crate::nlp::{children, root_index, span_text, subtree, Dep, ParserBackend, Pos, TokenAnnotation};

pub const CONTRACTIONS: &str = include_str!("../data/contractions.tsv");
pub const STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub post_id: String,
    pub raw_text: String,
    pub clean_text: String,
    #[serde(skip)]
    pub tokens: Vec<TokenAnnotation>,
}

impl Instance {
    /// Re-attaches token annotations after deserialization.
    pub fn reparse(&mut self, parser: &dyn ParserBackend) -> Result<()> {
        self.tokens = parser.parse(&self.raw_text)?;
        Ok(())
    }

    pub fn verb_lemmas(&self) -> BTreeSet<String> {
        self.tokens.iter().filter(|t| t.pos.is_verbal()).map(|t| t.lemma.to_lowercase()).collect()
    }
}

fn has_verbal_root(tokens: &[TokenAnnotation]) -> bool {
    root_index(tokens).is_some_and(|r| tokens[r].pos.is_verbal())
}

/// Full-sentence check: a verbal root plus sentence-final punctuation or at
/// least three tokens.
pub fn is_full_sentence(tokens: &[TokenAnnotation]) -> bool {
    if !has_verbal_root(tokens) {
        return false;
    }
    let ends = tokens.last().is_some_and(|t| matches!(t.surface.as_str(), "." | "!" | "?"));
    ends || tokens.iter().filter(|t| t.pos != Pos::Punct).count() >= 3
}

/// One instance per full sentence of the post body, in document order.
/// Instance ids are `{post_id}-s{k}` with `k` the sentence position.
pub fn split_instances(post: &Post, parser: &dyn ParserBackend, stopwords: &Stopwords) -> Vec<Instance> {
    let mut out = Vec::new();
    for (k, sentence) in parser.split_sentences(&post.body).into_iter().enumerate() {
        let tokens = match parser.parse(&sentence) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("post {}: sentence {k} skipped: {e}", post.id);
                continue;
            }
        };
        if !is_full_sentence(&tokens) {
            continue;
        }
        out.push(Instance {
            id: format!("{}-s{k}", post.id),
            post_id: post.id.clone(),
            clean_text: clean_text(&sentence, stopwords),
            raw_text: sentence,
            tokens,
        });
    }
    out
}

/// Keeps instances with a subject relation and a verbal root.
pub fn filter_instances(instances: Vec<Instance>) -> Vec<Instance> {
    instances
        .into_iter()
        .filter(|i| has_verbal_root(&i.tokens) && i.tokens.iter().any(|t| t.dep.is_subject()))
        .collect()
}

pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn from_lines(text: &str) -> Self {
        Stopwords(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect())
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::from_lines(STOPWORDS)
    }
}

fn contractions() -> &'static HashMap<String, String> {
    static MAP: OnceLock<HashMap<String, String>> = OnceLock::new();
    MAP.get_or_init(|| {
        CONTRACTIONS
            .lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    })
}

fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF | 0xFE00..=0xFE0F | 0x200D | 0x20E3 | 0xE0020..=0xE007F)
}

/// Lowercases, expands contractions, strips emoji, punctuation and
/// non-ASCII tokens, drops stopwords and collapses whitespace. Idempotent.
pub fn clean_text(text: &str, stopwords: &Stopwords) -> String {
    static WORD: OnceLock<Regex> = OnceLock::new();
    let word = WORD.get_or_init(|| Regex::new(r"'?[\p{L}\p{N}]+(?:'[\p{L}\p{N}]+)*").unwrap());
    let lowered = text.to_lowercase().replace(['’', '‘'], "'");
    let expanded = word.replace_all(&lowered, |c: &regex::Captures| {
        let w = &c[0];
        contractions().get(w).cloned().unwrap_or_else(|| w.to_string())
    });
    let stripped: String = expanded
        .chars()
        .map(|c| if is_emoji(c) || (c.is_ascii() && !c.is_ascii_alphanumeric()) { ' ' } else { c })
        .collect();
    stripped
        .split_whitespace()
        .filter(|t| t.is_ascii() && !stopwords.contains(t))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTriple {
    pub instance_id: String,
    pub subject: Option<String>,
    /// Surface of the subject's head token, used for author resolution.
    pub subject_head: Option<String>,
    pub predicate: String,
    pub predicate_lemma: String,
    pub object: Option<String>,
    pub passive: bool,
}

impl EventTriple {
    pub fn subject_is_author(&self) -> Option<bool> {
        self.subject_head.as_ref().map(|h| is_author_word(h))
    }

    /// `subject predicate object` with absent parts omitted.
    pub fn text(&self) -> String {
        [self.subject.as_deref(), Some(self.predicate.as_str()), self.object.as_deref()]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn is_author_word(w: &str) -> bool {
    FIRST_PERSON_SINGULAR.contains(&w.to_lowercase().as_str())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleCandidate {
    pub triple: EventTriple,
    pub confidence: f64,
}

/// Source of verb-driven event triples for an instance.
pub trait TripleExtractor: Sync {
    fn name(&self) -> String;

    fn candidates(&self, instance: &Instance) -> Vec<TripleCandidate>;
}

/// Reads triples off the dependency tree: the root clause at confidence 1.0
/// and each other verbal clause head at 0.5.
#[derive(Debug, Default, Clone, Copy)]
pub struct DependencyTripleExtractor;

const PHRASE_EXCLUDE: &[Dep] = &[
    Dep::Punct, Dep::Conj, Dep::Cc, Dep::Advcl, Dep::Ccomp, Dep::Xcomp, Dep::Mark,
];

fn phrase(tokens: &[TokenAnnotation], head: usize) -> String {
    span_text(tokens, &subtree(tokens, head, PHRASE_EXCLUDE))
}

fn child_with(tokens: &[TokenAnnotation], head: usize, deps: &[Dep]) -> Option<usize> {
    deps.iter().find_map(|d| children(tokens, head).find(|&c| tokens[c].dep == *d))
}

fn clause_triple(instance: &Instance, verb: usize) -> EventTriple {
    let t = &instance.tokens;
    let mut predicate = t[verb].surface.clone();
    if let Some(p) = child_with(t, verb, &[Dep::Prt]) {
        predicate = format!("{predicate} {}", t[p].surface);
    }
    let passive_subject = child_with(t, verb, &[Dep::Nsubjpass]);
    let (subject_tok, object_tok, passive) = match passive_subject {
        Some(ps) => {
            let agent = child_with(t, verb, &[Dep::Agent]).and_then(|a| child_with(t, a, &[Dep::Pobj]));
            (agent, Some(ps), true)
        }
        None => (
            child_with(t, verb, &[Dep::Nsubj]),
            child_with(t, verb, &[Dep::Dobj, Dep::Attr, Dep::Acomp]),
            false,
        ),
    };
    EventTriple {
        instance_id: instance.id.clone(),
        subject: subject_tok.map(|s| phrase(t, s)),
        subject_head: subject_tok.map(|s| t[s].surface.clone()),
        predicate,
        predicate_lemma: t[verb].lemma.to_lowercase(),
        object: object_tok.map(|o| phrase(t, o)),
        passive,
    }
}

impl TripleExtractor for DependencyTripleExtractor {
    fn name(&self) -> String {
        "dependency-rules/1.0".into()
    }

    fn candidates(&self, instance: &Instance) -> Vec<TripleCandidate> {
        let t = &instance.tokens;
        let Some(root) = root_index(t) else { return Vec::new() };
        if !t[root].pos.is_verbal() {
            return Vec::new();
        }
        let mut out = vec![TripleCandidate { triple: clause_triple(instance, root), confidence: 1.0 }];
        for (i, tok) in t.iter().enumerate() {
            if i != root && tok.pos.is_verbal() && matches!(tok.dep, Dep::Conj | Dep::Ccomp | Dep::Advcl) {
                out.push(TripleCandidate { triple: clause_triple(instance, i), confidence: 0.5 });
            }
        }
        out
    }
}

/// Highest-confidence triple (earliest on ties); alternates are logged.
pub fn extract_triple(instance: &Instance, extractor: &dyn TripleExtractor) -> Option<EventTriple> {
    let cands = extractor.candidates(instance);
    let mut best: Option<&TripleCandidate> = None;
    for c in &cands {
        if best.map_or(true, |b| c.confidence > b.confidence) {
            best = Some(c);
        }
    }
    if cands.len() > 1 {
        log::debug!("instance {}: {} alternate triples", instance.id, cands.len() - 1);
    }
    best.map(|c| c.triple.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterMention {
    pub surface: String,
    pub is_author: bool,
    pub token_span: Vec<usize>,
    pub descriptive_words: Vec<usize>,
}

fn is_character(tok: &TokenAnnotation) -> bool {
    let lower = tok.surface.to_lowercase();
    match tok.pos {
        Pos::Pron => tok.dep != Dep::Poss && PERSONAL_PRONOUNS.contains(&lower.as_str()),
        Pos::Propn => tok.dep != Dep::Compound,
        Pos::Noun => is_person_noun(&lower) && tok.dep != Dep::Compound,
        _ => false,
    }
}

fn modifiers(tokens: &[TokenAnnotation], head: usize) -> Vec<usize> {
    children(tokens, head)
        .filter(|&c| matches!(tokens[c].dep, Dep::Amod | Dep::Advmod) && matches!(tokens[c].pos, Pos::Adj | Pos::Adv))
        .collect()
}

/// One mention per personal pronoun, proper noun or person noun. Descriptive
/// words are ADJ/ADV modifiers of the mention plus, for subjects, adjectival
/// complements of their verb and the adverbs modifying those.
pub fn extract_characters(instance: &Instance) -> Vec<CharacterMention> {
    let t = &instance.tokens;
    let mut out = Vec::new();
    for (i, tok) in t.iter().enumerate() {
        if !is_character(tok) {
            continue;
        }
        let mut span: Vec<usize> = children(t, i).filter(|&c| t[c].dep == Dep::Compound).collect();
        span.push(i);
        span.sort_unstable();
        let mut desc = modifiers(t, i);
        if tok.dep == Dep::Nsubj && tok.head != i {
            for c in children(t, tok.head) {
                if t[c].dep == Dep::Acomp && t[c].pos == Pos::Adj {
                    desc.push(c);
                    desc.extend(modifiers(t, c).into_iter().filter(|&m| t[m].pos == Pos::Adv));
                }
            }
        }
        desc.sort_unstable();
        desc.dedup();
        out.push(CharacterMention {
            surface: tok.surface.clone(),
            is_author: is_author_word(&tok.surface),
            token_span: span,
            descriptive_words: desc,
        });
    }
    out
}

/// True iff some token on the head chain of any span token carries a
/// negation dependent.
pub fn has_negation_edge(instance: &Instance, span: &[usize]) -> bool {
    let t = &instance.tokens;
    for &start in span {
        let mut cur = start;
        for _ in 0..=t.len() {
            if children(t, cur).any(|c| t[c].dep == Dep::Neg) {
                return true;
            }
            if t[cur].head == cur {
                break;
            }
            cur = t[cur].head;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::RuleParser;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn inst(s: &str) -> Instance {
        Instance {
            id: "p-s0".into(),
            post_id: "p".into(),
            raw_text: s.into(),
            clean_text: String::new(),
            tokens: RuleParser.parse(s).unwrap(),
        }
    }

    fn post(body: &str) -> Post {
        Post {
            id: "p".into(),
            author_id: "a".into(),
            created_at: Utc.timestamp_opt(0, 0).unwrap(),
            title: String::new(),
            body: body.into(),
            is_deleted: false,
            is_moderator: false,
        }
    }

    fn split(body: &str) -> Vec<Instance> {
        split_instances(&post(body), &RuleParser, &Stopwords::default())
    }

    #[test]
    fn bundled_tables_have_expected_sizes() {
        assert_eq!(CONTRACTIONS.lines().count(), 120);
        assert_eq!(STOPWORDS.lines().count(), 179);
    }

    #[test]
    fn splitting() {
        let v = split("I left early. She cried all night.");
        assert_eq!(v.iter().map(|i| i.id.as_str()).collect::<Vec<_>>(), vec!["p-s0", "p-s1"]);
        assert_eq!(split("I apologized to her. because of her.").len(), 1);
        assert!(split("").is_empty());
    }

    #[test]
    fn filtering() {
        let v = filter_instances(vec![inst("She left."), inst("In the morning."), inst("Stop calling me.")]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].raw_text, "She left.");
    }

    #[test]
    fn cleaning() {
        let sw = Stopwords::default();
        assert_eq!(clean_text("I love it 🎉!!", &sw), "love");
        assert_eq!(clean_text("", &sw), "");
        let empty = Stopwords::from_lines("");
        assert_eq!(clean_text("I can't go", &empty), "i can not go");
        assert_eq!(clean_text("My sister’s café wasn't open", &empty), "my sister s was not open");
    }

    #[test]
    fn triples() {
        let e = DependencyTripleExtractor;
        let t = extract_triple(&inst("I forced her to apologize"), &e).unwrap();
        assert_eq!((t.subject.as_deref(), t.predicate.as_str(), t.object.as_deref()), (Some("I"), "forced", Some("her")));
        assert!(!t.passive);
        let t = extract_triple(&inst("He was pushed by John"), &e).unwrap();
        assert_eq!((t.subject.as_deref(), t.predicate.as_str(), t.object.as_deref()), (Some("John"), "pushed", Some("He")));
        assert!(t.passive);
        assert!(extract_triple(&inst("Absolutely not."), &e).is_none());
    }

    #[test]
    fn passive_round_trip() {
        let e = DependencyTripleExtractor;
        for (active, passive) in [
            ("John pushed Mary.", "Mary was pushed by John."),
            ("My sister took the car.", "The car was taken by my sister."),
            ("The teacher blamed my brother.", "My brother was blamed by the teacher."),
        ] {
            let a = extract_triple(&inst(active), &e).unwrap();
            let p = extract_triple(&inst(passive), &e).unwrap();
            let key = |t: &EventTriple| {
                (t.subject.clone().map(|s| s.to_lowercase()), t.predicate_lemma.clone(), t.object.clone().map(|s| s.to_lowercase()))
            };
            assert_eq!(key(&a), key(&p), "{active} / {passive}");
            assert!(p.passive && !a.passive);
        }
    }

    #[test]
    fn passive_without_agent_has_no_subject() {
        let t = extract_triple(&inst("I was fired."), &DependencyTripleExtractor).unwrap();
        assert_eq!(t.subject, None);
        assert_eq!(t.object.as_deref(), Some("I"));
        assert_eq!(t.subject_is_author(), None);
    }

    #[test]
    fn characters() {
        let i = inst("I told my lazy brother");
        let m = extract_characters(&i);
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].surface.as_str(), m[0].is_author), ("I", true));
        assert_eq!((m[1].surface.as_str(), m[1].is_author), ("brother", false));
        assert_eq!(m[1].descriptive_words.iter().map(|&d| i.tokens[d].surface.as_str()).collect::<Vec<_>>(), vec!["lazy"]);
        assert!(extract_characters(&inst("It rained.")).is_empty());
        let i = inst("My mom said I was rude");
        let m = extract_characters(&i);
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].surface.as_str(), m[0].is_author), ("mom", false));
        assert!(m[0].descriptive_words.is_empty());
        assert_eq!((m[1].surface.as_str(), m[1].is_author), ("I", true));
        assert_eq!(m[1].descriptive_words.iter().map(|&d| i.tokens[d].surface.as_str()).collect::<Vec<_>>(), vec!["rude"]);
    }

    #[test]
    fn negation_edges() {
        let find = |i: &Instance, w: &str| i.tokens.iter().position(|t| t.surface == w).unwrap();
        let i = inst("I am not happy");
        assert!(has_negation_edge(&i, &[find(&i, "happy")]));
        let i = inst("I am happy");
        assert!(!has_negation_edge(&i, &[find(&i, "happy")]));
        let i = inst("I never lied");
        assert!(has_negation_edge(&i, &[find(&i, "lied")]));
    }

    const SENTENCES: &[&str] = &[
        "I left early.", "In the morning.", "She yelled at me because I was late.", "Stop calling me.",
        "My brother took my car without asking.", "Absolutely not.", "We got engaged last June.",
        "He was pushed by John.", "because of her.", "I never lied to anyone.", "My mom said I was rude.",
        "They did not invite me to the wedding.",
    ];

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "[a-zA-Z' ,.!?é🎉]{0,60}") {
            let sw = Stopwords::default();
            let once = clean_text(&s, &sw);
            prop_assert_eq!(clean_text(&once, &sw), once);
        }

        #[test]
        fn split_filter_preserves_order(picks in prop::collection::vec(0..SENTENCES.len(), 0..8)) {
            let body: Vec<&str> = picks.iter().map(|&i| SENTENCES[i]).collect();
            let body = body.join(" ");
            let kept = filter_instances(split(&body));
            let all = RuleParser.split_sentences(&body);
            let mut pos = 0;
            for k in &kept {
                let idx: usize = k.id.rsplit("-s").next().unwrap().parse().unwrap();
                prop_assert!(idx >= pos);
                prop_assert_eq!(&all[idx], &k.raw_text);
                pos = idx + 1;
            }
        }

        #[test]
        fn triple_predicate_is_an_instance_verb(i in 0..SENTENCES.len()) {
            let x = inst(SENTENCES[i]);
            if let Some(t) = extract_triple(&x, &DependencyTripleExtractor) {
                prop_assert!(x.verb_lemmas().contains(&t.predicate_lemma));
            }
        }

        #[test]
        fn descriptive_words_are_adj_or_adv(i in 0..SENTENCES.len()) {
            let x = inst(SENTENCES[i]);
            for m in extract_characters(&x) {
                for d in m.descriptive_words {
                    prop_assert!(matches!(x.tokens[d].pos, Pos::Adj | Pos::Adv));
                }
            }
        }
    }
}
