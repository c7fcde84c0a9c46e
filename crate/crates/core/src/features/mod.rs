//! Lexicon-based linguistic features, per instance (post features) and per
//! character mention (connotation, power and agency).
//!
//! Post features are hit sums divided by the instance word count
//! ([`crate::text::word_count`]). Character features are divided by the
//! character's descriptive-word count, with 1 standing in for zero.

pub mod lexicon;
pub mod sentiment;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{has_negation_edge, CharacterMention, Instance};
use crate::nlp::{children, Dep, TokenAnnotation};
use crate::text::words;

pub use lexicon::{Agency, LexiconSet, PowerDir, Slot, CONNOTATION_DIMS, EMOTIONS, MORAL_DOMAINS, VAD_DIMS};
pub use sentiment::{sentiment_category, LexiconSentiment, SentimentCategory, SentimentScorer};

fn lookup<'a, T>(map: &'a std::collections::HashMap<String, T>, word: &str) -> Option<&'a T> {
    map.get(word).or_else(|| {
        let l = crate::nlp::lexicon::lemma(word);
        if l == word {
            None
        } else {
            map.get(&l)
        }
    })
}

fn lower_words(text: &str) -> Vec<String> {
    words(text).into_iter().map(str::to_lowercase).collect()
}

/// Feature column names produced by [`post_features`], in output order.
pub fn post_feature_names(lex: &LexiconSet) -> Vec<String> {
    let mut names: Vec<String> = MORAL_DOMAINS.iter().map(|d| format!("moral_{d}")).collect();
    names.extend(VAD_DIMS.iter().map(|d| format!("vad_{d}")));
    names.extend(EMOTIONS.iter().map(|d| format!("emo_{d}")));
    names.extend(lex.category_names().into_iter().map(|c| format!("cat_{c}")));
    names
}

/// Moral, VAD, emotion and category features of `text`.
pub fn post_features_of_text(text: &str, lex: &LexiconSet) -> BTreeMap<String, f64> {
    let ws = lower_words(text);
    let mut sums: BTreeMap<String, f64> = post_feature_names(lex).into_iter().map(|n| (n, 0.0)).collect();
    if ws.is_empty() {
        return sums;
    }
    for w in &ws {
        if let Some(s) = lookup(&lex.moral, w) {
            for (d, v) in MORAL_DOMAINS.iter().zip(s) {
                *sums.get_mut(&format!("moral_{d}")).unwrap() += v;
            }
        }
        if let Some(s) = lookup(&lex.vad, w) {
            for (d, v) in VAD_DIMS.iter().zip(s) {
                *sums.get_mut(&format!("vad_{d}")).unwrap() += v;
            }
        }
        if let Some(f) = lookup(&lex.emotion, w) {
            for (d, &on) in EMOTIONS.iter().zip(f) {
                if on {
                    *sums.get_mut(&format!("emo_{d}")).unwrap() += 1.0;
                }
            }
        }
        let mut hit: Vec<&str> = lex.categories.iter().filter(|c| c.matches(w)).map(|c| c.category.as_str()).collect();
        hit.sort_unstable();
        hit.dedup();
        for c in hit {
            *sums.get_mut(&format!("cat_{c}")).unwrap() += 1.0;
        }
    }
    let n = ws.len() as f64;
    sums.values_mut().for_each(|v| *v /= n);
    sums
}

pub fn post_features(instance: &Instance, lex: &LexiconSet) -> BTreeMap<String, f64> {
    post_features_of_text(&instance.raw_text, lex)
}

/// Mean of strength × polarity over subjectivity-lexicon words; 0 without
/// matches.
pub fn subjectivity_score_of_text(text: &str, lex: &LexiconSet) -> f64 {
    let scores: Vec<f64> = lower_words(text).iter().filter_map(|w| lookup(&lex.subjectivity, w)).map(|(s, p)| s * p).collect();
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

pub fn subjectivity_score(instance: &Instance, lex: &LexiconSet) -> f64 {
    subjectivity_score_of_text(&instance.raw_text, lex)
}

pub fn sentiment(instance: &Instance, scorer: &dyn SentimentScorer) -> (f64, SentimentCategory) {
    let c = scorer.compound(&instance.raw_text);
    (c, sentiment_category(c))
}

/// Head token of a mention span: the span token whose head lies outside it.
fn span_head(tokens: &[TokenAnnotation], span: &[usize]) -> Option<usize> {
    span.iter().copied().find(|&i| !span.contains(&tokens[i].head) || tokens[i].head == i)
}

/// Verbs governing a mention with the mention's semantic role. Passive
/// subjects are objects and agents are subjects; a subject also governs
/// coordinated verbs that lack their own subject.
pub fn governing_verbs(instance: &Instance, mention: &CharacterMention) -> Vec<(usize, Slot)> {
    let t = &instance.tokens;
    let Some(h) = span_head(t, &mention.token_span) else { return Vec::new() };
    let head = t[h].head;
    if head == h {
        return Vec::new();
    }
    let mut out = Vec::new();
    match t[h].dep {
        Dep::Nsubj => {
            out.push((head, Slot::Subject));
            for c in children(t, head) {
                if t[c].dep == Dep::Conj && t[c].pos.is_verbal() && !children(t, c).any(|g| t[g].dep.is_subject()) {
                    out.push((c, Slot::Subject));
                }
            }
        }
        Dep::Nsubjpass | Dep::Dobj | Dep::Dative => out.push((head, Slot::Object)),
        Dep::Pobj if t[head].dep == Dep::Agent => {
            let v = t[head].head;
            if v != head {
                out.push((v, Slot::Subject));
            }
        }
        _ => {}
    }
    out.retain(|&(v, _)| t[v].pos.is_verbal());
    out
}

/// Flips the sign of every score; applying it twice is the identity.
pub fn reverse_scores(scores: &mut BTreeMap<String, f64>) {
    scores.values_mut().for_each(|v| *v = -*v);
}

/// Perspective, value, effect and mental-state scores for one character.
pub fn connotation_features(instance: &Instance, mention: &CharacterMention, lex: &LexiconSet) -> BTreeMap<String, f64> {
    let mut sums = [0.0; 4];
    for (v, slot) in governing_verbs(instance, mention) {
        let lemma = instance.tokens[v].lemma.to_lowercase();
        if let Some(dims) = lex.connotation.get(&lemma) {
            let k = if slot == Slot::Subject { 0 } else { 1 };
            for (s, d) in sums.iter_mut().zip(dims) {
                *s += d[k];
            }
        }
    }
    let denom = mention.descriptive_words.len().max(1) as f64;
    let mut out: BTreeMap<String, f64> =
        CONNOTATION_DIMS.iter().zip(sums).map(|(d, s)| (format!("conn_{d}"), s / denom)).collect();
    if has_negation_edge(instance, &mention.token_span) {
        reverse_scores(&mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PowerAgency {
    pub power_count: u32,
    pub agency_count: u32,
}

impl PowerAgency {
    pub fn power_flag(&self) -> u8 {
        u8::from(self.power_count > 0)
    }

    pub fn agency_flag(&self) -> u8 {
        u8::from(self.agency_count > 0)
    }
}

/// Power and agency counters per mention, in mention order.
pub fn power_agency(instance: &Instance, mentions: &[CharacterMention], lex: &LexiconSet) -> Vec<PowerAgency> {
    mentions
        .iter()
        .map(|m| {
            let mut pa = PowerAgency::default();
            for (v, slot) in governing_verbs(instance, m) {
                let lemma = instance.tokens[v].lemma.to_lowercase();
                let Some(&(dir, agency)) = lex.power_agency.get(&lemma) else { continue };
                match (dir, slot) {
                    (PowerDir::ToSubject, Slot::Subject) | (PowerDir::ToObject, Slot::Object) => pa.power_count += 1,
                    _ => {}
                }
                if agency == Agency::High && slot == Slot::Subject {
                    pa.agency_count += 1;
                }
            }
            pa
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterFeatures {
    pub character: String,
    pub token: usize,
    pub is_author: bool,
    pub descriptive_words: usize,
    pub negated: bool,
    pub connotation: BTreeMap<String, f64>,
    pub power_flag: u8,
    pub agency_flag: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub instance_id: String,
    /// Denominator of every post feature.
    pub word_count: usize,
    pub post_features: BTreeMap<String, f64>,
    pub sentiment_compound: f64,
    pub sentiment_category: SentimentCategory,
    pub characters: Vec<CharacterFeatures>,
}

pub fn build_feature_vector(
    instance: &Instance,
    mentions: &[CharacterMention],
    lex: &LexiconSet,
    scorer: &dyn SentimentScorer,
) -> FeatureVector {
    let mut post = post_features(instance, lex);
    post.insert("subjectivity".into(), subjectivity_score(instance, lex));
    let (compound, category) = sentiment(instance, scorer);
    post.insert("sentiment".into(), compound);
    let pa = power_agency(instance, mentions, lex);
    let characters = mentions
        .iter()
        .zip(pa)
        .map(|(m, pa)| CharacterFeatures {
            character: m.surface.clone(),
            token: span_head(&instance.tokens, &m.token_span).unwrap_or(0),
            is_author: m.is_author,
            descriptive_words: m.descriptive_words.len(),
            negated: has_negation_edge(instance, &m.token_span),
            connotation: connotation_features(instance, m, lex),
            power_flag: pa.power_flag(),
            agency_flag: pa.agency_flag(),
        })
        .collect();
    FeatureVector {
        instance_id: instance.id.clone(),
        word_count: words(&instance.raw_text).len(),
        post_features: post,
        sentiment_compound: compound,
        sentiment_category: category,
        characters,
    }
}

/// `instance_id,word_count,<features...>,sentiment_category`
pub fn write_features_csv(vectors: &[FeatureVector], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(Error::from)?;
    let names: Vec<String> = vectors.first().map(|v| v.post_features.keys().cloned().collect()).unwrap_or_default();
    let mut header = vec!["instance_id".to_string(), "word_count".to_string()];
    header.extend(names.iter().cloned());
    header.push("sentiment_category".into());
    w.write_record(&header)?;
    for v in vectors {
        let mut rec = vec![v.instance_id.clone(), v.word_count.to_string()];
        rec.extend(names.iter().map(|n| v.post_features.get(n).copied().unwrap_or(0.0).to_string()));
        rec.push(v.sentiment_category.as_str().into());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `features.csv` back as (instance_id, feature map) rows.
pub fn read_features_csv(path: &Path) -> Result<Vec<(String, BTreeMap<String, f64>)>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let mut map = BTreeMap::new();
        for (name, val) in header.iter().zip(rec.iter()).skip(2) {
            if name == "sentiment_category" {
                continue;
            }
            let x: f64 = val.parse().map_err(|_| Error::Csv(format!("{}: bad value {val:?} in {name}", path.display())))?;
            map.insert(name.clone(), x);
        }
        out.push((id, map));
    }
    Ok(out)
}

/// One row per (instance, character mention).
pub fn write_cha_features_csv(vectors: &[FeatureVector], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> =
        ["instance_id", "character", "token", "is_author", "descriptive_words", "negated"].map(String::from).to_vec();
    header.extend(CONNOTATION_DIMS.iter().map(|d| format!("conn_{d}")));
    header.extend(["power".to_string(), "agency".to_string()]);
    w.write_record(&header)?;
    for v in vectors {
        for c in &v.characters {
            let mut rec = vec![
                v.instance_id.clone(),
                c.character.clone(),
                c.token.to_string(),
                u8::from(c.is_author).to_string(),
                c.descriptive_words.to_string(),
                u8::from(c.negated).to_string(),
            ];
            rec.extend(CONNOTATION_DIMS.iter().map(|d| c.connotation[&format!("conn_{d}")].to_string()));
            rec.extend([c.power_flag.to_string(), c.agency_flag.to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::extract_characters;
    use crate::nlp::{ParserBackend, RuleParser};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn inst(s: &str) -> Instance {
        Instance {
            id: "p-s0".into(),
            post_id: "p".into(),
            raw_text: s.into(),
            clean_text: String::new(),
            tokens: RuleParser.parse(s).unwrap(),
        }
    }

    fn tiny_lex() -> LexiconSet {
        let mut lex = LexiconSet::default();
        lex.emotion.insert("furious".into(), [true, false, false, false, false, false, false, false]);
        lex.emotion.insert("livid".into(), [true, false, false, false, false, false, false, false]);
        lex.vad.insert("boss".into(), [0.5, 0.5, 0.8]);
        lex.subjectivity.insert("awful".into(), (1.0, -1.0));
        lex.subjectivity.insert("nice".into(), (0.5, 1.0));
        lex.subjectivity.insert("really".into(), (1.0, 0.0));
        lex
    }

    #[test]
    fn normalized_by_word_count() {
        let lex = tiny_lex();
        let f = post_features_of_text("a b c d e f g h furious livid", &lex);
        assert!((f["emo_anger"] - 0.2).abs() < 1e-12);
        let f = post_features_of_text("my boss called me today", &lex);
        assert!((f["vad_dominance"] - 0.16).abs() < 1e-12);
        let f = post_features_of_text("nothing matches here", &lex);
        assert!(f.values().all(|&v| v == 0.0));
        assert!(post_features_of_text("", &lex).values().all(|&v| v == 0.0));
    }

    #[test]
    fn prefix_categories_match_stems() {
        let lex = LexiconSet::bundled();
        let f = post_features_of_text("fucking shitty weekend", &lex);
        assert!((f["cat_swear"] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f["cat_time"] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn subjectivity_weights() {
        let lex = tiny_lex();
        assert_eq!(subjectivity_score_of_text("that was awful", &lex), -1.0);
        assert_eq!(subjectivity_score_of_text("a nice day", &lex), 0.5);
        assert_eq!(subjectivity_score_of_text("really", &lex), 0.0);
        assert_eq!(subjectivity_score_of_text("awful nice", &lex), -0.25);
        assert_eq!(subjectivity_score_of_text("no hits", &lex), 0.0);
    }

    fn conn_lex() -> LexiconSet {
        let mut lex = LexiconSet::default();
        lex.connotation.insert("help".into(), [[0.4, 0.1], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        lex.power_agency.insert("fear".into(), (PowerDir::ToObject, Agency::Low));
        lex.power_agency.insert("push".into(), (PowerDir::ToSubject, Agency::High));
        lex.power_agency.insert("doubt".into(), (PowerDir::None, Agency::Low));
        lex
    }

    fn mention<'a>(ms: &'a [CharacterMention], surface: &str) -> &'a CharacterMention {
        ms.iter().find(|m| m.surface == surface).unwrap()
    }

    #[test]
    fn connotation_divides_by_descriptive_words() {
        let lex = conn_lex();
        let i = inst("She helped him.");
        let ms = extract_characters(&i);
        let mut she = mention(&ms, "She").clone();
        assert_eq!(connotation_features(&i, &she, &lex)["conn_perspective"], 0.4);
        she.descriptive_words = vec![0, 1];
        assert!((connotation_features(&i, &she, &lex)["conn_perspective"] - 0.2).abs() < 1e-12);
        let him = mention(&ms, "him");
        assert_eq!(connotation_features(&i, him, &lex)["conn_perspective"], 0.1);

        let n = inst("She did not help him.");
        let ms = extract_characters(&n);
        let mut she = mention(&ms, "She").clone();
        she.descriptive_words = vec![0, 1];
        assert!((connotation_features(&n, &she, &lex)["conn_perspective"] + 0.2).abs() < 1e-12);

        let z = inst("She visited him.");
        let ms = extract_characters(&z);
        assert!(connotation_features(&z, &ms[0], &lex).values().all(|&v| v == 0.0));
    }

    #[test]
    fn power_rules() {
        let lex = conn_lex();
        let i = inst("Sarah fears Tom.");
        let ms = extract_characters(&i);
        let pa = power_agency(&i, &ms, &lex);
        let flags: Vec<(String, u8)> = ms.iter().zip(&pa).map(|(m, p)| (m.surface.clone(), p.power_flag())).collect();
        assert_eq!(flags, vec![("Sarah".to_string(), 0), ("Tom".to_string(), 1)]);

        let i = inst("Sarah pushes Tom.");
        let ms = extract_characters(&i);
        let pa = power_agency(&i, &ms, &lex);
        let flags: Vec<u8> = pa.iter().map(PowerAgency::power_flag).collect();
        assert_eq!(flags, vec![1, 0]);
        assert_eq!(pa[0].agency_flag(), 1);

        let i = inst("I doubt it.");
        let ms = extract_characters(&i);
        assert_eq!(power_agency(&i, &ms, &lex)[0].agency_flag(), 0);
    }

    #[test]
    fn passive_agent_keeps_roles() {
        let lex = conn_lex();
        let i = inst("Tom was pushed by Sarah.");
        let ms = extract_characters(&i);
        let pa = power_agency(&i, &ms, &lex);
        let flags: Vec<(String, u8)> = ms.iter().zip(&pa).map(|(m, p)| (m.surface.clone(), p.power_flag())).collect();
        assert_eq!(flags, vec![("Tom".to_string(), 0), ("Sarah".to_string(), 1)]);
    }

    struct Fixed(f64);
    impl SentimentScorer for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn compound(&self, _: &str) -> f64 {
            self.0
        }
    }

    #[test]
    fn vector_is_composition_of_families() {
        let lex = LexiconSet::bundled();
        let i = inst("My sister yelled at me and I cried.");
        let ms = extract_characters(&i);
        let v = build_feature_vector(&i, &ms, &lex, &Fixed(-0.06));
        assert_eq!(v.sentiment_category, SentimentCategory::Negative);
        let mut expect = post_features(&i, &lex);
        expect.insert("subjectivity".into(), subjectivity_score(&i, &lex));
        expect.insert("sentiment".into(), -0.06);
        assert_eq!(v.post_features, expect);
        assert_eq!(v.characters.len(), ms.len());
        assert_eq!(v.word_count, 8);

        let none = inst("The weather was cold.");
        let v = build_feature_vector(&none, &extract_characters(&none), &lex, &Fixed(0.05));
        assert!(v.characters.is_empty());
        assert_eq!(v.sentiment_category, SentimentCategory::Neutral);
        assert!(!v.post_features.is_empty());
    }

    #[test]
    fn feature_csv_round_trip() {
        let lex = LexiconSet::bundled();
        let scorer = LexiconSentiment::new(lex.sentiment.clone());
        let vs: Vec<FeatureVector> = ["My mom was rude to me.", "I helped my friend."]
            .iter()
            .map(|s| {
                let i = inst(s);
                build_feature_vector(&i, &extract_characters(&i), &lex, &scorer)
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("features.csv");
        write_features_csv(&vs, &p).unwrap();
        let back = read_features_csv(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].1, vs[0].post_features);
        write_cha_features_csv(&vs, &dir.path().join("cha.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("cha.csv")).unwrap();
        assert!(text.starts_with("instance_id,character,token"));
    }

    const VOCAB: &[&str] = &[
        "angry", "mad", "family", "friend", "wedding", "fucking", "today", "should", "we", "rude", "kind", "lied", "the",
        "a", "cat", "went", "happy", "gross", "loyal", "steal",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn duplication_invariance(idx in proptest::collection::vec(0..VOCAB.len(), 1..30)) {
            let lex = LexiconSet::bundled();
            let text: Vec<&str> = idx.iter().map(|&i| VOCAB[i]).collect();
            let once = text.join(" ");
            let twice = format!("{once} {once}");
            let a = post_features_of_text(&once, &lex);
            let b = post_features_of_text(&twice, &lex);
            for (k, v) in &a {
                prop_assert!((v - b[k]).abs() < 1e-12, "{k}: {v} vs {}", b[k]);
            }
            prop_assert!((subjectivity_score_of_text(&once, &lex) - subjectivity_score_of_text(&twice, &lex)).abs() < 1e-12);
        }

        #[test]
        fn bag_of_words(idx in proptest::collection::vec(0..VOCAB.len(), 1..30), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let lex = LexiconSet::bundled();
            let mut text: Vec<&str> = idx.iter().map(|&i| VOCAB[i]).collect();
            let a = post_features_of_text(&text.join(" "), &lex);
            text.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = post_features_of_text(&text.join(" "), &lex);
            for (k, v) in &a {
                prop_assert!((v - b[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn negation_reversal_is_an_involution(vals in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let orig: BTreeMap<String, f64> =
                CONNOTATION_DIMS.iter().zip(&vals).map(|(d, v)| (format!("conn_{d}"), *v)).collect();
            let mut s = orig.clone();
            reverse_scores(&mut s);
            for (k, v) in &orig {
                prop_assert_eq!(s[k], -v);
            }
            reverse_scores(&mut s);
            prop_assert_eq!(s, orig);
        }

        #[test]
        fn flags_are_binary(subj in 0..4usize, verb in 0..4usize, obj in 0..4usize) {
            let names = ["Sarah", "Tom", "She", "He"];
            let objs = ["Tom", "Sarah", "her", "him"];
            let verbs = ["fears", "pushes", "doubts", "helps"];
            let lex = LexiconSet::bundled();
            let i = inst(&format!("{} {} {}.", names[subj], verbs[verb], objs[obj]));
            let ms = extract_characters(&i);
            let v = build_feature_vector(&i, &ms, &lex, &LexiconSentiment::new(HashMap::new()));
            for c in &v.characters {
                prop_assert!(c.power_flag <= 1 && c.agency_flag <= 1);
            }
        }
    }
}
