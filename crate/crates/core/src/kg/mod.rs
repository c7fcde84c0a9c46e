//! Commonsense knowledge-graph store and two-phase instance alignment.

pub mod scorer;
pub mod tfidf;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::nlp::lexicon::PLACEHOLDERS;
use crate::nlp::{ParserBackend, Pos};
use crate::text::alnum_tokens;

pub use scorer::{GreedyMatchScorer, IdfOverlapScorer, SemanticScorer};

pub const ATTRIBUTE_RELATION: &str = "xAttr";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEvent {
    pub id: String,
    pub text: String,
    pub verb_lemmas: BTreeSet<String>,
    pub attributes: Vec<String>,
    pub frequency: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KgStore {
    pub events: BTreeMap<String, CEvent>,
    pub verb_index: BTreeMap<String, BTreeSet<String>>,
    pub parser_version: String,
    pub malformed_rows: usize,
}

fn main_verb_lemmas(parser: &dyn ParserBackend, text: &str) -> BTreeSet<String> {
    match parser.parse(text) {
        Ok(tokens) => tokens.iter().filter(|t| t.pos == Pos::Verb).map(|t| t.lemma.to_lowercase()).collect(),
        Err(e) => {
            log::warn!("could not parse event '{text}': {e}");
            BTreeSet::new()
        }
    }
}

impl KgStore {
    /// Builds the store from `(head, relation, tail)` rows. Only attribute
    /// rows are used; "none" tails and duplicate tails are dropped, and heads
    /// without any remaining attribute are not stored. Event ids follow
    /// first appearance.
    pub fn from_rows<'a>(
        rows: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
        parser: &dyn ParserBackend,
    ) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut attrs: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut saw_relation = false;
        for (head, rel, tail) in rows {
            if rel.trim() != ATTRIBUTE_RELATION {
                continue;
            }
            saw_relation = true;
            let head = head.trim();
            let tail = tail.trim();
            if tail.is_empty() || tail.eq_ignore_ascii_case("none") {
                continue;
            }
            let list = attrs.entry(head.to_string()).or_insert_with(|| {
                order.push(head.to_string());
                Vec::new()
            });
            if !list.iter().any(|a| a == tail) {
                list.push(tail.to_string());
            }
        }
        if !saw_relation {
            return Err(Error::NoAttributeRows { path: Default::default() });
        }
        let mut store = KgStore { parser_version: parser.version(), ..Default::default() };
        for (n, head) in order.into_iter().enumerate() {
            let id = format!("c{n:06}");
            let verb_lemmas = main_verb_lemmas(parser, &head);
            for v in &verb_lemmas {
                store.verb_index.entry(v.clone()).or_default().insert(id.clone());
            }
            let attributes = attrs.remove(&head).unwrap_or_default();
            store.events.insert(id.clone(), CEvent { id, text: head, verb_lemmas, attributes, frequency: 0 });
        }
        Ok(store)
    }

    pub fn lookup(&self, verb: &str) -> impl Iterator<Item = &String> {
        self.verb_index.get(verb).into_iter().flatten()
    }
}

/// Reads a tab-separated `head<TAB>relation<TAB>tail` file.
pub fn load_atomic(path: &Path, parser: &dyn ParserBackend) -> Result<KgStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut malformed = 0usize;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 || parts[0].trim().is_empty() {
            malformed += 1;
            continue;
        }
        rows.push((parts[0].to_string(), parts[1].to_string(), parts[2].to_string()));
    }
    let mut store = KgStore::from_rows(rows.iter().map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())), parser)
        .map_err(|e| match e {
            Error::NoAttributeRows { .. } => Error::NoAttributeRows { path: path.to_path_buf() },
            e => e,
        })?;
    if malformed > 0 {
        log::warn!("{}: {malformed} malformed rows skipped", path.display());
    }
    store.malformed_rows = malformed;
    Ok(store)
}

/// E_i: every event sharing a main-verb lemma with the instance, sorted by id.
pub fn coarse_filter(instance: &Instance, kg: &KgStore) -> Vec<String> {
    let verbs: BTreeSet<String> =
        instance.tokens.iter().filter(|t| t.pos == Pos::Verb).map(|t| t.lemma.to_lowercase()).collect();
    let pool: BTreeSet<String> = verbs.iter().flat_map(|v| kg.lookup(v).cloned()).collect();
    pool.into_iter().collect()
}

fn refine_tokens(text: &str) -> Vec<String> {
    alnum_tokens(text).into_iter().filter(|t| !PLACEHOLDERS.contains(&t.as_str())).collect()
}

/// How the similarity threshold is applied to the candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RefineMode {
    /// Candidates are compared with each other; near-duplicate groups keep
    /// one representative.
    #[default]
    NearDuplicates,
    /// Candidates are compared with the instance and kept when similar enough.
    InstanceSimilarity,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// P_i by near-duplicate grouping: single-linkage over tf-idf cosine ≥
/// `threshold`, one representative per group (longest text, then
/// lexicographically smallest). Output is sorted by id.
pub fn refine_pool(pool: &[String], kg: &KgStore, threshold: f64) -> Vec<String> {
    if pool.len() <= 1 {
        return pool.to_vec();
    }
    let texts: Vec<&str> = pool.iter().map(|id| kg.events[id].text.as_str()).collect();
    let docs: Vec<Vec<String>> = texts.iter().map(|t| refine_tokens(t)).collect();
    let Ok(vecs) = tfidf::tfidf_from_tokens(&docs) else {
        return pool.to_vec();
    };
    let mut parent: Vec<usize> = (0..pool.len()).collect();
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            if tfidf::cosine(&vecs[i], &vecs[j]) >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..pool.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<String> = groups
        .values()
        .map(|members| {
            let best = members
                .iter()
                .copied()
                .min_by(|&a, &b| texts[b].chars().count().cmp(&texts[a].chars().count()).then(texts[a].cmp(texts[b])))
                .expect("non-empty group");
            pool[best].clone()
        })
        .collect();
    out.sort();
    out
}

/// P_i under the instance-similarity reading: candidates whose tf-idf cosine
/// with the instance text reaches `threshold`.
pub fn refine_by_instance(instance_text: &str, pool: &[String], kg: &KgStore, threshold: f64) -> Vec<String> {
    let mut docs: Vec<Vec<String>> = pool.iter().map(|id| refine_tokens(&kg.events[id].text)).collect();
    docs.push(refine_tokens(instance_text));
    let Ok(vecs) = tfidf::tfidf_from_tokens(&docs) else {
        return Vec::new();
    };
    let inst = &vecs[pool.len()];
    pool.iter().zip(&vecs).filter(|(_, v)| tfidf::cosine(v, inst) >= threshold).map(|(id, _)| id.clone()).collect()
}

/// Scores every candidate against `reference` and sorts by score
/// descending, then event frequency descending, then id.
pub fn semantic_rank(reference: &str, pool: &[String], kg: &KgStore, scorer: &dyn SemanticScorer) -> Result<Vec<(String, f64)>> {
    let mut ranked = Vec::with_capacity(pool.len());
    for id in pool {
        let s = scorer.score(&kg.events[id].text, reference)?;
        ranked.push((id.clone(), s));
    }
    ranked.sort_by(|(a, sa), (b, sb)| {
        sb.total_cmp(sa)
            .then(kg.events[b].frequency.cmp(&kg.events[a].frequency))
            .then(a.cmp(b))
    });
    Ok(ranked)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    pub threshold: f64,
    pub top_k: usize,
    pub mode: RefineMode,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { threshold: 0.5, top_k: 3, mode: RefineMode::NearDuplicates }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub instance_id: String,
    pub candidate_pool: Vec<String>,
    pub refined_pool: Vec<String>,
    pub ranked: Vec<(String, f64)>,
    pub top3: Vec<String>,
}

impl AlignmentResult {
    pub fn score_of(&self, event_id: &str) -> Option<f64> {
        self.ranked.iter().find(|(id, _)| id == event_id).map(|(_, s)| *s)
    }
}

/// Coarse filter, pool refinement and semantic ranking against the
/// instance's clean text; `top3` holds the first `top_k` ranked events.
pub fn align(instance: &Instance, kg: &KgStore, scorer: &dyn SemanticScorer, config: &AlignConfig) -> Result<AlignmentResult> {
    let candidate_pool = coarse_filter(instance, kg);
    let refined_pool = match config.mode {
        RefineMode::NearDuplicates => refine_pool(&candidate_pool, kg, config.threshold),
        RefineMode::InstanceSimilarity => refine_by_instance(&instance.clean_text, &candidate_pool, kg, config.threshold),
    };
    let reference = if instance.clean_text.is_empty() { &instance.raw_text } else { &instance.clean_text };
    let ranked = semantic_rank(reference, &refined_pool, kg, scorer).map_err(|e| {
        log::error!("scoring failed for instance {}: {e}", instance.id);
        e
    })?;
    let top3 = ranked.iter().take(config.top_k).map(|(id, _)| id.clone()).collect();
    Ok(AlignmentResult { instance_id: instance.id.clone(), candidate_pool, refined_pool, ranked, top3 })
}

/// Sets each event's frequency to the number of alignments listing it in
/// their top events.
pub fn count_frequencies(kg: &mut KgStore, results: &[AlignmentResult]) {
    for e in kg.events.values_mut() {
        e.frequency = 0;
    }
    for r in results {
        for id in &r.top3 {
            if let Some(e) = kg.events.get_mut(id) {
                e.frequency += 1;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScoredEvent {
    event_id: String,
    score: f64,
}

#[derive(Serialize, Deserialize)]
struct AlignmentLine {
    instance_id: String,
    top3: Vec<ScoredEvent>,
    pool_sizes: [usize; 2],
}

pub fn write_alignments(results: &[AlignmentResult], path: &Path) -> Result<()> {
    let mut out = File::create(path).map_err(|e| Error::io(path, e))?;
    for r in results {
        let line = AlignmentLine {
            instance_id: r.instance_id.clone(),
            top3: r
                .top3
                .iter()
                .map(|id| ScoredEvent { event_id: id.clone(), score: r.score_of(id).unwrap_or(0.0) })
                .collect(),
            pool_sizes: [r.candidate_pool.len(), r.refined_pool.len()],
        };
        writeln!(out, "{}", serde_json::to_string(&line)?).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// `(instance_id, [(event_id, score)])` rows from an alignments file.
pub fn read_alignments(path: &Path) -> Result<Vec<(String, Vec<(String, f64)>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: AlignmentLine = serde_json::from_str(&line)?;
        out.push((a.instance_id, a.top3.into_iter().map(|s| (s.event_id, s.score)).collect()));
    }
    Ok(out)
}
