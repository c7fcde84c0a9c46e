//! The eight pipeline stages. Each reads its upstream artifacts from the
//! output directory, so any stage can be rerun on its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use spark_core::cluster::{self, drop_noise, embed_events, frequency_filter, write_clusters_csv, write_tuning_log};
use spark_core::corpus::{self, filter_comments, filter_posts, load_corpus, load_corpus_files, select_quoting_comments};
use spark_core::embed::{HashEmbedder, TextEmbedder};
use spark_core::features::lexicon::{LexiconSet, CONNOTATION_DIMS};
use spark_core::features::sentiment::{sentiment_category_with, LexiconSentiment, SentimentScorer};
use spark_core::features::{build_feature_vector, read_features_csv, write_cha_features_csv, write_features_csv};
use spark_core::instance::{
    extract_characters, extract_triple, filter_instances, split_instances, DependencyTripleExtractor, EventTriple, Instance,
    Stopwords, TripleExtractor,
};
use spark_core::kg::{self, align, count_frequencies, read_alignments, write_alignments, AlignmentResult, CEvent, KgStore};
use spark_core::kg::{GreedyMatchScorer, IdfOverlapScorer, SemanticScorer};
use spark_core::nlp::{ParserBackend, RuleParser};
use spark_core::report::{emit_blame_table, emit_or_chart, event_label, FeatureInfo};
use spark_core::stats::{
    read_correlation_csv, read_regression_csv, run_feature_screen, spearman, write_correlation_csv, write_regression_csv,
    CorrelationRow, Dummies,
};
use spark_core::verdict::{label_blame, label_sparks, PatternConfig, Verdict, VerdictExtractor};

use crate::config::{RunConfig, ScorerKind};
use crate::manifest::{InstanceStageCount, RunManifest, StageEntry};
use crate::CliError;

pub const STAGES: [&str; 8] = ["ingest", "verdicts", "instances", "align", "cluster", "features", "regress", "report"];

// artifact names, grouped by producing stage
const POSTS: &str = "corpus_posts.jsonl";
const COMMENTS: &str = "corpus_comments.jsonl";
const FILTER_LOG: &str = "filter_log.csv";
const LOAD_REPORT: &str = "load_report.json";
const VERDICTS: &str = "verdicts.csv";
const INSTANCES: &str = "instances.jsonl";
const TRIPLES: &str = "triples.jsonl";
const SPARK_LABELS: &str = "spark_labels.csv";
const BLAME_LABELS: &str = "blame_labels.csv";
const UNMATCHED: &str = "unmatched_quotes.jsonl";
const INSTANCE_LOG: &str = "instance_log.csv";
const ALIGNMENTS: &str = "alignments.jsonl";
const EVENTS: &str = "events.jsonl";
const CLUSTERS: &str = "clusters.csv";
const DOMAINS: &str = "domains.csv";
const TUNING_LOG: &str = "tuning_log.csv";
const CLUSTER_MODEL: &str = "cluster_model.json";
const FEATURES: &str = "features.csv";
const CHA_FEATURES: &str = "cha_features.csv";
const REG_COMMONSENSE: &str = "regression_results.csv";
const REG_LINGUISTIC: &str = "regression_results_linguistic.csv";
const REG_JUDGMENT: &str = "regression_results_judgment.csv";
const CORRELATIONS: &str = "correlation_results.csv";
const FREQUENCIES: &str = "screen_frequencies.csv";
const STAGE_LOG: &str = "stage_log.csv";

const ALIGN_STAGE_NAME: &str = "Align instances with c-events";

/// Every artifact a stage writes, in a fixed order.
pub fn stage_outputs(stage: &str) -> Vec<String> {
    let v: &[&str] = match stage {
        "ingest" => &[POSTS, COMMENTS, FILTER_LOG, LOAD_REPORT],
        "verdicts" => &[VERDICTS],
        "instances" => &[INSTANCES, TRIPLES, SPARK_LABELS, BLAME_LABELS, UNMATCHED, INSTANCE_LOG],
        "align" => &[ALIGNMENTS, EVENTS],
        "cluster" => &[CLUSTERS, DOMAINS, TUNING_LOG, CLUSTER_MODEL],
        "features" => &[FEATURES, CHA_FEATURES],
        "regress" => &[REG_COMMONSENSE, REG_LINGUISTIC, REG_JUDGMENT, CORRELATIONS, FREQUENCIES],
        "report" => &[
            "or_chart_commonsense.csv",
            "or_chart_commonsense.svg",
            "or_chart_linguistic.csv",
            "or_chart_linguistic.svg",
            "or_chart_judgment.csv",
            "or_chart_judgment.svg",
            "blame_table.csv",
            "blame_table.svg",
            STAGE_LOG,
        ],
        _ => &[],
    };
    v.iter().map(|s| s.to_string()).collect()
}

fn producer_of(artifact: &str) -> &'static str {
    STAGES.iter().find(|s| stage_outputs(s).iter().any(|a| a == artifact)).copied().unwrap_or("?")
}

type Counts = BTreeMap<String, Value>;

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub parser: RuleParser,
    pub manifest: &'a mut RunManifest,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Path of an upstream artifact, or the error naming the stage to run.
    fn need(&self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::MissingUpstream { artifact: name.to_string(), stage: producer_of(name).to_string() })
        }
    }

    fn embedder(&self) -> HashEmbedder {
        HashEmbedder { dim: self.cfg.embed_dim, seed: self.cfg.seed }
    }
}

/// Backend version strings recorded in the manifest.
pub fn backends(cfg: &RunConfig) -> BTreeMap<String, String> {
    let embedder = HashEmbedder { dim: cfg.embed_dim, seed: cfg.seed };
    let scorer = match cfg.scorer {
        ScorerKind::IdfOverlap => IdfOverlapScorer::from_texts(std::iter::empty()).name(),
        ScorerKind::GreedyMatch => GreedyMatchScorer { embedder: embedder.clone() }.name(),
    };
    BTreeMap::from([
        ("parser".to_string(), RuleParser::new().version()),
        ("embedder".to_string(), embedder.name()),
        ("scorer".to_string(), scorer),
        ("triples".to_string(), DependencyTripleExtractor.name()),
        ("sentiment".to_string(), LexiconSentiment::new(Default::default()).name()),
    ])
}

pub fn run_stage(name: &str, ctx: &mut Ctx) -> Result<StageEntry, CliError> {
    let start = Instant::now();
    log::info!("stage {name}");
    let counts = match name {
        "ingest" => ingest(ctx)?,
        "verdicts" => verdicts(ctx)?,
        "instances" => instances(ctx)?,
        "align" => align_stage(ctx)?,
        "cluster" => cluster_stage(ctx)?,
        "features" => features(ctx)?,
        "regress" => regress(ctx)?,
        "report" => report(ctx)?,
        other => return Err(CliError::Config(format!("unknown stage '{other}'"))),
    };
    Ok(StageEntry {
        name: name.to_string(),
        outputs: stage_outputs(name),
        counts,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

fn extractor(cfg: &RunConfig) -> Result<VerdictExtractor, CliError> {
    let patterns = match &cfg.verdict_patterns {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            PatternConfig::from_json(&text)?
        }
        None => PatternConfig::default(),
    };
    Ok(VerdictExtractor::new(&patterns)?)
}

fn write_string(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Stage(format!("{}: {e}", path.display())))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).map_err(|e| CliError::Stage(e.to_string()))?);
        s.push('\n');
    }
    write_string(path, &s)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), n + 1)))?);
    }
    Ok(out)
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    r.deserialize().map(|row| row.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))).collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Stage(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Stage(format!("{}: {e}", path.display())))
}

fn count<T: Into<Value>>(pairs: impl IntoIterator<Item = (&'static str, T)>) -> Counts {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v.into())).collect()
}

// ---------------------------------------------------------------- ingest

fn ingest(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let cfg = ctx.cfg;
    let store = load_corpus(&cfg.corpus_dir)?;
    let ex = extractor(cfg)?;
    let s1 = filter_posts(&store, cfg.min_words_post, cfg.min_top_comments);
    let s2 = filter_comments(&s1, cfg.min_words_comment, |b| ex.extract(b));
    let s3 = select_quoting_comments(&s2);
    s3.write_jsonl(&ctx.path(POSTS), &ctx.path(COMMENTS))?;
    corpus::write_filter_log(&s3.provenance.filter_log, &ctx.path(FILTER_LOG))?;
    let report = &store.provenance.load_report;
    write_string(
        &ctx.path(LOAD_REPORT),
        &(serde_json::to_string_pretty(report).map_err(|e| CliError::Stage(e.to_string()))? + "\n"),
    )?;
    ctx.manifest.stage_counts.collection = s3.provenance.filter_log.clone();
    Ok(count([
        ("posts_loaded", store.posts.len()),
        ("comments_loaded", store.comments.len()),
        ("records_rejected", report.rejected()),
        ("posts_kept", s3.posts.len()),
        ("comments_kept", s3.comments.len()),
    ]))
}

// -------------------------------------------------------------- verdicts

#[derive(Debug, Serialize, Deserialize)]
struct VerdictRow {
    comment_id: String,
    post_id: String,
    verdict: String,
}

fn verdicts(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let store = load_corpus_files(&ctx.need(POSTS)?, &ctx.need(COMMENTS)?)?;
    let ex = extractor(ctx.cfg)?;
    let mut rows = Vec::new();
    let mut by_code: BTreeMap<String, usize> = Verdict::ALL.iter().map(|v| (v.code().to_string(), 0)).collect();
    let mut missing = 0usize;
    for c in store.comments.values() {
        match ex.extract(&c.body) {
            Some(v) => {
                *by_code.entry(v.code().to_string()).or_default() += 1;
                rows.push(VerdictRow { comment_id: c.id.clone(), post_id: c.post_id().to_string(), verdict: v.code().into() });
            }
            None => missing += 1,
        }
    }
    write_csv(&ctx.path(VERDICTS), &rows, &["comment_id", "post_id", "verdict"])?;
    let mut counts = count([("comments", rows.len()), ("no_verdict", missing)]);
    counts.extend(by_code.into_iter().map(|(k, v)| (format!("verdict_{k}"), Value::from(v))));
    Ok(counts)
}

// ------------------------------------------------------------- instances

#[derive(Debug, Serialize, Deserialize)]
struct TripleRow {
    instance_id: String,
    subject: Option<String>,
    predicate: String,
    object: Option<String>,
    passive: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct SparkRow {
    instance_id: String,
    is_spark: u8,
    n_quoting_comments: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct BlameRow {
    instance_id: String,
    comment_id: String,
    subject_is_author: u8,
    verdict: String,
    blameworthy: u8,
}

fn instances(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let store = load_corpus_files(&ctx.need(POSTS)?, &ctx.need(COMMENTS)?)?;
    let verdict_rows: Vec<VerdictRow> = read_csv(&ctx.need(VERDICTS)?)?;
    let verdict_of: BTreeMap<String, Verdict> = verdict_rows
        .into_iter()
        .map(|r| Ok((r.comment_id, r.verdict.parse::<Verdict>()?)))
        .collect::<Result<_, spark_core::Error>>()?;

    let stop = Stopwords::default();
    let parsed: Vec<Instance> = store.posts.values().flat_map(|p| split_instances(p, &ctx.parser, &stop)).collect();
    let quoting: Vec<_> = store.comments.values().filter(|c| c.is_top_level()).cloned().collect();
    let (labels, unmatched) = label_sparks(&parsed, &quoting, ctx.cfg.match_threshold);
    let label_of: BTreeMap<&str, _> = labels.iter().map(|l| (l.instance_id.as_str(), l)).collect();
    let parsed_sparks = labels.iter().filter(|l| l.is_spark).count();
    let n_parsed = parsed.len();

    let kept = filter_instances(parsed);
    let extractor = DependencyTripleExtractor;
    let mut triples = Vec::new();
    let mut sparks = Vec::new();
    let mut blame = Vec::new();
    for inst in &kept {
        let label = label_of[inst.id.as_str()];
        sparks.push(SparkRow {
            instance_id: inst.id.clone(),
            is_spark: u8::from(label.is_spark),
            n_quoting_comments: label.quoting_comment_ids.len(),
        });
        let Some(t) = extract_triple(inst, &extractor) else { continue };
        for cid in &label.quoting_comment_ids {
            let Some(&v) = verdict_of.get(cid) else {
                log::warn!("comment {cid} has no verdict row");
                continue;
            };
            if let Some(b) = label_blame(inst, &t, v, cid) {
                blame.push(BlameRow {
                    instance_id: b.instance_id,
                    comment_id: b.comment_id,
                    subject_is_author: u8::from(b.subject_is_author),
                    verdict: b.verdict.code().into(),
                    blameworthy: b.blameworthy,
                });
            }
        }
        let EventTriple { instance_id, subject, predicate, object, passive, .. } = t;
        triples.push(TripleRow { instance_id, subject, predicate, object, passive });
    }
    let kept_sparks = sparks.iter().filter(|s| s.is_spark == 1).count();

    write_jsonl(&ctx.path(INSTANCES), &kept)?;
    write_jsonl(&ctx.path(TRIPLES), &triples)?;
    write_csv(&ctx.path(SPARK_LABELS), &sparks, &["instance_id", "is_spark", "n_quoting_comments"])?;
    write_csv(
        &ctx.path(BLAME_LABELS),
        &blame,
        &["instance_id", "comment_id", "subject_is_author", "verdict", "blameworthy"],
    )?;
    write_jsonl(&ctx.path(UNMATCHED), &unmatched)?;
    let log = vec![
        InstanceStageCount {
            stage: format!("Parse instances from {} posts", store.posts.len()),
            instances: n_parsed,
            sparks: parsed_sparks,
        },
        InstanceStageCount { stage: "Select suitable instances".into(), instances: kept.len(), sparks: kept_sparks },
    ];
    write_csv(&ctx.path(INSTANCE_LOG), &log, &["stage", "instances", "sparks"])?;
    ctx.manifest.stage_counts.instances = log;
    Ok(count([
        ("instances_parsed", n_parsed),
        ("instances_kept", kept.len()),
        ("sparks", kept_sparks),
        ("triples", triples.len()),
        ("blame_labels", blame.len()),
        ("unmatched_quotes", unmatched.len()),
    ]))
}

fn load_instances(ctx: &Ctx) -> Result<Vec<Instance>, CliError> {
    let mut v: Vec<Instance> = read_jsonl(&ctx.need(INSTANCES)?)?;
    for inst in &mut v {
        inst.reparse(&ctx.parser)?;
    }
    Ok(v)
}

fn load_sparks(ctx: &Ctx) -> Result<BTreeMap<String, u8>, CliError> {
    let rows: Vec<SparkRow> = read_csv(&ctx.need(SPARK_LABELS)?)?;
    Ok(rows.into_iter().map(|r| (r.instance_id, r.is_spark)).collect())
}

// ----------------------------------------------------------------- align

fn align_stage(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let insts = load_instances(ctx)?;
    let sparks = load_sparks(ctx)?;
    let mut kg = kg::load_atomic(&ctx.cfg.kg_path, &ctx.parser)?;
    let scorer: Box<dyn SemanticScorer> = match ctx.cfg.scorer {
        ScorerKind::IdfOverlap => Box::new(IdfOverlapScorer::from_texts(kg.events.values().map(|e| e.text.as_str()))),
        ScorerKind::GreedyMatch => Box::new(GreedyMatchScorer { embedder: ctx.embedder() }),
    };
    let results: Vec<AlignmentResult> =
        insts.iter().map(|i| align(i, &kg, scorer.as_ref(), &ctx.cfg.align)).collect::<Result<_, _>>()?;
    count_frequencies(&mut kg, &results);
    write_alignments(&results, &ctx.path(ALIGNMENTS))?;
    let used: Vec<&CEvent> = kg.events.values().filter(|e| e.frequency > 0).collect();
    write_jsonl(&ctx.path(EVENTS), &used)?;

    let aligned: Vec<&AlignmentResult> = results.iter().filter(|r| !r.top3.is_empty()).collect();
    let aligned_sparks = aligned.iter().filter(|r| sparks.get(&r.instance_id) == Some(&1)).count();
    let row = InstanceStageCount { stage: ALIGN_STAGE_NAME.into(), instances: aligned.len(), sparks: aligned_sparks };
    let log = &mut ctx.manifest.stage_counts.instances;
    log.retain(|r| r.stage != ALIGN_STAGE_NAME);
    log.push(row);
    Ok(count([
        ("kg_events", kg.events.len()),
        ("instances", results.len()),
        ("aligned_instances", aligned.len()),
        ("aligned_sparks", aligned_sparks),
        ("events_used", used.len()),
    ]))
}

fn load_alignments(ctx: &Ctx) -> Result<Vec<(String, Vec<String>)>, CliError> {
    Ok(read_alignments(&ctx.need(ALIGNMENTS)?)?
        .into_iter()
        .map(|(id, top)| (id, top.into_iter().map(|(e, _)| e).collect()))
        .collect())
}

fn load_events(ctx: &Ctx) -> Result<BTreeMap<String, CEvent>, CliError> {
    let v: Vec<CEvent> = read_jsonl(&ctx.need(EVENTS)?)?;
    Ok(v.into_iter().map(|e| (e.id.clone(), e)).collect())
}

// --------------------------------------------------------------- cluster

#[derive(Debug, Serialize, Deserialize)]
struct DomainRow {
    event_id: String,
    cluster_id: i64,
    domain: String,
}

fn read_cluster_names(path: &Path) -> Result<BTreeMap<i64, String>, CliError> {
    #[derive(Deserialize)]
    struct Row {
        cluster_id: i64,
        name: String,
    }
    let rows: Vec<Row> = read_csv(path)?;
    Ok(rows.into_iter().map(|r| (r.cluster_id, r.name)).collect())
}

fn cluster_stage(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let events = load_events(ctx)?;
    let alignments: Vec<AlignmentResult> = load_alignments(ctx)?
        .into_iter()
        .map(|(instance_id, top3)| AlignmentResult {
            instance_id,
            candidate_pool: vec![],
            refined_pool: vec![],
            ranked: vec![],
            top3,
        })
        .collect();
    let kg = KgStore { events, ..Default::default() };
    let frequent = frequency_filter(&alignments, &kg, ctx.cfg.min_event_count)?;
    let ids: Vec<String> = frequent.iter().map(|e| e.id.clone()).collect();
    let points = embed_events(&frequent, &ctx.embedder())?;
    let (model, tuning) = cluster::cluster_events(&ids, &points, &ctx.cfg.cluster)?;
    let names = match &ctx.cfg.cluster_names {
        Some(p) => read_cluster_names(p)?,
        None => BTreeMap::new(),
    };
    let domains = drop_noise(&model.labels, &names)?;
    write_clusters_csv(&model.labels, &ctx.path(CLUSTERS))?;
    write_tuning_log(&tuning.history, &ctx.path(TUNING_LOG))?;
    let rows: Vec<DomainRow> = domains
        .clusters
        .iter()
        .map(|(id, &c)| DomainRow { event_id: id.clone(), cluster_id: c, domain: domains.name_of(c) })
        .collect();
    write_csv(&ctx.path(DOMAINS), &rows, &["event_id", "cluster_id", "domain"])?;
    let doc = json!({ "model": model, "cluster_names": names, "tuning_evaluations": tuning.history.len() });
    write_string(
        &ctx.path(CLUSTER_MODEL),
        &(serde_json::to_string_pretty(&doc).map_err(|e| CliError::Stage(e.to_string()))? + "\n"),
    )?;
    let noise = model.labels.len() - domains.clusters.len();
    Ok(count([
        ("frequent_events", Value::from(ids.len())),
        ("clusters", Value::from(model.n_clusters())),
        ("noise_events", Value::from(noise)),
        ("dbcv", Value::from(model.dbcv)),
    ]))
}

fn load_domains(ctx: &Ctx) -> Result<BTreeMap<String, String>, CliError> {
    let rows: Vec<DomainRow> = read_csv(&ctx.need(DOMAINS)?)?;
    Ok(rows.into_iter().map(|r| (r.event_id, r.domain)).collect())
}

// -------------------------------------------------------------- features

fn lexicons(cfg: &RunConfig) -> Result<LexiconSet, CliError> {
    Ok(match &cfg.lexicon_dir {
        Some(d) => LexiconSet::load_dir(d)?,
        None => LexiconSet::bundled(),
    })
}

fn features(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let insts = load_instances(ctx)?;
    let aligned: BTreeSet<String> =
        load_alignments(ctx)?.into_iter().filter(|(_, top)| !top.is_empty()).map(|(id, _)| id).collect();
    let lex = lexicons(ctx.cfg)?;
    let scorer = LexiconSentiment::new(lex.sentiment.clone());
    let vectors: Vec<_> = insts
        .iter()
        .filter(|i| !ctx.cfg.exclude_unaligned || aligned.contains(&i.id))
        .map(|i| {
            let mut v = build_feature_vector(i, &extract_characters(i), &lex, &scorer);
            v.sentiment_category = sentiment_category_with(v.sentiment_compound, ctx.cfg.sentiment_threshold);
            v
        })
        .collect();
    write_features_csv(&vectors, &ctx.path(FEATURES))?;
    write_cha_features_csv(&vectors, &ctx.path(CHA_FEATURES))?;
    let mentions: usize = vectors.iter().map(|v| v.characters.len()).sum();
    Ok(count([
        ("instances", vectors.len()),
        ("features", vectors.first().map_or(0, |v| v.post_features.len())),
        ("character_mentions", mentions),
    ]))
}

/// Per-instance means of connotation scores and maxima of the power and
/// agency flags, split by author and other characters.
fn character_aggregates(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers().map_err(spark_core::Error::from)?.iter().map(String::from).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(id_col), Some(author_col)) = (col("instance_id"), col("is_author")) else {
        return Err(CliError::Data(format!("{}: missing instance_id/is_author columns", path.display())));
    };
    let conn: Vec<(String, usize)> =
        CONNOTATION_DIMS.iter().filter_map(|d| col(&format!("conn_{d}")).map(|c| (format!("conn_{d}"), c))).collect();
    let flags: Vec<(String, usize)> = ["power", "agency"].iter().filter_map(|f| col(f).map(|c| (f.to_string(), c))).collect();
    // (instance, role) -> (sums, count, flag maxima)
    let mut acc: BTreeMap<(String, &str), (BTreeMap<String, f64>, usize)> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(spark_core::Error::from)?;
        let num = |k: usize| -> Result<f64, CliError> {
            rec.get(k)
                .unwrap_or_default()
                .parse()
                .map_err(|_| CliError::Data(format!("{}: bad number in column {}", path.display(), header[k])))
        };
        let role = if num(author_col)? == 1.0 { "author" } else { "other" };
        let e = acc.entry((rec[id_col].to_string(), role)).or_default();
        e.1 += 1;
        for (name, k) in &conn {
            *e.0.entry(name.clone()).or_default() += num(*k)?;
        }
        for (name, k) in &flags {
            let m = e.0.entry(name.clone()).or_default();
            *m = m.max(num(*k)?);
        }
    }
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((id, role), (vals, n)) in acc {
        let row = out.entry(id).or_default();
        for (name, v) in vals {
            let v = if name.starts_with("conn_") { v / n as f64 } else { v };
            row.insert(format!("{role}_{name}"), v);
        }
    }
    Ok(out)
}

// --------------------------------------------------------------- regress

#[derive(Debug, Serialize, Deserialize)]
struct FrequencyRow {
    screen: String,
    feature: String,
    frequency: usize,
}

fn nonzero(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

fn regress(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let alpha = ctx.cfg.alpha;
    let sparks = load_sparks(ctx)?;
    let alignments = load_alignments(ctx)?;
    let domain_of = load_domains(ctx)?;
    let feature_rows = read_features_csv(&ctx.need(FEATURES)?)?;
    let cha = character_aggregates(&ctx.need(CHA_FEATURES)?)?;
    let blame: Vec<BlameRow> = read_csv(&ctx.need(BLAME_LABELS)?)?;
    let events: Vec<String> = domain_of.keys().cloned().collect();
    let top_of: BTreeMap<&str, Vec<&str>> = alignments
        .iter()
        .map(|(id, top)| (id.as_str(), top.iter().map(String::as_str).filter(|e| domain_of.contains_key(*e)).collect()))
        .collect();
    let mut freq = Vec::new();

    // commonsense: one row per (instance, clustered aligned event)
    let mut rows: Vec<(&str, &str)> = Vec::new();
    for (id, top) in &top_of {
        if sparks.contains_key(*id) {
            rows.extend(top.iter().map(|e| (*id, *e)));
        }
    }
    let y: Vec<f64> = rows.iter().map(|(id, _)| f64::from(sparks[*id])).collect();
    let dummies = Dummies::from_labels(&rows.iter().map(|(_, e)| domain_of[*e].clone()).collect::<Vec<_>>());
    let cols: Vec<(String, Vec<f64>)> = events
        .iter()
        .map(|e| (e.clone(), rows.iter().map(|(_, r)| f64::from(u8::from(r == e))).collect()))
        .collect();
    freq.extend(cols.iter().map(|(f, x)| FrequencyRow { screen: "commonsense".into(), feature: f.clone(), frequency: nonzero(x) }));
    let commonsense = screen(&cols, &dummies, &y, alpha, "commonsense");
    write_regression_csv(&commonsense, &ctx.path(REG_COMMONSENSE))?;

    // linguistic: one row per aligned instance with a clustered event; the
    // domain is that of its best-ranked clustered event
    let mut ling_ids = Vec::new();
    let mut ling_domains = Vec::new();
    for (id, _) in &feature_rows {
        if let (Some(top), Some(_)) = (top_of.get(id.as_str()), sparks.get(id)) {
            if let Some(first) = top.first() {
                ling_ids.push(id.as_str());
                ling_domains.push(domain_of[*first].clone());
            }
        }
    }
    let feat_of: BTreeMap<&str, &BTreeMap<String, f64>> = feature_rows.iter().map(|(id, m)| (id.as_str(), m)).collect();
    let mut names: BTreeSet<String> = feature_rows.first().map(|(_, m)| m.keys().cloned().collect()).unwrap_or_default();
    names.remove("sentiment_category");
    let cha_names: BTreeSet<String> = cha.values().flat_map(|m| m.keys().cloned()).collect();
    let empty = BTreeMap::new();
    let mut ling_cols: Vec<(String, Vec<f64>)> = names
        .iter()
        .map(|n| (n.clone(), ling_ids.iter().map(|id| feat_of[id].get(n).copied().unwrap_or(0.0)).collect()))
        .collect();
    ling_cols.extend(cha_names.iter().map(|n| {
        (n.clone(), ling_ids.iter().map(|id| cha.get(*id).unwrap_or(&empty).get(n).copied().unwrap_or(0.0)).collect())
    }));
    freq.extend(ling_cols.iter().map(|(f, x)| FrequencyRow { screen: "linguistic".into(), feature: f.clone(), frequency: nonzero(x) }));
    let ly: Vec<f64> = ling_ids.iter().map(|id| f64::from(sparks[*id])).collect();
    let linguistic = screen(&ling_cols, &Dummies::from_labels(&ling_domains), &ly, alpha, "linguistic");
    write_regression_csv(&linguistic, &ctx.path(REG_LINGUISTIC))?;

    // judgment: one row per (spark, quoting comment) with a blame label
    let jrows: Vec<&BlameRow> =
        blame.iter().filter(|b| top_of.get(b.instance_id.as_str()).is_some_and(|t| !t.is_empty())).collect();
    let jy: Vec<f64> = jrows.iter().map(|b| f64::from(b.blameworthy)).collect();
    let jdomains: Vec<String> = jrows.iter().map(|b| domain_of[top_of[b.instance_id.as_str()][0]].clone()).collect();
    let jcols: Vec<(String, Vec<f64>)> = events
        .iter()
        .map(|e| {
            let x = jrows.iter().map(|b| f64::from(u8::from(top_of[b.instance_id.as_str()].contains(&e.as_str())))).collect();
            (e.clone(), x)
        })
        .collect();
    freq.extend(jcols.iter().map(|(f, x)| FrequencyRow { screen: "judgment".into(), feature: f.clone(), frequency: nonzero(x) }));
    let judgment = screen(&jcols, &Dummies::from_labels(&jdomains), &jy, alpha, "judgment");
    write_regression_csv(&judgment, &ctx.path(REG_JUDGMENT))?;

    let mut corr = Vec::new();
    for (e, x) in &jcols {
        match spearman(x, &jy) {
            Ok(c) => corr.push(CorrelationRow { cevent_id: e.clone(), rho: c.rho, p: c.p, n: c.n }),
            Err(err) => log::debug!("no correlation for {e}: {err}"),
        }
    }
    write_correlation_csv(&corr, &ctx.path(CORRELATIONS))?;
    write_csv(&ctx.path(FREQUENCIES), &freq, &["screen", "feature", "frequency"])?;

    let sig = |rows: &[spark_core::stats::RegressionResult]| rows.iter().filter(|r| r.significant).count();
    Ok(count([
        ("commonsense_rows", y.len()),
        ("commonsense_features", commonsense.len()),
        ("commonsense_significant", sig(&commonsense)),
        ("linguistic_rows", ly.len()),
        ("linguistic_features", linguistic.len()),
        ("linguistic_significant", sig(&linguistic)),
        ("judgment_rows", jy.len()),
        ("judgment_significant", sig(&judgment)),
        ("correlations", corr.len()),
    ]))
}

/// A screen over no rows or a one-class response records that on every
/// feature row instead of failing the stage.
fn screen(cols: &[(String, Vec<f64>)], dummies: &Dummies, y: &[f64], alpha: f64, what: &str) -> Vec<spark_core::stats::RegressionResult> {
    if y.is_empty() {
        log::warn!("{what} screen has no observations");
    }
    run_feature_screen(cols, dummies, y, alpha)
}

// ---------------------------------------------------------------- report

#[derive(Debug, Serialize)]
struct StageLogRow {
    table: &'static str,
    stage: String,
    posts: Option<usize>,
    comments: Option<usize>,
    instances: Option<usize>,
    sparks: Option<usize>,
    spark_pct: Option<String>,
}

fn report(ctx: &mut Ctx) -> Result<Counts, CliError> {
    let alpha = ctx.cfg.alpha;
    let top_n = ctx.cfg.top_n;
    let events = load_events(ctx)?;
    let freq: Vec<FrequencyRow> = read_csv(&ctx.need(FREQUENCIES)?)?;
    let info_for = |screen: &str, event_labels: bool| -> BTreeMap<String, FeatureInfo> {
        freq.iter()
            .filter(|f| f.screen == screen)
            .map(|f| {
                let label = match events.get(&f.feature) {
                    Some(e) if event_labels => event_label(&e.text, &e.attributes),
                    _ => f.feature.clone(),
                };
                (f.feature.clone(), FeatureInfo { label, frequency: f.frequency })
            })
            .collect()
    };
    let mut counts = Counts::new();
    for (screen, file, event_labels) in
        [("commonsense", REG_COMMONSENSE, true), ("linguistic", REG_LINGUISTIC, false), ("judgment", REG_JUDGMENT, true)]
    {
        let results = read_regression_csv(&ctx.need(file)?, alpha)?;
        let rows = emit_or_chart(&results, &info_for(screen, event_labels), top_n, ctx.out, &format!("or_chart_{screen}"))?;
        counts.insert(format!("or_chart_{screen}_rows"), rows.len().into());
    }
    let corr = read_correlation_csv(&ctx.need(CORRELATIONS)?)?;
    let labels: BTreeMap<String, String> =
        events.values().map(|e| (e.id.clone(), event_label(&e.text, &e.attributes))).collect();
    let blame = emit_blame_table(&corr, &labels, ctx.out, "blame_table")?;
    counts.insert("blame_table_rows".into(), blame.len().into());

    let mut log: Vec<StageLogRow> = Vec::new();
    let collection: Vec<corpus::StageCount> = read_csv(&ctx.need(FILTER_LOG)?)?;
    log.extend(collection.into_iter().map(|s| StageLogRow {
        table: "collection",
        stage: s.stage,
        posts: Some(s.posts),
        comments: Some(s.comments),
        instances: None,
        sparks: None,
        spark_pct: None,
    }));
    let mut inst_rows: Vec<InstanceStageCount> = read_csv(&ctx.need(INSTANCE_LOG)?)?;
    let sparks = load_sparks(ctx)?;
    let aligned: Vec<String> =
        load_alignments(ctx)?.into_iter().filter(|(_, t)| !t.is_empty()).map(|(id, _)| id).collect();
    inst_rows.push(InstanceStageCount {
        stage: ALIGN_STAGE_NAME.into(),
        instances: aligned.len(),
        sparks: aligned.iter().filter(|id| sparks.get(*id) == Some(&1)).count(),
    });
    log.extend(inst_rows.into_iter().map(|r| StageLogRow {
        table: "instances",
        spark_pct: Some(if r.instances == 0 {
            "0".into()
        } else {
            format!("{:.0}", 100.0 * r.sparks as f64 / r.instances as f64)
        }),
        stage: r.stage,
        posts: None,
        comments: None,
        instances: Some(r.instances),
        sparks: Some(r.sparks),
    }));
    write_csv(&ctx.path(STAGE_LOG), &log, &["table", "stage", "posts", "comments", "instances", "sparks", "spark_pct"])?;
    counts.insert("stage_log_rows".into(), log.len().into());
    Ok(counts)
}
