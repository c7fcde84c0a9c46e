//! Discussion-tree corpus: loading line-delimited post/comment dumps and the
//! three collection filters (rule-based collection, comment quality, quoting
//! comments).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{DateTime, TimeZone, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::word_count;
use crate::verdict::Verdict;

pub const STAGE_RULE_BASED: &str = "rule-based collection";
pub const STAGE_COMMENT_QUALITY: &str = "comment quality filter";
pub const STAGE_QUOTING: &str = "quoting comments selection";

/// Largest tolerated share of malformed lines in one input file.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

const DELETED_SENTINELS: &[&str] = &["[deleted]", "[removed]"];
const MODERATOR_AUTHORS: &[&str] = &["AutoModerator"];

/// Strips Reddit "fullname" kind prefixes (`t1_`, `t3_`) so post ids, link
/// ids and parent ids compare equal.
pub fn base_id(id: &str) -> &str {
    for prefix in ["t1_", "t3_"] {
        if let Some(rest) = id.strip_prefix(prefix) {
            return rest;
        }
    }
    id
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author_id: String,
    pub created_at: DateTime<Utc>,
    pub title: String,
    pub body: String,
    pub is_deleted: bool,
    pub is_moderator: bool,
}

impl Post {
    pub fn word_count(&self) -> usize {
        word_count(&self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub link_id: String,
    pub parent_id: String,
    pub author_id: String,
    pub body: String,
    pub is_deleted: bool,
    pub is_moderator: bool,
    pub vote_score: i64,
}

impl Comment {
    pub fn is_top_level(&self) -> bool {
        base_id(&self.parent_id) == base_id(&self.link_id)
    }

    pub fn post_id(&self) -> &str {
        base_id(&self.link_id)
    }

    pub fn word_count(&self) -> usize {
        word_count(&self.body)
    }

    fn is_valid(&self) -> bool {
        !self.is_deleted && !self.is_moderator
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct PostRecord {
    id: String,
    author_id: String,
    created_utc: i64,
    title: String,
    body: String,
    #[serde(default)]
    deleted: bool,
    #[serde(default)]
    moderator: bool,
}

#[derive(Debug, Deserialize, Serialize)]
struct CommentRecord {
    id: String,
    link_id: String,
    parent_id: String,
    author_id: String,
    body: String,
    #[serde(default)]
    deleted: bool,
    #[serde(default)]
    moderator: bool,
    #[serde(default)]
    score: i64,
}

fn is_deleted_text(s: &str) -> bool {
    DELETED_SENTINELS.contains(&s.trim())
}

impl PostRecord {
    fn into_post(self) -> Result<Post> {
        let created_at = Utc
            .timestamp_opt(self.created_utc, 0)
            .single()
            .ok_or_else(|| Error::InvalidInput(format!("created_utc {} out of range", self.created_utc)))?;
        Ok(Post {
            is_deleted: self.deleted || is_deleted_text(&self.author_id) || is_deleted_text(&self.body),
            is_moderator: self.moderator || MODERATOR_AUTHORS.contains(&self.author_id.as_str()),
            id: base_id(&self.id).to_string(),
            author_id: self.author_id,
            created_at,
            title: self.title,
            body: self.body,
        })
    }

    fn from_post(p: &Post) -> Self {
        PostRecord {
            id: p.id.clone(),
            author_id: p.author_id.clone(),
            created_utc: p.created_at.timestamp(),
            title: p.title.clone(),
            body: p.body.clone(),
            deleted: p.is_deleted,
            moderator: p.is_moderator,
        }
    }
}

impl CommentRecord {
    fn into_comment(self) -> Comment {
        Comment {
            is_deleted: self.deleted || is_deleted_text(&self.author_id) || is_deleted_text(&self.body),
            is_moderator: self.moderator || MODERATOR_AUTHORS.contains(&self.author_id.as_str()),
            id: base_id(&self.id).to_string(),
            link_id: self.link_id,
            parent_id: self.parent_id,
            author_id: self.author_id,
            body: self.body,
            vote_score: self.score,
        }
    }

    fn from_comment(c: &Comment) -> Self {
        CommentRecord {
            id: c.id.clone(),
            link_id: c.link_id.clone(),
            parent_id: c.parent_id.clone(),
            author_id: c.author_id.clone(),
            body: c.body.clone(),
            deleted: c.is_deleted,
            moderator: c.is_moderator,
            score: c.vote_score,
        }
    }
}

/// A record that did not make it into the store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub file: PathBuf,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub post_lines: usize,
    pub comment_lines: usize,
    pub malformed: Vec<Rejection>,
    pub dangling: Vec<Rejection>,
    pub duplicates: Vec<Rejection>,
}

impl LoadReport {
    pub fn rejected(&self) -> usize {
        self.malformed.len() + self.dangling.len() + self.duplicates.len()
    }
}

/// One row of the collection stage table: `stage,posts,comments`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub posts: usize,
    pub comments: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: PathBuf,
    pub loaded_at: Option<DateTime<Utc>>,
    pub load_report: LoadReport,
    pub filter_log: Vec<StageCount>,
}

/// Immutable after construction; every filter returns a new store.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStore {
    pub posts: BTreeMap<String, Post>,
    pub comments: BTreeMap<String, Comment>,
    pub provenance: Provenance,
}

impl CorpusStore {
    pub fn from_parts(posts: Vec<Post>, comments: Vec<Comment>) -> Result<Self> {
        let mut store = CorpusStore::default();
        for p in posts {
            if store.posts.insert(p.id.clone(), p).is_some() {
                return Err(Error::InvalidInput("duplicate post id".into()));
            }
        }
        for c in comments {
            if !store.posts.contains_key(c.post_id()) {
                return Err(Error::InvalidInput(format!("dangling reference: comment {} -> {}", c.id, c.link_id)));
            }
            store.comments.insert(c.id.clone(), c);
        }
        Ok(store)
    }

    pub fn top_level_count(&self) -> usize {
        self.comments.values().filter(|c| c.is_top_level()).count()
    }

    pub fn comments_of<'a>(&'a self, post_id: &'a str) -> impl Iterator<Item = &'a Comment> + 'a {
        self.comments.values().filter(move |c| c.post_id() == post_id)
    }

    fn derive(&self, posts: BTreeMap<String, Post>, comments: BTreeMap<String, Comment>, stage: &str) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.filter_log.push(StageCount {
            stage: stage.to_string(),
            posts: posts.len(),
            comments: comments.len(),
        });
        if posts.is_empty() {
            log::warn!("stage '{stage}' left no posts");
        }
        CorpusStore { posts, comments, provenance }
    }

    pub fn write_jsonl(&self, posts_path: &Path, comments_path: &Path) -> Result<()> {
        let mut out = File::create(posts_path).map_err(|e| Error::io(posts_path, e))?;
        for p in self.posts.values() {
            writeln!(out, "{}", serde_json::to_string(&PostRecord::from_post(p))?).map_err(|e| Error::io(posts_path, e))?;
        }
        let mut out = File::create(comments_path).map_err(|e| Error::io(comments_path, e))?;
        for c in self.comments.values() {
            writeln!(out, "{}", serde_json::to_string(&CommentRecord::from_comment(c))?)
                .map_err(|e| Error::io(comments_path, e))?;
        }
        Ok(())
    }
}

fn read_records<T: for<'de> Deserialize<'de>>(path: &Path, report: &mut LoadReport) -> Result<(Vec<(usize, T)>, usize)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut total = 0usize;
    let mut bad = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match serde_json::from_str::<T>(&line) {
            Ok(rec) => records.push((idx + 1, rec)),
            Err(e) => {
                bad.push(idx + 1);
                report.malformed.push(Rejection {
                    file: path.to_path_buf(),
                    line: idx + 1,
                    reason: e.to_string(),
                });
            }
        }
    }
    if total > 0 && bad.len() as f64 / total as f64 > MAX_MALFORMED_FRACTION {
        return Err(Error::TooManyMalformed {
            path: path.to_path_buf(),
            malformed: bad.len(),
            total,
            lines: bad,
        });
    }
    Ok((records, total))
}

/// Loads `posts.jsonl` and `comments.jsonl` from `dir`.
pub fn load_corpus(dir: &Path) -> Result<CorpusStore> {
    load_corpus_files(&dir.join("posts.jsonl"), &dir.join("comments.jsonl"))
}

/// Loads a corpus from explicit post and comment files.
///
/// Deleted and moderator records are kept and flagged. Malformed lines are
/// counted; if more than 10% of a file is malformed loading fails with the
/// offending line numbers. Comments whose `link_id` names no loaded post are
/// rejected as dangling references.
pub fn load_corpus_files(posts_path: &Path, comments_path: &Path) -> Result<CorpusStore> {
    let mut report = LoadReport::default();
    let (post_recs, post_lines) = read_records::<PostRecord>(posts_path, &mut report)?;
    let (comment_recs, comment_lines) = read_records::<CommentRecord>(comments_path, &mut report)?;
    report.post_lines = post_lines;
    report.comment_lines = comment_lines;

    let mut posts = BTreeMap::new();
    for (line, rec) in post_recs {
        let post = match rec.into_post() {
            Ok(p) => p,
            Err(e) => {
                report.malformed.push(Rejection { file: posts_path.to_path_buf(), line, reason: e.to_string() });
                continue;
            }
        };
        if posts.contains_key(&post.id) {
            report.duplicates.push(Rejection {
                file: posts_path.to_path_buf(),
                line,
                reason: format!("duplicate post id {}", post.id),
            });
            continue;
        }
        posts.insert(post.id.clone(), post);
    }
    let mut comments = BTreeMap::new();
    for (line, rec) in comment_recs {
        let c = rec.into_comment();
        if !posts.contains_key(c.post_id()) {
            log::warn!("{}:{line}: dangling reference {}", comments_path.display(), c.link_id);
            report.dangling.push(Rejection {
                file: comments_path.to_path_buf(),
                line,
                reason: format!("dangling reference: link_id {} not in posts", c.link_id),
            });
            continue;
        }
        if comments.contains_key(&c.id) {
            report.duplicates.push(Rejection {
                file: comments_path.to_path_buf(),
                line,
                reason: format!("duplicate comment id {}", c.id),
            });
            continue;
        }
        comments.insert(c.id.clone(), c);
    }
    if !report.malformed.is_empty() {
        log::warn!("{} malformed records rejected", report.malformed.len());
    }
    Ok(CorpusStore {
        posts,
        comments,
        provenance: Provenance {
            source: posts_path.parent().map(Path::to_path_buf).unwrap_or_default(),
            loaded_at: Some(Utc::now()),
            load_report: report,
            filter_log: Vec::new(),
        },
    })
}

/// Rule-based collection: keeps non-deleted, non-moderator posts with at
/// least `min_words` body words and at least `min_top_comments` valid
/// top-level comments, together with their valid comments.
pub fn filter_posts(store: &CorpusStore, min_words: usize, min_top_comments: usize) -> CorpusStore {
    let mut top_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in store.comments.values() {
        if c.is_valid() && c.is_top_level() {
            *top_counts.entry(c.post_id()).or_default() += 1;
        }
    }
    let posts: BTreeMap<String, Post> = store
        .posts
        .iter()
        .filter(|(id, p)| {
            !p.is_deleted
                && !p.is_moderator
                && p.word_count() >= min_words
                && top_counts.get(id.as_str()).copied().unwrap_or(0) >= min_top_comments
        })
        .map(|(id, p)| (id.clone(), p.clone()))
        .collect();
    let comments = store
        .comments
        .iter()
        .filter(|(_, c)| c.is_valid() && posts.contains_key(c.post_id()))
        .map(|(id, c)| (id.clone(), c.clone()))
        .collect();
    store.derive(posts, comments, STAGE_RULE_BASED)
}

/// Comment quality filter: keeps valid top-level comments with at least
/// `min_words` words and a verdict; posts left without comments are dropped.
pub fn filter_comments<F>(store: &CorpusStore, min_words: usize, verdict_fn: F) -> CorpusStore
where
    F: Fn(&str) -> Option<Verdict>,
{
    let comments: BTreeMap<String, Comment> = store
        .comments
        .iter()
        .filter(|(_, c)| c.is_valid() && c.is_top_level() && c.word_count() >= min_words && verdict_fn(&c.body).is_some())
        .map(|(id, c)| (id.clone(), c.clone()))
        .collect();
    let posts = retain_posts_with_comments(store, &comments);
    store.derive(posts, comments, STAGE_COMMENT_QUALITY)
}

/// Keeps comments containing at least one quote line and the posts they
/// answer.
pub fn select_quoting_comments(store: &CorpusStore) -> CorpusStore {
    let comments: BTreeMap<String, Comment> = store
        .comments
        .iter()
        .filter(|(_, c)| has_quote(&c.body))
        .map(|(id, c)| (id.clone(), c.clone()))
        .collect();
    let posts = retain_posts_with_comments(store, &comments);
    store.derive(posts, comments, STAGE_QUOTING)
}

fn retain_posts_with_comments(store: &CorpusStore, comments: &BTreeMap<String, Comment>) -> BTreeMap<String, Post> {
    store
        .posts
        .iter()
        .filter(|(id, _)| comments.values().any(|c| c.post_id() == id.as_str()))
        .map(|(id, p)| (id.clone(), p.clone()))
        .collect()
}

fn quote_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Markdown blockquote marker, raw or HTML-escaped as in archived dumps
    RE.get_or_init(|| Regex::new(r"^\s*(?:>|&gt;)").unwrap())
}

fn strip_markers(line: &str) -> &str {
    let mut rest = line.trim_start();
    loop {
        if let Some(r) = rest.strip_prefix('>') {
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix("&gt;") {
            rest = r.trim_start();
        } else {
            return rest.trim_end();
        }
    }
}

pub fn has_quote(body: &str) -> bool {
    body.lines().any(|l| quote_marker().is_match(l))
}

/// Every maximal run of consecutive quote lines, markers stripped and lines
/// joined by single spaces. Blank or unquoted lines end a run.
pub fn extract_quotes(comment_body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut run: Vec<&str> = Vec::new();
    let flush = |run: &mut Vec<&str>, out: &mut Vec<String>| {
        let joined = run.iter().filter(|s| !s.is_empty()).copied().collect::<Vec<_>>().join(" ");
        if !joined.is_empty() {
            out.push(joined);
        }
        run.clear();
    };
    for line in comment_body.lines() {
        if quote_marker().is_match(line) {
            run.push(strip_markers(line));
        } else {
            flush(&mut run, &mut out);
        }
    }
    flush(&mut run, &mut out);
    out
}

pub fn write_filter_log(log: &[StageCount], path: &Path) -> Result<()> {
    let mut out = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut s = String::from("stage,posts,comments\n");
    for row in log {
        s.push_str(&format!("{},{},{}\n", row.stage, row.posts, row.comments));
    }
    out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn post_line(id: &str, words: usize) -> String {
        let body = vec!["word"; words].join(" ");
        format!(r#"{{"id":"{id}","author_id":"a_{id}","created_utc":1600000000,"title":"t","body":"{body}","deleted":false,"moderator":false}}"#)
    }

    fn comment_line(id: &str, post: &str, parent: &str, body: &str) -> String {
        format!(r#"{{"id":"{id}","link_id":"t3_{post}","parent_id":"{parent}","author_id":"u","body":"{body}","deleted":false,"moderator":false,"score":1}}"#)
    }

    fn write_dir(posts: &[String], comments: &[String]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let mut f = File::create(dir.path().join("posts.jsonl")).unwrap();
        for l in posts {
            writeln!(f, "{l}").unwrap();
        }
        let mut f = File::create(dir.path().join("comments.jsonl")).unwrap();
        for l in comments {
            writeln!(f, "{l}").unwrap();
        }
        dir
    }

    #[test]
    fn loads_two_posts_three_comments() {
        let dir = write_dir(
            &[post_line("p1", 60), post_line("p2", 60)],
            &[
                comment_line("c1", "p1", "t3_p1", "NTA"),
                comment_line("c2", "p1", "t1_c1", "reply"),
                comment_line("c3", "p2", "t3_p2", "YTA"),
            ],
        );
        let store = load_corpus(dir.path()).unwrap();
        assert_eq!(store.posts.len(), 2);
        assert_eq!(store.comments.len(), 3);
        assert_eq!(store.top_level_count(), 2);
        assert_eq!(store.provenance.load_report.rejected(), 0);
    }

    #[test]
    fn missing_body_is_rejected() {
        let mut comments: Vec<String> = (0..10).map(|i| comment_line(&format!("c{i}"), "p1", "t3_p1", "ok")).collect();
        comments.push(r#"{"id":"bad","link_id":"t3_p1","parent_id":"t3_p1","author_id":"u","score":1}"#.to_string());
        let dir = write_dir(&[post_line("p1", 60)], &comments);
        let store = load_corpus(dir.path()).unwrap();
        assert_eq!(store.comments.len(), 10);
        let report = &store.provenance.load_report;
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].line, 11);
        assert!(report.malformed[0].reason.contains("body"));
    }

    #[test]
    fn dangling_link_is_rejected() {
        let dir = write_dir(
            &[post_line("p1", 60)],
            &[comment_line("c1", "p1", "t3_p1", "x"), comment_line("c2", "zzz", "t3_zzz", "x")],
        );
        let store = load_corpus(dir.path()).unwrap();
        assert_eq!(store.comments.len(), 1);
        let d = &store.provenance.load_report.dangling;
        assert_eq!(d.len(), 1);
        assert!(d[0].reason.contains("dangling reference"));
    }

    #[test]
    fn too_many_malformed_lines_is_fatal() {
        let dir = write_dir(&[post_line("p1", 60), "not json".into(), "{}".into()], &[]);
        match load_corpus(dir.path()) {
            Err(Error::TooManyMalformed { lines, malformed, total, .. }) => {
                assert_eq!(lines, vec![2, 3]);
                assert_eq!((malformed, total), (2, 3));
            }
            other => panic!("expected fatal error, got {other:?}"),
        }
    }

    #[test]
    fn unreadable_file_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn sentinels_flag_records() {
        let dir = write_dir(
            &[r#"{"id":"p1","author_id":"[deleted]","created_utc":1,"title":"t","body":"x"}"#.to_string()],
            &[r#"{"id":"c1","link_id":"t3_p1","parent_id":"t3_p1","author_id":"AutoModerator","body":"x"}"#.to_string()],
        );
        let store = load_corpus(dir.path()).unwrap();
        assert!(store.posts["p1"].is_deleted);
        assert!(store.comments["c1"].is_moderator);
    }

    fn quick_post(id: &str, words: usize, deleted: bool) -> Post {
        Post {
            id: id.into(),
            author_id: "a".into(),
            created_at: Utc.timestamp_opt(0, 0).unwrap(),
            title: String::new(),
            body: vec!["w"; words].join(" "),
            is_deleted: deleted,
            is_moderator: false,
        }
    }

    fn quick_comment(id: &str, post: &str, top: bool, body: &str) -> Comment {
        Comment {
            id: id.into(),
            link_id: format!("t3_{post}"),
            parent_id: if top { format!("t3_{post}") } else { "t1_x".into() },
            author_id: "u".into(),
            body: body.into(),
            is_deleted: false,
            is_moderator: false,
            vote_score: 0,
        }
    }

    fn with_comments(posts: Vec<Post>, per_post: &[(&str, usize)]) -> CorpusStore {
        let mut comments = Vec::new();
        for (pid, n) in per_post {
            for i in 0..*n {
                comments.push(quick_comment(&format!("{pid}_{i}"), pid, true, "NTA"));
            }
        }
        CorpusStore::from_parts(posts, comments).unwrap()
    }

    #[test]
    fn post_thresholds_are_inclusive() {
        let store = with_comments(
            vec![quick_post("a", 49, false), quick_post("b", 50, false), quick_post("c", 200, true)],
            &[("a", 12), ("b", 10), ("c", 20)],
        );
        let out = filter_posts(&store, 50, 10);
        assert_eq!(out.posts.keys().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(out.comments.len(), 10);
        assert_eq!(out.provenance.filter_log[0], StageCount { stage: STAGE_RULE_BASED.into(), posts: 1, comments: 10 });
    }

    #[test]
    fn comment_filter_rules() {
        let verdict = |s: &str| crate::verdict::VerdictExtractor::default().extract(s);
        let twenty = format!("NTA {}", vec!["w"; 19].join(" "));
        let fourteen = format!("NTA {}", vec!["w"; 13].join(" "));
        let forty = format!("YTA {}", vec!["w"; 39].join(" "));
        let store = CorpusStore::from_parts(
            vec![quick_post("p", 60, false)],
            vec![
                quick_comment("keep", "p", true, &twenty),
                quick_comment("short", "p", true, &fourteen),
                quick_comment("nested", "p", false, &forty),
            ],
        )
        .unwrap();
        let out = filter_comments(&store, 15, verdict);
        assert_eq!(out.comments.keys().collect::<Vec<_>>(), vec!["keep"]);
    }

    #[test]
    fn quoting_selection() {
        let store = CorpusStore::from_parts(
            vec![quick_post("p", 60, false), quick_post("q", 60, false)],
            vec![
                quick_comment("c1", "p", true, "> she took my car\nNTA"),
                quick_comment("c2", "q", true, "I think 2 > 1 here, NTA"),
            ],
        )
        .unwrap();
        let out = select_quoting_comments(&store);
        assert_eq!(out.comments.keys().collect::<Vec<_>>(), vec!["c1"]);
        assert_eq!(out.posts.keys().collect::<Vec<_>>(), vec!["p"]);
        assert_eq!(extract_quotes(&out.comments["c1"].body).len(), 1);
    }

    #[test]
    fn quote_runs() {
        assert_eq!(extract_quotes("> a\n> b\nreply"), vec!["a b"]);
        assert!(extract_quotes("no quotes here").is_empty());
        assert_eq!(extract_quotes("> first\ntext\n> second"), vec!["first", "second"]);
        assert_eq!(extract_quotes("> one\n> two\n\n> three"), vec!["one two", "three"]);
        assert_eq!(extract_quotes("  &gt; escaped\n>> nested"), vec!["escaped nested"]);
        assert!(extract_quotes("I think 2 > 1 here").is_empty());
    }

    #[test]
    fn base_ids() {
        assert_eq!(base_id("t3_abc"), "abc");
        assert_eq!(base_id("t1_abc"), "abc");
        assert_eq!(base_id("abc"), "abc");
    }

    fn random_store(posts: &[(usize, bool)], comments: &[(usize, bool, usize, bool)]) -> CorpusStore {
        let ps: Vec<Post> = posts.iter().enumerate().map(|(i, &(w, del))| quick_post(&format!("p{i}"), w, del)).collect();
        let cs: Vec<Comment> = comments
            .iter()
            .enumerate()
            .map(|(i, &(p, top, w, quote))| {
                let pid = format!("p{}", p % posts.len());
                let mut body = format!("NTA {}", vec!["w"; w].join(" "));
                if quote {
                    body = format!("> quoted\n{body}");
                }
                quick_comment(&format!("c{i}"), &pid, top, &body)
            })
            .collect();
        CorpusStore::from_parts(ps, cs).unwrap()
    }

    fn extractor() -> &'static crate::verdict::VerdictExtractor {
        static EX: OnceLock<crate::verdict::VerdictExtractor> = OnceLock::new();
        EX.get_or_init(Default::default)
    }

    fn stages(s: &CorpusStore, w: usize, t: usize, cw: usize) -> CorpusStore {
        let verdict = |b: &str| extractor().extract(b);
        select_quoting_comments(&filter_comments(&filter_posts(s, w, t), cw, verdict))
    }

    proptest::proptest! {
        #[test]
        fn filters_are_monotone_and_idempotent(
            posts in proptest::collection::vec((0usize..80, proptest::bool::weighted(0.1)), 1..8),
            comments in proptest::collection::vec((0usize..8, proptest::bool::weighted(0.8), 0usize..30, proptest::bool::ANY), 0..60),
            w in 0usize..80, dw in 0usize..30, t in 0usize..6, dt in 0usize..4, cw in 0usize..30, dcw in 0usize..10,
        ) {
            let s = random_store(&posts, &comments);
            let loose = stages(&s, w, t, cw);
            let strict = stages(&s, w + dw, t + dt, cw + dcw);
            proptest::prop_assert!(strict.posts.keys().all(|k| loose.posts.contains_key(k)));
            proptest::prop_assert!(strict.comments.keys().all(|k| loose.comments.contains_key(k)));
            let once = filter_posts(&s, w, t);
            let twice = filter_posts(&once, w, t);
            proptest::prop_assert_eq!(&once.posts, &twice.posts);
            proptest::prop_assert_eq!(&once.comments, &twice.comments);
            let verdict = |b: &str| extractor().extract(b);
            let fc = filter_comments(&once, cw, verdict);
            proptest::prop_assert_eq!(&filter_comments(&fc, cw, verdict).comments, &fc.comments);
            let q = select_quoting_comments(&fc);
            proptest::prop_assert_eq!(&select_quoting_comments(&q).comments, &q.comments);
            for (a, b) in [(&s, &once), (&once, &fc), (&fc, &q)] {
                proptest::prop_assert!(b.posts.keys().all(|k| a.posts.contains_key(k)));
                proptest::prop_assert!(b.comments.keys().all(|k| a.comments.contains_key(k)));
            }
            let counts: Vec<(usize, usize)> = loose.provenance.filter_log.iter().map(|r| (r.posts, r.comments)).collect();
            proptest::prop_assert_eq!(counts.len(), 3);
            proptest::prop_assert!(counts.windows(2).all(|c| c[1].0 <= c[0].0 && c[1].1 <= c[0].1));
        }
    }
}
