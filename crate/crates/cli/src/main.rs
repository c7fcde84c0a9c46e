mod config;
mod manifest;
mod pipeline;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::{OutputLock, RunManifest};
use pipeline::{Ctx, STAGES};
use spark_core::nlp::RuleParser;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("stage error: {0}")]
    Stage(String),
    #[error("missing upstream artifact {artifact}; run `spark {stage}` first")]
    MissingUpstream { artifact: String, stage: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Stage(_) | CliError::MissingUpstream { .. } => 4,
        }
    }
}

impl From<spark_core::Error> for CliError {
    fn from(e: spark_core::Error) -> Self {
        use spark_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Io { .. }
            | E::TooManyMalformed { .. }
            | E::InvalidInput(_)
            | E::NoAttributeRows { .. }
            | E::Parse(_)
            | E::Csv(_)
            | E::Json(_)
            | E::DimensionMismatch { .. } => CliError::Data(e.to_string()),
            other => CliError::Stage(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spark", version, about = "Staged analysis of quoted sentences and verdicts in judgment threads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// flat key = value configuration file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// overrides the `seed` key
    #[arg(long)]
    seed: Option<u64>,
    /// overrides the `out_dir` key
    #[arg(long)]
    out: Option<PathBuf>,
    /// overrides any key, e.g. `--set min_event_count=3`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// load the raw dump and apply the collection filters
    Ingest(Common),
    /// extract one verdict per kept comment
    Verdicts(Common),
    /// split posts into instances, label sparks, extract triples
    Instances(Common),
    /// align instances with knowledge-graph events
    Align(Common),
    /// cluster frequent events into domains
    Cluster(Common),
    /// compute post and character features
    Features(Common),
    /// run the regression screens and correlations
    Regress(Common),
    /// write odds-ratio charts, the blame table and the stage log
    Report(Common),
    /// run every stage in order
    RunAll(Common),
}

impl Command {
    fn split(&self) -> (Vec<&'static str>, &Common) {
        match self {
            Command::Ingest(c) => (vec!["ingest"], c),
            Command::Verdicts(c) => (vec!["verdicts"], c),
            Command::Instances(c) => (vec!["instances"], c),
            Command::Align(c) => (vec!["align"], c),
            Command::Cluster(c) => (vec!["cluster"], c),
            Command::Features(c) => (vec!["features"], c),
            Command::Regress(c) => (vec!["regress"], c),
            Command::Report(c) => (vec!["report"], c),
            Command::RunAll(c) => (STAGES.to_vec(), c),
        }
    }
}

fn overrides(c: &Common) -> Result<BTreeMap<String, String>, CliError> {
    let mut m = BTreeMap::new();
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(s) = c.seed {
        m.insert("seed".into(), s.to_string());
    }
    if let Some(o) = &c.out {
        m.insert("out_dir".into(), o.to_string_lossy().into_owned());
    }
    Ok(m)
}

fn run(cmd: &Command) -> Result<(), CliError> {
    let (stages, common) = cmd.split();
    let cfg = config::resolve(common.config.as_deref(), &config::process_env(), &overrides(common)?)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Stage(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let _lock = OutputLock::acquire(&cfg.out_dir)?;
    let mut manifest = RunManifest::load_or_default(&cfg.out_dir)?;
    manifest.tool_version = format!("spark {}", env!("CARGO_PKG_VERSION"));
    manifest.config = cfg.snapshot.clone();
    manifest.seeds = BTreeMap::from([
        ("seed".to_string(), cfg.seed),
        ("cluster".to_string(), cfg.cluster.seed),
        ("embedder".to_string(), cfg.seed),
    ]);
    manifest.backends = pipeline::backends(&cfg);
    for name in stages {
        let mut ctx = Ctx { cfg: &cfg, out: &cfg.out_dir, parser: RuleParser::new(), manifest: &mut manifest };
        let entry = pipeline::run_stage(name, &mut ctx);
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                // keep the entries of stages that did finish
                manifest.save(&cfg.out_dir)?;
                return Err(e);
            }
        };
        log::info!("{name}: {} ms", entry.wall_clock_ms);
        manifest.record(entry, &STAGES);
        manifest.save(&cfg.out_dir)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spark: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
