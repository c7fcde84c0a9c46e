//! Run manifest and the output-directory lock.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use spark_core::corpus::StageCount;

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".spark.lock";

/// One row of the instance stage table: `stage,instances,sparks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStageCount {
    pub stage: String,
    pub instances: usize,
    pub sparks: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub collection: Vec<StageCount>,
    pub instances: Vec<InstanceStageCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub name: String,
    pub outputs: Vec<String>,
    pub counts: BTreeMap<String, Value>,
    /// The only field that varies between otherwise identical runs.
    pub wall_clock_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub backends: BTreeMap<String, String>,
    pub stage_counts: StageCounts,
    pub stages: Vec<StageEntry>,
}

impl RunManifest {
    pub fn load_or_default(out: &Path) -> Result<Self, CliError> {
        let path = out.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(RunManifest::default());
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::Stage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    /// Replaces any entry of the same name and keeps entries in pipeline
    /// order.
    pub fn record(&mut self, entry: StageEntry, order: &[&str]) {
        self.stages.retain(|s| s.name != entry.name);
        self.stages.push(entry);
        let pos = |n: &str| order.iter().position(|s| *s == n).unwrap_or(usize::MAX);
        self.stages.sort_by_key(|s| pos(&s.name));
    }

    pub fn save(&self, out: &Path) -> Result<(), CliError> {
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Stage(e.to_string()))? + "\n";
        fs::write(&path, text).map_err(|e| CliError::Stage(format!("{}: {e}", path.display())))
    }
}

/// Held for the lifetime of a run; removes the lock file on drop.
pub struct OutputLock {
    path: PathBuf,
}

fn pid_alive(pid: u32) -> bool {
    Path::new("/proc").join(pid.to_string()).exists()
}

impl OutputLock {
    /// Takes the lock, clearing it first if the recorded process is gone.
    pub fn acquire(out: &Path) -> Result<Self, CliError> {
        let path = out.join(LOCK_FILE);
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    writeln!(f, "{}", std::process::id()).map_err(|e| CliError::Stage(e.to_string()))?;
                    return Ok(OutputLock { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let holder = fs::read_to_string(&path).ok().and_then(|s| s.trim().parse::<u32>().ok());
                    match holder {
                        Some(pid) if pid != std::process::id() && pid_alive(pid) => {
                            return Err(CliError::Stage(format!(
                                "{} is locked by running process {pid}",
                                out.display()
                            )));
                        }
                        _ => {
                            log::warn!("removing stale lock {}", path.display());
                            let _ = fs::remove_file(&path);
                        }
                    }
                }
                Err(e) => return Err(CliError::Stage(format!("cannot create {}: {e}", path.display()))),
            }
        }
        Err(CliError::Stage(format!("could not acquire {}", path.display())))
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str) -> StageEntry {
        StageEntry { name: name.into(), outputs: vec![], counts: BTreeMap::new(), wall_clock_ms: 1 }
    }

    #[test]
    fn entries_replace_and_keep_order() {
        let order = ["a", "b", "c"];
        let mut m = RunManifest::default();
        m.record(entry("c"), &order);
        m.record(entry("a"), &order);
        m.record(entry("c"), &order);
        let names: Vec<&str> = m.stages.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["a", "c"]);
    }

    #[test]
    fn lock_is_exclusive_and_stale_locks_clear() {
        let dir = tempfile::tempdir().unwrap();
        let lock = OutputLock::acquire(dir.path()).unwrap();
        // our own pid counts as stale for a second acquire in-process, so
        // fake a live foreign holder with pid 1
        fs::write(dir.path().join(LOCK_FILE), "1\n").unwrap();
        assert!(OutputLock::acquire(dir.path()).is_err());
        fs::write(dir.path().join(LOCK_FILE), "999999999\n").unwrap();
        drop(lock);
        fs::write(dir.path().join(LOCK_FILE), "999999999\n").unwrap();
        let again = OutputLock::acquire(dir.path()).unwrap();
        drop(again);
        assert!(!dir.path().join(LOCK_FILE).exists());
    }
}
