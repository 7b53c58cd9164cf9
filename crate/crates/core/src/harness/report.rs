//! Verdicts, reports and the artifact writer.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::shock_analysis::content_hash;

pub const REPORT_SCHEMA: &str = "elwave.report.v1";
pub const MANIFEST_SCHEMA: &str = "elwave.manifest.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    /// Machine-readable reason: `ok`, or `;`-separated `check: detail` items.
    pub reason: String,
    pub values: Value,
}

impl Verdict {
    /// PASS when every `(label, ok)` check holds; the reason lists the failures.
    pub fn from_checks(name: &str, checks: &[(String, bool)], values: Value) -> Verdict {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        Verdict {
            name: name.into(),
            status: if failed.is_empty() { Status::Pass } else { Status::Fail },
            reason: if failed.is_empty() { "ok".into() } else { failed.join("; ") },
            values,
        }
    }

    pub fn skip(name: &str, reason: &str) -> Verdict {
        Verdict {
            name: name.into(),
            status: Status::Skip,
            reason: reason.into(),
            values: Value::Null,
        }
    }

    pub fn error(name: &str, context: &str, err: impl std::fmt::Display) -> Verdict {
        Verdict {
            name: name.into(),
            status: Status::Fail,
            reason: format!("error: {context}: {err}"),
            values: Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    /// Wall-clock data lives in `timing.json`, outside the deterministic set.
    pub timestamps: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub suite: String,
    pub preset: String,
    pub provenance: Provenance,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    /// No verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    /// `None` only for files excluded from the determinism contract.
    pub sha256: Option<String>,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub files: Vec<ManifestEntry>,
}

/// Result of a suite before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// `(relative path, bytes)`, written in order.
    pub files: Vec<(String, Vec<u8>)>,
    /// `(stage, seconds)`
    pub timing: Vec<(String, f64)>,
}

/// Writes `files`, `report.json`, `timing.json` and `manifest.json` under `dir`.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<Manifest> {
    let mut entries = Vec::new();
    let mut put = |rel: &str, bytes: &[u8], deterministic: bool| -> Result<()> {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        entries.push(ManifestEntry {
            path: rel.into(),
            bytes: bytes.len() as u64,
            sha256: deterministic.then(|| content_hash(bytes)),
            deterministic,
        });
        Ok(())
    };
    for (rel, bytes) in &outcome.files {
        put(rel, bytes, true)?;
    }
    put("report.json", &serde_json::to_vec_pretty(&outcome.report)?, true)?;
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let timing = serde_json::json!({
        "schema": "elwave.timing.v1",
        "deterministic": false,
        "finished_unix": now,
        "stages": outcome.timing.iter().map(|(k, s)| serde_json::json!({"stage": k, "seconds": s})).collect::<Vec<_>>(),
    });
    put("timing.json", &serde_json::to_vec_pretty(&timing)?, false)?;
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        files: entries,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// One line per verdict: `STATUS name: reason`.
pub fn summary_lines(report: &Report) -> Vec<String> {
    report
        .verdicts
        .iter()
        .map(|v| format!("{:<4} {}: {}", v.status, v.name, v.reason))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Outcome {
        Outcome {
            report: Report {
                schema: REPORT_SCHEMA.into(),
                suite: "eigen-check".into(),
                preset: "smoke".into(),
                provenance: Provenance {
                    config_hash: "abc".into(),
                    code_version: "0".into(),
                    timestamps: "timing.json".into(),
                },
                verdicts: vec![Verdict::from_checks("x", &[("a".into(), true)], Value::Null)],
            },
            files: vec![("sub/a.csv".into(), b"1,2\n".to_vec())],
            timing: vec![("all".into(), 0.5)],
        }
    }

    #[test]
    fn failing_checks_are_listed() {
        let v = Verdict::from_checks("v", &[("a".into(), true), ("b: 3 > 2".into(), false)], Value::Null);
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.reason, "b: 3 > 2");
        assert_eq!(serde_json::to_value(v.status).unwrap(), "FAIL");
    }

    #[test]
    fn manifest_lists_every_written_file() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_outcome(dir.path(), &sample()).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, ["sub/a.csv", "report.json", "timing.json"]);
        for e in &m.files {
            let bytes = std::fs::read(dir.path().join(&e.path)).unwrap();
            assert_eq!(bytes.len() as u64, e.bytes);
            if let Some(h) = &e.sha256 {
                assert_eq!(*h, content_hash(&bytes));
            }
        }
        assert!(m.files[2].sha256.is_none());
        assert!(dir.path().join("manifest.json").exists());
    }
}
