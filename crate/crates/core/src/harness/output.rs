//! Run directories: JSON-lines records, a CSV summary and one manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, IoContext, Result};
use crate::randomfield::PRNG_ID;

pub const MANIFEST: &str = "manifest.json";
pub const RECORDS: &str = "records.jsonl";
pub const SUMMARY: &str = "summary.csv";
pub const CONFIG: &str = "config.toml";

/// Field names that carry wall-clock measurements.
pub const TIMING_KEYS: [&str; 1] = ["elapsed"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Not enough data in this configuration to decide.
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

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn check(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    pub fn skip(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            status: Status::Skip,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status, self.name, self.detail)
    }
}

/// A rectangular summary written as CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(&self.headers).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Everything a suite produces.
#[derive(Clone, Debug)]
pub struct SuiteOutput<S> {
    pub records: Vec<Value>,
    pub table: Table,
    pub verdicts: Vec<Verdict>,
    /// Additional JSON-lines files, e.g. trajectory checkpoints.
    pub attachments: Vec<(String, Vec<String>)>,
    pub summary: S,
}

impl<S: Serialize> SuiteOutput<S> {
    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| !v.passed())
    }

    pub fn erase(self) -> Result<SuiteOutput<Value>> {
        Ok(SuiteOutput {
            summary: serde_json::to_value(&self.summary)?,
            records: self.records,
            table: self.table,
            verdicts: self.verdicts,
            attachments: self.attachments,
        })
    }
}

/// Serialize a record and tag it with the suite part it came from.
pub fn tagged<T: Serialize>(part: &str, rec: &T) -> Result<Value> {
    let mut v = serde_json::to_value(rec)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("part".into(), Value::String(part.into()));
            Ok(v)
        }
        None => Ok(serde_json::json!({ "part": part, "value": v })),
    }
}

/// Copy of a record with every timing field removed, at any depth.
pub fn strip_timing(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| !TIMING_KEYS.contains(&k.as_str()))
                .map(|(k, x)| (k.clone(), strip_timing(x)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(strip_timing).collect()),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    /// Checksum of each line, in order.
    pub record_sha256: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub experiment: String,
    pub config_hash: String,
    pub prng_id: String,
    pub gamma: String,
    pub started: String,
    pub finished: String,
    pub files: Vec<FileEntry>,
    pub verdicts: Vec<Verdict>,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<FileEntry> {
    let mut file_hash = Sha256::new();
    let mut record_sha256 = Vec::with_capacity(lines.len());
    let mut w = BufWriter::new(File::create(path).at(path)?);
    for line in lines {
        debug_assert!(!line.contains('\n'));
        record_sha256.push(sha_hex(line.as_bytes()));
        file_hash.update(line.as_bytes());
        file_hash.update(b"\n");
        writeln!(w, "{line}").at(path)?;
    }
    w.flush().at(path)?;
    Ok(FileEntry {
        name: path.file_name().unwrap().to_string_lossy().into_owned(),
        sha256: hex::encode(file_hash.finalize()),
        record_sha256,
    })
}

/// Write a finished suite into `dir`: records, summary, attachments,
/// the resolved config and the manifest. Records are emitted by this one
/// writer in suite order.
pub fn persist<S>(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &SuiteOutput<S>,
    started: chrono::DateTime<chrono::Utc>,
) -> Result<Manifest> {
    fs::create_dir_all(dir).at(dir)?;
    if dir.join(MANIFEST).exists() {
        return Err(Error::Config(format!(
            "{} already holds a run; choose a fresh output directory",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    let lines: Vec<String> = out.records.iter().map(|r| r.to_string()).collect();
    files.push(write_lines(&dir.join(RECORDS), &lines)?);
    let csv = out.table.to_csv()?;
    let summary: Vec<String> = csv.lines().map(str::to_string).collect();
    files.push(write_lines(&dir.join(SUMMARY), &summary)?);
    let config: Vec<String> = cfg.to_toml_string()?.lines().map(str::to_string).collect();
    files.push(write_lines(&dir.join(CONFIG), &config)?);
    for (name, lines) in &out.attachments {
        files.push(write_lines(&dir.join(name), lines)?);
    }
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment.id().to_string(),
        config_hash: cfg.hash(),
        prng_id: PRNG_ID.to_string(),
        gamma: cfg.torus()?.gamma_string(),
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        files,
        verdicts: out.verdicts.clone(),
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).at(&path)?;
    Ok(manifest)
}

/// Recompute every checksum listed in `dir/manifest.json`, and check that
/// the directory holds no unlisted files.
pub fn verify_run(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&path).at(&path)?)?;
    for entry in &manifest.files {
        let p = dir.join(&entry.name);
        let reader = BufReader::new(File::open(&p).at(&p)?);
        let mut file_hash = Sha256::new();
        let mut count = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line.at(&p)?;
            file_hash.update(line.as_bytes());
            file_hash.update(b"\n");
            if entry.record_sha256.get(i) != Some(&sha_hex(line.as_bytes())) {
                return Err(Error::Config(format!(
                    "{}: record {} fails its checksum",
                    entry.name,
                    i + 1
                )));
            }
            count += 1;
        }
        if count != entry.record_sha256.len() || hex::encode(file_hash.finalize()) != entry.sha256 {
            return Err(Error::Config(format!("{}: file checksum mismatch", entry.name)));
        }
    }
    for item in fs::read_dir(dir).at(dir)? {
        let name = item.at(dir)?.file_name().to_string_lossy().into_owned();
        if name != MANIFEST && !manifest.files.iter().any(|f| f.name == name) {
            return Err(Error::Config(format!("{name} is not referenced by the manifest")));
        }
    }
    Ok(manifest)
}

/// Records of a run directory, in order.
pub fn read_records(dir: &Path) -> Result<Vec<Value>> {
    let p: PathBuf = dir.join(RECORDS);
    let reader = BufReader::new(File::open(&p).at(&p)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.at(&p)?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
