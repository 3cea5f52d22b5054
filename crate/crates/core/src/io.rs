//! On-disk formats.
//!
//! Sample logs, traces and frame logs are JSON Lines. Monitors, rule sets,
//! configs and reports are pretty-printed JSON documents. Every write goes
//! through a temporary file in the target directory followed by a rename.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{AbstractionBox, FeatureVector};
use crate::monitor::{GroupProvenance, Monitor, MonitorConfig, MonitoredSample};
use crate::speclang::{FrameRecord, RuleSet, State, ThreeValued, Trace};

pub const FORMAT_VERSION: &str = "1";

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: display(path),
        source,
    }
}

fn check_version(path: &str, found: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Version {
            path: path.to_string(),
            found: found.to_string(),
            expected: FORMAT_VERSION.to_string(),
        });
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: display(path),
        source: e.error,
    })?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: display(path),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_pretty_json(value)?.as_bytes())
}

/// Non-blank lines with their 1-based line numbers.
fn lines<R: Read>(reader: R, path: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_string(),
            source,
        })?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_line<T: DeserializeOwned>(path: &str, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed {
        path: path.to_string(),
        line,
        message: e.to_string(),
    })
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleLogHeader {
    pub format_version: String,
    pub kind: String,
    pub dimension: usize,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    features: Vec<f64>,
    predicted: String,
    correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleLog {
    pub dimension: usize,
    pub labels: Vec<String>,
    pub samples: Vec<MonitoredSample>,
}

const SAMPLE_KIND: &str = "samples";

/// Parses a sample log. `path` only labels error messages.
pub fn parse_samples<R: Read>(reader: R, path: &str) -> Result<SampleLog> {
    let mut it = lines(reader, path)?.into_iter();
    let (hline, htext) = it.next().ok_or_else(|| Error::Malformed {
        path: path.to_string(),
        line: 1,
        message: "missing header line".into(),
    })?;
    let header: SampleLogHeader = parse_line(path, hline, &htext)?;
    check_version(path, &header.format_version)?;
    let malformed = |line: usize, message: String| Error::Malformed {
        path: path.to_string(),
        line,
        message,
    };
    if header.kind != SAMPLE_KIND {
        return Err(malformed(hline, format!("expected kind `{SAMPLE_KIND}`, found `{}`", header.kind)));
    }
    if header.dimension == 0 {
        return Err(malformed(hline, "dimension must be positive".into()));
    }
    let labels: BTreeSet<&str> = header.labels.iter().map(String::as_str).collect();
    let mut samples = Vec::new();
    for (line, text) in it {
        let rec: SampleRecord = parse_line(path, line, &text)?;
        if rec.features.len() != header.dimension {
            return Err(malformed(
                line,
                format!("expected {} features, found {}", header.dimension, rec.features.len()),
            ));
        }
        if !labels.contains(rec.predicted.as_str()) {
            return Err(malformed(line, format!("label `{}` is not declared in the header", rec.predicted)));
        }
        let features = FeatureVector::new(rec.features).map_err(|e| malformed(line, e.to_string()))?;
        samples.push(MonitoredSample::new(features, rec.predicted, rec.correct).map_err(|e| malformed(line, e.to_string()))?);
    }
    Ok(SampleLog {
        dimension: header.dimension,
        labels: header.labels,
        samples,
    })
}

pub fn load_samples(path: &Path) -> Result<SampleLog> {
    parse_samples(open(path)?, &display(path))
}

pub fn render_samples(samples: &[MonitoredSample]) -> Result<String> {
    let first = samples.first().ok_or(Error::Empty("sample log"))?;
    let dimension = first.features.dim();
    let mut labels = BTreeSet::new();
    for s in samples {
        if s.features.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: s.features.dim(),
            });
        }
        labels.insert(s.predicted.clone());
    }
    let header = SampleLogHeader {
        format_version: FORMAT_VERSION.into(),
        kind: SAMPLE_KIND.into(),
        dimension,
        labels: labels.into_iter().collect(),
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for s in samples {
        let rec = SampleRecord {
            features: s.features.as_slice().to_vec(),
            predicted: s.predicted.clone(),
            correct: s.correct,
        };
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn save_samples(path: &Path, samples: &[MonitoredSample]) -> Result<()> {
    write_atomic(path, render_samples(samples)?.as_bytes())
}

#[derive(Serialize)]
struct ArtifactBody<'a> {
    format_version: &'a str,
    dimension: usize,
    config: &'a MonitorConfig,
    provenance: &'a [GroupProvenance],
    boxes: &'a [AbstractionBox],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorArtifact {
    pub format_version: String,
    /// Hex SHA-256 of the compact JSON encoding of every other field.
    pub digest: String,
    pub dimension: usize,
    pub config: MonitorConfig,
    pub provenance: Vec<GroupProvenance>,
    pub boxes: Vec<AbstractionBox>,
}

impl MonitorArtifact {
    pub fn from_monitor(monitor: &Monitor) -> Result<Self> {
        let mut a = MonitorArtifact {
            format_version: FORMAT_VERSION.into(),
            digest: String::new(),
            dimension: monitor.dimension(),
            config: monitor.config().clone(),
            provenance: monitor.provenance().to_vec(),
            boxes: monitor.boxes().cloned().collect(),
        };
        a.digest = a.compute_digest()?;
        Ok(a)
    }

    pub fn compute_digest(&self) -> Result<String> {
        let body = ArtifactBody {
            format_version: &self.format_version,
            dimension: self.dimension,
            config: &self.config,
            provenance: &self.provenance,
            boxes: &self.boxes,
        };
        Ok(sha256_hex(&serde_json::to_vec(&body)?))
    }

    pub fn into_monitor(self, path: &str) -> Result<Monitor> {
        check_version(path, &self.format_version)?;
        if self.compute_digest()? != self.digest {
            return Err(Error::Digest { path: path.to_string() });
        }
        Monitor::from_parts(self.dimension, self.config, self.boxes, self.provenance)
    }
}

pub fn render_monitor(monitor: &Monitor) -> Result<String> {
    to_pretty_json(&MonitorArtifact::from_monitor(monitor)?)
}

pub fn save_monitor(path: &Path, monitor: &Monitor) -> Result<()> {
    write_atomic(path, render_monitor(monitor)?.as_bytes())
}

pub fn load_monitor(path: &Path) -> Result<Monitor> {
    let artifact: MonitorArtifact = read_json(path)?;
    artifact.into_monitor(&display(path))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TraceValue {
    Bool(bool),
    Named(ThreeValued),
}

/// Parses a trace: one JSON object per line mapping atom names to `true`,
/// `false` or `"unknown"`.
pub fn parse_trace<R: Read>(reader: R, path: &str) -> Result<Trace> {
    let mut states = Vec::new();
    for (line, text) in lines(reader, path)? {
        let raw: std::collections::BTreeMap<String, TraceValue> = parse_line(path, line, &text)?;
        let state: State = raw
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    TraceValue::Bool(b) => ThreeValued::from(b),
                    TraceValue::Named(t) => t,
                };
                (k, v)
            })
            .collect();
        states.push(state);
    }
    Trace::new(states).map_err(|_| Error::Malformed {
        path: path.to_string(),
        line: 1,
        message: "trace has no states".into(),
    })
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    parse_trace(open(path)?, &display(path))
}

pub fn render_trace(trace: &Trace) -> Result<String> {
    let mut out = String::new();
    for s in trace.states() {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_frames<R: Read>(reader: R, path: &str) -> Result<Vec<FrameRecord>> {
    let mut frames = Vec::new();
    for (line, text) in lines(reader, path)? {
        let f: FrameRecord = parse_line(path, line, &text)?;
        f.validate().map_err(|e| Error::Malformed {
            path: path.to_string(),
            line,
            message: e.to_string(),
        })?;
        frames.push(f);
    }
    if frames.is_empty() {
        return Err(Error::Empty("frame log"));
    }
    Ok(frames)
}

pub fn load_frames(path: &Path) -> Result<Vec<FrameRecord>> {
    parse_frames(open(path)?, &display(path))
}

pub fn load_rules(path: &Path) -> Result<RuleSet> {
    let rules: RuleSet = read_json(path)?;
    check_version(&display(path), &rules.format_version)?;
    Ok(rules)
}
