//! Line-delimited episode logs.
//!
//! Line 1 is a header object naming the format and version. Every following
//! line is one collaboration step:
//!
//! ```text
//! {"format":"passplan-episodes","version":1}
//! {"episode_id":0,"step":0,"features":[...],"reward":0.41,"terminal":false,"next_candidate_features":[[...],...]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Transition;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const LOG_FORMAT: &str = "passplan-episodes";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeRecord {
    pub episode_id: u64,
    pub step: u32,
    pub features: FeatureVector,
    pub reward: f64,
    pub terminal: bool,
    pub next_candidate_features: Vec<FeatureVector>,
}

impl EpisodeRecord {
    pub fn from_transition(episode_id: u64, step: u32, t: &Transition) -> Self {
        Self {
            episode_id,
            step,
            features: t.state_features,
            reward: t.reward,
            terminal: t.terminal,
            next_candidate_features: t.next_candidates.clone(),
        }
    }

    pub fn to_transition(&self) -> Transition {
        Transition {
            state_features: self.features,
            reward: self.reward,
            next_candidates: self.next_candidate_features.clone(),
            terminal: self.terminal,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.to_transition().validate()
    }
}

/// Parsed log contents plus the number of skipped records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<EpisodeRecord>,
    pub malformed: usize,
}

fn check_header(line: &str) -> std::result::Result<(), String> {
    let h: Header = serde_json::from_str(line).map_err(|e| format!("bad header: {e}"))?;
    if h.format != LOG_FORMAT {
        return Err(format!("unknown log format {:?}", h.format));
    }
    if h.version != LOG_VERSION {
        return Err(format!("unsupported log version {}", h.version));
    }
    Ok(())
}

/// Parse a log, skipping malformed records. More than 10% malformed is an error.
pub fn parse_episode_log<R: BufRead>(input: R, path: &Path) -> Result<EpisodeLog> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Ok(EpisodeLog::default()),
    };
    check_header(header.trim()).map_err(|e| Error::parse(path, e))?;

    let mut log = EpisodeLog::default();
    let mut total = 0;
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match serde_json::from_str::<EpisodeRecord>(&line) {
            Ok(r) if r.validate().is_ok() => log.records.push(r),
            _ => log.malformed += 1,
        }
    }
    if log.malformed * 10 > total {
        return Err(Error::TooManyMalformed {
            malformed: log.malformed,
            total,
        });
    }
    Ok(log)
}

pub fn read_episode_log(path: &Path) -> Result<EpisodeLog> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_episode_log(BufReader::new(f), path)
}

pub struct EpisodeLogWriter<W: Write> {
    out: W,
}

impl<W: Write> EpisodeLogWriter<W> {
    /// Start a fresh log on `out`, writing the header.
    pub fn new(mut out: W) -> std::io::Result<Self> {
        let h = Header {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
        };
        writeln!(out, "{}", serde_json::to_string(&h).expect("header serializes"))?;
        Ok(Self { out })
    }

    /// Continue a log whose header has already been written.
    pub fn continuing(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, r: &EpisodeRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, r)?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl EpisodeLogWriter<BufWriter<File>> {
    /// Open `path` for appending, writing a header only if the file is new or empty.
    pub fn append(path: &Path) -> Result<Self> {
        let existing = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        if existing > 0 {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first).map_err(|e| Error::io(path, e))?;
            check_header(first.trim()).map_err(|e| Error::parse(path, e))?;
        }
        let f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let out = BufWriter::new(f);
        if existing > 0 {
            Ok(Self::continuing(out))
        } else {
            Self::new(out).map_err(|e| Error::io(path, e))
        }
    }
}
