//! Track output (JSON lines) and ground truth (CSV).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Position3;
use crate::sim::TruthRecord;
use crate::track::{TrackState, TrackUpdate};

/// One track update, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub timestamp: f64,
    pub track_id: u64,
    pub state: TrackState,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub power_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_m: Option<f64>,
}

impl TrackRecord {
    pub fn position(&self) -> Position3 {
        Position3::new(self.x, self.y, self.z)
    }
}

impl From<&TrackUpdate> for TrackRecord {
    fn from(u: &TrackUpdate) -> Self {
        Self {
            timestamp: u.timestamp,
            track_id: u.track_id,
            state: u.state,
            x: u.position.x,
            y: u.position.y,
            z: u.position.z,
            power_db: 10.0 * u.power.log10(),
            error_m: None,
        }
    }
}

pub fn write_track_records<W: Write>(mut out: W, records: &[TrackRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn parse_track_records<R: Read>(input: R, origin: &Path) -> Result<Vec<TrackRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(out)
}

pub fn save_track_records(path: &Path, records: &[TrackRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_track_records(BufWriter::new(file), records).map_err(|e| Error::io(path, e))
}

pub fn load_track_records(path: &Path) -> Result<Vec<TrackRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_track_records(file, path)
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRow {
    t: f64,
    target_id: usize,
    x: f64,
    y: f64,
    z: f64,
    r: f64,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Columns `t,target_id,x,y,z,r`; `t` is the packet time in seconds.
pub fn write_truth_csv<W: Write>(out: W, truth: &[TruthRecord]) -> Result<()> {
    let path = Path::new("<truth>");
    let mut w = csv::Writer::from_writer(out);
    for rec in truth {
        w.serialize(TruthRow {
            t: rec.time,
            target_id: rec.target_id,
            x: rec.position.x,
            y: rec.position.y,
            z: rec.position.z,
            r: rec.range,
        })
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_truth_csv<R: Read>(input: R, origin: &Path) -> Result<Vec<TruthRecord>> {
    csv::Reader::from_reader(input)
        .deserialize::<TruthRow>()
        .map(|row| {
            let row = row.map_err(|e| csv_error(origin, e))?;
            Ok(TruthRecord {
                time: row.t,
                target_id: row.target_id,
                position: Position3::new(row.x, row.y, row.z),
                range: row.r,
            })
        })
        .collect()
}

pub fn save_truth_csv(path: &Path, truth: &[TruthRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_truth_csv(BufWriter::new(file), truth).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn load_truth_csv(path: &Path) -> Result<Vec<TruthRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_truth_csv(file, path)
}
