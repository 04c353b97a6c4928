use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{LogitMatrix, PhoneSegment};
use crate::error::{Error, Result};

/// Sidecar header stored next to a logit matrix file.
#[derive(Debug, Serialize, Deserialize)]
struct LogitHeader {
    labels: Vec<String>,
    frame_shift: f64,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn read_header(path: &Path) -> Result<LogitHeader> {
    let side = sidecar(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidData(format!("{}: {e}", side.display())))
}

fn write_header(path: &Path, l: &LogitMatrix) -> Result<()> {
    let side = sidecar(path);
    let h = LogitHeader {
        labels: l.labels().to_vec(),
        frame_shift: l.frame_shift,
    };
    let text = serde_json::to_string_pretty(&h).expect("header serializes");
    fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

/// Reads a logit matrix. Files ending in `.bin` hold little-endian f64 values
/// row-major; anything else is headerless CSV with one frame per row. Labels
/// and frame shift come from the `<file>.json` sidecar.
pub fn read_logits(path: impl AsRef<Path>) -> Result<LogitMatrix> {
    let path = path.as_ref();
    let h = read_header(path)?;
    if path.extension().is_some_and(|e| e == "bin") {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::InvalidData(format!("{}: truncated binary logits", path.display())));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        return LogitMatrix::from_flat(data, h.labels, h.frame_shift);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidData(format!("{}: row {}: bad value {v:?}", path.display(), k + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    LogitMatrix::new(rows, h.labels, h.frame_shift)
}

pub fn write_logits_csv(path: impl AsRef<Path>, l: &LogitMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for f in 0..l.frames() {
        w.write_record(l.row(f).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    write_header(path, l)
}

pub fn write_logits_binary(path: impl AsRef<Path>, l: &LogitMatrix) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = l.as_flat().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    write_header(path, l)
}

/// Segment CSV with header `label,start_frame,end_frame`.
pub fn read_segments(path: impl AsRef<Path>) -> Result<Vec<PhoneSegment>> {
    let mut rdr = csv::Reader::from_path(path.as_ref())?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_segments(path: impl AsRef<Path>, segments: &[PhoneSegment]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for s in segments {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
