use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregation::Mode;
use crate::error::{Error, Result};
use crate::pruning::{GreedyTrace, StatTrace};
use crate::selection::SelectionPolicy;

/// One simulated attack, as persisted in a JSON-lines trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub archive: String,
    pub game_label: String,
    pub encoding: String,
    pub logic: String,
    pub mode: Mode,
    pub policy: SelectionPolicy,
    pub n: usize,
    /// Dump ordinals scanned, in order.
    pub selection: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy: Option<GreedyTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistical: Option<StatTrace>,
}

pub fn write_traces<'a>(path: &Path, records: impl IntoIterator<Item = &'a TraceRecord>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)
            .map_err(|source| Error::Json { context: path.display().to_string(), source })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| Error::Json {
            context: format!("{} line {}", path.display(), i + 1),
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}
