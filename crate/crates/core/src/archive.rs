//! On-disk dump archive: `manifest.json` plus one raw little-endian file per dump.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CollectionPolicy, Distractor, Dump, DumpSequence, GroundTruth};
use crate::{EncodingSpec, WordValue};

pub const FORMAT_VERSION: u64 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const DUMP_DIR: &str = "dumps";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u64,
    game_label: String,
    word_count: usize,
    rng_seed: u64,
    collection_policy: CollectionPolicy,
    encoding: EncodingSpec,
    ground_truth: GroundTruthEntry,
    dumps: Vec<DumpEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroundTruthEntry {
    locations: Vec<usize>,
    distractors: Vec<Distractor>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DumpEntry {
    file: String,
    ordinal: u64,
    timestamp_ms: u64,
    on_screen_value: WordValue,
}

pub fn dump_file_name(ordinal: u64) -> String {
    format!("{DUMP_DIR}/{ordinal:06}.bin")
}

/// Writes `seq` under `dir`, creating it if needed. Rejects invalid sequences
/// before touching the filesystem.
pub fn write_archive(seq: &DumpSequence, dir: &Path) -> Result<()> {
    let violations = seq.validate();
    if !violations.is_empty() {
        return Err(Error::Invariant(violations));
    }
    let dump_dir = dir.join(DUMP_DIR);
    fs::create_dir_all(&dump_dir).map_err(|e| Error::io(&dump_dir, e))?;

    let mut entries = Vec::with_capacity(seq.dumps.len());
    let mut buf = Vec::with_capacity(seq.word_count * 4);
    for d in &seq.dumps {
        let file = dump_file_name(d.ordinal);
        buf.clear();
        for w in &d.words {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        let path = dir.join(&file);
        fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        entries.push(DumpEntry {
            file,
            ordinal: d.ordinal,
            timestamp_ms: d.timestamp_ms,
            on_screen_value: d.on_screen_value,
        });
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        game_label: seq.game_label.clone(),
        word_count: seq.word_count,
        rng_seed: seq.rng_seed,
        collection_policy: seq.collection_policy,
        encoding: seq.ground_truth.encoding.clone(),
        ground_truth: GroundTruthEntry {
            locations: seq.ground_truth.locations.clone(),
            distractors: seq.ground_truth.distractors.clone(),
        },
        dumps: entries,
    };
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|source| Error::Json { context: MANIFEST.into(), source })?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn read_archive(dir: &Path) -> Result<DumpSequence> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let json = |source| Error::Json { context: path.display().to_string(), source };
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(json)?;
    match raw.get("format_version").and_then(|v| v.as_u64()) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::FormatVersion(v)),
        None => return Err(Error::Data("manifest has no format_version".into())),
    }
    if raw.get("ground_truth").is_none_or(|g| g.is_null()) {
        return Err(Error::MissingGroundTruth);
    }
    let manifest: Manifest = serde_json::from_value(raw).map_err(json)?;

    let dump_dir = dir.join(DUMP_DIR);
    let found = fs::read_dir(&dump_dir)
        .map_err(|e| Error::io(&dump_dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "bin"))
        .count();
    if found != manifest.dumps.len() {
        return Err(Error::DumpCountMismatch { manifest: manifest.dumps.len(), found });
    }

    let expected = manifest.word_count as u64 * 4;
    let mut dumps = Vec::with_capacity(manifest.dumps.len());
    for entry in &manifest.dumps {
        let p = dir.join(&entry.file);
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        if bytes.len() as u64 != expected {
            if (bytes.len() as u64) < expected {
                return Err(Error::Truncated {
                    file: entry.file.clone(),
                    expected,
                    actual: bytes.len() as u64,
                });
            }
            return Err(Error::Data(format!(
                "dump file {} has {} bytes, expected {expected}",
                entry.file,
                bytes.len()
            )));
        }
        let words = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        dumps.push(Dump {
            ordinal: entry.ordinal,
            timestamp_ms: entry.timestamp_ms,
            on_screen_value: entry.on_screen_value,
            words,
        });
    }

    let seq = DumpSequence {
        game_label: manifest.game_label,
        word_count: manifest.word_count,
        dumps,
        ground_truth: GroundTruth {
            locations: manifest.ground_truth.locations,
            encoding: manifest.encoding,
            distractors: manifest.ground_truth.distractors,
        },
        collection_policy: manifest.collection_policy,
        rng_seed: manifest.rng_seed,
    };
    let violations = seq.validate();
    if !violations.is_empty() {
        return Err(Error::Invariant(violations));
    }
    Ok(seq)
}
