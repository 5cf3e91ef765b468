//! Dumps, dump sequences and ground truth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encodings::EncoderState;
use crate::{EncodingSpec, WordValue};

/// One memory snapshot annotated with the on-screen resource amount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dump {
    pub ordinal: u64,
    /// Simulated in-game clock, not wall clock.
    pub timestamp_ms: u64,
    pub on_screen_value: WordValue,
    pub words: Vec<WordValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorRole {
    /// Plaintext copy of the resource kept by the HUD.
    DuplicateDisplay,
    /// Counter moving against the resource (e.g. shots fired).
    OppositeStride,
    /// Counter moving with the resource.
    SameStride,
}

impl fmt::Display for DistractorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistractorRole::DuplicateDisplay => "duplicate_display",
            DistractorRole::OppositeStride => "opposite_stride",
            DistractorRole::SameStride => "same_stride",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distractor {
    pub index: usize,
    pub role: DistractorRole,
}

/// Where the protected value lives and how it is encoded. Attacks never
/// read this except to score their result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    /// Word indices holding the encoded value, in encoding order.
    pub locations: Vec<usize>,
    pub encoding: EncodingSpec,
    pub distractors: Vec<Distractor>,
}

impl GroundTruth {
    pub fn distractor(&self, role: DistractorRole) -> Option<usize> {
        self.distractors.iter().find(|d| d.role == role).map(|d| d.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectionKind {
    Paced,
    Fast,
    Custom,
}

/// How the dumps were collected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionPolicy {
    pub kind: CollectionKind,
    pub interval_ms: u64,
    pub change_every_n_dumps: u32,
}

/// A defender-side run of dumps with full ground truth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DumpSequence {
    pub game_label: String,
    pub word_count: usize,
    pub dumps: Vec<Dump>,
    pub ground_truth: GroundTruth,
    pub collection_policy: CollectionPolicy,
    pub rng_seed: u64,
}

impl DumpSequence {
    pub fn len(&self) -> usize {
        self.dumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dumps.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = WordValue> + '_ {
        self.dumps.iter().map(|d| d.on_screen_value)
    }

    /// Lists every violated invariant; empty when the sequence is well formed.
    pub fn validate(&self) -> Vec<String> {
        validate_sequence(self)
    }
}

/// Checks the structural invariants of a dump sequence.
pub fn validate_sequence(seq: &DumpSequence) -> Vec<String> {
    let mut out = Vec::new();
    if seq.word_count == 0 {
        out.push("word_count must be positive".to_string());
    }
    let mut prev_ts: Option<u64> = None;
    for (pos, d) in seq.dumps.iter().enumerate() {
        if d.ordinal != pos as u64 {
            out.push(format!("ordinal not consecutive at {}", d.ordinal));
        }
        if d.words.len() != seq.word_count {
            out.push(format!(
                "word count mismatch at {}: {} words, expected {}",
                d.ordinal,
                d.words.len(),
                seq.word_count
            ));
        }
        if let Some(p) = prev_ts {
            if d.timestamp_ms <= p {
                out.push(format!("timestamp not increasing at {}", d.ordinal));
            }
        }
        prev_ts = Some(d.timestamp_ms);
    }

    let gt = &seq.ground_truth;
    if gt.locations.is_empty() {
        out.push("ground truth has no locations".to_string());
    }
    if gt.locations.len() != gt.encoding.footprint() {
        out.push(format!(
            "encoding {} occupies {} words but {} locations are recorded",
            gt.encoding.kind(),
            gt.encoding.footprint(),
            gt.locations.len()
        ));
    }
    if gt.locations.iter().any(|&i| i >= seq.word_count) {
        out.push("location out of range".to_string());
    }
    if gt.distractors.iter().any(|d| d.index >= seq.word_count) {
        out.push("distractor out of range".to_string());
    }
    let mut all: Vec<usize> =
        gt.locations.iter().copied().chain(gt.distractors.iter().map(|d| d.index)).collect();
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        out.push("ground-truth and distractor indices must be distinct".to_string());
    }
    if let Err(e) = gt.encoding.validate(None) {
        out.push(format!("invalid encoding: {e}"));
    }

    // Static encodings can be checked against the annotation directly;
    // dynamic ones need the generator's mask log, which is not archived.
    let in_range = !gt.locations.is_empty() && gt.locations.iter().all(|&i| i < seq.word_count);
    if in_range && !gt.encoding.is_dynamic() && gt.locations.len() == gt.encoding.footprint() {
        let state = EncoderState::new(&gt.encoding, 0);
        for d in &seq.dumps {
            if d.words.len() != seq.word_count {
                continue;
            }
            let words: Vec<WordValue> = gt.locations.iter().map(|&i| d.words[i]).collect();
            if gt.encoding.decode(&state, &words).ok() != Some(d.on_screen_value) {
                out.push(format!("ground truth does not decode to on-screen value at {}", d.ordinal));
            }
        }
    }
    out
}

/// An attacker scan subsequence: strictly increasing dump ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectedSequence<'a> {
    source: &'a DumpSequence,
    indices: Vec<usize>,
}

impl<'a> SelectedSequence<'a> {
    pub fn new(source: &'a DumpSequence, indices: Vec<usize>) -> crate::Result<Self> {
        if indices.is_empty() {
            return Err(crate::Error::Data("empty selection".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(crate::Error::Data("selection indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i >= source.len()) {
            return Err(crate::Error::Data("selection index past the last dump".into()));
        }
        Ok(SelectedSequence { source, indices })
    }

    pub fn source(&self) -> &'a DumpSequence {
        self.source
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dumps(&self) -> impl Iterator<Item = &'a Dump> + '_ {
        self.indices.iter().map(move |&i| &self.source.dumps[i])
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::encodings::Encoding;

    /// Small plain-encoded sequence: value at word 1, noise elsewhere.
    pub fn tiny(values: &[u32], word_count: usize) -> DumpSequence {
        let dumps = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut words: Vec<u32> = (0..word_count as u32).map(|w| w * 7 + i as u32).collect();
                words[1] = v;
                Dump { ordinal: i as u64, timestamp_ms: 100 * i as u64, on_screen_value: v, words }
            })
            .collect();
        DumpSequence {
            game_label: "tiny".into(),
            word_count,
            dumps,
            ground_truth: GroundTruth { locations: vec![1], encoding: Encoding::Base, distractors: vec![] },
            collection_policy: CollectionPolicy {
                kind: CollectionKind::Custom,
                interval_ms: 100,
                change_every_n_dumps: 1,
            },
            rng_seed: 0,
        }
    }
}
