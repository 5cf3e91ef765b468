//! Monte-Carlo simulation of memory-scan attacks that try to localise an
//! encoded game resource (coins, ammo) in process memory.
//!
//! A defender simulates a game ([`gamesim`]), collects annotated memory dumps
//! ([`model`], [`archive`]), and replays many attacker scan sequences
//! ([`selection`]) through location-pruning logics ([`pruning`]). The
//! resulting traces are reduced to effort/success distributions
//! ([`aggregation`]). [`cli`] wires it together.

pub mod aggregation;
pub mod archive;
pub mod cli;
pub mod encodings;
pub mod error;
pub mod gamesim;
pub mod model;
pub mod pruning;
pub mod selection;
pub mod word;

pub use error::{Error, Result};
pub use word::Word;

/// Memory word of the simulated process (32-bit little-endian).
pub type WordValue = u32;
pub type EncodingSpec = encodings::Encoding<WordValue>;
pub type EncoderState = encodings::EncoderState<WordValue>;
pub type LocationState = pruning::LocationState<WordValue>;
