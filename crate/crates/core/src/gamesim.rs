//! Synthetic target process.
//!
//! Evolves a resource value and a background word population on a simulated
//! clock, keeps the encoded resource at its ground-truth locations and takes
//! dumps according to a collection policy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encodings::{EncoderState, MaskEvent};
use crate::error::{Error, Result};
use crate::model::{
    CollectionKind, CollectionPolicy, Distractor, DistractorRole, Dump, DumpSequence, GroundTruth,
};
use crate::{EncodingSpec, WordValue};

/// Fractions of background words per behaviour class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundMix {
    /// Constant for the whole run.
    #[serde(rename = "static")]
    pub static_words: f64,
    /// Redrawn uniformly at every dump.
    pub per_dump_noise: f64,
    /// Frame counters stepping by 0, 1 or 2 per frame.
    pub drifting_counters: f64,
    pub zeros: f64,
    /// Redrawn whenever the resource is written (state touched by the same
    /// game action, e.g. effects spawned when a coin is picked up).
    #[serde(default)]
    pub event_coupled: f64,
}

impl Default for BackgroundMix {
    fn default() -> Self {
        BackgroundMix {
            static_words: 0.55,
            per_dump_noise: 0.20,
            drifting_counters: 0.10,
            zeros: 0.10,
            event_coupled: 0.05,
        }
    }
}

impl BackgroundMix {
    fn fractions(&self) -> [f64; 5] {
        [
            self.static_words,
            self.per_dump_noise,
            self.drifting_counters,
            self.zeros,
            self.event_coupled,
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistractorFlags {
    #[serde(default)]
    pub duplicate_display: bool,
    #[serde(default)]
    pub opposite_stride: bool,
    #[serde(default)]
    pub same_stride: bool,
}

fn default_paced_change() -> u32 {
    3
}
fn default_fast_interval() -> u64 {
    500
}
fn default_fast_change() -> u32 {
    6
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Collection {
    /// Resource changes after every few dumps; optional dump before the level starts.
    Paced {
        interval_ms: u64,
        #[serde(default = "default_paced_change")]
        change_every_n_dumps: u32,
        #[serde(default)]
        pre_level_dump: bool,
    },
    /// Frequent dumps to outrun dynamic encodings.
    Fast {
        #[serde(default = "default_fast_interval")]
        interval_ms: u64,
        #[serde(default = "default_fast_change")]
        change_every_n_dumps: u32,
    },
}

impl Collection {
    pub fn interval_ms(&self) -> u64 {
        match *self {
            Collection::Paced { interval_ms, .. } | Collection::Fast { interval_ms, .. } => interval_ms,
        }
    }

    pub fn change_every_n_dumps(&self) -> u32 {
        match *self {
            Collection::Paced { change_every_n_dumps, .. }
            | Collection::Fast { change_every_n_dumps, .. } => change_every_n_dumps,
        }
    }

    fn pre_level_dump(&self) -> bool {
        matches!(self, Collection::Paced { pre_level_dump: true, .. })
    }

    fn policy(&self) -> CollectionPolicy {
        CollectionPolicy {
            kind: match self {
                Collection::Paced { .. } => CollectionKind::Paced,
                Collection::Fast { .. } => CollectionKind::Fast,
            },
            interval_ms: self.interval_ms(),
            change_every_n_dumps: self.change_every_n_dumps(),
        }
    }
}

fn default_label() -> String {
    "synthetic".to_string()
}
fn default_distractor_start() -> WordValue {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_label")]
    pub game_label: String,
    pub word_count: usize,
    pub seed: u64,
    pub encoding: EncodingSpec,
    pub resource_start: WordValue,
    /// +1 or -1.
    pub resource_direction: i8,
    pub resource_change_count: u32,
    #[serde(default)]
    pub background_mix: BackgroundMix,
    #[serde(default)]
    pub distractors: DistractorFlags,
    pub frame_period_ms: u64,
    pub collection: Collection,
    /// Initial value of the stride distractors.
    #[serde(default = "default_distractor_start")]
    pub distractor_start: WordValue,
}

impl SimConfig {
    pub fn final_value(&self) -> i64 {
        self.resource_start as i64 + self.resource_direction as i64 * self.resource_change_count as i64
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_count == 0 {
            return Err(Error::config("word_count", "must be positive"));
        }
        if self.resource_direction != 1 && self.resource_direction != -1 {
            return Err(Error::config("resource_direction", "must be +1 or -1"));
        }
        if self.resource_change_count == 0 {
            return Err(Error::config("resource_change_count", "must be positive"));
        }
        let end = self.final_value();
        if end < 0 {
            return Err(Error::config("resource_change_count", "resource would go negative"));
        }
        if end > WordValue::MAX as i64 {
            return Err(Error::config("resource_change_count", "resource would overflow a word"));
        }
        let fractions = self.background_mix.fractions();
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::config("background_mix", "fractions must lie in [0, 1]"));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(Error::config("background_mix", "fractions must sum to 1"));
        }
        if self.frame_period_ms == 0 {
            return Err(Error::config("frame_period_ms", "must be positive"));
        }
        if self.collection.interval_ms() == 0 {
            return Err(Error::config("collection.interval_ms", "must be positive"));
        }
        if self.collection.change_every_n_dumps() == 0 {
            return Err(Error::config("collection.change_every_n_dumps", "must be positive"));
        }
        let max = (self.resource_start as i64).max(end) as u64;
        self.encoding.validate(Some(max)).map_err(|e| Error::config("encoding", e.to_string()))?;
        let planted = self.encoding.footprint() * 2 + 3;
        if self.word_count < planted {
            return Err(Error::config("word_count", format!("need at least {planted} words")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimEvent {
    ResourceWrite { new_value: WordValue },
    FrameRead,
    TakeDump,
}

impl SimEvent {
    // Order of simultaneous events: writes land first, then the frame
    // reads them, then the (suspended) process is dumped.
    fn tie_rank(&self) -> u8 {
        match self {
            SimEvent::ResourceWrite { .. } => 0,
            SimEvent::FrameRead => 1,
            SimEvent::TakeDump => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventTrace {
    pub events: Vec<(u64, SimEvent)>,
}

impl EventTrace {
    pub fn dump_count(&self) -> usize {
        self.events.iter().filter(|(_, e)| *e == SimEvent::TakeDump).count()
    }
}

/// Deterministic event timeline for `config`.
pub fn schedule(config: &SimConfig) -> EventTrace {
    let interval = config.collection.interval_ms();
    let every = config.collection.change_every_n_dumps() as u64;
    let changes = config.resource_change_count as u64;
    let pre = config.collection.pre_level_dump() as u64;
    let level_dumps = every * (changes + 1);
    let total_dumps = pre + level_dumps;

    let mut events = Vec::new();
    for k in 0..total_dumps {
        events.push((k * interval, SimEvent::TakeDump));
    }
    let mut value = config.resource_start as i64;
    for j in 1..=changes {
        // between level dump j*every-1 and j*every
        let before = pre + j * every - 1;
        value += config.resource_direction as i64;
        events.push((
            before * interval + interval / 2,
            SimEvent::ResourceWrite { new_value: value as WordValue },
        ));
    }
    let end = (total_dumps - 1) * interval;
    let mut t = 0;
    while t <= end {
        events.push((t, SimEvent::FrameRead));
        t += config.frame_period_ms;
    }
    events.sort_by_key(|(t, e)| (*t, e.tie_rank()));
    EventTrace { events }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Static,
    Noise,
    Drifting,
    Zero,
    EventCoupled,
}

struct Layout {
    ground_truth: Vec<usize>,
    distractors: Vec<Distractor>,
    classes: Vec<(usize, Class)>,
}

fn plan_layout(config: &SimConfig, rng: &mut ChaCha8Rng) -> Layout {
    let mut order: Vec<usize> = (0..config.word_count).collect();
    order.shuffle(rng);
    let mut taken = vec![false; config.word_count];
    let mut cursor = 0;

    let mut ground_truth = Vec::new();
    // residue words are spread out: never adjacent to each other
    while ground_truth.len() < config.encoding.footprint() {
        let i = order[cursor];
        cursor += 1;
        if ground_truth.iter().any(|&g: &usize| g.abs_diff(i) <= 1) {
            continue;
        }
        taken[i] = true;
        ground_truth.push(i);
    }

    let mut distractors = Vec::new();
    let flags = config.distractors;
    for (on, role) in [
        (flags.duplicate_display, DistractorRole::DuplicateDisplay),
        (flags.opposite_stride, DistractorRole::OppositeStride),
        (flags.same_stride, DistractorRole::SameStride),
    ] {
        if on {
            while taken[order[cursor]] {
                cursor += 1;
            }
            let index = order[cursor];
            taken[index] = true;
            distractors.push(Distractor { index, role });
        }
    }

    let rest: Vec<usize> = order.into_iter().filter(|&i| !taken[i]).collect();
    let fractions = config.background_mix.fractions();
    let kinds = [Class::Static, Class::Noise, Class::Drifting, Class::Zero, Class::EventCoupled];
    let mut classes = Vec::with_capacity(rest.len());
    let mut start = 0;
    let mut acc = 0.0;
    for (k, (&f, &class)) in fractions.iter().zip(&kinds).enumerate() {
        acc += f;
        let end = if k + 1 == kinds.len() {
            rest.len()
        } else {
            ((acc * rest.len() as f64).round() as usize).min(rest.len())
        };
        classes.extend(rest[start..end.max(start)].iter().map(|&i| (i, class)));
        start = end.max(start);
    }
    classes.sort_unstable_by_key(|(i, _)| *i);
    Layout { ground_truth, distractors, classes }
}

/// Static background values lean towards small integers, as real memory does.
fn static_value(rng: &mut ChaCha8Rng) -> WordValue {
    match rng.random_range(0..4u8) {
        0 | 1 => rng.random_range(0..256),
        2 => rng.random_range(0..65_536),
        _ => rng.random(),
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs the synthetic process and returns the dumps it produced.
pub fn simulate(config: &SimConfig) -> Result<DumpSequence> {
    config.validate()?;
    let trace = schedule(config);

    let mut layout_rng = stream(config.seed, 0);
    let mut bg_rng = stream(config.seed, 1);
    let layout = plan_layout(config, &mut layout_rng);

    let mut memory = vec![0 as WordValue; config.word_count];
    let mut noise = Vec::new();
    let mut drifting = Vec::new();
    let mut coupled = Vec::new();
    for &(i, class) in &layout.classes {
        match class {
            Class::Static => memory[i] = static_value(&mut bg_rng),
            Class::Noise => noise.push(i),
            Class::Drifting => {
                memory[i] = bg_rng.random_range(0..10_000);
                drifting.push(i);
            }
            Class::Zero => {}
            Class::EventCoupled => {
                memory[i] = bg_rng.random();
                coupled.push(i);
            }
        }
    }

    let spec = &config.encoding;
    let mut enc_state = EncoderState::new(spec, config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut resource = config.resource_start;
    let mut encoded = vec![0 as WordValue; spec.footprint()];
    let store = |memory: &mut [WordValue], encoded: &mut [WordValue], state: &EncoderState<WordValue>, a| {
        spec.encode_into(state, a, encoded)?;
        for (&loc, &w) in layout.ground_truth.iter().zip(encoded.iter()) {
            memory[loc] = w;
        }
        Ok::<_, Error>(())
    };
    store(&mut memory, &mut encoded, &enc_state, resource)?;

    let role_index = |role| layout.distractors.iter().find(|d| d.role == role).map(|d| d.index);
    let dup = role_index(DistractorRole::DuplicateDisplay);
    let opposite = role_index(DistractorRole::OppositeStride);
    let same = role_index(DistractorRole::SameStride);
    if let Some(i) = dup {
        memory[i] = resource;
    }
    for i in [opposite, same].into_iter().flatten() {
        memory[i] = config.distractor_start;
    }
    let step = config.resource_direction as i32 as WordValue;

    let mut dumps = Vec::new();
    let mut frames_since_dump = 0u64;
    for &(t, event) in &trace.events {
        match event {
            SimEvent::ResourceWrite { new_value } => {
                resource = new_value;
                if spec.is_dynamic() {
                    spec.mask_update(&mut enc_state, MaskEvent::Write)?;
                }
                store(&mut memory, &mut encoded, &enc_state, resource)?;
                for &i in &coupled {
                    memory[i] = bg_rng.random();
                }
                if let Some(i) = opposite {
                    memory[i] = memory[i].wrapping_sub(step);
                }
                if let Some(i) = same {
                    memory[i] = memory[i].wrapping_add(step);
                }
            }
            SimEvent::FrameRead => {
                frames_since_dump += 1;
                if spec.is_dynamic() && spec.mask_update(&mut enc_state, MaskEvent::Read)? {
                    store(&mut memory, &mut encoded, &enc_state, resource)?;
                }
                if let Some(i) = dup {
                    memory[i] = resource;
                }
            }
            SimEvent::TakeDump => {
                // counters advance per frame; accumulated here since only dumps observe them
                for &i in &drifting {
                    let mut delta: WordValue = 0;
                    for _ in 0..frames_since_dump {
                        delta += bg_rng.random_range(0..3);
                    }
                    memory[i] = memory[i].wrapping_add(delta);
                }
                frames_since_dump = 0;
                for &i in &noise {
                    memory[i] = bg_rng.random();
                }
                let words: Vec<WordValue> = layout.ground_truth.iter().map(|&i| memory[i]).collect();
                if spec.decode(&enc_state, &words)? != resource {
                    return Err(Error::Data(format!(
                        "simulator self-check failed at t={t}: ground truth does not decode to {resource}"
                    )));
                }
                dumps.push(Dump {
                    ordinal: dumps.len() as u64,
                    timestamp_ms: t,
                    on_screen_value: resource,
                    words: memory.clone(),
                });
            }
        }
    }

    Ok(DumpSequence {
        game_label: config.game_label.clone(),
        word_count: config.word_count,
        dumps,
        ground_truth: GroundTruth {
            locations: layout.ground_truth,
            encoding: spec.clone(),
            distractors: layout.distractors,
        },
        collection_policy: config.collection.policy(),
        rng_seed: config.seed,
    })
}

/// Reference scenarios modelled on the two evaluated games.
pub mod presets {
    use super::*;
    use crate::encodings::{Encoding, UpdatePolicy};

    pub const DEFAULT_WORD_COUNT: usize = 1 << 16;
    pub const CAMPAIGN_WORD_COUNT: usize = 1 << 18;
    pub const PLATFORMER_SEED: u64 = 0x5eed_0001;
    pub const SHOOTER_SEED: u64 = 0x5eed_0002;
    pub const FAST_SEED: u64 = 0x5eed_0003;

    pub const MASK: u32 = 0xABCD123;

    /// The static and dynamic encodings with the parameters used for the
    /// coin-collecting platformer.
    pub fn platformer_encoding(kind: crate::encodings::EncodingKind) -> EncodingSpec {
        encoding(kind, &[89, 97, 93], 300)
    }

    /// Same for the shooter (ammo counter).
    pub fn shooter_encoding(kind: crate::encodings::EncodingKind) -> EncodingSpec {
        encoding(kind, &[2, 3, 5], 1500)
    }

    fn encoding(kind: crate::encodings::EncodingKind, moduli: &[u64], read_period: u32) -> EncodingSpec {
        use crate::encodings::EncodingKind as K;
        match kind {
            K::Base => Encoding::Base,
            K::Offset => Encoding::Offset { offset: 24 },
            K::Xor => Encoding::Xor { mask: MASK },
            K::AddXor => Encoding::AddXor { offset: 17, mask: MASK },
            K::XorAdd => Encoding::XorAdd { mask: MASK, offset: 17 },
            K::Rnc => Encoding::Rnc { moduli: moduli.to_vec() },
            K::DynXorUow => Encoding::DynXor {
                policy: UpdatePolicy::OnWrite,
                mean_events_per_update: 2,
                initial_mask: MASK,
                deterministic_period: false,
            },
            K::DynXorUor => Encoding::DynXor {
                policy: UpdatePolicy::OnRead,
                mean_events_per_update: read_period,
                initial_mask: MASK,
                deterministic_period: false,
            },
        }
    }

    /// Coins 100 -> 107, one change every 3 dumps, plus a dump before the level: 25 dumps.
    pub fn platformer_paced(encoding: EncodingSpec) -> SimConfig {
        SimConfig {
            game_label: "platformer".into(),
            word_count: DEFAULT_WORD_COUNT,
            seed: PLATFORMER_SEED,
            encoding,
            resource_start: 100,
            resource_direction: 1,
            resource_change_count: 7,
            background_mix: BackgroundMix::default(),
            distractors: DistractorFlags { duplicate_display: true, ..Default::default() },
            frame_period_ms: 16,
            collection: Collection::Paced {
                interval_ms: 2000,
                change_every_n_dumps: 3,
                pre_level_dump: true,
            },
            distractor_start: 1000,
        }
    }

    /// Bullets 20 -> 13 with a shots-fired counter moving the other way: 24 dumps.
    pub fn shooter_paced(encoding: EncodingSpec) -> SimConfig {
        SimConfig {
            game_label: "shooter".into(),
            word_count: DEFAULT_WORD_COUNT,
            seed: SHOOTER_SEED,
            encoding,
            resource_start: 20,
            resource_direction: -1,
            resource_change_count: 7,
            background_mix: BackgroundMix::default(),
            distractors: DistractorFlags { opposite_stride: true, ..Default::default() },
            frame_period_ms: 16,
            collection: Collection::Paced {
                interval_ms: 2000,
                change_every_n_dumps: 3,
                pre_level_dump: false,
            },
            distractor_start: 0,
        }
    }

    /// Dump every 500 ms, coins change every 6 dumps: 48 dumps.
    pub fn platformer_fast(encoding: EncodingSpec) -> SimConfig {
        SimConfig {
            game_label: "platformer-fast".into(),
            word_count: DEFAULT_WORD_COUNT,
            seed: FAST_SEED,
            encoding,
            resource_start: 100,
            resource_direction: 1,
            resource_change_count: 7,
            background_mix: BackgroundMix::default(),
            distractors: DistractorFlags { duplicate_display: true, ..Default::default() },
            frame_period_ms: 16,
            collection: Collection::Fast { interval_ms: 500, change_every_n_dumps: 6 },
            distractor_start: 1000,
        }
    }
}
