//! Data encodings used to hide the resource value in memory.
//!
//! Six static encodings (plain, offset, XOR mask, offset-then-mask,
//! mask-then-offset, residue number coding) and a dynamic XOR mask that is
//! re-drawn on reads or writes of the protected value.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("value {value} outside RNC domain (product of moduli is {product})")]
    RncDomain { value: u64, product: u128 },
    #[error("residue {residue} at position {position} is not below its modulus {modulus}")]
    ResidueOutOfRange { position: usize, residue: u64, modulus: u64 },
    #[error("expected {expected} words, got {actual}")]
    Footprint { expected: usize, actual: usize },
    #[error("moduli {a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },
    #[error("invalid moduli: {0}")]
    InvalidModuli(String),
    #[error("decoded value {0} does not fit the word width")]
    DecodedOverflow(u128),
    #[error("mean events per update must be at least 1")]
    ZeroPeriod,
    #[error("mask update requested on static encoding `{0}`")]
    StaticEncoding(EncodingKind),
    #[error("bad encoding description: {0}")]
    Schema(String),
}

/// When a dynamic mask is re-drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UpdatePolicy {
    /// Update on write of the protected value.
    OnWrite,
    /// Update on read of the protected value.
    OnRead,
}

/// Event observed by a dynamic encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskEvent {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Base,
    Offset,
    Xor,
    AddXor,
    XorAdd,
    Rnc,
    DynXorUow,
    DynXorUor,
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 8] = [
        EncodingKind::Base,
        EncodingKind::Offset,
        EncodingKind::Xor,
        EncodingKind::AddXor,
        EncodingKind::XorAdd,
        EncodingKind::Rnc,
        EncodingKind::DynXorUow,
        EncodingKind::DynXorUor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EncodingKind::Base => "base",
            EncodingKind::Offset => "offset",
            EncodingKind::Xor => "xor",
            EncodingKind::AddXor => "add_xor",
            EncodingKind::XorAdd => "xor_add",
            EncodingKind::Rnc => "rnc",
            EncodingKind::DynXorUow => "dyn_xor_uow",
            EncodingKind::DynXorUor => "dyn_xor_uor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which encoding protects the resource, with its secrets.
///
/// Offsets are stored as words; a negative offset is its two's complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EncodingRepr", into = "EncodingRepr")]
#[serde(bound = "W: Word")]
pub enum Encoding<W> {
    Base,
    Offset { offset: W },
    Xor { mask: W },
    /// `(A + O) ^ M`
    AddXor { offset: W, mask: W },
    /// `(A ^ M) + O`
    XorAdd { mask: W, offset: W },
    Rnc { moduli: Vec<u64> },
    DynXor {
        policy: UpdatePolicy,
        /// Expected number of matching events per mask update.
        mean_events_per_update: u32,
        initial_mask: W,
        /// Update on every N-th matching event instead of with probability 1/N.
        deterministic_period: bool,
    },
}

impl<W: Word> Encoding<W> {
    pub fn kind(&self) -> EncodingKind {
        match self {
            Encoding::Base => EncodingKind::Base,
            Encoding::Offset { .. } => EncodingKind::Offset,
            Encoding::Xor { .. } => EncodingKind::Xor,
            Encoding::AddXor { .. } => EncodingKind::AddXor,
            Encoding::XorAdd { .. } => EncodingKind::XorAdd,
            Encoding::Rnc { .. } => EncodingKind::Rnc,
            Encoding::DynXor { policy: UpdatePolicy::OnWrite, .. } => EncodingKind::DynXorUow,
            Encoding::DynXor { policy: UpdatePolicy::OnRead, .. } => EncodingKind::DynXorUor,
        }
    }

    /// Number of memory words the encoded value occupies.
    pub fn footprint(&self) -> usize {
        match self {
            Encoding::Rnc { moduli } => moduli.len(),
            _ => 1,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, Encoding::DynXor { .. })
    }

    /// Checks parameter invariants. `max_value` is the largest resource
    /// amount the run will store; RNC requires the moduli product to exceed it.
    pub fn validate(&self, max_value: Option<u64>) -> Result<(), EncodingError> {
        match self {
            Encoding::Rnc { moduli } => {
                let product = rnc_product(moduli)?;
                for (i, &a) in moduli.iter().enumerate() {
                    if a < 2 {
                        return Err(EncodingError::InvalidModuli(format!(
                            "modulus {a} must be at least 2"
                        )));
                    }
                    if a - 1 > W::max_value().widen() {
                        return Err(EncodingError::InvalidModuli(format!(
                            "residues of modulus {a} do not fit a {}-bit word",
                            W::BITS
                        )));
                    }
                    for &b in &moduli[i + 1..] {
                        if gcd(a, b) != 1 {
                            return Err(EncodingError::NotCoprime { a, b });
                        }
                    }
                }
                if let Some(max) = max_value {
                    if product <= max as u128 {
                        return Err(EncodingError::RncDomain { value: max, product });
                    }
                }
                Ok(())
            }
            Encoding::DynXor { mean_events_per_update: 0, .. } => Err(EncodingError::ZeroPeriod),
            _ => Ok(()),
        }
    }

    /// Encodes `a` under the current state into `footprint()` words.
    pub fn encode(&self, state: &EncoderState<W>, a: W) -> Result<Vec<W>, EncodingError> {
        let mut out = vec![W::zero(); self.footprint()];
        self.encode_into(state, a, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(
        &self,
        state: &EncoderState<W>,
        a: W,
        out: &mut [W],
    ) -> Result<(), EncodingError> {
        if out.len() != self.footprint() {
            return Err(EncodingError::Footprint { expected: self.footprint(), actual: out.len() });
        }
        match self {
            Encoding::Base => out[0] = a,
            Encoding::Offset { offset } => out[0] = a.wrapping_add(offset),
            Encoding::Xor { mask } => out[0] = a ^ *mask,
            Encoding::AddXor { offset, mask } => out[0] = a.wrapping_add(offset) ^ *mask,
            Encoding::XorAdd { mask, offset } => out[0] = (a ^ *mask).wrapping_add(offset),
            Encoding::Rnc { moduli } => {
                let product = rnc_product(moduli)?;
                let value = a.widen();
                if value as u128 >= product {
                    return Err(EncodingError::RncDomain { value, product });
                }
                for (slot, &m) in out.iter_mut().zip(moduli) {
                    *slot = W::truncate_u64(value % m);
                }
            }
            Encoding::DynXor { .. } => out[0] = a ^ state.current_mask,
        }
        Ok(())
    }

    /// Inverse of [`Encoding::encode`] under the same state.
    pub fn decode(&self, state: &EncoderState<W>, words: &[W]) -> Result<W, EncodingError> {
        if words.len() != self.footprint() {
            return Err(EncodingError::Footprint {
                expected: self.footprint(),
                actual: words.len(),
            });
        }
        let x = words[0];
        Ok(match self {
            Encoding::Base => x,
            Encoding::Offset { offset } => x.wrapping_sub(offset),
            Encoding::Xor { mask } => x ^ *mask,
            Encoding::AddXor { offset, mask } => (x ^ *mask).wrapping_sub(offset),
            Encoding::XorAdd { mask, offset } => x.wrapping_sub(offset) ^ *mask,
            Encoding::Rnc { moduli } => {
                let residues: Vec<u64> = words.iter().map(|w| w.widen()).collect();
                let value = crt_reconstruct(moduli, &residues)?;
                if value > W::max_value().widen() as u128 {
                    return Err(EncodingError::DecodedOverflow(value));
                }
                W::truncate_u64(value as u64)
            }
            Encoding::DynXor { .. } => x ^ state.current_mask,
        })
    }

    /// Feeds one read or write of the protected value to a dynamic encoding.
    /// Returns whether the mask changed. The caller must re-store
    /// `A ^ current_mask` afterwards.
    pub fn mask_update(
        &self,
        state: &mut EncoderState<W>,
        event: MaskEvent,
    ) -> Result<bool, EncodingError> {
        let (policy, period, deterministic) = match self {
            Encoding::DynXor {
                policy,
                mean_events_per_update,
                deterministic_period,
                ..
            } => (*policy, *mean_events_per_update, *deterministic_period),
            other => return Err(EncodingError::StaticEncoding(other.kind())),
        };
        if period == 0 {
            return Err(EncodingError::ZeroPeriod);
        }
        let matching = matches!(
            (policy, event),
            (UpdatePolicy::OnWrite, MaskEvent::Write) | (UpdatePolicy::OnRead, MaskEvent::Read)
        );
        if !matching {
            return Ok(false);
        }
        state.matching_events += 1;
        let fire = if deterministic {
            state.matching_events % period as u64 == 0
        } else {
            period == 1 || state.rng.random_range(0..period) == 0
        };
        if fire {
            // the new mask always differs, so `updated` means the stored word changes
            let old = state.current_mask;
            let mut next = old;
            while next == old {
                next = W::truncate_u64(state.rng.random::<u64>());
            }
            state.current_mask = next;
        }
        Ok(fire)
    }
}

/// Mutable per-run state of an encoder.
#[derive(Clone, Debug)]
pub struct EncoderState<W> {
    current_mask: W,
    rng: ChaCha8Rng,
    footprint: usize,
    matching_events: u64,
}

impl<W: Word> EncoderState<W> {
    pub fn new(spec: &Encoding<W>, seed: u64) -> Self {
        let current_mask = match spec {
            Encoding::DynXor { initial_mask, .. } => *initial_mask,
            _ => W::zero(),
        };
        EncoderState {
            current_mask,
            rng: ChaCha8Rng::seed_from_u64(seed),
            footprint: spec.footprint(),
            matching_events: 0,
        }
    }

    pub fn current_mask(&self) -> W {
        self.current_mask
    }

    pub fn footprint(&self) -> usize {
        self.footprint
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn rnc_product(moduli: &[u64]) -> Result<u128, EncodingError> {
    if moduli.is_empty() {
        return Err(EncodingError::InvalidModuli("no moduli".into()));
    }
    moduli.iter().try_fold(1u128, |acc, &m| {
        acc.checked_mul(m as u128)
            .filter(|p| *p <= u64::MAX as u128 + 1)
            .ok_or_else(|| EncodingError::InvalidModuli("product of moduli exceeds 2^64".into()))
    })
}

/// Modular inverse of `a` modulo `m` via the extended Euclidean algorithm.
fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u128)
}

/// Garner reconstruction of the unique value below the product of the moduli.
pub fn crt_reconstruct(moduli: &[u64], residues: &[u64]) -> Result<u128, EncodingError> {
    if moduli.len() != residues.len() {
        return Err(EncodingError::Footprint { expected: moduli.len(), actual: residues.len() });
    }
    rnc_product(moduli)?;
    let mut value: u128 = 0;
    let mut modulus: u128 = 1;
    for (position, (&m, &r)) in moduli.iter().zip(residues).enumerate() {
        if r >= m {
            return Err(EncodingError::ResidueOutOfRange { position, residue: r, modulus: m });
        }
        let m = m as u128;
        let inv = mod_inverse(modulus % m, m).ok_or(EncodingError::NotCoprime {
            a: modulus as u64,
            b: m as u64,
        })?;
        let diff = (r as u128 + m - value % m) % m;
        let t = diff * inv % m;
        value += modulus * t;
        modulus *= m;
    }
    Ok(value)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct EncodingRepr {
    kind: String,
    #[serde(rename = "O", default, skip_serializing_if = "Option::is_none")]
    offset: Option<i64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    moduli: Option<Vec<u64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deterministic_period: Option<bool>,
}

fn hex_word<W: Word>(w: W) -> String {
    format!("{w:#x}")
}

fn parse_hex<W: Word>(field: &str, s: &str) -> Result<W, EncodingError> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    let v = u64::from_str_radix(digits, 16)
        .map_err(|e| EncodingError::Schema(format!("`{field}`: {e}")))?;
    if v > W::max_value().widen() {
        return Err(EncodingError::Schema(format!("`{field}` does not fit {} bits", W::BITS)));
    }
    Ok(W::truncate_u64(v))
}

fn signed_offset<W: Word>(w: W) -> i64 {
    let v = w.widen() as i128;
    let signed = if w.signum_twos() < 0 { v - (1i128 << W::BITS) } else { v };
    signed as i64
}

fn offset_word<W: Word>(o: i64) -> Result<W, EncodingError> {
    let min = -(1i128 << (W::BITS - 1));
    let max = (1i128 << W::BITS) - 1;
    if (o as i128) < min || (o as i128) > max {
        return Err(EncodingError::Schema(format!("`O` = {o} does not fit {} bits", W::BITS)));
    }
    Ok(W::truncate_u64(o as u64))
}

impl<W: Word> From<Encoding<W>> for EncodingRepr {
    fn from(e: Encoding<W>) -> Self {
        let kind = e.kind().as_str().to_string();
        let mut r = EncodingRepr { kind, ..Default::default() };
        match e {
            Encoding::Base => {}
            Encoding::Offset { offset } => r.offset = Some(signed_offset(offset)),
            Encoding::Xor { mask } => r.mask = Some(hex_word(mask)),
            Encoding::AddXor { offset, mask } | Encoding::XorAdd { mask, offset } => {
                r.offset = Some(signed_offset(offset));
                r.mask = Some(hex_word(mask));
            }
            Encoding::Rnc { moduli } => r.moduli = Some(moduli),
            Encoding::DynXor {
                mean_events_per_update,
                initial_mask,
                deterministic_period,
                ..
            } => {
                r.n = Some(mean_events_per_update);
                r.initial_mask = Some(hex_word(initial_mask));
                if deterministic_period {
                    r.deterministic_period = Some(true);
                }
            }
        }
        r
    }
}

impl<W: Word> TryFrom<EncodingRepr> for Encoding<W> {
    type Error = EncodingError;

    fn try_from(r: EncodingRepr) -> Result<Self, Self::Error> {
        let kind = EncodingKind::parse(&r.kind)
            .ok_or_else(|| EncodingError::Schema(format!("unknown encoding kind `{}`", r.kind)))?;
        let need = |name: &str| EncodingError::Schema(format!("`{}` requires `{name}`", r.kind));
        let offset = || r.offset.ok_or_else(|| need("O")).and_then(offset_word::<W>);
        let mask = || r.mask.as_deref().ok_or_else(|| need("M")).and_then(|s| parse_hex::<W>("M", s));
        let dynamic = |policy| -> Result<Encoding<W>, EncodingError> {
            Ok(Encoding::DynXor {
                policy,
                mean_events_per_update: r.n.ok_or_else(|| need("N"))?,
                initial_mask: r
                    .initial_mask
                    .as_deref()
                    .map(|s| parse_hex::<W>("initial_mask", s))
                    .transpose()?
                    .unwrap_or_else(W::zero),
                deterministic_period: r.deterministic_period.unwrap_or(false),
            })
        };
        let spec = match kind {
            EncodingKind::Base => Encoding::Base,
            EncodingKind::Offset => Encoding::Offset { offset: offset()? },
            EncodingKind::Xor => Encoding::Xor { mask: mask()? },
            EncodingKind::AddXor => Encoding::AddXor { offset: offset()?, mask: mask()? },
            EncodingKind::XorAdd => Encoding::XorAdd { mask: mask()?, offset: offset()? },
            EncodingKind::Rnc => Encoding::Rnc { moduli: r.moduli.clone().ok_or_else(|| need("moduli"))? },
            EncodingKind::DynXorUow => dynamic(UpdatePolicy::OnWrite)?,
            EncodingKind::DynXorUor => dynamic(UpdatePolicy::OnRead)?,
        };
        spec.validate(None)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st<W: Word>(e: &Encoding<W>) -> EncoderState<W> {
        EncoderState::new(e, 7)
    }

    #[test]
    fn base_is_identity() {
        let e = Encoding::<u32>::Base;
        assert_eq!(e.encode(&st(&e), 100).unwrap(), vec![100]);
    }

    #[test]
    fn offset_adds_secret() {
        let e = Encoding::<u32>::Offset { offset: 24 };
        assert_eq!(e.encode(&st(&e), 100).unwrap(), vec![124]);
    }

    #[test]
    fn xor_of_zero_is_mask() {
        let e = Encoding::<u32>::Xor { mask: 0xABCD123 };
        assert_eq!(e.encode(&st(&e), 0).unwrap(), vec![0x0ABC_D123]);
    }

    #[test]
    fn rnc_residues_against_plain_modulo() {
        let e = Encoding::<u32>::Rnc { moduli: vec![89, 97, 93] };
        assert_eq!(e.encode(&st(&e), 100).unwrap(), vec![11, 3, 7]);
        assert_eq!(e.decode(&st(&e), &[11, 3, 7]).unwrap(), 100);
    }

    #[test]
    fn rnc_small_moduli_decode_by_search() {
        let e = Encoding::<u32>::Rnc { moduli: vec![2, 3, 5] };
        // brute force over the whole domain
        let expected = (0u32..30).find(|a| a % 2 == 0 && a % 3 == 0 && a % 5 == 2).unwrap();
        assert_eq!(expected, 12);
        assert_eq!(e.decode(&st(&e), &[0, 0, 2]).unwrap(), 12);
    }

    #[test]
    fn rnc_rejects_out_of_domain_and_bad_residues() {
        let e = Encoding::<u32>::Rnc { moduli: vec![2, 3, 5] };
        assert!(matches!(e.encode(&st(&e), 30), Err(EncodingError::RncDomain { .. })));
        assert!(matches!(
            e.decode(&st(&e), &[0, 3, 0]),
            Err(EncodingError::ResidueOutOfRange { position: 1, .. })
        ));
    }

    #[test]
    fn rnc_validation() {
        assert!(Encoding::<u32>::Rnc { moduli: vec![4, 6] }.validate(None).is_err());
        assert!(Encoding::<u32>::Rnc { moduli: vec![2, 3, 5] }.validate(Some(30)).is_err());
        assert!(Encoding::<u32>::Rnc { moduli: vec![2, 3, 5] }.validate(Some(29)).is_ok());
        assert!(Encoding::<u8>::Rnc { moduli: vec![300, 7] }.validate(None).is_err());
    }

    #[test]
    fn xor_add_inverse() {
        let e = Encoding::<u32>::XorAdd { mask: 0xABCD123, offset: 17 };
        let x = 0x1234_5678u32;
        assert_eq!(e.decode(&st(&e), &[x]).unwrap(), x.wrapping_sub(17) ^ 0xABCD123);
    }

    #[test]
    fn negative_offset_wraps() {
        let e = Encoding::<u32>::Offset { offset: (-89i32) as u32 };
        assert_eq!(e.encode(&st(&e), 101).unwrap(), vec![12]);
        assert_eq!(e.encode(&st(&e), 5).unwrap(), vec![5u32.wrapping_sub(89)]);
    }

    #[test]
    fn uow_probability_one_always_updates_on_write() {
        let e = Encoding::<u32>::DynXor {
            policy: UpdatePolicy::OnWrite,
            mean_events_per_update: 1,
            initial_mask: 0,
            deterministic_period: false,
        };
        let mut s = st(&e);
        for _ in 0..100 {
            let before = s.current_mask();
            assert!(e.mask_update(&mut s, MaskEvent::Write).unwrap());
            assert_ne!(before, s.current_mask());
            assert!(!e.mask_update(&mut s, MaskEvent::Read).unwrap());
        }
    }

    #[test]
    fn uor_ignores_writes() {
        let e = Encoding::<u32>::DynXor {
            policy: UpdatePolicy::OnRead,
            mean_events_per_update: 1,
            initial_mask: 5,
            deterministic_period: false,
        };
        let mut s = st(&e);
        assert!(!e.mask_update(&mut s, MaskEvent::Write).unwrap());
        assert_eq!(s.current_mask(), 5);
    }

    #[test]
    fn uor_update_count_is_binomial() {
        let e = Encoding::<u32>::DynXor {
            policy: UpdatePolicy::OnRead,
            mean_events_per_update: 300,
            initial_mask: 0,
            deterministic_period: false,
        };
        let mut s = EncoderState::new(&e, 2024);
        let trials = 300_000u32;
        let hits = (0..trials).filter(|_| e.mask_update(&mut s, MaskEvent::Read).unwrap()).count();
        let p = 1.0 / 300.0;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - mean).abs() <= 3.0 * sigma, "hits {hits}, mean {mean}, sigma {sigma}");
    }

    #[test]
    fn deterministic_period_fires_every_nth() {
        let e = Encoding::<u32>::DynXor {
            policy: UpdatePolicy::OnWrite,
            mean_events_per_update: 2,
            initial_mask: 0,
            deterministic_period: true,
        };
        let mut s = st(&e);
        let fired: Vec<bool> =
            (0..6).map(|_| e.mask_update(&mut s, MaskEvent::Write).unwrap()).collect();
        assert_eq!(fired, [false, true, false, true, false, true]);
    }

    #[test]
    fn static_spec_rejects_mask_update() {
        let e = Encoding::<u32>::Xor { mask: 1 };
        let mut s = st(&e);
        assert!(matches!(
            e.mask_update(&mut s, MaskEvent::Read),
            Err(EncodingError::StaticEncoding(EncodingKind::Xor))
        ));
    }

    #[test]
    fn json_schema_keys() {
        let e = Encoding::<u32>::XorAdd { mask: 0xABCD123, offset: 17 };
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v, serde_json::json!({"kind": "xor_add", "M": "0xabcd123", "O": 17}));
        let neg: Encoding<u32> = serde_json::from_value(serde_json::json!({"kind": "offset", "O": -89})).unwrap();
        assert_eq!(neg, Encoding::Offset { offset: (-89i32) as u32 });
        assert_eq!(serde_json::to_value(&neg).unwrap()["O"], -89);
        let d: Encoding<u32> = serde_json::from_value(
            serde_json::json!({"kind": "dyn_xor_uor", "N": 300, "initial_mask": "0xABCD123"}),
        )
        .unwrap();
        assert_eq!(d.kind(), EncodingKind::DynXorUor);
        assert!(serde_json::from_value::<Encoding<u32>>(serde_json::json!({"kind": "rnc", "moduli": [4, 6]})).is_err());
        assert!(serde_json::from_value::<Encoding<u32>>(serde_json::json!({"kind": "xor"})).is_err());
    }
}
