//! Location-pruning logics and the greedy / statistical attack engines.

mod engine;

pub use engine::{
    greedy_attack, greedy_attack_batch, statistical_attack, statistical_attack_batch, GreedyPoint,
    GreedyRun, GreedyTrace, StatPoint, StatRun, StatTrace,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encodings::gcd;
use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PruningError {
    #[error("find-first-zero of an all-ones word is undefined")]
    AllOnes,
    #[error("{0} requires incremental selection")]
    RequiresIncremental(PruningLogic),
    #[error("{logic} needs consecutive scans to differ by exactly one (got {from} -> {to})")]
    NonUnitStride { logic: PruningLogic, from: u64, to: u64 },
    #[error("empty selection")]
    EmptySelection,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "logic", rename_all = "snake_case", deny_unknown_fields)]
pub enum PruningLogic {
    /// Plain value match.
    Base,
    /// Differences in memory equal differences on screen.
    Offset,
    /// XOR differences in memory equal XOR differences on screen.
    Xor,
    /// Unit steps of `(A + O) ^ M` flip a run of low bits.
    AddXor,
    /// Unit steps of `(A ^ M) + O` move by an odd amount that pins down the
    /// low bits of `M`. Without `infer_mask` only the per-step bounds are used.
    XorAdd {
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        infer_mask: bool,
    },
    /// Residues: `A - X` stays a multiple of a common divisor > 1.
    Rnc,
    /// Memory moves in the same direction as the amount.
    IncDec,
    /// Memory changes exactly when the amount does.
    ChangeNoChange,
    /// Memory changes at least when the amount does.
    Change,
}

impl PruningLogic {
    pub const XOR_ADD: PruningLogic = PruningLogic::XorAdd { infer_mask: true };

    pub const ALL: [PruningLogic; 9] = [
        PruningLogic::Base,
        PruningLogic::Offset,
        PruningLogic::Xor,
        PruningLogic::AddXor,
        PruningLogic::XOR_ADD,
        PruningLogic::Rnc,
        PruningLogic::IncDec,
        PruningLogic::ChangeNoChange,
        PruningLogic::Change,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PruningLogic::Base => "base",
            PruningLogic::Offset => "offset",
            PruningLogic::Xor => "xor",
            PruningLogic::AddXor => "add_xor",
            PruningLogic::XorAdd { .. } => "xor_add",
            PruningLogic::Rnc => "rnc",
            PruningLogic::IncDec => "inc_dec",
            PruningLogic::ChangeNoChange => "change_no_change",
            PruningLogic::Change => "change",
        }
    }

    pub fn parse(s: &str) -> Option<PruningLogic> {
        PruningLogic::ALL.into_iter().find(|l| l.as_str() == s)
    }

    /// Logics that compare a scan with the previous one; the first scan
    /// carries no check.
    pub fn is_pairwise(&self) -> bool {
        !matches!(self, PruningLogic::Base | PruningLogic::Rnc)
    }

    pub fn requires_incremental(&self) -> bool {
        matches!(self, PruningLogic::AddXor | PruningLogic::XorAdd { .. })
    }

    pub(crate) fn has_state(&self) -> bool {
        matches!(self, PruningLogic::Rnc | PruningLogic::XorAdd { infer_mask: true })
    }
}

impl fmt::Display for PruningLogic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())?;
        if let PruningLogic::XorAdd { infer_mask: false } = self {
            f.write_str("(no-infer)")?;
        }
        Ok(())
    }
}

/// Auxiliary per-location attack state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocationState<W> {
    /// Running GCD of `A - X` (residue logic).
    pub gcd: u64,
    /// Cleared at the first residue-logic failure.
    pub alive: bool,
    /// Mask bits pinned down so far (xor-add logic).
    pub known_bits_mask: W,
    /// Their values; zero outside `known_bits_mask`.
    pub known_bits_value: W,
}

impl<W: Word> LocationState<W> {
    pub fn new() -> Self {
        LocationState { gcd: 0, alive: true, known_bits_mask: W::zero(), known_bits_value: W::zero() }
    }
}

/// Position of the least significant zero bit.
pub fn zeta<W: Word>(x: W) -> Result<u32, PruningError> {
    if x == W::max_value() {
        Err(PruningError::AllOnes)
    } else {
        Ok(x.trailing_ones())
    }
}

/// `p ^ (p + 1)`, the bits flipped by incrementing `p`.
pub fn chi<W: Word>(p: W) -> Result<W, PruningError> {
    zeta(p)?;
    Ok(p ^ p.wrapping_add(&W::one()))
}

/// Mask bits implied by one unit step of a `(A ^ M) + O` location.
///
/// `lo` is the smaller plaintext and `d = X(lo + 1) - X(lo)`. Incrementing
/// `lo` clears its `z = zeta(lo)` trailing ones and sets bit `z`, so with
/// `m` the low `z` bits of `M` and `b = M_z`:
/// `d = 2m + 1` when `b = 0` and `d = 2m + 1 - 2^(z+1)` when `b = 1`.
/// Returns `(known_mask, known_value)` or `None` if no mask fits.
pub fn xor_add_implied_bits<W: Word>(lo: W, d: W) -> Option<(W, W)> {
    let w = W::BITS;
    let d = d.widen();
    if d & 1 == 0 {
        return None;
    }
    let z = lo.trailing_ones();
    let m = (d - 1) / 2;
    if z + 1 >= w {
        // bit z is at or past the top: its two cases coincide modulo 2^w
        let known = W::low_ones(z.min(w - 1));
        return Some((known, W::truncate_u64(m) & known));
    }
    let (d, span, modulus) = (d as u128, 1u128 << (z + 1), 1u128 << w);
    let known = W::low_ones(z + 1);
    if d < span {
        Some((known, W::truncate_u64(m)))
    } else if modulus - d < span {
        let low = ((d + span - 1 - modulus) / 2) as u64;
        Some((known, W::truncate_u64(low | 1 << z)))
    } else {
        None
    }
}

/// One check of `logic` for a single location.
///
/// `prev` is the previous scan's `(A, X)`, or `None` on the first scan; pairwise
/// logics always conform there.
pub fn step<W: Word>(
    logic: PruningLogic,
    state: &mut LocationState<W>,
    prev: Option<(W, W)>,
    cur: (W, W),
) -> Result<bool, PruningError> {
    if let (true, Some((a, _))) = (logic.requires_incremental(), prev) {
        let (a2, _) = cur;
        if a2 != a.wrapping_add(&W::one()) && a != a2.wrapping_add(&W::one()) {
            return Err(PruningError::NonUnitStride { logic, from: a.widen(), to: a2.widen() });
        }
    }
    Ok(check(logic, state, prev, cur))
}

/// [`step`] without the stride precondition (callers validate the selection once).
#[inline]
pub(crate) fn check<W: Word>(
    logic: PruningLogic,
    state: &mut LocationState<W>,
    prev: Option<(W, W)>,
    (a2, x2): (W, W),
) -> bool {
    match logic {
        PruningLogic::Base => x2 == a2,
        PruningLogic::Rnc => {
            if x2 > a2 {
                state.alive = false;
                return false;
            }
            let g = gcd(state.gcd, (a2 - x2).widen());
            if g == 1 {
                state.alive = false;
                false
            } else {
                state.gcd = g;
                true
            }
        }
        _ => {
            let Some((a, x)) = prev else { return true };
            match logic {
                PruningLogic::Offset => x2.wrapping_sub(&x) == a2.wrapping_sub(&a),
                PruningLogic::Xor => x2 ^ x == a2 ^ a,
                PruningLogic::AddXor => {
                    let v = x2 ^ x;
                    !v.is_zero() && (v & v.wrapping_add(&W::one())).is_zero()
                }
                PruningLogic::XorAdd { infer_mask } => {
                    let (lo, d) = if a2 == a.wrapping_add(&W::one()) {
                        (a, x2.wrapping_sub(&x))
                    } else {
                        (a2, x.wrapping_sub(&x2))
                    };
                    let Some((known, value)) = xor_add_implied_bits(lo, d) else { return false };
                    if !infer_mask {
                        return true;
                    }
                    let overlap = state.known_bits_mask & known;
                    if !((state.known_bits_value ^ value) & overlap).is_zero() {
                        return false;
                    }
                    state.known_bits_mask = state.known_bits_mask | known;
                    state.known_bits_value = state.known_bits_value | value;
                    true
                }
                PruningLogic::IncDec => {
                    x2.wrapping_sub(&x).signum_twos() == a2.wrapping_sub(&a).signum_twos()
                }
                PruningLogic::ChangeNoChange => (x2 != x) == (a2 != a),
                PruningLogic::Change => a2 == a || x2 != x,
                PruningLogic::Base | PruningLogic::Rnc => unreachable!(),
            }
        }
    }
}

/// When a statistical attacker inspects the ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", content = "value", rename_all = "snake_case")]
pub enum SuccessCriterion {
    /// Every location scoring at least `τ` is inspected.
    Threshold(f64),
    /// The `k` best-ranked locations are inspected.
    TopK(u64),
    /// Locations above the first score gap larger than `δ` are inspected.
    ScoreDrop(f64),
}

impl SuccessCriterion {
    pub const DEFAULT: SuccessCriterion = SuccessCriterion::TopK(100);

    pub fn validate(&self) -> Result<(), crate::Error> {
        let ok = match *self {
            SuccessCriterion::Threshold(t) => (0.0..=1.0).contains(&t),
            SuccessCriterion::TopK(k) => k >= 1,
            SuccessCriterion::ScoreDrop(d) => (0.0..1.0).contains(&d),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::config("criteria", format!("invalid criterion {self}")))
        }
    }
}

impl fmt::Display for SuccessCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuccessCriterion::Threshold(t) => write!(f, "threshold={t}"),
            SuccessCriterion::TopK(k) => write!(f, "top_k={k}"),
            SuccessCriterion::ScoreDrop(d) => write!(f, "score_drop={d}"),
        }
    }
}

#[cfg(test)]
mod tests;
