//! Machine word abstraction.
//!
//! Encodings and pruning kernels are written once against [`Word`] so the
//! same code runs on the 32-bit production memory model and on 8-bit
//! miniatures that can be checked exhaustively.

use std::fmt::{Debug, Display, LowerHex};
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned, WrappingAdd, WrappingNeg, WrappingSub};

/// An unsigned fixed-width memory word with wrapping arithmetic.
pub trait Word:
    PrimInt
    + Unsigned
    + WrappingAdd
    + WrappingSub
    + WrappingNeg
    + Hash
    + Debug
    + Display
    + LowerHex
    + Default
    + Send
    + Sync
    + 'static
{
    /// Width in bits.
    const BITS: u32;

    /// Truncating conversion (keeps the low `BITS` bits).
    fn truncate_u64(v: u64) -> Self;

    fn widen(self) -> u64;

    /// Two's complement sign: -1, 0 or 1.
    fn signum_twos(self) -> i8 {
        if self.is_zero() {
            0
        } else if (self >> (Self::BITS as usize - 1)).is_one() {
            -1
        } else {
            1
        }
    }

    /// `2^k - 1` for `k <= BITS`.
    fn low_ones(k: u32) -> Self {
        if k >= Self::BITS {
            Self::max_value()
        } else {
            (Self::one() << k as usize) - Self::one()
        }
    }
}

macro_rules! impl_word {
    ($($t:ty),*) => {$(
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;

            #[inline]
            fn truncate_u64(v: u64) -> Self {
                v as $t
            }

            #[inline]
            fn widen(self) -> u64 {
                self as u64
            }
        }
    )*};
}

impl_word!(u8, u16, u32, u64);
