// SPDX-License-Identifier: Apache-2.0

//! Four-state words to signed integers.
//!
//! A fully known word is its unsigned binary value. Any `x` or `z` digit
//! makes the whole word [`EncodedValue::Unknown`], which renders as `-1`:
//! legal register values are nonnegative, so a set sign bit marks exactly
//! the hardware-only states. `x` and `z` are deliberately not distinguished.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigUint;

use crate::num::Num;
use crate::vcd::{FourStateWord, LogicValue};

/// Rendered form of [`EncodedValue::Unknown`].
pub const UNKNOWN_SENTINEL: i128 = -1;

/// Nonnegative register value. Values below 2^64 are always `Word`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unsigned {
    Word(u64),
    Wide(BigUint),
}

impl Unsigned {
    pub fn to_num(&self) -> Num {
        match self {
            Unsigned::Word(v) => Num::from(*v),
            Unsigned::Wide(b) => Num::from(b.clone()),
        }
    }
}

impl fmt::Display for Unsigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unsigned::Word(v) => write!(f, "{v}"),
            Unsigned::Wide(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EncodedValue {
    Known(Unsigned),
    Unknown,
}

impl EncodedValue {
    pub fn known(v: u64) -> Self {
        EncodedValue::Known(Unsigned::Word(v))
    }

    pub fn is_known(&self) -> bool {
        matches!(self, EncodedValue::Known(_))
    }

    /// Writes the rendered decimal form without allocating for word-sized values.
    pub fn write_rendered<W: Write>(&self, out: &mut W) -> io::Result<()> {
        match self {
            EncodedValue::Known(Unsigned::Word(v)) => {
                out.write_all(itoa::Buffer::new().format(*v).as_bytes())
            }
            EncodedValue::Known(Unsigned::Wide(b)) => write!(out, "{b}"),
            EncodedValue::Unknown => out.write_all(b"-1"),
        }
    }
}

impl fmt::Display for EncodedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodedValue::Known(v) => write!(f, "{v}"),
            EncodedValue::Unknown => write!(f, "{UNKNOWN_SENTINEL}"),
        }
    }
}

pub fn encode_word(word: &FourStateWord) -> EncodedValue {
    let bits = word.bits();
    if bits.len() <= 64 {
        let mut v = 0u64;
        for &b in bits {
            v = match b {
                LogicValue::Zero => v << 1,
                LogicValue::One => v << 1 | 1,
                LogicValue::X | LogicValue::Z => return EncodedValue::Unknown,
            };
        }
        return EncodedValue::known(v);
    }

    // Wide word: pack MSB-first digits into little-endian bytes.
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().rev().enumerate() {
        match b {
            LogicValue::Zero => {}
            LogicValue::One => bytes[i / 8] |= 1 << (i % 8),
            LogicValue::X | LogicValue::Z => return EncodedValue::Unknown,
        }
    }
    let value = BigUint::from_bytes_le(&bytes);
    match u64::try_from(&value) {
        Ok(v) => EncodedValue::known(v),
        Err(_) => EncodedValue::Known(Unsigned::Wide(value)),
    }
}

pub fn render_encoded(v: &EncodedValue) -> Num {
    match v {
        EncodedValue::Known(u) => u.to_num(),
        EncodedValue::Unknown => Num::from(UNKNOWN_SENTINEL),
    }
}
