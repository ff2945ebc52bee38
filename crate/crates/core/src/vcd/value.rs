// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use thiserror::Error;

/// One four-state logic digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum LogicValue {
    Zero,
    One,
    /// Unknown.
    X,
    /// High impedance.
    Z,
}

impl LogicValue {
    pub const ALL: [LogicValue; 4] = [LogicValue::Zero, LogicValue::One, LogicValue::X, LogicValue::Z];

    #[inline]
    pub fn from_byte(b: u8) -> Option<LogicValue> {
        match b {
            b'0' => Some(LogicValue::Zero),
            b'1' => Some(LogicValue::One),
            b'x' | b'X' => Some(LogicValue::X),
            b'z' | b'Z' => Some(LogicValue::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            LogicValue::Zero => '0',
            LogicValue::One => '1',
            LogicValue::X => 'x',
            LogicValue::Z => 'z',
        }
    }

    #[inline]
    pub fn is_known(self) -> bool {
        matches!(self, LogicValue::Zero | LogicValue::One)
    }

    /// Digit used to left-extend a short vector whose leftmost digit is `self`.
    #[inline]
    fn extension(self) -> LogicValue {
        match self {
            LogicValue::Zero | LogicValue::One => LogicValue::Zero,
            other => other,
        }
    }
}

impl fmt::Display for LogicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A fixed-width vector of four-state digits, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FourStateWord {
    bits: Vec<LogicValue>,
}

impl FourStateWord {
    /// A word of `width` copies of `fill`. Panics on zero width.
    pub fn filled(width: usize, fill: LogicValue) -> Self {
        assert!(width > 0, "words have positive width");
        FourStateWord { bits: vec![fill; width] }
    }

    pub fn unknown(width: usize) -> Self {
        Self::filled(width, LogicValue::X)
    }

    /// Builds a word from MSB-first digits. Panics on an empty slice.
    pub fn from_bits(bits: &[LogicValue]) -> Self {
        assert!(!bits.is_empty(), "words have positive width");
        FourStateWord { bits: bits.to_vec() }
    }

    /// The `width`-bit unsigned representation of `value` (low bits kept).
    pub fn from_u64(value: u64, width: usize) -> Self {
        let mut word = Self::filled(width, LogicValue::Zero);
        for (i, bit) in word.bits.iter_mut().rev().enumerate().take(64) {
            if value >> i & 1 == 1 {
                *bit = LogicValue::One;
            }
        }
        word
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn bits(&self) -> &[LogicValue] {
        &self.bits
    }

    pub fn is_fully_known(&self) -> bool {
        self.bits.iter().all(|b| b.is_known())
    }

    /// Overwrites this word in place; widths must match.
    #[inline]
    pub fn assign(&mut self, other: &FourStateWord) {
        debug_assert_eq!(self.width(), other.width());
        self.bits.copy_from_slice(&other.bits);
    }

    pub fn fill(&mut self, value: LogicValue) {
        self.bits.fill(value);
    }
}

impl fmt::Display for FourStateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", b.as_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("value `{token}` has {digits} digits but the variable is {width} bits wide")]
    WidthOverflow { token: String, digits: usize, width: usize },
    #[error("invalid logic digit {0:?}")]
    BadDigit(char),
    #[error("empty value")]
    Empty,
}

/// Decodes the digits of a scalar (`1`) or vector (`b1010`) value token into
/// a word of exactly `declared_width` bits, left-extending short vectors.
pub fn decode_value(token: &str, declared_width: usize) -> Result<FourStateWord, DecodeError> {
    let mut word = FourStateWord::filled(declared_width.max(1), LogicValue::X);
    decode_into(token.as_bytes(), &mut word)?;
    Ok(word)
}

/// Like [`decode_value`], writing into an existing word (its width is the
/// declared width). The word is left unspecified on error.
pub(crate) fn decode_into(token: &[u8], word: &mut FourStateWord) -> Result<(), DecodeError> {
    let digits = match token.first() {
        Some(b'b' | b'B') => &token[1..],
        _ => token,
    };
    let width = word.width();
    if digits.is_empty() {
        return Err(DecodeError::Empty);
    }
    if digits.len() > width {
        return Err(DecodeError::WidthOverflow {
            token: String::from_utf8_lossy(token).into_owned(),
            digits: digits.len(),
            width,
        });
    }
    let pad = width - digits.len();
    let bits = &mut word.bits;
    for (slot, &d) in bits[pad..].iter_mut().zip(digits) {
        *slot = LogicValue::from_byte(d).ok_or(DecodeError::BadDigit(d as char))?;
    }
    if pad > 0 {
        let ext = bits[pad].extension();
        bits[..pad].fill(ext);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    #[test]
    fn decodes_full_width_vector() {
        assert_eq!(decode_value("b1010", 4).unwrap().bits(), &[One, Zero, One, Zero]);
    }

    #[test]
    fn extends_short_vectors() {
        assert_eq!(decode_value("bx", 4).unwrap().bits(), &[X, X, X, X]);
        assert_eq!(decode_value("b1", 4).unwrap().bits(), &[Zero, Zero, Zero, One]);
        assert_eq!(decode_value("bz1", 4).unwrap().bits(), &[Z, Z, Z, One]);
        assert_eq!(decode_value("b01", 4).unwrap().bits(), &[Zero, Zero, Zero, One]);
        assert_eq!(decode_value("X", 3).unwrap().bits(), &[X, X, X]);
    }

    #[test]
    fn rejects_overflow_and_bad_digits() {
        assert!(matches!(
            decode_value("b10101", 4),
            Err(DecodeError::WidthOverflow { digits: 5, width: 4, .. })
        ));
        assert_eq!(decode_value("b10u1", 4), Err(DecodeError::BadDigit('u')));
        assert_eq!(decode_value("b", 4), Err(DecodeError::Empty));
    }

    #[test]
    fn uppercase_digits_accepted() {
        assert_eq!(decode_value("B1XZ", 3).unwrap().bits(), &[One, X, Z]);
    }

    #[test]
    fn from_u64_roundtrip_digits() {
        assert_eq!(FourStateWord::from_u64(10, 4).to_string(), "1010");
        assert_eq!(FourStateWord::from_u64(1, 70).width(), 70);
    }
}
