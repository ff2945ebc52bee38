// SPDX-License-Identifier: Apache-2.0

//! Single-pass reader for value change dump (VCD) waveforms.
//!
//! [`open_trace`] materializes the declaration section into a
//! [`TraceHeader`] and hands back an [`Events`] iterator over the body.
//! Identifier codes are interned into dense [`SignalId`]s while the header is
//! read, so body events carry indices instead of text. The iterator keeps a
//! fixed-size read buffer and a single token buffer, so its footprint does
//! not depend on the length of the body.

mod lexer;
mod parser;
mod value;
pub mod write;

use std::fmt;
use std::io;

use thiserror::Error;

pub use parser::{open_trace, Events};
pub use value::{decode_value, DecodeError, FourStateWord, LogicValue};

/// Dense index of a unique identifier code (all aliases share one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalId(pub u32);

impl SignalId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKind {
    Wire,
    Reg,
    Integer,
    Parameter,
    /// Any other declared type, keyed by its keyword (`logic`, `real`, ...).
    Other(String),
}

impl VarKind {
    pub fn from_keyword(kw: &str) -> VarKind {
        match kw {
            "wire" => VarKind::Wire,
            "reg" => VarKind::Reg,
            "integer" => VarKind::Integer,
            "parameter" => VarKind::Parameter,
            other => VarKind::Other(other.to_string()),
        }
    }

    pub fn keyword(&self) -> &str {
        match self {
            VarKind::Wire => "wire",
            VarKind::Reg => "reg",
            VarKind::Integer => "integer",
            VarKind::Parameter => "parameter",
            VarKind::Other(kw) => kw,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, VarKind::Other(kw) if kw == "real" || kw == "realtime")
    }
}

/// One declared variable. Aliases (several declarations sharing an
/// identifier code) appear as separate entries with the same `signal`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub id_code: String,
    /// Hierarchical dotted path: scope chain plus reference name.
    pub name: String,
    /// Reference name as written in the declaration (bit ranges dropped).
    pub reference: String,
    pub width: usize,
    pub kind: VarKind,
    pub signal: SignalId,
}

/// A unique identifier code and its width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub id_code: String,
    pub width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    S,
    Ms,
    Us,
    Ns,
    Ps,
    Fs,
}

impl TimeUnit {
    fn parse(s: &str) -> Option<TimeUnit> {
        Some(match s {
            "s" => TimeUnit::S,
            "ms" => TimeUnit::Ms,
            "us" => TimeUnit::Us,
            "ns" => TimeUnit::Ns,
            "ps" => TimeUnit::Ps,
            "fs" => TimeUnit::Fs,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
            TimeUnit::Ns => "ns",
            TimeUnit::Ps => "ps",
            TimeUnit::Fs => "fs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timescale {
    pub magnitude: u32,
    pub unit: TimeUnit,
}

impl Timescale {
    /// Parses the joined tokens of a `$timescale` block, e.g. `1ns` or `10 ps`.
    pub fn parse(text: &str) -> Option<Timescale> {
        let text: String = text.split_whitespace().collect();
        let split = text.find(|c: char| !c.is_ascii_digit())?;
        let (mag, unit) = text.split_at(split);
        let magnitude = mag.parse().ok()?;
        if !matches!(magnitude, 1 | 10 | 100) {
            return None;
        }
        Some(Timescale {
            magnitude,
            unit: TimeUnit::parse(unit)?,
        })
    }
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.magnitude, self.unit.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScopeItem {
    Var(usize),
    Scope(Scope),
}

/// A named scope; `items` preserve declaration order. The root scope has an
/// empty name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub kind: String,
    pub name: String,
    pub items: Vec<ScopeItem>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceHeader {
    pub timescale: Option<Timescale>,
    /// Declared variables in header order.
    pub variables: Vec<VariableDecl>,
    /// Unique identifier codes, indexed by [`SignalId`].
    pub signals: Vec<Signal>,
    pub scope_tree: Scope,
    /// Recoverable problems found while reading the header.
    pub warnings: Vec<Warning>,
}

impl TraceHeader {
    pub fn signal(&self, id: SignalId) -> &Signal {
        &self.signals[id.index()]
    }

    pub fn max_width(&self) -> usize {
        self.signals.iter().map(|s| s.width).max().unwrap_or(1)
    }

    /// Resolves a variable by exact dotted name, or else by a unique match
    /// on the last path component.
    pub fn find_variable(&self, name: &str) -> Result<usize, LookupError> {
        if let Some(i) = self.variables.iter().position(|v| v.name == name) {
            return Ok(i);
        }
        let mut hits = self
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.name.rsplit('.').next() == Some(name));
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            (None, _) => Err(LookupError::Missing),
            (Some(_), Some(_)) => Err(LookupError::Ambiguous),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupError {
    Missing,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Dumpvars,
    Dumpon,
    Dumpoff,
    Dumpall,
}

impl DumpKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DumpKind::Dumpvars => "$dumpvars",
            DumpKind::Dumpon => "$dumpon",
            DumpKind::Dumpoff => "$dumpoff",
            DumpKind::Dumpall => "$dumpall",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A timestamp lower than its predecessor; later changes stay at `clamped_to`.
    NonMonotonicTime { line: u64, found: u64, clamped_to: u64 },
    /// An unrecognized `$...` block, skipped through its `$end`.
    UnknownDirective { line: u64, keyword: String },
    /// A `$timescale` block that could not be understood.
    BadTimescale { line: u64, text: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonMonotonicTime { line, found, clamped_to } => write!(
                f,
                "line {line}: timestamp #{found} goes backwards; clamped to #{clamped_to}"
            ),
            Warning::UnknownDirective { line, keyword } => {
                write!(f, "line {line}: skipped unknown directive {keyword}")
            }
            Warning::BadTimescale { line, text } => {
                write!(f, "line {line}: ignored unparseable timescale `{text}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    TimeAdvance(u64),
    ScalarChange(SignalId, LogicValue),
    VectorChange(SignalId, FourStateWord),
    RealChange(SignalId, f64),
    DumpDirective(DumpKind),
    Warning(Warning),
}

#[derive(Debug, Error)]
pub enum VcdError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: directive is missing its `$end`")]
    UnterminatedDirective { line: u64 },
    #[error("line {line}: token longer than {limit} bytes")]
    TokenTooLong { line: u64, limit: usize },
    #[error("line {line}: bad timestamp `{token}`")]
    BadTimestamp { line: u64, token: String },
    #[error("line {line}: undeclared identifier code `{id}`")]
    UndeclaredIdentifier { line: u64, id: String },
    #[error("line {line}: unexpected token `{token}`")]
    BadToken { line: u64, token: String },
    #[error("line {line}: {source}")]
    Value {
        line: u64,
        #[source]
        source: DecodeError,
    },
}

impl VcdError {
    /// `true` for failures of the underlying byte source rather than the format.
    pub fn is_io(&self) -> bool {
        matches!(self, VcdError::Io(_))
    }
}

/// Whether `id` is a legal identifier code: 1–8 characters in `!`..=`~`.
pub fn is_valid_id_code(id: &str) -> bool {
    (1..=8).contains(&id.len()) && id.bytes().all(|b| (b'!'..=b'~').contains(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timescale_forms() {
        let ts = Timescale::parse("1ns").unwrap();
        assert_eq!((ts.magnitude, ts.unit), (1, TimeUnit::Ns));
        assert_eq!(Timescale::parse("10 ps").unwrap().to_string(), "10ps");
        assert!(Timescale::parse("3ns").is_none());
        assert!(Timescale::parse("1 parsec").is_none());
    }

    #[test]
    fn id_code_rules() {
        assert!(is_valid_id_code("!"));
        assert!(is_valid_id_code("~~~~~~~~"));
        assert!(!is_valid_id_code(""));
        assert!(!is_valid_id_code("123456789"));
        assert!(!is_valid_id_code("a b"));
    }
}
