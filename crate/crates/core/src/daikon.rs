// SPDX-License-Identifier: Apache-2.0

//! Declaration (`.decls`, format 2.0) and data trace (`.dtrace`) documents
//! for dynamic invariant detectors.
//!
//! The whole design is one program point. Every variable is declared as an
//! `int`, and each sample becomes one record listing every variable.

use std::io::{self, BufRead, Write};

use num_bigint::BigUint;
use thiserror::Error;

use crate::encoding::{EncodedValue, Unsigned};
use crate::state::TraceSample;
use crate::vcd::TraceHeader;

pub const DEFAULT_PPT: &str = "design:::CYCLE";
pub const COMPARABILITY: &str = "22";

/// Replaces characters outside `[A-Za-z0-9_.]` with `_`; a leading digit
/// gets a `_` prefix so names never read as numbers.
pub fn daikon_name(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

/// Sanitized names for every header variable, in header order. Names that
/// collide after sanitizing get a `_2`, `_3`, ... suffix.
pub fn variable_names(header: &TraceHeader) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    header
        .variables
        .iter()
        .map(|v| {
            let base = daikon_name(&v.name);
            let mut name = base.clone();
            let mut n = 2;
            while !seen.insert(name.clone()) {
                name = format!("{base}_{n}");
                n += 1;
            }
            name
        })
        .collect()
}

pub fn write_decls<W: Write>(header: &TraceHeader, ppt: &str, sink: &mut W) -> io::Result<()> {
    write_decls_for(&variable_names(header), ppt, sink)
}

pub fn write_decls_for<W: Write>(names: &[String], ppt: &str, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "decl-version 2.0")?;
    writeln!(sink, "var-comparability implicit")?;
    writeln!(sink)?;
    writeln!(sink, "ppt {ppt}")?;
    writeln!(sink, "ppt-type point")?;
    for name in names {
        writeln!(sink, "variable {name}")?;
        writeln!(sink, "  var-kind variable")?;
        writeln!(sink, "  dec-type int")?;
        writeln!(sink, "  rep-type int")?;
        writeln!(sink, "  comparability {COMPARABILITY}")?;
    }
    writeln!(sink)?;
    Ok(())
}

/// Streaming `.dtrace` writer; each record goes straight to the sink.
pub struct DtraceWriter<W> {
    out: W,
    ppt_line: Vec<u8>,
    name_lines: Vec<Vec<u8>>,
    records: u64,
}

impl<W: Write> DtraceWriter<W> {
    pub fn new(out: W, names: &[String], ppt: &str) -> Self {
        DtraceWriter {
            out,
            ppt_line: format!("{ppt}\n").into_bytes(),
            name_lines: names.iter().map(|n| format!("{n}\n").into_bytes()).collect(),
            records: 0,
        }
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    /// Record framing: ppt line, then name / value / `1` per variable, then
    /// a blank line: `3 * variables + 2` lines in total.
    pub fn write_record(&mut self, sample: &TraceSample) -> io::Result<()> {
        assert_eq!(
            sample.encoded.len(),
            self.name_lines.len(),
            "sample does not match the declared variables"
        );
        self.out.write_all(&self.ppt_line)?;
        for (name, value) in self.name_lines.iter().zip(&sample.encoded) {
            self.out.write_all(name)?;
            value.write_rendered(&mut self.out)?;
            self.out.write_all(b"\n1\n")?;
        }
        self.out.write_all(b"\n")?;
        self.records += 1;
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// One-shot form of [`DtraceWriter::write_record`].
pub fn write_dtrace_record<W: Write>(
    sample: &TraceSample,
    names: &[String],
    ppt: &str,
    sink: &mut W,
) -> io::Result<()> {
    DtraceWriter::new(sink, names, ppt).write_record(sample)
}

#[derive(Debug, Error)]
pub enum DtraceError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

/// Reads samples back from a `.dtrace` document (declaration blocks mixed
/// into the same file are skipped). `-1` and `nonsensical` read as unknown.
pub struct DtraceReader<R> {
    input: R,
    line: u64,
    buf: String,
    ppt: Option<String>,
    names: Vec<String>,
    pending: Option<TraceSample>,
    records: u64,
    failed: bool,
}

impl<R: BufRead> DtraceReader<R> {
    /// Reads up to the first record so the variable names are known.
    pub fn open(input: R) -> Result<Self, DtraceError> {
        let mut reader = DtraceReader {
            input,
            line: 0,
            buf: String::new(),
            ppt: None,
            names: Vec::new(),
            pending: None,
            records: 0,
            failed: false,
        };
        reader.pending = reader.read_record()?;
        Ok(reader)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ppt(&self) -> Option<&str> {
        self.ppt.as_deref()
    }

    fn next_line(&mut self) -> Result<bool, DtraceError> {
        self.buf.clear();
        let n = self.input.read_line(&mut self.buf)?;
        if n == 0 {
            return Ok(false);
        }
        self.line += 1;
        let trimmed = self.buf.trim_end_matches(['\n', '\r']).len();
        self.buf.truncate(trimmed);
        Ok(true)
    }

    fn err(&self, message: impl Into<String>) -> DtraceError {
        DtraceError::Format {
            line: self.line,
            message: message.into(),
        }
    }

    fn read_record(&mut self) -> Result<Option<TraceSample>, DtraceError> {
        // Find the record's program point line.
        loop {
            if !self.next_line()? {
                return Ok(None);
            }
            let l = self.buf.as_str();
            if l.trim().is_empty()
                || l.starts_with("//")
                || l.starts_with('#')
                || l.starts_with("decl-version")
                || l.starts_with("var-comparability")
                || l.starts_with("input-language")
            {
                continue;
            }
            if let Some(ppt) = l.strip_prefix("ppt ") {
                let ppt = ppt.to_string();
                self.read_decl_block(ppt)?;
                continue;
            }
            break;
        }
        let ppt = self.buf.clone();
        match &self.ppt {
            None => self.ppt = Some(ppt),
            Some(p) if *p != ppt => {
                return Err(self.err(format!("record for `{ppt}`, expected `{p}`")));
            }
            Some(_) => {}
        }

        let learning = self.records == 0 && self.names.is_empty();
        let mut encoded = Vec::with_capacity(self.names.len());
        let mut index = 0;
        loop {
            if !self.next_line()? || self.buf.is_empty() {
                break;
            }
            if self.buf == "this_invocation_nonce" {
                self.next_line()?;
                continue;
            }
            if learning {
                self.names.push(self.buf.clone());
            } else if self.names.get(index) != Some(&self.buf) {
                return Err(self.err(format!(
                    "variable `{}` out of order (expected `{}`)",
                    self.buf,
                    self.names.get(index).map_or("<end of record>", String::as_str)
                )));
            }
            if !self.next_line()? {
                return Err(self.err("record ends before a value"));
            }
            let value = parse_value(&self.buf).ok_or_else(|| self.err(format!("bad value `{}`", self.buf)))?;
            encoded.push(value);
            if !self.next_line()? {
                return Err(self.err("record ends before a modified flag"));
            }
            index += 1;
        }
        if encoded.len() != self.names.len() {
            return Err(self.err(format!(
                "record has {} variables, expected {}",
                encoded.len(),
                self.names.len()
            )));
        }
        let sample = TraceSample {
            time: self.records,
            encoded,
        };
        self.records += 1;
        Ok(Some(sample))
    }

    /// Takes variable names from a declaration block, if none are known yet.
    fn read_decl_block(&mut self, ppt: String) -> Result<(), DtraceError> {
        let mut names = Vec::new();
        while self.next_line()? && !self.buf.trim().is_empty() {
            if let Some(name) = self.buf.strip_prefix("variable ") {
                names.push(name.trim().to_string());
            }
        }
        if self.names.is_empty() && self.ppt.is_none() {
            self.names = names;
            self.ppt = Some(ppt);
        }
        Ok(())
    }
}

fn parse_value(text: &str) -> Option<EncodedValue> {
    match text {
        "-1" | "nonsensical" => Some(EncodedValue::Unknown),
        t => {
            if let Ok(v) = t.parse::<u64>() {
                Some(EncodedValue::known(v))
            } else {
                t.parse::<BigUint>().ok().map(|b| EncodedValue::Known(Unsigned::Wide(b)))
            }
        }
    }
}

impl<R: BufRead> Iterator for DtraceReader<R> {
    type Item = Result<TraceSample, DtraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(s) = self.pending.take() {
            return Some(Ok(s));
        }
        if self.failed {
            return None;
        }
        match self.read_record() {
            Ok(s) => s.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcd::open_trace;

    fn header(vars: &str) -> TraceHeader {
        open_trace(format!("{vars} $enddefinitions $end").as_bytes()).unwrap().0
    }

    #[test]
    fn name_sanitizing() {
        assert_eq!(daikon_name("gen[3].q"), "gen_3_.q");
        assert_eq!(daikon_name("top.clk"), "top.clk");
        assert_eq!(daikon_name("\\esc$name"), "_esc_name");
        assert_eq!(daikon_name("3state"), "_3state");
    }

    #[test]
    fn colliding_names_are_suffixed() {
        let h = header("$var wire 1 ! a[0] $end $var wire 1 \" a_0_ $end $var wire 1 # a(0) $end");
        assert_eq!(variable_names(&h), ["a_0_", "a_0__2", "a_0__3"]);
    }

    #[test]
    fn single_variable_decls() {
        let h = header("$scope module top $end $var wire 1 ! clk $end $upscope $end");
        let mut out = Vec::new();
        write_decls(&h, DEFAULT_PPT, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "decl-version 2.0\nvar-comparability implicit\n\nppt design:::CYCLE\nppt-type point\n\
             variable top.clk\n  var-kind variable\n  dec-type int\n  rep-type int\n  comparability 22\n\n"
        );
    }

    #[test]
    fn single_variable_record() {
        let names = vec!["top.clk".to_string()];
        let mut out = Vec::new();
        let s = TraceSample { time: 0, encoded: vec![EncodedValue::known(1)] };
        write_dtrace_record(&s, &names, DEFAULT_PPT, &mut out).unwrap();
        assert_eq!(out, b"design:::CYCLE\ntop.clk\n1\n1\n\n");
        let mut out = Vec::new();
        let s = TraceSample { time: 0, encoded: vec![EncodedValue::Unknown] };
        write_dtrace_record(&s, &names, DEFAULT_PPT, &mut out).unwrap();
        assert_eq!(out, b"design:::CYCLE\ntop.clk\n-1\n1\n\n");
    }

    #[test]
    fn reader_roundtrip_with_embedded_decls() {
        let names = vec!["a".to_string(), "b.c".to_string()];
        let mut doc = Vec::new();
        write_decls_for(&names, "p:::X", &mut doc).unwrap();
        let wide = EncodedValue::Known(Unsigned::Wide(BigUint::from(1u8) << 80));
        let samples = vec![
            TraceSample { time: 0, encoded: vec![EncodedValue::known(3), EncodedValue::Unknown] },
            TraceSample { time: 1, encoded: vec![wide, EncodedValue::known(0)] },
        ];
        let mut w = DtraceWriter::new(&mut doc, &names, "p:::X");
        for s in &samples {
            w.write_record(s).unwrap();
        }
        let r = DtraceReader::open(doc.as_slice()).unwrap();
        assert_eq!(r.names(), names.as_slice());
        assert_eq!(r.ppt(), Some("p:::X"));
        let back: Vec<_> = r.map(Result::unwrap).collect();
        assert_eq!(back, samples);
    }

    #[test]
    fn reader_rejects_inconsistent_records() {
        let doc = "p\na\n1\n1\n\np\nb\n1\n1\n\n";
        let r = DtraceReader::open(doc.as_bytes()).unwrap();
        let out: Vec<_> = r.collect();
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(DtraceError::Format { .. })));
        let bad = "p\na\nseven\n1\n\n";
        assert!(DtraceReader::open(bad.as_bytes()).is_err());
    }

    #[test]
    fn empty_trace_has_no_records() {
        let r = DtraceReader::open("".as_bytes()).unwrap();
        assert!(r.names().is_empty());
        assert_eq!(r.count(), 0);
    }
}
