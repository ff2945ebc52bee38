// SPDX-License-Identifier: Apache-2.0

//! Text rendering of mined specifications, the matching line grammar, and
//! `wc`-style size statistics.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::miner::Relation;
use crate::num::Num;

/// A finalized, ordered set of invariants for one program point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Specification {
    pub ppt: String,
    pub variables: usize,
    pub samples: u64,
    /// Candidates alive at end of trace, before the support threshold.
    pub survivors: usize,
    /// Survivors discarded for insufficient support.
    pub dropped: usize,
    pub invariants: Vec<Relation<String>>,
}

/// Renders one invariant as a single line (without newline).
pub fn render_relation(r: &Relation<String>) -> String {
    let mut s = String::new();
    match r {
        Relation::Constant { var, value } => write!(s, "{var} == {value}"),
        Relation::OneOf { var, values } => {
            let list: Vec<String> = values.iter().map(Num::to_string).collect();
            write!(s, "{var} one of {{{}}}", list.join(", "))
        }
        Relation::LowerBound { var, bound } => write!(s, "{var} >= {bound}"),
        Relation::UpperBound { var, bound } => write!(s, "{var} <= {bound}"),
        Relation::Modular { var, modulus, residue } => write!(s, "{var} % {modulus} == {residue}"),
        Relation::Equal(vs) => write!(s, "{}", vs.join(" == ")),
        Relation::NotEqual(a, b) => write!(s, "{a} != {b}"),
        Relation::LessEq(a, b) => write!(s, "{a} <= {b}"),
        Relation::Less(a, b) => write!(s, "{a} < {b}"),
        Relation::LinearBinary { vars, coeffs } => write_linear(&mut s, vars, coeffs),
        Relation::LinearTernary { vars, coeffs } => write_linear(&mut s, vars, coeffs),
    }
    .expect("writing to a String");
    s
}

fn write_linear(s: &mut String, vars: &[String], coeffs: &[Num]) -> fmt::Result {
    let (constant, terms) = coeffs.split_last().expect("constant term");
    let mut first = true;
    for (var, c) in vars.iter().zip(terms) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        match (first, c.is_negative()) {
            (true, false) => {}
            (true, true) => s.push('-'),
            (false, false) => s.push_str(" + "),
            (false, true) => s.push_str(" - "),
        }
        if mag != Num::ONE {
            write!(s, "{mag}*")?;
        }
        s.push_str(var);
        first = false;
    }
    if first {
        write!(s, "{constant}")?;
    } else if !constant.is_zero() {
        let sign = if constant.is_negative() { '-' } else { '+' };
        write!(s, " {sign} {}", constant.abs())?;
    }
    s.push_str(" == 0");
    Ok(())
}

/// Writes the metadata header followed by one invariant per line.
pub fn render_spec<W: Write>(spec: &Specification, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "# ppt: {}", spec.ppt)?;
    writeln!(sink, "# variables: {}", spec.variables)?;
    writeln!(sink, "# samples: {}", spec.samples)?;
    writeln!(sink, "# survivors: {}", spec.survivors)?;
    writeln!(sink, "# dropped-by-support: {}", spec.dropped)?;
    for r in &spec.invariants {
        writeln!(sink, "{}", render_relation(r))?;
    }
    Ok(())
}

pub fn render_spec_string(spec: &Specification) -> String {
    let mut out = Vec::new();
    render_spec(spec, &mut out).expect("writing to a Vec");
    String::from_utf8(out).expect("rendered spec is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse invariant line {line:?}: {reason}")]
pub struct ParseError {
    pub line: String,
    pub reason: &'static str,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Parses a line produced by [`render_relation`].
///
/// Grammar (identifiers are `[A-Za-z_][A-Za-z0-9_.]*`, numbers are signed
/// decimal integers):
///
/// ```text
/// line   := ident "==" ident ("==" ident)*
///         | ident "==" number
///         | ident "one of" "{" number ("," number)* "}"
///         | ident (">=" | "<=") number
///         | ident "%" number "==" number
///         | ident ("!=" | "<=" | "<") ident
///         | linear "==" "0"
/// linear := term (("+" | "-") term)* (("+" | "-") number)?
/// term   := "-"? (number "*")? ident
/// ```
pub fn parse_line(line: &str) -> Result<Relation<String>, ParseError> {
    let fail = |reason| ParseError { line: line.to_string(), reason };
    let num = |s: &str| s.parse::<Num>().map_err(|_| fail("bad number"));
    let ident = |s: &str| {
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            Err(fail("bad identifier"))
        }
    };

    if let Some((var, rest)) = line.split_once(" one of ") {
        let inner = rest
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| fail("one-of needs braces"))?;
        let values = inner.split(", ").map(num).collect::<Result<Vec<_>, _>>()?;
        return Ok(Relation::OneOf { var: ident(var)?, values });
    }

    let tokens: Vec<&str> = line.split(' ').collect();
    match tokens.as_slice() {
        [v, "%", m, "==", r] => {
            return Ok(Relation::Modular { var: ident(v)?, modulus: num(m)?, residue: num(r)? })
        }
        [a, op, b] if is_ident(a) && !is_ident(b) && *op != "==" => {
            let bound = num(b)?;
            let var = a.to_string();
            return match *op {
                ">=" => Ok(Relation::LowerBound { var, bound }),
                "<=" => Ok(Relation::UpperBound { var, bound }),
                _ => Err(fail("unknown bound operator")),
            };
        }
        [a, op, b] if is_ident(a) && is_ident(b) && *op != "==" => {
            let (a, b) = (a.to_string(), b.to_string());
            return match *op {
                "!=" => Ok(Relation::NotEqual(a, b)),
                "<=" => Ok(Relation::LessEq(a, b)),
                "<" => Ok(Relation::Less(a, b)),
                _ => Err(fail("unknown comparison operator")),
            };
        }
        [a, "==", b] if is_ident(a) && !is_ident(b) => {
            return Ok(Relation::Constant { var: a.to_string(), value: num(b)? })
        }
        _ => {}
    }

    if tokens.len() >= 3 && tokens.iter().step_by(2).all(|t| is_ident(t)) && tokens.iter().skip(1).step_by(2).all(|t| *t == "==") {
        return Ok(Relation::Equal(tokens.iter().step_by(2).map(|t| t.to_string()).collect()));
    }

    let lhs = line.strip_suffix(" == 0").ok_or_else(|| fail("unrecognized form"))?;
    parse_linear(lhs).ok_or_else(|| fail("bad linear expression"))
}

fn parse_linear(lhs: &str) -> Option<Relation<String>> {
    let mut vars = Vec::new();
    let mut coeffs = Vec::new();
    let mut constant = Num::ZERO;
    let mut tokens = lhs.split(' ');
    let mut negative = false;
    let mut first = true;
    while let Some(mut tok) = tokens.next() {
        if !first {
            negative = match tok {
                "+" => false,
                "-" => true,
                _ => return None,
            };
            tok = tokens.next()?;
        } else if let Some(rest) = tok.strip_prefix('-') {
            negative = true;
            tok = rest;
        }
        let (mag, var) = match tok.split_once('*') {
            Some((m, v)) => (m.parse::<Num>().ok()?, Some(v)),
            None if is_ident(tok) => (Num::ONE, Some(tok)),
            None => (tok.parse::<Num>().ok()?, None),
        };
        if mag.is_negative() || (first && tok.starts_with('-')) {
            return None;
        }
        let value = if negative { mag.neg() } else { mag };
        match var {
            Some(v) if is_ident(v) && constant.is_zero() => {
                vars.push(v.to_string());
                coeffs.push(value);
            }
            None if !vars.is_empty() => constant = value,
            _ => return None,
        }
        first = false;
    }
    coeffs.push(constant);
    match vars.len() {
        2 => Some(Relation::LinearBinary {
            vars: [vars[0].clone(), vars[1].clone()],
            coeffs: [coeffs[0].clone(), coeffs[1].clone(), coeffs[2].clone()],
        }),
        3 => Some(Relation::LinearTernary {
            vars: [vars[0].clone(), vars[1].clone(), vars[2].clone()],
            coeffs: [coeffs[0].clone(), coeffs[1].clone(), coeffs[2].clone(), coeffs[3].clone()],
        }),
        _ => None,
    }
}

/// Line, word and byte counts of one file, as `wc` reports them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    /// Number of `\n` bytes.
    pub lines: u64,
    /// Maximal runs of non-whitespace bytes.
    pub words: u64,
    pub bytes: u64,
}

impl Counts {
    pub fn of_reader<R: Read>(input: R) -> io::Result<Counts> {
        let mut reader = BufReader::with_capacity(1 << 16, input);
        let mut counts = Counts::default();
        let mut in_word = false;
        loop {
            let buf = reader.fill_buf()?;
            if buf.is_empty() {
                return Ok(counts);
            }
            for &b in buf {
                if b == b'\n' {
                    counts.lines += 1;
                }
                if b.is_ascii_whitespace() || b == 0x0b {
                    in_word = false;
                } else if !in_word {
                    in_word = true;
                    counts.words += 1;
                }
            }
            counts.bytes += buf.len() as u64;
            let n = buf.len();
            reader.consume(n);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeRow {
    pub label: String,
    pub counts: Counts,
}

/// Per-file size table with `lines`, `words`, `bytes` columns.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SizeReport {
    pub rows: Vec<SizeRow>,
}

impl SizeReport {
    pub fn push(&mut self, label: impl Into<String>, counts: Counts) {
        self.rows.push(SizeRow { label: label.into(), counts });
    }
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| [r.counts.lines.to_string(), r.counts.words.to_string(), r.counts.bytes.to_string()])
            .collect();
        let label_w = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        let mut widths = [5, 5, 5];
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        writeln!(
            f,
            "{:label_w$}  {:>w0$}  {:>w1$}  {:>w2$}",
            "",
            "lines",
            "words",
            "bytes",
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        )?;
        for (row, c) in self.rows.iter().zip(&cells) {
            writeln!(
                f,
                "{:label_w$}  {:>w0$}  {:>w1$}  {:>w2$}",
                row.label,
                c[0],
                c[1],
                c[2],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot read {path}: {source}")]
pub struct FileUnreadable {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Counts every file in `paths`, labelled by its path as given.
pub fn stats<P: AsRef<Path>>(paths: &[P]) -> Result<SizeReport, FileUnreadable> {
    let mut report = SizeReport::default();
    for p in paths {
        let p = p.as_ref();
        let unreadable = |source| FileUnreadable { path: p.to_path_buf(), source };
        let counts = File::open(p).and_then(Counts::of_reader).map_err(unreadable)?;
        report.push(p.display().to_string(), counts);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: i128) -> Num {
        Num::from(v)
    }

    fn s(v: &str) -> String {
        v.to_string()
    }

    #[test]
    fn renders_each_form() {
        let cases = [
            (Relation::Equal(vec![s("trap"), s("eoi")]), "trap == eoi"),
            (Relation::Constant { var: s("x"), value: n(-3) }, "x == -3"),
            (Relation::OneOf { var: s("x"), values: vec![n(1), n(4)] }, "x one of {1, 4}"),
            (Relation::LowerBound { var: s("x"), bound: n(0) }, "x >= 0"),
            (Relation::UpperBound { var: s("x"), bound: n(9) }, "x <= 9"),
            (Relation::Modular { var: s("x"), modulus: n(4), residue: n(3) }, "x % 4 == 3"),
            (Relation::NotEqual(s("a"), s("b")), "a != b"),
            (Relation::LessEq(s("a"), s("b")), "a <= b"),
            (Relation::Less(s("a"), s("b")), "a < b"),
            (
                Relation::LinearBinary { vars: [s("x"), s("y")], coeffs: [n(2), n(-1), n(1)] },
                "2*x - y + 1 == 0",
            ),
            (
                Relation::LinearTernary { vars: [s("x"), s("y"), s("z")], coeffs: [n(1), n(3), n(-1), n(-7)] },
                "x + 3*y - z - 7 == 0",
            ),
            (
                Relation::LinearBinary { vars: [s("x"), s("y")], coeffs: [n(1), n(-4294967296), n(0)] },
                "x - 4294967296*y == 0",
            ),
        ];
        for (r, text) in cases {
            assert_eq!(render_relation(&r), text);
            assert_eq!(parse_line(text).unwrap(), r, "{text}");
        }
    }

    #[test]
    fn empty_spec_is_header_only() {
        let spec = Specification {
            ppt: s("design:::CYCLE"),
            variables: 0,
            samples: 0,
            survivors: 0,
            dropped: 0,
            invariants: vec![],
        };
        let text = render_spec_string(&spec);
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().all(|l| l.starts_with("# ")));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x", "x ==", "1 == x", "x one of 1, 2", "x + == 0", "x ~ y", "3 == 0"] {
            assert!(parse_line(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn wc_counts() {
        assert_eq!(Counts::of_reader(&b"a b\nc\n"[..]).unwrap(), Counts { lines: 2, words: 3, bytes: 6 });
        assert_eq!(Counts::of_reader(&b""[..]).unwrap(), Counts::default());
        assert_eq!(Counts::of_reader(&b"  x\t\ty  "[..]).unwrap(), Counts { lines: 0, words: 2, bytes: 8 });
    }

    #[test]
    fn table_is_aligned() {
        let mut r = SizeReport::default();
        r.push(".vcd", Counts { lines: 30356, words: 46200, bytes: 269184 });
        r.push(".decls", Counts { lines: 2, words: 3, bytes: 6 });
        let text = r.to_string();
        let lens: Vec<usize> = text.lines().map(str::len).collect();
        assert!(lens.windows(2).all(|w| w[0] == w[1]), "{text}");
        assert!(text.lines().next().unwrap().trim_start().starts_with("lines"));
    }

    #[test]
    fn missing_file_is_unreadable() {
        let err = stats(&["/nonexistent/rtlspec"]).unwrap_err();
        assert_eq!(err.path, PathBuf::from("/nonexistent/rtlspec"));
    }
}
