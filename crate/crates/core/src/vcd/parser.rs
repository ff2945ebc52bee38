// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::io::{BufReader, Read};

use super::lexer::Lexer;
use super::value::decode_into;
use super::{
    is_valid_id_code, DumpKind, FourStateWord, LogicValue, Scope, ScopeItem, Signal, SignalId,
    Timescale, TraceEvent, TraceHeader, VarKind, VariableDecl, VcdError, Warning,
};

const READ_BUFFER: usize = 64 * 1024;

/// Identifier codes of one or two characters index a flat table; longer
/// codes fall back to a hash map.
struct IdTable {
    short: Vec<u32>,
    long: HashMap<Box<[u8]>, u32>,
}

const ID_RADIX: usize = (b'~' - b'!' + 1) as usize;
const NO_SIGNAL: u32 = u32::MAX;

impl IdTable {
    fn new() -> Self {
        IdTable {
            short: vec![NO_SIGNAL; ID_RADIX + ID_RADIX * ID_RADIX],
            long: HashMap::new(),
        }
    }

    #[inline]
    fn slot(id: &[u8]) -> Option<usize> {
        let digit = |b: u8| (b'!'..=b'~').contains(&b).then(|| (b - b'!') as usize);
        match id {
            [a] => digit(*a),
            [a, b] => Some(ID_RADIX + digit(*a)? * ID_RADIX + digit(*b)?),
            _ => None,
        }
    }

    fn get(&self, id: &[u8]) -> Option<u32> {
        match Self::slot(id) {
            Some(s) => Some(self.short[s]).filter(|&v| v != NO_SIGNAL),
            None => self.long.get(id).copied(),
        }
    }

    fn insert(&mut self, id: &[u8], signal: u32) {
        match Self::slot(id) {
            Some(s) => self.short[s] = signal,
            None => {
                self.long.insert(id.into(), signal);
            }
        }
    }
}

/// Reads the declaration section of `source` and returns the header along
/// with a lazy iterator over the body's events.
pub fn open_trace<R: Read>(source: R) -> Result<(TraceHeader, Events<BufReader<R>>), VcdError> {
    let mut lex = Lexer::new(BufReader::with_capacity(READ_BUFFER, source));
    let mut header = TraceHeader::default();
    let mut ids = IdTable::new();
    // Open scopes, innermost last; the root lives at index 0.
    let mut stack: Vec<Scope> = vec![Scope::default()];

    loop {
        if !lex.advance()? {
            return Err(VcdError::MalformedHeader(
                "end of input before `$enddefinitions`".into(),
            ));
        }
        let line = lex.line();
        let tok = lex.token();
        match tok {
            b"$enddefinitions" => {
                lex.skip_to_end()?;
                break;
            }
            b"$date" | b"$version" | b"$comment" => lex.skip_to_end()?,
            b"$timescale" => {
                let text = lex.collect_to_end()?.join(" ");
                header.timescale = Timescale::parse(&text);
                if header.timescale.is_none() {
                    header.warnings.push(Warning::BadTimescale { line, text });
                }
            }
            b"$scope" => {
                let parts = lex.collect_to_end()?;
                let (kind, name) = match parts.as_slice() {
                    [kind, name, ..] => (kind.clone(), name.clone()),
                    [name] => ("module".to_string(), name.clone()),
                    [] => {
                        return Err(VcdError::MalformedHeader(format!(
                            "line {line}: `$scope` without a name"
                        )))
                    }
                };
                stack.push(Scope {
                    kind,
                    name,
                    items: Vec::new(),
                });
            }
            b"$upscope" => {
                lex.skip_to_end()?;
                if stack.len() < 2 {
                    return Err(VcdError::MalformedHeader(format!(
                        "line {line}: `$upscope` without an open scope"
                    )));
                }
                let done = stack.pop().expect("checked above");
                stack.last_mut().expect("root").items.push(ScopeItem::Scope(done));
            }
            b"$var" => {
                let parts = lex.collect_to_end()?;
                let decl = declare_var(&parts, &stack, &mut header, &mut ids, line)?;
                let index = header.variables.len();
                header.variables.push(decl);
                stack.last_mut().expect("root").items.push(ScopeItem::Var(index));
            }
            t if t.first() == Some(&b'$') => {
                let keyword = String::from_utf8_lossy(t).into_owned();
                lex.skip_to_end()?;
                header.warnings.push(Warning::UnknownDirective { line, keyword });
            }
            t => {
                return Err(VcdError::MalformedHeader(format!(
                    "line {line}: unexpected `{}` in declarations",
                    String::from_utf8_lossy(t)
                )))
            }
        }
    }

    // Close scopes a writer forgot to `$upscope`.
    while stack.len() > 1 {
        let done = stack.pop().expect("len > 1");
        stack.last_mut().expect("root").items.push(ScopeItem::Scope(done));
    }
    header.scope_tree = stack.pop().expect("root");

    // Vector tokens carry one digit per bit plus the `b` prefix.
    lex.set_max_token(header.max_width() + 1);
    let widths = header.signals.iter().map(|s| s.width).collect();
    Ok((
        header,
        Events {
            lex,
            ids,
            widths,
            value: Vec::with_capacity(64),
            last_time: None,
            in_dumpoff: false,
            finished: false,
        },
    ))
}

fn declare_var(
    parts: &[String],
    stack: &[Scope],
    header: &mut TraceHeader,
    ids: &mut IdTable,
    line: u64,
) -> Result<VariableDecl, VcdError> {
    let bad = |why: &str| VcdError::MalformedHeader(format!("line {line}: {why}"));
    let [kind, width, id, reference @ ..] = parts else {
        return Err(bad("`$var` needs a type, width, identifier and name"));
    };
    if reference.is_empty() {
        return Err(bad("`$var` needs a type, width, identifier and name"));
    }
    let width: usize = width
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| bad(&format!("invalid width `{width}`")))?;
    if !is_valid_id_code(id) {
        return Err(bad(&format!("invalid identifier code `{id}`")));
    }

    let signal = match ids.get(id.as_bytes()) {
        Some(s) => {
            let existing = header.signals[s as usize].width;
            if existing != width {
                return Err(bad(&format!(
                    "alias `{id}` declared with width {width}, previously {existing}"
                )));
            }
            s
        }
        None => {
            let s = header.signals.len() as u32;
            header.signals.push(Signal {
                id_code: id.clone(),
                width,
            });
            ids.insert(id.as_bytes(), s);
            s
        }
    };

    let reference = strip_range(&reference.concat());
    let mut name = String::new();
    for scope in &stack[1..] {
        name.push_str(&scope.name);
        name.push('.');
    }
    name.push_str(&reference);

    Ok(VariableDecl {
        id_code: id.clone(),
        name,
        reference,
        width,
        kind: VarKind::from_keyword(kind),
        signal: SignalId(signal),
    })
}

/// Drops a trailing `[msb:lsb]` range; single-bit selects like `[3]` stay
/// since they distinguish bits of one vector.
fn strip_range(reference: &str) -> String {
    if let Some(open) = reference.rfind('[') {
        if reference.ends_with(']') && reference[open..].contains(':') && open > 0 {
            return reference[..open].to_string();
        }
    }
    reference.to_string()
}

/// Lazy iterator over body events. Yields `Err` at most once, then stops.
pub struct Events<R> {
    lex: Lexer<R>,
    ids: IdTable,
    widths: Vec<usize>,
    value: Vec<u8>,
    last_time: Option<u64>,
    in_dumpoff: bool,
    finished: bool,
}

impl<R: std::io::BufRead> Events<R> {
    /// Bytes currently reserved by the iterator's growable scratch buffers.
    pub fn scratch_capacity(&self) -> usize {
        self.lex.token_capacity() + self.value.capacity()
    }

    pub fn line(&self) -> u64 {
        self.lex.line()
    }

    fn lookup(&self, id: &[u8]) -> Result<SignalId, VcdError> {
        self.ids.get(id).map(SignalId).ok_or_else(|| VcdError::UndeclaredIdentifier {
            line: self.lex.line(),
            id: String::from_utf8_lossy(id).into_owned(),
        })
    }

    fn vector(&self, signal: SignalId, digits: &[u8]) -> Result<TraceEvent, VcdError> {
        let width = self.widths[signal.index()];
        let mut word = FourStateWord::unknown(width);
        if !self.in_dumpoff {
            decode_into(digits, &mut word).map_err(|source| VcdError::Value {
                line: self.lex.line(),
                source,
            })?;
        }
        Ok(TraceEvent::VectorChange(signal, word))
    }

    fn read_id(&mut self) -> Result<SignalId, VcdError> {
        if !self.lex.advance()? {
            return Err(VcdError::BadToken {
                line: self.lex.line(),
                token: "<end of input, expected identifier>".into(),
            });
        }
        self.lookup(self.lex.token())
    }

    fn next_event(&mut self) -> Result<Option<TraceEvent>, VcdError> {
        loop {
            if !self.lex.advance()? {
                return Ok(None);
            }
            let line = self.lex.line();
            let tok = self.lex.token();
            let Some(&lead) = tok.first() else { continue };
            match lead {
                b'#' => {
                    let time = std::str::from_utf8(&tok[1..])
                        .ok()
                        .and_then(|s| s.parse::<u64>().ok())
                        .ok_or_else(|| VcdError::BadTimestamp {
                            line,
                            token: String::from_utf8_lossy(tok).into_owned(),
                        })?;
                    match self.last_time {
                        Some(prev) if time < prev => {
                            return Ok(Some(TraceEvent::Warning(Warning::NonMonotonicTime {
                                line,
                                found: time,
                                clamped_to: prev,
                            })));
                        }
                        _ => {
                            self.last_time = Some(time);
                            return Ok(Some(TraceEvent::TimeAdvance(time)));
                        }
                    }
                }
                b'0' | b'1' | b'x' | b'X' | b'z' | b'Z' => {
                    let v = LogicValue::from_byte(lead).expect("matched a logic digit");
                    let signal = self.lookup(&tok[1..])?;
                    let v = if self.in_dumpoff { LogicValue::X } else { v };
                    if self.widths[signal.index()] == 1 {
                        return Ok(Some(TraceEvent::ScalarChange(signal, v)));
                    }
                    let digit = [v.as_char() as u8];
                    return self.vector(signal, &digit).map(Some);
                }
                b'b' | b'B' => {
                    self.value.clear();
                    self.value.extend_from_slice(tok);
                    let signal = self.read_id()?;
                    let digits = std::mem::take(&mut self.value);
                    let ev = self.vector(signal, &digits);
                    self.value = digits;
                    return ev.map(Some);
                }
                b'r' | b'R' => {
                    let value = std::str::from_utf8(&tok[1..])
                        .ok()
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| VcdError::BadToken {
                            line,
                            token: String::from_utf8_lossy(tok).into_owned(),
                        })?;
                    let signal = self.read_id()?;
                    return Ok(Some(TraceEvent::RealChange(signal, value)));
                }
                b'$' => {
                    let kind = match tok {
                        b"$end" => {
                            self.in_dumpoff = false;
                            continue;
                        }
                        b"$dumpvars" => DumpKind::Dumpvars,
                        b"$dumpon" => DumpKind::Dumpon,
                        b"$dumpall" => DumpKind::Dumpall,
                        b"$dumpoff" => {
                            self.in_dumpoff = true;
                            DumpKind::Dumpoff
                        }
                        b"$comment" => {
                            self.lex.skip_to_end()?;
                            continue;
                        }
                        other => {
                            let keyword = String::from_utf8_lossy(other).into_owned();
                            self.lex.skip_to_end()?;
                            return Ok(Some(TraceEvent::Warning(Warning::UnknownDirective {
                                line,
                                keyword,
                            })));
                        }
                    };
                    return Ok(Some(TraceEvent::DumpDirective(kind)));
                }
                _ => {
                    return Err(VcdError::BadToken {
                        line,
                        token: String::from_utf8_lossy(tok).into_owned(),
                    })
                }
            }
        }
    }
}

impl<R: std::io::BufRead> Iterator for Events<R> {
    type Item = Result<TraceEvent, VcdError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.next_event() {
            Ok(Some(ev)) => Some(Ok(ev)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}
