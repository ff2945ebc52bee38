// SPDX-License-Identifier: Apache-2.0

//! Re-serialization of a parsed header and event stream.

use std::io::{self, Write};

use super::{Scope, ScopeItem, TraceEvent, TraceHeader};

pub struct VcdWriter<'h, W> {
    out: W,
    header: &'h TraceHeader,
    block_open: bool,
}

impl<'h, W: Write> VcdWriter<'h, W> {
    /// Writes the declaration section and returns a writer for the body.
    pub fn new(mut out: W, header: &'h TraceHeader) -> io::Result<Self> {
        if let Some(ts) = header.timescale {
            writeln!(out, "$timescale {ts} $end")?;
        }
        write_scope(&mut out, header, &header.scope_tree)?;
        writeln!(out, "$enddefinitions $end")?;
        Ok(VcdWriter {
            out,
            header,
            block_open: false,
        })
    }

    fn close_block(&mut self) -> io::Result<()> {
        if self.block_open {
            writeln!(self.out, "$end")?;
            self.block_open = false;
        }
        Ok(())
    }

    pub fn event(&mut self, event: &TraceEvent) -> io::Result<()> {
        let id = |s: &super::SignalId| &self.header.signal(*s).id_code;
        match event {
            TraceEvent::TimeAdvance(t) => {
                self.close_block()?;
                writeln!(self.out, "#{t}")
            }
            TraceEvent::ScalarChange(s, v) => writeln!(self.out, "{v}{}", id(s)),
            TraceEvent::VectorChange(s, w) => writeln!(self.out, "b{w} {}", id(s)),
            TraceEvent::RealChange(s, r) => writeln!(self.out, "r{r} {}", id(s)),
            TraceEvent::DumpDirective(kind) => {
                self.close_block()?;
                self.block_open = true;
                writeln!(self.out, "{}", kind.keyword())
            }
            TraceEvent::Warning(_) => Ok(()),
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.close_block()?;
        self.out.flush()?;
        Ok(self.out)
    }
}

fn write_scope<W: Write>(out: &mut W, header: &TraceHeader, scope: &Scope) -> io::Result<()> {
    for item in &scope.items {
        match item {
            ScopeItem::Var(i) => {
                let v = &header.variables[*i];
                writeln!(
                    out,
                    "$var {} {} {} {} $end",
                    v.kind.keyword(),
                    v.width,
                    v.id_code,
                    v.reference
                )?;
            }
            ScopeItem::Scope(child) => {
                writeln!(out, "$scope {} {} $end", child.kind, child.name)?;
                write_scope(out, header, child)?;
                writeln!(out, "$upscope $end")?;
            }
        }
    }
    Ok(())
}
