// SPDX-License-Identifier: Apache-2.0

//! Trace generators shared by the integration test targets.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub const FIXTURES: [&str; 5] = ["counter.vcd", "trap_eoi.vcd", "xz.vcd", "aliases.vcd", "dumpoff.vcd"];

/// Identifier code number `i`, in base 94 over `!`..=`~`.
pub fn id_code(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'!' + (i % 94) as u8);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    String::from_utf8(s).unwrap()
}

/// `$var` declarations for flat top-level variables.
pub fn header(vars: &[(String, usize)]) -> String {
    let mut out = String::from("$timescale 1ns $end\n");
    for (i, (name, width)) in vars.iter().enumerate() {
        let kind = if *width == 1 { "wire" } else { "reg" };
        writeln!(out, "$var {kind} {width} {} {name} $end", id_code(i)).unwrap();
    }
    out.push_str("$enddefinitions $end\n");
    out
}

fn change(out: &mut String, width: usize, value: Option<u64>, id: &str) {
    match (width, value) {
        (1, Some(v)) => writeln!(out, "{v}{id}").unwrap(),
        (1, None) => writeln!(out, "x{id}").unwrap(),
        (_, Some(v)) => writeln!(out, "b{v:b} {id}").unwrap(),
        (_, None) => writeln!(out, "bx {id}").unwrap(),
    }
}

/// A VCD holding `rows[t]` at time `10 * t`, dumping only changed values.
/// Under every-timestamp sampling it yields one sample per row that differs
/// from its predecessor (and always one for the first row).
pub fn vcd_from_rows(vars: &[(String, usize)], rows: &[Vec<Option<u64>>]) -> String {
    let mut out = header(vars);
    let mut prev: Option<&Vec<Option<u64>>> = None;
    for (t, row) in rows.iter().enumerate() {
        writeln!(out, "#{}", 10 * t).unwrap();
        for (i, ((_, width), v)) in vars.iter().zip(row).enumerate() {
            if prev.is_none_or(|p| p[i] != *v) {
                change(&mut out, *width, *v, &id_code(i));
            }
        }
        prev = Some(row);
    }
    out
}

pub fn flat_vars(n: usize, width: usize) -> Vec<(String, usize)> {
    (0..n).map(|i| (format!("v{i}"), width)).collect()
}

/// Rows with planted structure: copies, linear images, constants, moduli,
/// small sets, orderings and sums of earlier variables, plus free noise
/// and sporadic unknowns. All values stay below 2^16.
pub fn planted_rows<R: Rng>(rng: &mut R, vars: usize, samples: usize) -> Vec<Vec<Option<u64>>> {
    #[derive(Clone, Copy)]
    enum Shape {
        Free(u64),
        Copy(usize),
        Affine(usize, u64, u64),
        Constant(u64),
        Modular(u64, u64),
        Set([u64; 3], usize),
        Above(usize, u64),
        Sum(usize, usize),
    }
    let shapes: Vec<Shape> = (0..vars)
        .map(|v| {
            let pick = if v == 0 { 0 } else { rng.gen_range(0..8) };
            let earlier = if v == 0 { 0 } else { rng.gen_range(0..v) };
            match pick {
                0 => Shape::Free(rng.gen_range(2..1000)),
                1 => Shape::Copy(earlier),
                2 => Shape::Affine(earlier, rng.gen_range(1..4), rng.gen_range(0..50)),
                3 => Shape::Constant(rng.gen_range(0..300)),
                4 => Shape::Modular(rng.gen_range(2..9), rng.gen_range(0..9)),
                5 => Shape::Set([rng.gen_range(0..20), rng.gen_range(0..20), rng.gen_range(0..20)], rng.gen_range(1..4)),
                6 => Shape::Above(earlier, rng.gen_range(0..3)),
                _ => Shape::Sum(earlier, rng.gen_range(0..v)),
            }
        })
        .collect();
    let unknown_rate = if rng.gen_bool(0.5) { 0.0 } else { 0.04 };
    (0..samples)
        .map(|_| {
            let mut row: Vec<Option<u64>> = Vec::with_capacity(vars);
            for shape in &shapes {
                let value = match *shape {
                    Shape::Free(range) => Some(rng.gen_range(0..range)),
                    Shape::Copy(a) => row[a],
                    Shape::Affine(a, k, c) => row[a].map(|x| k * x + c),
                    Shape::Constant(c) => Some(c),
                    Shape::Modular(m, r) => Some(rng.gen_range(0..100) * m + r % m),
                    Shape::Set(vals, n) => Some(vals[rng.gen_range(0..n)]),
                    Shape::Above(a, slack) => row[a].map(|x| x + rng.gen_range(0..=slack)),
                    Shape::Sum(a, b) => row[a].zip(row[b]).map(|(x, y)| x + y),
                };
                let value = if rng.gen_bool(unknown_rate) { None } else { value };
                row.push(value.map(|v| v.min(1 << 16)));
            }
            row
        })
        .collect()
}

/// Writer that only counts what passes through it.
#[derive(Debug, Default)]
pub struct CountingSink {
    pub bytes: u64,
    pub lines: u64,
}

impl Write for CountingSink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.bytes += buf.len() as u64;
        self.lines += buf.iter().filter(|&&b| b == b'\n').count() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// A synthetic VCD produced on the fly: `vars` variables of mixed width,
/// `timestamps` timestamps, each changing a few variables. Never
/// materialized in memory.
pub struct GeneratedVcd {
    vars: Vec<(String, usize)>,
    timestamps: u64,
    changes_per_step: usize,
    step: u64,
    header: Option<Vec<u8>>,
    pending: Vec<u8>,
    pos: usize,
    state: u64,
    pub produced: u64,
}

impl GeneratedVcd {
    pub fn new(vars: Vec<(String, usize)>, timestamps: u64, changes_per_step: usize) -> Self {
        let header = header(&vars).into_bytes();
        GeneratedVcd {
            vars,
            timestamps,
            changes_per_step,
            step: 0,
            header: Some(header),
            pending: Vec::with_capacity(4096),
            pos: 0,
            state: 0x9e37_79b9_7f4a_7c15,
            produced: 0,
        }
    }

    /// `vars` variables named like the nets of a CPU core.
    pub fn design_vars(prefix: &str, count: usize) -> Vec<(String, usize)> {
        const WIDTHS: [usize; 8] = [1, 1, 32, 8, 1, 32, 5, 16];
        (0..count).map(|i| (format!("{prefix}.core.reg_{i:03}"), WIDTHS[i % WIDTHS.len()])).collect()
    }

    fn next_random(&mut self) -> u64 {
        // xorshift64*
        self.state ^= self.state >> 12;
        self.state ^= self.state << 25;
        self.state ^= self.state >> 27;
        self.state.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    fn refill(&mut self) -> bool {
        self.pending.clear();
        self.pos = 0;
        if let Some(h) = self.header.take() {
            self.pending = h;
            return true;
        }
        if self.step >= self.timestamps {
            return false;
        }
        let mut buf = itoa::Buffer::new();
        self.pending.push(b'#');
        self.pending.extend_from_slice(buf.format(self.step * 10).as_bytes());
        self.pending.push(b'\n');
        let n = self.vars.len();
        let first = self.step == 0;
        let count = if first { n } else { self.changes_per_step };
        for k in 0..count {
            let r = self.next_random();
            // Variable 0 changes every step so each timestamp is a sample.
            let i = if first { k } else if k == 0 { 0 } else { (r % n as u64) as usize };
            let width = self.vars[i].1;
            let value = if i == 0 { self.step } else { r >> 20 };
            let masked = if width >= 64 { value } else { value & ((1u64 << width) - 1) };
            if width == 1 {
                self.pending.push(b'0' + masked as u8);
            } else {
                self.pending.push(b'b');
                let bits = 64 - masked.leading_zeros().min(63) as usize;
                for b in (0..bits).rev() {
                    self.pending.push(b'0' + ((masked >> b) & 1) as u8);
                }
                self.pending.push(b' ');
            }
            self.pending.extend_from_slice(id_code(i).as_bytes());
            self.pending.push(b'\n');
        }
        self.step += 1;
        true
    }
}

impl Read for GeneratedVcd {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if self.pos == self.pending.len() && !self.refill() {
            return Ok(0);
        }
        let n = out.len().min(self.pending.len() - self.pos);
        out[..n].copy_from_slice(&self.pending[self.pos..self.pos + n]);
        self.pos += n;
        self.produced += n as u64;
        Ok(n)
    }
}
