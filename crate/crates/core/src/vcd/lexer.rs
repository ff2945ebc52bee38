// SPDX-License-Identifier: Apache-2.0

use std::io::BufRead;

use super::VcdError;

/// Upper bound on a single whitespace-delimited token. Vector values are the
/// longest legitimate tokens, so the bound is raised to cover the widest
/// declared variable once the header is known.
pub(crate) const DEFAULT_MAX_TOKEN: usize = 4096;

/// Whitespace tokenizer over a buffered byte stream. The current token lives
/// in a reusable buffer; nothing else is retained between calls.
pub(crate) struct Lexer<R> {
    reader: R,
    tok: Vec<u8>,
    line: u64,
    max_token: usize,
}

impl<R: BufRead> Lexer<R> {
    pub fn new(reader: R) -> Self {
        Lexer {
            reader,
            tok: Vec::with_capacity(64),
            line: 1,
            max_token: DEFAULT_MAX_TOKEN,
        }
    }

    pub fn set_max_token(&mut self, max: usize) {
        self.max_token = max.max(DEFAULT_MAX_TOKEN);
    }

    #[inline]
    pub fn line(&self) -> u64 {
        self.line
    }

    #[inline]
    pub fn token(&self) -> &[u8] {
        &self.tok
    }

    pub fn token_capacity(&self) -> usize {
        self.tok.capacity()
    }

    /// Advances to the next token. Returns `false` at end of input.
    pub fn advance(&mut self) -> Result<bool, VcdError> {
        loop {
            let buf = self.reader.fill_buf()?;
            if buf.is_empty() {
                return Ok(false);
            }
            let mut skip = 0;
            while skip < buf.len() && buf[skip].is_ascii_whitespace() {
                if buf[skip] == b'\n' {
                    self.line += 1;
                }
                skip += 1;
            }
            let exhausted = skip == buf.len();
            self.reader.consume(skip);
            if !exhausted {
                break;
            }
        }

        self.tok.clear();
        loop {
            let buf = self.reader.fill_buf()?;
            if buf.is_empty() {
                break;
            }
            let end = buf
                .iter()
                .position(|b| b.is_ascii_whitespace())
                .unwrap_or(buf.len());
            if self.tok.len() + end > self.max_token {
                return Err(VcdError::TokenTooLong {
                    line: self.line,
                    limit: self.max_token,
                });
            }
            self.tok.extend_from_slice(&buf[..end]);
            let done = end < buf.len();
            self.reader.consume(end);
            if done {
                break;
            }
        }
        Ok(true)
    }

    /// Consumes tokens up to and including the next `$end`.
    pub fn skip_to_end(&mut self) -> Result<(), VcdError> {
        while self.advance()? {
            if self.tok == b"$end" {
                return Ok(());
            }
        }
        Err(VcdError::UnterminatedDirective { line: self.line })
    }

    /// Collects tokens up to the next `$end` (exclusive) as strings.
    pub fn collect_to_end(&mut self) -> Result<Vec<String>, VcdError> {
        let mut out = Vec::new();
        while self.advance()? {
            if self.tok == b"$end" {
                return Ok(out);
            }
            out.push(String::from_utf8_lossy(&self.tok).into_owned());
        }
        Err(VcdError::UnterminatedDirective { line: self.line })
    }
}
