//! Parsing of canonical class text.

use thiserror::Error;

use super::{CapCount, ClassError, GammaClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassParseError {
    #[error("at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("malformed header `{0}`; expected `k=<k> depth=<i>`")]
    Header(String),
    #[error("{what} not given by header or argument")]
    Missing { what: &'static str },
    #[error("header says {what}={header} but {given} was requested")]
    Conflict {
        what: &'static str,
        header: u32,
        given: u32,
    },
    #[error(transparent)]
    Class(#[from] ClassError),
}

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
    base: usize,
    k: u32,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self
            .text
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> ClassParseError {
        ClassParseError::Syntax {
            offset: self.base + self.pos,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), ClassParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn class(&mut self, depth: u32) -> Result<GammaClass, ClassParseError> {
        match self.peek() {
            Some(b'*') if depth == 0 => {
                self.pos += 1;
                Ok(GammaClass::unit(self.k))
            }
            Some(b'*') => Err(self.err(format!("`*` is a depth-0 class, expected depth {depth}"))),
            Some(b'{') if depth == 0 => Err(self.err("expected `*` at depth 0")),
            Some(b'{') => {
                self.pos += 1;
                let mut entries = Vec::new();
                if self.peek() == Some(b'}') {
                    self.pos += 1;
                    return Ok(GammaClass::new(self.k, depth, entries)?);
                }
                loop {
                    let count = self.count()?;
                    self.eat(b':')?;
                    let key = self.class(depth - 1)?;
                    entries.push((key, count));
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b'}') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.err("expected `,` or `}`")),
                    }
                }
                Ok(GammaClass::new(self.k, depth, entries)?)
            }
            _ => Err(self.err("expected `*` or `{`")),
        }
    }

    fn count(&mut self) -> Result<CapCount, ClassParseError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok(CapCount::Omega)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
                digits
                    .parse()
                    .map(CapCount::Exactly)
                    .map_err(|_| self.err(format!("count `{digits}` is too large")))
            }
            _ => Err(self.err("expected a count (digits or `w`)")),
        }
    }
}

fn parse_header(line: &str) -> Option<(u32, u32)> {
    let mut k = None;
    let mut depth = None;
    for field in line.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        let value: u32 = value.parse().ok()?;
        match key {
            "k" if k.is_none() => k = Some(value),
            "depth" if depth.is_none() => depth = Some(value),
            _ => return None,
        }
    }
    Some((k?, depth?))
}

fn reconcile(
    what: &'static str,
    header: Option<u32>,
    given: Option<u32>,
) -> Result<u32, ClassParseError> {
    match (header, given) {
        (Some(h), Some(g)) if h != g => Err(ClassParseError::Conflict {
            what,
            header: h,
            given: g,
        }),
        (Some(v), _) | (None, Some(v)) => Ok(v),
        (None, None) => Err(ClassParseError::Missing { what }),
    }
}

/// Parses canonical class text, optionally preceded by a `k=<k> depth=<i>`
/// header line. Parameters missing from the header must be supplied.
/// Whitespace between tokens is ignored and entries may come in any order.
pub fn parse_class(
    text: &str,
    k: Option<u32>,
    depth: Option<u32>,
) -> Result<GammaClass, ClassParseError> {
    let trimmed = text.trim_start();
    let mut base = text.len() - trimmed.len();
    let mut body = trimmed;
    let mut header = None;
    if trimmed.starts_with('k') {
        let (line, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
        header =
            Some(parse_header(line).ok_or_else(|| ClassParseError::Header(line.trim().into()))?);
        base += trimmed.len() - rest.len();
        body = rest;
    }
    let k = reconcile("k", header.map(|h| h.0), k)?;
    let depth = reconcile("depth", header.map(|h| h.1), depth)?;
    if k == 0 {
        return Err(ClassError::ZeroCap.into());
    }
    let mut cur = Cursor {
        text: body.as_bytes(),
        pos: 0,
        base,
        k,
    };
    let c = cur.class(depth)?;
    if cur.peek().is_some() {
        return Err(cur.err("trailing input after class"));
    }
    Ok(c)
}
