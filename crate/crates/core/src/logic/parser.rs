//! Recursive-descent parser for the concrete grammar:
//!
//! ```text
//! formula  := implies
//! implies  := or ( "->" implies )?
//! or       := and ( "|" and )*
//! and      := unary ( "&" unary )*
//! unary    := "!" unary | quant | "(" formula ")" | atom
//! quant    := ( "exists" | "forall" ) ident "." formula
//! atom     := "parent" "(" term "," term ")"
//!           | "d" "(" term "," term ")" "=" number
//!           | term "=" term
//! term     := "R" | ident
//! ```
//!
//! A quantifier body extends as far right as possible.

use super::{Dialect, Formula, FormulaError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'=' => Tok::Eq,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..=i];
                let n = digits
                    .parse()
                    .map_err(|_| syntax(start, format!("number `{digits}` is too large")))?;
                Tok::Number(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric()
                        || bytes[i + 1] == b'_'
                        || bytes[i + 1] == b'\'')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().expect("in bounds");
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dialect: Dialect,
    scope: Vec<&'a str>,
    names: &'a str,
}

const KEYWORDS: [&str; 4] = ["exists", "forall", "parent", "R"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), FormulaError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!(
                    "expected {}, found {}",
                    want.describe(),
                    self.peek().describe()
                ),
            ))
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(kw) if kw == "exists" || kw == "forall" => {
                self.bump();
                let var_at = self.offset();
                let var = match self.bump() {
                    (Tok::Ident(v), _) if !KEYWORDS.contains(&v.as_str()) => v,
                    (t, at) => {
                        return Err(syntax(
                            at,
                            format!("expected a variable name, found {}", t.describe()),
                        ))
                    }
                };
                self.expect(Tok::Dot)?;
                let name = self.intern(var_at, &var);
                self.scope.push(name);
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                Ok(if kw == "exists" {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                })
            }
            _ => self.atom(),
        }
    }

    /// Borrows the variable name back out of the source text so the scope
    /// stack can hold `&str`.
    fn intern(&self, at: usize, var: &str) -> &'a str {
        &self.names[at..at + var.len()]
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let at = self.offset();
        if let Tok::Ident(name) = self.peek().clone() {
            if name == "parent" {
                self.bump();
                let (a, b) = self.pair()?;
                return Ok(Formula::parent(a, b));
            }
            if name == "d" && *self.peek_at(1) == Tok::LParen {
                self.bump();
                let (a, b) = self.pair()?;
                self.expect(Tok::Eq)?;
                let s_at = self.offset();
                let s = match self.bump() {
                    (Tok::Number(n), _) => n,
                    (t, at) => {
                        return Err(syntax(
                            at,
                            format!("expected a distance, found {}", t.describe()),
                        ))
                    }
                };
                return match self.dialect {
                    Dialect::Standard => Err(FormulaError::DistanceInStandard { offset: at }),
                    Dialect::Ball { m } if s == 0 || s > u64::from(m) => {
                        Err(FormulaError::DistanceBound { s, m, offset: s_at })
                    }
                    Dialect::Ball { .. } => Ok(Formula::Dist(a, b, s as u32)),
                };
            }
        }
        let a = self.term()?;
        self.expect(Tok::Eq)?;
        let b = self.term()?;
        Ok(Formula::eq(a, b))
    }

    fn pair(&mut self) -> Result<(Term, Term), FormulaError> {
        self.expect(Tok::LParen)?;
        let a = self.term()?;
        self.expect(Tok::Comma)?;
        let b = self.term()?;
        self.expect(Tok::RParen)?;
        Ok((a, b))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        match self.bump() {
            (Tok::Ident(v), _) if v == "R" => Ok(Term::Root),
            (Tok::Ident(v), at) if !KEYWORDS.contains(&v.as_str()) => {
                if !self.scope.contains(&v.as_str()) {
                    return Err(FormulaError::Unbound {
                        name: v,
                        offset: at,
                    });
                }
                Ok(Term::Var(v))
            }
            (t, at) => Err(syntax(
                at,
                format!("expected a term, found {}", t.describe()),
            )),
        }
    }
}

/// Parses a sentence. Free variables, distance atoms outside the ball
/// dialect and distances outside `1..=m` are rejected; errors carry byte
/// offsets into `text`.
pub fn parse_formula(text: &str, dialect: Dialect) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        dialect,
        scope: Vec::new(),
        names: text,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.offset(),
            format!("unexpected {} after formula", p.peek().describe()),
        ));
    }
    Ok(f)
}
