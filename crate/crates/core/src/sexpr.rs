//! Minimal s-expression reader with source positions.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SexprKind {
    Atom(String),
    Str(String),
    List(Vec<Sexpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sexpr {
    pub kind: SexprKind,
    pub line: usize,
    pub col: usize,
}

impl Sexpr {
    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            SexprKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn string(&self) -> Option<&str> {
        match &self.kind {
            SexprKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match &self.kind {
            SexprKind::List(l) => Some(l),
            _ => None,
        }
    }

    /// Splits `(head args...)` into its head atom and arguments.
    pub fn head(&self) -> Result<(&str, &[Sexpr])> {
        let items = self.list().ok_or_else(|| self.err("expected a list"))?;
        let (first, rest) = items.split_first().ok_or_else(|| self.err("empty list"))?;
        let head = first
            .atom()
            .ok_or_else(|| first.err("expected a keyword"))?;
        Ok((head, rest))
    }

    /// Checks that a form has exactly `n` arguments.
    pub fn expect_args<'a>(&self, args: &'a [Sexpr], n: usize, form: &str) -> Result<&'a [Sexpr]> {
        if args.len() != n {
            return Err(self.err(format!(
                "`{form}` takes {n} argument(s), got {}",
                args.len()
            )));
        }
        Ok(args)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexprKind::Atom(a) => write!(f, "{a}"),
            SexprKind::Str(s) => write!(f, "{s:?}"),
            SexprKind::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexpr> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        match self.chars.peek().copied() {
            None => Err(Error::parse(line, col, "unexpected end of input")),
            Some(')') => Err(Error::parse(line, col, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(Error::parse(line, col, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        _ => items.push(self.read()?),
                    }
                }
                Ok(Sexpr {
                    kind: SexprKind::List(items),
                    line,
                    col,
                })
            }
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Error::parse(line, col, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some(c) => s.push(c),
                            None => return Err(Error::parse(line, col, "unterminated string")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                Ok(Sexpr {
                    kind: SexprKind::Str(s),
                    line,
                    col,
                })
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexpr {
                    kind: SexprKind::Atom(s),
                    line,
                    col,
                })
            }
        }
    }
}

/// Reads every top-level form in `src`.
pub fn parse_all(src: &str) -> Result<Vec<Sexpr>> {
    let mut r = Reader {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

/// Reads exactly one form.
pub fn parse_one(src: &str) -> Result<Sexpr> {
    let mut forms = parse_all(src)?;
    match forms.len() {
        1 => Ok(forms.pop().unwrap()),
        0 => Err(Error::parse(1, 1, "empty input")),
        _ => Err(forms[1].err("expected a single form")),
    }
}
