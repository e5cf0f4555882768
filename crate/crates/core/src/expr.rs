//! First-order term language shared by programs and assertions.
//!
//! Integer terms evaluate in exact `i64` arithmetic; the finite store domain
//! only comes into play when a value is written (see [`crate::config::StoreSpace`]).
//! Boolean expressions may quantify over the store domain with `exists`.

use std::fmt;

use crate::error::{Error, Result};
use crate::sexpr::{Sexpr, SexprKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
    /// `exists v . body`, ranging over the configured value domain.
    Exists(String, Box<BExpr>),
}

/// Variable lookup used during evaluation.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<i64>;
    /// Values an `exists` quantifier ranges over.
    fn quantifier_range(&self) -> (i64, i64);
}

/// An environment extended with one extra binding.
pub struct Bind<'a> {
    pub parent: &'a dyn Env,
    pub name: &'a str,
    pub value: i64,
}

impl Env for Bind<'_> {
    fn lookup(&self, name: &str) -> Option<i64> {
        if name == self.name {
            Some(self.value)
        } else {
            self.parent.lookup(name)
        }
    }

    fn quantifier_range(&self) -> (i64, i64) {
        self.parent.quantifier_range()
    }
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, env: &dyn Env) -> Result<i64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => env
                .lookup(v)
                .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
            Expr::Neg(a) => a.eval(env)?.saturating_neg(),
            Expr::Add(a, b) => a.eval(env)?.saturating_add(b.eval(env)?),
            Expr::Sub(a, b) => a.eval(env)?.saturating_sub(b.eval(env)?),
            Expr::Mul(a, b) => a.eval(env)?.saturating_mul(b.eval(env)?),
        })
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Expr::Neg(a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Prefix (s-expression) rendering, the program syntax.
    pub fn to_sexpr(&self) -> String {
        match self {
            Expr::Const(c) => c.to_string(),
            Expr::Var(v) => v.clone(),
            Expr::Neg(a) => format!("(- {})", a.to_sexpr()),
            Expr::Add(a, b) => format!("(+ {} {})", a.to_sexpr(), b.to_sexpr()),
            Expr::Sub(a, b) => format!("(- {} {})", a.to_sexpr(), b.to_sexpr()),
            Expr::Mul(a, b) => format!("(* {} {})", a.to_sexpr(), b.to_sexpr()),
        }
    }
}

impl CmpOp {
    pub fn apply(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" | "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }
}

impl BExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> BExpr {
        BExpr::Cmp(op, a, b)
    }

    pub fn and(a: BExpr, b: BExpr) -> BExpr {
        BExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BExpr, b: BExpr) -> BExpr {
        BExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BExpr) -> BExpr {
        BExpr::Not(Box::new(a))
    }

    pub fn eval(&self, env: &dyn Env) -> Result<bool> {
        Ok(match self {
            BExpr::True => true,
            BExpr::False => false,
            BExpr::Cmp(op, a, b) => op.apply(a.eval(env)?, b.eval(env)?),
            BExpr::Not(a) => !a.eval(env)?,
            BExpr::And(a, b) => a.eval(env)? && b.eval(env)?,
            BExpr::Or(a, b) => a.eval(env)? || b.eval(env)?,
            BExpr::Exists(v, body) => {
                let (lo, hi) = env.quantifier_range();
                for value in lo..=hi {
                    let inner = Bind {
                        parent: env,
                        name: v,
                        value,
                    };
                    if body.eval(&inner)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            BExpr::True | BExpr::False => {}
            BExpr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BExpr::Not(a) => a.collect_vars(out),
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BExpr::Exists(v, body) => {
                let mut inner = Vec::new();
                body.collect_vars(&mut inner);
                for name in inner {
                    if &name != v && !out.contains(&name) {
                        out.push(name);
                    }
                }
            }
        }
    }

    pub fn to_sexpr(&self) -> String {
        match self {
            BExpr::True => "true".into(),
            BExpr::False => "false".into(),
            BExpr::Cmp(op, a, b) => format!("({} {} {})", op.symbol(), a.to_sexpr(), b.to_sexpr()),
            BExpr::Not(a) => format!("(not {})", a.to_sexpr()),
            BExpr::And(a, b) => format!("(and {} {})", a.to_sexpr(), b.to_sexpr()),
            BExpr::Or(a, b) => format!("(or {} {})", a.to_sexpr(), b.to_sexpr()),
            BExpr::Exists(v, body) => format!("(exists {} {})", v, body.to_sexpr()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0 => write!(f, "({c})"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a} * {b}"),
        }
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExpr::True => write!(f, "true"),
            BExpr::False => write!(f, "false"),
            BExpr::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            BExpr::Not(a) => write!(f, "!({a})"),
            BExpr::And(a, b) => write!(f, "({a} & {b})"),
            BExpr::Or(a, b) => write!(f, "({a} | {b})"),
            BExpr::Exists(v, body) => write!(f, "(exists {v}. {body})"),
        }
    }
}

/// A cost term: an integer expression, `inf`, or a conditional.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CostTerm {
    Finite(Expr),
    Inf,
    Ite(BExpr, Box<CostTerm>, Box<CostTerm>),
}

impl fmt::Display for CostTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostTerm::Finite(e) => write!(f, "{e}"),
            CostTerm::Inf => write!(f, "inf"),
            CostTerm::Ite(b, t, e) => write!(f, "if {b} then {t} else {e}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Infix parser, used for `(formula "...")`, `(cost "...")` and CLI arguments.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Dot,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: i64 = src[start..i]
                .parse()
                .map_err(|_| Error::parse(1, start + 1, "integer literal out of range"))?;
            out.push((Tok::Int(n), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric()
                    || bytes[i] == b'_'
                    || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let op: Option<&'static str> = match two {
            "<=" => Some("<="),
            ">=" => Some(">="),
            "!=" => Some("!="),
            "==" => Some("="),
            "&&" => Some("&"),
            "||" => Some("|"),
            _ => None,
        };
        if let Some(op) = op {
            out.push((Tok::Op(op), start));
            i += 2;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '.' => Tok::Dot,
            '+' => Tok::Op("+"),
            '-' => Tok::Op("-"),
            '*' => Tok::Op("*"),
            '=' => Tok::Op("="),
            '<' => Tok::Op("<"),
            '>' => Tok::Op(">"),
            '&' => Tok::Op("&"),
            '|' => Tok::Op("|"),
            '!' | '~' => Tok::Op("!"),
            _ => {
                return Err(Error::parse(
                    1,
                    start + 1,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

/// Untyped syntax tree produced by the Pratt parser and then checked into
/// [`Expr`], [`BExpr`] or [`CostTerm`].
#[derive(Debug, Clone)]
enum Ast {
    Int(i64),
    Ident(String),
    Inf,
    Unary(&'static str, Box<Ast>),
    Binary(&'static str, Box<Ast>, Box<Ast>),
    Exists(String, Box<Ast>),
    Ite(Box<Ast>, Box<Ast>, Box<Ast>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

fn infix_power(op: &str) -> Option<(u8, u8)> {
    Some(match op {
        "|" => (1, 2),
        "&" => (3, 4),
        "=" | "!=" | "<" | "<=" | ">" | ">=" => (7, 8),
        "+" | "-" => (9, 10),
        "*" => (11, 12),
        _ => return None,
    })
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            len: src.len(),
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let col = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.len) + 1;
        Error::parse(1, col, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect_ident(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Ident(s)) if s == kw => Ok(()),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected `{kw}`")))
            }
        }
    }

    fn parse(&mut self, min_bp: u8) -> Result<Ast> {
        let mut lhs = match self.next() {
            Some(Tok::Int(n)) => Ast::Int(n),
            Some(Tok::Ident(s)) => match s.as_str() {
                "inf" => Ast::Inf,
                "exists" => {
                    let v = match self.next() {
                        Some(Tok::Ident(v)) => v,
                        _ => return Err(self.err("expected a variable after `exists`")),
                    };
                    if self.peek() == Some(&Tok::Dot) {
                        self.pos += 1;
                    }
                    let body = self.parse(0)?;
                    Ast::Exists(v, Box::new(body))
                }
                "if" => {
                    let c = self.parse(0)?;
                    self.expect_ident("then")?;
                    let t = self.parse(0)?;
                    self.expect_ident("else")?;
                    let e = self.parse(0)?;
                    Ast::Ite(Box::new(c), Box::new(t), Box::new(e))
                }
                _ => Ast::Ident(s),
            },
            Some(Tok::LParen) => {
                let inner = self.parse(0)?;
                match self.next() {
                    Some(Tok::RParen) => inner,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected `)`"));
                    }
                }
            }
            Some(Tok::Op("-")) => Ast::Unary("-", Box::new(self.parse(13)?)),
            Some(Tok::Op("!")) => Ast::Unary("!", Box::new(self.parse(5)?)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err("expected an expression"));
            }
        };
        while let Some(Tok::Op(op)) = self.peek() {
            let op = *op;
            let (l, r) = match infix_power(op) {
                Some(p) => p,
                None => break,
            };
            if l < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.parse(r)?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn finish(mut self) -> Result<Ast> {
        let ast = self.parse(0)?;
        if self.pos < self.toks.len() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(ast)
    }
}

fn ast_expr(a: &Ast) -> Result<Expr> {
    Ok(match a {
        Ast::Int(n) => Expr::Const(*n),
        Ast::Ident(s) if s == "true" || s == "false" => {
            return Err(Error::parse(
                1,
                1,
                "boolean used where an integer term is expected",
            ))
        }
        Ast::Ident(s) => Expr::Var(s.clone()),
        Ast::Unary("-", x) => match ast_expr(x)? {
            Expr::Const(n) => Expr::Const(-n),
            e => Expr::Neg(Box::new(e)),
        },
        Ast::Binary("+", x, y) => Expr::add(ast_expr(x)?, ast_expr(y)?),
        Ast::Binary("-", x, y) => Expr::sub(ast_expr(x)?, ast_expr(y)?),
        Ast::Binary("*", x, y) => Expr::mul(ast_expr(x)?, ast_expr(y)?),
        _ => return Err(Error::parse(1, 1, "expected an integer term")),
    })
}

fn ast_bexpr(a: &Ast) -> Result<BExpr> {
    Ok(match a {
        Ast::Ident(s) if s == "true" => BExpr::True,
        Ast::Ident(s) if s == "false" => BExpr::False,
        Ast::Unary("!", x) => BExpr::not(ast_bexpr(x)?),
        Ast::Binary("&", x, y) => BExpr::and(ast_bexpr(x)?, ast_bexpr(y)?),
        Ast::Binary("|", x, y) => BExpr::or(ast_bexpr(x)?, ast_bexpr(y)?),
        Ast::Binary(op, x, y) if CmpOp::from_symbol(op).is_some() => {
            BExpr::Cmp(CmpOp::from_symbol(op).unwrap(), ast_expr(x)?, ast_expr(y)?)
        }
        Ast::Exists(v, body) => BExpr::Exists(v.clone(), Box::new(ast_bexpr(body)?)),
        _ => return Err(Error::parse(1, 1, "expected a boolean formula")),
    })
}

fn ast_cost(a: &Ast) -> Result<CostTerm> {
    Ok(match a {
        Ast::Inf => CostTerm::Inf,
        Ast::Ite(c, t, e) => CostTerm::Ite(
            ast_bexpr(c)?,
            Box::new(ast_cost(t)?),
            Box::new(ast_cost(e)?),
        ),
        other => CostTerm::Finite(ast_expr(other)?),
    })
}

/// Parses an infix integer term such as `3*y + 2`.
pub fn parse_expr(src: &str) -> Result<Expr> {
    ast_expr(&Parser::new(src)?.finish()?)
}

/// Parses an infix formula such as `x = 6 & y = 0`.
pub fn parse_bexpr(src: &str) -> Result<BExpr> {
    ast_bexpr(&Parser::new(src)?.finish()?)
}

/// Parses a cost term such as `if y >= 1 then 3*y else inf`.
pub fn parse_cost(src: &str) -> Result<CostTerm> {
    ast_cost(&Parser::new(src)?.finish()?)
}

/// Reads a prefix term: integers, variables, `(+ a b ..)`, `(- a)`, `(- a b)`,
/// `(* a b ..)`, or a quoted infix string.
pub fn expr_from_sexpr(s: &Sexpr) -> Result<Expr> {
    match &s.kind {
        SexprKind::Atom(a) => {
            if let Ok(n) = a.parse::<i64>() {
                Ok(Expr::Const(n))
            } else if is_ident(a) {
                Ok(Expr::Var(a.clone()))
            } else {
                Err(s.err(format!("expected a term, found `{a}`")))
            }
        }
        SexprKind::Str(src) => parse_expr(src).map_err(|e| relocate(e, s)),
        SexprKind::List(_) => {
            let (head, args) = s.head()?;
            let terms = args
                .iter()
                .map(expr_from_sexpr)
                .collect::<Result<Vec<_>>>()?;
            let fold = |f: fn(Expr, Expr) -> Expr, terms: Vec<Expr>| -> Result<Expr> {
                let mut it = terms.into_iter();
                let first = it
                    .next()
                    .ok_or_else(|| s.err(format!("`{head}` needs arguments")))?;
                Ok(it.fold(first, f))
            };
            match (head, terms.len()) {
                ("-", 1) => Ok(Expr::Neg(Box::new(terms.into_iter().next().unwrap()))),
                ("+", n) if n >= 1 => fold(Expr::add, terms),
                ("-", n) if n >= 2 => fold(Expr::sub, terms),
                ("*", n) if n >= 1 => fold(Expr::mul, terms),
                _ => Err(s.err(format!("unknown term operator `{head}`/{}", terms.len()))),
            }
        }
    }
}

/// Reads a prefix boolean: `true`, `false`, `(>= a b)`, `(and ..)`, `(or ..)`,
/// `(not b)`, `(exists v b)`, or a quoted infix string.
pub fn bexpr_from_sexpr(s: &Sexpr) -> Result<BExpr> {
    match &s.kind {
        SexprKind::Atom(a) if a == "true" => Ok(BExpr::True),
        SexprKind::Atom(a) if a == "false" => Ok(BExpr::False),
        SexprKind::Atom(a) => Err(s.err(format!("expected a boolean, found `{a}`"))),
        SexprKind::Str(src) => parse_bexpr(src).map_err(|e| relocate(e, s)),
        SexprKind::List(_) => {
            let (head, args) = s.head()?;
            if let Some(op) = CmpOp::from_symbol(head) {
                s.expect_args(args, 2, head)?;
                return Ok(BExpr::Cmp(
                    op,
                    expr_from_sexpr(&args[0])?,
                    expr_from_sexpr(&args[1])?,
                ));
            }
            match head {
                "not" => {
                    s.expect_args(args, 1, head)?;
                    Ok(BExpr::not(bexpr_from_sexpr(&args[0])?))
                }
                "and" | "or" => {
                    let parts = args
                        .iter()
                        .map(bexpr_from_sexpr)
                        .collect::<Result<Vec<_>>>()?;
                    let unit = if head == "and" {
                        BExpr::True
                    } else {
                        BExpr::False
                    };
                    let join = if head == "and" { BExpr::and } else { BExpr::or };
                    let mut it = parts.into_iter();
                    Ok(match it.next() {
                        None => unit,
                        Some(first) => it.fold(first, join),
                    })
                }
                "exists" => {
                    s.expect_args(args, 2, head)?;
                    let v = args[0]
                        .atom()
                        .filter(|a| is_ident(a))
                        .ok_or_else(|| args[0].err("expected a variable"))?;
                    Ok(BExpr::Exists(
                        v.to_string(),
                        Box::new(bexpr_from_sexpr(&args[1])?),
                    ))
                }
                _ => Err(s.err(format!("unknown boolean operator `{head}`"))),
            }
        }
    }
}

pub(crate) fn is_ident(a: &str) -> bool {
    let mut chars = a.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Shifts an infix parse error so it points into the enclosing file.
fn relocate(e: Error, at: &Sexpr) -> Error {
    match e {
        Error::Parse { col, msg, .. } => Error::parse(at.line, at.col + col, msg),
        other => other,
    }
}
