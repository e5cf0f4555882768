//! Typed block diagrams: basics composed in sequence, in parallel and with
//! feedback on the last wire.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result, TypeError};
use crate::expr::{bexpr_from_sexpr, expr_from_sexpr, is_ident, BExpr, Expr};
use crate::sexpr::{parse_one, Sexpr};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Basic {
    Id,
    Twist,
    Assign { var: String, expr: Expr },
    Cond(BExpr),
    Join,
    Lookup { var: String, addr: Expr },
    Mutate { addr: Expr, value: Expr },
    New { var: String, inits: Vec<Expr> },
    Dispose(Expr),
    Scal(BigRational),
    Copy,
    Sum,
    Integrator,
}

/// Which family of basics a diagram draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alphabet {
    /// Only `Id` and `Twist`; usable by every instance.
    Neutral,
    Flowchart,
    /// Flowchart basics plus heap operations.
    Pointer,
    Stream,
}

impl Alphabet {
    /// Least alphabet containing both, if any.
    pub fn join(self, other: Alphabet) -> std::result::Result<Alphabet, TypeError> {
        use Alphabet::*;
        Ok(match (self, other) {
            (Neutral, a) | (a, Neutral) => a,
            (Stream, Stream) => Stream,
            (Stream, _) | (_, Stream) => {
                return Err(TypeError::AlphabetMix {
                    left: self,
                    right: other,
                })
            }
            (Pointer, _) | (_, Pointer) => Pointer,
            (Flowchart, Flowchart) => Flowchart,
        })
    }

    /// Whether a diagram over `self` may be used where `target` is expected.
    pub fn within(self, target: Alphabet) -> bool {
        matches!(self.join(target), Ok(j) if j == target)
    }
}

impl Basic {
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Basic::Twist => (2, 2),
            Basic::Cond(_) | Basic::Copy => (1, 2),
            Basic::Join | Basic::Sum => (2, 1),
            _ => (1, 1),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            Basic::Id | Basic::Twist => Alphabet::Neutral,
            Basic::Assign { .. } | Basic::Cond(_) | Basic::Join => Alphabet::Flowchart,
            Basic::Lookup { .. } | Basic::Mutate { .. } | Basic::New { .. } | Basic::Dispose(_) => {
                Alphabet::Pointer
            }
            Basic::Scal(_) | Basic::Copy | Basic::Sum | Basic::Integrator => Alphabet::Stream,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Basic::Id => "id",
            Basic::Twist => "twist",
            Basic::Assign { .. } => "assign",
            Basic::Cond(_) => "cond",
            Basic::Join => "join",
            Basic::Lookup { .. } => "lookup",
            Basic::Mutate { .. } => "mutate",
            Basic::New { .. } => "new",
            Basic::Dispose(_) => "dispose",
            Basic::Scal(_) => "scal",
            Basic::Copy => "copy",
            Basic::Sum => "sum",
            Basic::Integrator => "int",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Basic(Basic),
    Seq(Diagram, Diagram),
    Par(Diagram, Diagram),
    Fb(Diagram),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct Inner {
    node: Node,
    ins: usize,
    outs: usize,
    alphabet: Alphabet,
}

/// An immutable, well-typed diagram. Cloning is cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram(Arc<Inner>);

impl Diagram {
    pub fn basic(b: Basic) -> Diagram {
        let (ins, outs) = b.arity();
        let alphabet = b.alphabet();
        Diagram(Arc::new(Inner {
            node: Node::Basic(b),
            ins,
            outs,
            alphabet,
        }))
    }

    pub fn id() -> Diagram {
        Diagram::basic(Basic::Id)
    }

    pub fn seq(a: Diagram, b: Diagram) -> std::result::Result<Diagram, TypeError> {
        if a.outs() != b.ins() {
            return Err(TypeError::SeqMismatch {
                left_out: a.outs(),
                right_in: b.ins(),
            });
        }
        let alphabet = a.alphabet().join(b.alphabet())?;
        Ok(Diagram(Arc::new(Inner {
            ins: a.ins(),
            outs: b.outs(),
            alphabet,
            node: Node::Seq(a, b),
        })))
    }

    pub fn par(a: Diagram, b: Diagram) -> std::result::Result<Diagram, TypeError> {
        let alphabet = a.alphabet().join(b.alphabet())?;
        Ok(Diagram(Arc::new(Inner {
            ins: a.ins() + b.ins(),
            outs: a.outs() + b.outs(),
            alphabet,
            node: Node::Par(a, b),
        })))
    }

    /// Feedback on the last input and output wire.
    pub fn fb(a: Diagram) -> std::result::Result<Diagram, TypeError> {
        if a.ins() == 0 || a.outs() == 0 {
            return Err(TypeError::FbArity {
                ins: a.ins(),
                outs: a.outs(),
            });
        }
        Ok(Diagram(Arc::new(Inner {
            ins: a.ins() - 1,
            outs: a.outs() - 1,
            alphabet: a.alphabet(),
            node: Node::Fb(a),
        })))
    }

    /// Sequential composition of a non-empty list, left to right.
    pub fn seq_all(
        parts: impl IntoIterator<Item = Diagram>,
    ) -> std::result::Result<Diagram, TypeError> {
        let mut it = parts.into_iter();
        let first = it.next().unwrap_or_else(Diagram::id);
        it.try_fold(first, Diagram::seq)
    }

    /// `while b do body`, i.e. `Fb((Join ; Cond b) ; (Id ⊎ body))`.
    pub fn while_loop(b: BExpr, body: Diagram) -> std::result::Result<Diagram, TypeError> {
        expect_unary("while", &body)?;
        let head = Diagram::seq(Diagram::basic(Basic::Join), Diagram::basic(Basic::Cond(b)))?;
        let tail = Diagram::par(Diagram::id(), body)?;
        Diagram::fb(Diagram::seq(head, tail)?)
    }

    /// Stream feedback `Fb((Id ⊎ f) ; Sum ; Copy)`, the solution of `t = s + f(t)`.
    pub fn fdback(f: Diagram) -> std::result::Result<Diagram, TypeError> {
        expect_unary("fdback", &f)?;
        let body = Diagram::seq_all([
            Diagram::par(Diagram::id(), f)?,
            Diagram::basic(Basic::Sum),
            Diagram::basic(Basic::Copy),
        ])?;
        Diagram::fb(body)
    }

    /// Stream sum `Copy ; (g ⊎ f) ; Sum`.
    pub fn sum(f: Diagram, g: Diagram) -> std::result::Result<Diagram, TypeError> {
        expect_unary("sum", &f)?;
        expect_unary("sum", &g)?;
        Diagram::seq_all([
            Diagram::basic(Basic::Copy),
            Diagram::par(g, f)?,
            Diagram::basic(Basic::Sum),
        ])
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn ins(&self) -> usize {
        self.0.ins
    }

    pub fn outs(&self) -> usize {
        self.0.outs
    }

    pub fn arity(&self) -> (usize, usize) {
        (self.0.ins, self.0.outs)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.0.alphabet
    }

    pub fn as_basic(&self) -> Option<&Basic> {
        match self.node() {
            Node::Basic(b) => Some(b),
            _ => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self.node() {
            Node::Basic(_) => 0,
            Node::Seq(a, b) | Node::Par(a, b) => 1 + a.depth().max(b.depth()),
            Node::Fb(a) => 1 + a.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self.node() {
            Node::Basic(_) => 1,
            Node::Seq(a, b) | Node::Par(a, b) => 1 + a.size() + b.size(),
            Node::Fb(a) => 1 + a.size(),
        }
    }

    /// Arity recomputed bottom-up, ignoring the cached values.
    pub fn recompute_arity(&self) -> Option<(usize, usize)> {
        match self.node() {
            Node::Basic(b) => Some(b.arity()),
            Node::Seq(a, b) => {
                let (ai, ao) = a.recompute_arity()?;
                let (bi, bo) = b.recompute_arity()?;
                (ao == bi).then_some((ai, bo))
            }
            Node::Par(a, b) => {
                let (ai, ao) = a.recompute_arity()?;
                let (bi, bo) = b.recompute_arity()?;
                Some((ai + bi, ao + bo))
            }
            Node::Fb(a) => {
                let (i, o) = a.recompute_arity()?;
                (i >= 1 && o >= 1).then(|| (i - 1, o - 1))
            }
        }
    }

    /// All basics in the diagram, left to right.
    pub fn basics(&self) -> Vec<&Basic> {
        let mut out = Vec::new();
        fn go<'a>(d: &'a Diagram, out: &mut Vec<&'a Basic>) {
            match d.node() {
                Node::Basic(b) => out.push(b),
                Node::Seq(a, b) | Node::Par(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Node::Fb(a) => go(a, out),
            }
        }
        go(self, &mut out);
        out
    }

    /// Program variables mentioned by the diagram's basics.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for b in self.basics() {
            match b {
                Basic::Assign { var, expr } => {
                    push_unique(&mut out, var);
                    expr.collect_vars(&mut out);
                }
                Basic::Cond(c) => c.collect_vars(&mut out),
                Basic::Lookup { var, addr } => {
                    push_unique(&mut out, var);
                    addr.collect_vars(&mut out);
                }
                Basic::Mutate { addr, value } => {
                    addr.collect_vars(&mut out);
                    value.collect_vars(&mut out);
                }
                Basic::New { var, inits } => {
                    push_unique(&mut out, var);
                    for e in inits {
                        e.collect_vars(&mut out);
                    }
                }
                Basic::Dispose(e) => e.collect_vars(&mut out),
                _ => {}
            }
        }
        out
    }

    pub fn parse(src: &str) -> Result<Diagram> {
        Diagram::from_sexpr(&parse_one(src)?)
    }

    /// Nullary basics may be written bare: `int` for `(int)`.
    pub fn from_sexpr(s: &Sexpr) -> Result<Diagram> {
        let var = |e: &Sexpr| -> Result<String> {
            e.atom()
                .filter(|a| is_ident(a))
                .map(str::to_string)
                .ok_or_else(|| e.err("expected a variable name"))
        };
        if let Some(a) = s.atom() {
            return Ok(Diagram::basic(basic_from_sexpr(a, &[], s, var)?));
        }
        let (head, args) = s.head()?;
        let n = |k: usize| s.expect_args(args, k, head);
        let typed = |r: std::result::Result<Diagram, TypeError>| r.map_err(Error::from);
        Ok(match head {
            "seq" => {
                if args.is_empty() {
                    return Err(s.err("`seq` needs at least one argument"));
                }
                let parts = args
                    .iter()
                    .map(Diagram::from_sexpr)
                    .collect::<Result<Vec<_>>>()?;
                typed(Diagram::seq_all(parts))?
            }
            "par" => {
                n(2)?;
                typed(Diagram::par(
                    Diagram::from_sexpr(&args[0])?,
                    Diagram::from_sexpr(&args[1])?,
                ))?
            }
            "fb" => {
                n(1)?;
                typed(Diagram::fb(Diagram::from_sexpr(&args[0])?))?
            }
            "while" => {
                n(2)?;
                typed(Diagram::while_loop(
                    bexpr_from_sexpr(&args[0])?,
                    Diagram::from_sexpr(&args[1])?,
                ))?
            }
            "fdback" => {
                n(1)?;
                typed(Diagram::fdback(Diagram::from_sexpr(&args[0])?))?
            }
            "sum" if !args.is_empty() => {
                n(2)?;
                typed(Diagram::sum(
                    Diagram::from_sexpr(&args[0])?,
                    Diagram::from_sexpr(&args[1])?,
                ))?
            }
            _ => Diagram::basic(basic_from_sexpr(head, args, s, var)?),
        })
    }

    /// Renders in the s-expression syntax accepted by [`Diagram::parse`].
    pub fn to_sexpr(&self) -> String {
        self.to_string()
    }
}

fn basic_from_sexpr(
    head: &str,
    args: &[Sexpr],
    s: &Sexpr,
    var: impl Fn(&Sexpr) -> Result<String>,
) -> Result<Basic> {
    let n = |k: usize| s.expect_args(args, k, head);
    Ok(match head {
        "id" => {
            n(0)?;
            Basic::Id
        }
        "twist" => {
            n(0)?;
            Basic::Twist
        }
        "join" => {
            n(0)?;
            Basic::Join
        }
        "copy" => {
            n(0)?;
            Basic::Copy
        }
        "sum" => {
            n(0)?;
            Basic::Sum
        }
        "int" => {
            n(0)?;
            Basic::Integrator
        }
        "assign" => {
            n(2)?;
            Basic::Assign {
                var: var(&args[0])?,
                expr: expr_from_sexpr(&args[1])?,
            }
        }
        "cond" => {
            n(1)?;
            Basic::Cond(bexpr_from_sexpr(&args[0])?)
        }
        "lookup" => {
            n(2)?;
            Basic::Lookup {
                var: var(&args[0])?,
                addr: expr_from_sexpr(&args[1])?,
            }
        }
        "mutate" => {
            n(2)?;
            Basic::Mutate {
                addr: expr_from_sexpr(&args[0])?,
                value: expr_from_sexpr(&args[1])?,
            }
        }
        "new" => {
            n(2)?;
            let inits = args[1]
                .list()
                .ok_or_else(|| args[1].err("expected a list of initial values"))?
                .iter()
                .map(expr_from_sexpr)
                .collect::<Result<Vec<_>>>()?;
            if inits.is_empty() {
                return Err(args[1].err("`new` needs at least one initial value"));
            }
            Basic::New {
                var: var(&args[0])?,
                inits,
            }
        }
        "dispose" => {
            n(1)?;
            Basic::Dispose(expr_from_sexpr(&args[0])?)
        }
        "scal" => {
            n(1)?;
            Basic::Scal(parse_rational(&args[0])?)
        }
        _ => return Err(s.err(format!("unknown diagram form `{head}`"))),
    })
}

/// Reads `p`, `-p` or `p/q`.
pub fn parse_rational(s: &Sexpr) -> Result<BigRational> {
    let text = s
        .atom()
        .ok_or_else(|| s.err("expected a rational literal"))?;
    let r: BigRational = text
        .parse()
        .map_err(|_| s.err(format!("`{text}` is not a rational literal")))?;
    Ok(r)
}

fn expect_unary(construct: &'static str, d: &Diagram) -> std::result::Result<(), TypeError> {
    if d.arity() != (1, 1) {
        return Err(TypeError::MacroArity {
            construct,
            expected: "1->1",
            ins: d.ins(),
            outs: d.outs(),
        });
    }
    Ok(())
}

fn push_unique(out: &mut Vec<String>, v: &str) {
    if !out.iter().any(|x| x == v) {
        out.push(v.to_string());
    }
}

impl fmt::Display for Basic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basic::Assign { var, expr } => write!(f, "(assign {var} {})", expr.to_sexpr()),
            Basic::Cond(b) => write!(f, "(cond {})", b.to_sexpr()),
            Basic::Lookup { var, addr } => write!(f, "(lookup {var} {})", addr.to_sexpr()),
            Basic::Mutate { addr, value } => {
                write!(f, "(mutate {} {})", addr.to_sexpr(), value.to_sexpr())
            }
            Basic::New { var, inits } => {
                let parts: Vec<String> = inits.iter().map(Expr::to_sexpr).collect();
                write!(f, "(new {var} ({}))", parts.join(" "))
            }
            Basic::Dispose(e) => write!(f, "(dispose {})", e.to_sexpr()),
            Basic::Scal(r) => write!(f, "(scal {r})"),
            other => write!(f, "({})", other.name()),
        }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Basic(b) => write!(f, "{b}"),
            Node::Seq(a, b) => write!(f, "(seq {a} {b})"),
            Node::Par(a, b) => write!(f, "(par {a} {b})"),
            Node::Fb(a) => write!(f, "(fb {a})"),
        }
    }
}
