//! Textual assertions and proof scripts.
//!
//! A proof script is an s-expression tree mirroring the rules:
//!
//! ```text
//! (define NAME form)                     ; optional, substituted textually
//! (seq (triple PRE PROG POST) P1 P2)     ; also ax, con, par, fb
//! (fb (triple PRE PROG POST) INV P)
//! ```
//!
//! Multi-wire assertions are written `(wires W1 .. Wn)`; a single wire may be
//! written bare. Wire syntax depends on the instance.

use crate::config::StoreSpace;
use crate::cost::NatInf;
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::expr::{bexpr_from_sexpr, parse_cost};
use crate::fc::{FcInstance, StoreSet};
use crate::kernel::{Instance, ProofNode, Rule, Triple};
use crate::pointer::{HState, PpInstance, SepFormula};
use crate::rt::{CostFn, RtInstance};
use crate::sexpr::{parse_all, Sexpr, SexprKind};
use crate::stream::hsc::{ScInstance, WireAssertion};

/// An instance whose assertions have a concrete syntax.
pub trait Scripted: Instance {
    fn parse_wire(&self, s: &Sexpr) -> Result<Self::Wire>;

    /// Reads a one-wire assertion written in infix, such as `x = 1 & y >= 2`.
    fn parse_infix(&self, src: &str) -> Result<Self::Wire> {
        let _ = src;
        Err(Error::Unsupported(format!(
            "{} assertions have no infix form; write an s-expression",
            self.name()
        )))
    }

    /// Renders a wire so that [`Scripted::parse_wire`] reads it back.
    fn render_wire(&self, w: &Self::Wire) -> String;
}

/// Reads an assertion on `arity` wires.
pub fn parse_assertion<I: Scripted>(inst: &I, s: &Sexpr, arity: usize) -> Result<Vec<I::Wire>> {
    if let Ok(("wires", args)) = s.head() {
        if args.len() != arity {
            return Err(Error::Arity {
                what: "assertion wires".into(),
                expected: arity,
                found: args.len(),
            });
        }
        return args.iter().map(|a| inst.parse_wire(a)).collect();
    }
    if arity != 1 {
        return Err(s.err(format!("expected `(wires ..)` with {arity} entries")));
    }
    Ok(vec![inst.parse_wire(s)?])
}

/// Reads an assertion from text: an s-expression, or infix for one wire.
pub fn parse_assertion_text<I: Scripted>(
    inst: &I,
    src: &str,
    arity: usize,
) -> Result<Vec<I::Wire>> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('(') {
        return parse_assertion(inst, &crate::sexpr::parse_one(src)?, arity);
    }
    if arity != 1 {
        return Err(Error::Arity {
            what: "assertion wires (infix covers one wire)".into(),
            expected: arity,
            found: 1,
        });
    }
    Ok(vec![inst.parse_infix(src)?])
}

pub fn render_assertion<I: Scripted>(inst: &I, a: &[I::Wire]) -> String {
    let wires: Vec<String> = a.iter().map(|w| inst.render_wire(w)).collect();
    format!("(wires {})", wires.join(" "))
}

fn natural(s: &Sexpr) -> Result<usize> {
    s.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| s.err("expected a natural number"))
}

fn integer(s: &Sexpr) -> Result<i64> {
    s.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| s.err("expected an integer"))
}

/// Replaces atoms bound by `(define NAME form)`.
fn substitute(s: &Sexpr, defs: &[(String, Sexpr)]) -> Sexpr {
    match &s.kind {
        SexprKind::Atom(a) => defs
            .iter()
            .rev()
            .find(|(n, _)| n == a)
            .map_or_else(|| s.clone(), |(_, v)| v.clone()),
        SexprKind::List(items) => Sexpr {
            kind: SexprKind::List(items.iter().map(|i| substitute(i, defs)).collect()),
            ..s.clone()
        },
        SexprKind::Str(_) => s.clone(),
    }
}

/// Reads a proof script.
pub fn parse_proof<I: Scripted>(inst: &I, src: &str) -> Result<ProofNode<I::Wire>> {
    let forms = parse_all(src)?;
    let mut defs: Vec<(String, Sexpr)> = Vec::new();
    let mut proof = None;
    for form in &forms {
        let form = substitute(form, &defs);
        match form.head() {
            Ok(("define", args)) => {
                form.expect_args(args, 2, "define")?;
                let name = args[0]
                    .atom()
                    .ok_or_else(|| args[0].err("expected a name"))?;
                defs.push((name.to_string(), args[1].clone()));
            }
            _ if proof.is_some() => return Err(form.err("a script holds one proof")),
            _ => proof = Some(form),
        }
    }
    let proof = proof.ok_or_else(|| Error::parse(1, 1, "script has no proof"))?;
    proof_from_sexpr(inst, &proof)
}

pub fn parse_triple<I: Scripted>(inst: &I, s: &Sexpr) -> Result<Triple<I::Wire>> {
    let (head, args) = s.head()?;
    if head != "triple" {
        return Err(s.err(format!("expected `(triple pre prog post)`, found `{head}`")));
    }
    s.expect_args(args, 3, head)?;
    let prog = Diagram::from_sexpr(&args[1])?;
    let pre = parse_assertion(inst, &args[0], prog.ins())?;
    let post = parse_assertion(inst, &args[2], prog.outs())?;
    Ok(Triple::new(pre, prog, post))
}

fn proof_from_sexpr<I: Scripted>(inst: &I, s: &Sexpr) -> Result<ProofNode<I::Wire>> {
    let (head, args) = s.head()?;
    let premises = |from: usize, n: usize| -> Result<Vec<ProofNode<I::Wire>>> {
        s.expect_args(args, from + n, head)?;
        args[from..]
            .iter()
            .map(|p| proof_from_sexpr(inst, p))
            .collect()
    };
    let triple = || -> Result<Triple<I::Wire>> {
        let t = args
            .first()
            .ok_or_else(|| s.err(format!("`{head}` needs a triple")))?;
        parse_triple(inst, t)
    };
    Ok(match head {
        "ax" => {
            premises(1, 0)?;
            ProofNode::ax(triple()?)
        }
        "con" => {
            let mut ps = premises(1, 1)?;
            ProofNode::con(triple()?, ps.remove(0))
        }
        "seq" | "par" => {
            let mut ps = premises(1, 2)?;
            let second = ps.pop().unwrap();
            let first = ps.pop().unwrap();
            if head == "seq" {
                ProofNode::seq(triple()?, first, second)
            } else {
                ProofNode::par(triple()?, first, second)
            }
        }
        "fb" => {
            let mut ps = premises(2, 1)?;
            let inv = inst.parse_wire(&args[1])?;
            ProofNode::fb(triple()?, inv, ps.remove(0))
        }
        _ => return Err(s.err(format!("unknown proof rule `{head}`"))),
    })
}

pub fn render_triple<I: Scripted>(inst: &I, t: &Triple<I::Wire>) -> String {
    format!(
        "(triple {} {} {})",
        render_assertion(inst, &t.pre),
        t.prog,
        render_assertion(inst, &t.post)
    )
}

/// Renders a derivation as a script that [`parse_proof`] reads back.
pub fn render_proof<I: Scripted>(inst: &I, p: &ProofNode<I::Wire>) -> String {
    let mut out = String::new();
    render_into(inst, p, 0, &mut out);
    out
}

fn render_into<I: Scripted>(inst: &I, p: &ProofNode<I::Wire>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    out.push_str(&format!(
        "{pad}({} {}",
        p.rule.name(),
        render_triple(inst, &p.conclusion)
    ));
    if let Rule::Fb { invariant } = &p.rule {
        out.push_str(&format!("\n{pad}  {}", inst.render_wire(invariant)));
    }
    for q in &p.premises {
        out.push('\n');
        render_into(inst, q, depth + 1, out);
    }
    out.push(')');
}

// flowchart sets

/// Reads `(v1 .. vn)` in variable order, checking the domain.
fn store_tuple(sp: &StoreSpace, s: &Sexpr) -> Result<Vec<i64>> {
    let items = s.list().ok_or_else(|| s.err("expected a store tuple"))?;
    if items.len() != sp.vars.len() {
        return Err(s.err(format!("store tuple needs {} values", sp.vars.len())));
    }
    items
        .iter()
        .map(|i| {
            let v = integer(i)?;
            if sp.contains_value(v) {
                Ok(v)
            } else {
                Err(i.err(format!("{v} is outside the domain {}..{}", sp.lo, sp.hi)))
            }
        })
        .collect()
}

impl Scripted for FcInstance {
    /// `(all)`, `(empty)`, `(set (x 1) (y 0 1))` (unlisted variables are free),
    /// `(stores (1 3) (3 2))`, `(formula "x = 1")` or a bare string,
    /// `(union ..)`, `(inter ..)`.
    fn parse_wire(&self, s: &Sexpr) -> Result<StoreSet> {
        if s.string().is_some() {
            return self.denote(&bexpr_from_sexpr(s)?);
        }
        match s.atom() {
            Some("all") => return Ok(self.full()),
            Some("empty") => return Ok(self.empty()),
            _ => {}
        }
        let (head, args) = s.head()?;
        match head {
            "all" => Ok(self.full()),
            "empty" => Ok(self.empty()),
            "formula" => {
                s.expect_args(args, 1, head)?;
                self.denote(&bexpr_from_sexpr(&args[0])?)
            }
            "stores" => {
                let mut set = self.empty();
                for t in args {
                    set.insert(self.space().index(&store_tuple(self.space(), t)?));
                }
                Ok(set)
            }
            "set" => {
                let sp = self.space();
                let mut allowed: Vec<Option<Vec<i64>>> = vec![None; sp.vars.len()];
                for binding in args {
                    let (var, vals) = binding.head()?;
                    let i = sp
                        .var_index(var)
                        .ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
                    allowed[i] = Some(vals.iter().map(integer).collect::<Result<_>>()?);
                }
                let mut set = self.empty();
                for (i, store) in sp.stores().enumerate() {
                    if store
                        .iter()
                        .zip(&allowed)
                        .all(|(v, a)| a.as_ref().is_none_or(|a| a.contains(v)))
                    {
                        set.insert(i);
                    }
                }
                Ok(set)
            }
            "union" | "inter" => {
                let mut acc = if head == "union" {
                    self.empty()
                } else {
                    self.full()
                };
                for a in args {
                    let w = self.parse_wire(a)?;
                    if head == "union" {
                        acc.union_with(&w);
                    } else {
                        acc.intersect_with(&w);
                    }
                }
                Ok(acc)
            }
            _ => Err(s.err(format!("unknown store-set form `{head}`"))),
        }
    }

    fn parse_infix(&self, src: &str) -> Result<StoreSet> {
        self.formula(src)
    }

    fn render_wire(&self, w: &StoreSet) -> String {
        if w.count_ones(..) == self.space().size() {
            return "(all)".into();
        }
        if w.count_ones(..) == 0 {
            return "(empty)".into();
        }
        let tuples: Vec<String> = self
            .members(w)
            .iter()
            .map(|s| {
                format!(
                    "({})",
                    s.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
                )
            })
            .collect();
        format!("(stores {})", tuples.join(" "))
    }
}

// running-time maps

impl Scripted for RtInstance {
    /// `(cost "3*y + 2")` or a bare string, `(const n|inf)`, and
    /// `(cost-table ((1 3) 11) ((3 2) 7))` where unlisted stores cost `inf`.
    fn parse_wire(&self, s: &Sexpr) -> Result<CostFn> {
        if let Some(src) = s.string() {
            return self.cost(src).map_err(|e| relocate(e, s));
        }
        let (head, args) = s.head()?;
        match head {
            "cost" => {
                s.expect_args(args, 1, head)?;
                let src = args[0]
                    .string()
                    .ok_or_else(|| args[0].err("expected a quoted cost term"))?;
                self.cost(src).map_err(|e| relocate(e, &args[0]))
            }
            "const" => {
                s.expect_args(args, 1, head)?;
                Ok(self.constant(nat_inf(&args[0])?))
            }
            "cost-table" => {
                let mut f = self.constant(NatInf::Inf);
                for entry in args {
                    let items = entry
                        .list()
                        .filter(|l| l.len() == 2)
                        .ok_or_else(|| entry.err("expected `(store cost)`"))?;
                    let store = store_tuple(self.space(), &items[0])?;
                    f[self.space().index(&store)] = nat_inf(&items[1])?;
                }
                Ok(f)
            }
            _ => Err(s.err(format!("unknown cost form `{head}`"))),
        }
    }

    fn parse_infix(&self, src: &str) -> Result<CostFn> {
        parse_cost(src)?;
        self.cost(src)
    }

    fn render_wire(&self, w: &CostFn) -> String {
        if let Some(first) = w.first() {
            if w.iter().all(|c| c == first) {
                return format!("(const {first})");
            }
        }
        let entries: Vec<String> = self
            .space()
            .stores()
            .zip(w)
            .filter(|(_, c)| !c.is_inf())
            .map(|(s, c)| {
                format!(
                    "(({}) {c})",
                    s.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
                )
            })
            .collect();
        format!("(cost-table {})", entries.join(" "))
    }
}

fn nat_inf(s: &Sexpr) -> Result<NatInf> {
    match s.atom() {
        Some("inf") => Ok(NatInf::Inf),
        _ => Ok(NatInf::Fin(natural(s)? as u64)),
    }
}

/// Moves a parse error inside a quoted string to the string's position.
fn relocate(e: Error, at: &Sexpr) -> Error {
    match e {
        Error::Parse { col, msg, .. } => Error::parse(at.line, at.col + col, msg),
        other => other,
    }
}

// heap assertions

impl PpInstance {
    fn parse_state(&self, s: &Sexpr) -> Result<HState> {
        let (head, args) = s.head()?;
        if head != "state" {
            return Err(s.err("expected `(state (store ..) (heap ..))`"));
        }
        s.expect_args(args, 2, head)?;
        let sp = self.space();
        let store: Vec<i64> = args[0]
            .list()
            .ok_or_else(|| args[0].err("expected store values"))?
            .iter()
            .map(integer)
            .collect::<Result<_>>()?;
        let heap: Vec<Option<i64>> = args[1]
            .list()
            .ok_or_else(|| args[1].err("expected heap cells"))?
            .iter()
            .map(|c| {
                if c.atom() == Some("-") {
                    Ok(None)
                } else {
                    integer(c).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        let in_domain = |v: &i64| sp.stores.contains_value(*v);
        if store.len() != sp.stores.vars.len() || heap.len() != sp.addrs {
            return Err(s.err(format!(
                "state needs {} store values and {} heap cells",
                sp.stores.vars.len(),
                sp.addrs
            )));
        }
        if !store.iter().all(in_domain) || !heap.iter().flatten().all(in_domain) {
            return Err(s.err("state value outside the domain"));
        }
        Ok(HState { store, heap })
    }
}

impl Scripted for PpInstance {
    /// A heap formula (see [`SepFormula::from_sexpr`]) or `(states (state (x y) (h0 - h2)) ..)`.
    fn parse_wire(&self, s: &Sexpr) -> Result<fixedbitset::FixedBitSet> {
        if let Ok(("states", args)) = s.head() {
            let states = args
                .iter()
                .map(|a| self.parse_state(a))
                .collect::<Result<Vec<_>>>()?;
            return Ok(self.set_of(&states));
        }
        self.denote(&SepFormula::from_sexpr(s)?)
    }

    fn render_wire(&self, w: &fixedbitset::FixedBitSet) -> String {
        if w.count_ones(..) == self.space().size() {
            return "(true)".into();
        }
        if w.count_ones(..) == 0 {
            return "(false)".into();
        }
        let states: Vec<String> = w
            .ones()
            .map(|i| {
                let st = self.space().state(i);
                let store: Vec<String> = st.store.iter().map(i64::to_string).collect();
                let heap: Vec<String> = st
                    .heap
                    .iter()
                    .map(|c| c.map_or("-".into(), |v| v.to_string()))
                    .collect();
                format!("(state ({}) ({}))", store.join(" "), heap.join(" "))
            })
            .collect();
        format!("(states {})", states.join(" "))
    }
}

// stream assertions

impl Scripted for ScInstance {
    fn parse_wire(&self, s: &Sexpr) -> Result<WireAssertion> {
        WireAssertion::from_sexpr(s, self.trunc())
    }

    fn render_wire(&self, w: &WireAssertion) -> String {
        w.to_string()
    }
}
