//! The generic Hoare kernel: triples, proof trees, proof checking and proof
//! synthesis, parameterized by a verification-functor [`Instance`].
//!
//! Assertions on an object with `n` wires are flat `n`-tuples of per-wire
//! assertions, so pairing is concatenation and unpairing is `split_at`.

use std::fmt;

use crate::diagram::{Alphabet, Basic, Diagram, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Intermediate assertions come from strongest postconditions.
    Forward,
    /// Intermediate assertions come from weakest preconditions.
    Backward,
}

/// A verification functor: a pre-order of assertions per wire and a monotone
/// relation for every diagram.
pub trait Instance {
    type Wire: Clone + fmt::Debug + PartialEq;

    fn name(&self) -> &'static str;

    /// Largest alphabet of basics this instance interprets.
    fn alphabet(&self) -> Alphabet;

    fn direction(&self) -> Direction;

    /// `p ⊑ q` on one wire: `p` is at least as strong as `q`.
    fn wire_leq(&self, p: &Self::Wire, q: &Self::Wire) -> bool;

    /// The relation `{p} d {q}`.
    fn holds(&self, d: &Diagram, p: &[Self::Wire], q: &[Self::Wire]) -> Result<bool>;

    /// Side condition of the axiom rule.
    fn basic_holds(&self, b: &Basic, p: &[Self::Wire], q: &[Self::Wire]) -> Result<bool> {
        self.holds(&Diagram::basic(b.clone()), p, q)
    }

    /// Strongest postcondition of `a` (forward) or weakest precondition for
    /// `a` (backward) through `d`.
    fn transfer(&self, d: &Diagram, a: &[Self::Wire]) -> Result<Vec<Self::Wire>>;

    /// Canonical invariant `q` on the traced wire with `{p,q} body {r,q}`.
    /// Fails with [`Error::TripleFalse`] if `{p} Fb(body) {r}` is false.
    fn fb_invariant(
        &self,
        body: &Diagram,
        p: &[Self::Wire],
        r: &[Self::Wire],
    ) -> Result<Self::Wire>;

    /// Every assertion of the given arity, if the instance is finite and small.
    fn enumerate(&self, _arity: usize) -> Option<Box<dyn Iterator<Item = Vec<Self::Wire>> + '_>> {
        None
    }

    /// Number of assertions [`Instance::enumerate`] yields, if finite.
    fn enumeration_size(&self, _arity: usize) -> Option<u128> {
        None
    }

    /// A human-readable reason why `{p} d {q}` fails.
    fn counterexample(
        &self,
        _d: &Diagram,
        _p: &[Self::Wire],
        _q: &[Self::Wire],
    ) -> Result<Option<String>> {
        Ok(None)
    }

    fn show_wire(&self, w: &Self::Wire) -> String;

    fn leq(&self, p: &[Self::Wire], q: &[Self::Wire]) -> bool {
        p.len() == q.len() && p.iter().zip(q).all(|(a, b)| self.wire_leq(a, b))
    }

    fn equiv(&self, p: &[Self::Wire], q: &[Self::Wire]) -> bool {
        self.leq(p, q) && self.leq(q, p)
    }

    fn show(&self, a: &[Self::Wire]) -> String {
        let parts: Vec<String> = a.iter().map(|w| self.show_wire(w)).collect();
        format!("<{}>", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triple<W> {
    pub pre: Vec<W>,
    pub prog: Diagram,
    pub post: Vec<W>,
}

impl<W> Triple<W> {
    pub fn new(pre: Vec<W>, prog: Diagram, post: Vec<W>) -> Self {
        Triple { pre, prog, post }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule<W> {
    Ax,
    Con,
    Seq,
    Par,
    Fb { invariant: W },
}

impl<W> Rule<W> {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::Con => "con",
            Rule::Seq => "seq",
            Rule::Par => "par",
            Rule::Fb { .. } => "fb",
        }
    }

    fn premise_count(&self) -> usize {
        match self {
            Rule::Ax => 0,
            Rule::Con | Rule::Fb { .. } => 1,
            Rule::Seq | Rule::Par => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofNode<W> {
    pub conclusion: Triple<W>,
    pub rule: Rule<W>,
    pub premises: Vec<ProofNode<W>>,
}

impl<W> ProofNode<W> {
    pub fn ax(conclusion: Triple<W>) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Ax,
            premises: vec![],
        }
    }

    pub fn con(conclusion: Triple<W>, premise: ProofNode<W>) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Con,
            premises: vec![premise],
        }
    }

    pub fn seq(conclusion: Triple<W>, first: ProofNode<W>, second: ProofNode<W>) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Seq,
            premises: vec![first, second],
        }
    }

    pub fn par(conclusion: Triple<W>, left: ProofNode<W>, right: ProofNode<W>) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Par,
            premises: vec![left, right],
        }
    }

    pub fn fb(conclusion: Triple<W>, invariant: W, premise: ProofNode<W>) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Fb { invariant },
            premises: vec![premise],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofNode::size).sum::<usize>()
    }

    pub fn count_rule(&self, name: &str) -> usize {
        usize::from(self.rule.name() == name)
            + self
                .premises
                .iter()
                .map(|p| p.count_rule(name))
                .sum::<usize>()
    }
}

/// Why a proof was rejected, located by the path of premise indices from the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofError {
    pub path: Vec<usize>,
    pub rule: &'static str,
    pub reason: String,
    /// Set when the instance itself failed (e.g. an invalid circuit).
    pub error: Option<Error>,
}

impl ProofError {
    pub fn location(&self) -> String {
        let mut s = String::from("root");
        for i in &self.path {
            s.push('.');
            s.push_str(&i.to_string());
        }
        s
    }
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {} ({}): {}", self.location(), self.rule, self.reason)
    }
}

impl std::error::Error for ProofError {}

/// Checks arities and alphabet of a triple against an instance.
pub fn check_typed<I: Instance>(inst: &I, t: &Triple<I::Wire>) -> Result<()> {
    if !t.prog.alphabet().within(inst.alphabet()) {
        return Err(Error::WrongAlphabet {
            expected: inst.name(),
            found: t.prog.alphabet(),
        });
    }
    if t.pre.len() != t.prog.ins() {
        return Err(Error::Arity {
            what: "precondition".into(),
            expected: t.prog.ins(),
            found: t.pre.len(),
        });
    }
    if t.post.len() != t.prog.outs() {
        return Err(Error::Arity {
            what: "postcondition".into(),
            expected: t.prog.outs(),
            found: t.post.len(),
        });
    }
    Ok(())
}

/// Semantic truth of a triple.
pub fn check_triple<I: Instance>(inst: &I, t: &Triple<I::Wire>) -> Result<bool> {
    check_typed(inst, t)?;
    inst.holds(&t.prog, &t.pre, &t.post)
}

/// Checks that every node instantiates its rule exactly. Never searches.
pub fn check_proof<I: Instance>(
    inst: &I,
    p: &ProofNode<I::Wire>,
) -> std::result::Result<(), ProofError> {
    let mut path = Vec::new();
    check_node(inst, p, &mut path)
}

fn check_node<I: Instance>(
    inst: &I,
    p: &ProofNode<I::Wire>,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ProofError> {
    let rule = p.rule.name();
    let fail = |reason: String| ProofError {
        path: path.clone(),
        rule,
        reason,
        error: None,
    };
    let inst_err = |e: Error| ProofError {
        path: path.clone(),
        rule,
        reason: e.to_string(),
        error: Some(e),
    };
    let c = &p.conclusion;
    check_typed(inst, c).map_err(|e| fail(format!("ill-typed conclusion: {e}")))?;
    if p.premises.len() != p.rule.premise_count() {
        return Err(fail(format!(
            "expects {} premise(s), found {}",
            p.rule.premise_count(),
            p.premises.len()
        )));
    }
    let prem = |i: usize| &p.premises[i].conclusion;
    let same = |a: &[I::Wire], b: &[I::Wire]| inst.equiv(a, b);
    match &p.rule {
        Rule::Ax => {
            let b = c
                .prog
                .as_basic()
                .ok_or_else(|| fail("(†) requires basic diagram".into()))?;
            if !inst.basic_holds(b, &c.pre, &c.post).map_err(inst_err)? {
                return Err(fail(format!(
                    "(†) failed: {} {} {} does not hold",
                    inst.show(&c.pre),
                    b,
                    inst.show(&c.post)
                )));
            }
            Ok(())
        }
        Rule::Con => {
            let q = prem(0);
            if q.prog != c.prog {
                return Err(fail("premise is about a different program".into()));
            }
            if !inst.leq(&c.pre, &q.pre) {
                return Err(fail(
                    "(‡) failed: precondition is not stronger than the premise's".into(),
                ));
            }
            if !inst.leq(&q.post, &c.post) {
                return Err(fail(
                    "(‡) failed: premise's postcondition is not stronger".into(),
                ));
            }
            recurse(inst, p, path)
        }
        Rule::Seq => {
            let (a, b) = match c.prog.node() {
                Node::Seq(a, b) => (a, b),
                _ => {
                    return Err(fail(
                        "conclusion program is not a sequential composition".into(),
                    ))
                }
            };
            let (l, r) = (prem(0), prem(1));
            if &l.prog != a || &r.prog != b {
                return Err(fail("premise programs do not match the composition".into()));
            }
            if !same(&l.pre, &c.pre) {
                return Err(fail(
                    "first premise's precondition differs from the conclusion's".into(),
                ));
            }
            if !same(&l.post, &r.pre) {
                return Err(fail("intermediate assertions do not chain".into()));
            }
            if !same(&r.post, &c.post) {
                return Err(fail(
                    "second premise's postcondition differs from the conclusion's".into(),
                ));
            }
            recurse(inst, p, path)
        }
        Rule::Par => {
            let (a, b) = match c.prog.node() {
                Node::Par(a, b) => (a, b),
                _ => {
                    return Err(fail(
                        "conclusion program is not a parallel composition".into(),
                    ))
                }
            };
            let (l, r) = (prem(0), prem(1));
            if &l.prog != a || &r.prog != b {
                return Err(fail("premise programs do not match the composition".into()));
            }
            if !same(&concat(&l.pre, &r.pre), &c.pre) {
                return Err(fail(
                    "precondition is not the pair of the premises' preconditions".into(),
                ));
            }
            if !same(&concat(&l.post, &r.post), &c.post) {
                return Err(fail(
                    "postcondition is not the pair of the premises' postconditions".into(),
                ));
            }
            recurse(inst, p, path)
        }
        Rule::Fb { invariant } => {
            let body = match c.prog.node() {
                Node::Fb(body) => body,
                _ => return Err(fail("conclusion program is not a feedback".into())),
            };
            let q = prem(0);
            if &q.prog != body {
                return Err(fail("premise program is not the feedback body".into()));
            }
            let inv = std::slice::from_ref(invariant);
            if !same(&q.pre, &concat(&c.pre, inv)) {
                return Err(fail("premise precondition is not <P, invariant>".into()));
            }
            if !same(&q.post, &concat(&c.post, inv)) {
                return Err(fail("premise postcondition is not <R, invariant>".into()));
            }
            recurse(inst, p, path)
        }
    }
}

fn recurse<I: Instance>(
    inst: &I,
    p: &ProofNode<I::Wire>,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ProofError> {
    for (i, q) in p.premises.iter().enumerate() {
        path.push(i);
        check_node(inst, q, path)?;
        path.pop();
    }
    Ok(())
}

pub fn concat<W: Clone>(a: &[W], b: &[W]) -> Vec<W> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisError {
    /// The triple is false.
    NotProvable,
    /// The triple is true but the canonical intermediate assertions do not
    /// yield true premises; the instance is incomplete here.
    NoWitness(String),
    Instance(Error),
}

impl fmt::Display for SynthesisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisError::NotProvable => write!(f, "not provable: the triple is false"),
            SynthesisError::NoWitness(s) => write!(f, "no proof found: {s}"),
            SynthesisError::Instance(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SynthesisError {}

impl From<Error> for SynthesisError {
    fn from(e: Error) -> Self {
        SynthesisError::Instance(e)
    }
}

/// Builds a proof of a true triple from canonical intermediate assertions.
pub fn synthesize_proof<I: Instance>(
    inst: &I,
    t: &Triple<I::Wire>,
) -> std::result::Result<ProofNode<I::Wire>, SynthesisError> {
    check_typed(inst, t)?;
    if !inst.holds(&t.prog, &t.pre, &t.post)? {
        return Err(SynthesisError::NotProvable);
    }
    synth(inst, &t.prog, &t.pre, &t.post)
}

fn synth<I: Instance>(
    inst: &I,
    d: &Diagram,
    p: &[I::Wire],
    r: &[I::Wire],
) -> std::result::Result<ProofNode<I::Wire>, SynthesisError> {
    let conclusion = Triple::new(p.to_vec(), d.clone(), r.to_vec());
    if !inst.holds(d, p, r)? {
        return Err(SynthesisError::NoWitness(format!(
            "premise {} {} {} is false",
            inst.show(p),
            d,
            inst.show(r)
        )));
    }
    Ok(match d.node() {
        Node::Basic(_) => ProofNode::ax(conclusion),
        Node::Seq(a, b) => {
            let q = match inst.direction() {
                Direction::Forward => inst.transfer(a, p)?,
                Direction::Backward => inst.transfer(b, r)?,
            };
            let first = synth(inst, a, p, &q)?;
            let second = synth(inst, b, &q, r)?;
            ProofNode::seq(conclusion, first, second)
        }
        Node::Par(a, b) => {
            let (p1, p2) = p.split_at(a.ins());
            let (r1, r2) = r.split_at(a.outs());
            let left = synth(inst, a, p1, r1)?;
            let right = synth(inst, b, p2, r2)?;
            ProofNode::par(conclusion, left, right)
        }
        Node::Fb(body) => {
            let q = match inst.fb_invariant(body, p, r) {
                Ok(q) => q,
                Err(Error::TripleFalse(msg)) => return Err(SynthesisError::NoWitness(msg)),
                Err(e) => return Err(e.into()),
            };
            let inv = std::slice::from_ref(&q);
            let premise = synth(inst, body, &concat(p, inv), &concat(r, inv))?;
            ProofNode::fb(conclusion, q, premise)
        }
    })
}

/// The trace of the Hoare relation of `body`: the first enumerated `q` with
/// `{p, q} body {r, q}`.
pub fn trace_witness<I: Instance>(
    inst: &I,
    body: &Diagram,
    p: &[I::Wire],
    r: &[I::Wire],
) -> Result<Option<I::Wire>> {
    let candidates = inst.enumerate(1).ok_or_else(|| {
        Error::Unsupported(format!("{} assertions are not enumerable", inst.name()))
    })?;
    first_witness(candidates.map(|mut v| v.pop().unwrap()), |q| {
        let inv = std::slice::from_ref(q);
        inst.holds(body, &concat(p, inv), &concat(r, inv))
    })
}

/// The cartesian trace of an arbitrary relation on pairs, over a candidate list.
pub fn first_witness<W>(
    candidates: impl Iterator<Item = W>,
    mut rel: impl FnMut(&W) -> Result<bool>,
) -> Result<Option<W>> {
    for q in candidates {
        if rel(&q)? {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// Both sides of one of the functor laws on a concrete instance of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawCheck {
    pub lhs: bool,
    pub rhs: bool,
    /// Whether the existential side was decided by exhaustive enumeration.
    pub exhaustive: bool,
}

impl LawCheck {
    pub fn agrees(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Enumeration budget below which existentials are decided exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 12;

fn exists<I: Instance>(
    inst: &I,
    arity: usize,
    canonical: Option<Vec<I::Wire>>,
    samples: &[Vec<I::Wire>],
    mut pred: impl FnMut(&[I::Wire]) -> Result<bool>,
) -> Result<(bool, bool)> {
    if inst
        .enumeration_size(arity)
        .is_some_and(|n| n <= EXHAUSTIVE_LIMIT)
    {
        for q in inst.enumerate(arity).expect("enumerable") {
            if pred(&q)? {
                return Ok((true, true));
            }
        }
        return Ok((false, true));
    }
    for q in canonical.iter().chain(samples) {
        if q.len() == arity && pred(q)? {
            return Ok((true, false));
        }
    }
    Ok((false, false))
}

/// `{p} a;b {r}` against `∃q. {p} a {q} ∧ {q} b {r}`.
pub fn check_sc1<I: Instance>(
    inst: &I,
    a: &Diagram,
    b: &Diagram,
    p: &[I::Wire],
    r: &[I::Wire],
    samples: &[Vec<I::Wire>],
) -> Result<LawCheck> {
    let d = Diagram::seq(a.clone(), b.clone())?;
    let lhs = inst.holds(&d, p, r)?;
    let canonical = match inst.direction() {
        Direction::Forward => inst.transfer(a, p)?,
        Direction::Backward => inst.transfer(b, r)?,
    };
    let (rhs, exhaustive) = exists(inst, a.outs(), Some(canonical), samples, |q| {
        Ok(inst.holds(a, p, q)? && inst.holds(b, q, r)?)
    })?;
    Ok(LawCheck {
        lhs,
        rhs,
        exhaustive,
    })
}

/// `{p1,p2} a⊎b {r1,r2}` against `{p1} a {r1} ∧ {p2} b {r2}`.
pub fn check_sc2<I: Instance>(
    inst: &I,
    a: &Diagram,
    b: &Diagram,
    p: &[I::Wire],
    r: &[I::Wire],
) -> Result<LawCheck> {
    let d = Diagram::par(a.clone(), b.clone())?;
    let lhs = inst.holds(&d, p, r)?;
    let (p1, p2) = p.split_at(a.ins());
    let (r1, r2) = r.split_at(a.outs());
    let rhs = inst.holds(a, p1, r1)? && inst.holds(b, p2, r2)?;
    Ok(LawCheck {
        lhs,
        rhs,
        exhaustive: true,
    })
}

/// `{p} Fb(body) {r}` against `∃q. {p,q} body {r,q}`.
pub fn check_sc3<I: Instance>(
    inst: &I,
    body: &Diagram,
    p: &[I::Wire],
    r: &[I::Wire],
    samples: &[I::Wire],
) -> Result<LawCheck> {
    let d = Diagram::fb(body.clone())?;
    let lhs = inst.holds(&d, p, r)?;
    let canonical = match inst.fb_invariant(body, p, r) {
        Ok(q) => Some(vec![q]),
        Err(Error::TripleFalse(_)) => None,
        Err(e) => return Err(e),
    };
    let samples: Vec<Vec<I::Wire>> = samples.iter().map(|q| vec![q.clone()]).collect();
    let (rhs, exhaustive) = exists(inst, 1, canonical, &samples, |q| {
        inst.holds(body, &concat(p, q), &concat(r, q))
    })?;
    Ok(LawCheck {
        lhs,
        rhs,
        exhaustive,
    })
}
