//! Pointer programs on a bounded heap and the separation-logic instance.
//!
//! A state is a store plus a heap over addresses `0..addrs`, each cell either
//! undefined or holding a domain value. Faulting heap accesses abort; the
//! instance relates `P` to `Q` when every state in `P` is in the weakest
//! liberal precondition of `Q` (no abort, and `Q` on termination).
//! Quantifiers over heap extensions only range over the bounded address space.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::config::{Config, CostModel, StoreSpace};
use crate::diagram::{Alphabet, Basic, Diagram};
use crate::error::{Error, Result};
use crate::expr::{bexpr_from_sexpr, expr_from_sexpr, is_ident, BExpr, Env, Expr};
use crate::flowchart::{execute, execute_from_feedback, flow_step, Machine, Outcome, Step};
use crate::kernel::{concat, Direction, Instance};
use crate::sexpr::Sexpr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HState {
    pub store: Vec<i64>,
    pub heap: Vec<Option<i64>>,
}

impl HState {
    /// Addresses with a defined cell.
    pub fn domain(&self) -> Vec<usize> {
        (0..self.heap.len())
            .filter(|&a| self.heap[a].is_some())
            .collect()
    }
}

/// Enumerates `store × heap` with mixed-radix indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeapSpace {
    pub stores: StoreSpace,
    pub addrs: usize,
}

impl HeapSpace {
    pub fn new(cfg: &Config) -> Self {
        HeapSpace {
            stores: cfg.store_space(),
            addrs: cfg.addrs,
        }
    }

    fn cell_radix(&self) -> usize {
        self.stores.domain_size() + 1
    }

    pub fn heap_count(&self) -> usize {
        self.cell_radix().pow(self.addrs as u32)
    }

    pub fn size(&self) -> usize {
        self.stores.size() * self.heap_count()
    }

    pub fn index(&self, s: &HState) -> usize {
        let r = self.cell_radix();
        let h = s.heap.iter().fold(0, |acc, c| {
            acc * r + c.map_or(0, |v| (v - self.stores.lo) as usize + 1)
        });
        self.stores.index(&s.store) * self.heap_count() + h
    }

    pub fn state(&self, index: usize) -> HState {
        let r = self.cell_radix();
        let mut h = index % self.heap_count();
        let mut heap = vec![None; self.addrs];
        for cell in heap.iter_mut().rev() {
            let digit = h % r;
            *cell = (digit > 0).then(|| self.stores.lo + digit as i64 - 1);
            h /= r;
        }
        HState {
            store: self.stores.store(index / self.heap_count()),
            heap,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = HState> + '_ {
        (0..self.size()).map(move |i| self.state(i))
    }

    pub fn show(&self, s: &HState) -> String {
        let cells: Vec<String> = s
            .heap
            .iter()
            .map(|c| c.map_or("-".to_string(), |v| v.to_string()))
            .collect();
        format!("{} heap=[{}]", self.stores.show(&s.store), cells.join(" "))
    }
}

#[derive(Debug, Clone)]
pub struct PointerMachine {
    pub space: HeapSpace,
    pub cost: CostModel,
}

impl PointerMachine {
    pub fn new(cfg: &Config) -> Self {
        PointerMachine {
            space: HeapSpace::new(cfg),
            cost: cfg.cost.clone(),
        }
    }

    fn address(&self, e: &Expr, store: &[i64]) -> Result<Option<usize>> {
        let a = e.eval(&self.space.stores.env(store))?;
        Ok((0..self.space.addrs as i64)
            .contains(&a)
            .then_some(a as usize))
    }

    fn var(&self, v: &str) -> Result<usize> {
        self.space
            .stores
            .var_index(v)
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    }
}

impl Machine for PointerMachine {
    type State = HState;

    fn step(&self, basic: &Basic, branch: usize, s: &HState) -> Result<Step<HState>> {
        let stores = &self.space.stores;
        if let Some((b, store)) = flow_step(stores, basic, branch, &s.store)? {
            return Ok(Step::Next(
                b,
                HState {
                    store,
                    heap: s.heap.clone(),
                },
            ));
        }
        let mut next = s.clone();
        let defined = |a: Option<usize>| a.filter(|&a| s.heap[a].is_some());
        match basic {
            Basic::Lookup { var, addr } => match defined(self.address(addr, &s.store)?) {
                Some(a) => next.store[self.var(var)?] = s.heap[a].unwrap(),
                None => return Ok(Step::Abort),
            },
            Basic::Mutate { addr, value } => match defined(self.address(addr, &s.store)?) {
                Some(a) => {
                    let v = value.eval(&stores.env(&s.store))?;
                    next.heap[a] = Some(stores.reduce(v));
                }
                None => return Ok(Step::Abort),
            },
            Basic::Dispose(addr) => match defined(self.address(addr, &s.store)?) {
                Some(a) => next.heap[a] = None,
                None => return Ok(Step::Abort),
            },
            Basic::New { var, inits } => {
                let env = stores.env(&s.store);
                let values = inits
                    .iter()
                    .map(|e| Ok(stores.reduce(e.eval(&env)?)))
                    .collect::<Result<Vec<_>>>()?;
                let at = s.domain().last().map_or(0, |m| m + 1);
                if at + values.len() > self.space.addrs || !stores.contains_value(at as i64) {
                    return Err(Error::AddressSpaceExhausted {
                        at: at as i64,
                        cells: values.len(),
                        addrs: self.space.addrs,
                        lo: stores.lo,
                        hi: stores.hi,
                    });
                }
                for (k, v) in values.into_iter().enumerate() {
                    next.heap[at + k] = Some(v);
                }
                next.store[self.var(var)?] = at as i64;
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "`{}` is not a pointer-program basic",
                    basic.name()
                )))
            }
        }
        Ok(Step::Next(branch, next))
    }

    fn weight(&self, basic: &Basic) -> u64 {
        self.cost.weight(basic)
    }
}

/// How far an existential ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Range {
    Values,
    Addresses,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SepFormula {
    True,
    False,
    Emp,
    PointsTo(Expr, Expr),
    PointsToAny(Expr),
    Star(Box<SepFormula>, Box<SepFormula>),
    Wand(Box<SepFormula>, Box<SepFormula>),
    And(Box<SepFormula>, Box<SepFormula>),
    Or(Box<SepFormula>, Box<SepFormula>),
    Not(Box<SepFormula>),
    Exists(String, Range, Box<SepFormula>),
    Pure(BExpr),
    /// `body[term/var]`.
    Subst(String, Expr, Box<SepFormula>),
}

impl SepFormula {
    pub fn star(a: SepFormula, b: SepFormula) -> Self {
        SepFormula::Star(Box::new(a), Box::new(b))
    }

    pub fn wand(a: SepFormula, b: SepFormula) -> Self {
        SepFormula::Wand(Box::new(a), Box::new(b))
    }

    pub fn and(a: SepFormula, b: SepFormula) -> Self {
        SepFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: SepFormula, b: SepFormula) -> Self {
        SepFormula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: SepFormula) -> Self {
        SepFormula::Not(Box::new(a))
    }

    pub fn subst(var: &str, t: Expr, body: SepFormula) -> Self {
        SepFormula::Subst(var.to_string(), t, Box::new(body))
    }

    /// `t ↦ s0, s1, …`: consecutive cells starting at `t`.
    pub fn points_to_seq(t: &Expr, values: &[Expr]) -> Self {
        let mut cells = values.iter().enumerate().map(|(k, s)| {
            let at = if k == 0 {
                t.clone()
            } else {
                Expr::add(t.clone(), Expr::Const(k as i64))
            };
            SepFormula::PointsTo(at, s.clone())
        });
        let first = cells.next().unwrap_or(SepFormula::Emp);
        cells.fold(first, SepFormula::star)
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        let mut push = |v: &str| {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string())
            }
        };
        match self {
            SepFormula::True | SepFormula::False | SepFormula::Emp => {}
            SepFormula::PointsTo(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            SepFormula::PointsToAny(a) => a.collect_vars(out),
            SepFormula::Star(a, b)
            | SepFormula::Wand(a, b)
            | SepFormula::And(a, b)
            | SepFormula::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            SepFormula::Not(a) => a.collect_vars(out),
            SepFormula::Exists(v, _, body) => {
                push(v);
                body.collect_vars(out);
            }
            SepFormula::Pure(b) => b.collect_vars(out),
            SepFormula::Subst(v, t, body) => {
                push(v);
                t.collect_vars(out);
                body.collect_vars(out);
            }
        }
    }

    /// Reads `(emp)`, `(pto t s ..)`, `(pto-any t)`, `(star P Q)`, `(wand P Q)`,
    /// `(and ..)`, `(or ..)`, `(not P)`, `(exists v P)`, `(exists-addr v P)`,
    /// `(pure b)`, `(true)`, `(false)`, or a quoted pure formula.
    pub fn from_sexpr(s: &Sexpr) -> Result<SepFormula> {
        if s.string().is_some() {
            return Ok(SepFormula::Pure(bexpr_from_sexpr(s)?));
        }
        let (head, args) = s.head()?;
        let n = |k: usize| s.expect_args(args, k, head);
        let sub = |i: usize| SepFormula::from_sexpr(&args[i]);
        let bound = |e: &Sexpr| -> Result<String> {
            e.atom()
                .filter(|a| is_ident(a))
                .map(str::to_string)
                .ok_or_else(|| e.err("expected a variable"))
        };
        Ok(match head {
            "true" => SepFormula::True,
            "false" => SepFormula::False,
            "emp" => {
                n(0)?;
                SepFormula::Emp
            }
            "pto" => {
                if args.len() < 2 {
                    return Err(s.err("`pto` needs an address and at least one value"));
                }
                let t = expr_from_sexpr(&args[0])?;
                let vals = args[1..]
                    .iter()
                    .map(expr_from_sexpr)
                    .collect::<Result<Vec<_>>>()?;
                SepFormula::points_to_seq(&t, &vals)
            }
            "pto-any" => {
                n(1)?;
                SepFormula::PointsToAny(expr_from_sexpr(&args[0])?)
            }
            "star" | "wand" => {
                n(2)?;
                let (a, b) = (sub(0)?, sub(1)?);
                if head == "star" {
                    SepFormula::star(a, b)
                } else {
                    SepFormula::wand(a, b)
                }
            }
            "and" | "or" => {
                let parts = (0..args.len()).map(sub).collect::<Result<Vec<_>>>()?;
                let (unit, join): (SepFormula, fn(SepFormula, SepFormula) -> SepFormula) =
                    if head == "and" {
                        (SepFormula::True, SepFormula::and)
                    } else {
                        (SepFormula::False, SepFormula::or)
                    };
                let mut it = parts.into_iter();
                match it.next() {
                    None => unit,
                    Some(first) => it.fold(first, join),
                }
            }
            "not" => {
                n(1)?;
                SepFormula::not(sub(0)?)
            }
            "exists" | "exists-addr" => {
                n(2)?;
                let range = if head == "exists" {
                    Range::Values
                } else {
                    Range::Addresses
                };
                SepFormula::Exists(bound(&args[0])?, range, Box::new(sub(1)?))
            }
            "pure" => {
                n(1)?;
                SepFormula::Pure(bexpr_from_sexpr(&args[0])?)
            }
            _ => return Err(s.err(format!("unknown heap formula `{head}`"))),
        })
    }
}

impl fmt::Display for SepFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SepFormula::True => write!(f, "(true)"),
            SepFormula::False => write!(f, "(false)"),
            SepFormula::Emp => write!(f, "(emp)"),
            SepFormula::PointsTo(t, s) => write!(f, "(pto {} {})", t.to_sexpr(), s.to_sexpr()),
            SepFormula::PointsToAny(t) => write!(f, "(pto-any {})", t.to_sexpr()),
            SepFormula::Star(a, b) => write!(f, "(star {a} {b})"),
            SepFormula::Wand(a, b) => write!(f, "(wand {a} {b})"),
            SepFormula::And(a, b) => write!(f, "(and {a} {b})"),
            SepFormula::Or(a, b) => write!(f, "(or {a} {b})"),
            SepFormula::Not(a) => write!(f, "(not {a})"),
            SepFormula::Exists(v, Range::Values, b) => write!(f, "(exists {v} {b})"),
            SepFormula::Exists(v, Range::Addresses, b) => write!(f, "(exists-addr {v} {b})"),
            SepFormula::Pure(b) => write!(f, "(pure {})", b.to_sexpr()),
            SepFormula::Subst(v, t, b) => write!(f, "(subst {v} {} {b})", t.to_sexpr()),
        }
    }
}

/// Store lookups with a stack of local bindings on top.
struct Scope<'a> {
    space: &'a StoreSpace,
    store: &'a [i64],
    binds: Vec<(String, i64)>,
}

impl Env for Scope<'_> {
    fn lookup(&self, name: &str) -> Option<i64> {
        self.binds
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .or_else(|| self.space.var_index(name).map(|i| self.store[i]))
    }

    fn quantifier_range(&self) -> (i64, i64) {
        (self.space.lo, self.space.hi)
    }
}

type Heap = Vec<Option<i64>>;

fn mask_of(h: &Heap) -> u32 {
    h.iter()
        .enumerate()
        .filter(|(_, c)| c.is_some())
        .fold(0, |m, (a, _)| m | 1 << a)
}

fn restrict(h: &Heap, mask: u32) -> Heap {
    h.iter()
        .enumerate()
        .map(|(a, c)| if mask >> a & 1 == 1 { *c } else { None })
        .collect()
}

/// Submasks of `mask`, including 0 and `mask` itself.
fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = (cur != 0).then(|| (cur - 1) & mask);
        Some(cur)
    })
}

#[derive(Debug, Clone)]
pub struct PpInstance {
    machine: PointerMachine,
}

/// Result of the brute-force weakest-precondition oracle on one input wire.
#[derive(Debug, Clone, PartialEq)]
pub struct WpcOracle {
    pub wpc: FixedBitSet,
    /// States whose run needs more heap than the model has.
    pub unmodeled: FixedBitSet,
}

impl PpInstance {
    pub fn new(cfg: &Config) -> Self {
        PpInstance {
            machine: PointerMachine::new(cfg),
        }
    }

    pub fn space(&self) -> &HeapSpace {
        &self.machine.space
    }

    pub fn machine(&self) -> &PointerMachine {
        &self.machine
    }

    pub fn empty(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.space().size())
    }

    pub fn full(&self) -> FixedBitSet {
        let mut s = self.empty();
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, states: &[HState]) -> FixedBitSet {
        let mut s = self.empty();
        for st in states {
            s.insert(self.space().index(st));
        }
        s
    }

    /// Runs one basic or composite from a state.
    pub fn run(&self, d: &Diagram, branch: usize, s: &HState) -> Result<Outcome<HState>> {
        Ok(execute(&self.machine, d, branch, s.clone())?.outcome)
    }

    pub fn eval_sep(&self, f: &SepFormula, s: &HState) -> Result<bool> {
        let mut scope = Scope {
            space: &self.space().stores,
            store: &s.store,
            binds: Vec::new(),
        };
        self.sat(f, &mut scope, &s.heap)
    }

    fn sat(&self, f: &SepFormula, scope: &mut Scope<'_>, h: &Heap) -> Result<bool> {
        let addr = |e: &Expr, scope: &Scope<'_>| -> Result<Option<usize>> {
            let a = e.eval(scope)?;
            Ok((0..self.space().addrs as i64)
                .contains(&a)
                .then_some(a as usize))
        };
        Ok(match f {
            SepFormula::True => true,
            SepFormula::False => false,
            SepFormula::Emp => mask_of(h) == 0,
            SepFormula::PointsTo(t, s) => match addr(t, scope)? {
                Some(a) => mask_of(h) == 1 << a && h[a] == Some(s.eval(scope)?),
                None => false,
            },
            SepFormula::PointsToAny(t) => match addr(t, scope)? {
                Some(a) => mask_of(h) == 1 << a,
                None => false,
            },
            SepFormula::Star(p, q) => {
                let dom = mask_of(h);
                for part in submasks(dom) {
                    if self.sat(p, scope, &restrict(h, part))?
                        && self.sat(q, scope, &restrict(h, dom & !part))?
                    {
                        return Ok(true);
                    }
                }
                false
            }
            SepFormula::Wand(p, q) => {
                let all = (1u32 << self.space().addrs) - 1;
                let free = all & !mask_of(h);
                for ext_mask in submasks(free) {
                    for ext in self.heaps_on(ext_mask) {
                        if self.sat(p, scope, &ext)? {
                            let joined: Heap = h.iter().zip(&ext).map(|(a, b)| a.or(*b)).collect();
                            if !self.sat(q, scope, &joined)? {
                                return Ok(false);
                            }
                        }
                    }
                }
                true
            }
            SepFormula::And(p, q) => self.sat(p, scope, h)? && self.sat(q, scope, h)?,
            SepFormula::Or(p, q) => self.sat(p, scope, h)? || self.sat(q, scope, h)?,
            SepFormula::Not(p) => !self.sat(p, scope, h)?,
            SepFormula::Exists(v, range, body) => {
                let values: Vec<i64> = match range {
                    Range::Values => (self.space().stores.lo..=self.space().stores.hi).collect(),
                    Range::Addresses => (0..self.space().addrs as i64).collect(),
                };
                for value in values {
                    scope.binds.push((v.clone(), value));
                    let ok = self.sat(body, scope, h);
                    scope.binds.pop();
                    if ok? {
                        return Ok(true);
                    }
                }
                false
            }
            SepFormula::Pure(b) => b.eval(scope)?,
            SepFormula::Subst(v, t, body) => {
                let value = t.eval(scope)?;
                scope.binds.push((v.clone(), value));
                let ok = self.sat(body, scope, h);
                scope.binds.pop();
                ok?
            }
        })
    }

    /// Every heap defined exactly on `mask`.
    fn heaps_on(&self, mask: u32) -> Vec<Heap> {
        let addrs: Vec<usize> = (0..self.space().addrs)
            .filter(|a| mask >> a & 1 == 1)
            .collect();
        let (lo, hi) = (self.space().stores.lo, self.space().stores.hi);
        let mut out = vec![vec![None; self.space().addrs]];
        for a in addrs {
            out = out
                .into_iter()
                .flat_map(|h| {
                    (lo..=hi).map(move |v| {
                        let mut h = h.clone();
                        h[a] = Some(v);
                        h
                    })
                })
                .collect();
        }
        out
    }

    /// States satisfying a formula.
    pub fn denote(&self, f: &SepFormula) -> Result<FixedBitSet> {
        let mut s = self.empty();
        for (i, st) in self.space().states().enumerate() {
            if self.eval_sep(f, &st)? {
                s.insert(i);
            }
        }
        Ok(s)
    }

    /// Weakest liberal precondition by simulation, one entry per input wire.
    pub fn wpc_oracle(&self, d: &Diagram, q: &[FixedBitSet]) -> Result<Vec<WpcOracle>> {
        if q.len() != d.outs() {
            return Err(Error::Arity {
                what: "postcondition".into(),
                expected: d.outs(),
                found: q.len(),
            });
        }
        (0..d.ins())
            .map(|branch| {
                let mut wpc = self.empty();
                let mut unmodeled = self.empty();
                for (i, st) in self.space().states().enumerate() {
                    match execute(&self.machine, d, branch, st) {
                        Ok(ex) => {
                            if self.accepts(ex.outcome, q) {
                                wpc.insert(i);
                            }
                        }
                        Err(Error::AddressSpaceExhausted { .. }) => unmodeled.insert(i),
                        Err(e) => return Err(e),
                    }
                }
                Ok(WpcOracle { wpc, unmodeled })
            })
            .collect()
    }

    fn accepts(&self, o: Outcome<HState>, q: &[FixedBitSet]) -> bool {
        match o {
            Outcome::Terminated { branch, state } => q[branch].contains(self.space().index(&state)),
            Outcome::Diverges => true,
            Outcome::Aborted => false,
        }
    }

    /// The weakest-precondition formula of a heap basic.
    pub fn wpc_formula(&self, b: &Basic, p: &SepFormula) -> Result<SepFormula> {
        let mut used = Vec::new();
        p.collect_vars(&mut used);
        used.extend(self.space().stores.vars.iter().cloned());
        let fresh = |base: &str| {
            let mut name = base.to_string();
            while used.contains(&name) {
                name.push('\'');
            }
            name
        };
        Ok(match b {
            Basic::Lookup { var, addr } => {
                let v = fresh("v");
                let cell = SepFormula::PointsTo(addr.clone(), Expr::Var(v.clone()));
                SepFormula::Exists(
                    v.clone(),
                    Range::Values,
                    Box::new(SepFormula::star(
                        cell.clone(),
                        SepFormula::wand(cell, SepFormula::subst(var, Expr::Var(v), p.clone())),
                    )),
                )
            }
            Basic::Mutate { addr, value } => SepFormula::star(
                SepFormula::PointsToAny(addr.clone()),
                SepFormula::wand(SepFormula::PointsTo(addr.clone(), value.clone()), p.clone()),
            ),
            Basic::Dispose(addr) => {
                SepFormula::star(SepFormula::PointsToAny(addr.clone()), p.clone())
            }
            Basic::New { var, inits } => {
                // ∀i over the bounded address space
                (0..self.space().addrs as i64)
                    .map(|a| {
                        let cells = SepFormula::points_to_seq(&Expr::Const(a), inits);
                        SepFormula::wand(cells, SepFormula::subst(var, Expr::Const(a), p.clone()))
                    })
                    .reduce(SepFormula::and)
                    .unwrap_or(SepFormula::True)
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "no weakest-precondition formula for `{}`",
                    other.name()
                )))
            }
        })
    }

    fn exhausted_in(&self, d: &Diagram, branch: usize, set: &FixedBitSet) -> Result<()> {
        for i in set.ones() {
            execute(&self.machine, d, branch, self.space().state(i))?;
        }
        Ok(())
    }
}

impl Instance for PpInstance {
    type Wire = FixedBitSet;

    fn name(&self) -> &'static str {
        "pp"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Pointer
    }

    fn direction(&self) -> Direction {
        Direction::Backward
    }

    fn wire_leq(&self, p: &FixedBitSet, q: &FixedBitSet) -> bool {
        p.is_subset(q)
    }

    fn holds(&self, d: &Diagram, p: &[FixedBitSet], q: &[FixedBitSet]) -> Result<bool> {
        if p.len() != d.ins() {
            return Err(Error::Arity {
                what: "precondition".into(),
                expected: d.ins(),
                found: p.len(),
            });
        }
        let oracle = self.wpc_oracle(d, q)?;
        for (branch, (pw, o)) in p.iter().zip(&oracle).enumerate() {
            if !pw.is_disjoint(&o.unmodeled) {
                let mut hit = pw.clone();
                hit.intersect_with(&o.unmodeled);
                self.exhausted_in(d, branch, &hit)?;
            }
        }
        Ok(p.iter().zip(&oracle).all(|(pw, o)| pw.is_subset(&o.wpc)))
    }

    fn transfer(&self, d: &Diagram, a: &[FixedBitSet]) -> Result<Vec<FixedBitSet>> {
        Ok(self.wpc_oracle(d, a)?.into_iter().map(|o| o.wpc).collect())
    }

    /// The weakest invariant: feedback states from which the loop never
    /// aborts and exits into `r` if it exits at all.
    fn fb_invariant(
        &self,
        body: &Diagram,
        p: &[FixedBitSet],
        r: &[FixedBitSet],
    ) -> Result<FixedBitSet> {
        let mut q = self.empty();
        for (i, st) in self.space().states().enumerate() {
            match execute_from_feedback(&self.machine, body, st) {
                Ok(ex) => {
                    if self.accepts(ex.outcome, r) {
                        q.insert(i);
                    }
                }
                Err(Error::AddressSpaceExhausted { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let inv = std::slice::from_ref(&q);
        if !self.holds(body, &concat(p, inv), &concat(r, inv))? {
            return Err(Error::TripleFalse(format!(
                "precondition not within the weakest precondition of {}",
                Diagram::fb(body.clone())?
            )));
        }
        Ok(q)
    }

    fn counterexample(
        &self,
        d: &Diagram,
        p: &[FixedBitSet],
        q: &[FixedBitSet],
    ) -> Result<Option<String>> {
        let oracle = self.wpc_oracle(d, q)?;
        for (branch, (pw, o)) in p.iter().zip(&oracle).enumerate() {
            if let Some(i) = pw.ones().find(|&i| !o.wpc.contains(i)) {
                let st = self.space().state(i);
                let what = match self.run(d, branch, &st)? {
                    Outcome::Aborted => "aborts".to_string(),
                    Outcome::Terminated { branch, state } => {
                        format!("reaches wire {branch} state {}", self.space().show(&state))
                    }
                    Outcome::Diverges => "diverges".to_string(),
                };
                return Ok(Some(format!(
                    "input wire {branch} state {} {what}",
                    self.space().show(&st)
                )));
            }
        }
        Ok(None)
    }

    fn show_wire(&self, w: &FixedBitSet) -> String {
        let count = w.count_ones(..);
        if count == self.space().size() {
            return "all".into();
        }
        let shown: Vec<String> = w
            .ones()
            .take(4)
            .map(|i| format!("({})", self.space().show(&self.space().state(i))))
            .collect();
        let more = if count > 4 {
            format!(" ... {count} states")
        } else {
            String::new()
        };
        format!("{{{}{more}}}", shown.join(" "))
    }
}
