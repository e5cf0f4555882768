//! Partial correctness of flowcharts with extensional store assertions.
//!
//! An assertion on `n` wires is `n` sets of stores. `{P} A {Q}` holds when the
//! image of `P` under `A` (diverging runs contribute nothing) lies in `Q`.

use fixedbitset::FixedBitSet;

use crate::config::{Config, StoreSpace};
use crate::diagram::{Alphabet, Diagram};
use crate::error::{Error, Result};
use crate::expr::{parse_bexpr, BExpr};
use crate::flowchart::{execute, FlowMachine, Outcome, Store};
use crate::kernel::{concat, Direction, Instance};

pub type StoreSet = FixedBitSet;

#[derive(Debug, Clone)]
pub struct FcInstance {
    machine: FlowMachine,
}

impl FcInstance {
    pub fn new(cfg: &Config) -> Self {
        FcInstance {
            machine: FlowMachine::new(cfg),
        }
    }

    pub fn space(&self) -> &StoreSpace {
        &self.machine.space
    }

    pub fn machine(&self) -> &FlowMachine {
        &self.machine
    }

    pub fn empty(&self) -> StoreSet {
        FixedBitSet::with_capacity(self.space().size())
    }

    pub fn full(&self) -> StoreSet {
        let mut s = self.empty();
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, stores: &[&[i64]]) -> StoreSet {
        let mut s = self.empty();
        for st in stores {
            s.insert(self.space().index(st));
        }
        s
    }

    /// Stores satisfying a formula.
    pub fn denote(&self, f: &BExpr) -> Result<StoreSet> {
        let mut s = self.empty();
        for (i, store) in self.space().stores().enumerate() {
            if f.eval(&self.space().env(&store))? {
                s.insert(i);
            }
        }
        Ok(s)
    }

    pub fn formula(&self, src: &str) -> Result<StoreSet> {
        self.denote(&parse_bexpr(src)?)
    }

    pub fn members(&self, s: &StoreSet) -> Vec<Store> {
        s.ones().map(|i| self.space().store(i)).collect()
    }

    fn check_arity(&self, what: &str, a: &[StoreSet], n: usize) -> Result<()> {
        if a.len() != n {
            return Err(Error::Arity {
                what: what.into(),
                expected: n,
                found: a.len(),
            });
        }
        Ok(())
    }

    /// Exact image of `p` under `d`.
    pub fn spc(&self, d: &Diagram, p: &[StoreSet]) -> Result<Vec<StoreSet>> {
        self.check_arity("precondition", p, d.ins())?;
        let mut out = vec![self.empty(); d.outs()];
        for (branch, set) in p.iter().enumerate() {
            for i in set.ones() {
                let ex = execute(&self.machine, d, branch, self.space().store(i))?;
                if let Outcome::Terminated { branch, state } = ex.outcome {
                    out[branch].insert(self.space().index(&state));
                }
            }
        }
        Ok(out)
    }

    /// All stores entering the traced wire of `Fb(body)` from inputs in `p`:
    /// the least fixed point of the body's image on that wire.
    pub fn reachable_feedback(&self, body: &Diagram, p: &[StoreSet]) -> Result<StoreSet> {
        self.check_arity("precondition", p, body.ins().saturating_sub(1))?;
        let fed_in = body.ins() - 1;
        let fed_out = body.outs() - 1;
        let mut q = self.empty();
        let mut work: Vec<(usize, usize)> = p
            .iter()
            .enumerate()
            .flat_map(|(b, s)| s.ones().map(move |i| (b, i)))
            .collect();
        while let Some((branch, i)) = work.pop() {
            let ex = execute(&self.machine, body, branch, self.space().store(i))?;
            if let Outcome::Terminated { branch, state } = ex.outcome {
                if branch == fed_out {
                    let j = self.space().index(&state);
                    if !q.put(j) {
                        work.push((fed_in, j));
                    }
                }
            }
        }
        Ok(q)
    }

    fn show_store(&self, s: &[i64]) -> String {
        self.space().show(s)
    }
}

impl Instance for FcInstance {
    type Wire = StoreSet;

    fn name(&self) -> &'static str {
        "fc"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Flowchart
    }

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn wire_leq(&self, p: &StoreSet, q: &StoreSet) -> bool {
        p.is_subset(q)
    }

    fn holds(&self, d: &Diagram, p: &[StoreSet], q: &[StoreSet]) -> Result<bool> {
        self.check_arity("postcondition", q, d.outs())?;
        let img = self.spc(d, p)?;
        Ok(self.leq(&img, q))
    }

    fn transfer(&self, d: &Diagram, a: &[StoreSet]) -> Result<Vec<StoreSet>> {
        self.spc(d, a)
    }

    fn fb_invariant(&self, body: &Diagram, p: &[StoreSet], r: &[StoreSet]) -> Result<StoreSet> {
        let q = self.reachable_feedback(body, p)?;
        let inv = std::slice::from_ref(&q);
        if !self.holds(body, &concat(p, inv), &concat(r, inv))? {
            return Err(Error::TripleFalse(format!(
                "{} {} {}",
                self.show(p),
                Diagram::fb(body.clone())?,
                self.show(r)
            )));
        }
        Ok(q)
    }

    fn enumeration_size(&self, arity: usize) -> Option<u128> {
        let bits = self.space().size() * arity;
        (bits < 100).then(|| 1u128 << bits)
    }

    /// Tuples of store sets by ascending bit pattern, so every set comes
    /// after all of its subsets.
    fn enumerate(&self, arity: usize) -> Option<Box<dyn Iterator<Item = Vec<StoreSet>> + '_>> {
        let n = self.space().size();
        let bits = n * arity;
        if bits >= 64 {
            return None;
        }
        Some(Box::new((0..(1u64 << bits)).map(move |mask| {
            (0..arity)
                .map(|w| {
                    let mut s = self.empty();
                    for i in 0..n {
                        if mask >> (w * n + i) & 1 == 1 {
                            s.insert(i);
                        }
                    }
                    s
                })
                .collect()
        })))
    }

    fn counterexample(
        &self,
        d: &Diagram,
        p: &[StoreSet],
        q: &[StoreSet],
    ) -> Result<Option<String>> {
        for (branch, set) in p.iter().enumerate() {
            for i in set.ones() {
                let store = self.space().store(i);
                let ex = execute(&self.machine, d, branch, store.clone())?;
                if let Outcome::Terminated { branch: ob, state } = ex.outcome {
                    if !q[ob].contains(self.space().index(&state)) {
                        return Ok(Some(format!(
                            "input wire {branch} store {} reaches wire {ob} store {}, outside the postcondition",
                            self.show_store(&store),
                            self.show_store(&state)
                        )));
                    }
                }
            }
        }
        Ok(None)
    }

    fn show_wire(&self, w: &StoreSet) -> String {
        let count = w.count_ones(..);
        if count == self.space().size() {
            return "all".into();
        }
        let shown: Vec<String> = w
            .ones()
            .take(8)
            .map(|i| format!("({})", self.show_store(&self.space().store(i))))
            .collect();
        let more = if count > 8 {
            format!(" ... {count} stores")
        } else {
            String::new()
        };
        format!("{{{}{more}}}", shown.join(" "))
    }
}
