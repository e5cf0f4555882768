//! Running-time assertions: per wire, a map from stores to `ℕ∞`.
//!
//! `{P} A {Q}` holds when `P(σ) ≥ RRT(A, Q)(σ)` for every input, where the
//! relative running time is the simulated cost of `A` plus `Q` at the output,
//! and `∞` when `A` diverges. A larger budget is a stronger precondition, so
//! `P ⊑ P'` means `P ≥ P'` pointwise.

use crate::config::{Config, CostModel, StoreSpace};
use crate::cost::NatInf;
use crate::diagram::{Alphabet, Diagram};
use crate::error::{Error, Result};
use crate::expr::{parse_cost, CostTerm};
use crate::flowchart::{execute, execute_from_feedback, FlowMachine, Outcome};
use crate::kernel::{concat, Direction, Instance};

/// A cost map indexed by store.
pub type CostFn = Vec<NatInf>;

#[derive(Debug, Clone)]
pub struct RtInstance {
    machine: FlowMachine,
}

impl RtInstance {
    pub fn new(cfg: &Config) -> Self {
        RtInstance {
            machine: FlowMachine::new(cfg),
        }
    }

    pub fn with_model(cfg: &Config, model: CostModel) -> Self {
        RtInstance {
            machine: FlowMachine {
                space: cfg.store_space(),
                cost: model,
            },
        }
    }

    pub fn space(&self) -> &StoreSpace {
        &self.machine.space
    }

    pub fn model(&self) -> &CostModel {
        &self.machine.cost
    }

    pub fn constant(&self, v: NatInf) -> CostFn {
        vec![v; self.space().size()]
    }

    pub fn from_term(&self, t: &CostTerm) -> Result<CostFn> {
        self.space()
            .stores()
            .map(|s| self.eval_term(t, &s))
            .collect()
    }

    /// Parses and tabulates a cost term such as `3*y + 2`.
    pub fn cost(&self, src: &str) -> Result<CostFn> {
        self.from_term(&parse_cost(src)?)
    }

    fn eval_term(&self, t: &CostTerm, store: &[i64]) -> Result<NatInf> {
        let env = self.space().env(store);
        match t {
            CostTerm::Inf => Ok(NatInf::Inf),
            CostTerm::Finite(e) => {
                let v = e.eval(&env)?;
                if v < 0 {
                    return Err(Error::NegativeCost {
                        value: v,
                        store: self.space().show(store),
                    });
                }
                Ok(NatInf::Fin(v as u64))
            }
            CostTerm::Ite(b, x, y) => {
                if b.eval(&env)? {
                    self.eval_term(x, store)
                } else {
                    self.eval_term(y, store)
                }
            }
        }
    }

    fn check_arity(&self, what: &str, a: &[CostFn], n: usize) -> Result<()> {
        if a.len() != n {
            return Err(Error::Arity {
                what: what.into(),
                expected: n,
                found: a.len(),
            });
        }
        Ok(())
    }

    fn continue_with(&self, ex_outcome: Outcome<Vec<i64>>, steps: u64, q: &[CostFn]) -> NatInf {
        match ex_outcome {
            Outcome::Terminated { branch, state } => q[branch][self.space().index(&state)] + steps,
            _ => NatInf::Inf,
        }
    }

    /// Relative running time of `d` with continuation cost `q`.
    pub fn rrt(&self, d: &Diagram, q: &[CostFn]) -> Result<Vec<CostFn>> {
        self.check_arity("postcondition", q, d.outs())?;
        (0..d.ins())
            .map(|branch| {
                self.space()
                    .stores()
                    .map(|s| {
                        let ex = execute(&self.machine, d, branch, s)?;
                        Ok(self.continue_with(ex.outcome, ex.steps, q))
                    })
                    .collect()
            })
            .collect()
    }

    /// `{p} d {q}` with equality on every input where the run terminates.
    pub fn holds_exact(&self, d: &Diagram, p: &[CostFn], q: &[CostFn]) -> Result<bool> {
        self.check_arity("precondition", p, d.ins())?;
        let r = self.rrt(d, q)?;
        Ok(p.iter()
            .zip(&r)
            .all(|(pw, rw)| pw.iter().zip(rw).all(|(a, b)| b.is_inf() || a == b)))
    }

    /// Remaining cost from the traced wire of `Fb(body)` at every store, with
    /// `r` charged at the exit. `∞` where the loop diverges.
    pub fn remaining_cost(&self, body: &Diagram, r: &[CostFn]) -> Result<CostFn> {
        self.check_arity("postcondition", r, body.outs().saturating_sub(1))?;
        self.space()
            .stores()
            .map(|s| {
                let ex = execute_from_feedback(&self.machine, body, s)?;
                Ok(self.continue_with(ex.outcome, ex.steps, r))
            })
            .collect()
    }

    /// Replays one input and checks what the triple promises about it: the
    /// run terminates, and takes at most (exactly, if `exact`) `p(σ) − q(out)` steps.
    pub fn triple_meaning_check(
        &self,
        d: &Diagram,
        p: &[CostFn],
        q: &[CostFn],
        branch: usize,
        store: &[i64],
        exact: bool,
    ) -> Result<bool> {
        let budget = p[branch][self.space().index(store)];
        if budget.is_inf() {
            return Ok(true);
        }
        let ex = execute(&self.machine, d, branch, store.to_vec())?;
        let rest = match ex.outcome {
            Outcome::Terminated { branch, state } => q[branch][self.space().index(&state)],
            _ => return Ok(false),
        };
        match budget.checked_sub(rest) {
            Some(NatInf::Fin(allowed)) => Ok(if exact {
                ex.steps == allowed
            } else {
                ex.steps <= allowed
            }),
            _ => Ok(false),
        }
    }
}

impl Instance for RtInstance {
    type Wire = CostFn;

    fn name(&self) -> &'static str {
        "rt"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Flowchart
    }

    fn direction(&self) -> Direction {
        Direction::Backward
    }

    fn wire_leq(&self, p: &CostFn, q: &CostFn) -> bool {
        p.iter().zip(q).all(|(a, b)| a >= b)
    }

    fn holds(&self, d: &Diagram, p: &[CostFn], q: &[CostFn]) -> Result<bool> {
        self.check_arity("precondition", p, d.ins())?;
        let r = self.rrt(d, q)?;
        Ok(self.leq(p, &r))
    }

    fn transfer(&self, d: &Diagram, a: &[CostFn]) -> Result<Vec<CostFn>> {
        self.rrt(d, a)
    }

    fn fb_invariant(&self, body: &Diagram, p: &[CostFn], r: &[CostFn]) -> Result<CostFn> {
        let q = self.remaining_cost(body, r)?;
        let inv = std::slice::from_ref(&q);
        if !self.holds(body, &concat(p, inv), &concat(r, inv))? {
            return Err(Error::TripleFalse(format!(
                "budget {} is too small for {}",
                self.show(p),
                Diagram::fb(body.clone())?
            )));
        }
        Ok(q)
    }

    fn counterexample(&self, d: &Diagram, p: &[CostFn], q: &[CostFn]) -> Result<Option<String>> {
        let r = self.rrt(d, q)?;
        for (branch, (pw, rw)) in p.iter().zip(&r).enumerate() {
            for (i, (a, b)) in pw.iter().zip(rw).enumerate() {
                if a < b {
                    return Ok(Some(format!(
                        "input wire {branch} store {}: budget {a} but relative running time {b}",
                        self.space().show(&self.space().store(i))
                    )));
                }
            }
        }
        Ok(None)
    }

    fn show_wire(&self, w: &CostFn) -> String {
        if w.iter().all(|v| *v == w[0]) {
            return w[0].to_string();
        }
        let shown: Vec<String> = w
            .iter()
            .enumerate()
            .take(6)
            .map(|(i, v)| format!("[{}]={v}", self.space().show(&self.space().store(i))))
            .collect();
        format!("{{{} ...}}", shown.join(" "))
    }
}
