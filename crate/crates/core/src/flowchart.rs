//! Control-token execution of diagrams under the disjoint-union trace.
//!
//! A token carries a branch index (which wire it is on) and a state. `Seq`
//! runs left then right, `Par` hands the token to whichever side owns the
//! branch, and `Fb` re-feeds the token while it leaves on the traced wire.
//! Because state spaces are finite and machines deterministic, a repeated
//! feedback state means the loop never exits.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use crate::config::{Config, CostModel, StoreSpace};
use crate::diagram::{Basic, Diagram, Node};
use crate::error::{Error, Result};

pub enum Step<S> {
    Next(usize, S),
    Abort,
}

/// Semantics of the basics for one instance.
pub trait Machine {
    type State: Clone + Eq + Hash + Debug;

    fn step(&self, basic: &Basic, branch: usize, state: &Self::State) -> Result<Step<Self::State>>;

    fn weight(&self, basic: &Basic) -> u64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<S> {
    Terminated { branch: usize, state: S },
    Diverges,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution<S> {
    pub outcome: Outcome<S>,
    /// Weighted count of basics evaluated.
    pub steps: u64,
}

/// One pass through a feedback body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pass<S> {
    pub input: (usize, S),
    pub output: (usize, S),
}

pub fn execute<M: Machine>(
    m: &M,
    d: &Diagram,
    branch: usize,
    state: M::State,
) -> Result<Execution<M::State>> {
    check_branch(branch, d.ins())?;
    let mut steps = 0;
    let outcome = exec(m, d, branch, state, &mut steps)?;
    Ok(Execution { outcome, steps })
}

/// Runs `Fb(body)` as if the token had just been fed back with `state`.
pub fn execute_from_feedback<M: Machine>(
    m: &M,
    body: &Diagram,
    state: M::State,
) -> Result<Execution<M::State>> {
    if body.ins() == 0 || body.outs() == 0 {
        return Err(Error::Arity {
            what: "feedback body".into(),
            expected: 1,
            found: 0,
        });
    }
    let mut steps = 0;
    let outcome = feedback_loop(m, body, body.ins() - 1, state, true, &mut steps, None)?;
    Ok(Execution { outcome, steps })
}

/// Runs `Fb(body)` from an outer input and records every pass through `body`.
/// A feedback run and the passes through its body.
pub type Chain<S> = (Execution<S>, Vec<Pass<S>>);

pub fn execute_chain<M: Machine>(
    m: &M,
    body: &Diagram,
    branch: usize,
    state: M::State,
) -> Result<Chain<M::State>> {
    check_branch(branch, body.ins().saturating_sub(1))?;
    let mut steps = 0;
    let mut passes = Vec::new();
    let outcome = feedback_loop(m, body, branch, state, false, &mut steps, Some(&mut passes))?;
    Ok((Execution { outcome, steps }, passes))
}

fn check_branch(branch: usize, arity: usize) -> Result<()> {
    if branch >= arity {
        return Err(Error::Arity {
            what: "input branch".into(),
            expected: arity,
            found: branch,
        });
    }
    Ok(())
}

fn exec<M: Machine>(
    m: &M,
    d: &Diagram,
    branch: usize,
    state: M::State,
    steps: &mut u64,
) -> Result<Outcome<M::State>> {
    match d.node() {
        Node::Basic(b) => {
            *steps += m.weight(b);
            Ok(match m.step(b, branch, &state)? {
                Step::Next(branch, state) => Outcome::Terminated { branch, state },
                Step::Abort => Outcome::Aborted,
            })
        }
        Node::Seq(a, b) => match exec(m, a, branch, state, steps)? {
            Outcome::Terminated { branch, state } => exec(m, b, branch, state, steps),
            other => Ok(other),
        },
        Node::Par(a, b) => {
            if branch < a.ins() {
                exec(m, a, branch, state, steps)
            } else {
                let out = exec(m, b, branch - a.ins(), state, steps)?;
                Ok(match out {
                    Outcome::Terminated { branch, state } => Outcome::Terminated {
                        branch: branch + a.outs(),
                        state,
                    },
                    other => other,
                })
            }
        }
        Node::Fb(body) => feedback_loop(m, body, branch, state, false, steps, None),
    }
}

fn feedback_loop<M: Machine>(
    m: &M,
    body: &Diagram,
    mut branch: usize,
    mut state: M::State,
    mark_start: bool,
    steps: &mut u64,
    mut passes: Option<&mut Vec<Pass<M::State>>>,
) -> Result<Outcome<M::State>> {
    let fed_in = body.ins() - 1;
    let fed_out = body.outs() - 1;
    let mut visited = HashSet::new();
    if mark_start {
        visited.insert(state.clone());
    }
    loop {
        let input = (branch, state.clone());
        match exec(m, body, branch, state, steps)? {
            Outcome::Terminated {
                branch: ob,
                state: os,
            } => {
                if let Some(p) = passes.as_deref_mut() {
                    p.push(Pass {
                        input,
                        output: (ob, os.clone()),
                    });
                }
                if ob != fed_out {
                    return Ok(Outcome::Terminated {
                        branch: ob,
                        state: os,
                    });
                }
                if !visited.insert(os.clone()) {
                    return Ok(Outcome::Diverges);
                }
                branch = fed_in;
                state = os;
            }
            other => return Ok(other),
        }
    }
}

pub type Store = Vec<i64>;

/// A store on a given summand of `Store ⊎ … ⊎ Store`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedStore {
    pub branch: usize,
    pub store: Store,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Terminated(TaggedStore),
    Diverges,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps: u64,
}

/// Flowchart basics over a finite store space.
#[derive(Debug, Clone)]
pub struct FlowMachine {
    pub space: StoreSpace,
    pub cost: CostModel,
}

impl FlowMachine {
    pub fn new(cfg: &Config) -> Self {
        FlowMachine {
            space: cfg.store_space(),
            cost: cfg.cost.clone(),
        }
    }
}

/// Evaluates an assignment or condition shared by the flowchart and pointer machines.
pub(crate) fn flow_step(
    space: &StoreSpace,
    basic: &Basic,
    branch: usize,
    store: &[i64],
) -> Result<Option<(usize, Store)>> {
    let env = space.env(store);
    Ok(Some(match basic {
        Basic::Id => (branch, store.to_vec()),
        Basic::Twist => (1 - branch, store.to_vec()),
        Basic::Join => (0, store.to_vec()),
        Basic::Cond(b) => (usize::from(b.eval(&env)?), store.to_vec()),
        Basic::Assign { var, expr } => {
            let i = space
                .var_index(var)
                .ok_or_else(|| Error::UnboundVariable(var.clone()))?;
            let v = space.reduce(expr.eval(&env)?);
            let mut next = store.to_vec();
            next[i] = v;
            (branch, next)
        }
        _ => return Ok(None),
    }))
}

impl Machine for FlowMachine {
    type State = Store;

    fn step(&self, basic: &Basic, branch: usize, state: &Store) -> Result<Step<Store>> {
        match flow_step(&self.space, basic, branch, state)? {
            Some((b, s)) => Ok(Step::Next(b, s)),
            None => Err(Error::Unsupported(format!(
                "`{}` is not a flowchart basic",
                basic.name()
            ))),
        }
    }

    fn weight(&self, basic: &Basic) -> u64 {
        self.cost.weight(basic)
    }
}

/// Evaluates a single flowchart basic.
pub fn eval_basic(cfg: &Config, basic: &Basic, input: &TaggedStore) -> Result<TaggedStore> {
    let m = FlowMachine::new(cfg);
    match m.step(basic, input.branch, &input.store)? {
        Step::Next(branch, store) => Ok(TaggedStore { branch, store }),
        Step::Abort => unreachable!("flowchart basics never abort"),
    }
}

pub fn run(cfg: &Config, d: &Diagram, input: &TaggedStore) -> Result<RunResult> {
    run_with(&FlowMachine::new(cfg), d, input)
}

/// Like [`run`] but with an explicit cost model.
pub fn run_cost(
    cfg: &Config,
    d: &Diagram,
    input: &TaggedStore,
    model: &CostModel,
) -> Result<RunResult> {
    let m = FlowMachine {
        space: cfg.store_space(),
        cost: model.clone(),
    };
    run_with(&m, d, input)
}

pub fn run_with(m: &FlowMachine, d: &Diagram, input: &TaggedStore) -> Result<RunResult> {
    let ex = execute(m, d, input.branch, input.store.clone())?;
    let outcome = match ex.outcome {
        Outcome::Terminated { branch, state } => RunOutcome::Terminated(TaggedStore {
            branch,
            store: state,
        }),
        Outcome::Diverges => RunOutcome::Diverges,
        Outcome::Aborted => unreachable!("flowchart basics never abort"),
    };
    Ok(RunResult {
        outcome,
        steps: ex.steps,
    })
}
