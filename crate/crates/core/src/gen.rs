//! Random and exhaustive generators for diagrams and assertions.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cost::NatInf;
use crate::diagram::{Basic, Diagram};
use crate::expr::{BExpr, CmpOp, Expr};
use crate::stream::hsc::{Ideal, WireAssertion};
use crate::stream::series::Series;

/// Widest wire bundle a generated diagram may carry.
pub const MAX_WIRES: usize = 3;

fn var(v: &str) -> Expr {
    Expr::Var(v.to_string())
}

/// Assignments over `x` and `y`.
pub fn flow_assignments() -> Vec<Basic> {
    let e = |var: &str, expr: Expr| Basic::Assign {
        var: var.to_string(),
        expr,
    };
    vec![
        e("x", Expr::Const(1)),
        e("x", Expr::mul(var("x"), var("y"))),
        e("y", Expr::sub(var("y"), Expr::Const(1))),
        e("x", Expr::add(var("x"), Expr::Const(1))),
        e("y", var("x")),
    ]
}

/// Tests over `x` and `y`.
pub fn flow_tests() -> Vec<BExpr> {
    vec![
        BExpr::cmp(CmpOp::Ge, var("y"), Expr::Const(1)),
        BExpr::cmp(CmpOp::Lt, var("x"), var("y")),
        BExpr::cmp(CmpOp::Eq, var("x"), Expr::Const(0)),
    ]
}

fn flow_basic<R: Rng>(rng: &mut R, ins: usize) -> Diagram {
    match ins {
        1 => match rng.gen_range(0..6) {
            0 => Diagram::id(),
            1 | 2 => Diagram::basic(flow_assignments().choose(rng).unwrap().clone()),
            _ => Diagram::basic(Basic::Cond(flow_tests().choose(rng).unwrap().clone())),
        },
        _ => Diagram::basic(if rng.gen_bool(0.5) {
            Basic::Join
        } else {
            Basic::Twist
        }),
    }
}

/// Closes extra output wires with joins until at most `max` remain.
fn narrow(mut d: Diagram, max: usize) -> Diagram {
    while d.outs() > max {
        let mut tail = Diagram::basic(Basic::Join);
        for _ in 0..d.outs() - 2 {
            tail = Diagram::par(Diagram::id(), tail).expect("unary id");
        }
        d = Diagram::seq(d, tail).expect("arity matched");
    }
    d
}

/// A random flowchart with `ins` input wires, nesting at most `depth`.
pub fn flowchart<R: Rng>(rng: &mut R, depth: usize, ins: usize) -> Diagram {
    let d = if depth == 0 || rng.gen_bool(0.25) {
        if ins == 1 || (ins == 2 && rng.gen_bool(0.7)) {
            flow_basic(rng, ins)
        } else {
            let k = rng.gen_range(1..ins);
            Diagram::par(flowchart(rng, 0, k), flowchart(rng, 0, ins - k)).expect("par")
        }
    } else {
        match rng.gen_range(0..10) {
            0..=4 => {
                let a = flowchart(rng, depth - 1, ins);
                let b = flowchart(rng, depth - 1, a.outs());
                Diagram::seq(a, b).expect("arity matched")
            }
            5..=6 if ins >= 2 => {
                let k = rng.gen_range(1..ins);
                Diagram::par(
                    flowchart(rng, depth - 1, k),
                    flowchart(rng, depth - 1, ins - k),
                )
                .expect("par")
            }
            _ => {
                let mut body = flowchart(rng, depth - 1, ins + 1);
                if body.outs() < 2 {
                    body = Diagram::seq(body, Diagram::basic(Basic::Cond(flow_tests()[0].clone())))
                        .expect("unary cond");
                }
                Diagram::fb(body).expect("fb arity")
            }
        }
    };
    narrow(d, MAX_WIRES)
}

/// A random `ins → outs` flowchart.
pub fn flowchart_typed<R: Rng>(rng: &mut R, depth: usize, ins: usize, outs: usize) -> Diagram {
    let mut d = flowchart(rng, depth, ins);
    d = narrow(d, outs);
    while d.outs() < outs {
        let mut widen = Diagram::basic(Basic::Cond(flow_tests().choose(rng).unwrap().clone()));
        for _ in 0..d.outs() - 1 {
            widen = Diagram::par(Diagram::id(), widen).expect("par");
        }
        d = Diagram::seq(d, widen).expect("arity matched");
    }
    d
}

/// Every flowchart of nesting depth at most `depth` over the given basics
/// whose input and output wires together number at most `max_wires`.
/// Subdiagrams may carry up to `inner_wires`.
pub fn all_flowcharts(
    basics: &[Basic],
    depth: usize,
    max_wires: usize,
    inner_wires: usize,
) -> Vec<Diagram> {
    let fits = |d: &Diagram| {
        d.ins() >= 1 && d.outs() >= 1 && d.ins() + d.outs() <= inner_wires.max(max_wires)
    };
    let mut layers: Vec<Vec<Diagram>> = vec![basics
        .iter()
        .cloned()
        .map(Diagram::basic)
        .filter(|d| fits(d))
        .collect()];
    for _ in 0..depth {
        let below: Vec<Diagram> = layers.concat();
        let mut next = Vec::new();
        for a in &below {
            if let Ok(f) = Diagram::fb(a.clone()) {
                next.push(f);
            }
            for b in &below {
                if let Ok(s) = Diagram::seq(a.clone(), b.clone()) {
                    next.push(s);
                }
                if let Ok(p) = Diagram::par(a.clone(), b.clone()) {
                    next.push(p);
                }
            }
        }
        // keep only those of exactly the new depth; shallower ones are already listed
        let depth_now = layers.len();
        next.retain(|d| d.depth() == depth_now && fits(d));
        next.sort_by_key(|d| d.to_string());
        next.dedup();
        layers.push(next);
    }
    let mut all = layers.concat();
    all.retain(|d| d.ins() + d.outs() <= max_wires);
    all
}

/// A random store set; each store is a member with probability `density`.
pub fn store_set<R: Rng>(rng: &mut R, size: usize, density: f64) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(size);
    for i in 0..size {
        if rng.gen_bool(density) {
            s.insert(i);
        }
    }
    s
}

/// A random cost map: small naturals, `inf` with probability `inf_rate`.
pub fn cost_map<R: Rng>(rng: &mut R, size: usize, max: u64, inf_rate: f64) -> Vec<NatInf> {
    (0..size)
        .map(|_| {
            if rng.gen_bool(inf_rate) {
                NatInf::Inf
            } else {
                NatInf::Fin(rng.gen_range(0..=max))
            }
        })
        .collect()
}

fn small_rational<R: Rng>(rng: &mut R, positive: bool) -> BigRational {
    let num: i64 = if positive {
        rng.gen_range(1..=4)
    } else {
        rng.gen_range(-4..=4)
    };
    let den: i64 = rng.gen_range(1..=3);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A random series with small rational coefficients on a prefix of length `support`.
pub fn series<R: Rng>(rng: &mut R, trunc: usize, support: usize) -> Series {
    let coeffs = (0..support.min(trunc))
        .map(|_| small_rational(rng, false))
        .collect();
    Series::from_coeffs(coeffs, trunc)
}

/// A random series with a nonzero constant term.
pub fn invertible_series<R: Rng>(rng: &mut R, trunc: usize, support: usize) -> Series {
    let mut s = series(rng, trunc, support.max(1));
    s.set(0, small_rational(rng, true));
    s
}

pub fn ideal<R: Rng>(rng: &mut R, max_order: usize) -> Ideal {
    match rng.gen_range(0..4) {
        0 => Ideal::Zero,
        _ => Ideal::Order(rng.gen_range(0..=max_order)),
    }
}

pub fn wire_assertion<R: Rng>(rng: &mut R, trunc: usize, max_order: usize) -> WireAssertion {
    WireAssertion::new(series(rng, trunc, 4), ideal(rng, max_order))
}

fn stream_basic<R: Rng>(rng: &mut R, ins: usize) -> Diagram {
    let b = match ins {
        1 => match rng.gen_range(0..5) {
            0 => Basic::Id,
            1 => Basic::Copy,
            2 => Basic::Scal(small_rational(rng, true)),
            _ => Basic::Integrator,
        },
        _ => {
            if rng.gen_bool(0.6) {
                Basic::Sum
            } else {
                Basic::Twist
            }
        }
    };
    Diagram::basic(b)
}

fn stream_narrow(mut d: Diagram, max: usize) -> Diagram {
    while d.outs() > max {
        let mut tail = Diagram::basic(Basic::Sum);
        for _ in 0..d.outs() - 2 {
            tail = Diagram::par(Diagram::id(), tail).expect("par");
        }
        d = Diagram::seq(d, tail).expect("arity matched");
    }
    d
}

/// A random stream circuit with positive scalars. With `guard`, every
/// feedback loop passes through an integrator placed on the fed-back wire.
pub fn stream_circuit<R: Rng>(rng: &mut R, depth: usize, ins: usize, guard: bool) -> Diagram {
    let d = if depth == 0 || rng.gen_bool(0.2) {
        if ins <= 2 && (ins == 1 || rng.gen_bool(0.7)) {
            stream_basic(rng, ins)
        } else {
            let k = rng.gen_range(1..ins);
            Diagram::par(
                stream_circuit(rng, 0, k, guard),
                stream_circuit(rng, 0, ins - k, guard),
            )
            .expect("par")
        }
    } else {
        match rng.gen_range(0..10) {
            0..=4 => {
                let a = stream_circuit(rng, depth - 1, ins, guard);
                let b = stream_circuit(rng, depth - 1, a.outs(), guard);
                Diagram::seq(a, b).expect("arity matched")
            }
            5..=6 if ins >= 2 => {
                let k = rng.gen_range(1..ins);
                Diagram::par(
                    stream_circuit(rng, depth - 1, k, guard),
                    stream_circuit(rng, depth - 1, ins - k, guard),
                )
                .expect("par")
            }
            _ => {
                let mut body = stream_circuit(rng, depth - 1, ins + 1, guard);
                if body.outs() < 2 {
                    body = Diagram::seq(body, Diagram::basic(Basic::Copy)).expect("unary copy");
                }
                if guard || rng.gen_bool(0.5) {
                    let mut delay = Diagram::basic(Basic::Integrator);
                    for _ in 0..body.outs() - 1 {
                        delay = Diagram::par(Diagram::id(), delay).expect("par");
                    }
                    body = Diagram::seq(body, delay).expect("arity matched");
                }
                Diagram::fb(body).expect("fb arity")
            }
        }
    };
    stream_narrow(d, MAX_WIRES)
}
