//! End-to-end acceptance checks, one line per criterion.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trace_hoare::config::{Config, CostModel};
use trace_hoare::cost::NatInf;
use trace_hoare::diagram::Basic;
use trace_hoare::error::Error;
use trace_hoare::fc::FcInstance;
use trace_hoare::flowchart::{execute, run, run_cost, Outcome, RunOutcome, TaggedStore};
use trace_hoare::gen;
use trace_hoare::kernel::{
    check_proof, check_sc1, check_sc2, check_sc3, check_triple, synthesize_proof, Instance,
    LawCheck, ProofNode, SynthesisError, Triple,
};
use trace_hoare::pointer::{PpInstance, SepFormula};
use trace_hoare::rt::{CostFn, RtInstance};
use trace_hoare::script::{parse_proof, render_proof};
use trace_hoare::stream::hsc::{Ideal, ScInstance, WireAssertion};
use trace_hoare::stream::series::{rat, Series};
use trace_hoare::stream::{semantics, validity_semantic, validity_syntactic, Solver};
use trace_hoare::Diagram;

type Outcome_ = Result<String, String>;

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn factorial() -> Diagram {
    Diagram::parse(&golden("factorial.sx")).expect("factorial parses")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs the program on every store with y = n and checks x = n!; then checks,
/// proves and re-verifies the triple through a rendered script.
fn factorial_correctness() -> Outcome_ {
    let cfg = Config::default().with_domain(0, 120);
    let fc = FcInstance::new(&cfg);
    let prog = factorial();
    let mut runs = 0;
    let mut fact = 1;
    for n in 0..=5i64 {
        if n > 0 {
            fact *= n;
        }
        for x in 0..=120 {
            let out = run(
                &cfg,
                &prog,
                &TaggedStore {
                    branch: 0,
                    store: vec![x, n],
                },
            )
            .map_err(err)?;
            let expected = TaggedStore {
                branch: 0,
                store: vec![fact, 0],
            };
            ensure(out.outcome == RunOutcome::Terminated(expected), || {
                format!("x={x} y={n}: {:?}", out.outcome)
            })?;
            runs += 1;
        }
        let t = Triple::new(
            vec![fc.formula(&format!("y = {n}")).map_err(err)?],
            prog.clone(),
            vec![fc.formula(&format!("x = {fact} & y = 0")).map_err(err)?],
        );
        ensure(check_triple(&fc, &t).map_err(err)?, || {
            format!("triple for n={n} is false")
        })?;
        let proof = synthesize_proof(&fc, &t).map_err(err)?;
        let reread = parse_proof(&fc, &render_proof(&fc, &proof)).map_err(err)?;
        check_proof(&fc, &reread).map_err(err)?;
        let wrong = Triple::new(
            t.pre.clone(),
            prog.clone(),
            vec![fc.formula(&format!("x = {}", fact + 1)).map_err(err)?],
        );
        ensure(!check_triple(&fc, &wrong).map_err(err)?, || {
            format!("wrong post accepted for n={n}")
        })?;
    }
    Ok(format!("{runs} runs, 6 triples proved and re-verified"))
}

/// `{3y+2} (x:=1); while {3y}` with merges free: exact on every store, 11 steps at y = 3.
fn factorial_running_time() -> Outcome_ {
    let cfg = Config::default();
    let model = CostModel::default();
    let rt = RtInstance::with_model(&cfg, model.clone());
    let prog = factorial();
    let (p, q) = (
        rt.cost("3*y + 2").map_err(err)?,
        rt.cost("3*y").map_err(err)?,
    );
    let t = Triple::new(vec![p.clone()], prog.clone(), vec![q.clone()]);
    ensure(check_triple(&rt, &t).map_err(err)?, || {
        "bound does not hold".into()
    })?;
    ensure(
        rt.holds_exact(&prog, std::slice::from_ref(&p), std::slice::from_ref(&q))
            .map_err(err)?,
        || "bound is not exact".into(),
    )?;
    for store in rt.space().stores() {
        let out = run_cost(
            &cfg,
            &prog,
            &TaggedStore {
                branch: 0,
                store: store.clone(),
            },
            &model,
        )
        .map_err(err)?;
        let RunOutcome::Terminated(end) = out.outcome else {
            return Err(format!("{store:?} diverges"));
        };
        let budget = NatInf::Fin(out.steps) + q[rt.space().index(&end.store)];
        ensure(budget == p[rt.space().index(&store)], || {
            format!("{store:?}: {} steps", out.steps)
        })?;
    }
    let at3 = run_cost(
        &cfg,
        &prog,
        &TaggedStore {
            branch: 0,
            store: vec![0, 3],
        },
        &model,
    )
    .map_err(err)?;
    ensure(at3.steps == 11, || format!("{} steps at y=3", at3.steps))?;
    Ok(format!(
        "exact on all {} stores; 11 steps at y=3",
        rt.space().size()
    ))
}

/// The derived while rule, as a proof tree for `{P} while b do A {P ∧ ¬b}`.
fn while_rule_tree(
    fc: &FcInstance,
    b: &str,
    body: &Diagram,
    p: &FixedBitSet,
    body_proof: ProofNode<FixedBitSet>,
) -> Result<ProofNode<FixedBitSet>, String> {
    let test = fc.formula(b).map_err(err)?;
    let mut pb = p.clone();
    pb.intersect_with(&test);
    let mut pnb = p.clone();
    pnb.difference_with(&test);
    let cond = Diagram::parse(&format!("(cond \"{b}\")")).map_err(err)?;
    let join = Diagram::basic(Basic::Join);
    let head = Diagram::seq(join.clone(), cond.clone()).map_err(err)?;
    let branches = Diagram::par(Diagram::id(), body.clone()).map_err(err)?;
    let loop_body = Diagram::seq(head.clone(), branches.clone()).map_err(err)?;
    let t = |pre: Vec<&FixedBitSet>, d: &Diagram, post: Vec<&FixedBitSet>| {
        Triple::new(
            pre.into_iter().cloned().collect(),
            d.clone(),
            post.into_iter().cloned().collect(),
        )
    };
    let head_proof = ProofNode::seq(
        t(vec![p, p], &head, vec![&pnb, &pb]),
        ProofNode::ax(t(vec![p, p], &join, vec![p])),
        ProofNode::ax(t(vec![p], &cond, vec![&pnb, &pb])),
    );
    let branch_proof = ProofNode::par(
        t(vec![&pnb, &pb], &branches, vec![&pnb, p]),
        ProofNode::ax(t(vec![&pnb], &Diagram::id(), vec![&pnb])),
        body_proof,
    );
    let premise = ProofNode::seq(
        t(vec![p, p], &loop_body, vec![&pnb, p]),
        head_proof,
        branch_proof,
    );
    let whole = Diagram::fb(loop_body).map_err(err)?;
    Ok(ProofNode::fb(
        t(vec![p], &whole, vec![&pnb]),
        p.clone(),
        premise,
    ))
}

/// The while-rule trees from the golden scripts, and the same tree shape for
/// every sampled invariant of the factorial loop.
fn while_rule_admissible() -> Outcome_ {
    let cfg = Config::default();
    let fc = FcInstance::new(&cfg);
    check_proof(
        &fc,
        &parse_proof(&fc, &golden("fc-while.proof")).map_err(err)?,
    )
    .map_err(err)?;
    let rt = RtInstance::with_model(&cfg, CostModel::default());
    check_proof(
        &rt,
        &parse_proof(&rt, &golden("rt-while.proof")).map_err(err)?,
    )
    .map_err(err)?;

    let body = Diagram::parse("(seq (assign x (* x y)) (assign y (- y 1)))").map_err(err)?;
    let test = fc.formula("y >= 1").map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut accepted = 0;
    for trial in 0..4000 {
        // invariants: random sets closed under the body, grown from a seed
        let mut p = gen::store_set(&mut rng, fc.space().size(), 0.05);
        if trial % 2 == 0 {
            loop {
                let mut pb = p.clone();
                pb.intersect_with(&test);
                let img = fc.transfer(&body, &[pb]).map_err(err)?.remove(0);
                if img.is_subset(&p) {
                    break;
                }
                p.union_with(&img);
            }
        }
        let mut pb = p.clone();
        pb.intersect_with(&test);
        let premise = Triple::new(vec![pb], body.clone(), vec![p.clone()]);
        if !check_triple(&fc, &premise).map_err(err)? {
            continue;
        }
        let body_proof = synthesize_proof(&fc, &premise).map_err(err)?;
        let tree = while_rule_tree(&fc, "y >= 1", &body, &p, body_proof)?;
        check_proof(&fc, &tree).map_err(|e| format!("invariant {}: {e}", fc.show_wire(&p)))?;
        ensure(
            tree.conclusion.prog
                == Diagram::parse(&format!("(while (>= y 1) {body})")).map_err(err)?,
            || "tree does not conclude about the while loop".into(),
        )?;
        accepted += 1;
    }
    ensure(accepted >= 1000, || {
        format!("only {accepted} invariants sampled")
    })?;
    Ok(format!(
        "golden trees accepted; {accepted} sampled invariants accepted"
    ))
}

#[derive(Default)]
struct LawTally {
    checked: usize,
    violations: usize,
    true_lhs: usize,
    first: Option<String>,
}

impl LawTally {
    fn record(&mut self, law: &str, what: impl Fn() -> String, c: LawCheck) {
        self.checked += 1;
        self.true_lhs += usize::from(c.lhs);
        if !c.agrees() {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(format!("{law} on {}: lhs {} rhs {}", what(), c.lhs, c.rhs));
            }
        }
    }
}

fn widen_sets<R: Rng>(rng: &mut R, sets: Vec<FixedBitSet>, size: usize) -> Vec<FixedBitSet> {
    sets.into_iter()
        .map(|mut s| {
            if rng.gen_bool(0.3) {
                s.union_with(&gen::store_set(rng, size, 0.2));
            }
            if rng.gen_bool(0.2) {
                s.difference_with(&gen::store_set(rng, size, 0.2));
            }
            s
        })
        .collect()
}

fn jitter_costs<R: Rng>(rng: &mut R, maps: Vec<CostFn>) -> Vec<CostFn> {
    maps.into_iter()
        .map(|m| {
            m.into_iter()
                .map(|c| match rng.gen_range(0..10) {
                    0 => c + 1,
                    1 => c.checked_sub(NatInf::Fin(1)).unwrap_or(c),
                    2 => NatInf::Inf,
                    _ => c,
                })
                .collect()
        })
        .collect()
}

/// SC1–SC3 on random diagrams for partial correctness and running time.
fn functor_laws() -> Outcome_ {
    let cfg = Config::default()
        .with_domain(0, 2)
        .with_cost(CostModel::table());
    let fc = FcInstance::new(&cfg);
    let rt = RtInstance::new(&cfg);
    let size = fc.space().size();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fc_tally = LawTally::default();
    let mut rt_tally = LawTally::default();
    let random_sets = |rng: &mut ChaCha8Rng, n: usize| {
        (0..n)
            .map(|_| gen::store_set(rng, size, 0.4))
            .collect::<Vec<_>>()
    };
    let random_costs = |rng: &mut ChaCha8Rng, n: usize| {
        (0..n)
            .map(|_| gen::cost_map(rng, size, 14, 0.15))
            .collect::<Vec<_>>()
    };
    for _ in 0..500 {
        let ins = rng.gen_range(1..=2);
        let a = gen::flowchart(&mut rng, 3, ins);
        let b = gen::flowchart(&mut rng, 3, a.outs());
        let ab = Diagram::seq(a.clone(), b.clone()).map_err(err)?;
        let c_ins = rng.gen_range(1..=2);
        let c = gen::flowchart(&mut rng, 2, c_ins);
        let par = Diagram::par(a.clone(), c.clone()).map_err(err)?;
        let body_outs = rng.gen_range(2..=3);
        let body = gen::flowchart_typed(&mut rng, 3, ins + 1, body_outs);
        let fb = Diagram::fb(body.clone()).map_err(err)?;

        // partial correctness: postconditions near the strongest ones
        for (d, law) in [(&ab, "SC1"), (&par, "SC2"), (&fb, "SC3")] {
            let p = random_sets(&mut rng, d.ins());
            let r = if rng.gen_bool(0.6) {
                let spc = fc.transfer(d, &p).map_err(err)?;
                widen_sets(&mut rng, spc, size)
            } else {
                random_sets(&mut rng, d.outs())
            };
            let check = match law {
                "SC1" => check_sc1(&fc, &a, &b, &p, &r, &[]),
                "SC2" => check_sc2(&fc, &a, &c, &p, &r),
                _ => check_sc3(&fc, &body, &p, &r, &[]),
            }
            .map_err(err)?;
            fc_tally.record(law, || d.to_string(), check);
        }
        // running time: preconditions near the relative running time
        for (d, law) in [(&ab, "SC1"), (&par, "SC2"), (&fb, "SC3")] {
            let r = random_costs(&mut rng, d.outs());
            let p = if rng.gen_bool(0.6) {
                let rrt = rt.rrt(d, &r).map_err(err)?;
                jitter_costs(&mut rng, rrt)
            } else {
                random_costs(&mut rng, d.ins())
            };
            let check = match law {
                "SC1" => check_sc1(&rt, &a, &b, &p, &r, &[]),
                "SC2" => check_sc2(&rt, &a, &c, &p, &r),
                _ => check_sc3(&rt, &body, &p, &r, &[]),
            }
            .map_err(err)?;
            rt_tally.record(law, || d.to_string(), check);
        }
    }
    let summary = format!(
        "fc {} checks ({} true) {} violations; rt {} checks ({} true) {} violations",
        fc_tally.checked,
        fc_tally.true_lhs,
        fc_tally.violations,
        rt_tally.checked,
        rt_tally.true_lhs,
        rt_tally.violations
    );
    if let Some(first) = fc_tally.first.or(rt_tally.first) {
        return Err(format!("{summary}; first: {first}"));
    }
    Ok(summary)
}

fn mask_set(mask: u64, size: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(size);
    for i in 0..size {
        if mask >> i & 1 == 1 {
            s.insert(i);
        }
    }
    s
}

/// Every triple over every small diagram: true ones are proved and the proofs
/// check, false ones are reported unprovable.
fn completeness() -> Outcome_ {
    let cfg = Config::default().with_domain(0, 1);
    let fc = FcInstance::new(&cfg);
    let size = fc.space().size();
    let assigns = gen::flow_assignments();
    let basics = vec![
        Basic::Id,
        Basic::Twist,
        Basic::Join,
        Basic::Cond(gen::flow_tests()[0].clone()),
        assigns[0].clone(),
        assigns[2].clone(),
    ];
    let diagrams = gen::all_flowcharts(&basics, 2, 3, 4);
    let (mut proved, mut refuted, mut discrepancies) = (0usize, 0usize, Vec::new());
    for d in &diagrams {
        // where each input store ends up
        let mut dest: Vec<Vec<Option<(usize, usize)>>> = Vec::new();
        for w in 0..d.ins() {
            let mut row = Vec::new();
            for (i, s) in fc.space().stores().enumerate() {
                debug_assert_eq!(fc.space().index(&s), i);
                row.push(match execute(fc.machine(), d, w, s).map_err(err)?.outcome {
                    Outcome::Terminated { branch, state } => {
                        Some((branch, fc.space().index(&state)))
                    }
                    _ => None,
                });
            }
            dest.push(row);
        }
        let per_wire = 1u64 << size;
        for q_code in 0..per_wire.pow(d.outs() as u32) {
            let q_masks: Vec<u64> = (0..d.outs())
                .map(|j| q_code / per_wire.pow(j as u32) % per_wire)
                .collect();
            let good: Vec<u64> = dest
                .iter()
                .map(|row| {
                    row.iter().enumerate().fold(0u64, |acc, (i, o)| match o {
                        Some((b, s)) if q_masks[*b] >> s & 1 == 0 => acc,
                        _ => acc | 1 << i,
                    })
                })
                .collect();
            let q: Vec<FixedBitSet> = q_masks.iter().map(|&m| mask_set(m, size)).collect();
            for p_code in 0..per_wire.pow(d.ins() as u32) {
                let p_masks: Vec<u64> = (0..d.ins())
                    .map(|i| p_code / per_wire.pow(i as u32) % per_wire)
                    .collect();
                let truth = p_masks.iter().zip(&good).all(|(p, g)| p & !g == 0);
                let p: Vec<FixedBitSet> = p_masks.iter().map(|&m| mask_set(m, size)).collect();
                let t = Triple::new(p, d.clone(), q.clone());
                match (truth, synthesize_proof(&fc, &t)) {
                    (true, Ok(proof)) => match check_proof(&fc, &proof) {
                        Ok(()) => proved += 1,
                        Err(e) => discrepancies.push(format!("{d}: proof rejected: {e}")),
                    },
                    (false, Err(SynthesisError::NotProvable)) => refuted += 1,
                    (truth, other) => discrepancies.push(format!(
                        "{d}: truth {truth}, synthesis {:?}",
                        other.map(|_| ())
                    )),
                }
            }
        }
    }
    let summary = format!(
        "{} diagrams, {proved} proved, {refuted} refuted",
        diagrams.len()
    );
    match discrepancies.first() {
        None => Ok(summary),
        Some(first) => Err(format!(
            "{summary}, {} discrepancies; first: {first}",
            discrepancies.len()
        )),
    }
}

/// Weakest preconditions of the heap basics: formulas against simulation.
fn separation_logic() -> Outcome_ {
    let cfg = Config::default().with_domain(0, 1).with_addrs(3);
    let pp = PpInstance::new(&cfg);
    let sx = |src: &str| {
        SepFormula::from_sexpr(&trace_hoare::sexpr::parse_one(src).expect("formula parses"))
    };
    let posts = [
        "(emp)",
        "(true)",
        "(pto 0 x)",
        "(pto-any y)",
        "(star (pto-any 0) (pto 1 y))",
        "(star (pto x 1) (true))",
        "(or (pure (= x y)) (star (pto 2 0) (true)))",
        "(exists v (star (pto 0 v) (pto 1 v)))",
        "(and (pure (= y 1)) (star (pto-any 1) (pto-any 2)))",
        "(wand (pto 2 1) (star (pto 2 1) (true)))",
    ]
    .map(|s| sx(s).expect("formula parses"));
    let terms = ["0", "1", "2", "x", "y", "(+ x 1)"];
    let mut basics = Vec::new();
    for t in terms {
        basics.push(format!("(lookup x {t})"));
        basics.push(format!("(lookup y {t})"));
        basics.push(format!("(dispose {t})"));
        for s in ["0", "1", "x", "y"] {
            basics.push(format!("(mutate {t} {s})"));
        }
    }
    let mut equalities = 0;
    for b in &basics {
        let d = Diagram::parse(b).map_err(err)?;
        let basic = d.as_basic().expect("basic").clone();
        for post in &posts {
            let q = pp.denote(post).map_err(err)?;
            let oracle = pp.wpc_oracle(&d, &[q]).map_err(err)?.remove(0);
            let sym = pp
                .denote(&pp.wpc_formula(&basic, post).map_err(err)?)
                .map_err(err)?;
            ensure(oracle.unmodeled.is_clear(), || {
                format!("{b} left the model")
            })?;
            ensure(sym == oracle.wpc, || {
                format!("{b} against {post}: formula and oracle differ")
            })?;
            equalities += 1;
        }
    }
    let mut inclusions = 0;
    for b in [
        "(new x (1))",
        "(new y (x))",
        "(new x (0 y))",
        "(new y (1 1 0))",
    ] {
        let d = Diagram::parse(b).map_err(err)?;
        let basic = d.as_basic().expect("basic").clone();
        for post in &posts {
            let q = pp.denote(post).map_err(err)?;
            let oracle = pp.wpc_oracle(&d, &[q]).map_err(err)?.remove(0);
            let mut sym = pp
                .denote(&pp.wpc_formula(&basic, post).map_err(err)?)
                .map_err(err)?;
            sym.difference_with(&oracle.unmodeled);
            ensure(sym.is_subset(&oracle.wpc), || {
                format!("{b} against {post}: formula admits a failing state")
            })?;
            inclusions += 1;
        }
    }
    Ok(format!(
        "{equalities} equalities over {} states, {inclusions} allocation inclusions",
        pp.space().size()
    ))
}

/// Feedback solutions: geometric and Fibonacci series, and the two solvers.
fn stream_solver() -> Outcome_ {
    const N: usize = 32;
    let one = [Series::one(N)];
    let geo = semantics(&Diagram::parse(&golden("geometric.sx")).map_err(err)?, N)
        .map_err(err)?
        .apply(&one)
        .map_err(err)?;
    ensure(geo[0] == Series::from_ints(&[1; N], N), || {
        format!("geometric gives {}", geo[0])
    })?;
    let fib = semantics(&Diagram::parse(&golden("fib.sx")).map_err(err)?, N)
        .map_err(err)?
        .apply(&one)
        .map_err(err)?;
    let mut expected = vec![1i64, 1];
    while expected.len() < N {
        expected.push(expected[expected.len() - 1] + expected[expected.len() - 2]);
    }
    ensure(fib[0] == Series::from_ints(&expected, N), || {
        format!("Fibonacci circuit gives {}", fib[0])
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    let mut loops = 0;
    while compared < 500 {
        let ins = rng.gen_range(1..=2);
        let d = gen::stream_circuit(&mut rng, 5, ins, true);
        let closed =
            trace_hoare::stream::circuit::semantics_with(&d, N, Solver::ClosedForm).map_err(err)?;
        let iterated =
            trace_hoare::stream::circuit::semantics_with(&d, N, Solver::Iterative).map_err(err)?;
        ensure(closed == iterated, || format!("solvers differ on {d}"))?;
        loops += d.to_string().matches("(fb").count();
        compared += 1;
    }
    Ok(format!(
        "geometric and Fibonacci exact to {N} terms; {compared} circuits ({loops} loops) agree"
    ))
}

/// The two pathological loops are rejected, and the two validity checks agree.
fn validity() -> Outcome_ {
    const N: usize = 32;
    for name in ["instant-loop.sx", "chaotic-loop.sx"] {
        let d = Diagram::parse(&golden(name)).map_err(err)?;
        ensure(!validity_syntactic(&d), || {
            format!("{name} passes the syntactic check")
        })?;
        ensure(!validity_semantic(&d, N).map_err(err)?, || {
            format!("{name} passes the semantic check")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut valid, mut invalid) = (0, 0);
    for _ in 0..1000 {
        let ins = rng.gen_range(1..=2);
        let d = gen::stream_circuit(&mut rng, 5, ins, false);
        let syn = validity_syntactic(&d);
        let sem = validity_semantic(&d, N).map_err(err)?;
        ensure(syn == sem, || {
            format!("{d}: syntactic {syn}, semantic {sem}")
        })?;
        if syn {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    ensure(valid > 100 && invalid > 100, || {
        format!("unbalanced sample: {valid} valid, {invalid} invalid")
    })?;
    Ok(format!(
        "both loops rejected; checks agree on {valid} valid and {invalid} invalid circuits"
    ))
}

/// `f · f⁻¹ = 1` for random invertible series, and `x` has no inverse.
fn series_ring() -> Outcome_ {
    const N: usize = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..200 {
        let f = gen::invertible_series(&mut rng, N, 1 + k % N);
        let g = f.inv().map_err(err)?;
        ensure(&f * &g == Series::one(N), || {
            format!("{f} times its inverse is not 1")
        })?;
    }
    ensure(
        matches!(Series::monomial(1, N).inv(), Err(Error::NotInvertible)),
        || "x was inverted".into(),
    )?;
    Ok("200 inverses exact; x rejected".into())
}

/// The feedback-rule derivation and the order-8 precision triple.
fn stream_hoare_logic() -> Outcome_ {
    let cfg = Config::default();
    let sc = ScInstance::new(&cfg);
    let n = sc.trunc();
    check_proof(
        &sc,
        &parse_proof(&sc, &golden("sc-feedback.proof")).map_err(err)?,
    )
    .map_err(err)?;
    let prog = Diagram::parse(&golden("geometric.sx")).map_err(err)?;
    let geometric = Series::from_ints(&[1, -1], n).inv().map_err(err)?;
    let p = vec![WireAssertion::new(Series::one(n), Ideal::Order(8))];
    let q = vec![WireAssertion::new(geometric.clone(), Ideal::Order(8))];
    ensure(sc.holds(&prog, &p, &q).map_err(err)?, || {
        "precision triple fails".into()
    })?;
    let mut corrupt = geometric;
    corrupt.set(5, rat(2));
    let bad = vec![WireAssertion::new(corrupt, Ideal::Order(8))];
    ensure(!sc.holds(&prog, &p, &bad).map_err(err)?, || {
        "corrupted post accepted".into()
    })?;
    let proof = synthesize_proof(&sc, &Triple::new(p, prog, q)).map_err(err)?;
    check_proof(&sc, &proof).map_err(err)?;
    Ok("derivation verifies; triple holds and is proved; corrupted post rejected".into())
}

type Criterion = (&'static str, fn() -> Outcome_, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "factorial correctness",
            factorial_correctness,
            Duration::from_secs(5),
        ),
        (
            "factorial running time",
            factorial_running_time,
            Duration::from_secs(5),
        ),
        (
            "while-rule admissibility",
            while_rule_admissible,
            Duration::from_secs(60),
        ),
        (
            "functor laws SC1-SC3",
            functor_laws,
            Duration::from_secs(60),
        ),
        (
            "completeness at desk scale",
            completeness,
            Duration::from_secs(300),
        ),
        (
            "separation logic preconditions",
            separation_logic,
            Duration::from_secs(120),
        ),
        (
            "stream feedback solver",
            stream_solver,
            Duration::from_secs(60),
        ),
        ("stream circuit validity", validity, Duration::from_secs(60)),
        ("series ring", series_ring, Duration::from_secs(10)),
        (
            "stream Hoare logic",
            stream_hoare_logic,
            Duration::from_secs(10),
        ),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (mark, detail) = match result {
            Ok(d) if took <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {took:.1?}, budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if mark == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {mark} {name}: {detail} [{took:.1?}]",
            k + 1
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
