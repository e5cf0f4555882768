use std::path::PathBuf;

use trace_hoare::config::{Config, CostModel};
use trace_hoare::fc::FcInstance;
use trace_hoare::kernel::{check_proof, Rule};
use trace_hoare::rt::RtInstance;
use trace_hoare::script::{parse_proof, render_proof};
use trace_hoare::stream::ScInstance;
use trace_hoare::Diagram;

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn while_rule_for_partial_correctness() {
    let fc = FcInstance::new(&Config::default());
    let proof = parse_proof(&fc, &golden("fc-while.proof")).unwrap();
    check_proof(&fc, &proof).unwrap();
    assert_eq!(proof.count_rule("fb"), 1);
    let program = Diagram::parse(&golden("factorial.sx")).unwrap();
    assert_eq!(proof.conclusion.prog, program);
    assert_eq!(fc.members(&proof.conclusion.post[0]), vec![vec![6, 0]]);
}

#[test]
fn while_rule_for_running_time() {
    let rt = RtInstance::with_model(&Config::default(), CostModel::default());
    let proof = parse_proof(&rt, &golden("rt-while.proof")).unwrap();
    check_proof(&rt, &proof).unwrap();
    match &proof.premises[1].rule {
        Rule::Fb { invariant } => assert_eq!(invariant, &rt.cost("3*y + 1").unwrap()),
        other => panic!("expected the loop rule, found {other:?}"),
    }
    // with merges charged, the zero-cost merge step no longer holds
    let charged = RtInstance::with_model(&Config::default(), CostModel::table());
    let err = check_proof(
        &charged,
        &parse_proof(&charged, &golden("rt-while.proof")).unwrap(),
    )
    .unwrap_err();
    assert_eq!(err.location(), "root.1.0.0.0");
}

#[test]
fn feedback_rule_for_streams() {
    let sc = ScInstance::new(&Config::default());
    let proof = parse_proof(&sc, &golden("sc-feedback.proof")).unwrap();
    check_proof(&sc, &proof).unwrap();
    let text = render_proof(&sc, &proof);
    check_proof(&sc, &parse_proof(&sc, &text).unwrap()).unwrap();
}

#[test]
fn programs_parse() {
    for name in [
        "factorial.sx",
        "fib.sx",
        "geometric.sx",
        "instant-loop.sx",
        "chaotic-loop.sx",
        "dispose-all.sx",
    ] {
        let d = Diagram::parse(&golden(name)).unwrap();
        assert_eq!(d.arity(), (1, 1), "{name}");
    }
    for name in ["small.conf", "heap.conf"] {
        Config::parse(&golden(name)).unwrap().validate().unwrap();
    }
}
