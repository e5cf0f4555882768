//! Operational semantics of flowcharts against the two flowchart instances.

use fixedbitset::FixedBitSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trace_hoare::fc::FcInstance;
use trace_hoare::flowchart::{execute, execute_chain, run, Outcome, RunOutcome, TaggedStore};
use trace_hoare::gen;
use trace_hoare::kernel::{check_sc3, Instance};
use trace_hoare::rt::RtInstance;
use trace_hoare::{Config, CostModel, Diagram, NatInf};

fn small() -> Config {
    Config::default().with_domain(0, 3)
}

fn diagram(seed: u64, depth: usize) -> (ChaCha8Rng, Diagram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ins = rng.gen_range(1..=2);
    let d = gen::flowchart(&mut rng, depth, ins);
    (rng, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let cfg = small();
        let (_, d) = diagram(seed, 4);
        for branch in 0..d.ins() {
            for store in cfg.store_space().stores() {
                let input = TaggedStore { branch, store };
                prop_assert_eq!(run(&cfg, &d, &input).unwrap(), run(&cfg, &d, &input).unwrap());
            }
        }
    }

    #[test]
    fn feedback_chains_replay(seed in any::<u64>()) {
        let cfg = small();
        let fc = FcInstance::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = gen::flowchart_typed(&mut rng, 3, 2, 2);
        for store in cfg.store_space().stores() {
            let (ex, passes) = execute_chain(fc.machine(), &body, 0, store.clone()).unwrap();
            let Outcome::Terminated { branch, state } = ex.outcome else { continue };
            // z0 enters on the outer wire, every later pass re-enters on the fed-back wire
            prop_assert_eq!(&passes[0].input, &(0, store));
            for w in passes.windows(2) {
                prop_assert_eq!(w[0].output.0, 1);
                prop_assert_eq!(&w[1].input, &(1, w[0].output.1.clone()));
            }
            let last = passes.last().unwrap();
            prop_assert_eq!(&last.output, &(branch, state));
            prop_assert_eq!(branch, 0);
            for pass in &passes {
                let replay = execute(fc.machine(), &body, pass.input.0, pass.input.1.clone()).unwrap();
                prop_assert_eq!(replay.outcome, Outcome::Terminated { branch: pass.output.0, state: pass.output.1.clone() });
            }
        }
    }

    #[test]
    fn steps_add_up_along_sequences(seed in any::<u64>()) {
        let cfg = small().with_cost(CostModel::table());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen::flowchart(&mut rng, 3, 1);
        let b = gen::flowchart(&mut rng, 3, a.outs());
        let ab = Diagram::seq(a.clone(), b.clone()).unwrap();
        for store in cfg.store_space().stores() {
            let input = TaggedStore { branch: 0, store };
            let first = run(&cfg, &a, &input).unwrap();
            let RunOutcome::Terminated(mid) = first.outcome else { continue };
            let second = run(&cfg, &b, &mid).unwrap();
            let whole = run(&cfg, &ab, &input).unwrap();
            prop_assert_eq!(&whole.outcome, &second.outcome);
            if let RunOutcome::Terminated(_) = second.outcome {
                prop_assert_eq!(whole.steps, first.steps + second.steps);
            }
        }
    }

    #[test]
    fn postconditions_are_images(seed in any::<u64>()) {
        let fc = FcInstance::new(&small());
        let size = fc.space().size();
        let (mut rng, d) = diagram(seed, 4);
        let p: Vec<FixedBitSet> = (0..d.ins()).map(|_| gen::store_set(&mut rng, size, 0.3)).collect();
        let q: Vec<FixedBitSet> = (0..d.outs()).map(|_| gen::store_set(&mut rng, size, 0.6)).collect();
        let spc = fc.transfer(&d, &p).unwrap();
        // holds ⇔ spc ⊆ q
        let contained = spc.iter().zip(&q).all(|(s, q)| s.is_subset(q));
        prop_assert_eq!(fc.holds(&d, &p, &q).unwrap(), contained);
        prop_assert!(fc.holds(&d, &p, &spc).unwrap());
        // the image of a union is the union of the images
        let p2: Vec<FixedBitSet> = (0..d.ins()).map(|_| gen::store_set(&mut rng, size, 0.3)).collect();
        let union: Vec<FixedBitSet> = p.iter().zip(&p2).map(|(a, b)| { let mut u = a.clone(); u.union_with(b); u }).collect();
        let joined: Vec<FixedBitSet> = spc.iter().zip(&fc.transfer(&d, &p2).unwrap()).map(|(a, b)| { let mut u = a.clone(); u.union_with(b); u }).collect();
        prop_assert_eq!(fc.transfer(&d, &union).unwrap(), joined);
    }

    #[test]
    fn feedback_law_is_exhaustive_on_tiny_domains(seed in any::<u64>()) {
        let fc = FcInstance::new(&Config::default().with_domain(0, 1));
        let size = fc.space().size();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = gen::flowchart_typed(&mut rng, 3, 2, 2);
        let p = vec![gen::store_set(&mut rng, size, 0.4)];
        let r = vec![gen::store_set(&mut rng, size, 0.6)];
        let check = check_sc3(&fc, &body, &p, &r, &[]).unwrap();
        prop_assert!(check.exhaustive);
        prop_assert!(check.agrees());
    }

    #[test]
    fn relative_running_time_composes(seed in any::<u64>()) {
        let cfg = small().with_cost(CostModel::table());
        let rt = RtInstance::new(&cfg);
        let size = rt.space().size();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen::flowchart(&mut rng, 3, 1);
        let b = gen::flowchart(&mut rng, 3, a.outs());
        let q: Vec<Vec<NatInf>> = (0..b.outs()).map(|_| gen::cost_map(&mut rng, size, 10, 0.1)).collect();
        let whole = rt.rrt(&Diagram::seq(a.clone(), b.clone()).unwrap(), &q).unwrap();
        let staged = rt.rrt(&a, &rt.rrt(&b, &q).unwrap()).unwrap();
        prop_assert_eq!(whole, staged);
    }

    #[test]
    fn finite_budgets_bound_runs(seed in any::<u64>()) {
        let cfg = small().with_cost(CostModel::table());
        let rt = RtInstance::new(&cfg);
        let size = rt.space().size();
        let (_, d) = diagram(seed, 4);
        let zero = vec![vec![NatInf::Fin(0); size]; d.outs()];
        let p = rt.rrt(&d, &zero).unwrap();
        prop_assert!(rt.holds(&d, &p, &zero).unwrap());
        for (branch, budget) in p.iter().enumerate() {
            for (i, store) in cfg.store_space().stores().enumerate() {
                let out = run(&cfg, &d, &TaggedStore { branch, store }).unwrap();
                match budget[i] {
                    NatInf::Fin(n) => {
                        prop_assert!(matches!(out.outcome, RunOutcome::Terminated(_)));
                        prop_assert!(out.steps <= n);
                    }
                    NatInf::Inf => prop_assert_eq!(out.outcome, RunOutcome::Diverges),
                }
            }
        }
    }
}
