//! Linear semantics of stream circuits and their validity.

use num_traits::Zero;
use petgraph::algo::is_cyclic_directed;
use petgraph::graph::{DiGraph, NodeIndex};

use super::matrix::SeriesMatrix;
use super::series::Series;
use crate::diagram::{Alphabet, Basic, Diagram, Node};
use crate::error::{Error, Result};

/// How a feedback loop is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// `A + C·(1 − d)⁻¹·B`.
    ClosedForm,
    /// Fixed-point iteration from zero, one input wire at a time.
    Iterative,
}

fn check_alphabet(d: &Diagram) -> Result<()> {
    if d.alphabet().within(Alphabet::Stream) {
        Ok(())
    } else {
        Err(Error::WrongAlphabet {
            expected: "stream",
            found: d.alphabet(),
        })
    }
}

pub fn basic_matrix(b: &Basic, trunc: usize) -> Result<SeriesMatrix> {
    let one = || Series::one(trunc);
    let (ins, outs) = b.arity();
    let mut m = SeriesMatrix::zeros(ins, outs, trunc);
    match b {
        Basic::Id | Basic::Copy | Basic::Sum => {
            for i in 0..ins {
                for j in 0..outs {
                    m.set(i, j, one());
                }
            }
        }
        Basic::Twist => {
            m.set(0, 1, one());
            m.set(1, 0, one());
        }
        Basic::Scal(c) => m.set(0, 0, Series::constant(c.clone(), trunc)),
        Basic::Integrator => m.set(0, 0, Series::monomial(1, trunc)),
        other => {
            return Err(Error::WrongAlphabet {
                expected: "stream",
                found: other.alphabet(),
            })
        }
    }
    Ok(m)
}

/// The transfer matrix of a circuit, or `InvalidCircuit` when some loop has
/// an instantaneous self-gain.
pub fn semantics(d: &Diagram, trunc: usize) -> Result<SeriesMatrix> {
    semantics_with(d, trunc, Solver::ClosedForm)
}

pub fn semantics_with(d: &Diagram, trunc: usize, solver: Solver) -> Result<SeriesMatrix> {
    check_alphabet(d)?;
    eval(d, trunc, solver)
}

fn eval(d: &Diagram, trunc: usize, solver: Solver) -> Result<SeriesMatrix> {
    match d.node() {
        Node::Basic(b) => basic_matrix(b, trunc),
        Node::Seq(a, b) => Ok(eval(a, trunc, solver)?.then(&eval(b, trunc, solver)?)),
        Node::Par(a, b) => Ok(eval(a, trunc, solver)?.block_diag(&eval(b, trunc, solver)?)),
        Node::Fb(body) => {
            let f = eval(body, trunc, solver)?;
            match solver {
                Solver::ClosedForm => f.feedback(),
                Solver::Iterative => feedback_by_iteration(&f),
            }
        }
    }
}

fn feedback_by_iteration(f: &SeriesMatrix) -> Result<SeriesMatrix> {
    let (m, n, trunc) = (f.rows() - 1, f.cols() - 1, f.trunc());
    let blocks = f.blocks();
    let mut out = SeriesMatrix::zeros(m, n, trunc);
    for i in 0..m {
        let mut alpha = vec![Series::zero(trunc); m];
        alpha[i] = Series::one(trunc);
        let (beta, _) = solve_feedback_iterative(f, &alpha)?;
        for (j, b) in beta.into_iter().enumerate() {
            if f.supported(i, j) || (blocks.c_supported(i) && blocks.b_supported(j)) {
                out.set(i, j, b);
            }
        }
    }
    Ok(out)
}

/// Closed-form solution of `(α, σ')·F = (β', σ')`.
pub fn solve_feedback(f: &SeriesMatrix, alpha: &[Series]) -> Result<(Vec<Series>, Series)> {
    let blocks = f.blocks();
    let gain = blocks.loop_gain()?;
    let sigma = &input_gain(f, alpha)? * &gain;
    Ok((outputs(f, alpha, &sigma), sigma))
}

/// Solves `(α, σ')·F = (β', σ')` by iterating `σ ← αC + σ·d` from zero and
/// reading coefficient `k` off iterate `k + 1`, where it has stabilized.
pub fn solve_feedback_iterative(
    f: &SeriesMatrix,
    alpha: &[Series],
) -> Result<(Vec<Series>, Series)> {
    let blocks = f.blocks();
    blocks.loop_gain()?;
    let trunc = f.trunc();
    let ac = input_gain(f, alpha)?;
    let d = blocks.d();
    let mut sigma = Series::zero(trunc);
    let mut fixed = Series::zero(trunc);
    for it in 1..=trunc + 1 {
        sigma = &ac + &(&sigma * d);
        if it <= trunc {
            fixed.set(it - 1, sigma.coeff(it - 1).clone());
        }
    }
    Ok((outputs(f, alpha, &fixed), fixed))
}

/// `αC`.
fn input_gain(f: &SeriesMatrix, alpha: &[Series]) -> Result<Series> {
    let m = f.rows() - 1;
    if alpha.len() != m {
        return Err(Error::Arity {
            what: "input streams".into(),
            expected: m,
            found: alpha.len(),
        });
    }
    let blocks = f.blocks();
    Ok((0..m)
        .filter(|&i| blocks.c_supported(i))
        .fold(Series::zero(f.trunc()), |acc, i| {
            &acc + &(&alpha[i] * blocks.c(i))
        }))
}

/// `αA + σB`.
fn outputs(f: &SeriesMatrix, alpha: &[Series], sigma: &Series) -> Vec<Series> {
    let mut full = alpha.to_vec();
    full.push(sigma.clone());
    let mut out = f.apply(&full).expect("shape checked");
    out.pop();
    out
}

/// Runs a circuit on input streams.
pub fn run(d: &Diagram, inputs: &[Series], trunc: usize) -> Result<Vec<Series>> {
    if let Some(s) = inputs.iter().find(|s| s.trunc() != trunc) {
        return Err(Error::Arity {
            what: "series coefficients".into(),
            expected: trunc,
            found: s.trunc(),
        });
    }
    semantics(d, trunc)?.apply(inputs)
}

/// Every closed path passes through an integrator: the port graph, with
/// integrators cut, is acyclic.
pub fn validity_syntactic(d: &Diagram) -> bool {
    let mut g = DiGraph::<(), ()>::new();
    ports(d, &mut g);
    !is_cyclic_directed(&g)
}

fn ports(d: &Diagram, g: &mut DiGraph<(), ()>) -> (Vec<NodeIndex>, Vec<NodeIndex>) {
    match d.node() {
        Node::Basic(b) => {
            let (n_in, n_out) = b.arity();
            let ins: Vec<NodeIndex> = (0..n_in).map(|_| g.add_node(())).collect();
            let outs: Vec<NodeIndex> = (0..n_out).map(|_| g.add_node(())).collect();
            match b {
                Basic::Integrator => {}
                Basic::Twist => {
                    g.add_edge(ins[0], outs[1], ());
                    g.add_edge(ins[1], outs[0], ());
                }
                _ => {
                    for &i in &ins {
                        for &o in &outs {
                            g.add_edge(i, o, ());
                        }
                    }
                }
            }
            (ins, outs)
        }
        Node::Seq(a, b) => {
            let (a_in, a_out) = ports(a, g);
            let (b_in, b_out) = ports(b, g);
            for (o, i) in a_out.into_iter().zip(b_in) {
                g.add_edge(o, i, ());
            }
            (a_in, b_out)
        }
        Node::Par(a, b) => {
            let (mut a_in, mut a_out) = ports(a, g);
            let (b_in, b_out) = ports(b, g);
            a_in.extend(b_in);
            a_out.extend(b_out);
            (a_in, a_out)
        }
        Node::Fb(body) => {
            let (mut ins, mut outs) = ports(body, g);
            let (i, o) = (ins.pop().expect("fb input"), outs.pop().expect("fb output"));
            g.add_edge(o, i, ());
            (ins, outs)
        }
    }
}

/// Every feedback self-gain has a zero constant term.
pub fn validity_semantic(d: &Diagram, trunc: usize) -> Result<bool> {
    match semantics(d, trunc) {
        Ok(_) => Ok(true),
        Err(Error::InvalidCircuit(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Whether `(α, σ)·F` returns `σ` on the feedback wire, up to the truncation.
pub fn is_fixed_point(f: &SeriesMatrix, alpha: &[Series], sigma: &Series) -> Result<bool> {
    let mut full = alpha.to_vec();
    full.push(sigma.clone());
    let out = f.apply(&full)?;
    Ok((out.last().expect("feedback wire") - sigma)
        .coeffs()
        .iter()
        .all(Zero::is_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::series::rat;

    const N: usize = 10;

    fn d(src: &str) -> Diagram {
        Diagram::parse(src).unwrap()
    }

    fn ones() -> Series {
        Series::from_ints(&[1; N], N)
    }

    #[test]
    fn integrator_feedback_is_geometric() {
        let m = semantics(&d("(fdback int)"), N).unwrap();
        assert_eq!(m.get(0, 0), &ones());
        assert_eq!(
            run(&d("(fdback int)"), &[Series::one(N)], N).unwrap(),
            vec![ones()]
        );
    }

    #[test]
    fn doubling() {
        let m = semantics(&d("(sum id id)"), N).unwrap();
        assert_eq!(m.get(0, 0), &Series::constant(rat(2), N));
    }

    #[test]
    fn fibonacci() {
        let fib = d("(fdback (sum int (seq int int)))");
        let out = run(&fib, &[Series::one(N)], N).unwrap();
        assert_eq!(
            out[0],
            Series::from_ints(&[1, 1, 2, 3, 5, 8, 13, 21, 34, 55], N)
        );
        assert_eq!(out[0], Series::from_ints(&[1, -1, -1], N).inv().unwrap());
    }

    #[test]
    fn pathological_circuits() {
        for src in [
            "(fb (seq sum copy))",
            "(fb (seq (par id copy) (par sum id)))",
        ] {
            let c = d(src);
            assert!(!validity_syntactic(&c), "{src}");
            assert!(!validity_semantic(&c, N).unwrap(), "{src}");
            assert!(matches!(semantics(&c, N), Err(Error::InvalidCircuit(_))));
        }
    }

    #[test]
    fn valid_circuits() {
        for src in [
            "(fdback int)",
            "(fdback (seq (scal 2) int))",
            "(fb (seq (par id int) (seq sum copy)))",
        ] {
            let c = d(src);
            assert!(validity_syntactic(&c), "{src}");
            assert!(validity_semantic(&c, N).unwrap(), "{src}");
        }
        // a loop through a zero gain is semantically harmless but syntactically rejected
        assert!(!validity_syntactic(&d("(fb (scal 0))")));
        assert!(validity_semantic(&d("(fb (scal 0))"), N).unwrap());
    }

    #[test]
    fn iteration_by_hand() {
        let body = semantics(&d("(seq (par id int) (seq sum copy))"), N).unwrap();
        let (beta, sigma) = solve_feedback_iterative(&body, &[Series::one(N)]).unwrap();
        assert_eq!(sigma, ones());
        assert_eq!(beta[0], ones());
        assert_eq!(
            solve_feedback(&body, &[Series::one(N)]).unwrap(),
            (beta, sigma.clone())
        );
        assert!(is_fixed_point(&body, &[Series::one(N)], &sigma).unwrap());
        let mut bumped = sigma.clone();
        bumped.set(4, rat(2));
        assert!(!is_fixed_point(&body, &[Series::one(N)], &bumped).unwrap());
    }

    #[test]
    fn no_loop_gain() {
        // d = 0: σ' = αC directly
        let body = semantics(&d("(par (scal 3) (scal 5))"), N).unwrap();
        let body = body.then(&semantics(&d("twist"), N).unwrap());
        let (beta, sigma) = solve_feedback_iterative(&body, &[Series::one(N)]).unwrap();
        assert_eq!(sigma, Series::constant(rat(3), N));
        assert_eq!(beta[0], Series::constant(rat(15), N));
    }

    #[test]
    fn solvers_agree_on_nested_loops() {
        let c = d("(fdback (seq (fdback (seq int (scal 1/2))) (sum int (seq int (scal 3)))))");
        assert_eq!(
            semantics_with(&c, N, Solver::ClosedForm).unwrap(),
            semantics_with(&c, N, Solver::Iterative).unwrap()
        );
    }

    #[test]
    fn rejects_other_alphabets() {
        assert!(matches!(
            semantics(&d("(assign x 1)"), N),
            Err(Error::WrongAlphabet { .. })
        ));
    }
}
