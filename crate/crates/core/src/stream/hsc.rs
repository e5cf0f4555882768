//! Hoare logic for valid stream circuits: assertions are affine sets
//! `center + ideal` per wire, with ideals `x^m·R` or `{0}`.

use std::fmt;

use super::circuit::{semantics, solve_feedback};
use super::matrix::SeriesMatrix;
use super::series::Series;
use crate::config::Config;
use crate::diagram::{parse_rational, Alphabet, Diagram};
use crate::error::{Error, Result};
use crate::kernel::{concat, Direction, Instance};
use crate::sexpr::Sexpr;

/// An ideal of the power-series ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ideal {
    /// `{0}`: an exact estimate.
    Zero,
    /// `x^m·R`: the first `m` coefficients are pinned. `Order(0)` is the whole ring.
    Order(usize),
}

impl Ideal {
    pub const FULL: Ideal = Ideal::Order(0);

    /// Inclusion of ideals.
    pub fn leq(self, other: Ideal) -> bool {
        match (self, other) {
            (Ideal::Zero, _) => true,
            (Ideal::Order(_), Ideal::Zero) => false,
            (Ideal::Order(m), Ideal::Order(n)) => m >= n,
        }
    }

    /// The smallest ideal containing both.
    pub fn join(self, other: Ideal) -> Ideal {
        match (self, other) {
            (Ideal::Zero, i) | (i, Ideal::Zero) => i,
            (Ideal::Order(m), Ideal::Order(n)) => Ideal::Order(m.min(n)),
        }
    }

    pub fn contains(self, s: &Series) -> Result<bool> {
        match self {
            Ideal::Zero => Ok(s.is_zero()),
            Ideal::Order(n) => {
                if n > s.trunc() {
                    return Err(Error::ImprecisionOverflow {
                        order: n,
                        trunc: s.trunc(),
                    });
                }
                Ok(s.ord().is_none_or(|k| k >= n))
            }
        }
    }

    /// The image of this ideal under multiplication by a matrix entry. An
    /// entry that is zero up to the truncation counts as order `trunc`.
    pub fn through(self, entry: Option<&Series>) -> Ideal {
        match (self, entry) {
            (Ideal::Zero, _) | (_, None) => Ideal::Zero,
            (Ideal::Order(m), Some(f)) => {
                Ideal::Order((m + f.ord().unwrap_or(f.trunc())).min(f.trunc()))
            }
        }
    }

    /// Whether `self·f ⊆ target`, answering no when the truncation cannot tell.
    pub fn pushes_into(self, entry: Option<&Series>, target: Ideal, trunc: usize) -> Result<bool> {
        let (m, f) = match (self, entry) {
            (Ideal::Zero, _) | (_, None) => return Ok(true),
            (Ideal::Order(m), Some(f)) => (m, f),
        };
        match target {
            Ideal::Zero => Ok(false),
            Ideal::Order(n) if n > trunc => Err(Error::ImprecisionOverflow { order: n, trunc }),
            Ideal::Order(n) => Ok(m + f.ord().unwrap_or(trunc) >= n),
        }
    }

    pub fn from_sexpr(s: &Sexpr) -> Result<Ideal> {
        if let Some(a) = s.atom() {
            return match a {
                "zero" => Ok(Ideal::Zero),
                "full" => Ok(Ideal::FULL),
                _ => Err(s.err(format!("unknown ideal `{a}`"))),
            };
        }
        let (head, args) = s.head()?;
        match head {
            "order" => {
                s.expect_args(args, 1, head)?;
                let k = args[0]
                    .atom()
                    .and_then(|a| a.parse::<usize>().ok())
                    .ok_or_else(|| args[0].err("expected a natural number"))?;
                Ok(Ideal::Order(k))
            }
            "zero" => Ok(Ideal::Zero),
            "full" => Ok(Ideal::FULL),
            _ => Err(s.err(format!("unknown ideal `{head}`"))),
        }
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ideal::Zero => write!(f, "zero"),
            Ideal::Order(0) => write!(f, "full"),
            Ideal::Order(m) => write!(f, "(order {m})"),
        }
    }
}

/// `center + ideal` on one wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WireAssertion {
    pub center: Series,
    pub ideal: Ideal,
}

impl WireAssertion {
    pub fn new(center: Series, ideal: Ideal) -> Self {
        WireAssertion { center, ideal }
    }

    pub fn exact(center: Series) -> Self {
        WireAssertion::new(center, Ideal::Zero)
    }

    /// `σ + I ⊆ τ + J`.
    pub fn leq(&self, other: &WireAssertion) -> Result<bool> {
        Ok(self.ideal.leq(other.ideal) && other.ideal.contains(&(&self.center - &other.center))?)
    }

    /// Reads `(wire S I)` with `S` a series expression and `I` one of
    /// `zero`, `full`, `(order k)`.
    pub fn from_sexpr(s: &Sexpr, trunc: usize) -> Result<WireAssertion> {
        let (head, args) = s.head()?;
        if head != "wire" {
            return Err(s.err(format!("expected `(wire series ideal)`, found `{head}`")));
        }
        s.expect_args(args, 2, head)?;
        Ok(WireAssertion::new(
            series_from_sexpr(&args[0], trunc)?,
            Ideal::from_sexpr(&args[1])?,
        ))
    }
}

impl fmt::Display for WireAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(wire {} {})", self.center, self.ideal)
    }
}

/// Reads `(series c0 c1 ..)` zero-padded, and the combinators `(x k)`,
/// `(add S T)`, `(sub S T)`, `(mul S T)`, `(inv S)`.
pub fn series_from_sexpr(s: &Sexpr, trunc: usize) -> Result<Series> {
    let (head, args) = s.head()?;
    let sub = |i: usize| series_from_sexpr(&args[i], trunc);
    Ok(match head {
        "series" => {
            if args.len() > trunc {
                return Err(s.err(format!(
                    "{} coefficients exceed the truncation {trunc}",
                    args.len()
                )));
            }
            Series::from_coeffs(
                args.iter().map(parse_rational).collect::<Result<_>>()?,
                trunc,
            )
        }
        "x" => {
            s.expect_args(args, 1, head)?;
            let k = args[0]
                .atom()
                .and_then(|a| a.parse::<usize>().ok())
                .ok_or_else(|| args[0].err("expected a natural number"))?;
            Series::monomial(k, trunc)
        }
        "add" | "sub" | "mul" => {
            s.expect_args(args, 2, head)?;
            let (a, b) = (sub(0)?, sub(1)?);
            match head {
                "add" => &a + &b,
                "sub" => &a - &b,
                _ => &a * &b,
            }
        }
        "inv" => {
            s.expect_args(args, 1, head)?;
            sub(0)?
                .inv()
                .map_err(|_| s.err("series has no inverse: constant term is zero"))?
        }
        _ => return Err(s.err(format!("unknown series form `{head}`"))),
    })
}

/// The stream-circuit instance, for valid circuits.
#[derive(Debug, Clone)]
pub struct ScInstance {
    trunc: usize,
}

impl ScInstance {
    pub fn new(cfg: &Config) -> Self {
        ScInstance { trunc: cfg.trunc }
    }

    pub fn with_trunc(trunc: usize) -> Self {
        ScInstance { trunc }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    fn checked(
        &self,
        d: &Diagram,
        p: &[WireAssertion],
        q: &[WireAssertion],
    ) -> Result<SeriesMatrix> {
        for (what, a, n) in [("precondition", p, d.ins()), ("postcondition", q, d.outs())] {
            if a.len() != n {
                return Err(Error::Arity {
                    what: what.into(),
                    expected: n,
                    found: a.len(),
                });
            }
            if let Some(w) = a.iter().find(|w| w.center.trunc() != self.trunc) {
                return Err(Error::Arity {
                    what: "series coefficients".into(),
                    expected: self.trunc,
                    found: w.center.trunc(),
                });
            }
        }
        semantics(d, self.trunc)
    }

    /// The first output wire whose assertion is violated, with the reason.
    fn violation(
        &self,
        d: &Diagram,
        p: &[WireAssertion],
        q: &[WireAssertion],
    ) -> Result<Option<String>> {
        let f = self.checked(d, p, q)?;
        let centers: Vec<Series> = p.iter().map(|w| w.center.clone()).collect();
        let image = f.apply(&centers)?;
        for (j, (img, post)) in image.iter().zip(q).enumerate() {
            if !post.ideal.contains(&(img - &post.center))? {
                return Ok(Some(format!(
                    "output wire {j}: image of the centers {img} is outside {post}"
                )));
            }
            for (i, pre) in p.iter().enumerate() {
                let entry = f.supported(i, j).then(|| f.get(i, j));
                if !pre.ideal.pushes_into(entry, post.ideal, self.trunc)? {
                    return Ok(Some(format!(
                        "output wire {j}: imprecision {} of input wire {i} reaches it as {}, wider than {}",
                        pre.ideal,
                        pre.ideal.through(entry),
                        post.ideal
                    )));
                }
            }
        }
        Ok(None)
    }
}

impl Instance for ScInstance {
    type Wire = WireAssertion;

    fn name(&self) -> &'static str {
        "sc"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Stream
    }

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    /// Undecidable comparisons beyond the truncation count as not included.
    fn wire_leq(&self, p: &WireAssertion, q: &WireAssertion) -> bool {
        p.leq(q).unwrap_or(false)
    }

    fn holds(&self, d: &Diagram, p: &[WireAssertion], q: &[WireAssertion]) -> Result<bool> {
        Ok(self.violation(d, p, q)?.is_none())
    }

    /// The image of the centers, with the smallest coordinate ideals that
    /// contain the pushed-forward imprecision.
    fn transfer(&self, d: &Diagram, p: &[WireAssertion]) -> Result<Vec<WireAssertion>> {
        let f = semantics(d, self.trunc)?;
        let centers: Vec<Series> = p.iter().map(|w| w.center.clone()).collect();
        let image = f.apply(&centers)?;
        Ok(image
            .into_iter()
            .enumerate()
            .map(|(j, center)| {
                let ideal = p.iter().enumerate().fold(Ideal::Zero, |acc, (i, w)| {
                    acc.join(w.ideal.through(f.supported(i, j).then(|| f.get(i, j))))
                });
                WireAssertion::new(center, ideal)
            })
            .collect())
    }

    /// The exact fixed point as center, widened by the input imprecision that
    /// reaches the feedback wire.
    fn fb_invariant(
        &self,
        body: &Diagram,
        p: &[WireAssertion],
        r: &[WireAssertion],
    ) -> Result<WireAssertion> {
        let f = semantics(body, self.trunc)?;
        let centers: Vec<Series> = p.iter().map(|w| w.center.clone()).collect();
        let (_, sigma) = solve_feedback(&f, &centers)?;
        let blocks = f.blocks();
        let ideal = p.iter().enumerate().fold(Ideal::Zero, |acc, (i, w)| {
            acc.join(w.ideal.through(blocks.c_supported(i).then(|| blocks.c(i))))
        });
        let q = WireAssertion::new(sigma, ideal);
        let inv = std::slice::from_ref(&q);
        if self.holds(body, &concat(p, inv), &concat(r, inv))? {
            return Ok(q);
        }
        let whole = Diagram::fb(body.clone())?;
        let msg = match self.violation(&whole, p, r)? {
            Some(why) => format!("{} is false: {why}", whole),
            None => format!(
                "no coordinate invariant for {whole}: imprecision on the loop is not cancelled wire by wire"
            ),
        };
        Err(Error::TripleFalse(msg))
    }

    fn counterexample(
        &self,
        d: &Diagram,
        p: &[WireAssertion],
        q: &[WireAssertion],
    ) -> Result<Option<String>> {
        self.violation(d, p, q)
    }

    fn show_wire(&self, w: &WireAssertion) -> String {
        w.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{check_proof, synthesize_proof, ProofNode, Triple};
    use crate::sexpr::parse_one;
    use crate::stream::series::rat;

    const N: usize = 16;

    fn inst() -> ScInstance {
        ScInstance::with_trunc(N)
    }

    fn wire(src: &str) -> WireAssertion {
        WireAssertion::from_sexpr(&parse_one(src).unwrap(), N).unwrap()
    }

    fn d(src: &str) -> Diagram {
        Diagram::parse(src).unwrap()
    }

    fn geometric() -> Series {
        Series::from_ints(&[1; N], N)
    }

    #[test]
    fn ideal_order() {
        assert!(Ideal::Zero.leq(Ideal::Order(3)));
        assert!(Ideal::Order(5).leq(Ideal::Order(3)));
        assert!(!Ideal::Order(3).leq(Ideal::Order(5)));
        assert!(!Ideal::FULL.leq(Ideal::Zero));
        assert_eq!(Ideal::Order(2).join(Ideal::Order(4)), Ideal::Order(2));
        assert_eq!(
            Ideal::from_sexpr(&parse_one("full").unwrap()).unwrap(),
            Ideal::FULL
        );
        assert_eq!(Ideal::FULL.to_string(), "full");
        assert!(matches!(
            Ideal::Order(N + 1).contains(&Series::zero(N)),
            Err(Error::ImprecisionOverflow { .. })
        ));
    }

    #[test]
    fn wire_literals() {
        let w = wire("(wire (inv (series 1 -1)) (order 3))");
        assert_eq!(w.center, geometric());
        assert_eq!(wire(&w.to_string()), w);
        assert!(wire("(wire (series 1 2) (order 1))")
            .leq(&wire("(wire (series 1 5) full)"))
            .unwrap());
        assert!(!wire("(wire (series 1 2) (order 2))")
            .leq(&wire("(wire (series 1 5) (order 2))"))
            .unwrap());
    }

    #[test]
    fn precision_through_the_geometric_loop() {
        let p = [wire("(wire (series 1) (order 3))")];
        let q = [WireAssertion::new(geometric(), Ideal::Order(3))];
        assert!(inst().holds(&d("(fdback int)"), &p, &q).unwrap());
        let mut off = geometric();
        off.set(2, rat(7));
        assert!(!inst()
            .holds(
                &d("(fdback int)"),
                &p,
                &[WireAssertion::new(off.clone(), Ideal::Order(3))]
            )
            .unwrap());
        // beyond the pinned prefix nothing is claimed
        off.set(2, rat(1));
        off.set(5, rat(7));
        assert!(inst()
            .holds(
                &d("(fdback int)"),
                &p,
                &[WireAssertion::new(off, Ideal::Order(3))]
            )
            .unwrap());
    }

    #[test]
    fn exact_in_exact_out() {
        let c = d("(fdback (sum int (seq int int)))");
        let p = [WireAssertion::exact(Series::from_ints(&[2, 1], N))];
        let q = inst().transfer(&c, &p).unwrap();
        assert_eq!(q[0].ideal, Ideal::Zero);
        assert!(inst().holds(&c, &p, &q).unwrap());
    }

    #[test]
    fn integrator_gains_precision() {
        let p = [wire("(wire (series 1) (order 2))")];
        let q = inst().transfer(&d("int"), &p).unwrap();
        assert_eq!(q[0], wire("(wire (series 0 1) (order 3))"));
        assert!(!inst()
            .holds(&d("int"), &p, &[wire("(wire (series 0 1) (order 4))")])
            .unwrap());
        assert!(inst()
            .holds(&d("int"), &p, &[wire("(wire (series 0 1) zero)")])
            .is_ok());
        assert!(matches!(
            inst().holds(&d("int"), &p, &[wire("(wire (series 0 1) (order 40))")]),
            Err(Error::ImprecisionOverflow { order: 40, .. })
        ));
    }

    #[test]
    fn invariants() {
        let p = [wire("(wire (series 1) zero)")];
        let r = [WireAssertion::exact(geometric())];
        let body = d("(seq (par id int) (seq sum copy))");
        let q = inst().fb_invariant(&body, &p, &r).unwrap();
        assert_eq!(q, WireAssertion::exact(geometric()));
        let p = [wire("(wire (series 1) (order 4))")];
        let r = [WireAssertion::new(geometric(), Ideal::Order(4))];
        assert_eq!(
            inst().fb_invariant(&body, &p, &r).unwrap().ideal,
            Ideal::Order(4)
        );
        let bad = [WireAssertion::exact(Series::one(N))];
        assert!(matches!(
            inst().fb_invariant(&body, &p, &bad),
            Err(Error::TripleFalse(_))
        ));
    }

    #[test]
    fn feedback_rule_derivation() {
        // {s+t} f {t} ⊢ {s} Tr((+); f; c) {t}, with f the integrator
        let s = WireAssertion::exact(Series::one(N));
        let t = WireAssertion::exact(&Series::monomial(1, N) * &geometric());
        let st = WireAssertion::exact(&s.center + &t.center);
        let f = d("int");
        let plus_f = Diagram::seq(d("sum"), f.clone()).unwrap();
        let body = Diagram::seq(plus_f.clone(), d("copy")).unwrap();
        let loop_ = Diagram::fb(body.clone()).unwrap();
        let sum_step = ProofNode::ax(Triple::new(
            vec![s.clone(), t.clone()],
            d("sum"),
            vec![st.clone()],
        ));
        let f_step = ProofNode::ax(Triple::new(vec![st], f, vec![t.clone()]));
        let first = ProofNode::seq(
            Triple::new(vec![s.clone(), t.clone()], plus_f, vec![t.clone()]),
            sum_step,
            f_step,
        );
        let copy = ProofNode::ax(Triple::new(
            vec![t.clone()],
            d("copy"),
            vec![t.clone(), t.clone()],
        ));
        let whole = ProofNode::seq(
            Triple::new(vec![s.clone(), t.clone()], body, vec![t.clone(), t.clone()]),
            first,
            copy,
        );
        let proof = ProofNode::fb(Triple::new(vec![s], loop_, vec![t.clone()]), t, whole);
        check_proof(&inst(), &proof).unwrap();
    }

    #[test]
    fn synthesis() {
        let c = d("(fdback (sum int (seq int int)))");
        let p = vec![wire("(wire (series 1) (order 5))")];
        let q = vec![WireAssertion::new(
            Series::from_ints(&[1, 1, 2, 3, 5], N),
            Ideal::Order(5),
        )];
        let proof = synthesize_proof(&inst(), &Triple::new(p, c, q)).unwrap();
        check_proof(&inst(), &proof).unwrap();
    }

    #[test]
    fn invalid_circuit_is_an_error() {
        let p = [wire("(wire (series 1) zero)")];
        assert!(matches!(
            inst().holds(&d("(fb (seq sum copy))"), &p, &p),
            Err(Error::InvalidCircuit(_))
        ));
    }
}
