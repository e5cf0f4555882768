//! Matrices of series in the row-vector convention: `β = α·F`, so entry
//! `(i, j)` carries input wire `i` to output wire `j`.

use std::fmt;

use super::series::Series;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    trunc: usize,
    entries: Vec<Series>,
    /// Whether some path connects the two wires. Unsupported entries are exact
    /// zeros, not merely zero up to the truncation.
    support: Vec<bool>,
}

impl SeriesMatrix {
    pub fn zeros(rows: usize, cols: usize, trunc: usize) -> Self {
        SeriesMatrix {
            rows,
            cols,
            trunc,
            entries: vec![Series::zero(trunc); rows * cols],
            support: vec![false; rows * cols],
        }
    }

    pub fn identity(n: usize, trunc: usize) -> Self {
        let mut m = SeriesMatrix::zeros(n, n, trunc);
        for i in 0..n {
            m.set(i, i, Series::one(trunc));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn get(&self, i: usize, j: usize) -> &Series {
        &self.entries[i * self.cols + j]
    }

    pub fn supported(&self, i: usize, j: usize) -> bool {
        self.support[i * self.cols + j]
    }

    /// Stores a structurally present entry.
    pub fn set(&mut self, i: usize, j: usize, s: Series) {
        self.entries[i * self.cols + j] = s;
        self.support[i * self.cols + j] = true;
    }

    /// Composition: `self` then `other`.
    pub fn then(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        let mut out = SeriesMatrix::zeros(self.rows, other.cols, self.trunc);
        for i in 0..self.rows {
            for k in 0..other.cols {
                let mut acc: Option<Series> = None;
                for j in 0..self.cols {
                    if self.supported(i, j) && other.supported(j, k) {
                        let term = self.get(i, j) * other.get(j, k);
                        acc = Some(match acc {
                            None => term,
                            Some(a) => &a + &term,
                        });
                    }
                }
                if let Some(s) = acc {
                    out.set(i, k, s);
                }
            }
        }
        out
    }

    pub fn block_diag(&self, other: &SeriesMatrix) -> SeriesMatrix {
        let mut out =
            SeriesMatrix::zeros(self.rows + other.rows, self.cols + other.cols, self.trunc);
        for (m, (r0, c0)) in [(self, (0, 0)), (other, (self.rows, self.cols))] {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    if m.supported(i, j) {
                        out.set(r0 + i, c0 + j, m.get(i, j).clone());
                    }
                }
            }
        }
        out
    }

    /// `α·F`.
    pub fn apply(&self, alpha: &[Series]) -> Result<Vec<Series>> {
        if alpha.len() != self.rows {
            return Err(Error::Arity {
                what: "input streams".into(),
                expected: self.rows,
                found: alpha.len(),
            });
        }
        Ok((0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .filter(|&i| self.supported(i, j))
                    .fold(Series::zero(self.trunc), |acc, i| {
                        &acc + &(&alpha[i] * self.get(i, j))
                    })
            })
            .collect())
    }

    /// Splits `[[A, C], [B, d]]` around the last row and column.
    pub fn blocks(&self) -> FeedbackBlocks<'_> {
        assert!(self.rows > 0 && self.cols > 0, "no feedback wire");
        FeedbackBlocks { m: self }
    }

    /// The trace on the last wire: `A + C·(1 − d)⁻¹·B`, when `d` has no constant term.
    pub fn feedback(&self) -> Result<SeriesMatrix> {
        let b = self.blocks();
        let gain = b.loop_gain()?;
        let (m, n) = (self.rows - 1, self.cols - 1);
        let mut out = SeriesMatrix::zeros(m, n, self.trunc);
        for i in 0..m {
            let through = b.c_supported(i).then(|| b.c(i) * &gain);
            for j in 0..n {
                let direct = self.supported(i, j).then(|| self.get(i, j).clone());
                let looped = through
                    .as_ref()
                    .filter(|_| b.b_supported(j))
                    .map(|t| t * b.b(j));
                match (direct, looped) {
                    (Some(a), Some(l)) => out.set(i, j, &a + &l),
                    (Some(s), None) | (None, Some(s)) => out.set(i, j, s),
                    (None, None) => {}
                }
            }
        }
        Ok(out)
    }
}

/// Views of a square-bordered matrix: `A` (m×n), `C` (column into the
/// feedback output), `B` (row out of the feedback input) and `d`.
pub struct FeedbackBlocks<'a> {
    m: &'a SeriesMatrix,
}

impl FeedbackBlocks<'_> {
    fn last(&self) -> (usize, usize) {
        (self.m.rows - 1, self.m.cols - 1)
    }

    pub fn a(&self, i: usize, j: usize) -> &Series {
        self.m.get(i, j)
    }

    pub fn c(&self, i: usize) -> &Series {
        self.m.get(i, self.last().1)
    }

    pub fn c_supported(&self, i: usize) -> bool {
        self.m.supported(i, self.last().1)
    }

    pub fn b(&self, j: usize) -> &Series {
        self.m.get(self.last().0, j)
    }

    pub fn b_supported(&self, j: usize) -> bool {
        self.m.supported(self.last().0, j)
    }

    pub fn d(&self) -> &Series {
        let (r, c) = self.last();
        self.m.get(r, c)
    }

    /// `(1 − d)⁻¹`, or `InvalidCircuit` when `d` has a constant term.
    pub fn loop_gain(&self) -> Result<Series> {
        let d = self.d();
        if d.trunc() > 0 && !num_traits::Zero::is_zero(d.coeff(0)) {
            return Err(Error::InvalidCircuit(format!(
                "feedback loop without an integrator: self-gain has constant term {}",
                d.coeff(0)
            )));
        }
        (&Series::one(self.m.trunc) - d).inv()
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    if self.supported(i, j) {
                        self.get(i, j).to_string()
                    } else {
                        "0".to_string()
                    }
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::series::rat;

    const N: usize = 6;

    fn scalar(c: i64) -> SeriesMatrix {
        let mut m = SeriesMatrix::zeros(1, 1, N);
        m.set(0, 0, Series::constant(rat(c), N));
        m
    }

    #[test]
    fn composition_and_blocks() {
        let m = scalar(2).then(&scalar(3));
        assert_eq!(m.get(0, 0), &Series::constant(rat(6), N));
        let d = scalar(2).block_diag(&scalar(5));
        assert!(!d.supported(0, 1));
        let out = d.apply(&[Series::one(N), Series::one(N)]).unwrap();
        assert_eq!(out[1], Series::constant(rat(5), N));
        assert_eq!(SeriesMatrix::identity(2, N).then(&d), d);
    }

    #[test]
    fn feedback_elimination() {
        // β = α + σ, τ = α + x·σ  ⇒  σ = α/(1 − x), β = α(1 + 1/(1 − x))
        let mut f = SeriesMatrix::zeros(2, 2, N);
        f.set(0, 0, Series::one(N));
        f.set(0, 1, Series::one(N));
        f.set(1, 0, Series::one(N));
        f.set(1, 1, Series::monomial(1, N));
        let t = f.feedback().unwrap();
        let mut expected = Series::from_ints(&[1; N], N);
        expected.set(0, rat(2));
        assert_eq!(t.get(0, 0), &expected);
    }

    #[test]
    fn instantaneous_loop_is_invalid() {
        let mut f = SeriesMatrix::zeros(2, 2, N);
        f.set(1, 1, Series::one(N));
        assert!(matches!(f.feedback(), Err(Error::InvalidCircuit(_))));
    }

    #[test]
    fn structural_zeros_survive_feedback() {
        let mut f = SeriesMatrix::zeros(2, 2, N);
        f.set(0, 0, Series::one(N));
        f.set(1, 1, Series::monomial(1, N));
        let t = f.feedback().unwrap();
        assert!(t.supported(0, 0));
        let mut g = SeriesMatrix::zeros(2, 2, N);
        g.set(1, 1, Series::monomial(1, N));
        assert!(!g.feedback().unwrap().supported(0, 0));
    }
}
