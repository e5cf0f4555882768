//! Formal power series truncated to a fixed number of exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `f0 + f1·x + … + f(n-1)·x^(n-1)`, with everything from `x^n` on unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series {
    coeffs: Vec<BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Series {
    pub fn zero(trunc: usize) -> Self {
        Series {
            coeffs: vec![BigRational::zero(); trunc],
        }
    }

    pub fn constant(c: BigRational, trunc: usize) -> Self {
        let mut s = Series::zero(trunc);
        if trunc > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn one(trunc: usize) -> Self {
        Series::constant(BigRational::one(), trunc)
    }

    /// `x^k`.
    pub fn monomial(k: usize, trunc: usize) -> Self {
        let mut s = Series::zero(trunc);
        if k < trunc {
            s.coeffs[k] = BigRational::one();
        }
        s
    }

    /// Zero-pads or truncates to `trunc` coefficients.
    pub fn from_coeffs(mut coeffs: Vec<BigRational>, trunc: usize) -> Self {
        coeffs.resize(trunc, BigRational::zero());
        Series { coeffs }
    }

    pub fn from_ints(coeffs: &[i64], trunc: usize) -> Self {
        Series::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect(), trunc)
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn set(&mut self, k: usize, c: BigRational) {
        self.coeffs[k] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient; `None` when zero up to the truncation.
    pub fn ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &BigRational) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplication by `x`.
    pub fn shift(&self) -> Series {
        let mut coeffs = Vec::with_capacity(self.trunc());
        if self.trunc() > 0 {
            coeffs.push(BigRational::zero());
            coeffs.extend(self.coeffs[..self.trunc() - 1].iter().cloned());
        }
        Series { coeffs }
    }

    /// Multiplicative inverse, defined when the constant term is nonzero.
    pub fn inv(&self) -> Result<Series> {
        let n = self.trunc();
        let f0 = match self.coeffs.first() {
            Some(f0) if !f0.is_zero() => f0.clone(),
            _ => return Err(Error::NotInvertible),
        };
        let mut g: Vec<BigRational> = Vec::with_capacity(n);
        g.push(f0.recip());
        for k in 1..n {
            let acc = (1..=k).fold(BigRational::zero(), |acc, i| {
                acc + &self.coeffs[i] * &g[k - i]
            });
            g.push(-acc / &f0);
        }
        Ok(Series { coeffs: g })
    }

    fn check(&self, other: &Series) {
        assert_eq!(self.trunc(), other.trunc(), "series truncations differ");
    }
}

impl Add for &Series {
    type Output = Series;

    fn add(self, other: &Series) -> Series {
        self.check(other);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;

    fn sub(self, other: &Series) -> Series {
        self.check(other);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Series {
    type Output = Series;

    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;

    /// Cauchy product, truncated.
    fn mul(self, other: &Series) -> Series {
        self.check(other);
        let n = self.trunc();
        let mut coeffs = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Series { coeffs }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self
            .coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(1, |k| k + 1);
        let shown: Vec<String> = self.coeffs[..last.min(self.trunc())]
            .iter()
            .map(|c| c.to_string())
            .collect();
        write!(f, "(series {})", shown.join(" "))
    }
}
