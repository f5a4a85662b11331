//! Exact integer polynomials graded by degree in `t`.
//!
//! The Betti bookkeeping only ever produces tiny coefficients, but every
//! operation still goes through checked arithmetic so a caller passing a huge
//! degree cap gets a clean `Error::Numeric` instead of silent wraparound.

use std::fmt;

use crate::error::{Error, Result};

/// A polynomial with integer coefficients indexed by degree in `t`.
///
/// Normalized form carries no trailing zeros; the zero polynomial is the
/// empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPoly {
    coeffs: Vec<i64>,
}

impl GradedPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// The monomial `t^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = 1;
        Self { coeffs }
    }

    /// `1 + t + ... + t^degree`.
    pub fn all_ones(degree: usize) -> Self {
        Self {
            coeffs: vec![1; degree + 1],
        }
    }

    /// The truncated geometric series `1 + t^step + t^(2*step) + ...` with
    /// `terms` summands. Zero terms give the zero polynomial (empty sum).
    pub fn geometric(step: usize, terms: usize) -> Self {
        if terms == 0 {
            return Self::zero();
        }
        let mut coeffs = vec![0; step * (terms - 1) + 1];
        for j in 0..terms {
            coeffs[step * j] = 1;
        }
        Self { coeffs }
    }

    /// Builds a polynomial from raw coefficients, trimming trailing zeros.
    pub fn from_coeffs(coeffs: Vec<i64>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    /// Coefficients indexed by degree, without trailing zeros.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficient of `t^q` (zero beyond the degree).
    pub fn coeff(&self, q: usize) -> i64 {
        self.coeffs.get(q).copied().unwrap_or(0)
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients, i.e. the evaluation at `t = 1`.
    pub fn coefficient_sum(&self) -> Result<i64> {
        let mut sum: i64 = 0;
        for &c in &self.coeffs {
            sum = sum
                .checked_add(c)
                .ok_or_else(|| Error::Numeric("coefficient sum overflowed i64".into()))?;
        }
        Ok(sum)
    }

    /// Whether coefficient `q` equals coefficient `degree - q` for all `q`.
    /// The zero polynomial counts as palindromic.
    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|q| self.coeffs[q] == self.coeffs[n - 1 - q])
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![0i64; len];
        for (q, c) in coeffs.iter_mut().enumerate() {
            *c = self.coeff(q).checked_add(rhs.coeff(q)).ok_or_else(|| {
                Error::Numeric(format!("coefficient overflow adding t^{q} terms"))
            })?;
        }
        Ok(Self::from_coeffs(coeffs))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero());
        }
        let mut coeffs = vec![0i64; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                let term = a.checked_mul(b).ok_or_else(|| {
                    Error::Numeric(format!("coefficient overflow at t^{}", i + j))
                })?;
                coeffs[i + j] = coeffs[i + j].checked_add(term).ok_or_else(|| {
                    Error::Numeric(format!("coefficient overflow at t^{}", i + j))
                })?;
            }
        }
        Ok(Self::from_coeffs(coeffs))
    }

    /// Scales every coefficient by `factor`.
    pub fn scale(&self, factor: i64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (q, &c) in self.coeffs.iter().enumerate() {
            coeffs
                .push(c.checked_mul(factor).ok_or_else(|| {
                    Error::Numeric(format!("coefficient overflow scaling t^{q}"))
                })?);
        }
        Ok(Self::from_coeffs(coeffs))
    }

    /// Long division by a divisor with leading coefficient ±1, returning
    /// `(quotient, remainder)` with `deg(remainder) < deg(divisor)`.
    ///
    /// Restricting to unit leading coefficients keeps the division exact over
    /// the integers; that covers every divisor this crate uses (`1 + t`).
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let d = divisor
            .degree()
            .ok_or_else(|| Error::Domain("polynomial division by zero".into()))?;
        let lead = divisor.coeffs[d];
        if lead.abs() != 1 {
            return Err(Error::Domain(format!(
                "polynomial division requires a unit leading coefficient, got {lead}"
            )));
        }
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![0i64; rem.len() - d];
        for k in (0..quot.len()).rev() {
            let q = rem[k + d] * lead; // lead is ±1, so this is exact
            quot[k] = q;
            if q != 0 {
                for (j, &b) in divisor.coeffs.iter().enumerate() {
                    let term = q
                        .checked_mul(b)
                        .ok_or_else(|| Error::Numeric("overflow in polynomial division".into()))?;
                    rem[k + j] = rem[k + j]
                        .checked_sub(term)
                        .ok_or_else(|| Error::Numeric("overflow in polynomial division".into()))?;
                }
            }
        }
        rem.truncate(d);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (q, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0 { "-" } else { "+" })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            first = false;
            let mag = c.unsigned_abs();
            match (mag, q) {
                (_, 0) => write!(f, "{mag}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "t^{q}")?,
                (_, 1) => write!(f, "{mag}t")?,
                (_, _) => write!(f, "{mag}t^{q}")?,
            }
        }
        Ok(())
    }
}
