//! Exact rational arithmetic helpers and a small dense polynomial type.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used throughout the expectation pipeline.
pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_u128(n: u128) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
            let b = BigInt::from_str(b.trim()).map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
            if b.is_zero() {
                return Err(Error::invalid(format!("zero denominator in {s:?}")));
            }
            Q::new(a, b)
        }
        None => Q::from_integer(
            BigInt::from_str(s).map_err(|_| Error::invalid(format!("bad rational {s:?}")))?,
        ),
    };
    Ok(parsed)
}

/// Renders as `"p/q"`, or `"p"` for integers.
pub fn q_to_string(q: &Q) -> String {
    q.to_string()
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn pow_q(base: &Q, exp: usize) -> Q {
    let mut out = Q::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn sign(p: usize) -> i64 {
    if p.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Dense polynomial with exact rational coefficients, lowest degree first.
/// Trailing zero coefficients are trimmed so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn new(coeffs: Vec<Q>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Poly::new(coeffs.into_iter().map(q_int).collect())
    }

    /// `c * T^d`
    pub fn monomial(c: Q, d: usize) -> Self {
        let mut coeffs = vec![Q::zero(); d + 1];
        coeffs[d] = c;
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.coeffs
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * t + c)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn shift_up(&self, by: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Q::zero(); by];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly::new(coeffs)
    }

    /// Divides by `T`; the constant term must be zero.
    pub fn shift_down(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if !self.coeffs[0].is_zero() {
            return None;
        }
        Some(Poly::new(self.coeffs[1..].to_vec()))
    }

    pub fn add(&self, other: &Poly) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn mul(&self, other: &Poly) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `p(a + b T)`
    pub fn compose_affine(&self, a: &Q, b: &Q) -> Self {
        let lin = Poly::new(vec![a.clone(), b.clone()]);
        let mut out = Poly::zero();
        for c in self.coeffs.iter().rev() {
            out = out.mul(&lin).add(&Poly::new(vec![c.clone()]));
        }
        out
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(q_to_string).collect()
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})T")?,
                _ => write!(f, "({c})T^{i}")?,
            }
        }
        Ok(())
    }
}
