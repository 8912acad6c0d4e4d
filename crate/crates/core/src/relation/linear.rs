//! Dense affine expressions with arbitrary-precision coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// `Σ coeffs[i]·v_i + constant` over a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub(crate) coeffs: Vec<BigInt>,
    pub(crate) constant: BigInt,
}

impl LinExpr {
    pub fn zero(n: usize) -> Self {
        LinExpr {
            coeffs: vec![BigInt::zero(); n],
            constant: BigInt::zero(),
        }
    }

    pub fn constant(n: usize, c: impl Into<BigInt>) -> Self {
        let mut e = Self::zero(n);
        e.constant = c.into();
        e
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[i] = BigInt::one();
        e
    }

    pub fn from_parts(coeffs: Vec<BigInt>, constant: BigInt) -> Self {
        LinExpr { coeffs, constant }
    }

    pub fn from_i64(coeffs: &[i64], constant: i64) -> Self {
        LinExpr {
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            constant: BigInt::from(constant),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.constant
    }

    pub fn set_coeff(&mut self, i: usize, c: impl Into<BigInt>) {
        self.coeffs[i] = c.into();
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        debug_assert_eq!(self.n_vars(), other.n_vars());
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            constant: -&self.constant,
        }
    }

    pub fn scale(&self, k: &BigInt) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &BigInt) -> LinExpr {
        let mut e = self.clone();
        e.constant += k;
        e
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: &BigInt, other: &LinExpr, b: &BigInt) -> LinExpr {
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            constant: &self.constant * a + &other.constant * b,
        }
    }

    /// GCD of the variable coefficients (0 when constant).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Re-index into a space of `n` variables: variable `i` moves to `map[i]`.
    pub fn remap(&self, n: usize, map: &[usize]) -> LinExpr {
        let mut out = LinExpr::zero(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[map[i]] += c;
            }
        }
        out.constant = self.constant.clone();
        out
    }

    pub fn extend(&mut self, extra: usize) {
        self.coeffs
            .extend(std::iter::repeat_with(BigInt::zero).take(extra));
    }

    /// Replace variable `v` using `den·v = repl` (den > 0); the result is `den·self`
    /// with `v` eliminated.
    pub fn substitute_scaled(&self, v: usize, repl: &LinExpr, den: &BigInt) -> LinExpr {
        let c = &self.coeffs[v];
        if c.is_zero() {
            return if den.is_one() {
                self.clone()
            } else {
                self.scale(den)
            };
        }
        let mut out = self.combine(den, repl, c);
        out.coeffs[v] = BigInt::zero();
        out
    }

    /// Evaluate at an integer point.
    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        self.coeffs
            .iter()
            .zip(point)
            .fold(self.constant.clone(), |acc, (c, x)| acc + c * x)
    }

    /// Substitute fixed values for some variables, keeping the space size.
    pub fn fix(&self, var: usize, value: &BigInt) -> LinExpr {
        let mut out = self.clone();
        let c = std::mem::take(&mut out.coeffs[var]);
        out.constant += c * value;
        out
    }

    pub(crate) fn first_nonzero_sign(&self) -> i32 {
        for c in &self.coeffs {
            if c.is_positive() {
                return 1;
            }
            if c.is_negative() {
                return -1;
            }
        }
        0
    }
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

pub(crate) fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}
