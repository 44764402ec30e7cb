//! Exact arithmetic in towers F_p(x_1, ..., x_m): canonical-form rational
//! functions, divisor valuations, residue-field reduction, Artin–Schreier
//! solving, and decomposition over the subfield of p-th powers.

mod artin_schreier;
mod frobenius;
mod gcd;
mod poly;
mod ratfunc;
mod valuation;

pub use artin_schreier::solve_artin_schreier;
pub use frobenius::{rf_frobenius_decompose, rf_frobenius_recompose, rf_pth_root};
pub use gcd::poly_gcd;
pub use poly::{Mono, Poly};
pub use ratfunc::{rf_normalize, RatFunc};
pub use valuation::{rf_reduce, rf_valuation, Center, DivisorValuation};

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Largest supported coefficient modulus (primes and prime powers must stay
/// below this so products of two reduced coefficients fit in u64).
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct ContextData {
    p: u64,
    vars: Vec<String>,
}

/// The ambient field F_p(x_1, ..., x_m) with a fixed, ordered variable list.
///
/// The tower interpretation is k = F_p(x_1, ..., x_{m-1}) with the last
/// variable distinguished; valuations at infinity are supported only in that
/// variable. Contexts are immutable and cheap to clone (shared storage);
/// equality is by content, so independently constructed contexts with the same
/// prime and variables are interchangeable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldContext(Arc<ContextData>);

impl FieldContext {
    /// Creates a context for F_p(vars...). `p` must be prime and the variable
    /// names must be distinct, nonempty identifiers.
    pub fn new(p: u64, vars: &[&str]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= MAX_MODULUS {
            return Err(Error::ModulusRange(p));
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in vars {
            if !is_identifier(v) {
                return Err(Error::Invalid(format!("`{v}` is not a valid identifier")));
            }
            if !seen.insert(*v) {
                return Err(Error::Invalid(format!("duplicate variable `{v}`")));
            }
        }
        Ok(FieldContext(Arc::new(ContextData {
            p,
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn nvars(&self) -> usize {
        self.0.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.0.vars
    }

    pub fn var_name(&self, k: usize) -> &str {
        &self.0.vars[k]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.0.vars.iter().position(|v| v == name)
    }

    /// The residue-field context with variable `k` removed.
    pub fn without(&self, k: usize) -> FieldContext {
        let vars: Vec<&str> = self
            .0
            .vars
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, v)| v.as_str())
            .collect();
        FieldContext::new(self.0.p, &vars).expect("subcontext of a valid context")
    }

    /// A context with the same variables in a new order. `order[i]` is the
    /// index (in `self`) of the i-th variable of the new context.
    pub fn reordered(&self, order: &[usize]) -> Result<FieldContext> {
        if order.len() != self.nvars() {
            return Err(Error::LengthMismatch(order.len(), self.nvars()));
        }
        let mut seen = vec![false; self.nvars()];
        for &i in order {
            if i >= self.nvars() || seen[i] {
                return Err(Error::Invalid("invalid variable permutation".into()));
            }
            seen[i] = true;
        }
        let vars: Vec<&str> = order.iter().map(|&i| self.0.vars[i].as_str()).collect();
        FieldContext::new(self.0.p, &vars)
    }

    /// A context extended by fresh variables appended after the existing ones.
    pub fn extended(&self, extra: &[&str]) -> Result<FieldContext> {
        let mut vars: Vec<&str> = self.0.vars.iter().map(|s| s.as_str()).collect();
        vars.extend_from_slice(extra);
        FieldContext::new(self.0.p, &vars)
    }
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}({})", self.0.p, self.0.vars.join(","))
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}({})", self.0.p, self.0.vars.join(","))
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Modular scalar helpers. All inputs are assumed reduced (< m).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Scalar(pub u64);

impl Scalar {
    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.0
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.0 - b) % self.0
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.0
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub fn pow(self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.0;
        b %= self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit mod m (extended Euclid); panics if `a` is not a unit.
    pub fn inv(self, a: u64) -> u64 {
        let (g, x, _) = egcd(a as i128, self.0 as i128);
        assert_eq!(g, 1, "inverse of non-unit {a} mod {}", self.0);
        (x.rem_euclid(self.0 as i128)) as u64
    }
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}
