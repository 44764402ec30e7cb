//! Exact rational functions over F_p in canonical reduced form.
//!
//! Canonical form: gcd(numerator, denominator) = 1 and the denominator is
//! monic under the lex order; zero is 0/1. Equality of values is equality of
//! canonical forms, so derived `PartialEq` decides equality in the field.

use super::gcd::poly_gcd;
use super::poly::Poly;
use super::FieldContext;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    /// Builds num/den in canonical form. The denominator must be nonzero.
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        assert_eq!(num.ctx(), den.ctx(), "context mismatch");
        assert_eq!(num.modulus(), den.modulus(), "modulus mismatch");
        assert_eq!(num.modulus(), num.ctx().p(), "rational functions live over F_p");
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc { den: Poly::one(num.ctx(), num.modulus()), num });
        }
        let g = poly_gcd(&num, &den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        let (_, lc) = den.leading().expect("nonzero denominator");
        if lc != 1 {
            let inv = super::Scalar(den.modulus()).inv(lc);
            num = num.scale(inv);
            den = den.scale(inv);
        }
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let one = Poly::one(p.ctx(), p.modulus());
        RatFunc { num: p, den: one }
    }

    pub fn zero(ctx: &FieldContext) -> RatFunc {
        RatFunc::from_poly(Poly::zero(ctx, ctx.p()))
    }

    pub fn one(ctx: &FieldContext) -> RatFunc {
        RatFunc::from_poly(Poly::one(ctx, ctx.p()))
    }

    pub fn constant(ctx: &FieldContext, c: u64) -> RatFunc {
        RatFunc::from_poly(Poly::constant(ctx, ctx.p(), c))
    }

    pub fn constant_i64(ctx: &FieldContext, c: i64) -> RatFunc {
        RatFunc::from_poly(Poly::constant_i64(ctx, ctx.p(), c))
    }

    pub fn var(ctx: &FieldContext, k: usize) -> RatFunc {
        RatFunc::from_poly(Poly::variable(ctx, ctx.p(), k))
    }

    /// The variable with the given name.
    pub fn var_named(ctx: &FieldContext, name: &str) -> Result<RatFunc> {
        ctx.var_index(name)
            .map(|k| RatFunc::var(ctx, k))
            .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))
    }

    pub fn ctx(&self) -> &FieldContext {
        self.num.ctx()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Some(c) when the value is the constant c.
    pub fn as_constant(&self) -> Option<u64> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = self.num.mul(&other.den);
        let den = self.den.mul(&other.num);
        RatFunc::new(num, den)
    }

    pub fn inv(&self) -> Result<RatFunc> {
        RatFunc::one(self.ctx()).div(self)
    }

    /// Integer power; negative exponents invert (error on zero base).
    pub fn pow(&self, e: i64) -> Result<RatFunc> {
        if e >= 0 {
            let e = u32::try_from(e).map_err(|_| Error::Invalid("exponent too large".into()))?;
            Ok(RatFunc::new(self.num.pow(e), self.den.pow(e)).expect("power of nonzero"))
        } else {
            if self.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let e = u32::try_from(-e).map_err(|_| Error::Invalid("exponent too large".into()))?;
            RatFunc::new(self.den.pow(e), self.num.pow(e))
        }
    }

    /// Scales by an integer (mod p).
    pub fn scale_i64(&self, c: i64) -> RatFunc {
        let c = c.rem_euclid(self.ctx().p() as i64) as u64;
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
        .normalized_zero()
    }

    fn normalized_zero(self) -> RatFunc {
        if self.num.is_zero() {
            RatFunc::zero(&self.ctx().clone())
        } else {
            self
        }
    }

    /// The p-th power (cheap: Frobenius on each polynomial).
    pub fn frobenius(&self) -> RatFunc {
        let p = self.ctx().p() as u32;
        RatFunc { num: self.num.pow(p), den: self.den.pow(p) }
    }

    /// Partial derivative with respect to variable k (quotient rule).
    pub fn derivative(&self, k: usize) -> RatFunc {
        let num = self
            .num
            .derivative(k)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(k)));
        let den = self.den.mul(&self.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    /// Applies a field map determined by images of the variables: variable i
    /// is sent to images[i] (a value in `target`). Errors when a denominator
    /// maps to zero.
    pub fn map_vars(&self, target: &FieldContext, images: &[RatFunc]) -> Result<RatFunc> {
        assert_eq!(images.len(), self.ctx().nvars(), "one image per variable");
        assert_eq!(target.p(), self.ctx().p(), "characteristic must match");
        let n = poly_map_vars(&self.num, target, images);
        let d = poly_map_vars(&self.den, target, images);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        n.div(&d)
    }

    /// Reinterprets in the context with variable k removed (requires the
    /// function not to involve x_k).
    pub fn remove_var(&self, k: usize) -> RatFunc {
        RatFunc { num: self.num.remove_var(k), den: self.den.remove_var(k) }
    }

    /// Embeds into `target`, sending variable i to variable positions[i].
    pub fn embed(&self, target: &FieldContext, positions: &[usize]) -> RatFunc {
        let num = self.num.embed(target, positions);
        let den = self.den.embed(target, positions);
        // Re-normalize: monic leading term may differ under the new order.
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    /// Embeds into a context that extends this one by extra trailing
    /// variables.
    pub fn extend_into(&self, target: &FieldContext) -> RatFunc {
        let positions: Vec<usize> = (0..self.ctx().nvars()).collect();
        self.embed(target, &positions)
    }
}

/// Evaluates a polynomial under a variable substitution, with memoized powers.
fn poly_map_vars(p: &Poly, target: &FieldContext, images: &[RatFunc]) -> RatFunc {
    let mut powers: Vec<Vec<RatFunc>> = images.iter().map(|f| vec![RatFunc::one(target), f.clone()]).collect();
    let power = |i: usize, e: u32, powers: &mut Vec<Vec<RatFunc>>| -> RatFunc {
        while powers[i].len() <= e as usize {
            let last = powers[i].last().unwrap().clone();
            powers[i].push(last.mul(&images[i]));
        }
        powers[i][e as usize].clone()
    };
    let mut acc = RatFunc::zero(target);
    for (m, c) in p.terms() {
        let mut term = RatFunc::constant(target, c);
        for (i, &e) in m.iter().enumerate() {
            if e > 0 {
                term = term.mul(&power(i, e, &mut powers));
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// Normalizes an already-built rational function; the public entry point used
/// by the expression evaluator. Construction canonicalizes, so this is a
/// checked identity wrapper kept for interface completeness.
pub fn rf_normalize(f: &RatFunc) -> RatFunc {
    f.clone()
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            let np = self.num.num_terms() > 1;
            let dp = self.den.num_terms() > 1;
            if np {
                write!(f, "({})", self.num)?;
            } else {
                write!(f, "{}", self.num)?;
            }
            write!(f, " / ")?;
            if dp {
                write!(f, "({})", self.den)
            } else {
                write!(f, "{}", self.den)
            }
        }
    }
}
