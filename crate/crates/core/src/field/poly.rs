//! Sparse multivariate polynomials with coefficients modulo a small integer.
//!
//! One representation serves two roles: coefficients mod the context prime p
//! (field-level work) and coefficients mod p^e inside Witt-vector arithmetic.
//! Monomials are exponent vectors in the declared variable order; the derived
//! `Vec` ordering is exactly the lexicographic monomial order the engine uses
//! everywhere, so the last `BTreeMap` key is the leading monomial.

use super::{FieldContext, Scalar};
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector; one entry per context variable.
pub type Mono = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    ctx: FieldContext,
    modulus: u64,
    terms: BTreeMap<Mono, u64>,
}

impl Poly {
    fn scalar(&self) -> Scalar {
        Scalar(self.modulus)
    }

    pub fn zero(ctx: &FieldContext, modulus: u64) -> Poly {
        Poly { ctx: ctx.clone(), modulus, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &FieldContext, modulus: u64, c: u64) -> Poly {
        let mut p = Poly::zero(ctx, modulus);
        let c = c % modulus;
        if c != 0 {
            p.terms.insert(vec![0; ctx.nvars()], c);
        }
        p
    }

    /// The constant c, interpreting negative integers mod the modulus.
    pub fn constant_i64(ctx: &FieldContext, modulus: u64, c: i64) -> Poly {
        Poly::constant(ctx, modulus, c.rem_euclid(modulus as i64) as u64)
    }

    pub fn one(ctx: &FieldContext, modulus: u64) -> Poly {
        Poly::constant(ctx, modulus, 1)
    }

    pub fn variable(ctx: &FieldContext, modulus: u64, k: usize) -> Poly {
        assert!(k < ctx.nvars(), "variable index out of range");
        let mut mono = vec![0u32; ctx.nvars()];
        mono[k] = 1;
        let mut p = Poly::zero(ctx, modulus);
        if modulus > 1 {
            p.terms.insert(mono, 1);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, u64)>>(
        ctx: &FieldContext,
        modulus: u64,
        it: I,
    ) -> Poly {
        let mut p = Poly::zero(ctx, modulus);
        for (m, c) in it {
            p.add_term(&m, c);
        }
        p
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(c) when the polynomial is the constant c (zero included).
    pub fn as_constant(&self) -> Option<u64> {
        match self.terms.len() {
            0 => Some(0),
            1 => {
                let (m, &c) = self.terms.iter().next().unwrap();
                if m.iter().all(|&e| e == 0) {
                    Some(c)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Coefficient of a monomial (0 when absent).
    pub fn coeff(&self, m: &Mono) -> u64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, m: &Mono, c: u64) {
        debug_assert_eq!(m.len(), self.ctx.nvars());
        let c = c % self.modulus;
        if c == 0 {
            return;
        }
        match self.terms.get_mut(m) {
            Some(existing) => {
                *existing = (*existing + c) % self.modulus;
                if *existing == 0 {
                    self.terms.remove(m);
                }
            }
            None => {
                self.terms.insert(m.clone(), c);
            }
        }
    }

    fn assert_compatible(&self, other: &Poly) {
        assert_eq!(self.ctx, other.ctx, "polynomial context mismatch");
        assert_eq!(self.modulus, other.modulus, "polynomial modulus mismatch");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let s = self.scalar();
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = s.neg(*c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Poly {
        let s = self.scalar();
        let c = c % self.modulus;
        if c == 0 {
            return Poly::zero(&self.ctx, self.modulus);
        }
        let mut out = Poly::zero(&self.ctx, self.modulus);
        for (m, &a) in &self.terms {
            let v = s.mul(a, c);
            if v != 0 {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    /// Multiplies by the single term c * x^m.
    pub fn mul_term(&self, m: &Mono, c: u64) -> Poly {
        let s = self.scalar();
        let c = c % self.modulus;
        if c == 0 {
            return Poly::zero(&self.ctx, self.modulus);
        }
        let mut out = Poly::zero(&self.ctx, self.modulus);
        for (em, &ec) in &self.terms {
            let mono: Mono = em.iter().zip(m.iter()).map(|(a, b)| a + b).collect();
            let v = s.mul(ec, c);
            if v != 0 {
                out.terms.insert(mono, v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.assert_compatible(other);
        let s = self.scalar();
        let mut acc: BTreeMap<Mono, u64> = BTreeMap::new();
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ma, &ca) in &small.terms {
            for (mb, &cb) in &large.terms {
                let mono: Mono = ma.iter().zip(mb.iter()).map(|(a, b)| a + b).collect();
                let c = s.mul(ca, cb);
                if c == 0 {
                    continue;
                }
                let e = acc.entry(mono).or_insert(0);
                *e = s.add(*e, c);
            }
        }
        acc.retain(|_, c| *c != 0);
        Poly { ctx: self.ctx.clone(), modulus: self.modulus, terms: acc }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.ctx, self.modulus);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Degree in variable k; None for the zero polynomial.
    pub fn degree_in(&self, k: usize) -> Option<u32> {
        self.terms.keys().map(|m| m[k]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Leading (largest lex) monomial and coefficient.
    pub fn leading(&self) -> Option<(&Mono, u64)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    /// Scales so the lex-leading coefficient is 1. Requires a prime modulus.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                if c == 1 {
                    self.clone()
                } else {
                    self.scale(self.scalar().inv(c))
                }
            }
        }
    }

    /// Partial derivative with respect to variable k.
    pub fn derivative(&self, k: usize) -> Poly {
        let s = self.scalar();
        let mut out = Poly::zero(&self.ctx, self.modulus);
        for (m, &c) in &self.terms {
            if m[k] == 0 {
                continue;
            }
            let factor = (m[k] as u64) % self.modulus;
            let v = s.mul(c, factor);
            if v == 0 {
                continue;
            }
            let mut mono = m.clone();
            mono[k] -= 1;
            out.add_term(&mono, v);
        }
        out
    }

    /// Substitutes the constant c for variable k (result stays in the same
    /// context, with degree 0 in k).
    pub fn subst_const(&self, k: usize, c: u64) -> Poly {
        let s = self.scalar();
        let mut out = Poly::zero(&self.ctx, self.modulus);
        for (m, &a) in &self.terms {
            let v = s.mul(a, s.pow(c, m[k] as u64));
            if v == 0 {
                continue;
            }
            let mut mono = m.clone();
            mono[k] = 0;
            out.add_term(&mono, v);
        }
        out
    }

    /// Reinterprets the polynomial in the context with variable k removed.
    /// Requires degree 0 in k.
    pub fn remove_var(&self, k: usize) -> Poly {
        assert_eq!(self.degree_in(k).unwrap_or(0), 0, "variable still present");
        let ctx = self.ctx.without(k);
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let mono: Mono = m
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, &e)| e)
                    .collect();
                (mono, c)
            })
            .collect();
        Poly { ctx, modulus: self.modulus, terms }
    }

    /// Embeds into `target`, sending variable i of `self` to variable
    /// `positions[i]` of the target context.
    pub fn embed(&self, target: &FieldContext, positions: &[usize]) -> Poly {
        assert_eq!(positions.len(), self.ctx.nvars());
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let mut mono = vec![0u32; target.nvars()];
                for (i, &e) in m.iter().enumerate() {
                    mono[positions[i]] = e;
                }
                (mono, c)
            })
            .collect();
        Poly { ctx: target.clone(), modulus: self.modulus, terms }
    }

    /// Componentwise-minimum exponent vector (the monomial content), or None
    /// for the zero polynomial.
    pub fn monomial_content(&self) -> Option<Mono> {
        let n = self.ctx.nvars();
        let mut min: Option<Mono> = None;
        for m in self.terms.keys() {
            match &mut min {
                None => min = Some(m.clone()),
                Some(cur) => {
                    for i in 0..n {
                        if m[i] < cur[i] {
                            cur[i] = m[i];
                        }
                    }
                }
            }
        }
        min
    }

    /// Divides by the monomial x^m. Panics if some term is not divisible.
    pub fn div_mono(&self, m: &Mono) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(em, &c)| {
                let mono: Mono = em
                    .iter()
                    .zip(m.iter())
                    .map(|(a, b)| a.checked_sub(*b).expect("monomial division failure"))
                    .collect();
                (mono, c)
            })
            .collect();
        Poly { ctx: self.ctx.clone(), modulus: self.modulus, terms }
    }

    /// Exact division: Some(q) with self = q * d when d divides self.
    /// Requires a prime modulus (leading-coefficient inverses).
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        self.assert_compatible(d);
        assert!(!d.is_zero(), "division by the zero polynomial");
        let s = self.scalar();
        if self.is_zero() {
            return Some(self.clone());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(s.inv(c)));
        }
        let (dm, dc) = d.leading().expect("nonzero");
        let dc_inv = s.inv(dc);
        let mut rem = self.clone();
        let mut q = Poly::zero(&self.ctx, self.modulus);
        while let Some((rm, rc)) = rem.leading() {
            let mono: Option<Mono> = rm
                .iter()
                .zip(dm.iter())
                .map(|(a, b)| a.checked_sub(*b))
                .collect();
            let mono = mono?;
            let c = s.mul(rc, dc_inv);
            q.add_term(&mono, c);
            rem = rem.sub(&d.mul_term(&mono, c));
        }
        Some(q)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.exact_div(self).is_some()
    }

    /// Evaluates at a point (one value per variable), mod the modulus.
    pub fn eval(&self, point: &[u64]) -> u64 {
        assert_eq!(point.len(), self.ctx.nvars());
        let s = self.scalar();
        let mut acc = 0u64;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = s.mul(t, s.pow(point[i], e as u64));
                }
            }
            acc = s.add(acc, t);
        }
        acc
    }

    /// Reinterprets coefficients modulo a new modulus (reducing them).
    pub fn with_modulus(&self, modulus: u64) -> Poly {
        let mut out = Poly::zero(&self.ctx, modulus);
        for (m, &c) in &self.terms {
            out.add_term(m, c % modulus);
        }
        out
    }

    /// The p-th root when every exponent is divisible by p, for prime modulus
    /// p (coefficients in F_p are Frobenius-fixed).
    pub fn pth_root(&self) -> Option<Poly> {
        let p = self.modulus as u32;
        let mut terms = BTreeMap::new();
        for (m, &c) in &self.terms {
            if m.iter().any(|&e| e % p != 0) {
                return None;
            }
            terms.insert(m.iter().map(|&e| e / p).collect::<Mono>(), c);
        }
        Some(Poly { ctx: self.ctx.clone(), modulus: self.modulus, terms })
    }

    /// Coefficients of powers of variable k: the polynomial viewed as a
    /// univariate in x_k. Entry d is the coefficient of x_k^d (degree 0 in k).
    pub fn coeffs_in(&self, k: usize) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let d = m[k];
            let mut mono = m.clone();
            mono[k] = 0;
            out.entry(d)
                .or_insert_with(|| Poly::zero(&self.ctx, self.modulus))
                .add_term(&mono, c);
        }
        out
    }

    /// Leading coefficient with respect to variable k (a polynomial of degree
    /// 0 in k). Zero polynomial maps to zero.
    pub fn lead_coeff_in(&self, k: usize) -> Poly {
        match self.degree_in(k) {
            None => self.clone(),
            Some(d) => {
                let mut out = Poly::zero(&self.ctx, self.modulus);
                for (m, &c) in &self.terms {
                    if m[k] == d {
                        let mut mono = m.clone();
                        mono[k] = 0;
                        out.add_term(&mono, c);
                    }
                }
                out
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Display from the leading term down.
        for (m, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_const = m.iter().all(|&e| e == 0);
            if c != 1 || is_const {
                write!(f, "{c}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first_var = true;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                write!(f, "{}", self.ctx.var_name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
