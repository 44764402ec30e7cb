//! Truncated p-typical Witt vectors W_r over the rational function field.
//!
//! The ring laws are defined by the universal ghost-component identities
//! w_n(a) = sum_{i<=n} p^i a_i^{p^(n-i)}: addition satisfies
//! w_n(a+b) = w_n(a) + w_n(b), multiplication w_n(ab) = w_n(a) w_n(b), over
//! any lift of the components to characteristic zero.
//!
//! Two implementations live here and are cross-checked against each other:
//!
//! * `WittTables` builds the universal polynomials over exact integers by the
//!   ghost recursion S_n = (target_n - sum_{i<n} p^i S_i^{p^(n-i)}) / p^n and
//!   caches them per (p, r). Table sizes explode quickly, so construction is
//!   guarded by a term budget.
//! * The ring operations themselves (`witt_add`, `witt_mul`, ...) run the same
//!   ghost recursion per operation on lifts of the actual components into
//!   (Z/p^r)[x...] localized at denominators that stay nonzero mod p. This is
//!   sound because x = y (mod p^j) implies x^(p^k) = y^(p^k) (mod p^(j+k)),
//!   so every quantity the recursion divides by p^n is well-defined mod
//!   p^(n+1) knowing the components only mod p.

use crate::error::{Error, Result};
use crate::field::{FieldContext, Mono, Poly, RatFunc, MAX_MODULUS};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Longest supported Witt length.
pub const MAX_WITT_LEN: usize = 8;

/// Term budget for universal-polynomial construction; (p, r) pairs whose
/// tables would exceed it get a TermLimit error (the ring operations do not
/// use the tables, so they keep working).
const TABLE_TERM_BUDGET: usize = 500_000;

/// A Witt vector (a_1, ..., a_r) with components in F_p(x...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittVector {
    ctx: FieldContext,
    comps: Vec<RatFunc>,
}

impl WittVector {
    /// Builds a Witt vector from components; 1 <= r <= 8, all components in
    /// the same field.
    pub fn new(ctx: &FieldContext, comps: Vec<RatFunc>) -> Result<Self> {
        if comps.is_empty() || comps.len() > MAX_WITT_LEN {
            return Err(Error::WittLengthRange(comps.len(), MAX_WITT_LEN));
        }
        for c in &comps {
            if c.ctx() != ctx {
                return Err(Error::Invalid(
                    "witt component from a different field".into(),
                ));
            }
        }
        Ok(WittVector {
            ctx: ctx.clone(),
            comps,
        })
    }

    pub fn zero(ctx: &FieldContext, r: usize) -> Result<Self> {
        WittVector::new(ctx, vec![RatFunc::zero(ctx); r])
    }

    pub fn one(ctx: &FieldContext, r: usize) -> Result<Self> {
        let mut comps = vec![RatFunc::zero(ctx); r];
        comps[0] = RatFunc::one(ctx);
        WittVector::new(ctx, comps)
    }

    /// The Teichmüller-style vector (f, 0, ..., 0).
    pub fn from_function(f: &RatFunc, r: usize) -> Result<Self> {
        let mut comps = vec![RatFunc::zero(f.ctx()); r];
        comps[0] = f.clone();
        WittVector::new(f.ctx(), comps)
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    pub fn comps(&self) -> &[RatFunc] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &RatFunc {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    fn check_compatible(&self, other: &WittVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        if self.ctx != other.ctx {
            return Err(Error::Invalid("witt vectors over different fields".into()));
        }
        Ok(())
    }
}

impl fmt::Display for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

fn modulus_for(p: u64, r: usize) -> Result<u64> {
    p.checked_pow(r as u32)
        .filter(|m| *m <= MAX_MODULUS)
        .ok_or(Error::ModulusRange(p))
}

// ---------------------------------------------------------------------------
// Fast path: per-operation ghost recursion on (Z/p^r)[x...] fractions.
// ---------------------------------------------------------------------------

/// A fraction of polynomials with coefficients mod p^r whose denominator is
/// nonzero mod p (hence a non-zero-divisor). Never reduced to lowest terms;
/// all uses have bounded depth.
#[derive(Clone)]
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn lift(f: &RatFunc, m: u64) -> Frac {
        Frac {
            num: f.num().with_modulus(m),
            den: f.den().with_modulus(m),
        }
    }

    fn add(&self, other: &Frac) -> Frac {
        Frac {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn sub(&self, other: &Frac) -> Frac {
        Frac {
            num: self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn mul(&self, other: &Frac) -> Frac {
        Frac {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    fn neg(&self) -> Frac {
        Frac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn scale(&self, c: u64) -> Frac {
        Frac {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    fn pow(&self, e: u32) -> Frac {
        Frac {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// Extracts the Witt component: divides the numerator exactly by p^n and
    /// reduces the fraction mod p. The divisibility is guaranteed by the
    /// ghost-recursion integrality theorem; failure means an internal bug.
    fn extract_component(&self, ctx: &FieldContext, p: u64, n: usize) -> RatFunc {
        let pn = p.pow(n as u32);
        let mut num_p = Poly::zero(ctx, p);
        for (mono, c) in self.num.terms() {
            assert!(
                c % pn == 0,
                "ghost recursion produced a numerator not divisible by p^{n}"
            );
            num_p.add_term(mono, (c / pn) % p);
        }
        let mut den_p = Poly::zero(ctx, p);
        for (mono, c) in self.den.terms() {
            den_p.add_term(mono, c % p);
        }
        RatFunc::new(num_p, den_p).expect("denominator is nonzero mod p by construction")
    }
}

/// Ghost components g_0..g_{r-1} of the lifted vector, sharing power work
/// across levels: at level n, pows[i] holds A_i^{p^(n-i)}.
fn ghost_lifts(a: &WittVector, m: u64, p: u64) -> Vec<Frac> {
    let r = a.len();
    let mut pows: Vec<Frac> = Vec::with_capacity(r);
    let mut ghosts = Vec::with_capacity(r);
    for n in 0..r {
        for item in pows.iter_mut() {
            *item = item.pow(p as u32);
        }
        pows.push(Frac::lift(&a.comps[n], m));
        let mut g = pows[0].scale(1);
        for (i, item) in pows.iter().enumerate().skip(1) {
            g = g.add(&item.scale(p.pow(i as u32)));
        }
        ghosts.push(g);
    }
    ghosts
}

/// Solves the ghost recursion: finds components s_0..s_{r-1} (mod p) with
/// sum_{i<=n} p^i s_i^{p^(n-i)} = t_n for every n.
fn components_from_ghosts(ctx: &FieldContext, p: u64, m: u64, targets: &[Frac]) -> Vec<RatFunc> {
    let r = targets.len();
    let mut out: Vec<RatFunc> = Vec::with_capacity(r);
    let mut pows: Vec<Frac> = Vec::with_capacity(r);
    for n in 0..r {
        for item in pows.iter_mut() {
            *item = item.pow(p as u32);
        }
        let mut acc = targets[n].clone();
        for (i, item) in pows.iter().enumerate() {
            acc = acc.sub(&item.scale(p.pow(i as u32)));
        }
        let comp = acc.extract_component(ctx, p, n);
        pows.push(Frac::lift(&comp, m));
        out.push(comp);
    }
    out
}

/// Witt-vector addition (universal-polynomial group law).
pub fn witt_add(a: &WittVector, b: &WittVector) -> Result<WittVector> {
    a.check_compatible(b)?;
    let ctx = a.ctx();
    let (p, r) = (ctx.p(), a.len());
    let m = modulus_for(p, r)?;
    let ga = ghost_lifts(a, m, p);
    let gb = ghost_lifts(b, m, p);
    let targets: Vec<Frac> = ga.iter().zip(&gb).map(|(x, y)| x.add(y)).collect();
    WittVector::new(ctx, components_from_ghosts(ctx, p, m, &targets))
}

/// Witt-vector multiplication (universal-polynomial ring law).
pub fn witt_mul(a: &WittVector, b: &WittVector) -> Result<WittVector> {
    a.check_compatible(b)?;
    let ctx = a.ctx();
    let (p, r) = (ctx.p(), a.len());
    let m = modulus_for(p, r)?;
    let ga = ghost_lifts(a, m, p);
    let gb = ghost_lifts(b, m, p);
    let targets: Vec<Frac> = ga.iter().zip(&gb).map(|(x, y)| x.mul(y)).collect();
    WittVector::new(ctx, components_from_ghosts(ctx, p, m, &targets))
}

/// Additive inverse.
pub fn witt_neg(a: &WittVector) -> Result<WittVector> {
    let ctx = a.ctx();
    let (p, r) = (ctx.p(), a.len());
    let m = modulus_for(p, r)?;
    let ga = ghost_lifts(a, m, p);
    let targets: Vec<Frac> = ga.iter().map(|x| x.neg()).collect();
    WittVector::new(ctx, components_from_ghosts(ctx, p, m, &targets))
}

pub fn witt_sub(a: &WittVector, b: &WittVector) -> Result<WittVector> {
    witt_add(a, &witt_neg(b)?)
}

/// Frobenius: componentwise p-th power (the Witt Frobenius restricted to
/// F_p-algebras).
pub fn witt_frobenius(a: &WittVector) -> WittVector {
    WittVector {
        ctx: a.ctx.clone(),
        comps: a.comps.iter().map(|c| c.frobenius()).collect(),
    }
}

/// Verschiebung: prepends a zero slot, lengthening the vector by one.
/// Callers wanting to stay in W_r compose with `witt_truncate_pi`.
pub fn witt_verschiebung(a: &WittVector) -> Result<WittVector> {
    let mut comps = Vec::with_capacity(a.len() + 1);
    comps.push(RatFunc::zero(a.ctx()));
    comps.extend(a.comps.iter().cloned());
    WittVector::new(a.ctx(), comps)
}

/// Multiplication by p: p(a_1, ..., a_r) = (0, a_1^p, ..., a_{r-1}^p).
pub fn witt_pmul(a: &WittVector) -> WittVector {
    let mut comps = Vec::with_capacity(a.len());
    comps.push(RatFunc::zero(a.ctx()));
    for c in &a.comps[..a.len() - 1] {
        comps.push(c.frobenius());
    }
    WittVector {
        ctx: a.ctx.clone(),
        comps,
    }
}

/// Integer scalar multiple n·a, using that W_r has exponent p^r.
pub fn witt_scalar_mul(k: i64, a: &WittVector) -> Result<WittVector> {
    let ctx = a.ctx();
    let m = modulus_for(ctx.p(), a.len())? as i64;
    let mut k = k.rem_euclid(m) as u64;
    let mut acc = WittVector::zero(ctx, a.len())?;
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = witt_add(&acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = witt_add(&base, &base)?;
        }
    }
    Ok(acc)
}

/// Embeds a length-s vector into length r >= s as (0, ..., 0, a_1, ..., a_s);
/// additively this is the (r-s)-fold Verschiebung (the identity when r = s).
pub fn witt_shift_iota(a: &WittVector, r: usize) -> Result<WittVector> {
    let s = a.len();
    if s > r || r > MAX_WITT_LEN {
        return Err(Error::IndexOutOfRange { index: r, len: s });
    }
    let mut comps = vec![RatFunc::zero(a.ctx()); r - s];
    comps.extend(a.comps.iter().cloned());
    WittVector::new(a.ctx(), comps)
}

/// Keeps the first r−s slots (truncation onto W_{r−s}); pre: 1 <= s < r.
pub fn witt_truncate_pi(a: &WittVector, s: usize) -> Result<WittVector> {
    let r = a.len();
    if s == 0 || s >= r {
        return Err(Error::IndexOutOfRange { index: s, len: r });
    }
    WittVector::new(a.ctx(), a.comps[..r - s].to_vec())
}

// ---------------------------------------------------------------------------
// Universal polynomials over Z (verification path).
// ---------------------------------------------------------------------------

/// Multivariate polynomial with exact integer coefficients; only the handful
/// of operations the ghost recursion needs.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ZPoly {
    terms: BTreeMap<Mono, BigInt>,
    nvars: usize,
}

impl ZPoly {
    fn zero(nvars: usize) -> ZPoly {
        ZPoly {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    fn var(nvars: usize, k: usize) -> ZPoly {
        let mut mono = vec![0u32; nvars];
        mono[k] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(mono, BigInt::one());
        ZPoly { terms, nvars }
    }

    fn add_term(&mut self, mono: &Mono, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(mono);
        }
    }

    fn add(&self, other: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m, c.clone());
        }
        out
    }

    fn sub(&self, other: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m, -c.clone());
        }
        out
    }

    fn neg(&self) -> ZPoly {
        ZPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            nvars: self.nvars,
        }
    }

    fn scale(&self, c: &BigInt) -> ZPoly {
        if c.is_zero() {
            return ZPoly::zero(self.nvars);
        }
        ZPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
            nvars: self.nvars,
        }
    }

    fn mul(&self, other: &ZPoly, budget: usize) -> Result<ZPoly> {
        let mut out = ZPoly::zero(self.nvars);
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let mono: Mono = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(&mono, ca * cb);
            }
            if out.terms.len() > budget {
                return Err(Error::TermLimit(out.terms.len()));
            }
        }
        Ok(out)
    }

    fn pow(&self, mut e: u32, budget: usize) -> Result<ZPoly> {
        let mut acc: Option<ZPoly> = None;
        let mut base = self.clone();
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base, budget)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base, budget)?;
        }
        Ok(acc.unwrap_or_else(|| {
            let mut one = ZPoly::zero(self.nvars);
            one.add_term(&vec![0; self.nvars], BigInt::one());
            one
        }))
    }

    /// Exact division by a positive integer; panics on non-divisibility
    /// (the ghost recursion guarantees integrality).
    fn div_exact(&self, d: &BigInt) -> ZPoly {
        ZPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let (q, rem) = num_integer::Integer::div_rem(c, d);
                    assert!(rem.is_zero(), "universal polynomial division not exact");
                    (m.clone(), q)
                })
                .collect(),
            nvars: self.nvars,
        }
    }

    fn eval_bigint(&self, args: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (k, &e) in m.iter().enumerate() {
                if e > 0 {
                    term *= args[k].pow(e);
                }
            }
            acc += term;
        }
        acc
    }

    /// Evaluates mod p at rational-function arguments.
    fn eval_ratfunc(&self, ctx: &FieldContext, args: &[RatFunc]) -> RatFunc {
        let p = BigInt::from(ctx.p());
        let mut acc = RatFunc::zero(ctx);
        for (m, c) in &self.terms {
            let c_mod = ((c % &p) + &p) % &p;
            let c_u64 = u64::try_from(&c_mod).expect("residue fits u64");
            if c_u64 == 0 {
                continue;
            }
            let mut term = RatFunc::constant(ctx, c_u64);
            for (k, &e) in m.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&args[k].pow(e as i64).expect("nonnegative power"));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}

/// Ghost polynomial w_n = sum_{i<=n} p^i V_i^{p^(n-i)} in the variables
/// selected by `vars` (indices into an nvars-variable polynomial ring).
fn ghost_poly(nvars: usize, vars: &[usize], p: u64, n: usize, budget: usize) -> Result<ZPoly> {
    let mut acc = ZPoly::zero(nvars);
    for i in 0..=n {
        let pow = ZPoly::var(nvars, vars[i]).pow(p.pow((n - i) as u32) as u32, budget)?;
        acc = acc.add(&pow.scale(&BigInt::from(p).pow(i as u32)));
    }
    Ok(acc)
}

/// Runs the ghost recursion over Z: returns polys S_0..S_{r-1} with
/// sum_{i<=n} p^i S_i^{p^(n-i)} = target_n.
fn ghost_recursion(p: u64, r: usize, targets: &[ZPoly], budget: usize) -> Result<Vec<ZPoly>> {
    let mut out: Vec<ZPoly> = Vec::with_capacity(r);
    let mut pows: Vec<ZPoly> = Vec::with_capacity(r);
    for n in 0..r {
        for item in pows.iter_mut() {
            *item = item.pow(p as u32, budget)?;
        }
        let mut acc = targets[n].clone();
        for (i, item) in pows.iter().enumerate() {
            acc = acc.sub(&item.scale(&BigInt::from(p).pow(i as u32)));
        }
        let s = acc.div_exact(&BigInt::from(p).pow(n as u32));
        pows.push(s.clone());
        out.push(s);
    }
    Ok(out)
}

/// Cached universal sum/negation/product polynomials over Z for one (p, r).
///
/// Sum and product polynomials live in 2r variables (first the r slots of the
/// left operand, then the right); negation polynomials in r variables.
#[derive(Debug)]
pub struct WittTables {
    p: u64,
    r: usize,
    sum: Vec<ZPoly>,
    neg: Vec<ZPoly>,
    prod: Vec<ZPoly>,
}

static TABLE_CACHE: Lazy<Mutex<HashMap<(u64, usize), Arc<WittTables>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Serialize, Deserialize)]
struct TableFile {
    schema: u32,
    p: u64,
    r: usize,
    sum: Vec<Vec<(Mono, String)>>,
    neg: Vec<Vec<(Mono, String)>>,
    prod: Vec<Vec<(Mono, String)>>,
}

impl WittTables {
    /// Returns the cached tables for (p, r), building them if needed.
    /// Construction cost explodes with p and r; pairs over the term budget
    /// get Err(TermLimit). Set CHARP_TABLE_CACHE to a directory to persist
    /// built tables across processes.
    pub fn get(p: u64, r: usize) -> Result<Arc<WittTables>> {
        if r == 0 || r > MAX_WITT_LEN {
            return Err(Error::WittLengthRange(r, MAX_WITT_LEN));
        }
        if !crate::field::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        modulus_for(p, r)?;
        let mut cache = TABLE_CACHE.lock().expect("table cache poisoned");
        if let Some(t) = cache.get(&(p, r)) {
            return Ok(Arc::clone(t));
        }
        let tables = match Self::load_from_disk(p, r) {
            Some(t) => Arc::new(t),
            None => {
                let t = Arc::new(Self::build(p, r)?);
                t.store_to_disk();
                t
            }
        };
        cache.insert((p, r), Arc::clone(&tables));
        Ok(tables)
    }

    fn build(p: u64, r: usize) -> Result<WittTables> {
        let budget = TABLE_TERM_BUDGET;
        // Sum: targets w_n(X) + w_n(Y).
        let xs: Vec<usize> = (0..r).collect();
        let ys: Vec<usize> = (r..2 * r).collect();
        let mut sum_targets = Vec::with_capacity(r);
        let mut prod_targets = Vec::with_capacity(r);
        for n in 0..r {
            let wx = ghost_poly(2 * r, &xs, p, n, budget)?;
            let wy = ghost_poly(2 * r, &ys, p, n, budget)?;
            sum_targets.push(wx.add(&wy));
            prod_targets.push(wx.mul(&wy, budget)?);
        }
        let sum = ghost_recursion(p, r, &sum_targets, budget)?;
        let prod = ghost_recursion(p, r, &prod_targets, budget)?;
        let vs: Vec<usize> = (0..r).collect();
        let mut neg_targets = Vec::with_capacity(r);
        for n in 0..r {
            neg_targets.push(ghost_poly(r, &vs, p, n, budget)?.neg());
        }
        let neg = ghost_recursion(p, r, &neg_targets, budget)?;
        Ok(WittTables {
            p,
            r,
            sum,
            neg,
            prod,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Verifies the ghost identities exactly over Z by recomputing
    /// sum_{i<=n} p^i S_i^{p^(n-i)} from the cached polynomials and comparing
    /// with the target ghost expressions, for all three tables and all n < r.
    pub fn verify_ghost_identities(&self) -> Result<bool> {
        let budget = usize::MAX;
        let (p, r) = (self.p, self.r);
        let xs: Vec<usize> = (0..r).collect();
        let ys: Vec<usize> = (r..2 * r).collect();
        for n in 0..r {
            let wx = ghost_poly(2 * r, &xs, p, n, budget)?;
            let wy = ghost_poly(2 * r, &ys, p, n, budget)?;
            if ghost_of(&self.sum, p, n, budget)? != wx.add(&wy) {
                return Ok(false);
            }
            if ghost_of(&self.prod, p, n, budget)? != wx.mul(&wy, budget)? {
                return Ok(false);
            }
            let wv = ghost_poly(r, &xs, p, n, budget)?;
            if ghost_of(&self.neg, p, n, budget)? != wv.neg() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Spot-checks the ghost identities at integer arguments, exactly over Z.
    pub fn check_ghosts_at(&self, args_x: &[i64], args_y: &[i64]) -> Result<bool> {
        if args_x.len() != self.r || args_y.len() != self.r {
            return Err(Error::LengthMismatch(args_x.len(), self.r));
        }
        let mut xy: Vec<BigInt> = args_x.iter().map(|&v| BigInt::from(v)).collect();
        xy.extend(args_y.iter().map(|&v| BigInt::from(v)));
        let sum_at: Vec<BigInt> = self.sum.iter().map(|s| s.eval_bigint(&xy)).collect();
        let prod_at: Vec<BigInt> = self.prod.iter().map(|s| s.eval_bigint(&xy)).collect();
        let neg_at: Vec<BigInt> = self
            .neg
            .iter()
            .map(|s| s.eval_bigint(&xy[..self.r]))
            .collect();
        for n in 0..self.r {
            let gx = ghost_bigint(&xy[..self.r], self.p, n);
            let gy = ghost_bigint(&xy[self.r..], self.p, n);
            if ghost_bigint(&sum_at, self.p, n) != &gx + &gy {
                return Ok(false);
            }
            if ghost_bigint(&prod_at, self.p, n) != &gx * &gy {
                return Ok(false);
            }
            if ghost_bigint(&neg_at, self.p, n) != -&gx {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluates the cached sum polynomials mod p (reference semantics for
    /// `witt_add`).
    pub fn eval_sum(&self, a: &WittVector, b: &WittVector) -> Result<WittVector> {
        a.check_compatible(b)?;
        self.check_args(a)?;
        let mut args = a.comps().to_vec();
        args.extend(b.comps().iter().cloned());
        let comps = self
            .sum
            .iter()
            .map(|s| s.eval_ratfunc(a.ctx(), &args))
            .collect();
        WittVector::new(a.ctx(), comps)
    }

    /// Evaluates the cached product polynomials mod p.
    pub fn eval_prod(&self, a: &WittVector, b: &WittVector) -> Result<WittVector> {
        a.check_compatible(b)?;
        self.check_args(a)?;
        let mut args = a.comps().to_vec();
        args.extend(b.comps().iter().cloned());
        let comps = self
            .prod
            .iter()
            .map(|s| s.eval_ratfunc(a.ctx(), &args))
            .collect();
        WittVector::new(a.ctx(), comps)
    }

    /// Evaluates the cached negation polynomials mod p.
    pub fn eval_neg(&self, a: &WittVector) -> Result<WittVector> {
        self.check_args(a)?;
        let comps = self
            .neg
            .iter()
            .map(|s| s.eval_ratfunc(a.ctx(), a.comps()))
            .collect();
        WittVector::new(a.ctx(), comps)
    }

    fn check_args(&self, a: &WittVector) -> Result<()> {
        if a.len() != self.r {
            return Err(Error::LengthMismatch(a.len(), self.r));
        }
        if a.ctx().p() != self.p {
            return Err(Error::WrongCharacteristic {
                expected: self.p,
                got: a.ctx().p(),
            });
        }
        Ok(())
    }

    fn cache_path(p: u64, r: usize) -> Option<std::path::PathBuf> {
        let dir = std::env::var_os("CHARP_TABLE_CACHE")?;
        if dir.is_empty() {
            return None;
        }
        Some(std::path::PathBuf::from(dir).join(format!("witt_p{p}_r{r}.json")))
    }

    fn load_from_disk(p: u64, r: usize) -> Option<WittTables> {
        let path = Self::cache_path(p, r)?;
        let data = std::fs::read_to_string(path).ok()?;
        let file: TableFile = serde_json::from_str(&data).ok()?;
        if file.schema != 1 || file.p != p || file.r != r {
            return None;
        }
        Some(WittTables {
            p,
            r,
            sum: file.sum.iter().map(|t| decode_zpoly(t, 2 * r)).collect(),
            neg: file.neg.iter().map(|t| decode_zpoly(t, r)).collect(),
            prod: file.prod.iter().map(|t| decode_zpoly(t, 2 * r)).collect(),
        })
    }

    fn store_to_disk(&self) {
        let Some(path) = Self::cache_path(self.p, self.r) else {
            return;
        };
        let file = TableFile {
            schema: 1,
            p: self.p,
            r: self.r,
            sum: self.sum.iter().map(encode_zpoly).collect(),
            neg: self.neg.iter().map(encode_zpoly).collect(),
            prod: self.prod.iter().map(encode_zpoly).collect(),
        };
        if let Ok(data) = serde_json::to_string(&file) {
            if let Some(parent) = path.parent() {
                let _ = std::fs::create_dir_all(parent);
            }
            let _ = std::fs::write(path, data);
        }
    }
}

fn encode_zpoly(z: &ZPoly) -> Vec<(Mono, String)> {
    z.terms
        .iter()
        .map(|(m, c)| (m.clone(), c.to_str_radix(10)))
        .collect()
}

fn decode_zpoly(terms: &[(Mono, String)], nvars: usize) -> ZPoly {
    let mut z = ZPoly::zero(nvars);
    for (m, c) in terms {
        let coeff: BigInt = c.parse().expect("valid cached integer");
        z.add_term(m, coeff);
    }
    z
}

fn ghost_of(polys: &[ZPoly], p: u64, n: usize, budget: usize) -> Result<ZPoly> {
    let mut acc = ZPoly::zero(polys[0].nvars);
    for i in 0..=n {
        let pow = polys[i].pow(p.pow((n - i) as u32) as u32, budget)?;
        acc = acc.add(&pow.scale(&BigInt::from(p).pow(i as u32)));
    }
    Ok(acc)
}

fn ghost_bigint(comps: &[BigInt], p: u64, n: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, c) in comps.iter().take(n + 1).enumerate() {
        acc += BigInt::from(p).pow(i as u32) * c.pow(p.pow((n - i) as u32) as u32);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ctx2() -> FieldContext {
        FieldContext::new(2, &["x", "y"]).unwrap()
    }

    fn wvec(ctx: &FieldContext, entries: &[i64]) -> WittVector {
        let comps = entries
            .iter()
            .map(|&e| RatFunc::constant_i64(ctx, e))
            .collect();
        WittVector::new(ctx, comps).unwrap()
    }

    #[test]
    fn one_plus_one_is_verschiebung_one_mod_2() {
        let ctx = ctx2();
        let a = wvec(&ctx, &[1, 0]);
        let sum = witt_add(&a, &a).unwrap();
        assert_eq!(sum, wvec(&ctx, &[0, 1]));
    }

    #[test]
    fn additive_identity() {
        let ctx = ctx2();
        let x = RatFunc::var(&ctx, 0);
        let y = RatFunc::var(&ctx, 1);
        let a = WittVector::new(&ctx, vec![x, y]).unwrap();
        let z = WittVector::zero(&ctx, 2).unwrap();
        assert_eq!(witt_add(&a, &z).unwrap(), a);
    }

    #[test]
    fn teichmuller_sum_has_product_carry_mod_2() {
        // [x,0] + [y,0] = [x+y, xy]: the universal S_1 = -XY reduces to XY.
        let ctx = ctx2();
        let x = RatFunc::var(&ctx, 0);
        let y = RatFunc::var(&ctx, 1);
        let a = WittVector::from_function(&x, 2).unwrap();
        let b = WittVector::from_function(&y, 2).unwrap();
        let sum = witt_add(&a, &b).unwrap();
        assert_eq!(sum.comp(0), &x.add(&y));
        assert_eq!(sum.comp(1), &x.mul(&y));
    }

    #[test]
    fn multiplicative_identity_and_zero() {
        let ctx = ctx2();
        let x = RatFunc::var(&ctx, 0);
        let y = RatFunc::var(&ctx, 1);
        let a = WittVector::new(&ctx, vec![x, y]).unwrap();
        let one = WittVector::one(&ctx, 2).unwrap();
        let zero = WittVector::zero(&ctx, 2).unwrap();
        assert_eq!(witt_mul(&one, &a).unwrap(), a);
        assert_eq!(witt_mul(&zero, &a).unwrap(), zero);
    }

    #[test]
    fn verschiebung_times_verschiebung_drops_level() {
        // [0,1]·[0,1] has ghost (0, 0, p^2·...)— in W_2 the second slot of the
        // product is p ≡ 0, so the product vanishes.
        let ctx = ctx2();
        let v = wvec(&ctx, &[0, 1]);
        assert_eq!(witt_mul(&v, &v).unwrap(), wvec(&ctx, &[0, 0]));
    }

    #[test]
    fn frobenius_is_componentwise_pth_power_and_additive() {
        let ctx = ctx2();
        let x = RatFunc::var(&ctx, 0);
        let y = RatFunc::var(&ctx, 1);
        let a = WittVector::new(&ctx, vec![x.clone(), y.clone()]).unwrap();
        let fa = witt_frobenius(&a);
        assert_eq!(fa.comp(0), &x.pow(2).unwrap());
        assert_eq!(fa.comp(1), &y.pow(2).unwrap());
        let b = WittVector::new(&ctx, vec![y.clone(), x.clone()]).unwrap();
        let lhs = witt_frobenius(&witt_add(&a, &b).unwrap());
        let rhs = witt_add(&witt_frobenius(&a), &witt_frobenius(&b)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pmul_matches_closed_formula_and_iterated_add() {
        let ctx3 = FieldContext::new(3, &["x"]).unwrap();
        let one = WittVector::one(&ctx3, 2).unwrap();
        let triple = witt_add(&witt_add(&one, &one).unwrap(), &one).unwrap();
        assert_eq!(triple, witt_pmul(&one));
        assert_eq!(triple, wvec(&ctx3, &[0, 1]));

        let x = RatFunc::var(&ctx3, 0);
        let a = WittVector::new(&ctx3, vec![x.clone(), x.clone()]).unwrap();
        let pm = witt_pmul(&a);
        assert!(pm.comp(0).is_zero());
        assert_eq!(pm.comp(1), &x.pow(3).unwrap());
        let vf = witt_truncate_pi(&witt_verschiebung(&witt_frobenius(&a)).unwrap(), 1).unwrap();
        assert_eq!(pm, vf);
    }

    #[test]
    fn iota_pi_exact_sequence() {
        let ctx = ctx2();
        let x = RatFunc::var(&ctx, 0);
        let a = WittVector::from_function(&x, 1).unwrap();
        let emb = witt_shift_iota(&a, 3).unwrap();
        assert_eq!(emb.comps()[0..2], vec![RatFunc::zero(&ctx); 2][..]);
        assert_eq!(emb.comp(2), &x);
        // pi_1 of [a,b,c] keeps [a,b]; composing pi over iota's cokernel: the
        // embedded tail dies under truncation by s = 1 twice.
        let t = witt_truncate_pi(&emb, 2).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn group_axioms_on_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &p in &[2u64, 3, 5] {
            let ctx = FieldContext::new(p, &["x"]).unwrap();
            let x = RatFunc::var(&ctx, 0);
            for _ in 0..8 {
                let r = rng.gen_range(1..=4usize);
                let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let comps: Vec<RatFunc> = (0..r)
                        .map(|_| {
                            let c = rng.gen_range(0..p);
                            let e = rng.gen_range(0..3i64);
                            x.pow(e).unwrap().scale_i64(c as i64)
                        })
                        .collect();
                    WittVector::new(&ctx, comps).unwrap()
                };
                let a = rand_vec(&mut rng);
                let b = rand_vec(&mut rng);
                let c = rand_vec(&mut rng);
                let ab_c = witt_add(&witt_add(&a, &b).unwrap(), &c).unwrap();
                let a_bc = witt_add(&a, &witt_add(&b, &c).unwrap()).unwrap();
                assert_eq!(ab_c, a_bc);
                assert_eq!(witt_add(&a, &b).unwrap(), witt_add(&b, &a).unwrap());
                let neg = witt_neg(&a).unwrap();
                assert!(witt_add(&a, &neg).unwrap().is_zero());
                // p·a = V(φ(a)) truncated, and exponent p^r kills everything.
                assert_eq!(witt_scalar_mul(p as i64, &a).unwrap(), witt_pmul(&a));
                let m = p.pow(r as u32) as i64;
                assert!(witt_scalar_mul(m, &a).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn distributivity_on_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let ctx = FieldContext::new(3, &["x"]).unwrap();
        let x = RatFunc::var(&ctx, 0);
        for _ in 0..6 {
            let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| {
                let comps: Vec<RatFunc> = (0..3)
                    .map(|_| {
                        let c = rng.gen_range(0..3u64);
                        let e = rng.gen_range(0..2i64);
                        x.pow(e).unwrap().scale_i64(c as i64)
                    })
                    .collect();
                WittVector::new(&ctx, comps).unwrap()
            };
            let a = rand_vec(&mut rng);
            let b = rand_vec(&mut rng);
            let c = rand_vec(&mut rng);
            let lhs = witt_mul(&a, &witt_add(&b, &c).unwrap()).unwrap();
            let rhs = witt_add(&witt_mul(&a, &b).unwrap(), &witt_mul(&a, &c).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let abc1 = witt_mul(&witt_mul(&a, &b).unwrap(), &c).unwrap();
            let abc2 = witt_mul(&a, &witt_mul(&b, &c).unwrap()).unwrap();
            assert_eq!(abc1, abc2);
        }
    }

    #[test]
    fn tables_verify_ghost_identities() {
        for &(p, r) in &[(2u64, 3usize), (3, 3), (5, 2)] {
            let t = WittTables::get(p, r).unwrap();
            assert!(t.verify_ghost_identities().unwrap(), "(p,r)=({p},{r})");
            assert!(t.check_ghosts_at(&vec![3; r], &vec![-2; r]).unwrap());
        }
    }

    #[test]
    fn fast_path_matches_tables() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for &(p, r) in &[(2u64, 3usize), (3, 2), (5, 2)] {
            let tables = WittTables::get(p, r).unwrap();
            let ctx = FieldContext::new(p, &["x"]).unwrap();
            let x = RatFunc::var(&ctx, 0);
            for _ in 0..5 {
                let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let comps: Vec<RatFunc> = (0..r)
                        .map(|_| {
                            let c = rng.gen_range(0..p);
                            let e = rng.gen_range(0..3i64);
                            x.pow(e).unwrap().scale_i64(c as i64)
                        })
                        .collect();
                    WittVector::new(&ctx, comps).unwrap()
                };
                let a = rand_vec(&mut rng);
                let b = rand_vec(&mut rng);
                assert_eq!(witt_add(&a, &b).unwrap(), tables.eval_sum(&a, &b).unwrap());
                assert_eq!(
                    witt_mul(&a, &b).unwrap(),
                    tables.eval_prod(&a, &b).unwrap()
                );
                assert_eq!(witt_neg(&a).unwrap(), tables.eval_neg(&a).unwrap());
            }
        }
    }

    #[test]
    fn rational_components_round_trip() {
        // Components with genuine denominators: a + (-a) = 0 and the sum
        // formula stays exact.
        let ctx = FieldContext::new(2, &["t"]).unwrap();
        let t = RatFunc::var(&ctx, 0);
        let inv = t.inv().unwrap();
        let a = WittVector::new(&ctx, vec![inv.clone(), t.clone(), inv.clone()]).unwrap();
        let n = witt_neg(&a).unwrap();
        assert!(witt_add(&a, &n).unwrap().is_zero());
        let double = witt_add(&a, &a).unwrap();
        assert_eq!(double, witt_pmul(&a));
    }

    #[test]
    fn length_and_context_checks() {
        let ctx = ctx2();
        let a = WittVector::zero(&ctx, 2).unwrap();
        let b = WittVector::zero(&ctx, 3).unwrap();
        assert!(matches!(
            witt_add(&a, &b),
            Err(Error::LengthMismatch(2, 3))
        ));
        assert!(witt_truncate_pi(&a, 2).is_err());
        assert!(witt_shift_iota(&b, 2).is_err());
        assert!(WittVector::new(&ctx, vec![]).is_err());
    }
}
