//! Divisor valuations at rational hyperplane centers {x_k = c} and at
//! infinity in any variable (the degree valuation over the field generated
//! by the remaining variables), with reduction to the residue field.

use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::FieldContext;
use crate::error::{Error, Result};
use std::fmt;

/// Center of a divisor valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Center {
    /// The hyperplane {x_k = c} with c in F_p.
    Finite(u64),
    /// The place at infinity (degree valuation in the chosen variable).
    Infinity,
}

/// A discrete valuation on the ambient field: order of vanishing along
/// {x_k = c} or at infinity in x_k. The residue field is the context with
/// that variable removed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivisorValuation {
    ctx: FieldContext,
    var: usize,
    center: Center,
}

impl DivisorValuation {
    pub fn finite(ctx: &FieldContext, var: usize, c: u64) -> Result<DivisorValuation> {
        if var >= ctx.nvars() {
            return Err(Error::IndexOutOfRange { index: var, len: ctx.nvars() });
        }
        Ok(DivisorValuation { ctx: ctx.clone(), var, center: Center::Finite(c % ctx.p()) })
    }

    /// The valuation at infinity in the last variable.
    pub fn infinity(ctx: &FieldContext) -> Result<DivisorValuation> {
        if ctx.nvars() == 0 {
            return Err(Error::Invalid("context has no variables".into()));
        }
        Ok(DivisorValuation { ctx: ctx.clone(), var: ctx.nvars() - 1, center: Center::Infinity })
    }

    /// The valuation at infinity in an arbitrary variable: order of the pole
    /// in x_var over the field generated by the remaining variables.
    pub fn infinity_in(ctx: &FieldContext, var: usize) -> Result<DivisorValuation> {
        if var >= ctx.nvars() {
            return Err(Error::IndexOutOfRange { index: var, len: ctx.nvars() });
        }
        Ok(DivisorValuation { ctx: ctx.clone(), var, center: Center::Infinity })
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn var(&self) -> usize {
        self.var
    }

    pub fn center(&self) -> Center {
        self.center
    }

    /// The residue field: the context with the valuation variable removed.
    pub fn residue_ctx(&self) -> FieldContext {
        self.ctx.without(self.var)
    }

    /// The canonical uniformizer: (x - c) at finite centers, 1/x at infinity.
    pub fn uniformizer(&self) -> RatFunc {
        let x = RatFunc::var(&self.ctx, self.var);
        match self.center {
            Center::Finite(c) => x.sub(&RatFunc::constant(&self.ctx, c)),
            Center::Infinity => x.inv().expect("variable is nonzero"),
        }
    }
}

impl fmt::Display for DivisorValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.center {
            Center::Finite(c) => write!(f, "at {}={}", self.ctx.var_name(self.var), c),
            Center::Infinity => write!(f, "at inf({})", self.ctx.var_name(self.var)),
        }
    }
}

/// Multiplicity of (x_k - c) in a nonzero polynomial, along with the cofactor
/// q with f = (x_k - c)^ord * q.
fn finite_order(f: &Poly, k: usize, c: u64) -> (i64, Poly) {
    assert!(!f.is_zero());
    let ctx = f.ctx().clone();
    let linear = Poly::variable(&ctx, f.modulus(), k)
        .sub(&Poly::constant(&ctx, f.modulus(), c));
    let mut ord = 0i64;
    let mut g = f.clone();
    while g.subst_const(k, c).is_zero() {
        g = g.exact_div(&linear).expect("root implies divisibility");
        ord += 1;
    }
    (ord, g)
}

/// Order of vanishing of f at the divisor; negative for poles. At infinity it
/// is deg_den - deg_num in the valuation variable.
pub fn rf_valuation(f: &RatFunc, v: &DivisorValuation) -> Result<i64> {
    assert_eq!(f.ctx(), v.ctx(), "context mismatch");
    if f.is_zero() {
        return Err(Error::ZeroInput);
    }
    match v.center {
        Center::Finite(c) => {
            let (on, _) = finite_order(f.num(), v.var, c);
            let (od, _) = finite_order(f.den(), v.var, c);
            Ok(on - od)
        }
        Center::Infinity => {
            let dn = f.num().degree_in(v.var).unwrap_or(0) as i64;
            let dd = f.den().degree_in(v.var).unwrap_or(0) as i64;
            Ok(dd - dn)
        }
    }
}

/// Image of f in the residue field of v. Requires rf_valuation(f, v) >= 0;
/// elements of positive valuation reduce to 0.
pub fn rf_reduce(f: &RatFunc, v: &DivisorValuation) -> Result<RatFunc> {
    assert_eq!(f.ctx(), v.ctx(), "context mismatch");
    let rctx = v.residue_ctx();
    if f.is_zero() {
        return Ok(RatFunc::zero(&rctx));
    }
    match v.center {
        Center::Finite(c) => {
            let (on, qn) = finite_order(f.num(), v.var, c);
            let (od, qd) = finite_order(f.den(), v.var, c);
            let val = on - od;
            if val < 0 {
                return Err(Error::NegativeValuation(val));
            }
            if val > 0 {
                return Ok(RatFunc::zero(&rctx));
            }
            let n = qn.subst_const(v.var, c).remove_var(v.var);
            let d = qd.subst_const(v.var, c).remove_var(v.var);
            RatFunc::new(n, d)
        }
        Center::Infinity => {
            let dn = f.num().degree_in(v.var).unwrap_or(0);
            let dd = f.den().degree_in(v.var).unwrap_or(0);
            let val = dd as i64 - dn as i64;
            if val < 0 {
                return Err(Error::NegativeValuation(val));
            }
            if val > 0 {
                return Ok(RatFunc::zero(&rctx));
            }
            let n = f.num().lead_coeff_in(v.var).remove_var(v.var);
            let d = f.den().lead_coeff_in(v.var).remove_var(v.var);
            RatFunc::new(n, d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rf_normalize;

    fn setup() -> (FieldContext, RatFunc, RatFunc) {
        let ctx = FieldContext::new(2, &["x", "t"]).unwrap();
        let x = RatFunc::var(&ctx, 0);
        let t = RatFunc::var(&ctx, 1);
        (ctx, x, t)
    }

    #[test]
    fn valuation_basics() {
        let (ctx, x, t) = setup();
        let v0 = DivisorValuation::finite(&ctx, 1, 0).unwrap();
        let vinf = DivisorValuation::infinity(&ctx).unwrap();
        assert_eq!(rf_valuation(&RatFunc::one(&ctx), &v0).unwrap(), 0);
        assert_eq!(rf_valuation(&t, &v0).unwrap(), 1);
        assert_eq!(rf_valuation(&t, &vinf).unwrap(), -1);
        let f = t.pow(3).unwrap().div(&x.add(&t)).unwrap();
        assert_eq!(rf_valuation(&f, &v0).unwrap(), 3);
        assert_eq!(rf_valuation(&f, &vinf).unwrap(), 1 - 3);
        assert!(rf_valuation(&RatFunc::zero(&ctx), &v0).is_err());
    }

    #[test]
    fn valuation_is_multiplicative_and_ultrametric() {
        let (ctx, x, t) = setup();
        let v = DivisorValuation::finite(&ctx, 1, 1).unwrap();
        let f = t.add(&RatFunc::one(&ctx)).mul(&x); // (t+1) x
        let g = t.add(&x).div(&t.add(&RatFunc::one(&ctx))).unwrap();
        let vf = rf_valuation(&f, &v).unwrap();
        let vg = rf_valuation(&g, &v).unwrap();
        assert_eq!(rf_valuation(&f.mul(&g), &v).unwrap(), vf + vg);
        let s = f.add(&g);
        if !s.is_zero() {
            assert!(rf_valuation(&s, &v).unwrap() >= vf.min(vg));
        }
    }

    #[test]
    fn reduce_at_finite_center() {
        let (ctx, x, t) = setup();
        let v = DivisorValuation::finite(&ctx, 1, 0).unwrap();
        // reduce(t + x, t=0) = x
        let f = t.add(&x);
        let reduced = rf_reduce(&f, &v).unwrap();
        let rctx = v.residue_ctx();
        assert_eq!(reduced, RatFunc::var(&rctx, 0));
        // positive valuation reduces to zero
        assert!(rf_reduce(&t, &v).unwrap().is_zero());
        // pole is an error
        assert!(rf_reduce(&t.inv().unwrap(), &v).is_err());
        // constants reduce to themselves
        let one = rf_normalize(&RatFunc::one(&ctx));
        assert!(rf_reduce(&one, &v).unwrap().is_one());
    }

    #[test]
    fn reduce_at_infinity() {
        let (ctx, x, t) = setup();
        let v = DivisorValuation::infinity(&ctx).unwrap();
        // (x t + 1)/(t + x) -> x at infinity in t.
        let f = x.mul(&t).add(&RatFunc::one(&ctx)).div(&t.add(&x)).unwrap();
        let reduced = rf_reduce(&f, &v).unwrap();
        let rctx = v.residue_ctx();
        assert_eq!(reduced, RatFunc::var(&rctx, 0));
        assert!(rf_reduce(&t.inv().unwrap(), &v).unwrap().is_zero());
    }

    #[test]
    fn uniformizers() {
        let (ctx, _, t) = setup();
        let v0 = DivisorValuation::finite(&ctx, 1, 0).unwrap();
        let vinf = DivisorValuation::infinity(&ctx).unwrap();
        assert_eq!(v0.uniformizer(), t);
        assert_eq!(vinf.uniformizer(), t.inv().unwrap());
        assert_eq!(rf_valuation(&v0.uniformizer(), &v0).unwrap(), 1);
        assert_eq!(rf_valuation(&vinf.uniformizer(), &vinf).unwrap(), 1);
    }

    #[test]
    fn infinity_works_in_any_variable() {
        let (ctx, x, t) = setup();
        let v = DivisorValuation::infinity_in(&ctx, 0).unwrap();
        // (x^2 t + 1)/(x^2 + t) has a finite nonzero limit t as x grows.
        let f = x.mul(&x).mul(&t).add(&RatFunc::one(&ctx)).div(&x.mul(&x).add(&t)).unwrap();
        assert_eq!(rf_valuation(&f, &v).unwrap(), 0);
        let rctx = v.residue_ctx();
        assert_eq!(rf_reduce(&f, &v).unwrap(), RatFunc::var(&rctx, 0));
        assert_eq!(rf_valuation(&x.inv().unwrap(), &v).unwrap(), 1);
        assert!(rf_reduce(&x.inv().unwrap(), &v).unwrap().is_zero());
        assert!(DivisorValuation::infinity_in(&ctx, 2).is_err());
    }
}
