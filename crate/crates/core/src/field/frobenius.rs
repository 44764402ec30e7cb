//! Decomposition over the subfield of p-th powers: every rational function is
//! uniquely f = sum_e (g_e)^p * x^e with exponent vectors e componentwise in
//! [0, p). Fractions are handled by writing f = (num * den^(p-1)) / den^p.

use super::poly::{Mono, Poly};
use super::ratfunc::RatFunc;
use std::collections::BTreeMap;

/// The unique decomposition f = sum_e (g_e)^p * x^e, keyed by the reduced
/// exponent vector e (entries in [0, p)). Zero maps to the empty map.
pub fn rf_frobenius_decompose(f: &RatFunc) -> BTreeMap<Mono, RatFunc> {
    let p = f.ctx().p() as u32;
    let den = f.den();
    let lifted = f.num().mul(&den.pow(p - 1));
    let mut buckets: BTreeMap<Mono, Poly> = BTreeMap::new();
    for (m, c) in lifted.terms() {
        let e: Mono = m.iter().map(|&x| x % p).collect();
        let q: Mono = m.iter().map(|&x| x / p).collect();
        // c^p = c for c in F_p, so the p-th-root coefficient is c itself.
        buckets
            .entry(e)
            .or_insert_with(|| Poly::zero(f.ctx(), f.ctx().p()))
            .add_term(&q, c);
    }
    buckets
        .into_iter()
        .filter(|(_, q)| !q.is_zero())
        .map(|(e, q)| {
            let g = RatFunc::new(q, den.clone()).expect("nonzero denominator");
            (e, g)
        })
        .collect()
}

/// Recomposes sum_e g_e^p x^e; inverse of `rf_frobenius_decompose`.
pub fn rf_frobenius_recompose(ctx: &super::FieldContext, parts: &BTreeMap<Mono, RatFunc>) -> RatFunc {
    let mut acc = RatFunc::zero(ctx);
    for (e, g) in parts {
        let mono = RatFunc::from_poly(Poly::from_terms(ctx, ctx.p(), [(e.clone(), 1)]));
        acc = acc.add(&g.frobenius().mul(&mono));
    }
    acc
}

/// The p-th root when f is a p-th power; None otherwise. f is a p-th power
/// exactly when its decomposition is concentrated at e = 0.
pub fn rf_pth_root(f: &RatFunc) -> Option<RatFunc> {
    if f.is_zero() {
        return Some(f.clone());
    }
    let parts = rf_frobenius_decompose(f);
    if parts.len() != 1 {
        return None;
    }
    let (e, g) = parts.into_iter().next().unwrap();
    if e.iter().all(|&x| x == 0) {
        Some(g)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;

    #[test]
    fn monomial_examples() {
        // p=2: x^3 = (x)^2 * x
        let c2 = FieldContext::new(2, &["x"]).unwrap();
        let x = RatFunc::var(&c2, 0);
        let d = rf_frobenius_decompose(&x.pow(3).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&vec![1u32]).unwrap(), &x);

        // p=3: x^2 y^4 = (y)^3 * x^2 y
        let c3 = FieldContext::new(3, &["x", "y"]).unwrap();
        let x = RatFunc::var(&c3, 0);
        let y = RatFunc::var(&c3, 1);
        let f = x.pow(2).unwrap().mul(&y.pow(4).unwrap());
        let d = rf_frobenius_decompose(&f);
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&vec![2u32, 1u32]).unwrap(), &y);
    }

    #[test]
    fn reciprocal_example() {
        // p=2: 1/x = (1/x)^2 * x
        let c2 = FieldContext::new(2, &["x"]).unwrap();
        let x = RatFunc::var(&c2, 0);
        let f = x.inv().unwrap();
        let d = rf_frobenius_decompose(&f);
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&vec![1u32]).unwrap(), &f);
    }

    #[test]
    fn recompose_round_trip() {
        let c = FieldContext::new(3, &["x", "y"]).unwrap();
        let x = RatFunc::var(&c, 0);
        let y = RatFunc::var(&c, 1);
        let f = x
            .pow(4)
            .unwrap()
            .add(&y.pow(2).unwrap())
            .div(&x.add(&y.pow(5).unwrap()))
            .unwrap();
        let d = rf_frobenius_decompose(&f);
        assert_eq!(rf_frobenius_recompose(&c, &d), f);
        for e in d.keys() {
            assert!(e.iter().all(|&v| v < 3));
        }
    }

    #[test]
    fn pth_root_detection() {
        let c = FieldContext::new(2, &["x", "y"]).unwrap();
        let x = RatFunc::var(&c, 0);
        let y = RatFunc::var(&c, 1);
        let g = x.add(&y).div(&y).unwrap();
        let f = g.frobenius();
        assert_eq!(rf_pth_root(&f), Some(g));
        assert_eq!(rf_pth_root(&x), None);
    }
}
