//! Kähler differential forms over F_p(x...): exterior derivative, wedge,
//! Cartier and inverse-Cartier operators, and classification of closed forms
//! into exact and p-th-power-logarithmic parts.
//!
//! The Cartier computation rests on a grading argument: writing every form in
//! the dlog basis x^c g^p dlog x_I (c in [0,p)^m, g rational), the exterior
//! derivative preserves the class c, the c = 0 summand carries zero
//! differential, and each c != 0 summand is a contractible Koszul complex
//! (wedging with sum_k c_k dlog x_k). Hence a closed form is, modulo exact
//! forms, exactly its c = 0 part, and C reads the p-th root off that part:
//! C(f dx_I) keeps the e = 0 Frobenius bucket of f * x_I.

use crate::error::{Error, Result};
use crate::field::{rf_frobenius_decompose, FieldContext, RatFunc};
use std::collections::BTreeMap;
use std::fmt;

/// Strictly increasing list of variable indices naming a basis form dx_I.
pub type IndexSet = Vec<u32>;

/// A differential n-form: coefficients on the canonical basis dx_I over the
/// increasing index sets I of size n. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffForm {
    ctx: FieldContext,
    degree: usize,
    coeffs: BTreeMap<IndexSet, RatFunc>,
}

impl DiffForm {
    pub fn zero(ctx: &FieldContext, degree: usize) -> DiffForm {
        DiffForm {
            ctx: ctx.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// A 0-form is just a rational function.
    pub fn from_function(f: &RatFunc) -> DiffForm {
        let mut form = DiffForm::zero(f.ctx(), 0);
        form.add_coeff(&[], f.clone());
        form
    }

    /// Builds a form from (index set, coefficient) pairs; all sets must be
    /// strictly increasing, of size `degree`, with entries < nvars.
    pub fn from_coeffs(
        ctx: &FieldContext,
        degree: usize,
        entries: Vec<(IndexSet, RatFunc)>,
    ) -> Result<DiffForm> {
        let mut form = DiffForm::zero(ctx, degree);
        for (idx, f) in entries {
            if idx.len() != degree
                || !idx.windows(2).all(|w| w[0] < w[1])
                || idx.iter().any(|&k| k as usize >= ctx.nvars())
            {
                return Err(Error::Invalid(format!("bad basis index set {idx:?}")));
            }
            if f.ctx() != ctx {
                return Err(Error::Invalid("coefficient from a different field".into()));
            }
            form.add_coeff(&idx, f);
        }
        Ok(form)
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates (index set, coefficient) pairs in canonical order.
    pub fn coeffs(&self) -> impl Iterator<Item = (&IndexSet, &RatFunc)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: &[u32]) -> RatFunc {
        self.coeffs
            .get(idx)
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(&self.ctx))
    }

    fn add_coeff(&mut self, idx: &[u32], f: RatFunc) {
        if f.is_zero() {
            return;
        }
        match self.coeffs.get_mut(idx) {
            Some(g) => {
                let sum = g.add(&f);
                if sum.is_zero() {
                    self.coeffs.remove(idx);
                } else {
                    *g = sum;
                }
            }
            None => {
                self.coeffs.insert(idx.to_vec(), f);
            }
        }
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        assert_eq!(self.degree, other.degree, "form degree mismatch");
        assert_eq!(self.ctx, other.ctx, "form field mismatch");
        let mut out = self.clone();
        for (idx, f) in &other.coeffs {
            out.add_coeff(idx, f.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffForm {
        DiffForm {
            ctx: self.ctx.clone(),
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, f)| (i.clone(), f.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, a: &RatFunc) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree);
        for (idx, f) in &self.coeffs {
            out.add_coeff(idx, f.mul(a));
        }
        out
    }

    /// Exterior product.
    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        assert_eq!(self.ctx, other.ctx, "form field mismatch");
        let mut out = DiffForm::zero(&self.ctx, self.degree + other.degree);
        for (ia, fa) in &self.coeffs {
            for (ib, fb) in &other.coeffs {
                if let Some((merged, sign)) = merge_index_sets(ia, ib) {
                    let c = fa.mul(fb);
                    out.add_coeff(&merged, if sign { c.neg() } else { c });
                }
            }
        }
        out
    }
}

/// Merges two disjoint increasing index sets; returns None when they overlap,
/// otherwise the merged set and whether the shuffle permutation is odd.
fn merge_index_sets(a: &[u32], b: &[u32]) -> Option<(IndexSet, bool)> {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            merged.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining a-entries.
            inversions += a.len() - i;
            merged.push(b[j]);
            j += 1;
        } else {
            return None; // equal indices: wedge vanishes
        }
    }
    Some((merged, inversions % 2 == 1))
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if idx.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c}) * ")?;
                for (pos, &k) in idx.iter().enumerate() {
                    if pos > 0 {
                        write!(f, " ^ ")?;
                    }
                    write!(f, "d({})", self.ctx.var_name(k as usize))?;
                }
            }
        }
        Ok(())
    }
}

/// Exterior derivative.
pub fn form_d(omega: &DiffForm) -> DiffForm {
    let ctx = omega.ctx();
    let mut out = DiffForm::zero(ctx, omega.degree() + 1);
    for (idx, f) in omega.coeffs() {
        for k in 0..ctx.nvars() as u32 {
            if idx.binary_search(&k).is_ok() {
                continue;
            }
            let df = f.derivative(k as usize);
            if df.is_zero() {
                continue;
            }
            let pos = idx.partition_point(|&j| j < k);
            let mut new_idx = idx.clone();
            new_idx.insert(pos, k);
            out.add_coeff(&new_idx, if pos % 2 == 1 { df.neg() } else { df });
        }
    }
    out
}

/// The form a · db_1/b_1 ∧ ... ∧ db_n/b_n expanded in the canonical basis.
pub fn form_dlog(a: &RatFunc, bs: &[RatFunc]) -> Result<DiffForm> {
    let ctx = a.ctx();
    let mut acc = DiffForm::from_function(&RatFunc::one(ctx));
    for b in bs {
        if b.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let dlog_b = form_d(&DiffForm::from_function(b)).scale(&b.inv()?);
        acc = acc.wedge(&dlog_b);
    }
    Ok(acc.scale(a))
}

/// Inverse Cartier operator: additive, with Φ(f dx_I) = f^p · x_I^{p−1} dx_I
/// (on 0-forms, f ↦ f^p). Its image consists of closed forms and
/// Φ(a dlog b̲) = a^p dlog b̲.
pub fn inverse_cartier(omega: &DiffForm) -> DiffForm {
    let ctx = omega.ctx();
    let p = ctx.p() as i64;
    let mut out = DiffForm::zero(ctx, omega.degree());
    for (idx, f) in omega.coeffs() {
        let mut c = f.frobenius();
        for &k in idx {
            let xk = RatFunc::var(ctx, k as usize);
            c = c.mul(&xk.pow(p - 1).expect("p >= 2"));
        }
        out.add_coeff(idx, c);
    }
    out
}

/// Cartier operator on closed forms: the inverse of Φ modulo exact forms,
/// with C(exact) = 0. Errors with NotClosed when dω ≠ 0.
pub fn cartier(omega: &DiffForm) -> Result<DiffForm> {
    if !form_d(omega).is_zero() {
        return Err(Error::NotClosed);
    }
    Ok(cartier_unchecked(omega))
}

/// The bucket-extraction rule; correct whenever the Cartier operator is
/// applied to a closed form (callers check closedness).
fn cartier_unchecked(omega: &DiffForm) -> DiffForm {
    let ctx = omega.ctx();
    let zero_bucket = vec![0u32; ctx.nvars()];
    let mut out = DiffForm::zero(ctx, omega.degree());
    for (idx, f) in omega.coeffs() {
        let x_i = index_monomial(ctx, idx);
        let buckets = rf_frobenius_decompose(&f.mul(&x_i));
        if let Some(g) = buckets.get(&zero_bucket) {
            let c = g.div(&x_i).expect("monomial is nonzero");
            out.add_coeff(idx, c);
        }
    }
    out
}

fn index_monomial(ctx: &FieldContext, idx: &[u32]) -> RatFunc {
    let mut m = RatFunc::one(ctx);
    for &k in idx {
        m = m.mul(&RatFunc::var(ctx, k as usize));
    }
    m
}

/// True iff ω is closed and Cartier-fixed (the operational characterization
/// of the subgroup generated by dlog wedges).
pub fn is_logarithmic(omega: &DiffForm) -> bool {
    form_d(omega).is_zero() && cartier_unchecked(omega) == *omega
}

/// Outcome of `classify_closed`: either not closed, exact (single Cartier
/// application kills it), or a decomposition ω ≡ Σ a_j^p ψ_j with ψ_j
/// logarithmic, valid modulo forms killed by `iterations` Cartier steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedFormClassification {
    NotClosed,
    Exact,
    LogDecomposition {
        /// Number k of Cartier applications after which the difference
        /// input − Σ a_j^p ψ_j maps to zero.
        iterations: usize,
        /// Pairs (a_j, ψ_j) with ψ_j a wedge of dlog coordinates.
        parts: Vec<(RatFunc, DiffForm)>,
    },
}

const CARTIER_ITERATION_CAP: usize = 64;

/// Classifies a form by iterated Cartier application: NotClosed if dω ≠ 0,
/// Exact if C(ω) = 0, else the stable logarithmic content.
pub fn classify_closed(omega: &DiffForm) -> Result<ClosedFormClassification> {
    if !form_d(omega).is_zero() {
        return Ok(ClosedFormClassification::NotClosed);
    }
    let ctx = omega.ctx();
    let p = ctx.p();
    let mut s = cartier_unchecked(omega);
    if s.is_zero() {
        return Ok(ClosedFormClassification::Exact);
    }
    let mut k = 1usize;
    loop {
        if !form_d(&s).is_zero() {
            break;
        }
        let t = cartier_unchecked(&s);
        if t == s {
            break;
        }
        k += 1;
        s = t;
        if s.is_zero() {
            break;
        }
        if k > CARTIER_ITERATION_CAP {
            return Err(Error::InternalLimit);
        }
    }
    // s = C^k(ω); the decomposition pairs are a_I = (f_I · x_I)^{p^(k−1)},
    // ψ_I = dlog x_I, so that Σ a_I^p ψ_I = Φ^k(s) and C^k(ω − Φ^k(s)) = 0.
    let exp = p
        .checked_pow(u32::try_from(k - 1).expect("small k"))
        .and_then(|e| i64::try_from(e).ok())
        .ok_or(Error::InternalLimit)?;
    let mut parts = Vec::new();
    for (idx, f) in s.coeffs() {
        let x_i = index_monomial(ctx, idx);
        let a = f.mul(&x_i).pow(exp)?;
        let psi = {
            let mut form = DiffForm::zero(ctx, s.degree());
            form.add_coeff(idx, x_i.inv()?);
            form
        };
        parts.push((a, psi));
    }
    Ok(ClosedFormClassification::LogDecomposition {
        iterations: k,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ctx(p: u64) -> FieldContext {
        FieldContext::new(p, &["x", "y"]).unwrap()
    }

    fn dvar(c: &FieldContext, k: usize) -> DiffForm {
        form_d(&DiffForm::from_function(&RatFunc::var(c, k)))
    }

    #[test]
    fn leibniz_on_a_product() {
        let c = ctx(5);
        let x = RatFunc::var(&c, 0);
        let y = RatFunc::var(&c, 1);
        let d_xy = form_d(&DiffForm::from_function(&x.mul(&y)));
        let expected = dvar(&c, 1).scale(&x).add(&dvar(&c, 0).scale(&y));
        assert_eq!(d_xy, expected);
    }

    #[test]
    fn d_of_pth_power_vanishes() {
        let c = ctx(3);
        let x = RatFunc::var(&c, 0);
        let f = x.pow(3).unwrap();
        assert!(form_d(&DiffForm::from_function(&f)).is_zero());
    }

    #[test]
    fn d_of_inverse() {
        let c = FieldContext::new(5, &["t"]).unwrap();
        let t = RatFunc::var(&c, 0);
        let d_inv = form_d(&DiffForm::from_function(&t.inv().unwrap()));
        // d(t^{-1}) = -t^{-2} dt.
        let expected =
            DiffForm::from_coeffs(&c, 1, vec![(vec![0], t.pow(-2).unwrap().neg())]).unwrap();
        assert_eq!(d_inv, expected);
        // Equivalently -(t^{-1}) dt/t.
        let via_dlog = form_dlog(&t.inv().unwrap().neg(), &[t.clone()]).unwrap();
        assert_eq!(d_inv, via_dlog);
    }

    #[test]
    fn dlog_basics() {
        let c = ctx(3);
        let x = RatFunc::var(&c, 0);
        let one = RatFunc::one(&c);
        // Repeated arguments kill the wedge.
        assert!(form_dlog(&one, &[x.clone(), x.clone()]).unwrap().is_zero());
        // dlog x = (1/x) dx.
        let dlx = form_dlog(&one, &[x.clone()]).unwrap();
        assert_eq!(
            dlx,
            DiffForm::from_coeffs(&c, 1, vec![(vec![0], x.inv().unwrap())]).unwrap()
        );
        assert!(form_dlog(&one, &[RatFunc::zero(&c)]).is_err());
        let t_ctx = FieldContext::new(2, &["t"]).unwrap();
        let t = RatFunc::var(&t_ctx, 0);
        let f = form_dlog(&t.inv().unwrap(), &[t.clone()]).unwrap();
        assert_eq!(f.coeff(&[0]), t.pow(-2).unwrap());
    }

    #[test]
    fn inverse_cartier_on_basis_and_dlog() {
        for p in [2u64, 3, 5] {
            let c = ctx(p);
            let x = RatFunc::var(&c, 0);
            let phi_dx = inverse_cartier(&dvar(&c, 0));
            let expected = DiffForm::from_coeffs(
                &c,
                1,
                vec![(vec![0], x.pow(p as i64 - 1).unwrap())],
            )
            .unwrap();
            assert_eq!(phi_dx, expected);
            assert!(inverse_cartier(&DiffForm::zero(&c, 1)).is_zero());
            let dlx = form_dlog(&RatFunc::one(&c), &[x.clone()]).unwrap();
            assert_eq!(inverse_cartier(&dlx), dlx);
        }
    }

    #[test]
    fn cartier_inverts_phi_and_kills_exact() {
        for p in [2u64, 3] {
            let c = ctx(p);
            let x = RatFunc::var(&c, 0);
            let dx = dvar(&c, 0);
            let phi_dx = inverse_cartier(&dx);
            assert_eq!(cartier(&phi_dx).unwrap(), dx);
            assert!(cartier(&dx).unwrap().is_zero());
            let dlx = form_dlog(&RatFunc::one(&c), &[x.clone()]).unwrap();
            assert_eq!(cartier(&dlx).unwrap(), dlx);
        }
    }

    #[test]
    fn cartier_rejects_non_closed() {
        let c = ctx(2);
        let y = RatFunc::var(&c, 1);
        let omega = dvar(&c, 0).scale(&y);
        assert!(matches!(cartier(&omega), Err(Error::NotClosed)));
    }

    #[test]
    fn classification_examples() {
        let c = ctx(3);
        let x = RatFunc::var(&c, 0);
        let y = RatFunc::var(&c, 1);
        assert_eq!(
            classify_closed(&dvar(&c, 0)).unwrap(),
            ClosedFormClassification::Exact
        );
        assert_eq!(
            classify_closed(&dvar(&c, 0).scale(&y)).unwrap(),
            ClosedFormClassification::NotClosed
        );
        // x^{p-1} dx + dlog y: the stable logarithmic part is dlog y.
        let omega = dvar(&c, 0)
            .scale(&x.pow(2).unwrap())
            .add(&form_dlog(&RatFunc::one(&c), &[y.clone()]).unwrap());
        match classify_closed(&omega).unwrap() {
            ClosedFormClassification::LogDecomposition { iterations, parts } => {
                assert_eq!(parts.len(), 1);
                let (a, psi) = &parts[0];
                assert!(a.is_one());
                assert_eq!(psi, &form_dlog(&RatFunc::one(&c), &[y.clone()]).unwrap());
                // Reconstruction: C^k(ω − Σ a^p ψ) = 0.
                let mut rest = omega.sub(&psi.scale(&a.frobenius()));
                for _ in 0..iterations {
                    rest = cartier(&rest).unwrap();
                }
                assert!(rest.is_zero());
            }
            other => panic!("expected log decomposition, got {other:?}"),
        }
    }

    #[test]
    fn non_coordinate_log_form_classifies_at_one_iteration() {
        let c = ctx(2);
        let x = RatFunc::var(&c, 0);
        let xp1 = x.add(&RatFunc::one(&c));
        let omega = form_dlog(&RatFunc::one(&c), &[xp1.clone()]).unwrap();
        assert!(is_logarithmic(&omega));
        match classify_closed(&omega).unwrap() {
            ClosedFormClassification::LogDecomposition { iterations, parts } => {
                let mut sum = DiffForm::zero(&c, 1);
                for (a, psi) in &parts {
                    sum = sum.add(&psi.scale(&a.frobenius()));
                }
                let mut rest = omega.sub(&sum);
                for _ in 0..iterations {
                    rest = cartier(&rest).unwrap();
                }
                assert!(rest.is_zero());
            }
            other => panic!("expected log decomposition, got {other:?}"),
        }
    }

    #[test]
    fn logarithmic_predicate() {
        let c = ctx(3);
        let x = RatFunc::var(&c, 0);
        let y = RatFunc::var(&c, 1);
        let one = RatFunc::one(&c);
        assert!(is_logarithmic(&form_dlog(&one, &[x.clone(), y.clone()]).unwrap()));
        assert!(!is_logarithmic(&dvar(&c, 0)));
        assert!(is_logarithmic(&DiffForm::zero(&c, 1)));
    }

    fn random_ratfunc(c: &FieldContext, rng: &mut rand_chacha::ChaCha8Rng) -> RatFunc {
        let x = RatFunc::var(c, 0);
        let y = RatFunc::var(c, 1);
        let p = c.p();
        let mut f = RatFunc::constant(c, rng.gen_range(0..p));
        for _ in 0..2 {
            let e1 = rng.gen_range(-2..3i64);
            let e2 = rng.gen_range(0..3i64);
            let coef = rng.gen_range(0..p) as i64;
            f = f.add(
                &x.pow(e1)
                    .unwrap()
                    .mul(&y.pow(e2).unwrap())
                    .scale_i64(coef),
            );
        }
        f
    }

    #[test]
    fn dd_zero_and_leibniz_on_random_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for p in [2u64, 3] {
            let c = ctx(p);
            for _ in 0..25 {
                let f = random_ratfunc(&c, &mut rng);
                let g = random_ratfunc(&c, &mut rng);
                let omega = DiffForm::from_coeffs(&c, 1, vec![(vec![0], f.clone())])
                    .unwrap()
                    .add(&DiffForm::from_coeffs(&c, 1, vec![(vec![1], g.clone())]).unwrap());
                assert!(form_d(&form_d(&omega)).is_zero());
                // d(fω) = df ∧ ω + f dω
                let lhs = form_d(&omega.scale(&f));
                let df = form_d(&DiffForm::from_function(&f));
                let rhs = df.wedge(&omega).add(&form_d(&omega).scale(&f));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn cartier_phi_round_trip_on_random_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for p in [2u64, 3] {
            let c = ctx(p);
            for _ in 0..20 {
                let f = random_ratfunc(&c, &mut rng);
                let g = random_ratfunc(&c, &mut rng);
                let omega = DiffForm::from_coeffs(&c, 1, vec![(vec![0], f)])
                    .unwrap()
                    .add(&DiffForm::from_coeffs(&c, 1, vec![(vec![1], g)]).unwrap());
                let phi = inverse_cartier(&omega);
                assert!(form_d(&phi).is_zero(), "Φ image must be closed");
                assert_eq!(cartier(&phi).unwrap(), omega);
            }
        }
    }

    #[test]
    fn cartier_ignores_exact_contributions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let c = ctx(3);
        for _ in 0..15 {
            let f = random_ratfunc(&c, &mut rng);
            let eta = random_ratfunc(&c, &mut rng);
            let omega = inverse_cartier(
                &DiffForm::from_coeffs(&c, 1, vec![(vec![0], f)]).unwrap(),
            );
            let shifted = omega.add(&form_d(&DiffForm::from_function(&eta)));
            assert_eq!(cartier(&shifted).unwrap(), cartier(&omega).unwrap());
        }
    }

    #[test]
    fn artin_schreier_twist_of_dlog_forms() {
        // Φ(a dlog b̲) − a dlog b̲ = (a^p − a) dlog b̲.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for p in [2u64, 3] {
            let c = ctx(p);
            let x = RatFunc::var(&c, 0);
            let y = RatFunc::var(&c, 1);
            for _ in 0..10 {
                let a = random_ratfunc(&c, &mut rng);
                let omega = form_dlog(&a, &[x.clone(), y.clone()]).unwrap();
                let lhs = inverse_cartier(&omega).sub(&omega);
                let p_of_a = a.frobenius().sub(&a);
                let rhs = form_dlog(&p_of_a, &[x.clone(), y.clone()]).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn zero_form_cartier_is_pth_root() {
        let c = ctx(2);
        let x = RatFunc::var(&c, 0);
        let f = x.pow(2).unwrap();
        let form = DiffForm::from_function(&f);
        assert_eq!(cartier(&form).unwrap(), DiffForm::from_function(&x));
        let not_closed = DiffForm::from_function(&x);
        assert!(cartier(&not_closed).is_err());
        assert_eq!(inverse_cartier(&form), DiffForm::from_function(&x.pow(4).unwrap()));
    }
}
