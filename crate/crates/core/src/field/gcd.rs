//! Multivariate polynomial gcd over F_p via recursive contents and a
//! primitive pseudo-remainder sequence.
//!
//! Evaluation/interpolation gcds need more sample points than F_2 or F_3 can
//! offer; the primitive PRS is exact for every p. The recursion picks the
//! largest active variable as the main one, so content computations only ever
//! involve strictly smaller variables and terminate.

use super::poly::{Mono, Poly};

/// Monic gcd of two polynomials over F_p (prime modulus required).
/// gcd(0, 0) = 0; otherwise the result is monic under the lex order.
pub fn poly_gcd(f: &Poly, g: &Poly) -> Poly {
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    // Strip monomial content first: gcd(x^a F, x^b G) = x^min(a,b) gcd(F, G).
    let mf = f.monomial_content().expect("nonzero");
    let mg = g.monomial_content().expect("nonzero");
    let shared: Mono = mf.iter().zip(mg.iter()).map(|(a, b)| *a.min(b)).collect();
    let fs = f.div_mono(&mf);
    let gs = g.div_mono(&mg);
    let core = gcd_inner(&fs, &gs);
    core.mul_term(&shared, 1).monic()
}

fn gcd_inner(f: &Poly, g: &Poly) -> Poly {
    if f.as_constant().is_some() || g.as_constant().is_some() {
        // A nonzero constant divides everything.
        return Poly::one(f.ctx(), f.modulus());
    }
    // Main variable: the largest index active in either argument.
    let n = f.ctx().nvars();
    let k = (0..n)
        .rev()
        .find(|&i| f.degree_in(i).unwrap_or(0) > 0 || g.degree_in(i).unwrap_or(0) > 0)
        .expect("non-constant arguments");
    let df = f.degree_in(k).unwrap_or(0);
    let dg = g.degree_in(k).unwrap_or(0);
    if df == 0 {
        // f is independent of x_k, so gcd(f, g) divides the x_k-content of g.
        return poly_gcd(f, &content_in(g, k));
    }
    if dg == 0 {
        return poly_gcd(&content_in(f, k), g);
    }
    let cf = content_in(f, k);
    let cg = content_in(g, k);
    let c = poly_gcd(&cf, &cg);
    let mut a = f.exact_div(&cf).expect("content divides");
    let mut b = g.exact_div(&cg).expect("content divides");
    if a.degree_in(k).unwrap_or(0) < b.degree_in(k).unwrap_or(0) {
        std::mem::swap(&mut a, &mut b);
    }
    // Primitive PRS in x_k.
    loop {
        let r = pseudo_rem(&a, &b, k);
        if r.is_zero() {
            break;
        }
        let rc = content_in(&r, k);
        let rp = r.exact_div(&rc).expect("content divides");
        a = b;
        b = rp;
        if b.degree_in(k).unwrap_or(0) == 0 {
            // Coprime in x_k: only the content gcd survives.
            return c;
        }
    }
    c.mul(&b).monic()
}

/// Content with respect to x_k: the gcd of the coefficient polynomials of
/// powers of x_k (each of degree 0 in x_k).
fn content_in(f: &Poly, k: usize) -> Poly {
    let mut acc = Poly::zero(f.ctx(), f.modulus());
    for (_, coeff) in f.coeffs_in(k) {
        acc = poly_gcd(&acc, &coeff);
        if acc.is_one() {
            break;
        }
    }
    acc
}

/// Pseudo-remainder of a by b in x_k: repeatedly cancels the leading
/// x_k-coefficient after scaling through by b's. Requires deg_k b >= 1.
fn pseudo_rem(a: &Poly, b: &Poly, k: usize) -> Poly {
    let db = b.degree_in(k).expect("b nonzero");
    let lb = b.lead_coeff_in(k);
    let mut r = a.clone();
    while let Some(dr) = r.degree_in(k) {
        if r.is_zero() || dr < db {
            break;
        }
        let lr = r.lead_coeff_in(k);
        let mut shift = vec![0u32; r.ctx().nvars()];
        shift[k] = dr - db;
        // r := lb * r - lr * x_k^(dr-db) * b cancels the degree-dr layer.
        r = r.mul(&lb).sub(&b.mul(&lr).mul_term(&shift, 1));
    }
    r
}
