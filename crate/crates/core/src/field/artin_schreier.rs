//! Artin–Schreier equation solver: find g with g^p - g = f in the rational
//! function field, or prove no solution exists.
//!
//! If g = u/w in lowest terms solves the equation then
//! g^p - g = (u^p - u w^{p-1}) / w^p with numerator coprime to w, so the
//! canonical denominator of f must be exactly w^p. That pins w as the p-th
//! root of den(f) (which exists iff all its exponents are divisible by p) and
//! leaves a finite-dimensional F_p-linear problem for u: the map
//! u -> u^p - u w^{p-1} is linear over F_p because c^p = c on coefficients,
//! and the per-variable degrees of u are bounded by
//! max(floor(deg_i num / p), deg_i w) — the top layer in u^p - u w^{p-1} can
//! only cancel when deg u = deg w.

use super::poly::{Mono, Poly};
use super::ratfunc::RatFunc;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Hard cap on the candidate monomial box; inputs needing more unknowns get a
/// TermLimit error rather than an unsound answer.
const MAX_UNKNOWNS: usize = 4096;

/// Solves g^p - g = f. Returns Ok(None) when provably no rational solution
/// exists. The particular solution returned is normalized so solutions differ
/// from it by a constant in F_p.
pub fn solve_artin_schreier(f: &RatFunc) -> Result<Option<RatFunc>> {
    let ctx = f.ctx().clone();
    let p = ctx.p();
    if f.is_zero() {
        return Ok(Some(RatFunc::zero(&ctx)));
    }
    // The denominator must be a p-th power.
    let w = match f.den().pth_root() {
        Some(w) => w,
        None => return Ok(None),
    };
    let num = f.num();
    // Per-variable degree bounds for u.
    let bounds: Vec<u32> = (0..ctx.nvars())
        .map(|i| {
            let dn = num.degree_in(i).unwrap_or(0);
            let dw = w.degree_in(i).unwrap_or(0);
            (dn / p as u32).max(dw)
        })
        .collect();
    let mut size: usize = 1;
    for &b in &bounds {
        size = size.saturating_mul(b as usize + 1);
        if size > MAX_UNKNOWNS {
            return Err(Error::TermLimit(size));
        }
    }
    let candidates = enumerate_box(&bounds);
    let wp1 = w.pow(p as u32 - 1);

    // Column j holds the coefficients of x^{p m_j} - x^{m_j} w^{p-1}.
    let mut rows: BTreeMap<Mono, usize> = BTreeMap::new();
    let row_of = |m: Mono, rows: &mut BTreeMap<Mono, usize>| -> usize {
        let next = rows.len();
        *rows.entry(m).or_insert(next)
    };
    let mut cols: Vec<Vec<(usize, u64)>> = Vec::with_capacity(candidates.len());
    for m in &candidates {
        let mut col: Vec<(usize, u64)> = Vec::new();
        let pm: Mono = m.iter().map(|&e| e * p as u32).collect();
        col.push((row_of(pm, &mut rows), 1));
        for (wm, wc) in wp1.terms() {
            let mono: Mono = wm.iter().zip(m.iter()).map(|(a, b)| a + b).collect();
            let idx = row_of(mono, &mut rows);
            col.push((idx, (p - wc % p) % p));
        }
        cols.push(col);
    }
    let mut rhs_entries: Vec<(usize, u64)> = Vec::new();
    for (m, c) in num.terms() {
        rhs_entries.push((row_of(m.clone(), &mut rows), c));
    }

    let nrows = rows.len();
    let ncols = candidates.len();
    match solve_mod_p(p, nrows, ncols, &cols, &rhs_entries) {
        None => Ok(None),
        Some(sol) => {
            let mut u = Poly::zero(&ctx, p);
            for (j, c) in sol.iter().enumerate() {
                if *c != 0 {
                    u.add_term(&candidates[j], *c);
                }
            }
            let g = RatFunc::new(u, w)?;
            // Safety net: the linear algebra is exact, but verify anyway.
            let check = g.frobenius().sub(&g);
            debug_assert_eq!(&check, f);
            if &check != f {
                return Ok(None);
            }
            Ok(Some(g))
        }
    }
}

fn enumerate_box(bounds: &[u32]) -> Vec<Mono> {
    let mut out: Vec<Mono> = vec![vec![]];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for m in &out {
            for e in 0..=b {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Incremental Gaussian elimination over F_p on sparse columns; returns one
/// solution of M x = rhs or None when the system is inconsistent.
fn solve_mod_p(
    p: u64,
    nrows: usize,
    ncols: usize,
    cols: &[Vec<(usize, u64)>],
    rhs: &[(usize, u64)],
) -> Option<Vec<u64>> {
    let s = super::Scalar(p);
    // Dense rows of length ncols + 1 (augmented).
    let mut dense: Vec<Vec<u64>> = vec![vec![0; ncols + 1]; nrows];
    for (j, col) in cols.iter().enumerate() {
        for &(i, c) in col {
            dense[i][j] = s.add(dense[i][j], c);
        }
    }
    for &(i, c) in rhs {
        dense[i][ncols] = s.add(dense[i][ncols], c);
    }
    // Echelon basis: pivot column -> row.
    let mut pivot_rows: Vec<Option<Vec<u64>>> = vec![None; ncols];
    let mut inconsistent = false;
    for mut row in dense {
        loop {
            let lead = match row[..ncols].iter().position(|&c| c != 0) {
                Some(j) => j,
                None => {
                    if row[ncols] != 0 {
                        inconsistent = true;
                    }
                    break;
                }
            };
            match &pivot_rows[lead] {
                Some(pivot) => {
                    let factor = s.mul(row[lead], s.inv(pivot[lead]));
                    for j in lead..=ncols {
                        row[j] = s.sub(row[j], s.mul(factor, pivot[j]));
                    }
                }
                None => {
                    pivot_rows[lead] = Some(row);
                    break;
                }
            }
        }
        if inconsistent {
            return None;
        }
    }
    // Back-substitution with free variables set to 0.
    let mut x = vec![0u64; ncols];
    for j in (0..ncols).rev() {
        if let Some(row) = &pivot_rows[j] {
            let mut acc = row[ncols];
            for k in j + 1..ncols {
                acc = s.sub(acc, s.mul(row[k], x[k]));
            }
            x[j] = s.mul(acc, s.inv(row[j]));
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldContext;

    fn check_solution(f: &RatFunc, g: &RatFunc) {
        assert_eq!(g.frobenius().sub(g), *f);
    }

    #[test]
    fn polynomial_case() {
        for p in [2u64, 3, 5] {
            let ctx = FieldContext::new(p, &["x"]).unwrap();
            let x = RatFunc::var(&ctx, 0);
            let f = x.pow(p as i64).unwrap().sub(&x);
            let g = solve_artin_schreier(&f).unwrap().unwrap();
            check_solution(&f, &g);
        }
    }

    #[test]
    fn pole_case() {
        for p in [2u64, 3] {
            let ctx = FieldContext::new(p, &["t"]).unwrap();
            let t = RatFunc::var(&ctx, 0);
            // f = t^(-p) - t^(-1) has solution t^(-1).
            let f = t.pow(-(p as i64)).unwrap().sub(&t.pow(-1).unwrap());
            let g = solve_artin_schreier(&f).unwrap().unwrap();
            check_solution(&f, &g);
            assert_eq!(g, t.inv().unwrap());
        }
    }

    #[test]
    fn simple_pole_has_no_solution() {
        for p in [2u64, 3, 5] {
            let ctx = FieldContext::new(p, &["t"]).unwrap();
            let t = RatFunc::var(&ctx, 0);
            let f = t.inv().unwrap();
            assert_eq!(solve_artin_schreier(&f).unwrap(), None);
        }
    }

    #[test]
    fn constant_cases() {
        // Over F_p(t), a nonzero constant c has no solution: g^p - g = c
        // forces g polynomial of degree 0, and e^p - e = 0 for e in F_p.
        let ctx = FieldContext::new(3, &["t"]).unwrap();
        let c = RatFunc::constant(&ctx, 2);
        assert_eq!(solve_artin_schreier(&c).unwrap(), None);
        let z = RatFunc::zero(&ctx);
        assert!(solve_artin_schreier(&z).unwrap().unwrap().is_zero());
    }

    #[test]
    fn multivariate_solution() {
        let ctx = FieldContext::new(2, &["x", "y"]).unwrap();
        let x = RatFunc::var(&ctx, 0);
        let y = RatFunc::var(&ctx, 1);
        // Build f from a known g and recover a solution.
        let g = x.mul(&y).add(&x.pow(3).unwrap()).div(&y).unwrap();
        let f = g.frobenius().sub(&g);
        let s = solve_artin_schreier(&f).unwrap().unwrap();
        check_solution(&f, &s);
        // Solutions differ by constants, so compare classes.
        let diff = s.sub(&g);
        assert!(diff.as_constant().is_some());
    }

    #[test]
    fn random_round_trips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for p in [2u64, 3] {
            let ctx = FieldContext::new(p, &["x", "t"]).unwrap();
            let x = RatFunc::var(&ctx, 0);
            let t = RatFunc::var(&ctx, 1);
            for _ in 0..10 {
                let a = rng.gen_range(0..p);
                let e1 = rng.gen_range(0..3i64);
                let e2 = rng.gen_range(-2..3i64);
                let g = x
                    .pow(e1)
                    .unwrap()
                    .scale_i64(a as i64)
                    .add(&t.pow(e2).unwrap());
                let f = g.frobenius().sub(&g);
                let s = solve_artin_schreier(&f).unwrap().unwrap();
                check_solution(&f, &s);
            }
        }
    }
}
