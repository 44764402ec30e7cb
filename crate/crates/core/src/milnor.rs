//! Milnor K-symbol sums modulo an integer m.
//!
//! A [`KSymbolSum`] is a formal Z/m-linear combination of symbols
//! `{b_1, ..., b_n}` whose entries are nonzero rational functions. The module
//! provides a rewriting normal form ([`k_normalize`]), the tame residue at a
//! divisor valuation ([`k_residue`]), specialization of unramified sums
//! ([`k_specialize`]), the dlog comparison map into differential forms for
//! m = p ([`k_dlog`]), and a three-valued zero test ([`k_is_zero`]) whose
//! definite answers carry replayable certificates ([`k_verify_witness`]).
//!
//! Residue convention: the uniformizer occupies the first slot, so that
//! `∂{π, u_2, ..., u_n} = {ū_2, ..., ū_n}` with no sign. This is the negative
//! of the classical tame-symbol formula `(−1)^{v(f)v(g)} f^{v(g)}/g^{v(f)}`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::field::{
    rf_reduce, rf_valuation, DivisorValuation, FieldContext, RatFunc, MAX_MODULUS,
};
use crate::forms::{form_dlog, DiffForm};

/// Degrees above this would need 2^n subset expansions in the residue map.
const MAX_RESIDUE_DEGREE: usize = 16;
/// Finite centers are searched in 0..min(p, CAP) during the zero test.
const CENTER_SCAN_CAP: u64 = 512;
/// Largest prime for which the constant-field discrete-log base case runs.
const DLOG_CAP: u64 = 1 << 20;
/// Residue-recursion depth bound for the zero test.
const MAX_ZERO_DEPTH: usize = 24;

/// A formal Z/m-linear combination of Milnor symbols of a fixed degree.
///
/// Terms are pairs (coefficient in `0..modulus`, entries); entries are nonzero
/// rational functions over a shared [`FieldContext`]. Structural equality is
/// term-by-term; semantic comparisons go through [`k_normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSymbolSum {
    ctx: FieldContext,
    degree: usize,
    modulus: u64,
    terms: Vec<(u64, Vec<RatFunc>)>,
}

impl KSymbolSum {
    /// Builds a sum from raw (coefficient, entries) terms.
    ///
    /// Coefficients are reduced mod `modulus`; zero-coefficient terms are
    /// dropped. Every entry must be nonzero, over `ctx`, and each term must
    /// have exactly `degree` entries.
    pub fn new(
        ctx: &FieldContext,
        degree: usize,
        modulus: u64,
        terms: Vec<(i64, Vec<RatFunc>)>,
    ) -> Result<KSymbolSum> {
        if modulus < 2 || modulus > MAX_MODULUS {
            return Err(Error::ModulusRange(modulus));
        }
        let mut out = Vec::with_capacity(terms.len());
        for (c, entries) in terms {
            if entries.len() != degree {
                return Err(Error::LengthMismatch(entries.len(), degree));
            }
            for b in &entries {
                if b.is_zero() {
                    return Err(Error::ZeroArgument);
                }
                if b.ctx() != ctx {
                    return Err(Error::Invalid(
                        "symbol entry over a different field context".into(),
                    ));
                }
            }
            let c = mod_m(c as i128, modulus);
            if c != 0 {
                out.push((c, entries));
            }
        }
        Ok(KSymbolSum {
            ctx: ctx.clone(),
            degree,
            modulus,
            terms: out,
        })
    }

    /// The empty sum of the given degree.
    pub fn zero(ctx: &FieldContext, degree: usize, modulus: u64) -> Result<KSymbolSum> {
        KSymbolSum::new(ctx, degree, modulus, Vec::new())
    }

    /// A degree-0 sum holding a single residue class mod `modulus`.
    pub fn constant(ctx: &FieldContext, modulus: u64, coeff: i64) -> Result<KSymbolSum> {
        KSymbolSum::new(ctx, 0, modulus, vec![(coeff, Vec::new())])
    }

    /// A single symbol with coefficient `coeff`; the context is taken from the
    /// first entry. Use [`KSymbolSum::constant`] for degree 0.
    pub fn from_entries(modulus: u64, coeff: i64, entries: Vec<RatFunc>) -> Result<KSymbolSum> {
        let first = entries.first().ok_or_else(|| {
            Error::Invalid("degree-0 sums need an explicit context; use constant()".into())
        })?;
        let ctx = first.ctx().clone();
        KSymbolSum::new(&ctx, entries.len(), modulus, vec![(coeff, entries)])
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The raw terms: (coefficient in `0..modulus`, entries).
    pub fn terms(&self) -> &[(u64, Vec<RatFunc>)] {
        &self.terms
    }

    /// True when the sum has no terms (the canonical zero representative).
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Formal sum. Panics on mismatched contexts; errors on mismatched degree
    /// or modulus.
    pub fn add(&self, other: &KSymbolSum) -> Result<KSymbolSum> {
        assert_eq!(self.ctx, other.ctx, "context mismatch");
        if self.degree != other.degree {
            return Err(Error::LengthMismatch(other.degree, self.degree));
        }
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(KSymbolSum {
            ctx: self.ctx.clone(),
            degree: self.degree,
            modulus: self.modulus,
            terms,
        })
    }

    /// Formal negation (coefficients map to m − c).
    pub fn neg(&self) -> KSymbolSum {
        self.scale(-1)
    }

    /// Formal difference.
    pub fn sub(&self, other: &KSymbolSum) -> Result<KSymbolSum> {
        self.add(&other.neg())
    }

    /// Formal integer scaling of every coefficient.
    pub fn scale(&self, k: i64) -> KSymbolSum {
        let terms = self
            .terms
            .iter()
            .map(|(c, en)| (mod_m(*c as i128 * k as i128, self.modulus), en.clone()))
            .filter(|(c, _)| *c != 0)
            .collect();
        KSymbolSum {
            ctx: self.ctx.clone(),
            degree: self.degree,
            modulus: self.modulus,
            terms,
        }
    }
}

impl fmt::Display for KSymbolSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 @ {}", self.modulus);
        }
        for (k, (c, entries)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if entries.is_empty() {
                write!(f, "{c}")?;
            } else {
                if *c != 1 {
                    write!(f, "{c}")?;
                }
                write!(f, "{{")?;
                for (i, b) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, "}}")?;
            }
        }
        write!(f, " @ {}", self.modulus)
    }
}

fn mod_m(c: i128, m: u64) -> u64 {
    let m = m as i128;
    (((c % m) + m) % m) as u64
}

/// Exponent r with m = p^r, if the modulus is a power of the characteristic.
fn p_power_exponent(m: u64, p: u64) -> Option<u32> {
    let mut m = m;
    let mut r = 0;
    while m % p == 0 {
        m /= p;
        r += 1;
    }
    if m == 1 && r >= 1 {
        Some(r)
    } else {
        None
    }
}

/// Splits off the monomial content of an entry: f = (Π x_j^{e_j}) · residual
/// where the residual has monomial-free numerator and denominator.
fn monomial_split(f: &RatFunc) -> (Vec<i64>, RatFunc) {
    let ctx = f.ctx();
    let mn = f.num().monomial_content().expect("entry is nonzero");
    let md = f.den().monomial_content().expect("denominator is nonzero");
    let n = ctx.nvars();
    let mut exps = vec![0i64; n];
    let mut any = false;
    for j in 0..n {
        let e = mn.get(j).copied().unwrap_or(0) as i64 - md.get(j).copied().unwrap_or(0) as i64;
        exps[j] = e;
        if e != 0 {
            any = true;
        }
    }
    if !any {
        return (exps, f.clone());
    }
    let mut mono = RatFunc::one(ctx);
    for (j, &e) in exps.iter().enumerate() {
        if e != 0 {
            let xe = RatFunc::var(ctx, j).pow(e).expect("variable is nonzero");
            mono = mono.mul(&xe);
        }
    }
    let residual = f.div(&mono).expect("monomial is nonzero");
    (exps, residual)
}

/// Rewrites a sum into its normal form.
///
/// Rules applied, in order per term: monomial content of each entry is split
/// off multilinearly (`{f·x^k, ...} = k{x, ...} + {f, ...}`); terms with an
/// entry equal to 1 are dropped; for p-power moduli, terms with any constant
/// entry are dropped (every constant of the prime field is a p^r-th power);
/// for odd moduli, terms containing the constant −1 are dropped (they are
/// 2-torsion); Steinberg terms with b_i + b_j = 1 are dropped; repeated
/// entries rewrite via `{a, a} = {−1, a}` with the transport sign; entries are
/// sorted with the antisymmetry sign; identical tuples merge and coefficients
/// reduce mod m. The result is a representative, not a decision procedure.
pub fn k_normalize(s: &KSymbolSum) -> KSymbolSum {
    let ctx = s.ctx.clone();
    let m = s.modulus;
    let p = ctx.p();
    let p_power = p_power_exponent(m, p).is_some();
    let drop_minus_one = p_power || m % 2 == 1;
    let minus_one = RatFunc::constant_i64(&ctx, -1);

    // Stage 1: multiplicative expansion of monomial content, slot by slot.
    let mut work: Vec<(u64, Vec<RatFunc>)> = s.terms.clone();
    for slot in 0..s.degree {
        let mut next = Vec::new();
        for (c, entries) in work {
            let (exps, residual) = monomial_split(&entries[slot]);
            if exps.iter().all(|&e| e == 0) {
                next.push((c, entries));
                continue;
            }
            for (j, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cc = mod_m(c as i128 * e as i128, m);
                if cc != 0 {
                    let mut en = entries.clone();
                    en[slot] = RatFunc::var(&ctx, j);
                    next.push((cc, en));
                }
            }
            if !residual.is_one() {
                let mut en = entries;
                en[slot] = residual;
                next.push((c, en));
            }
        }
        work = next;
    }

    // Stage 2: per-term rewriting, then merge.
    let mut merged: BTreeMap<Vec<RatFunc>, u64> = BTreeMap::new();
    'terms: for (c0, mut entries) in work {
        let mut sign_flips = 0usize;
        loop {
            if entries.iter().any(|e| e.is_one()) {
                continue 'terms;
            }
            if p_power && entries.iter().any(|e| e.as_constant().is_some()) {
                continue 'terms;
            }
            if drop_minus_one && entries.iter().any(|e| *e == minus_one) {
                continue 'terms;
            }
            for i in 0..entries.len() {
                for j in (i + 1)..entries.len() {
                    if entries[i].add(&entries[j]).is_one() {
                        continue 'terms; // Steinberg pair
                    }
                }
            }
            let mut pair = None;
            'search: for i in 0..entries.len() {
                for j in (i + 1)..entries.len() {
                    if entries[i] == entries[j] && entries[i] != minus_one {
                        pair = Some((i, j));
                        break 'search;
                    }
                }
            }
            match pair {
                None => break,
                Some((i, j)) => {
                    // {..a..a..} = (−1)^{j−i−1} {.., −1, a, ..}
                    sign_flips += j - i - 1;
                    entries.remove(j);
                    entries.insert(i, minus_one.clone());
                }
            }
        }
        let mut inversions = 0usize;
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                if entries[i] > entries[j] {
                    inversions += 1;
                }
            }
        }
        entries.sort();
        sign_flips += inversions;
        let c = if sign_flips % 2 == 0 {
            c0
        } else {
            mod_m(-(c0 as i128), m)
        };
        if c == 0 {
            continue;
        }
        let slot = merged.entry(entries).or_insert(0);
        *slot = mod_m(*slot as i128 + c as i128, m);
    }

    let terms = merged
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(en, c)| (c, en))
        .collect();
    KSymbolSum {
        ctx,
        degree: s.degree,
        modulus: m,
        terms,
    }
}

/// Tame residue at a divisor valuation, landing in degree n−1 over the
/// residue field.
///
/// Each entry is written as π^{k_i}·u_i with π the canonical uniformizer and
/// u_i a v-unit, the symbol is expanded multilinearly, repeated π entries
/// rewrite through `{π, π} = {−1, π}`, the π slot moves to the front with the
/// antisymmetry sign, and `∂{π, u_2, ..., u_n} = {ū_2, ..., ū_n}` is applied.
/// Subsets with no π contribute nothing.
pub fn k_residue(s: &KSymbolSum, v: &DivisorValuation) -> Result<KSymbolSum> {
    assert_eq!(v.ctx(), &s.ctx, "valuation context mismatch");
    let n = s.degree;
    if n == 0 {
        return Err(Error::Invalid(
            "degree-0 symbol sums have no residue".into(),
        ));
    }
    if n > MAX_RESIDUE_DEGREE {
        return Err(Error::TermLimit(n));
    }
    let m = s.modulus;
    let rctx = v.residue_ctx();
    let pi = v.uniformizer();
    let minus_one = RatFunc::constant_i64(&rctx, -1);
    let mut out_terms: Vec<(u64, Vec<RatFunc>)> = Vec::new();
    for (c, entries) in &s.terms {
        let mut vals = Vec::with_capacity(n);
        let mut units = Vec::with_capacity(n);
        for b in entries {
            let k = rf_valuation(b, v)?;
            let u = b.mul(&pi.pow(-k)?);
            vals.push(k);
            units.push(rf_reduce(&u, v)?);
        }
        for mask in 1u32..(1u32 << n) {
            let mut factor = *c as i128;
            let mut s_count = 0usize;
            let mut inversions = 0usize;
            for (i, &k) in vals.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    factor = factor * k as i128 % m as i128;
                    inversions += i - s_count;
                    s_count += 1;
                }
            }
            let base = mod_m(factor, m);
            if base == 0 {
                continue;
            }
            // Transport sign times (−1)^{s−1} from {π,π} = {−1,π} folding.
            let negate = (inversions + s_count - 1) % 2 == 1;
            let cc = if negate {
                mod_m(-(base as i128), m)
            } else {
                base
            };
            let mut rest = Vec::with_capacity(n - 1);
            for _ in 1..s_count {
                rest.push(minus_one.clone());
            }
            for (i, u) in units.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    rest.push(u.clone());
                }
            }
            out_terms.push((cc, rest));
        }
    }
    let raw = KSymbolSum {
        ctx: rctx,
        degree: n - 1,
        modulus: m,
        terms: out_terms,
    };
    Ok(k_normalize(&raw))
}

/// Specializes an unramified sum to the residue field of v (same degree).
///
/// Each entry splits as π^{k_i}·u_i; a term is admissible when every
/// coefficient·k_i vanishes mod m (the π-carrying expansion terms are then
/// formally zero), in which case it specializes to the reduced unit parts.
/// Any term with coefficient·k_i ≠ 0 mod m aborts with `RamifiedInput`
/// before cross-term cancellation is attempted.
pub fn k_specialize(s: &KSymbolSum, v: &DivisorValuation) -> Result<KSymbolSum> {
    assert_eq!(v.ctx(), &s.ctx, "valuation context mismatch");
    let m = s.modulus;
    let rctx = v.residue_ctx();
    let pi = v.uniformizer();
    let mut out_terms = Vec::new();
    for (c, entries) in &s.terms {
        let mut reduced = Vec::with_capacity(entries.len());
        for b in entries {
            let k = rf_valuation(b, v)?;
            if k != 0 && mod_m(*c as i128 * k as i128, m) != 0 {
                return Err(Error::RamifiedInput);
            }
            let u = b.mul(&pi.pow(-k)?);
            reduced.push(rf_reduce(&u, v)?);
        }
        out_terms.push((*c, reduced));
    }
    let raw = KSymbolSum {
        ctx: rctx,
        degree: s.degree,
        modulus: m,
        terms: out_terms,
    };
    Ok(k_normalize(&raw))
}

/// The dlog map `c{b_1, ..., b_n} ↦ c · dlog b_1 ∧ ... ∧ dlog b_n`, defined
/// when the modulus equals the characteristic (errors with `ModulusNotP`
/// otherwise). Degree-0 sums map to constant 0-forms. By the motivic
/// comparison this map is injective, so it decides equality mod p.
pub fn k_dlog(s: &KSymbolSum) -> Result<DiffForm> {
    let p = s.ctx.p();
    if s.modulus != p {
        return Err(Error::ModulusNotP { p, m: s.modulus });
    }
    let mut acc = DiffForm::zero(&s.ctx, s.degree);
    for (c, entries) in &s.terms {
        let a = RatFunc::constant(&s.ctx, *c);
        acc = acc.add(&form_dlog(&a, entries)?);
    }
    Ok(acc)
}

/// Outcome of a zero test, with a replayable certificate on definite answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Zero(ZeroReason),
    NonZero(NonZeroWitness),
    Unknown(String),
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero(_))
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, Verdict::NonZero(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Zero(r) => write!(f, "zero ({r})"),
            Verdict::NonZero(w) => write!(f, "nonzero ({w})"),
            Verdict::Unknown(msg) => write!(f, "unknown ({msg})"),
        }
    }
}

/// Why a sum is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroReason {
    /// The rewriting normal form is empty (after `divisions` exact divisions
    /// by p when the modulus is a p-power).
    EmptyNormalForm { divisions: usize },
    /// p-power modulus: after `divisions` exact divisions by p the modulus is
    /// p and the dlog image vanishes, which decides equality mod p.
    DlogVanishes { divisions: usize },
    /// All entries are constants of the prime field and the class group they
    /// generate there is trivial on this sum.
    ConstantField,
    /// Witt symbols, no entries: the leading component is `g^p - g` and the
    /// remaining slots reduce to zero after the matching coboundary move.
    ArtinSchreierSolvable { solution: RatFunc },
    /// Witt symbols: every initial pole level at the place dissolved during
    /// peeling, so the class is tamely ramified there (`top_level` records the
    /// largest pole order the peel started from).
    TameRepresentation { top_level: u32 },
    /// Witt symbols: tamely ramified with vanishing residue at the place.
    UnramifiedClass,
    /// Witt symbols: unramified at all `places` candidate places over the
    /// distinguished variable (finite centers and infinity), hence constant
    /// there, and a good-place specialization vanishes recursively.
    LocalGlobalChain { places: u32 },
}

impl fmt::Display for ZeroReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroReason::EmptyNormalForm { divisions: 0 } => write!(f, "empty normal form"),
            ZeroReason::EmptyNormalForm { divisions } => {
                write!(f, "empty normal form after {divisions} division(s) by p")
            }
            ZeroReason::DlogVanishes { divisions: 0 } => write!(f, "dlog image vanishes"),
            ZeroReason::DlogVanishes { divisions } => {
                write!(f, "dlog image vanishes after {divisions} division(s) by p")
            }
            ZeroReason::ConstantField => write!(f, "constant entries land in a trivial class"),
            ZeroReason::ArtinSchreierSolvable { solution } => {
                write!(f, "leading component splits as ({solution})^p - ({solution})")
            }
            ZeroReason::TameRepresentation { top_level: 0 } => {
                write!(f, "tamely ramified (no pole levels)")
            }
            ZeroReason::TameRepresentation { top_level } => {
                write!(f, "tamely ramified (pole levels up to {top_level} dissolved)")
            }
            ZeroReason::UnramifiedClass => write!(f, "tame with vanishing residue"),
            ZeroReason::LocalGlobalChain { places } => {
                write!(
                    f,
                    "unramified at all {places} candidate place(s) and a specialization vanishes"
                )
            }
        }
    }
}

/// Replayable evidence that a sum is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonZeroWitness {
    /// Degree 0: the merged coefficient is a nonzero residue mod m.
    CoefficientNonZero { value: u64 },
    /// p-power modulus: after `divisions` exact divisions by p, the mod-p
    /// dlog image is a nonzero differential form.
    DlogNonZero { divisions: usize },
    /// All entries constant, degree 1: the discrete-log class mod
    /// gcd(m, p−1) is nonzero.
    ConstantClassNonZero { class: u64, order: u64 },
    /// The tame residue at the named valuation is nonzero.
    ResidueNonZero {
        valuation: DivisorValuation,
        inner: Box<NonZeroWitness>,
    },
    /// Witt symbols: a pole level survives peeling at the valuation, so the
    /// class is wildly ramified (hence nonzero) with the named filtration
    /// level.
    WildClass {
        valuation: DivisorValuation,
        level: u32,
    },
    /// Witt symbols over the prime field, no entries: a Witt vector of
    /// constants whose class mod coboundaries is the nonzero residue p-adic
    /// digit vector recorded here.
    ConstantWittClass { components: Vec<u64> },
    /// Witt symbols, no entries: the leading component has no Artin–Schreier
    /// splitting, so the length-1 class is already nonzero.
    ArtinSchreierObstruction { component: RatFunc },
    /// Witt symbols: the projection to the first `keep` Witt slots is nonzero
    /// (projections are homomorphisms, so the full class is nonzero).
    TruncationNonZero {
        keep: usize,
        inner: Box<NonZeroWitness>,
    },
    /// Witt symbols: after `stage` exact first-slot reductions the shortened
    /// class is nonzero, and each reduction preserved the class.
    WittTowerNonZero {
        stage: usize,
        inner: Box<NonZeroWitness>,
    },
    /// Witt symbols: the sum is unramified at the valuation and its
    /// specialization there is nonzero.
    SpecializationNonZero {
        valuation: DivisorValuation,
        inner: Box<NonZeroWitness>,
    },
}

impl fmt::Display for NonZeroWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonZeroWitness::CoefficientNonZero { value } => {
                write!(f, "coefficient {value} is nonzero")
            }
            NonZeroWitness::DlogNonZero { divisions: 0 } => write!(f, "dlog image is nonzero"),
            NonZeroWitness::DlogNonZero { divisions } => {
                write!(f, "dlog image is nonzero after {divisions} division(s) by p")
            }
            NonZeroWitness::ConstantClassNonZero { class, order } => {
                write!(f, "constant class {class} is nonzero mod {order}")
            }
            NonZeroWitness::ResidueNonZero { valuation, inner } => {
                write!(f, "residue {valuation} is nonzero: {inner}")
            }
            NonZeroWitness::WildClass { valuation, level } => {
                write!(f, "wildly ramified {valuation} at filtration level {level}")
            }
            NonZeroWitness::ConstantWittClass { components } => {
                write!(f, "constant Witt class (")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ") is nonzero")
            }
            NonZeroWitness::ArtinSchreierObstruction { component } => {
                write!(f, "{component} has no root of y^p - y = {component}")
            }
            NonZeroWitness::TruncationNonZero { keep, inner } => {
                write!(f, "projection to the first {keep} Witt slot(s) is nonzero: {inner}")
            }
            NonZeroWitness::WittTowerNonZero { stage, inner } => {
                write!(
                    f,
                    "nonzero after {stage} exact first-slot reduction(s): {inner}"
                )
            }
            NonZeroWitness::SpecializationNonZero { valuation, inner } => {
                write!(f, "specialization {valuation} is nonzero: {inner}")
            }
        }
    }
}

/// Three-valued zero test.
///
/// Complete for p-power moduli whenever the dlog/p-division chain decides
/// (always for m = p), for degree 0, and for all-constant entries over small
/// primes; for moduli coprime to p it searches tame residues at coordinate
/// centers and infinity recursively. All other cases report `Unknown`.
pub fn k_is_zero(s: &KSymbolSum) -> Verdict {
    match is_zero_inner(s, 0) {
        Ok(v) => v,
        Err(e) => Verdict::Unknown(format!("zero test aborted: {e}")),
    }
}

fn is_zero_inner(s: &KSymbolSum, depth: usize) -> Result<Verdict> {
    if depth > MAX_ZERO_DEPTH {
        return Ok(Verdict::Unknown("recursion depth limit reached".into()));
    }
    let s = k_normalize(s);
    if s.terms.is_empty() {
        return Ok(Verdict::Zero(ZeroReason::EmptyNormalForm { divisions: 0 }));
    }
    if s.degree == 0 {
        let value = s.terms[0].0;
        return Ok(Verdict::NonZero(NonZeroWitness::CoefficientNonZero {
            value,
        }));
    }
    if s
        .terms
        .iter()
        .all(|(_, en)| en.iter().all(|b| b.as_constant().is_some()))
    {
        return constant_entries_verdict(&s);
    }
    let p = s.ctx.p();
    if p_power_exponent(s.modulus, p).is_some() {
        return p_power_verdict(&s);
    }
    if s.modulus % p == 0 {
        return Ok(Verdict::Unknown(
            "modulus mixes the characteristic with a coprime factor".into(),
        ));
    }
    coprime_verdict(&s, depth)
}

/// Divisibility-chain decision for p-power moduli. The chain is sound in both
/// directions because multiplication by p embeds the mod-p^{r−1} group into
/// the mod-p^r group (symbol groups of characteristic-p fields have no
/// p-torsion).
fn p_power_verdict(s: &KSymbolSum) -> Result<Verdict> {
    let p = s.ctx.p();
    let mut cur = s.clone();
    let mut divisions = 0usize;
    loop {
        if cur.terms.is_empty() {
            return Ok(Verdict::Zero(ZeroReason::EmptyNormalForm { divisions }));
        }
        if cur.modulus == p {
            return Ok(if k_dlog(&cur)?.is_zero() {
                Verdict::Zero(ZeroReason::DlogVanishes { divisions })
            } else {
                Verdict::NonZero(NonZeroWitness::DlogNonZero { divisions })
            });
        }
        if cur.terms.iter().all(|(c, _)| c % p == 0) {
            cur = k_normalize(&KSymbolSum {
                ctx: cur.ctx.clone(),
                degree: cur.degree,
                modulus: cur.modulus / p,
                terms: cur
                    .terms
                    .iter()
                    .map(|(c, en)| (c / p, en.clone()))
                    .collect(),
            });
            divisions += 1;
            continue;
        }
        let bar = k_normalize(&KSymbolSum {
            ctx: cur.ctx.clone(),
            degree: cur.degree,
            modulus: p,
            terms: cur
                .terms
                .iter()
                .map(|(c, en)| (c % p, en.clone()))
                .filter(|(c, _)| *c != 0)
                .collect(),
        });
        if !k_dlog(&bar)?.is_zero() {
            return Ok(Verdict::NonZero(NonZeroWitness::DlogNonZero { divisions }));
        }
        return Ok(Verdict::Unknown(
            "mod-p image vanishes but the coefficients carry no syntactic p-divisibility witness"
                .into(),
        ));
    }
}

/// Decision for sums all of whose entries are constants of the prime field.
/// Degree ≥ 2 classes vanish (they come from the prime field, whose symbol
/// groups vanish in degree ≥ 2); degree-1 classes reduce to discrete
/// logarithms in F_p^* mod gcd(m, p−1).
fn constant_entries_verdict(s: &KSymbolSum) -> Result<Verdict> {
    if s.degree >= 2 {
        return Ok(Verdict::Zero(ZeroReason::ConstantField));
    }
    match constant_class(s)? {
        None => Ok(Verdict::Unknown(
            "prime too large for the discrete-log base case".into(),
        )),
        Some((0, _)) => Ok(Verdict::Zero(ZeroReason::ConstantField)),
        Some((class, order)) => Ok(Verdict::NonZero(NonZeroWitness::ConstantClassNonZero {
            class,
            order,
        })),
    }
}

/// The class of a degree-1 all-constant sum in F_p^* / (F_p^*)^m ≅
/// Z/gcd(m, p−1), as (class, gcd). `None` when p exceeds the discrete-log cap.
fn constant_class(s: &KSymbolSum) -> Result<Option<(u64, u64)>> {
    let p = s.ctx.p();
    let g = s.modulus.gcd(&(p - 1));
    if g == 1 {
        return Ok(Some((0, 1)));
    }
    if p > DLOG_CAP {
        return Ok(None);
    }
    let gen = primitive_root(p);
    let mut logs = vec![0u64; p as usize];
    let mut acc = 1u64;
    for k in 0..(p - 1) {
        logs[acc as usize] = k;
        acc = acc * gen % p;
    }
    let mut class: u128 = 0;
    for (c, entries) in &s.terms {
        let u = entries[0]
            .as_constant()
            .expect("caller checked constant entries");
        class = (class + *c as u128 * logs[u as usize] as u128) % g as u128;
    }
    Ok(Some((class as u64, g)))
}

fn modpow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m as u128;
        }
        bb = bb * bb % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut n = p - 1;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            factors.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    'cand: for cand in 2..p {
        for &q in &factors {
            if modpow(cand, (p - 1) / q, p) == 1 {
                continue 'cand;
            }
        }
        return cand;
    }
    1 // p = 2: the trivial group
}

/// Residue search for moduli coprime to the characteristic.
fn coprime_verdict(s: &KSymbolSum, depth: usize) -> Result<Verdict> {
    let ctx = &s.ctx;
    let p = ctx.p();
    for k in 0..ctx.nvars() {
        let involved = s.terms.iter().any(|(_, en)| {
            en.iter().any(|b| {
                b.num().degree_in(k).unwrap_or(0) > 0 || b.den().degree_in(k).unwrap_or(0) > 0
            })
        });
        if !involved {
            continue;
        }
        let mut places = Vec::new();
        for c in 0..p.min(CENTER_SCAN_CAP) {
            let vanishes = s.terms.iter().any(|(_, en)| {
                en.iter().any(|b| {
                    b.num().subst_const(k, c).is_zero() || b.den().subst_const(k, c).is_zero()
                })
            });
            if vanishes {
                places.push(DivisorValuation::finite(ctx, k, c)?);
            }
        }
        places.push(DivisorValuation::infinity_in(ctx, k)?);
        for v in places {
            let r = k_residue(s, &v)?;
            if let Verdict::NonZero(w) = is_zero_inner(&r, depth + 1)? {
                return Ok(Verdict::NonZero(NonZeroWitness::ResidueNonZero {
                    valuation: v,
                    inner: Box::new(w),
                }));
            }
        }
    }
    Ok(Verdict::Unknown(
        "nonempty normal form with no nonzero residue found".into(),
    ))
}

/// Independently replays a `NonZero` certificate against a sum. Returns true
/// exactly when every step of the witness checks out by recomputation.
pub fn k_verify_witness(s: &KSymbolSum, w: &NonZeroWitness) -> Result<bool> {
    match w {
        NonZeroWitness::CoefficientNonZero { value } => {
            let n = k_normalize(s);
            Ok(n.degree == 0 && n.terms.len() == 1 && n.terms[0].0 == *value && *value != 0)
        }
        NonZeroWitness::DlogNonZero { divisions } => {
            let p = s.ctx.p();
            if p_power_exponent(s.modulus, p).is_none() {
                return Ok(false);
            }
            let mut cur = k_normalize(s);
            for _ in 0..*divisions {
                if cur.modulus == p || !cur.terms.iter().all(|(c, _)| c % p == 0) {
                    return Ok(false);
                }
                cur = k_normalize(&KSymbolSum {
                    ctx: cur.ctx.clone(),
                    degree: cur.degree,
                    modulus: cur.modulus / p,
                    terms: cur
                        .terms
                        .iter()
                        .map(|(c, en)| (c / p, en.clone()))
                        .collect(),
                });
            }
            let bar = k_normalize(&KSymbolSum {
                ctx: cur.ctx.clone(),
                degree: cur.degree,
                modulus: p,
                terms: cur
                    .terms
                    .iter()
                    .map(|(c, en)| (c % p, en.clone()))
                    .filter(|(c, _)| *c != 0)
                    .collect(),
            });
            Ok(!k_dlog(&bar)?.is_zero())
        }
        NonZeroWitness::ConstantClassNonZero { class, order } => {
            let n = k_normalize(s);
            if n.degree != 1
                || !n
                    .terms
                    .iter()
                    .all(|(_, en)| en.iter().all(|b| b.as_constant().is_some()))
            {
                return Ok(false);
            }
            match constant_class(&n)? {
                Some((c, g)) => Ok(c == *class && g == *order && c != 0),
                None => Ok(false),
            }
        }
        NonZeroWitness::ResidueNonZero { valuation, inner } => {
            let r = k_residue(s, valuation)?;
            k_verify_witness(&r, inner)
        }
        NonZeroWitness::WildClass { .. }
        | NonZeroWitness::ConstantWittClass { .. }
        | NonZeroWitness::ArtinSchreierObstruction { .. }
        | NonZeroWitness::TruncationNonZero { .. }
        | NonZeroWitness::WittTowerNonZero { .. }
        | NonZeroWitness::SpecializationNonZero { .. } => Err(Error::Invalid(
            "witness kind applies to Witt symbols, not Milnor symbols".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Center;
    use crate::forms::is_logarithmic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64, vars: &[&str]) -> FieldContext {
        FieldContext::new(p, vars).unwrap()
    }

    fn x(c: &FieldContext, k: usize) -> RatFunc {
        RatFunc::var(c, k)
    }

    fn cst(c: &FieldContext, v: i64) -> RatFunc {
        RatFunc::constant_i64(c, v)
    }

    fn sym(m: u64, coeff: i64, entries: Vec<RatFunc>) -> KSymbolSum {
        KSymbolSum::from_entries(m, coeff, entries).unwrap()
    }

    #[test]
    fn one_entries_vanish() {
        let c = ctx(5, &["x"]);
        let s = sym(7, 1, vec![RatFunc::one(&c), x(&c, 0)]);
        assert!(k_normalize(&s).is_empty());
    }

    #[test]
    fn steinberg_pairs_vanish() {
        let c = ctx(3, &["x"]);
        let one_minus_x = cst(&c, 1).sub(&x(&c, 0));
        let s = sym(3, 1, vec![x(&c, 0), one_minus_x]);
        assert!(k_normalize(&s).is_empty());
    }

    #[test]
    fn coefficients_reduce_mod_m() {
        let c = ctx(7, &["x"]);
        let s = sym(12, 13, vec![x(&c, 0)]);
        let n = k_normalize(&s);
        assert_eq!(n.terms(), &[(1, vec![x(&c, 0)])]);
    }

    #[test]
    fn entries_sort_with_antisymmetry_sign() {
        let c = ctx(7, &["x", "y"]);
        let swapped = sym(7, 1, vec![x(&c, 1), x(&c, 0)]);
        let straight = sym(7, 1, vec![x(&c, 0), x(&c, 1)]).scale(-1);
        assert_eq!(k_normalize(&swapped), k_normalize(&straight));
    }

    #[test]
    fn identical_tuples_merge() {
        let c = ctx(5, &["x", "y"]);
        let s = sym(4, 1, vec![x(&c, 0), x(&c, 1)]);
        let doubled = s.add(&s).unwrap();
        let n = k_normalize(&doubled);
        assert_eq!(n.terms().len(), 1);
        assert_eq!(n, k_normalize(&s.scale(2)));
    }

    #[test]
    fn repeated_entries_char2_vanish() {
        let c = ctx(2, &["x"]);
        for m in [2u64, 4, 8] {
            let s = sym(m, 1, vec![x(&c, 0), x(&c, 0)]);
            assert!(k_normalize(&s).is_empty(), "m = {m}");
        }
    }

    #[test]
    fn repeated_entries_odd_char_rewrite_to_minus_one() {
        let c = ctx(3, &["x"]);
        // m even and coprime to p: the −1 entry survives.
        let s = sym(2, 1, vec![x(&c, 0), x(&c, 0)]);
        let n = k_normalize(&s);
        assert_eq!(n.terms(), &[(1, vec![cst(&c, -1), x(&c, 0)])]);
        // Odd modulus: 2-torsion dies.
        let s3 = sym(9, 1, vec![x(&c, 0), x(&c, 0)]);
        assert!(k_normalize(&s3).is_empty());
    }

    #[test]
    fn monomial_content_splits_multilinearly() {
        let c = ctx(5, &["x", "y", "z"]);
        let f = x(&c, 0).pow(2).unwrap().mul(&x(&c, 1)); // x^2 y
        let s = sym(12, 1, vec![f, x(&c, 2)]);
        let expected = sym(12, 2, vec![x(&c, 0), x(&c, 2)])
            .add(&sym(12, 1, vec![x(&c, 1), x(&c, 2)]))
            .unwrap();
        assert_eq!(k_normalize(&s), k_normalize(&expected));
    }

    #[test]
    fn residue_of_uniformizer_and_unit() {
        let c = ctx(3, &["t", "x"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let rctx = v.residue_ctx();
        // ∂{t, x} = {x̄}; ∂{t, x + t} = {x̄} as well.
        for second in [x(&c, 1), x(&c, 1).add(&x(&c, 0))] {
            let s = sym(3, 1, vec![x(&c, 0), second]);
            let r = k_residue(&s, &v).unwrap();
            assert_eq!(r.terms(), &[(1, vec![RatFunc::var(&rctx, 0)])]);
        }
    }

    #[test]
    fn residue_kills_unit_symbols() {
        let c = ctx(3, &["t", "x"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let u1 = cst(&c, 1).add(&x(&c, 0)); // 1 + t
        let u2 = x(&c, 1);
        let s = sym(9, 1, vec![u1, u2]);
        assert!(k_residue(&s, &v).unwrap().is_empty());
    }

    #[test]
    fn residue_of_t_minus_t_cancels_formally() {
        // {t, −t} = 0 identically, so its residue must normalize away
        // even with an even modulus coprime to p.
        let c = ctx(3, &["t"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let s = sym(4, 1, vec![x(&c, 0), x(&c, 0).neg()]);
        assert!(k_residue(&s, &v).unwrap().is_empty());
    }

    #[test]
    fn residue_of_pi_pi_is_minus_one_class() {
        let c = ctx(3, &["t"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let rctx = v.residue_ctx();
        let s = sym(4, 1, vec![x(&c, 0), x(&c, 0)]);
        let r = k_residue(&s, &v).unwrap();
        // ∂{t,t} = −{−1} = 3{−1} mod 4; −1 = 2 in F_3.
        assert_eq!(r.terms(), &[(3, vec![RatFunc::constant_i64(&rctx, -1)])]);
    }

    /// Char-2 discriminant of the general Weierstrass quintuple: at a_1 = 0 it
    /// reduces to a_3^4, so {a_1^12 / Δ} has residue 12 ≡ 4 mod 8 at a_1 = 0.
    #[test]
    fn residue_of_picard_generator_power() {
        let c = ctx(2, &["a1", "a2", "a3", "a4", "a6"]);
        let (a1, a2, a3, a4, a6) = (x(&c, 0), x(&c, 1), x(&c, 2), x(&c, 3), x(&c, 4));
        let b2 = a1.mul(&a1);
        let b4 = a1.mul(&a3);
        let b6 = a3.mul(&a3);
        let b8 = a1
            .mul(&a1)
            .mul(&a6)
            .add(&a1.mul(&a3).mul(&a4))
            .add(&a2.mul(&a3).mul(&a3))
            .add(&a4.mul(&a4));
        let delta = b2
            .mul(&b2)
            .mul(&b8)
            .add(&b6.mul(&b6))
            .add(&b2.mul(&b4).mul(&b6));
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        assert_eq!(rf_valuation(&delta, &v).unwrap(), 0);
        let s = sym(8, 1, vec![a1.pow(12).unwrap().div(&delta).unwrap()]);
        let r = k_residue(&s, &v).unwrap();
        assert_eq!(r.degree(), 0);
        assert_eq!(r.terms(), &[(4, vec![])]);
    }

    #[test]
    fn residue_rejects_degree_zero() {
        let c = ctx(3, &["t"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let s = KSymbolSum::constant(&c, 5, 2).unwrap();
        assert!(matches!(k_residue(&s, &v), Err(Error::Invalid(_))));
    }

    #[test]
    fn residue_at_infinity_counts_degrees() {
        let c = ctx(5, &["t"]);
        let v = DivisorValuation::infinity_in(&c, 0).unwrap();
        // v_∞(t) = −1, so ∂_∞{t} = −1·{} = m−1.
        let s = sym(7, 1, vec![x(&c, 0)]);
        let r = k_residue(&s, &v).unwrap();
        assert_eq!(r.terms(), &[(6, vec![])]);
    }

    #[test]
    fn specialize_ignores_absent_variable() {
        let c = ctx(5, &["t", "x", "y"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let rctx = v.residue_ctx();
        let s = sym(5, 1, vec![x(&c, 1), x(&c, 2)]);
        let r = k_specialize(&s, &v).unwrap();
        let expected = KSymbolSum::from_entries(
            5,
            1,
            vec![RatFunc::var(&rctx, 0), RatFunc::var(&rctx, 1)],
        )
        .unwrap();
        assert_eq!(r, k_normalize(&expected));
    }

    #[test]
    fn specialize_errors_on_ramified_term() {
        let c = ctx(5, &["t", "x", "y"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let s = sym(5, 1, vec![x(&c, 0).mul(&x(&c, 1)), x(&c, 2)]);
        assert_eq!(k_specialize(&s, &v), Err(Error::RamifiedInput));
    }

    #[test]
    fn specialize_allows_ramification_killed_by_coefficient() {
        let c = ctx(5, &["t", "x", "y"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let rctx = v.residue_ctx();
        // 2{t^2 x, y} mod 4: the π parts carry coefficient 2·2 ≡ 0.
        let f = x(&c, 0).pow(2).unwrap().mul(&x(&c, 1));
        let s = sym(4, 2, vec![f, x(&c, 2)]);
        let r = k_specialize(&s, &v).unwrap();
        let expected = KSymbolSum::from_entries(
            4,
            2,
            vec![RatFunc::var(&rctx, 0), RatFunc::var(&rctx, 1)],
        )
        .unwrap();
        assert_eq!(r, k_normalize(&expected));
    }

    #[test]
    fn specialize_reduces_units_then_normalizes() {
        let c = ctx(5, &["t", "x"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        // {1 + t, x} at t = 0 becomes {1, x̄} = 0.
        let s = sym(5, 1, vec![cst(&c, 1).add(&x(&c, 0)), x(&c, 1)]);
        assert!(k_specialize(&s, &v).unwrap().is_empty());
    }

    #[test]
    fn dlog_of_coordinate_symbol() {
        let c = ctx(3, &["x", "y"]);
        let s = sym(3, 1, vec![x(&c, 0), x(&c, 1)]);
        let expected = form_dlog(&RatFunc::one(&c), &[x(&c, 0), x(&c, 1)]).unwrap();
        assert_eq!(k_dlog(&s).unwrap(), expected);
    }

    #[test]
    fn dlog_of_steinberg_symbol_vanishes() {
        let c = ctx(3, &["x"]);
        let one_minus_x = cst(&c, 1).sub(&x(&c, 0));
        let s = sym(3, 1, vec![x(&c, 0), one_minus_x]);
        assert!(k_dlog(&s).unwrap().is_zero());
    }

    #[test]
    fn dlog_of_square_vanishes_in_char_two() {
        let c = ctx(2, &["x", "y"]);
        let s = sym(2, 1, vec![x(&c, 0).pow(2).unwrap(), x(&c, 1)]);
        assert!(k_dlog(&s).unwrap().is_zero());
    }

    #[test]
    fn dlog_requires_modulus_p() {
        let c = ctx(3, &["x"]);
        let s = sym(9, 1, vec![x(&c, 0)]);
        assert_eq!(k_dlog(&s), Err(Error::ModulusNotP { p: 3, m: 9 }));
    }

    #[test]
    fn dlog_commutes_with_normalization() {
        let c = ctx(3, &["x", "y"]);
        let f = x(&c, 0).pow(2).unwrap().mul(&x(&c, 1)); // x^2 y
        let g = x(&c, 0).add(&x(&c, 1));
        let s = sym(3, 2, vec![f, g]);
        let n = k_normalize(&s);
        assert_eq!(k_dlog(&s).unwrap(), k_dlog(&n).unwrap());
    }

    #[test]
    fn is_zero_empty_sum() {
        let c = ctx(3, &["x"]);
        let s = KSymbolSum::zero(&c, 1, 3).unwrap();
        assert_eq!(
            k_is_zero(&s),
            Verdict::Zero(ZeroReason::EmptyNormalForm { divisions: 0 })
        );
    }

    #[test]
    fn is_zero_repeated_entry_mod_two() {
        let c = ctx(2, &["x"]);
        let s = sym(2, 1, vec![x(&c, 0), x(&c, 0)]);
        assert!(k_is_zero(&s).is_zero());
    }

    #[test]
    fn is_zero_square_mod_four_is_nonzero() {
        let c = ctx(2, &["x"]);
        let s = sym(4, 1, vec![x(&c, 0).pow(2).unwrap()]);
        let v = k_is_zero(&s);
        let Verdict::NonZero(w) = &v else {
            panic!("expected NonZero, got {v:?}");
        };
        assert_eq!(w, &NonZeroWitness::DlogNonZero { divisions: 1 });
        assert!(k_verify_witness(&s, w).unwrap());
    }

    #[test]
    fn is_zero_degree_zero_constant() {
        let c = ctx(2, &["x"]);
        let s = KSymbolSum::constant(&c, 8, 12).unwrap();
        let v = k_is_zero(&s);
        assert_eq!(
            v,
            Verdict::NonZero(NonZeroWitness::CoefficientNonZero { value: 4 })
        );
        let Verdict::NonZero(w) = &v else { unreachable!() };
        assert!(k_verify_witness(&s, w).unwrap());
    }

    #[test]
    fn is_zero_coprime_modulus_uses_residues() {
        let c = ctx(2, &["x"]);
        let s = sym(3, 1, vec![x(&c, 0)]);
        let v = k_is_zero(&s);
        let Verdict::NonZero(w) = &v else {
            panic!("expected NonZero, got {v:?}");
        };
        assert!(k_verify_witness(&s, w).unwrap());
        match w {
            NonZeroWitness::ResidueNonZero { valuation, inner } => {
                assert_eq!(valuation.center(), Center::Finite(0));
                assert!(matches!(
                    **inner,
                    NonZeroWitness::CoefficientNonZero { value: 1 }
                ));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn is_zero_constant_entries() {
        let c5 = ctx(5, &[]);
        // 4 = 2^2 is a square in F_5 but not a fourth power.
        let sq = KSymbolSum::from_entries(2, 1, vec![cst(&c5, 4)]).unwrap();
        assert_eq!(k_is_zero(&sq), Verdict::Zero(ZeroReason::ConstantField));
        let fourth = KSymbolSum::from_entries(4, 1, vec![cst(&c5, 4)]).unwrap();
        let v = k_is_zero(&fourth);
        let Verdict::NonZero(w) = &v else {
            panic!("expected NonZero, got {v:?}");
        };
        assert_eq!(w, &NonZeroWitness::ConstantClassNonZero { class: 2, order: 4 });
        assert!(k_verify_witness(&fourth, w).unwrap());
        // Degree ≥ 2 symbols from the prime field vanish.
        let cx = ctx(5, &["x"]);
        let deg2 = KSymbolSum::from_entries(4, 1, vec![cst(&cx, 2), cst(&cx, 3)]).unwrap();
        assert_eq!(k_is_zero(&deg2), Verdict::Zero(ZeroReason::ConstantField));
    }

    #[test]
    fn is_zero_mixed_modulus_is_unknown() {
        let c = ctx(2, &["x"]);
        let s = sym(6, 1, vec![x(&c, 0)]);
        assert!(k_is_zero(&s).is_unknown());
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let c = ctx(2, &["x"]);
        let s = sym(4, 1, vec![x(&c, 0).pow(2).unwrap()]);
        let bogus = NonZeroWitness::DlogNonZero { divisions: 0 };
        assert!(!k_verify_witness(&s, &bogus).unwrap());
    }

    fn random_poly(
        rng: &mut ChaCha8Rng,
        c: &FieldContext,
        unit_at_t0: bool,
    ) -> RatFunc {
        let p = c.p();
        loop {
            let mut f = if unit_at_t0 {
                RatFunc::constant(c, 1 + rng.gen_range(0..p - 1))
            } else {
                RatFunc::constant(c, rng.gen_range(0..p))
            };
            for k in 0..c.nvars() {
                for e in 1..=2u32 {
                    if rng.gen_bool(0.4) {
                        let coef = RatFunc::constant(c, rng.gen_range(0..p));
                        f = f.add(&coef.mul(&RatFunc::var(c, k).pow(e as i64).unwrap()));
                    }
                }
            }
            if !f.is_zero() && (!unit_at_t0 || !f.num().subst_const(0, 0).is_zero()) {
                return f;
            }
        }
    }

    #[test]
    fn residue_is_additive_and_kills_unit_products() {
        let c = ctx(3, &["t", "x"]);
        let v = DivisorValuation::finite(&c, 0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..200 {
            let m = if trial % 2 == 0 { 9 } else { 5 };
            // Products of v-units have zero residue.
            let u1 = random_poly(&mut rng, &c, true);
            let u2 = random_poly(&mut rng, &c, true);
            let units = sym(m, 1 + (trial % 3) as i64, vec![u1.clone(), u2.clone()]);
            assert!(k_residue(&units, &v).unwrap().is_empty(), "trial {trial}");
            // Additivity on sums with mixed ramification.
            let f = x(&c, 0).pow((trial % 3) as i64 + 1).unwrap().mul(&u1);
            let s1 = sym(m, 1, vec![f, u2.clone()]);
            let s2 = sym(m, 2, vec![u2, x(&c, 0)]);
            let both = s1.add(&s2).unwrap();
            let lhs = k_residue(&both, &v).unwrap();
            let rhs = k_residue(&s1, &v)
                .unwrap()
                .add(&k_residue(&s2, &v).unwrap())
                .unwrap();
            assert_eq!(lhs, k_normalize(&rhs), "trial {trial}");
        }
    }

    #[test]
    fn dlog_images_are_logarithmic() {
        let c = ctx(3, &["t", "x"]);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..25 {
            let f = random_poly(&mut rng, &c, false);
            let g = random_poly(&mut rng, &c, false);
            if f.is_zero() || g.is_zero() {
                continue;
            }
            let s = sym(3, 1, vec![f, g]);
            let form = k_dlog(&s).unwrap();
            assert!(is_logarithmic(&form));
        }
    }

    #[test]
    fn zero_mod_p_implies_zero_residues() {
        let c = ctx(3, &["t", "x"]);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let f = random_poly(&mut rng, &c, false);
            let g = random_poly(&mut rng, &c, false);
            if f.is_zero() || g.is_zero() {
                continue;
            }
            // {f, g} + {g, f} normalizes to zero; so does {f^3, g} − 3{f, g}.
            let s = sym(3, 1, vec![f.clone(), g.clone()])
                .add(&sym(3, 1, vec![g.clone(), f.clone()]))
                .unwrap();
            assert!(k_is_zero(&s).is_zero());
            for v in [
                DivisorValuation::finite(&c, 0, 0).unwrap(),
                DivisorValuation::infinity_in(&c, 1).unwrap(),
            ] {
                let r = k_residue(&s, &v).unwrap();
                assert!(k_is_zero(&r).is_zero());
            }
        }
    }
}
