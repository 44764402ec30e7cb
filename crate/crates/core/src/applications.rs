//! Verification battery over the moduli of elliptic curves.
//!
//! This module packages the Weierstrass bookkeeping (`b`/`c` quantities,
//! discriminant, `j`-invariant), the characteristic-two coordinates on the
//! locus `a1 != 0`, the map `mu` from mod-2 Milnor classes into
//! Witt-coefficient classes, membership in the fiber-product group `J`, a
//! gluing test along the Artin-Schreier cover of the affine line, and
//! reproducible check batteries over small prime fields.
//!
//! Every battery check that rests on a zero/nonzero verdict audits itself:
//! nonzero verdicts are re-verified through the certificate validators
//! ([`h_verify_witness`], [`k_verify_witness`]) and zero verdicts are
//! replayed where the certificate is self-contained.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_ratfunc, Bindings};
use crate::field::{DivisorValuation, FieldContext, RatFunc};
use crate::hsym::{
    h_filtration, h_is_tame, h_is_zero, h_normalize, h_residue, h_torsion_order_bound,
    h_verify_witness, HSymbolSum, Verdict,
};
use crate::milnor::{
    k_is_zero, k_normalize, k_residue, k_verify_witness, KSymbolSum, ZeroReason,
};
use crate::witt::{witt_shift_iota, WittVector};

// ---------------------------------------------------------------------------
// Weierstrass quantities
// ---------------------------------------------------------------------------

/// The classical quantities attached to a Weierstrass equation
/// `y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6`.
///
/// The integer-coefficient identities `4 b8 = b2 b6 - b4^2` and
/// `1728 delta = c4^3 - c6^2` are checked on construction, so the struct can
/// only hold a consistent set of quantities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassData {
    a1: RatFunc,
    a2: RatFunc,
    a3: RatFunc,
    a4: RatFunc,
    a6: RatFunc,
    b2: RatFunc,
    b4: RatFunc,
    b6: RatFunc,
    b8: RatFunc,
    c4: RatFunc,
    c6: RatFunc,
    delta: RatFunc,
}

impl WeierstrassData {
    pub fn ctx(&self) -> &FieldContext {
        self.a1.ctx()
    }

    pub fn a1(&self) -> &RatFunc {
        &self.a1
    }

    pub fn a2(&self) -> &RatFunc {
        &self.a2
    }

    pub fn a3(&self) -> &RatFunc {
        &self.a3
    }

    pub fn a4(&self) -> &RatFunc {
        &self.a4
    }

    pub fn a6(&self) -> &RatFunc {
        &self.a6
    }

    pub fn b2(&self) -> &RatFunc {
        &self.b2
    }

    pub fn b4(&self) -> &RatFunc {
        &self.b4
    }

    pub fn b6(&self) -> &RatFunc {
        &self.b6
    }

    pub fn b8(&self) -> &RatFunc {
        &self.b8
    }

    pub fn c4(&self) -> &RatFunc {
        &self.c4
    }

    pub fn c6(&self) -> &RatFunc {
        &self.c6
    }

    pub fn delta(&self) -> &RatFunc {
        &self.delta
    }

    /// The `j`-invariant `c4^3 / delta`; errors when the discriminant is 0.
    pub fn j(&self) -> Result<RatFunc> {
        if self.delta.is_zero() {
            return Err(Error::ZeroDiscriminant);
        }
        self.c4.pow(3)?.div(&self.delta)
    }
}

/// Computes `b2, b4, b6, b8, c4, c6, delta` from Weierstrass coefficients.
pub fn weierstrass_quantities(
    a1: &RatFunc,
    a2: &RatFunc,
    a3: &RatFunc,
    a4: &RatFunc,
    a6: &RatFunc,
) -> Result<WeierstrassData> {
    let ctx = a1.ctx();
    if [a2, a3, a4, a6].iter().any(|f| f.ctx() != ctx) {
        return Err(Error::Invalid(
            "Weierstrass coefficients live over different fields".into(),
        ));
    }
    let b2 = a1.mul(a1).add(&a2.scale_i64(4));
    let b4 = a4.scale_i64(2).add(&a1.mul(a3));
    let b6 = a3.mul(a3).add(&a6.scale_i64(4));
    let b8 = a1
        .mul(a1)
        .mul(a6)
        .add(&a2.mul(a6).scale_i64(4))
        .sub(&a1.mul(a3).mul(a4))
        .add(&a2.mul(a3).mul(a3))
        .sub(&a4.mul(a4));
    let c4 = b2.mul(&b2).sub(&b4.scale_i64(24));
    let c6 = b2
        .mul(&b2)
        .mul(&b2)
        .neg()
        .add(&b2.mul(&b4).scale_i64(36))
        .sub(&b6.scale_i64(216));
    let delta = b2
        .mul(&b2)
        .mul(&b8)
        .neg()
        .sub(&b4.mul(&b4).mul(&b4).scale_i64(8))
        .sub(&b6.mul(&b6).scale_i64(27))
        .add(&b2.mul(&b4).mul(&b6).scale_i64(9));
    if b8.scale_i64(4) != b2.mul(&b6).sub(&b4.mul(&b4)) {
        return Err(Error::Invalid(
            "quantity consistency failed: 4*b8 != b2*b6 - b4^2".into(),
        ));
    }
    if delta.scale_i64(1728) != c4.pow(3)?.sub(&c6.mul(&c6)) {
        return Err(Error::Invalid(
            "quantity consistency failed: 1728*delta != c4^3 - c6^2".into(),
        ));
    }
    Ok(WeierstrassData {
        a1: a1.clone(),
        a2: a2.clone(),
        a3: a3.clone(),
        a4: a4.clone(),
        a6: a6.clone(),
        b2,
        b4,
        b6,
        b8,
        c4,
        c6,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Characteristic-two coordinates and the distinguished class
// ---------------------------------------------------------------------------

/// In characteristic 2, on the locus `a1 != 0` a Weierstrass equation can be
/// normalized so that only two coordinates remain. Returns that pair
/// `(a2', a6') = ((a1 a2 + a3)/a1^3, delta/a1^12)`; `a6'` is the inverse of
/// the `j`-invariant.
pub fn char2_coordinates(w: &WeierstrassData) -> Result<(RatFunc, RatFunc)> {
    let p = w.ctx().p();
    if p != 2 {
        return Err(Error::WrongCharacteristic { expected: 2, got: p });
    }
    if w.a1().is_zero() {
        return Err(Error::A1Zero);
    }
    let a1_3 = w.a1().pow(3)?;
    let a2p = w.a1().mul(w.a2()).add(w.a3()).div(&a1_3)?;
    let a6p = w.delta().div(&w.a1().pow(12)?)?;
    Ok((a2p, a6p))
}

/// The Witt vector `(0, ..., 0, f)` of length `r`.
fn last_slot_vector(f: &RatFunc, r: usize) -> Result<WittVector> {
    witt_shift_iota(&WittVector::from_function(f, 1)?, r)
}

/// The distinguished degree-0 class `[(0, ..., 0, (a1 a2 + a3)/a1^3)}` of
/// Witt length `witt_len` over a characteristic-2 field containing the
/// Weierstrass coordinates `a1, a2, a3`.
pub fn alpha_class(ctx: &FieldContext, witt_len: usize) -> Result<HSymbolSum> {
    if ctx.p() != 2 {
        return Err(Error::WrongCharacteristic {
            expected: 2,
            got: ctx.p(),
        });
    }
    let a1 = RatFunc::var_named(ctx, "a1")?;
    let a2 = RatFunc::var_named(ctx, "a2")?;
    let a3 = RatFunc::var_named(ctx, "a3")?;
    let alpha = a1.mul(&a2).add(&a3).div(&a1.pow(3)?)?;
    HSymbolSum::from_symbol(1, last_slot_vector(&alpha, witt_len)?, Vec::new())
}

// ---------------------------------------------------------------------------
// The map mu and the fiber-product group J
// ---------------------------------------------------------------------------

/// Maps a mod-2 Milnor sum `{x1, ..., xn}` to the Witt-coefficient sum
/// `[(0, ..., 0, 1) | x1, ..., xn}` of length `witt_len`.
pub fn mu_map(sym: &KSymbolSum, witt_len: usize) -> Result<HSymbolSum> {
    if sym.modulus() != 2 {
        return Err(Error::ModulusMismatch(2, sym.modulus()));
    }
    let ctx = sym.ctx();
    let one_last = last_slot_vector(&RatFunc::one(ctx), witt_len)?;
    let terms = sym
        .terms()
        .iter()
        .map(|(c, entries)| (*c as i64, one_last.clone(), entries.clone()))
        .collect();
    HSymbolSum::new(ctx, sym.degree(), witt_len, terms)
}

/// A candidate element of the fiber-product group `J`: a Witt-coefficient
/// sum paired with a mod-2 Milnor sum of the same degree.
#[derive(Debug, Clone)]
pub struct JGroupElement {
    witt_part: HSymbolSum,
    unit_part: KSymbolSum,
}

impl JGroupElement {
    pub fn new(witt_part: HSymbolSum, unit_part: KSymbolSum) -> Result<JGroupElement> {
        if unit_part.modulus() != 2 {
            return Err(Error::ModulusMismatch(2, unit_part.modulus()));
        }
        if witt_part.ctx() != unit_part.ctx() {
            return Err(Error::Invalid(
                "J-group parts live over different fields".into(),
            ));
        }
        if witt_part.degree() != unit_part.degree() {
            return Err(Error::Invalid(
                "J-group parts must have the same degree".into(),
            ));
        }
        Ok(JGroupElement {
            witt_part,
            unit_part,
        })
    }

    pub fn witt_part(&self) -> &HSymbolSum {
        &self.witt_part
    }

    pub fn unit_part(&self) -> &KSymbolSum {
        &self.unit_part
    }
}

/// The defect `4·w - mu(y)` whose vanishing makes `(w, y)` a member of `J`.
pub fn j_group_obstruction(e: &JGroupElement) -> Result<HSymbolSum> {
    let four_w = e.witt_part.scale(4)?;
    let mu = mu_map(&e.unit_part, e.witt_part.witt_len())?;
    four_w.sub(&mu)
}

/// Decides membership in `J`: `Zero` means the pair is compatible
/// (`4·w = mu(y)`), `NonZero` carries a certificate for the defect.
pub fn j_group_check(e: &JGroupElement) -> Result<Verdict> {
    Ok(h_is_zero(&j_group_obstruction(e)?))
}

// ---------------------------------------------------------------------------
// Gluing along the Artin-Schreier cover of the line
// ---------------------------------------------------------------------------

/// The defect `pr1*(gamma) - m*(gamma)` over the field extended by a fresh
/// deck variable `s`, where `m` translates the last variable `t` of `gamma`
/// by `s^p - s`. The class glues to the quotient of the line by that action
/// exactly when the defect vanishes.
pub fn bzp_descent_obstruction(gamma: &HSymbolSum) -> Result<HSymbolSum> {
    let ctx = gamma.ctx();
    let m = ctx.nvars();
    if m == 0 {
        return Err(Error::Invalid(
            "gluing check needs the line coordinate as the last variable".into(),
        ));
    }
    let mut name = String::from("s");
    let mut k = 0usize;
    while ctx.var_index(&name).is_some() {
        name = format!("s{k}");
        k += 1;
    }
    let ext = ctx.extended(&[name.as_str()])?;
    let p = ctx.p() as i64;
    let svar = RatFunc::var(&ext, m);
    let shift = svar.pow(p)?.sub(&svar);
    let mut images: Vec<RatFunc> = (0..m).map(|i| RatFunc::var(&ext, i)).collect();
    images[m - 1] = images[m - 1].add(&shift);

    let mut terms = Vec::with_capacity(2 * gamma.terms().len());
    for term in gamma.terms() {
        let lifted: Vec<RatFunc> = term
            .witt()
            .comps()
            .iter()
            .map(|c| c.extend_into(&ext))
            .collect();
        let translated: Vec<RatFunc> = term
            .witt()
            .comps()
            .iter()
            .map(|c| c.map_vars(&ext, &images))
            .collect::<Result<_>>()?;
        let entries_lifted: Vec<RatFunc> = term
            .entries()
            .iter()
            .map(|e| e.extend_into(&ext))
            .collect();
        let entries_translated: Vec<RatFunc> = term
            .entries()
            .iter()
            .map(|e| e.map_vars(&ext, &images))
            .collect::<Result<_>>()?;
        terms.push((
            term.coefficient(),
            WittVector::new(&ext, lifted)?,
            entries_lifted,
        ));
        terms.push((
            -term.coefficient(),
            WittVector::new(&ext, translated)?,
            entries_translated,
        ));
    }
    HSymbolSum::new(&ext, gamma.degree(), gamma.witt_len(), terms)
}

/// Tests whether `gamma` over `k(x1, ..., t)` glues along the degree-`p`
/// Artin-Schreier cover of the `t`-line. Completeness is only assured for
/// Witt length 1; longer coefficients may yield `Unknown`.
pub fn bzp_descent_check(gamma: &HSymbolSum) -> Result<Verdict> {
    Ok(h_is_zero(&bzp_descent_obstruction(gamma)?))
}

// ---------------------------------------------------------------------------
// Check reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "pass"),
            CheckStatus::Fail => write!(f, "fail"),
            CheckStatus::Unknown => write!(f, "unknown"),
        }
    }
}

/// One verified fact: what was checked, what was expected, what came out.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    /// The fact the check pins down, in words.
    pub anchor: String,
    pub expected: String,
    pub computed: String,
    pub status: CheckStatus,
}

/// A battery run: schema version, ground characteristic, modulus label, and
/// the individual check results.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub characteristic: u64,
    pub modulus: String,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn has_unknown(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Unknown)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks
            .iter()
            .filter(|c| c.status != CheckStatus::Pass)
            .collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "battery: characteristic {}, modulus {}",
            self.characteristic, self.modulus
        )?;
        for c in &self.checks {
            writeln!(f, "[{}] {} — {}", c.status, c.check_id, c.anchor)?;
            writeln!(f, "    expected: {}", c.expected)?;
            writeln!(f, "    computed: {}", c.computed)?;
        }
        let n = self.checks.len();
        let passed = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Pass)
            .count();
        write!(f, "{passed}/{n} checks passed")
    }
}

/// Which battery to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatterySpec {
    /// Characteristic 2, Witt length 1 through 3.
    CharTwo { witt_len: usize },
    /// Characteristic 3, Witt length 1 or 2.
    CharThree { witt_len: usize },
    /// Characteristic at least 5, Witt length 1 or 2.
    CharP { p: u64, witt_len: usize },
    /// Coefficients coprime to the characteristic: modulus 3 or 5 over
    /// characteristic 2, modulus 4 over characteristic 3.
    CoprimeModulus { p: u64, modulus: u64 },
}

/// Runs one verification battery and returns its report.
pub fn verify_battery(spec: BatterySpec) -> Result<VerificationReport> {
    match spec {
        BatterySpec::CharTwo { witt_len } => verify_char2(witt_len),
        BatterySpec::CharThree { witt_len } => verify_char3(witt_len),
        BatterySpec::CharP { p, witt_len } => verify_charp(p, witt_len),
        BatterySpec::CoprimeModulus { p, modulus } => verify_mod_ell(p, modulus),
    }
}

// ---------------------------------------------------------------------------
// Battery plumbing
// ---------------------------------------------------------------------------

struct Battery {
    checks: Vec<CheckResult>,
}

impl Battery {
    fn new() -> Battery {
        Battery { checks: Vec::new() }
    }

    fn record(
        &mut self,
        id: &str,
        anchor: &str,
        expected: impl Into<String>,
        computed: impl Into<String>,
        status: CheckStatus,
    ) {
        self.checks.push(CheckResult {
            check_id: id.to_string(),
            anchor: anchor.to_string(),
            expected: expected.into(),
            computed: computed.into(),
            status,
        });
    }

    fn fail(&mut self, id: &str, anchor: &str, expected: &str, computed: impl Into<String>) {
        self.record(id, anchor, expected, computed, CheckStatus::Fail);
    }

    /// A plain boolean fact.
    fn fact(&mut self, id: &str, anchor: &str, expected: &str, holds: bool) {
        let status = if holds {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self.record(
            id,
            anchor,
            expected,
            if holds { "holds" } else { "violated" },
            status,
        );
    }

    /// Exact equality of two rational functions.
    fn rf_equal(&mut self, id: &str, anchor: &str, expected: &str, lhs: &RatFunc, rhs: &RatFunc) {
        if lhs == rhs {
            self.record(id, anchor, expected, "equal", CheckStatus::Pass);
        } else {
            self.record(
                id,
                anchor,
                expected,
                format!("differ: {lhs} vs {rhs}"),
                CheckStatus::Fail,
            );
        }
    }

    /// Expects `h_is_zero(s)` to be `Zero`; replays the certificate.
    fn h_zero(&mut self, id: &str, anchor: &str, expected: &str, s: &HSymbolSum) {
        let verdict = h_is_zero(s);
        let (status, computed) = match &verdict {
            Verdict::Zero(reason) => {
                if replay_h_zero(s, reason) {
                    (CheckStatus::Pass, format!("{verdict}; replay confirmed"))
                } else {
                    (CheckStatus::Fail, format!("{verdict}; replay FAILED"))
                }
            }
            Verdict::NonZero(_) => (CheckStatus::Fail, verdict.to_string()),
            Verdict::Unknown(_) => (CheckStatus::Unknown, verdict.to_string()),
        };
        self.record(id, anchor, expected, computed, status);
    }

    /// Expects `h_is_zero(s)` to be `NonZero`; validates the certificate.
    fn h_nonzero(&mut self, id: &str, anchor: &str, expected: &str, s: &HSymbolSum) {
        let verdict = h_is_zero(s);
        let (status, computed) = match &verdict {
            Verdict::NonZero(w) => match h_verify_witness(s, w) {
                Ok(true) => (
                    CheckStatus::Pass,
                    format!("{verdict}; certificate verified"),
                ),
                Ok(false) => (
                    CheckStatus::Fail,
                    format!("{verdict}; certificate REJECTED"),
                ),
                Err(e) => (
                    CheckStatus::Fail,
                    format!("{verdict}; certificate validation error: {e}"),
                ),
            },
            Verdict::Zero(_) => (CheckStatus::Fail, verdict.to_string()),
            Verdict::Unknown(_) => (CheckStatus::Unknown, verdict.to_string()),
        };
        self.record(id, anchor, expected, computed, status);
    }

    /// Expects `k_is_zero(s)` to be `Zero`; replays the certificate.
    fn k_zero(&mut self, id: &str, anchor: &str, expected: &str, s: &KSymbolSum) {
        let verdict = k_is_zero(s);
        let (status, computed) = match &verdict {
            Verdict::Zero(reason) => {
                if replay_k_zero(s, reason) {
                    (CheckStatus::Pass, format!("{verdict}; replay confirmed"))
                } else {
                    (CheckStatus::Fail, format!("{verdict}; replay FAILED"))
                }
            }
            Verdict::NonZero(_) => (CheckStatus::Fail, verdict.to_string()),
            Verdict::Unknown(_) => (CheckStatus::Unknown, verdict.to_string()),
        };
        self.record(id, anchor, expected, computed, status);
    }

    /// Expects `k_is_zero(s)` to be `NonZero`; validates the certificate.
    fn k_nonzero(&mut self, id: &str, anchor: &str, expected: &str, s: &KSymbolSum) {
        let verdict = k_is_zero(s);
        let (status, computed) = match &verdict {
            Verdict::NonZero(w) => match k_verify_witness(s, w) {
                Ok(true) => (
                    CheckStatus::Pass,
                    format!("{verdict}; certificate verified"),
                ),
                Ok(false) => (
                    CheckStatus::Fail,
                    format!("{verdict}; certificate REJECTED"),
                ),
                Err(e) => (
                    CheckStatus::Fail,
                    format!("{verdict}; certificate validation error: {e}"),
                ),
            },
            Verdict::Zero(_) => (CheckStatus::Fail, verdict.to_string()),
            Verdict::Unknown(_) => (CheckStatus::Unknown, verdict.to_string()),
        };
        self.record(id, anchor, expected, computed, status);
    }

    /// Expects the sum to be wild of exactly `level` at `v`, inside the
    /// half-open window `(low, high]`; cross-checks the tame/wild verdict
    /// and its certificate.
    fn wild_level(
        &mut self,
        id: &str,
        anchor: &str,
        s: &HSymbolSum,
        v: &DivisorValuation,
        level: u32,
        window: (u32, u32),
    ) {
        let expected = format!("wild of level {level} within ({}, {}]", window.0, window.1);
        match h_filtration(s, v) {
            Ok(report) => {
                let in_window = report.level > window.0 && report.level <= window.1;
                let tame_verdict = h_is_tame(s, v);
                let cert_ok = match &tame_verdict {
                    Verdict::NonZero(w) => h_verify_witness(s, w).unwrap_or(false),
                    _ => false,
                };
                let ok = report.is_wild() && report.level == level && in_window && cert_ok;
                let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
                self.record(
                    id,
                    anchor,
                    expected,
                    format!("{report}; certificate {}", if cert_ok { "verified" } else { "REJECTED" }),
                    status,
                );
            }
            Err(e) => self.fail(id, anchor, &expected, format!("filtration failed: {e}")),
        }
    }

    /// Expects the sum to be tame at `v`; cross-checks via the filtration.
    fn tame_at(&mut self, id: &str, anchor: &str, s: &HSymbolSum, v: &DivisorValuation) {
        let expected = "tame (level 0)";
        let verdict = h_is_tame(s, v);
        let (status, computed) = match &verdict {
            Verdict::Zero(_) => {
                let agree = matches!(h_filtration(s, v), Ok(rep) if !rep.is_wild());
                if agree {
                    (
                        CheckStatus::Pass,
                        format!("{verdict}; filtration replay confirmed"),
                    )
                } else {
                    (
                        CheckStatus::Fail,
                        format!("{verdict}; filtration replay DISAGREES"),
                    )
                }
            }
            Verdict::NonZero(_) => (CheckStatus::Fail, verdict.to_string()),
            Verdict::Unknown(_) => (CheckStatus::Unknown, verdict.to_string()),
        };
        self.record(id, anchor, expected, computed, status);
    }

    /// Expects `h_residue(s, v)` to equal `expected` exactly.
    fn h_residue_equals(
        &mut self,
        id: &str,
        anchor: &str,
        expected_desc: &str,
        s: &HSymbolSum,
        v: &DivisorValuation,
        expected: &HSymbolSum,
    ) {
        match h_residue(s, v) {
            Ok(res) => match res.sub(expected) {
                Ok(diff) => self.h_zero(id, anchor, expected_desc, &diff),
                Err(e) => self.fail(id, anchor, expected_desc, format!("difference failed: {e}")),
            },
            Err(e) => self.fail(
                id,
                anchor,
                expected_desc,
                format!("residue computation failed: {e}"),
            ),
        }
    }

    /// Expects `k_residue(s, v)` to equal `expected` exactly.
    fn k_residue_equals(
        &mut self,
        id: &str,
        anchor: &str,
        expected_desc: &str,
        s: &KSymbolSum,
        v: &DivisorValuation,
        expected: &KSymbolSum,
    ) {
        match k_residue(s, v) {
            Ok(res) => match res.sub(expected) {
                Ok(diff) => self.k_zero(id, anchor, expected_desc, &diff),
                Err(e) => self.fail(id, anchor, expected_desc, format!("difference failed: {e}")),
            },
            Err(e) => self.fail(
                id,
                anchor,
                expected_desc,
                format!("residue computation failed: {e}"),
            ),
        }
    }

    /// Expects a `J`-membership decision.
    fn j_member(&mut self, id: &str, anchor: &str, e: &JGroupElement, member: bool) {
        let expected = if member {
            "member (defect vanishes)"
        } else {
            "not a member (defect nonzero)"
        };
        match j_group_obstruction(e) {
            Ok(defect) => {
                if member {
                    self.h_zero(id, anchor, expected, &defect);
                } else {
                    self.h_nonzero(id, anchor, expected, &defect);
                }
            }
            Err(err) => self.fail(id, anchor, expected, format!("defect failed: {err}")),
        }
    }

    /// Expects a gluing decision along the Artin-Schreier cover.
    fn glues(&mut self, id: &str, anchor: &str, gamma: &HSymbolSum, glue: bool) {
        let expected = if glue {
            "glues (translation defect vanishes)"
        } else {
            "does not glue (translation defect nonzero)"
        };
        match bzp_descent_obstruction(gamma) {
            Ok(defect) => {
                if glue {
                    self.h_zero(id, anchor, expected, &defect);
                } else {
                    self.h_nonzero(id, anchor, expected, &defect);
                }
            }
            Err(err) => self.fail(id, anchor, expected, format!("defect failed: {err}")),
        }
    }

    fn finish(self, characteristic: u64, modulus: impl Into<String>) -> VerificationReport {
        VerificationReport {
            schema: 1,
            characteristic,
            modulus: modulus.into(),
            checks: self.checks,
        }
    }
}

/// Replays a zero certificate where it is self-contained; multi-step
/// relation chains are replayed by re-deriving the verdict.
fn replay_h_zero(s: &HSymbolSum, reason: &ZeroReason) -> bool {
    match reason {
        ZeroReason::EmptyNormalForm { .. } => {
            h_normalize(s).map(|n| n.is_empty()).unwrap_or(false)
        }
        ZeroReason::ArtinSchreierSolvable { solution } => replay_artin_schreier(s, solution),
        _ => h_is_zero(s).is_zero(),
    }
}

/// Checks that the recorded solution really splits the first nonzero slot of
/// the normal form as `g^p - g`. Leading zero slots are skipped because the
/// decision chain strips them (each such strip inverts the injective
/// Verschiebung), so the certificate refers to the first slot that survives.
fn replay_artin_schreier(s: &HSymbolSum, g: &RatFunc) -> bool {
    let Ok(norm) = h_normalize(s) else {
        return false;
    };
    if norm.degree() != 0 || norm.terms().len() != 1 {
        return false;
    }
    let image = g.frobenius().sub(g);
    let witt = norm.terms()[0].witt();
    match witt.comps().iter().find(|c| !c.is_zero()) {
        Some(lead) => *lead == image,
        None => false,
    }
}

fn replay_k_zero(s: &KSymbolSum, reason: &ZeroReason) -> bool {
    match reason {
        ZeroReason::EmptyNormalForm { .. } => k_normalize(s).is_empty(),
        _ => k_is_zero(s).is_zero(),
    }
}

fn named_var(ctx: &FieldContext, name: &str) -> Result<(usize, RatFunc)> {
    let idx = ctx
        .var_index(name)
        .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))?;
    Ok((idx, RatFunc::var(ctx, idx)))
}

// ---------------------------------------------------------------------------
// Characteristic 2
// ---------------------------------------------------------------------------

/// Characteristic-2 battery at Witt length `witt_len` (1 through 3).
pub fn verify_char2(witt_len: usize) -> Result<VerificationReport> {
    if !(1..=3).contains(&witt_len) {
        return Err(Error::Invalid(
            "characteristic-2 battery covers Witt lengths 1 through 3".into(),
        ));
    }
    let r = witt_len;
    let ctx = FieldContext::new(2, &["x", "y", "a1", "a2", "a3", "a4", "a6"])?;
    let binds = Bindings::new();
    let rf = |src: &str| parse_ratfunc(&ctx, src, &binds);
    let mut bat = Battery::new();

    // Weierstrass scaffolding over the generic coefficient field.
    let (_, a1v) = named_var(&ctx, "a1")?;
    let (_, a2v) = named_var(&ctx, "a2")?;
    let (_, a3v) = named_var(&ctx, "a3")?;
    let (_, a4v) = named_var(&ctx, "a4")?;
    let (_, a6v) = named_var(&ctx, "a6")?;
    let w = weierstrass_quantities(&a1v, &a2v, &a3v, &a4v, &a6v)?;
    bat.fact(
        "c2-quantities",
        "b/c-quantity consistency over the generic coefficient field",
        "4*b8 = b2*b6 - b4^2 and 1728*delta = c4^3 - c6^2",
        w.b8().scale_i64(4) == w.b2().mul(w.b6()).sub(&w.b4().mul(w.b4()))
            && w.delta().scale_i64(1728) == w.c4().pow(3)?.sub(&w.c6().mul(w.c6())),
    );
    let delta = rf("a1^4*a2*a3^2 + a1^3*a3^3 + a3^4 + a1^5*a3*a4 + a1^4*a4^2 + a1^6*a6")?;
    bat.rf_equal(
        "c2-discriminant",
        "reduced form of the discriminant when 2 = 0",
        "delta = a1^4*a2*a3^2 + a1^3*a3^3 + a3^4 + a1^5*a3*a4 + a1^4*a4^2 + a1^6*a6",
        w.delta(),
        &delta,
    );
    let j = w.j()?;
    bat.rf_equal(
        "c2-j-invariant",
        "the j-invariant in characteristic 2",
        "j = a1^12/delta",
        &j,
        &rf("a1^12")?.div(&delta)?,
    );
    let (a2p, a6p) = char2_coordinates(&w)?;
    let alpha = rf("(a1*a2 + a3)/a1^3")?;
    bat.rf_equal(
        "c2-slice-first",
        "first coordinate of the a1-unit slice",
        "a2' = (a1*a2 + a3)/a1^3",
        &a2p,
        &alpha,
    );
    bat.fact(
        "c2-slice-second",
        "second coordinate of the a1-unit slice inverts j",
        "a6' * j = 1",
        a6p.mul(&j).is_one(),
    );

    // The distinguished class, its twists, and its ramification at a1 = 0.
    let (a1_idx, _) = named_var(&ctx, "a1")?;
    let at_a1 = DivisorValuation::finite(&ctx, a1_idx, 0)?;
    let alpha_sum = alpha_class(&ctx, r)?;
    bat.wild_level(
        "c2-alpha-wild",
        "the slice class is wild of level 3 at a1 = 0",
        &alpha_sum,
        &at_a1,
        3,
        (2, 3),
    );
    let (_, yv) = named_var(&ctx, "y")?;
    let (_, xv) = named_var(&ctx, "x")?;
    let alpha_y = HSymbolSum::from_symbol(1, last_slot_vector(&alpha, r)?, vec![yv.clone()])?;
    bat.wild_level(
        "c2-alpha-twist-wild",
        "a unit twist of the slice class stays wild of level 3 at a1 = 0",
        &alpha_y,
        &at_a1,
        3,
        (2, 3),
    );
    let alpha_delta =
        HSymbolSum::from_symbol(1, last_slot_vector(&alpha, r)?, vec![delta.clone()])?;
    bat.tame_at(
        "c2-alpha-delta-tame",
        "the discriminant entry tames the slice class at a1 = 0",
        &alpha_delta,
        &at_a1,
    );

    // Residue of [alpha | j, y} at a1 = 0 is the mu-image of {y}.
    let rctx = at_a1.residue_ctx();
    let alpha_j_y =
        HSymbolSum::from_symbol(1, last_slot_vector(&alpha, r)?, vec![j.clone(), yv.clone()])?;
    let (_, ybar) = named_var(&rctx, "y")?;
    let mu_y = mu_map(
        &KSymbolSum::new(&rctx, 1, 2, vec![(1, vec![ybar.clone()])])?,
        r,
    )?;
    bat.h_residue_equals(
        "c2-alpha-j-residue",
        "residue at a1 = 0 of the slice class twisted by j and a unit",
        "[(0,...,0,1) | y}",
        &alpha_j_y,
        &at_a1,
        &mu_y,
    );

    // The j-pullback unit class ramifies with multiplier 12 = 4·3.
    let modulus = 1u64 << r;
    let kj = KSymbolSum::new(&ctx, 1, modulus, vec![(1, vec![j.clone()])])?;
    let res_k = k_residue(&kj, &at_a1)?;
    let twelve = KSymbolSum::constant(&rctx, modulus, 12)?;
    match res_k.sub(&twelve) {
        Ok(diff) => bat.k_zero(
            "c2-j-unit-residue",
            "residue at a1 = 0 of the j-pullback unit class",
            "the constant class 12 mod 2^r",
            &diff,
        ),
        Err(e) => bat.fail(
            "c2-j-unit-residue",
            "residue at a1 = 0 of the j-pullback unit class",
            "the constant class 12 mod 2^r",
            format!("difference failed: {e}"),
        ),
    }
    if r <= 2 {
        bat.k_zero(
            "c2-j-unit-residue-vanishes",
            "12 is divisible by 4, so the residue dies at Witt length <= 2",
            "zero residue",
            &res_k,
        );
    } else {
        bat.k_nonzero(
            "c2-j-unit-residue-survives",
            "12 = 4 mod 8 survives at Witt length 3",
            "nonzero residue (the constant class 4 mod 8)",
            &res_k,
        );
    }

    // Ramification window of unit-class pullbacks: with a pole of order s in
    // 1/j, the top surviving level lands in (12s - 4, 12s].
    let jinv = delta.div(&rf("a1^12")?)?;
    let w1 = HSymbolSum::from_symbol(1, WittVector::from_function(&jinv, 1)?, vec![yv.clone()])?;
    bat.wild_level(
        "c2-window-order1",
        "pole order 1 with a closed level form: top level 12 - 3",
        &w1,
        &at_a1,
        9,
        (8, 12),
    );
    let w2 = HSymbolSum::from_symbol(
        1,
        WittVector::from_function(&xv.mul(&yv).mul(&jinv).mul(&jinv), 1)?,
        vec![yv.clone()],
    )?;
    bat.wild_level(
        "c2-window-order2",
        "pole order 2 with a non-closed level form: top level 24",
        &w2,
        &at_a1,
        24,
        (20, 24),
    );
    let w3 = HSymbolSum::from_symbol(
        1,
        WittVector::from_function(&xv.mul(&jinv).mul(&jinv), 1)?,
        vec![jinv.clone()],
    )?;
    bat.wild_level(
        "c2-window-order2-dlog",
        "pole order 2 carried by the dlog part: top level 24 - 3",
        &w3,
        &at_a1,
        21,
        (20, 24),
    );

    // Membership in the fiber-product group J.
    if r <= 2 {
        let member = JGroupElement::new(
            HSymbolSum::from_symbol(1, WittVector::from_function(&xv, r)?, vec![yv.clone()])?,
            KSymbolSum::new(&ctx, 1, 2, vec![(2, vec![xv.clone()])])?,
        )?;
        bat.j_member(
            "c2-j-group-member",
            "4·w = 0 at Witt length <= 2, and the doubled unit class has zero mu-image",
            &member,
            true,
        );
        let non_member = JGroupElement::new(
            HSymbolSum::from_symbol(1, WittVector::from_function(&xv, r)?, vec![yv.clone()])?,
            KSymbolSum::new(&ctx, 1, 2, vec![(1, vec![xv.clone()])])?,
        )?;
        bat.j_member(
            "c2-j-group-nonmember",
            "mu of a single unit class survives, so the pair is incompatible",
            &non_member,
            false,
        );
    } else {
        let member = JGroupElement::new(
            HSymbolSum::from_symbol(1, WittVector::one(&ctx, 3)?, Vec::new())?,
            KSymbolSum::constant(&ctx, 2, 1)?,
        )?;
        bat.j_member(
            "c2-j-group-member",
            "4·(1,0,0) = (0,0,1) matches the mu-image of the unit constant",
            &member,
            true,
        );
        let non_member = JGroupElement::new(
            HSymbolSum::from_symbol(1, WittVector::from_function(&xv, 3)?, Vec::new())?,
            KSymbolSum::zero(&ctx, 0, 2)?,
        )?;
        bat.j_member(
            "c2-j-group-nonmember",
            "4·(x,0,0) = (0,0,x^4) survives against a zero unit part",
            &non_member,
            false,
        );
    }

    // Gluing along the Artin-Schreier cover of the line.
    let line = FieldContext::new(2, &["x", "t"])?;
    let tv = RatFunc::var(&line, 1);
    let xl = RatFunc::var(&line, 0);
    let glue = HSymbolSum::from_symbol(1, WittVector::from_function(&tv, 1)?, vec![xl.clone()])?;
    bat.glues(
        "c2-line-glue",
        "the line coordinate times a logarithmic form glues",
        &glue,
        true,
    );
    let obstructed = HSymbolSum::from_symbol(
        1,
        WittVector::from_function(&tv.mul(&xl), 1)?,
        vec![xl.clone()],
    )?;
    bat.glues(
        "c2-line-obstruction",
        "a non-logarithmic multiplier blocks the gluing",
        &obstructed,
        false,
    );

    Ok(bat.finish(2, format!("2^{r}")))
}

// ---------------------------------------------------------------------------
// Characteristic 3
// ---------------------------------------------------------------------------

/// Characteristic-3 battery at Witt length `witt_len` (1 or 2).
pub fn verify_char3(witt_len: usize) -> Result<VerificationReport> {
    if !(1..=2).contains(&witt_len) {
        return Err(Error::Invalid(
            "characteristic-3 battery covers Witt lengths 1 and 2".into(),
        ));
    }
    let r = witt_len;
    let mut bat = Battery::new();

    // Reduced quantities over the generic coefficient field.
    let actx = FieldContext::new(3, &["a1", "a2", "a3", "a4", "a6"])?;
    let av: Vec<RatFunc> = (0..5).map(|i| RatFunc::var(&actx, i)).collect();
    let wg = weierstrass_quantities(&av[0], &av[1], &av[2], &av[3], &av[4])?;
    let reduced = wg
        .b2()
        .pow(3)?
        .mul(wg.b6())
        .neg()
        .add(&wg.b2().mul(wg.b2()).mul(&wg.b4().mul(wg.b4())))
        .add(&wg.b4().pow(3)?);
    bat.rf_equal(
        "c3-discriminant",
        "reduced discriminant in b-coordinates when 3 = 0",
        "delta = -b2^3*b6 + b2^2*b4^2 + b4^3",
        wg.delta(),
        &reduced,
    );
    bat.rf_equal(
        "c3-c4",
        "c4 collapses to b2^2 when 3 = 0",
        "c4 = b2^2",
        wg.c4(),
        &wg.b2().mul(wg.b2()),
    );

    // The b-coordinate presentation.
    let ctx = FieldContext::new(3, &["x", "b4", "b6", "b2"])?;
    let binds = Bindings::new();
    let rf = |src: &str| parse_ratfunc(&ctx, src, &binds);
    let delta3 = rf("- b2^3*b6 + b2^2*b4^2 + b4^3")?;
    let j3 = rf("b2^6")?.div(&delta3)?;
    bat.rf_equal(
        "c3-j-inverse",
        "expansion of 1/j in the b-coordinates",
        "1/j = -b6/b2^3 + b4^2/b2^4 + b4^3/b2^6",
        &delta3.div(&rf("b2^6")?)?,
        &rf("- b6/b2^3 + b4^2/b2^4 + b4^3/b2^6")?,
    );

    // Residue of delta·{j} at b2 = 0 multiplies delta by 6.
    let (b2_idx, _) = named_var(&ctx, "b2")?;
    let at_b2 = DivisorValuation::finite(&ctx, b2_idx, 0)?;
    let rctx = at_b2.residue_ctx();
    let (_, xv) = named_var(&ctx, "x")?;
    let (_, xbar) = named_var(&rctx, "x")?;
    let delta_class = HSymbolSum::from_symbol(1, WittVector::from_function(&xv, r)?, Vec::new())?;
    let twisted = HSymbolSum::from_symbol(1, WittVector::from_function(&xv, r)?, vec![j3.clone()])?;
    let expected =
        HSymbolSum::from_symbol(6, WittVector::from_function(&xbar, r)?, Vec::new())?;
    bat.h_residue_equals(
        "c3-j-residue",
        "residue at b2 = 0 of the j-twist of a constant-field class",
        "6·(the class over the residue field)",
        &twisted,
        &at_b2,
        &expected,
    );

    // The residue dies exactly on 3-torsion.
    let res = h_residue(&twisted, &at_b2)?;
    if r == 1 {
        bat.h_zero(
            "c3-residue-torsion",
            "at Witt length 1 every class is 3-torsion and 6 = 0, so the residue dies",
            "zero residue",
            &res,
        );
        bat.fact(
            "c3-torsion-order",
            "p-power torsion order bound of the twisting class",
            "order divides 3 (bound 1)",
            h_torsion_order_bound(&delta_class) == Some(1),
        );
    } else {
        bat.h_nonzero(
            "c3-residue-torsion",
            "a non-3-torsion class keeps a nonzero residue at Witt length 2",
            "nonzero residue 6·(x,0)",
            &res,
        );
        bat.fact(
            "c3-torsion-order",
            "p-power torsion order bound of the twisting class",
            "order divides 9 but not 3 (bound 2)",
            h_torsion_order_bound(&delta_class) == Some(2),
        );
        let tors = HSymbolSum::from_symbol(1, last_slot_vector(&xv, 2)?, vec![j3.clone()])?;
        let res_tors = h_residue(&tors, &at_b2)?;
        bat.h_zero(
            "c3-torsion-residue",
            "a 3-torsion class has vanishing residue",
            "zero residue",
            &res_tors,
        );
        bat.fact(
            "c3-torsion-witness",
            "the 3-torsion twisting class really is 3-torsion",
            "order divides 3 (bound 1)",
            h_torsion_order_bound(&HSymbolSum::from_symbol(
                1,
                last_slot_vector(&xv, 2)?,
                Vec::new(),
            )?) == Some(1),
        );
    }

    // Milnor side: the unit-class residue multiplies by 6.
    let modulus = 3u64.pow(r as u32);
    let kj = KSymbolSum::new(&ctx, 2, modulus, vec![(1, vec![j3.clone(), xv.clone()])])?;
    let res_k = k_residue(&kj, &at_b2)?;
    let expected_k = KSymbolSum::new(&rctx, 1, modulus, vec![(6, vec![xbar.clone()])])?;
    match res_k.sub(&expected_k) {
        Ok(diff) => bat.k_zero(
            "c3-k-residue",
            "residue at b2 = 0 of the j-paired unit class",
            "6·{x}",
            &diff,
        ),
        Err(e) => bat.fail(
            "c3-k-residue",
            "residue at b2 = 0 of the j-paired unit class",
            "6·{x}",
            format!("difference failed: {e}"),
        ),
    }
    if r == 1 {
        bat.k_zero(
            "c3-k-residue-vanishes",
            "6 = 0 mod 3, so the unit-class residue dies at modulus 3",
            "zero residue",
            &res_k,
        );
    } else {
        bat.k_nonzero(
            "c3-k-residue-survives",
            "6 is a unit times 3 mod 9, so the residue survives",
            "nonzero residue 6·{x} mod 9",
            &res_k,
        );
    }

    // Gluing along the Artin-Schreier cover of the line.
    let line = FieldContext::new(3, &["x", "t"])?;
    let tv = RatFunc::var(&line, 1);
    let xl = RatFunc::var(&line, 0);
    let glue = HSymbolSum::from_symbol(1, WittVector::from_function(&tv, 1)?, vec![xl.clone()])?;
    bat.glues(
        "c3-line-glue",
        "the line coordinate times a logarithmic form glues",
        &glue,
        true,
    );
    let obstructed = HSymbolSum::from_symbol(
        1,
        WittVector::from_function(&tv.mul(&xl), 1)?,
        vec![xl.clone()],
    )?;
    bat.glues(
        "c3-line-obstruction",
        "a non-logarithmic multiplier blocks the gluing",
        &obstructed,
        false,
    );

    Ok(bat.finish(3, format!("3^{r}")))
}

// ---------------------------------------------------------------------------
// Characteristic at least 5
// ---------------------------------------------------------------------------

/// Battery for characteristic at least 5 at Witt length `witt_len` (1 or 2).
pub fn verify_charp(p: u64, witt_len: usize) -> Result<VerificationReport> {
    if p < 5 {
        return Err(Error::Invalid(
            "this battery needs residue characteristic at least 5".into(),
        ));
    }
    if !(1..=2).contains(&witt_len) {
        return Err(Error::Invalid(
            "large-characteristic battery covers Witt lengths 1 and 2".into(),
        ));
    }
    let r = witt_len;
    let ctx = FieldContext::new(p, &["x", "y", "c4", "c6"])?;
    let binds = Bindings::new();
    let rf = |src: &str| parse_ratfunc(&ctx, src, &binds);
    let mut bat = Battery::new();

    // The c-coordinate presentation.
    let deltap = rf("(c4^3 - c6^2)/1728")?;
    let jp = rf("1728*c4^3/(c4^3 - c6^2)")?;
    bat.rf_equal(
        "cp-j-delta",
        "j times the discriminant recovers c4^3",
        "j·delta = c4^3",
        &jp.mul(&deltap),
        &rf("c4^3")?,
    );
    let j_shift = jp.sub(&rf("1728")?);
    bat.rf_equal(
        "cp-j-1728",
        "the shifted invariant in the c-coordinates",
        "j - 1728 = c6^2/delta",
        &j_shift,
        &rf("c6^2")?.div(&deltap)?,
    );

    // Residues of the two twists at the two boundary divisors.
    let (c4_idx, _) = named_var(&ctx, "c4")?;
    let (c6_idx, _) = named_var(&ctx, "c6")?;
    let at_c4 = DivisorValuation::finite(&ctx, c4_idx, 0)?;
    let at_c6 = DivisorValuation::finite(&ctx, c6_idx, 0)?;
    let (_, xv) = named_var(&ctx, "x")?;
    let (_, yv) = named_var(&ctx, "y")?;
    let gamma = HSymbolSum::new(
        &ctx,
        1,
        r,
        vec![
            (1, WittVector::from_function(&xv, r)?, vec![jp.clone()]),
            (1, WittVector::from_function(&yv, r)?, vec![j_shift.clone()]),
        ],
    )?;
    let rctx4 = at_c4.residue_ctx();
    let rctx6 = at_c6.residue_ctx();
    let (_, xbar4) = named_var(&rctx4, "x")?;
    let (_, ybar6) = named_var(&rctx6, "y")?;
    let expected4 =
        HSymbolSum::from_symbol(3, WittVector::from_function(&xbar4, r)?, Vec::new())?;
    let expected6 =
        HSymbolSum::from_symbol(2, WittVector::from_function(&ybar6, r)?, Vec::new())?;
    bat.h_residue_equals(
        "cp-residue-c4",
        "residue at c4 = 0 of the combined twist",
        "3·(first coefficient class)",
        &gamma,
        &at_c4,
        &expected4,
    );
    bat.h_residue_equals(
        "cp-residue-c6",
        "residue at c6 = 0 of the combined twist",
        "2·(second coefficient class)",
        &gamma,
        &at_c6,
        &expected6,
    );
    let res4 = h_residue(&gamma, &at_c4)?;
    let res6 = h_residue(&gamma, &at_c6)?;
    bat.h_nonzero(
        "cp-residue-c4-forces",
        "3 is a unit, so unramifiedness at c4 = 0 forces the first coefficient to vanish",
        "nonzero residue",
        &res4,
    );
    bat.h_nonzero(
        "cp-residue-c6-forces",
        "2 is a unit, so unramifiedness at c6 = 0 forces the second coefficient to vanish",
        "nonzero residue",
        &res6,
    );

    // Milnor side: residues 3·{x} and 2·{y}.
    let modulus = p.checked_pow(r as u32).ok_or(Error::ModulusRange(p))?;
    let kg = KSymbolSum::new(
        &ctx,
        2,
        modulus,
        vec![
            (1, vec![jp.clone(), xv.clone()]),
            (1, vec![j_shift.clone(), yv.clone()]),
        ],
    )?;
    let expected_k4 = KSymbolSum::new(&rctx4, 1, modulus, vec![(3, vec![xbar4.clone()])])?;
    let expected_k6 = KSymbolSum::new(&rctx6, 1, modulus, vec![(2, vec![ybar6.clone()])])?;
    bat.k_residue_equals(
        "cp-k-residue-c4",
        "Milnor residue at c4 = 0 of the combined unit class",
        "3·{x}",
        &kg,
        &at_c4,
        &expected_k4,
    );
    bat.k_residue_equals(
        "cp-k-residue-c6",
        "Milnor residue at c6 = 0 of the combined unit class",
        "2·{y}",
        &kg,
        &at_c6,
        &expected_k6,
    );
    bat.k_nonzero(
        "cp-k-residue-c4-forces",
        "3·{x} is nonzero mod p^r",
        "nonzero residue",
        &k_residue(&kg, &at_c4)?,
    );
    bat.k_nonzero(
        "cp-k-residue-c6-forces",
        "2·{y} is nonzero mod p^r",
        "nonzero residue",
        &k_residue(&kg, &at_c6)?,
    );

    Ok(bat.finish(p, format!("{p}^{r}")))
}

// ---------------------------------------------------------------------------
// Coefficients coprime to the characteristic
// ---------------------------------------------------------------------------

/// Battery for coefficient moduli coprime to the characteristic: modulus 3
/// or 5 over characteristic 2, and modulus 4 over characteristic 3.
pub fn verify_mod_ell(p: u64, modulus: u64) -> Result<VerificationReport> {
    match (p, modulus) {
        (2, 3) | (2, 5) => verify_mod_ell_char2(modulus),
        (3, 4) => verify_mod_ell_char3(),
        _ => Err(Error::Invalid(
            "coprime-modulus battery covers modulus 3 and 5 over characteristic 2 \
             and modulus 4 over characteristic 3"
                .into(),
        )),
    }
}

fn verify_mod_ell_char2(modulus: u64) -> Result<VerificationReport> {
    let ctx = FieldContext::new(2, &["x", "y", "a1", "a2", "a3", "a4", "a6"])?;
    let binds = Bindings::new();
    let rf = |src: &str| parse_ratfunc(&ctx, src, &binds);
    let mut bat = Battery::new();

    let delta = rf("a1^4*a2*a3^2 + a1^3*a3^3 + a3^4 + a1^5*a3*a4 + a1^4*a4^2 + a1^6*a6")?;
    let j = rf("a1^12")?.div(&delta)?;
    let (a1_idx, _) = named_var(&ctx, "a1")?;
    let at_a1 = DivisorValuation::finite(&ctx, a1_idx, 0)?;
    let rctx = at_a1.residue_ctx();
    let (_, xv) = named_var(&ctx, "x")?;
    let (_, xbar) = named_var(&rctx, "x")?;

    // Residue of the j-paired class multiplies by 12.
    let kj = KSymbolSum::new(&ctx, 2, modulus, vec![(1, vec![j.clone(), xv.clone()])])?;
    let expected = KSymbolSum::new(&rctx, 1, modulus, vec![(12, vec![xbar.clone()])])?;
    bat.k_residue_equals(
        "ml2-residue-12",
        "residue at a1 = 0 of the j-paired unit class",
        "12·{x} at the coprime modulus",
        &kj,
        &at_a1,
        &expected,
    );
    let res = k_residue(&kj, &at_a1)?;
    if modulus == 3 {
        bat.k_zero(
            "ml2-unramified",
            "12 = 0 mod 3: every class is 3-torsion, so the pairing is unramified",
            "zero residue",
            &res,
        );
        bat.k_zero(
            "ml2-torsion",
            "3-torsion of the paired class at modulus 3",
            "3·{x} = 0",
            &KSymbolSum::new(&ctx, 1, 3, vec![(3, vec![xv.clone()])])?,
        );
    } else {
        bat.k_nonzero(
            "ml2-ramified",
            "12 = 2 mod 5 is a unit, so a non-3-torsion class stays ramified",
            "nonzero residue 2·{x}",
            &res,
        );
        bat.k_nonzero(
            "ml2-torsion",
            "only the zero class is 3-torsion at modulus 5",
            "3·{x} nonzero",
            &KSymbolSum::new(&ctx, 1, 5, vec![(3, vec![xv.clone()])])?,
        );
    }

    Ok(bat.finish(2, modulus.to_string()))
}

fn verify_mod_ell_char3() -> Result<VerificationReport> {
    let ctx = FieldContext::new(3, &["x", "y", "b4", "b6", "b2"])?;
    let binds = Bindings::new();
    let rf = |src: &str| parse_ratfunc(&ctx, src, &binds);
    let mut bat = Battery::new();

    let delta3 = rf("- b2^3*b6 + b2^2*b4^2 + b4^3")?;
    let j3 = rf("b2^6")?.div(&delta3)?;
    let (b2_idx, b2v) = named_var(&ctx, "b2")?;
    let at_b2 = DivisorValuation::finite(&ctx, b2_idx, 0)?;
    let rctx = at_b2.residue_ctx();
    let (_, xv) = named_var(&ctx, "x")?;
    let (_, yv) = named_var(&ctx, "y")?;
    let (_, xbar) = named_var(&rctx, "x")?;
    let delta_bar = parse_ratfunc(&rctx, "b4^3", &binds)?;

    // The four-part decomposition gamma = b0 + {j}·b1 + {b2}·b2' + {b2}{j}·b3'
    // with 2-torsion b2', b3'; its ramification at b2 = 0 is
    // 6·b1 + b2' + {delta}·b3' termwise.
    let gamma = KSymbolSum::new(
        &ctx,
        2,
        4,
        vec![
            (1, vec![xv.clone(), yv.clone()]),
            (1, vec![j3.clone(), xv.clone()]),
            (2, vec![b2v.clone(), xv.clone()]),
            (2, vec![b2v.clone(), j3.clone()]),
        ],
    )?;
    let expected = KSymbolSum::new(
        &rctx,
        1,
        4,
        vec![
            (6, vec![xbar.clone()]),
            (2, vec![xbar.clone()]),
            (2, vec![delta_bar.clone()]),
        ],
    )?;
    bat.k_residue_equals(
        "ml3-residue-formula",
        "termwise ramification of the four-part decomposition at b2 = 0",
        "6·{x} + 2·{x} + 2·{delta-bar}",
        &gamma,
        &at_b2,
        &expected,
    );

    // The discriminant component cannot cancel: 2·{delta-bar} is nonzero,
    // so unramifiedness forces the fourth component to vanish.
    bat.k_nonzero(
        "ml3-forcing",
        "the discriminant term of the ramification survives on its own",
        "2·{delta-bar} nonzero mod 4",
        &KSymbolSum::new(&rctx, 1, 4, vec![(2, vec![delta_bar.clone()])])?,
    );

    // Dropping the fourth component and balancing the second against the
    // third kills the ramification.
    let balanced = KSymbolSum::new(
        &ctx,
        2,
        4,
        vec![
            (1, vec![xv.clone(), yv.clone()]),
            (1, vec![j3.clone(), xv.clone()]),
            (2, vec![b2v.clone(), xv.clone()]),
        ],
    )?;
    let res_balanced = k_residue(&balanced, &at_b2)?;
    bat.k_zero(
        "ml3-balanced",
        "with the fourth component zero, 6·b1 + b2' = 8·{x} = 0 mod 4",
        "zero residue",
        &res_balanced,
    );

    Ok(bat.finish(3, "4".to_string()))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
