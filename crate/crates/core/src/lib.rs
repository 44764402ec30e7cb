//! Exact symbolic computation for mod-p^r arithmetic over function fields of
//! characteristic p.
//!
//! The engine works with towers F_p(x_1, ..., x_m) of rational function fields
//! over a prime field and provides, from the bottom up:
//!
//! * [`field`] — canonical-form multivariate rational functions over F_p,
//!   divisor valuations at rational centers and at infinity, reduction to
//!   residue fields, an Artin–Schreier equation solver, and decomposition over
//!   the subfield of p-th powers;
//! * [`witt`] — truncated Witt vectors with group/ring laws, Frobenius,
//!   Verschiebung, truncation and shift maps, and the universal addition,
//!   negation, and multiplication polynomials over Z;
//! * [`forms`] — Kähler differential n-forms, exterior derivative, Cartier and
//!   inverse-Cartier operators, and classification of closed forms;
//! * [`milnor`] — Milnor K-symbols modulo an arbitrary modulus, tame residues,
//!   specialization, and the dlog comparison map;
//! * [`hsym`] — Witt symbols [a_1,...,a_r | b_1,...,b_n} presenting classes of
//!   the groups H^{n+1}_{p^r}(F), with truncation, torsion, tame/wild
//!   classification, residues, the ramification filtration, simple-form
//!   decomposition, and a recursive zero-test;
//! * [`applications`] — Weierstrass/elliptic-curve quantities, the generator
//!   classes for the moduli stack of elliptic curves, the J-group membership
//!   test, the BZ/p descent check, and the verification battery.
//!
//! All values are immutable after construction and every operation is pure, so
//! independent computations may run in parallel. A [`FieldContext`] is
//! read-only after creation and safely shareable.

pub mod applications;
pub mod error;
pub mod expr;
pub mod field;
pub mod forms;
pub mod hsym;
pub mod milnor;
pub mod witt;

pub use applications::{
    alpha_class, bzp_descent_check, bzp_descent_obstruction, char2_coordinates, j_group_check,
    j_group_obstruction, mu_map, verify_battery, verify_char2, verify_char3, verify_charp,
    verify_mod_ell, weierstrass_quantities, BatterySpec, CheckResult, CheckStatus, JGroupElement,
    VerificationReport, WeierstrassData,
};
pub use error::{Error, Result};
pub use expr::{parse_hsym, parse_ksym, parse_ratfunc, parse_valuation, parse_witt, Bindings};
pub use field::{
    rf_frobenius_decompose, rf_frobenius_recompose, rf_normalize, rf_reduce, rf_valuation,
    solve_artin_schreier, Center, DivisorValuation, FieldContext, Poly, RatFunc,
};
pub use forms::{
    cartier, classify_closed, form_d, form_dlog, inverse_cartier, is_logarithmic,
    ClosedFormClassification, DiffForm,
};
pub use hsym::{
    h_constant_lift, h_filtration, h_is_tame, h_is_unramified, h_is_wild, h_is_zero,
    h_multiply_p, h_normalize, h_residue, h_shift_iota, h_simple_form, h_torsion_order_bound,
    h_truncate_pi, h_verify_witness, FiltrationReport, GradedClass, HSymbolSum, HTerm,
    SimpleFormDecomposition, SimpleFormLevel, Verdict,
};
pub use milnor::{
    k_dlog, k_is_zero, k_normalize, k_residue, k_specialize, k_verify_witness, KSymbolSum,
    NonZeroWitness, ZeroReason,
};
pub use witt::{
    witt_add, witt_frobenius, witt_mul, witt_neg, witt_pmul, witt_scalar_mul, witt_shift_iota,
    witt_sub, witt_truncate_pi, witt_verschiebung, WittTables, WittVector,
};
