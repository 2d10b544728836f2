//! Numerical tests of the right-ladder property `[H, p] = p P` and its
//! consequences.

use crate::error::{Error, Result};
use crate::operator::{commutator, residual_restricted, Restriction, ResidualReport, SparseOperator};

fn require_commuting(
    what: &str,
    a: &SparseOperator,
    b: &SparseOperator,
    restriction: &Restriction,
    tolerance: f64,
) -> Result<()> {
    let ab = a * b;
    let ba = b * a;
    let report = residual_restricted(&ab, &ba, restriction, 0.0)?;
    if report.passes(tolerance) {
        Ok(())
    } else {
        Err(Error::Precondition {
            what: what.to_string(),
            norm: report.frobenius_relative,
        })
    }
}

/// Residual of `[H, p] − p P` on `restriction`, relative to the larger of
/// `‖Hp‖`, `‖pH‖`, `‖pP‖`. Fails early if `H` and `P` do not commute.
pub fn check_rlo(
    h: &SparseOperator,
    p: &SparseOperator,
    right: &SparseOperator,
    restriction: &Restriction,
    tolerance: f64,
) -> Result<ResidualReport> {
    require_commuting("[H, P]", h, right, restriction, tolerance)?;
    let hp = h * p;
    let ph = p * h;
    let pp = p * right;
    let scale = hp
        .restricted_norm(restriction)?
        .max(ph.restricted_norm(restriction)?);
    residual_restricted(&(&hp - &ph), &pp, restriction, scale)
}

/// Residual of `[Hⁿ, p] − p((H+P)ⁿ − Hⁿ)`, which holds whenever `p` is a
/// right ladder of `H`. The ladder property itself must pass first.
pub fn check_power_identity(
    h: &SparseOperator,
    p: &SparseOperator,
    right: &SparseOperator,
    power: u32,
    restriction: &Restriction,
    tolerance: f64,
) -> Result<ResidualReport> {
    let base = check_rlo(h, p, right, restriction, tolerance)?;
    if !base.passes(tolerance) {
        return Err(Error::Precondition {
            what: "[H, p] - p P".to_string(),
            norm: base.frobenius_relative,
        });
    }
    let hn = h.pow(power);
    let shifted = (h + right).pow(power);
    let lhs = commutator(&hn, p)?;
    let rhs = p * &(&shifted - &hn);
    let scale = (&hn * p)
        .restricted_norm(restriction)?
        .max((p * &hn).restricted_norm(restriction)?);
    residual_restricted(&lhs, &rhs, restriction, scale)
}

/// Residual of `[H, pA] − pAP` for an `A` that commutes with `H + P`; the
/// product `pA` is then again a right ladder with the same `P`.
pub fn check_rlo_compose(
    h: &SparseOperator,
    p: &SparseOperator,
    right: &SparseOperator,
    a: &SparseOperator,
    restriction: &Restriction,
    tolerance: f64,
) -> Result<ResidualReport> {
    require_commuting("[H + P, A]", &(h + right), a, restriction, tolerance)?;
    let pa = p * a;
    check_rlo(h, &pa, right, restriction, tolerance)
}
