use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{check_rlo, poly_operator, solve_sigma, Family, JPoly, SigmaVector};
use crate::operator::{commutator, residual_restricted, Restriction, ResidualReport, SparseOperator};

use super::CasimirStack;

pub const TAU_TOLERANCE: f64 = 1e-8;

/// Residuals recorded when a [`TauOperator`] is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauCertificate {
    /// `[J², τ†] − τ† θ(θ+2ĵ+1)`.
    pub ladder: ResidualReport,
    /// `[ĵ, τ†] − θ τ†`.
    pub shift: ResidualReport,
}

/// `τ†_θ = Σ_k T_k σ_k(ĵ)`, certified on the weight-0 interior at margin 1.
#[derive(Clone, Debug)]
pub struct TauOperator {
    pub theta: i64,
    pub family: Family,
    pub op: SparseOperator,
    pub right_function: JPoly,
    pub sigma: SigmaVector,
    pub certificate: TauCertificate,
}

impl TauOperator {
    /// The lowering partner `τ_θ`.
    pub fn lowering(&self) -> SparseOperator {
        self.op.adjoint()
    }
}

/// Sums `T_k σ_k(ĵ)` without certifying the result.
pub fn tau_sum(stack: &CasimirStack, sigma: &SigmaVector) -> Result<SparseOperator> {
    let ops = stack.families.ops(sigma.family);
    let mut acc = SparseOperator::zero(stack.basis());
    for (op, poly) in ops.iter().zip(&sigma.sigmas) {
        acc = &acc + &(op * &poly_operator(&stack.spectrum, poly)?);
    }
    Ok(acc.with_budget(1))
}

/// Residual of `[ĵ, τ†] − θτ†` on `restriction`.
pub fn shift_residual(
    stack: &CasimirStack,
    op: &SparseOperator,
    theta: i64,
    restriction: &Restriction,
) -> Result<ResidualReport> {
    let jhat = &stack.jhat;
    let lhs = commutator(jhat, op)?;
    let rhs = op.scale_real(theta as f64);
    let scale = (jhat * op)
        .restricted_norm(restriction)?
        .max((op * jhat).restricted_norm(restriction)?);
    residual_restricted(&lhs, &rhs, restriction, scale)
}

/// Assembles `τ†_θ` from its σ-coefficients and certifies both the ladder
/// relation for `J²` and the unit shift of `ĵ`.
pub fn assemble_tau(stack: &CasimirStack, sigma: &SigmaVector) -> Result<TauOperator> {
    let theta = sigma.theta;
    let op = tau_sum(stack, sigma)?;
    let right_function = JPoly::shift_function(theta);
    let right = poly_operator(&stack.spectrum, &right_function)?;
    let restriction = Restriction::kernel(1);
    let ladder = check_rlo(&stack.generators.j2, &op, &right, &restriction, TAU_TOLERANCE)?;
    let shift = shift_residual(stack, &op, theta, &restriction)?;
    for (what, r) in [("[J², τ†] − τ†P", ladder), ("[ĵ, τ†] − θτ†", shift)] {
        if !r.passes(TAU_TOLERANCE) {
            return Err(Error::Certification {
                theta,
                detail: format!("{what}: relative residual {:e}", r.frobenius_relative),
            });
        }
    }
    Ok(TauOperator {
        theta,
        family: sigma.family,
        op,
        right_function,
        sigma: sigma.clone(),
        certificate: TauCertificate { ladder, shift },
    })
}

/// All `2s + 1` operators `τ†_θ`, ascending in `θ`.
pub fn assemble_all(stack: &CasimirStack) -> Result<Vec<TauOperator>> {
    let s = stack.spin() as i64;
    (-s..=s)
        .into_par_iter()
        .map(|theta| {
            let family = Family::for_theta(stack.spin(), theta);
            let alpha = stack.alpha(family);
            assemble_tau(stack, &solve_sigma(alpha, theta)?)
        })
        .collect()
}

/// Which way the resolvent identity is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolventForm {
    /// `[R_k, τ†] = (R_k − R_{k−θ}) τ†`.
    Left,
    /// `[R_k, τ†] = τ† (R_{k+θ} − R_k)`.
    Right,
    /// `[R_k, τ†] = τ† (R_k − R_{k−θ})`, the left function moved to the
    /// right unchanged. Fails for `θ ≠ 0`; kept as a diagnostic.
    LeftFunctionOnRight,
}

/// `R_k = 1/(2ĵ + 2k + 1)`; `k` may be negative.
pub fn resolvent(stack: &CasimirStack, k: i64) -> Result<SparseOperator> {
    stack.spectrum.of_j(|j| {
        let d = 2 * j as i64 + 2 * k + 1;
        (d != 0).then(|| 1.0 / d as f64)
    })
}

/// Residual of the resolvent commutator identity for `τ†_θ` in the chosen
/// form, on the weight-0 interior at margin 1.
pub fn resolvent_commutator_check(
    stack: &CasimirStack,
    tau: &TauOperator,
    k: u32,
    form: ResolventForm,
) -> Result<ResidualReport> {
    let k = k as i64;
    let t = &tau.op;
    let rk = resolvent(stack, k)?;
    let lhs = commutator(&rk, t)?;
    let rhs = match form {
        ResolventForm::Left => &(&rk - &resolvent(stack, k - tau.theta)?) * t,
        ResolventForm::Right => t * &(&resolvent(stack, k + tau.theta)? - &rk),
        ResolventForm::LeftFunctionOnRight => t * &(&rk - &resolvent(stack, k - tau.theta)?),
    };
    let restriction = Restriction::kernel(1);
    let scale = (&rk * t)
        .restricted_norm(&restriction)?
        .max((t * &rk).restricted_norm(&restriction)?);
    residual_restricted(&lhs, &rhs, &restriction, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use crate::ladder::{check_power_identity, check_rlo_compose, AlphaMatrix};
    use crate::operator::C64;

    #[test]
    fn spin_one_raising_on_vacuum() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let tau = stack.tau(1).unwrap();
        let b = stack.basis();
        let mut vac = vec![C64::new(0.0, 0.0); b.len()];
        vac[b.vacuum_index().unwrap()] = C64::new(1.0, 0.0);
        let out = tau.op.apply(&vac);
        let target = b.state_index(&FockState::new(vec![0, 1, 0])).unwrap().unwrap();
        assert!((out[target] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let rest: f64 = out
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(rest < 1e-24);
    }

    #[test]
    fn every_theta_certifies() {
        for s in 1..=2 {
            let stack = CasimirStack::new(s, 4).unwrap();
            assert_eq!(stack.taus().len(), 2 * s as usize + 1);
            for t in stack.taus() {
                assert!(t.certificate.ladder.passes(1e-8), "s={s} θ={}", t.theta);
                assert!(t.certificate.shift.passes(1e-8), "s={s} θ={}", t.theta);
            }
        }
    }

    #[test]
    fn wrong_sigma_fails_certification() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let alpha = AlphaMatrix::derive(1, Family::P).unwrap();
        let mut sigma = solve_sigma(&alpha, 1).unwrap();
        sigma.sigmas[0] = JPoly::int(3);
        assert!(matches!(
            assemble_tau(&stack, &sigma),
            Err(Error::Certification { theta: 1, .. })
        ));
    }

    #[test]
    fn power_identity_and_composition() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let tau = stack.tau(1).unwrap();
        let right = poly_operator(&stack.spectrum, &tau.right_function).unwrap();
        let j2 = &stack.generators.j2;
        let r = check_power_identity(j2, &tau.op, &right, 2, &Restriction::kernel(1), 1e-8).unwrap();
        assert!(r.passes(1e-8), "{r:?}");
        let shifted = resolvent(&stack, 1).unwrap();
        let r = check_rlo_compose(j2, &tau.op, &right, &shifted, &Restriction::kernel(1), 1e-8)
            .unwrap();
        assert!(r.passes(1e-8), "{r:?}");
        let r = check_rlo_compose(
            j2,
            &tau.op,
            &right,
            &stack.generators.ntot,
            &Restriction::kernel(1),
            1e-8,
        )
        .unwrap();
        assert!(r.passes(1e-8), "{r:?}");
    }

    #[test]
    fn resolvent_forms() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let tau = stack.tau(1).unwrap();
        for k in 0..3 {
            for form in [ResolventForm::Left, ResolventForm::Right] {
                let r = resolvent_commutator_check(&stack, tau, k, form).unwrap();
                assert!(r.passes(1e-8), "k={k} {form:?} {r:?}");
            }
            let r = resolvent_commutator_check(&stack, tau, k, ResolventForm::LeftFunctionOnRight).unwrap();
            assert!(!r.passes(1e-3));
        }
    }

    #[test]
    fn resolvent_theta_zero_is_trivial() {
        let stack = CasimirStack::new(2, 4).unwrap();
        let tau = stack.tau(0).unwrap();
        for form in [ResolventForm::Left, ResolventForm::Right, ResolventForm::LeftFunctionOnRight] {
            let r = resolvent_commutator_check(&stack, tau, 0, form).unwrap();
            assert!(r.passes(1e-8));
        }
    }
}
