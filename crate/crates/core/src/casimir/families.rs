use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::SectorBasis;
use crate::ladder::{AlphaMatrix, Family};
use crate::operator::{Restriction, ResidualReport, SparseOperator};
use crate::schwinger::Su2Generators;

use super::CasimirStack;

/// The `p†_k` (`k = 0..=s`) and `m†_k` (`k = 1..=s`) operators. All of them
/// raise `N` by one and commute with `J_z`.
#[derive(Clone, Debug)]
pub struct LadderFamily {
    pub spin: u32,
    pub p_ops: Vec<SparseOperator>,
    pub m_ops: Vec<SparseOperator>,
}

impl LadderFamily {
    /// Operators of one family, aligned with [`Family::indices`].
    pub fn ops(&self, family: Family) -> &[SparseOperator] {
        match family {
            Family::P => &self.p_ops,
            Family::M => &self.m_ops,
        }
    }

    pub fn p(&self, k: u32) -> &SparseOperator {
        &self.p_ops[k as usize]
    }

    /// `m†_k` for `k ≥ 1`; `m†_0` vanishes identically and is not stored.
    pub fn m(&self, k: u32) -> Option<&SparseOperator> {
        k.checked_sub(1).and_then(|i| self.m_ops.get(i as usize))
    }
}

/// `∏_{i=1..k} √((s+i)(s−i+1))`.
pub fn family_normalizer(spin: u32, k: u32) -> f64 {
    let s = spin as f64;
    (1..=k)
        .map(|i| {
            let i = i as f64;
            ((s + i) * (s - i + 1.0)).sqrt()
        })
        .product()
}

/// `p†_0 = 2a†_0`, `p†_k, m†_k = (a†_{−k} J_+^k ± a†_k J_−^k) / ∏√((s+i)(s−i+1))`.
pub fn build_families(basis: &Arc<SectorBasis>, generators: &Su2Generators) -> Result<LadderFamily> {
    let spin = generators.spin;
    let mut p_ops = vec![SparseOperator::creation(basis, 0)?.scale_real(2.0)];
    let mut m_ops = Vec::with_capacity(spin as usize);
    let mut jp = SparseOperator::identity(basis);
    let mut jm = SparseOperator::identity(basis);
    for k in 1..=spin {
        jp = &jp * &generators.jplus;
        jm = &jm * &generators.jminus;
        let up = &SparseOperator::creation(basis, -(k as i64))? * &jp;
        let down = &SparseOperator::creation(basis, k as i64)? * &jm;
        let norm = 1.0 / family_normalizer(spin, k);
        p_ops.push((&up + &down).scale_real(norm).with_budget(1));
        m_ops.push((&up - &down).scale_real(norm).with_budget(1));
    }
    Ok(LadderFamily {
        spin,
        p_ops,
        m_ops,
    })
}

/// [`AlphaMatrix::derive`] followed by numerical verification of every
/// column on the weight-0 interior at margin 1.
pub fn build_alpha(stack: &CasimirStack, family: Family) -> Result<AlphaMatrix> {
    let alpha = AlphaMatrix::derive(stack.spin(), family)?;
    alpha.verify(
        &stack.generators.j2,
        stack.families.ops(family),
        &stack.spectrum,
        &Restriction::kernel(1),
        ALPHA_TOLERANCE,
    )?;
    Ok(alpha)
}

pub const ALPHA_TOLERANCE: f64 = 1e-8;

/// Which version of the full `[J², T_k]` relation to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosureForm {
    Derived,
    Factored,
}

/// `[J², T_k]` against the closure relation including its `J_z` terms,
/// for `k ≥ 1`, on every column of the interior at margin 1:
///
/// `d_k T_k + (s+k+1)(s−k) T_{k+1} + T_{k−1}(J² − J_z² − k(k−1))
///  − ((2k−1) T'_{k−1} + 2k T'_k) J_z`
///
/// where `T'` is the other family and `m†_0 = 0`. [`ClosureForm::Factored`]
/// uses `(ĵ+J_z+1)(ĵ−J_z) − k(k−1)` for the `T_{k−1}` factor and
/// `+2k (T'_k + T'_{k−1}) J_z` for the mixing term; it does not hold off the
/// `J_z` kernel.
pub fn full_closure_residual(
    stack: &CasimirStack,
    family: Family,
    k: u32,
    form: ClosureForm,
) -> Result<ResidualReport> {
    let factored = form == ClosureForm::Factored;
    let g = &stack.generators;
    let fam = &stack.families;
    let s = stack.spin() as i64;
    let ki = k as i64;
    let own = |i: i64| -> Option<&SparseOperator> {
        if i < 0 || i > s {
            return None;
        }
        match family {
            Family::P => Some(fam.p(i as u32)),
            Family::M => fam.m(i as u32),
        }
    };
    let other = |i: i64| -> Option<&SparseOperator> {
        if i < 0 || i > s {
            return None;
        }
        match family {
            Family::P => fam.m(i as u32),
            Family::M => Some(fam.p(i as u32)),
        }
    };
    let t = own(ki).expect("k within the family");
    let lhs = &(&g.j2 * t) - &(t * &g.j2);
    let id = SparseOperator::identity(stack.basis());
    let mut rhs = t.scale_real(((s + ki + 1) * (s - ki) - ki * (ki - 1)) as f64);
    if let Some(next) = own(ki + 1) {
        rhs = &rhs + &next.scale_real(((s + ki + 1) * (s - ki)) as f64);
    }
    let jz2 = &g.jz * &g.jz;
    let mut factor = &(&g.j2 - &jz2) - &id.scale_real((ki * (ki - 1)) as f64);
    if factored {
        factor = &factor - &g.jz;
    }
    if let Some(prev) = own(ki - 1) {
        rhs = &rhs + &(prev * &factor);
    }
    let zero = SparseOperator::zero(stack.basis());
    let prev_other = other(ki - 1).unwrap_or(&zero);
    let cur_other = other(ki).unwrap_or(&zero);
    let mixing = if factored {
        (cur_other + prev_other).scale_real(2.0 * ki as f64)
    } else {
        (&prev_other.scale_real((2 * ki - 1) as f64) + &cur_other.scale_real(2.0 * ki as f64))
            .scale_real(-1.0)
    };
    rhs = &rhs + &(&mixing * &g.jz);
    let restriction = Restriction::interior(1);
    let scale = (&g.j2 * t).restricted_norm(&restriction)?;
    crate::operator::residual_restricted(&lhs, &rhs, &restriction, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, residual, C64};

    #[test]
    fn spin_one_p1_matches_bilinear_form() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let b = stack.basis();
        let g = &stack.generators;
        let direct = &(&SparseOperator::creation(b, 1).unwrap() * &g.jminus)
            + &(&SparseOperator::creation(b, -1).unwrap() * &g.jplus);
        let scaled = stack.families.p(1).scale_real(2f64.sqrt());
        assert!(residual(&scaled, &direct, 0).unwrap().frobenius_absolute < 1e-12);
    }

    #[test]
    fn p0_self_commutator_is_four() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let p0 = stack.families.p(0);
        let c = commutator(&p0.adjoint(), p0).unwrap();
        let four = SparseOperator::identity(stack.basis()).scale_real(4.0);
        assert!(residual(&c, &four, 1).unwrap().frobenius_relative < 1e-14);
    }

    #[test]
    fn m1_annihilates_spin_one_kernel() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let m1 = stack.families.m(1).unwrap();
        let b = stack.basis();
        for n in 0..b.n_max() {
            for i in b.sector_indices(n, 0) {
                let mut v = vec![C64::new(0.0, 0.0); b.len()];
                v[i] = C64::new(1.0, 0.0);
                let out = m1.apply(&v);
                assert!(out.iter().all(|z| z.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn families_are_number_ladders_commuting_with_jz() {
        for s in 1..=3 {
            let stack = CasimirStack::new(s, 3).unwrap();
            let g = &stack.generators;
            for op in stack.families.p_ops.iter().chain(&stack.families.m_ops) {
                let cn = commutator(&g.ntot, op).unwrap();
                assert!(residual(&cn, op, 1).unwrap().passes(1e-10));
                let cz = commutator(&g.jz, op).unwrap();
                assert!(cz.frobenius_norm() < 1e-10 * op.frobenius_norm());
                assert_eq!(op.particle_budget(), 1);
            }
        }
    }

    #[test]
    fn alpha_verifies_for_small_spins() {
        for s in 1..=3 {
            let stack = CasimirStack::new(s, 4).unwrap();
            build_alpha(&stack, Family::P).unwrap();
            build_alpha(&stack, Family::M).unwrap();
        }
    }

    #[test]
    fn corrupted_alpha_names_the_entry() {
        let stack = CasimirStack::new(2, 4).unwrap();
        let mut alpha = AlphaMatrix::derive(2, Family::P).unwrap();
        alpha.entries[1][1] = crate::ladder::JPoly::int(5);
        let err = alpha
            .verify(
                &stack.generators.j2,
                stack.families.ops(Family::P),
                &stack.spectrum,
                &Restriction::kernel(1),
                1e-8,
            )
            .unwrap_err();
        assert!(
            matches!(err, crate::Error::AlphaMismatch { row: 1, col: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn full_closure_derived_vs_factored() {
        let stack = CasimirStack::new(1, 4).unwrap();
        assert!(full_closure_residual(&stack, Family::P, 1, ClosureForm::Derived)
            .unwrap()
            .passes(1e-8));
        assert!(full_closure_residual(&stack, Family::M, 1, ClosureForm::Derived)
            .unwrap()
            .passes(1e-8));
        assert!(!full_closure_residual(&stack, Family::P, 1, ClosureForm::Factored)
            .unwrap()
            .passes(1e-3));
    }
}
