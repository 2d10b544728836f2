//! Concrete ladder operators for the su(2) Casimir: the `p†`/`m†` families,
//! the assembled `τ†_θ`, their action on the `J_z` kernel and the spin-1
//! constructions built from them.

mod deformed;
mod demo;
mod families;
mod lattice;
mod tau;

use std::sync::Arc;

use crate::error::Result;
use crate::fock::SectorBasis;
use crate::ladder::{AlphaMatrix, Family};
use crate::operator::{Restriction, ResidualReport, SparseOperator};
use crate::schwinger::{su2_generators, CasimirSpectrum, Su2Generators};

pub use deformed::{
    complete_set_check, deformed_generators, residue_classes, CompleteSetReport, DeformedGenerators,
    NodeSeparation, ResidueClass,
};
pub use demo::{
    canonical_basis_s1, canonical_vector, conventional_match, conventional_tau, demo_eigen_checks,
    demo_s1_operators, lplus_factor_right, tau_bar_forms, weyl_residual, CanonicalVector,
    ConventionalMatch, DemoOperators, NodeEigenCheck, TauBarReport,
};
pub use families::{build_alpha, build_families, family_normalizer, full_closure_residual, ClosureForm, LadderFamily, ALPHA_TOLERANCE};
pub use lattice::{
    annihilation_claims, brute_force_multiplicities, irrep_weights, lattice_multiplicities,
    lattice_report, weight_count_multiplicities, Arrow, ClaimResult, Direction,
    KernelLatticeReport, LatticeNode, ANNIHILATION_TOLERANCE,
};
pub use tau::{
    assemble_all, assemble_tau, resolvent, resolvent_commutator_check, shift_residual, tau_sum,
    ResolventForm, TauCertificate, TauOperator, TAU_TOLERANCE,
};

/// Everything built on one truncated Fock space for one spin: generators,
/// the labeled `J²` spectrum, `ĵ`, both ladder families, their α-matrices
/// and (after [`build_taus`](Self::build_taus)) every `τ†_θ`.
#[derive(Clone, Debug)]
pub struct CasimirStack {
    pub basis: Arc<SectorBasis>,
    pub generators: Su2Generators,
    pub spectrum: CasimirSpectrum,
    pub jhat: SparseOperator,
    pub families: LadderFamily,
    alpha_p: AlphaMatrix,
    alpha_m: AlphaMatrix,
    taus: Vec<TauOperator>,
}

impl CasimirStack {
    /// Builds and certifies the whole stack.
    pub fn new(spin: u32, n_max: u32) -> Result<Self> {
        let mut stack = Self::unverified(spin, n_max)?;
        stack.verify_alphas()?;
        stack.build_taus()?;
        Ok(stack)
    }

    /// Operators and derived α-matrices only; nothing is checked and no
    /// `τ†` is built.
    pub fn unverified(spin: u32, n_max: u32) -> Result<Self> {
        let basis = Arc::new(SectorBasis::full(spin, n_max));
        let generators = su2_generators(&basis)?;
        let spectrum = CasimirSpectrum::new(&generators)?;
        let jhat = spectrum.jhat();
        let families = build_families(&basis, &generators)?;
        Ok(Self {
            alpha_p: AlphaMatrix::derive(spin, Family::P)?,
            alpha_m: AlphaMatrix::derive(spin, Family::M)?,
            basis,
            generators,
            spectrum,
            jhat,
            families,
            taus: Vec::new(),
        })
    }

    pub fn spin(&self) -> u32 {
        self.generators.spin
    }

    pub fn n_max(&self) -> u32 {
        self.basis.n_max()
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn alpha(&self, family: Family) -> &AlphaMatrix {
        match family {
            Family::P => &self.alpha_p,
            Family::M => &self.alpha_m,
        }
    }

    /// Column residuals of both α-matrices, P family first.
    pub fn verify_alphas(&self) -> Result<Vec<ResidualReport>> {
        let mut out = Vec::new();
        for family in [Family::P, Family::M] {
            out.extend(self.alpha(family).verify(
                &self.generators.j2,
                self.families.ops(family),
                &self.spectrum,
                &Restriction::kernel(1),
                ALPHA_TOLERANCE,
            )?);
        }
        Ok(out)
    }

    pub fn build_taus(&mut self) -> Result<()> {
        self.taus = assemble_all(self)?;
        Ok(())
    }

    /// Certified `τ†_θ`, ascending in `θ`; empty until built.
    pub fn taus(&self) -> &[TauOperator] {
        &self.taus
    }

    pub fn tau(&self, theta: i64) -> Option<&TauOperator> {
        self.taus.iter().find(|t| t.theta == theta)
    }
}
