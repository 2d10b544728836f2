//! Jordan–Schwinger realization of su(2) on `2s + 1` bosonic modes.

mod casimir;
mod spectral;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{mode_count, SectorBasis};
use crate::operator::{SparseOperator, C64};

pub use casimir::{
    j_from_casimir, j_hat, jz_kernel, CasimirSpectrum, KernelVector, SNAP_TOLERANCE,
};
pub(crate) use casimir::fix_phase;
pub use spectral::{spectral_function, SectorEigen, SpectralDecomposition};

/// Maps a `(2s+1) x (2s+1)` matrix `X` to `Σ x_ij a†_i a_j`, modes ordered
/// `μ = -s, ..., s`.
pub fn jordan_schwinger(basis: &Arc<SectorBasis>, x: &DMatrix<C64>) -> Result<SparseOperator> {
    let m = mode_count(basis.spin());
    if x.nrows() != m || x.ncols() != m {
        return Err(Error::DimensionMismatch {
            rows: x.nrows(),
            cols: x.ncols(),
            expected: m,
        });
    }
    let zero = C64::new(0.0, 0.0);
    let mut triplets = Vec::new();
    for c in 0..basis.len() {
        let st = basis.state(c);
        for j in 0..m {
            let nj = st.occupations()[j];
            if nj == 0 {
                continue;
            }
            let Some(lowered) = st.shifted(j, -1) else {
                continue;
            };
            for i in 0..m {
                let xij = x[(i, j)];
                if xij == zero {
                    continue;
                }
                let ni = lowered.occupations()[i];
                let Some(target) = lowered.shifted(i, 1) else {
                    continue;
                };
                if let Some(r) = basis.lookup(&target) {
                    let amp = ((nj as f64) * (ni as f64 + 1.0)).sqrt();
                    triplets.push((r, c, xij * amp));
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis, triplets, 0))
}

/// `N`, `J_z`, `J_±` and the Casimir `J²`; every one conserves total particle
/// number, so their particle budget is zero.
#[derive(Clone, Debug)]
pub struct Su2Generators {
    pub spin: u32,
    pub jz: SparseOperator,
    pub jplus: SparseOperator,
    pub jminus: SparseOperator,
    pub j2: SparseOperator,
    pub ntot: SparseOperator,
}

impl Su2Generators {
    pub fn basis(&self) -> &Arc<SectorBasis> {
        self.jz.basis()
    }
}

/// Spin-`s` generator matrices in the mode order `μ = -s, ..., s`.
pub fn spin_matrices(spin: u32) -> (DMatrix<C64>, DMatrix<C64>) {
    let m = mode_count(spin);
    let s = spin as i64;
    let jz = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            C64::new((i as i64 - s) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let jplus = DMatrix::from_fn(m, m, |i, j| {
        let mu = j as i64 - s;
        if i == j + 1 {
            C64::new((((s + mu + 1) * (s - mu)) as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (jz, jplus)
}

pub fn su2_generators(basis: &Arc<SectorBasis>) -> Result<Su2Generators> {
    let spin = basis.spin();
    if spin == 0 {
        return Err(Error::DegenerateSpin);
    }
    let m = mode_count(spin);
    let (jz_mat, jplus_mat) = spin_matrices(spin);
    let jz = jordan_schwinger(basis, &jz_mat)?;
    let jplus = jordan_schwinger(basis, &jplus_mat)?;
    let jminus = jplus.adjoint();
    let ntot = jordan_schwinger(basis, &DMatrix::identity(m, m))?;
    let j2 = &(&jz * &jz) + &(&(&jplus * &jminus) + &(&jminus * &jplus)).scale_real(0.5);
    Ok(Su2Generators {
        spin,
        jz,
        jplus,
        jminus,
        j2,
        ntot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use crate::operator::{commutator, residual};

    fn basis(spin: u32, n_max: u32) -> Arc<SectorBasis> {
        Arc::new(SectorBasis::full(spin, n_max))
    }

    fn ket(b: &SectorBasis, occ: &[u32]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); b.len()];
        v[b.lookup(&FockState::new(occ.to_vec())).unwrap()] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn identity_maps_to_number_operator() {
        let b = basis(1, 3);
        let n = jordan_schwinger(&b, &DMatrix::identity(3, 3)).unwrap();
        let v = ket(&b, &[1, 0, 1]);
        let out = n.apply(&v);
        for (x, y) in out.iter().zip(&v) {
            assert!((x - y * 2.0).norm() < 1e-15);
        }
        assert!((&n - &SparseOperator::total_number(&b)).is_zero());
    }

    #[test]
    fn diagonal_weights_give_jz() {
        let b = basis(1, 3);
        let (jz_mat, _) = spin_matrices(1);
        let jz = jordan_schwinger(&b, &jz_mat).unwrap();
        let out = jz.apply(&ket(&b, &[1, 0, 1]));
        assert!(out.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn dimension_mismatch() {
        let b = basis(1, 2);
        assert!(matches!(
            jordan_schwinger(&b, &DMatrix::identity(2, 2)),
            Err(Error::DimensionMismatch { expected: 3, .. })
        ));
    }

    #[test]
    fn jplus_raises_middle_mode() {
        let b = basis(1, 2);
        let g = su2_generators(&b).unwrap();
        let out = g.jplus.apply(&ket(&b, &[0, 1, 0]));
        let i = b.lookup(&FockState::new(vec![0, 0, 1])).unwrap();
        assert!((out[i].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_particle_casimir() {
        let b = basis(1, 2);
        let g = su2_generators(&b).unwrap();
        let v = ket(&b, &[0, 1, 0]);
        let out = g.j2.apply(&v);
        for (x, y) in out.iter().zip(&v) {
            assert!((x - y * 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn su2_relations_small() {
        let b = basis(2, 3);
        let g = su2_generators(&b).unwrap();
        let c = commutator(&g.jz, &g.jplus).unwrap();
        assert!(residual(&c, &g.jplus, 0).unwrap().frobenius_relative < 1e-12);
        let c = commutator(&g.jplus, &g.jminus).unwrap();
        assert!(residual(&c, &g.jz.scale_real(2.0), 0).unwrap().frobenius_relative < 1e-12);
        assert!(commutator(&g.ntot, &g.jz).unwrap().is_zero());
        assert!((g.jplus.adjoint() - &g.jminus).is_zero());
    }

    #[test]
    fn spin_zero_rejected() {
        let b = basis(0, 2);
        assert!(matches!(su2_generators(&b), Err(Error::DegenerateSpin)));
    }
}
