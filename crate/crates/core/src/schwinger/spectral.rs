use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::operator::{residual, SparseOperator, C64};

const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Eigen-decomposition of one `(N, J_z)` block. Eigenvalues ascend; column
/// `k` of `vectors` is the eigenvector for `eigenvalues[k]` in sector-local
/// coordinates (positions within `indices`).
#[derive(Clone, Debug)]
pub struct SectorEigen {
    pub n: u32,
    pub weight: i64,
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// Sector-wise diagonalization of an operator that is hermitian and
/// block-diagonal over `(N, J_z)` sectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    basis: Arc<SectorBasis>,
    sectors: Vec<SectorEigen>,
}

impl SpectralDecomposition {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        let basis = Arc::clone(h.basis());
        let key = |i: usize| (basis.total_of(i), basis.weight_of(i));
        for (r, c, _) in h.entries() {
            if key(r) != key(c) {
                return Err(Error::NotBlockDiagonal {
                    from_n: key(c).0,
                    from_w: key(c).1,
                    to_n: key(r).0,
                    to_w: key(r).1,
                });
            }
        }
        let dev = residual(h, &h.adjoint(), 0)?.frobenius_relative;
        if dev > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(dev));
        }

        let mut groups: BTreeMap<(u32, i64), Vec<usize>> = BTreeMap::new();
        for i in 0..basis.len() {
            groups.entry(key(i)).or_default().push(i);
        }
        let groups: Vec<_> = groups.into_iter().collect();
        let sectors = groups
            .into_par_iter()
            .map(|((n, weight), indices)| diagonalize_block(h, n, weight, indices))
            .collect();
        Ok(Self { basis, sectors })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn sectors(&self) -> &[SectorEigen] {
        &self.sectors
    }

    pub fn sector(&self, n: u32, weight: i64) -> Option<&SectorEigen> {
        self.sectors
            .iter()
            .find(|s| s.n == n && s.weight == weight)
    }

    /// Reassembles `Σ f(λ) |v⟩⟨v|`. A `None` from `f` is a pole.
    pub fn apply(&self, f: impl Fn(f64) -> Option<f64> + Sync) -> Result<SparseOperator> {
        self.apply_indexed(|_, sector, k| f(sector.eigenvalues[k]))
    }

    /// Like [`apply`](Self::apply), but the function sees the sector position,
    /// the sector and the eigenpair position, so it can depend on labels other
    /// than the raw eigenvalue.
    pub fn apply_indexed(
        &self,
        f: impl Fn(usize, &SectorEigen, usize) -> Option<f64> + Sync,
    ) -> Result<SparseOperator> {
        let blocks: Vec<Vec<(usize, usize, C64)>> = self
            .sectors
            .par_iter()
            .enumerate()
            .map(|(pos, sector)| {
                let values = (0..sector.eigenvalues.len())
                    .map(|k| {
                        f(pos, sector, k).ok_or(Error::Pole {
                            n: sector.n,
                            weight: sector.weight,
                            eigenvalue: sector.eigenvalues[k],
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(reassemble_block(sector, &values))
            })
            .collect::<Result<_>>()?;
        Ok(SparseOperator::from_triplets(
            &self.basis,
            blocks.into_iter().flatten(),
            0,
        ))
    }
}

fn diagonalize_block(h: &SparseOperator, n: u32, weight: i64, indices: Vec<usize>) -> SectorEigen {
    let d = indices.len();
    let block = DMatrix::from_fn(d, d, |a, b| h.get(indices[a], indices[b]));
    let (eigenvalues, vectors) = diagonalize_eigen(block);
    SectorEigen {
        n,
        weight,
        indices,
        eigenvalues,
        vectors,
    }
}

/// Hermitian eigen-solve of a dense block (symmetrized first), eigenvalues
/// ascending with matching eigenvector columns.
pub(crate) fn diagonalize_eigen(block: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let d = block.nrows();
    let block = (&block + block.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (eigenvalues, vectors)
}

fn reassemble_block(sector: &SectorEigen, values: &[f64]) -> Vec<(usize, usize, C64)> {
    let d = sector.indices.len();
    let v = &sector.vectors;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &f) in values.iter().enumerate() {
                if f != 0.0 {
                    acc += v[(a, k)] * v[(b, k)].conj() * f;
                }
            }
            if acc != C64::new(0.0, 0.0) {
                out.push((sector.indices[a], sector.indices[b], acc));
            }
        }
    }
    out
}

/// `f(H)` for hermitian, sector-block-diagonal `H`.
pub fn spectral_function(
    h: &SparseOperator,
    f: impl Fn(f64) -> Option<f64> + Sync,
) -> Result<SparseOperator> {
    SpectralDecomposition::new(h)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, residual};
    use crate::schwinger::su2_generators;

    fn gens(spin: u32, n_max: u32) -> crate::schwinger::Su2Generators {
        su2_generators(&Arc::new(SectorBasis::full(spin, n_max))).unwrap()
    }

    #[test]
    fn identity_function_reassembles() {
        let g = gens(1, 3);
        let back = spectral_function(&g.j2, Some).unwrap();
        assert!(residual(&back, &g.j2, 0).unwrap().frobenius_relative < 1e-10);
    }

    #[test]
    fn square_matches_product() {
        let g = gens(2, 3);
        let sq = spectral_function(&g.jz, |x| Some(x * x)).unwrap();
        let prod = &g.jz * &g.jz;
        assert!(residual(&sq, &prod, 0).unwrap().frobenius_relative < 1e-10);
    }

    #[test]
    fn result_commutes_with_input() {
        let g = gens(2, 3);
        let f = spectral_function(&g.j2, |x| Some((1.0 + x).ln())).unwrap();
        let c = commutator(&f, &g.j2).unwrap();
        assert!(c.frobenius_norm() < 1e-10 * g.j2.frobenius_norm());
    }

    #[test]
    fn j_labels_in_two_particle_kernel() {
        let g = gens(1, 2);
        let d = SpectralDecomposition::new(&g.j2).unwrap();
        let sector = d.sector(2, 0).unwrap();
        let js: Vec<f64> = sector
            .eigenvalues
            .iter()
            .map(|&x| 0.5 * ((1.0 + 4.0 * x).sqrt() - 1.0))
            .collect();
        assert_eq!(js.len(), 2);
        assert!(js[0].abs() < 1e-10);
        assert!((js[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn pole_reports_sector() {
        let g = gens(1, 2);
        let err = spectral_function(&g.j2, |x| (x.abs() > 1e-9).then(|| 1.0 / x)).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }

    #[test]
    fn rejects_sector_mixing() {
        let g = gens(1, 2);
        assert!(matches!(
            SpectralDecomposition::new(&g.jplus),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let g = gens(1, 2);
        let skew = &g.jz * &g.jz;
        let b = g.basis();
        let i = b.sector_indices(2, 0);
        let bad = &skew
            + &SparseOperator::from_triplets(b, [(i[0], i[1], C64::new(1.0, 0.0))], 0);
        assert!(matches!(
            SpectralDecomposition::new(&bad),
            Err(Error::NotHermitian(_))
        ));
    }
}
