use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::operator::{SparseOperator, C64};

use super::spectral::{diagonalize_eigen, SectorEigen, SpectralDecomposition};
use super::Su2Generators;

/// Maximum distance between a computed `ĵ` eigenvalue and the integer it is
/// snapped to.
pub const SNAP_TOLERANCE: f64 = 1e-6;

/// Inverse of `j(j+1)`: `½(√(1+4x) − 1)`.
pub fn j_from_casimir(x: f64) -> f64 {
    0.5 * ((1.0 + 4.0 * x).max(0.0).sqrt() - 1.0)
}

fn snap(n: u32, weight: i64, x: f64) -> Result<u32> {
    let j = j_from_casimir(x);
    let nearest = j.round();
    if (j - nearest).abs() > SNAP_TOLERANCE || nearest < 0.0 {
        return Err(Error::NonIntegerJ {
            n,
            weight,
            value: j,
            tolerance: SNAP_TOLERANCE,
        });
    }
    Ok(nearest as u32)
}

/// Sector-wise diagonalization of `J²` with every eigenpair labeled by its
/// integer `j`. Functions of the commuting pair `(N, ĵ)` are realized on
/// top of it.
#[derive(Clone, Debug)]
pub struct CasimirSpectrum {
    decomposition: SpectralDecomposition,
    labels: Vec<Vec<u32>>,
}

impl CasimirSpectrum {
    pub fn new(generators: &Su2Generators) -> Result<Self> {
        let decomposition = SpectralDecomposition::new(&generators.j2)?;
        let labels = decomposition
            .sectors()
            .iter()
            .map(|s| {
                s.eigenvalues
                    .iter()
                    .map(|&x| snap(s.n, s.weight, x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            decomposition,
            labels,
        })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        self.decomposition.basis()
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// `(sector, j labels)` pairs in sector order.
    pub fn labeled_sectors(&self) -> impl Iterator<Item = (&SectorEigen, &[u32])> {
        self.decomposition
            .sectors()
            .iter()
            .zip(self.labels.iter().map(Vec::as_slice))
    }

    /// `f(N, ĵ)`; `None` marks a pole.
    pub fn function(&self, f: impl Fn(u32, u32) -> Option<f64> + Sync) -> Result<SparseOperator> {
        self.decomposition
            .apply_indexed(|pos, sector, k| f(sector.n, self.labels[pos][k]))
    }

    /// `g(ĵ)` evaluated on the snapped integer labels.
    pub fn of_j(&self, g: impl Fn(u32) -> Option<f64> + Sync) -> Result<SparseOperator> {
        self.function(|_, j| g(j))
    }

    /// `ĵ` itself, with snapped eigenvalues.
    pub fn jhat(&self) -> SparseOperator {
        self.of_j(|j| Some(j as f64)).expect("identity has no poles")
    }

    /// Largest `j` present among the `N = n` sectors.
    pub fn max_j(&self, n: u32) -> Option<u32> {
        self.labeled_sectors()
            .filter(|(s, _)| s.n == n)
            .flat_map(|(_, l)| l.iter().copied())
            .max()
    }
}

/// `ĵ = ½(√(Î + 4J²) − Î)` through the spectral calculus, with every
/// eigenvalue checked to sit within [`SNAP_TOLERANCE`] of an integer.
pub fn j_hat(generators: &Su2Generators) -> Result<SparseOperator> {
    let decomposition = SpectralDecomposition::new(&generators.j2)?;
    for s in decomposition.sectors() {
        for &x in &s.eigenvalues {
            snap(s.n, s.weight, x)?;
        }
    }
    decomposition.apply(|x| Some(j_from_casimir(x)))
}

/// Orthonormal eigenvector of `J²` in the weight-0, `n`-particle sector.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelVector {
    pub n: u32,
    pub j: u32,
    /// Amplitudes over the full ambient basis.
    pub amplitudes: DVector<C64>,
}

impl KernelVector {
    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }
}

/// Orthonormal basis of the `J_z` kernel inside the `n`-particle sector,
/// labeled by `j`. Vectors are sorted by `j`; within a degenerate `j` the
/// eigenspace is re-orthonormalized from its projections of the Fock states
/// in basis order, so the result does not depend on the eigensolver's
/// choice of vectors. Each vector's first nonzero amplitude is real positive.
pub fn jz_kernel(
    basis: &Arc<SectorBasis>,
    generators: &Su2Generators,
    n: u32,
) -> Result<Vec<KernelVector>> {
    if n > basis.n_max() {
        return Err(Error::ParticleNumberOutOfRange {
            n,
            n_max: basis.n_max(),
        });
    }
    let indices = basis.sector_indices(n, 0);
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    let d = indices.len();
    let block = DMatrix::from_fn(d, d, |a, b| generators.j2.get(indices[a], indices[b]));
    let (values, vectors) = diagonalize_eigen(block);
    let labels = values
        .iter()
        .map(|&x| snap(n, 0, x))
        .collect::<Result<Vec<_>>>()?;

    let mut js = labels.clone();
    js.dedup();
    let mut out = Vec::with_capacity(d);
    for j in js {
        let cols: Vec<usize> = (0..d).filter(|&k| labels[k] == j).collect();
        let v = DMatrix::from_fn(d, cols.len(), |r, c| vectors[(r, cols[c])]);
        let projector = &v * v.adjoint();
        let mut kept: Vec<DVector<C64>> = Vec::with_capacity(cols.len());
        for e in 0..d {
            if kept.len() == cols.len() {
                break;
            }
            let mut w = projector.column(e).into_owned();
            for q in &kept {
                let overlap = q.dotc(&w);
                w -= q * overlap;
            }
            let norm = w.norm();
            if norm > 1e-8 {
                kept.push(w / C64::new(norm, 0.0));
            }
        }
        for local in kept {
            let local = fix_phase(local);
            let mut amplitudes = DVector::zeros(basis.len());
            for (k, &i) in indices.iter().enumerate() {
                amplitudes[i] = local[k];
            }
            out.push(KernelVector { n, j, amplitudes });
        }
    }
    Ok(out)
}

pub(crate) fn fix_phase(v: DVector<C64>) -> DVector<C64> {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(&z) => v * (z.conj() / z.norm()),
        None => v,
    }
}
