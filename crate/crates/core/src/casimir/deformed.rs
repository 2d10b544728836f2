use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{commutator, residual, residual_restricted, Restriction, ResidualReport, SparseOperator, C64};
use crate::schwinger::jz_kernel;

use super::{CasimirStack, TauOperator};

fn commutes_on(
    x: &SparseOperator,
    h: &SparseOperator,
    restriction: &Restriction,
) -> Result<ResidualReport> {
    let c = commutator(x, h)?;
    let zero = SparseOperator::zero(x.basis());
    // ‖X‖‖H‖ keeps the scale meaningful where both products vanish, e.g.
    // on j = 0 nodes where J² is zero.
    let scale = (x * h)
        .restricted_norm(restriction)?
        .max((h * x).restricted_norm(restriction)?)
        .max(x.restricted_norm(restriction)? * h.restricted_norm(restriction)?);
    residual_restricted(&c, &zero, restriction, scale)
}

/// `L_z^ω = [τ†_{−ω}, τ_{−ω}]` and `L²_ω = (L_z^ω)² + ½(τ†τ + ττ†)` with
/// their hermiticity defects and commutators with `J²` and `N` on the
/// weight-0 interior at margin 2.
#[derive(Clone, Debug)]
pub struct DeformedGenerators {
    pub omega: u32,
    pub lz: SparseOperator,
    pub l2: SparseOperator,
    pub lz_hermiticity: f64,
    pub l2_hermiticity: f64,
    /// `(generator, partner, residual)`.
    pub commutators: Vec<(String, String, ResidualReport)>,
}

pub fn deformed_generators(stack: &CasimirStack, tau_minus: &TauOperator) -> Result<DeformedGenerators> {
    if tau_minus.theta >= 0 {
        return Err(Error::InvalidTheta {
            theta: tau_minus.theta,
            expected: "θ = −ω with ω ≥ 1".into(),
        });
    }
    let omega = tau_minus.theta.unsigned_abs() as u32;
    let up = &tau_minus.op;
    let down = tau_minus.lowering();
    let ud = up * &down;
    let du = &down * up;
    let lz = &ud - &du;
    let l2 = &(&lz * &lz) + &(&ud + &du).scale_real(0.5);
    let lz_hermiticity = residual(&lz, &lz.adjoint(), 0)?.frobenius_relative;
    let l2_hermiticity = residual(&l2, &l2.adjoint(), 0)?.frobenius_relative;
    let restriction = Restriction::kernel(2);
    let g = &stack.generators;
    let mut commutators = Vec::new();
    for (name, x) in [("Lz", &lz), ("L2", &l2)] {
        for (hname, h) in [("J2", &g.j2), ("N", &g.ntot)] {
            commutators.push((
                name.to_string(),
                hname.to_string(),
                commutes_on(x, h, &restriction)?,
            ));
        }
    }
    Ok(DeformedGenerators {
        omega,
        lz,
        l2,
        lz_hermiticity,
        l2_hermiticity,
        commutators,
    })
}

/// Kernel nodes sharing one residue `r = j mod ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub omega: u32,
    pub residue: u32,
    pub nodes: Vec<(u32, u32)>,
}

/// Partitions the kernel nodes `(n, j)` with `n ≤ n_max` by `j mod ω`.
pub fn residue_classes(stack: &CasimirStack, omega: u32) -> Result<Vec<ResidueClass>> {
    if omega == 0 {
        return Err(Error::InvalidTheta {
            theta: 0,
            expected: "ω ≥ 1".into(),
        });
    }
    let mut classes: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for n in 0..=stack.n_max() {
        let mut js: Vec<u32> = jz_kernel(stack.basis(), &stack.generators, n)?
            .iter()
            .map(|v| v.j)
            .collect();
        js.dedup();
        for j in js {
            classes.entry(j % omega).or_default().push((n, j));
        }
    }
    Ok(classes
        .into_iter()
        .map(|(residue, nodes)| ResidueClass {
            omega,
            residue,
            nodes,
        })
        .collect())
}

/// How the `τ†_θτ_θ` act inside one `(n, j)` node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSeparation {
    pub n: u32,
    pub j: u32,
    pub dimension: usize,
    /// Ascending eigenvalues of each `τ†_θτ_θ` restricted to the node.
    pub spectra: Vec<(i64, Vec<f64>)>,
    /// Largest `‖[B_θ, B_θ']‖ / (‖B_θ‖‖B_θ'‖)` among the restricted matrices.
    pub max_mutual_commutator: f64,
    /// First `θ` in the order `1, −1, 2, −2, …, 0` whose restricted spectrum
    /// is nondegenerate.
    pub separating_theta: Option<i64>,
    pub separated: bool,
}

#[derive(Clone, Debug)]
pub struct CompleteSetReport {
    /// `(θ, partner, residual)` for `[τ†_θτ_θ, partner]`.
    pub commutators: Vec<(i64, String, ResidualReport)>,
    pub nodes: Vec<NodeSeparation>,
}

impl CompleteSetReport {
    pub fn all_separated(&self) -> bool {
        self.nodes.iter().all(|n| n.separated)
    }

    pub fn first_degenerate_node(&self) -> Option<&NodeSeparation> {
        self.nodes.iter().find(|n| n.dimension > 1)
    }
}

const DEGENERACY_TOLERANCE: f64 = 1e-6;

fn theta_order(spin: u32) -> Vec<i64> {
    let mut out = Vec::new();
    for w in 1..=spin as i64 {
        out.push(w);
        out.push(-w);
    }
    out.push(0);
    out
}

/// Commutators of every `τ†_θτ_θ` with `J²`, `J_z`, `N` on the weight-0
/// interior at margin 2, plus for each kernel node with `n ≤ n_sep` the
/// restricted spectra used to tell its states apart.
pub fn complete_set_check(stack: &CasimirStack, taus: &[TauOperator], n_sep: u32) -> Result<CompleteSetReport> {
    let restriction = Restriction::kernel(2);
    let g = &stack.generators;
    let products: BTreeMap<i64, SparseOperator> =
        taus.iter().map(|t| (t.theta, &t.op * &t.lowering())).collect();
    let mut commutators = Vec::new();
    for (&theta, x) in &products {
        for (name, h) in [("J2", &g.j2), ("Jz", &g.jz), ("N", &g.ntot)] {
            commutators.push((theta, name.to_string(), commutes_on(x, h, &restriction)?));
        }
    }

    let order: Vec<i64> = theta_order(stack.spin())
        .into_iter()
        .filter(|t| products.contains_key(t))
        .collect();
    let mut nodes = Vec::new();
    for n in 0..=n_sep.min(stack.n_max()) {
        let kernel = jz_kernel(stack.basis(), g, n)?;
        let mut by_j: BTreeMap<u32, Vec<_>> = BTreeMap::new();
        for v in kernel {
            by_j.entry(v.j).or_default().push(v.amplitudes);
        }
        for (j, vs) in by_j {
            let d = vs.len();
            let v = DMatrix::from_columns(&vs);
            let blocks: Vec<(i64, DMatrix<C64>)> = order
                .iter()
                .map(|&t| {
                    let x = &products[&t];
                    let xv = DMatrix::from_fn(v.nrows(), d, |r, c| {
                        x.row(r).iter().map(|&(k, z)| z * v[(k, c)]).sum::<C64>()
                    });
                    (t, v.adjoint() * xv)
                })
                .collect();
            let mut spectra = Vec::new();
            let mut separating_theta = None;
            for (t, b) in &blocks {
                let h = (b + b.adjoint()) * C64::new(0.5, 0.0);
                let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                let top = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let distinct = ev.windows(2).all(|w| w[1] - w[0] > DEGENERACY_TOLERANCE * top);
                if d > 1 && distinct && separating_theta.is_none() {
                    separating_theta = Some(*t);
                }
                spectra.push((*t, ev));
            }
            let mut max_mutual_commutator: f64 = 0.0;
            for (a, (_, ba)) in blocks.iter().enumerate() {
                for (_, bb) in &blocks[a + 1..] {
                    let denom = ba.norm() * bb.norm();
                    if denom > 0.0 {
                        let c = ba * bb - bb * ba;
                        max_mutual_commutator = max_mutual_commutator.max(c.norm() / denom);
                    }
                }
            }
            nodes.push(NodeSeparation {
                n,
                j,
                dimension: d,
                spectra,
                max_mutual_commutator,
                separating_theta,
                separated: d == 1 || separating_theta.is_some(),
            });
        }
    }
    Ok(CompleteSetReport { commutators, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_one_deformed_generators() {
        let stack = CasimirStack::new(1, 5).unwrap();
        let d = deformed_generators(&stack, stack.tau(-1).unwrap()).unwrap();
        assert_eq!(d.omega, 1);
        assert!(d.lz_hermiticity < 1e-10 && d.l2_hermiticity < 1e-10);
        for (x, h, r) in &d.commutators {
            assert!(r.passes(1e-8), "[{x}, {h}]: {r:?}");
        }
    }

    #[test]
    fn positive_theta_rejected() {
        let stack = CasimirStack::new(1, 3).unwrap();
        assert!(matches!(
            deformed_generators(&stack, stack.tau(1).unwrap()),
            Err(Error::InvalidTheta { theta: 1, .. })
        ));
    }

    #[test]
    fn residues() {
        let stack = CasimirStack::new(2, 4).unwrap();
        assert_eq!(residue_classes(&stack, 1).unwrap().len(), 1);
        let two = residue_classes(&stack, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two[1].nodes.contains(&(3, 3)));
    }

    #[test]
    fn spin_two_complete_set() {
        let stack = CasimirStack::new(2, 5).unwrap();
        let report = complete_set_check(&stack, stack.taus(), 4).unwrap();
        for (t, h, r) in &report.commutators {
            assert!(r.passes(1e-8), "θ={t} {h}: {r:?}");
        }
        let first = report.first_degenerate_node().unwrap();
        assert_eq!((first.n, first.j, first.dimension), (4, 2, 2));
        assert!(report.all_separated());
        // The restricted τ†τ do not commute with one another on (4, 2).
        assert!(first.max_mutual_commutator > 1e-3);
    }

    #[test]
    fn spin_one_separation_is_trivial() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let report = complete_set_check(&stack, stack.taus(), 4).unwrap();
        assert!(report.nodes.iter().all(|n| n.dimension == 1));
        assert!(report.all_separated());
    }
}
