use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::operator::{SparseOperator, C64};
use crate::schwinger::{j_from_casimir, jz_kernel};

use super::{CasimirStack, TauOperator};

/// Images smaller than this fraction of the operator's largest image on the
/// kernel count as annihilated.
/// `(n, j)`.
type NodeKey = (u32, u32);

pub const ANNIHILATION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeNode {
    pub n: u32,
    pub j: u32,
    pub dimension: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `τ†_θ: |n, j⟩ ↦ |n+1, j+θ⟩`.
    Raise,
    /// `τ_θ: |n, j⟩ ↦ |n−1, j−θ⟩`.
    Lower,
}

/// Action of one `τ†_θ` or `τ_θ` on one node. Norms are relative to the
/// operator's largest image over all kernel vectors in range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub n: u32,
    pub j: u32,
    pub direction: Direction,
    pub theta: i64,
    pub target_n: i64,
    pub target_j: i64,
    pub max_norm: f64,
    pub min_singular_value: f64,
    pub annihilated: bool,
    pub trivial_kernel: bool,
}

/// The `|n, j⟩` lattice of the `J_z` kernel and how every `τ†_θ`, `τ_θ`
/// moves between its nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLatticeReport {
    pub spin: u32,
    pub n_max: u32,
    pub nodes: Vec<LatticeNode>,
    /// `(n, dim)` of every weight-0 sector.
    pub sector_dimensions: Vec<(u32, usize)>,
    pub arrows: Vec<Arrow>,
}

impl KernelLatticeReport {
    pub fn node(&self, n: u32, j: u32) -> Option<&LatticeNode> {
        self.nodes.iter().find(|x| x.n == n && x.j == j)
    }

    pub fn arrows_for(&self, direction: Direction, theta: i64) -> impl Iterator<Item = &Arrow> {
        self.arrows
            .iter()
            .filter(move |a| a.direction == direction && a.theta == theta)
    }
}

type NodeMap = BTreeMap<(u32, u32), Vec<DVector<C64>>>;

fn kernel_nodes(stack: &CasimirStack) -> Result<NodeMap> {
    let mut nodes = NodeMap::new();
    for n in 0..=stack.n_max() {
        for v in jz_kernel(stack.basis(), &stack.generators, n)? {
            nodes.entry((n, v.j)).or_default().push(v.amplitudes);
        }
    }
    Ok(nodes)
}

fn apply(op: &SparseOperator, v: &DVector<C64>) -> DVector<C64> {
    DVector::from_vec(op.apply(v.as_slice()))
}

fn columns(vs: &[DVector<C64>]) -> DMatrix<C64> {
    DMatrix::from_columns(vs)
}

/// Left singular vectors and singular values, descending; only columns
/// with a positive singular value are meaningful.
///
/// nalgebra's SVD pairs singular values with the wrong vectors on some
/// rank-deficient inputs of the shape met here (tall, mostly zero rows).
/// Instead the matrix is reduced to a square triangular factor `S` by QR,
/// and `S` is decomposed through the Hermitian eigenproblem of
/// `[[0, S], [S^H, 0]]`, whose eigenpairs are `±σ`, `[u; ±v]/√2`. This
/// keeps absolute accuracy `ε‖S‖` without squaring the condition number.
fn thin_svd(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (DMatrix::zeros(rows, 0), Vec::new());
    }
    // M = Q S with S square, or for wide M, M = S with S = R^H from M^H = Q R.
    let (q, s) = if rows >= cols {
        let qr = m.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, m.adjoint().qr().r().adjoint())
    };
    let k = s.nrows();
    let mut h = DMatrix::<C64>::zeros(2 * k, 2 * k);
    h.view_mut((0, k), (k, k)).copy_from(&s);
    h.view_mut((k, 0), (k, k)).copy_from(&s.adjoint());
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(k);
    let root2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    let u_s = DMatrix::from_columns(
        &order
            .iter()
            .map(|&c| eig.eigenvectors.column(c).rows(0, k) * root2)
            .collect::<Vec<_>>(),
    );
    let sv = order.iter().map(|&c| eig.eigenvalues[c].max(0.0)).collect();
    let u = match q {
        Some(q) => q * u_s,
        None => u_s,
    };
    (u, sv)
}

fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    thin_svd(m).1
}

/// Applies every `τ†_θ` to the interior nodes (`n < n_max`) and every `τ_θ`
/// to all nodes, recording image sizes and checking that each nonzero image
/// lands in the node `(n ± 1, j ± θ)`.
pub fn lattice_report(stack: &CasimirStack, taus: &[TauOperator]) -> Result<KernelLatticeReport> {
    let basis = stack.basis();
    let nodes = kernel_nodes(stack)?;
    let sector_dimensions: Vec<(u32, usize)> = (0..=stack.n_max())
        .map(|n| (n, basis.sector_indices(n, 0).len()))
        .collect();
    for &(n, dim) in &sector_dimensions {
        let total: usize = nodes.iter().filter(|(k, _)| k.0 == n).map(|(_, v)| v.len()).sum();
        if total != dim {
            return Err(Error::LatticeViolation(format!(
                "nodes at n={n} span {total} states, weight-0 sector has {dim}"
            )));
        }
    }

    let mut arrows = Vec::new();
    for tau in taus {
        for direction in [Direction::Raise, Direction::Lower] {
            let op = match direction {
                Direction::Raise => tau.op.clone(),
                Direction::Lower => tau.lowering(),
            };
            let in_range = |n: u32| match direction {
                Direction::Raise => n < stack.n_max(),
                Direction::Lower => true,
            };
            let images: Vec<(NodeKey, Vec<DVector<C64>>)> = nodes
                .iter()
                .filter(|(k, _)| in_range(k.0))
                .map(|(&k, vs)| (k, vs.iter().map(|v| apply(&op, v)).collect()))
                .collect();
            let scale = images
                .iter()
                .flat_map(|(_, ws)| ws.iter().map(|w| w.norm()))
                .fold(0.0, f64::max)
                .max(1.0);
            for ((n, j), ws) in images {
                let (target_n, target_j) = match direction {
                    Direction::Raise => (n as i64 + 1, j as i64 + tau.theta),
                    Direction::Lower => (n as i64 - 1, j as i64 - tau.theta),
                };
                let max_norm = ws.iter().map(|w| w.norm()).fold(0.0, f64::max) / scale;
                let sv = singular_values(&columns(&ws));
                let min_singular_value = sv.last().copied().unwrap_or(0.0) / scale;
                let annihilated = max_norm <= ANNIHILATION_TOLERANCE;
                if !annihilated {
                    let target = (target_n >= 0 && target_j >= 0)
                        .then(|| nodes.get(&(target_n as u32, target_j as u32)))
                        .flatten();
                    let leak = leakage(&ws, target.map(Vec::as_slice).unwrap_or(&[]));
                    if leak > ANNIHILATION_TOLERANCE {
                        return Err(Error::LatticeViolation(format!(
                            "{direction:?} θ={} from (n={n}, j={j}): relative norm {leak:e} outside (n={target_n}, j={target_j})",
                            tau.theta
                        )));
                    }
                }
                arrows.push(Arrow {
                    n,
                    j,
                    direction,
                    theta: tau.theta,
                    target_n,
                    target_j,
                    max_norm,
                    min_singular_value,
                    annihilated,
                    trivial_kernel: min_singular_value > ANNIHILATION_TOLERANCE,
                });
            }
        }
    }
    Ok(KernelLatticeReport {
        spin: stack.spin(),
        n_max: stack.n_max(),
        nodes: nodes
            .iter()
            .map(|(&(n, j), vs)| LatticeNode {
                n,
                j,
                dimension: vs.len(),
            })
            .collect(),
        sector_dimensions,
        arrows,
    })
}

// Fraction of the images' norm outside span(target).
fn leakage(images: &[DVector<C64>], target: &[DVector<C64>]) -> f64 {
    let total: f64 = images.iter().map(|w| w.norm_squared()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outside: f64 = images
        .iter()
        .map(|w| {
            let mut r = w.clone();
            for u in target {
                let c = u.dotc(w);
                r -= u * c;
            }
            r.norm_squared()
        })
        .sum();
    (outside / total).sqrt()
}

/// One annihilation or kernel claim evaluated over the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: String,
    pub omega: u32,
    pub checked: usize,
    pub holds: bool,
    /// `(n, j)` of every node where the claim fails.
    pub offending: Vec<(u32, u32)>,
}

/// For `ω = 1..=s`:
///
/// * `τ_ω` annihilates the vacuum and every node with `j < ω`;
/// * `τ_{−ω}` annihilates nodes whose image would need `j + ω > (n−1)s`;
/// * `τ†_{−ω}` annihilates nodes with `j < ω`;
/// * `τ†_ω` has trivial kernel on every interior node when `ω ≡ s (mod 2)`,
///   and annihilates the one-particle nodes otherwise.
pub fn annihilation_claims(report: &KernelLatticeReport) -> Vec<ClaimResult> {
    let s = report.spin as i64;
    let mut out = Vec::new();
    let mut claim = |name: String,
                     omega: u32,
                     arrows: Vec<&Arrow>,
                     ok: &dyn Fn(&Arrow) -> bool| {
        let offending: Vec<(u32, u32)> = arrows
            .iter()
            .filter(|a| !ok(a))
            .map(|a| (a.n, a.j))
            .collect();
        out.push(ClaimResult {
            claim: name,
            omega,
            checked: arrows.len(),
            holds: offending.is_empty(),
            offending,
        });
    };
    for omega in 1..=report.spin {
        let w = omega as i64;
        claim(
            format!("tau_{w} annihilates the vacuum and j < {w}"),
            omega,
            report
                .arrows_for(Direction::Lower, w)
                .filter(|a| (a.j as i64) < w)
                .collect(),
            &|a| a.annihilated,
        );
        claim(
            format!("tau_{{-{w}}} annihilates j > (n-1)s - {w}"),
            omega,
            report
                .arrows_for(Direction::Lower, -w)
                .filter(|a| a.j as i64 > (a.n as i64 - 1) * s - w)
                .collect(),
            &|a| a.annihilated,
        );
        claim(
            format!("tau_dag_{{-{w}}} annihilates j < {w}"),
            omega,
            report
                .arrows_for(Direction::Raise, -w)
                .filter(|a| (a.j as i64) < w)
                .collect(),
            &|a| a.annihilated,
        );
        if (w - s).rem_euclid(2) == 0 {
            claim(
                format!("tau_dag_{w} has trivial kernel on interior nodes"),
                omega,
                report.arrows_for(Direction::Raise, w).collect(),
                &|a| a.trivial_kernel,
            );
        } else {
            claim(
                format!("tau_dag_{w} annihilates one-particle nodes"),
                omega,
                report
                    .arrows_for(Direction::Raise, w)
                    .filter(|a| a.n == 1)
                    .collect(),
                &|a| a.annihilated,
            );
        }
    }
    out
}

/// `j` multiplicities per particle number, built without diagonalizing
/// `J²`: starting from the vacuum (`j = 0`), level `n` is spanned by the
/// `τ†_θ` images of level `n − 1`, an image of a `j` vector carrying label
/// `j + θ`. Ranks come from singular values, thresholded against the
/// largest image at that level.
pub fn lattice_multiplicities(
    stack: &CasimirStack,
    taus: &[TauOperator],
) -> Result<BTreeMap<u32, BTreeMap<u32, usize>>> {
    let basis = stack.basis();
    let vac = basis
        .vacuum_index()
        .ok_or_else(|| Error::LatticeViolation("basis has no vacuum".into()))?;
    let mut e = DVector::zeros(basis.len());
    e[vac] = C64::new(1.0, 0.0);
    let mut level: BTreeMap<u32, Vec<DVector<C64>>> = BTreeMap::from([(0, vec![e])]);
    let mut out = BTreeMap::from([(0, BTreeMap::from([(0, 1)]))]);
    for n in 1..=stack.n_max() {
        let mut images: BTreeMap<u32, Vec<DVector<C64>>> = BTreeMap::new();
        for (&j, vs) in &level {
            for tau in taus {
                let target = j as i64 + tau.theta;
                if target < 0 {
                    continue;
                }
                for v in vs {
                    images.entry(target as u32).or_default().push(apply(&tau.op, v));
                }
            }
        }
        let decomposed: Vec<(u32, DMatrix<C64>, Vec<f64>)> = images
            .into_iter()
            .map(|(j, ws)| {
                let (u, sv) = thin_svd(&columns(&ws));
                (j, u, sv)
            })
            .collect();
        let top = decomposed
            .iter()
            .flat_map(|(_, _, sv)| sv.iter().copied())
            .fold(0.0, f64::max);
        let mut next = BTreeMap::new();
        let mut counts = BTreeMap::new();
        for (j, u, sv) in decomposed {
            let kept: Vec<DVector<C64>> = sv
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x > ANNIHILATION_TOLERANCE * top)
                .map(|(k, _)| u.column(k).into_owned())
                .collect();
            if !kept.is_empty() {
                counts.insert(j, kept.len());
                next.insert(j, kept);
            }
        }
        out.insert(n, counts);
        level = next;
    }
    Ok(out)
}

/// Oracle: `j` multiplicities from a dense eigen-solve of `J²` on each
/// weight-0 block.
pub fn brute_force_multiplicities(stack: &CasimirStack) -> BTreeMap<u32, BTreeMap<u32, usize>> {
    let basis = stack.basis();
    let j2 = &stack.generators.j2;
    (0..=stack.n_max())
        .map(|n| {
            let idx = basis.sector_indices(n, 0);
            let d = idx.len();
            let block = DMatrix::from_fn(d, d, |a, b| j2.get(idx[a], idx[b]).re);
            let mut counts = BTreeMap::new();
            for &x in block.symmetric_eigen().eigenvalues.iter() {
                *counts.entry(j_from_casimir(x).round() as u32).or_insert(0) += 1;
            }
            (n, counts)
        })
        .collect()
}

/// Oracle: multiplicity of `j` in `n` bosons of spin `s` from weight
/// counting, `c(n, j) − c(n, j+1)`, `c` the number of Fock states of
/// total `n` and weight `J_z = j`.
pub fn weight_count_multiplicities(spin: u32, n: u32) -> BTreeMap<u32, usize> {
    let basis = SectorBasis::full(spin, n);
    let count = |w: i64| {
        (0..basis.len())
            .filter(|&i| basis.total_of(i) == n && basis.weight_of(i) == w)
            .count()
    };
    (0..=n * spin)
        .filter_map(|j| {
            let m = count(j as i64) - count(j as i64 + 1);
            (m > 0).then_some((j, m))
        })
        .collect()
}

/// Rebuilds the irrep through a kernel vector by applying `J_+` and `J_−`
/// until they vanish, and returns the `J_z` weights reached.
pub fn irrep_weights(stack: &CasimirStack, v: &DVector<C64>) -> Vec<i64> {
    let basis = stack.basis();
    let g = &stack.generators;
    let weight_of = |w: &DVector<C64>| -> i64 {
        let (i, _) = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("nonempty basis");
        basis.weight_of(i)
    };
    // Below the edge of a spin-j irrep every step has |J_± w| ≥ √(2j) |w|,
    // so a relative floor per step separates the edge from roundoff, which
    // an absolute floor would let grow through repeated application.
    let mut weights = vec![weight_of(v)];
    for op in [&g.jplus, &g.jminus] {
        let mut w = v.clone();
        loop {
            let next = apply(op, &w);
            let ratio = next.norm() / w.norm();
            if ratio <= 1e-6 {
                break;
            }
            let norm = next.norm();
            w = next / C64::new(norm, 0.0);
            weights.push(weight_of(&w));
        }
    }
    weights.sort_unstable();
    weights
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rank one up to roundoff, three nonzero rows out of 56: the plain
    /// nalgebra SVD reports a top singular value above the Frobenius norm.
    #[test]
    fn thin_svd_on_sparse_tall_matrix() {
        let rows = [
            (17, 7.999999999999995, 72.00000000000001),
            (24, 2.8284271247461774, 25.455844122715703),
            (37, -9.797958971132722, -88.18163074019441),
        ];
        let mut m = DMatrix::<C64>::zeros(56, 2);
        for (i, a, b) in rows {
            m[(i, 0)] = C64::new(a, 0.0);
            m[(i, 1)] = C64::new(b, 0.0);
        }
        let (u, sv) = thin_svd(&m);
        assert!((sv[0] - m.norm()).abs() < 1e-10 * m.norm(), "{sv:?}");
        assert!(sv[1] < 1e-12 * sv[0]);
        let u0 = u.column(0);
        let residual = &m - u0 * (u0.adjoint() * &m);
        assert!(residual.norm() < 1e-12 * m.norm());
        // Each left vector must carry its singular value.
        for (c, &x) in sv.iter().enumerate() {
            assert!(((m.adjoint() * u.column(c)).norm() - x).abs() < 1e-10 * sv[0]);
        }
        let (_, wide) = thin_svd(&m.adjoint());
        assert!((wide[0] - sv[0]).abs() < 1e-10 * sv[0]);
    }

    #[test]
    fn spin_one_lattice_nodes() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let report = lattice_report(&stack, stack.taus()).unwrap();
        let low: Vec<(u32, u32, usize)> = report
            .nodes
            .iter()
            .filter(|x| x.n <= 3)
            .map(|x| (x.n, x.j, x.dimension))
            .collect();
        assert_eq!(
            low,
            vec![(0, 0, 1), (1, 1, 1), (2, 0, 1), (2, 2, 1), (3, 1, 1), (3, 3, 1)]
        );
    }

    #[test]
    fn spin_one_specific_annihilations() {
        let stack = CasimirStack::new(1, 4).unwrap();
        let report = lattice_report(&stack, stack.taus()).unwrap();
        let lower_minus = report
            .arrows_for(Direction::Lower, -1)
            .find(|a| a.n == 1 && a.j == 1)
            .unwrap();
        assert!(lower_minus.annihilated);
        for a in report.arrows_for(Direction::Lower, 1).filter(|a| a.j < 1) {
            assert!(a.annihilated, "({}, {})", a.n, a.j);
        }
    }

    #[test]
    fn claims_hold_for_small_spins() {
        for s in 1..=2 {
            let stack = CasimirStack::new(s, 5).unwrap();
            let report = lattice_report(&stack, stack.taus()).unwrap();
            for c in annihilation_claims(&report) {
                assert!(c.holds, "s={s}: {} fails at {:?}", c.claim, c.offending);
                assert!(c.checked > 0, "s={s}: {} checks nothing", c.claim);
            }
        }
    }

    #[test]
    fn tau_zero_preserves_j() {
        let stack = CasimirStack::new(2, 4).unwrap();
        let report = lattice_report(&stack, stack.taus()).unwrap();
        for a in report.arrows_for(Direction::Raise, 0) {
            assert_eq!(a.target_j, a.j as i64);
        }
    }

    #[test]
    fn multiplicities_agree_with_both_oracles() {
        for s in 1..=2 {
            let stack = CasimirStack::new(s, 4).unwrap();
            let lattice = lattice_multiplicities(&stack, stack.taus()).unwrap();
            let brute = brute_force_multiplicities(&stack);
            assert_eq!(lattice, brute, "s={s}");
            for n in 0..=4 {
                assert_eq!(brute[&n], weight_count_multiplicities(s, n), "s={s} n={n}");
            }
        }
    }

    #[test]
    fn irreps_have_odd_dimension() {
        let stack = CasimirStack::new(1, 3).unwrap();
        for n in 0..=3 {
            for v in jz_kernel(stack.basis(), &stack.generators, n).unwrap() {
                let w = irrep_weights(&stack, &v.amplitudes);
                let j = v.j as i64;
                assert_eq!(w, (-j..=j).collect::<Vec<_>>());
            }
        }
    }
}
