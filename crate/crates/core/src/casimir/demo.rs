//! Spin-1 constructions: Weyl pair `A`, `A†`, the su(2) triple `L_±`, `L_z`,
//! the canonical basis and the commutator forms of the ladders.

use nalgebra::DVector;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{check_rlo, poly_operator, JPoly};
use crate::operator::{commutator, residual_restricted, Restriction, ResidualReport, SparseOperator, C64};
use crate::schwinger::{jz_kernel, CasimirSpectrum};

use super::{CasimirStack, TauOperator};

fn require_spin_one(stack: &CasimirStack) -> Result<()> {
    if stack.spin() != 1 {
        return Err(Error::UnsupportedSpin {
            spin: stack.spin(),
            expected: 1,
        });
    }
    Ok(())
}

fn tau_or_err(stack: &CasimirStack, theta: i64) -> Result<&TauOperator> {
    stack.tau(theta).ok_or(Error::InvalidTheta {
        theta,
        expected: "an assembled τ† (build the stack with CasimirStack::new)".into(),
    })
}

/// `τ†_1 = p†_0(ĵ+1) + 2p†_1` and `τ†_{−1} = p†_0 ĵ − 2p†_1`, the
/// conventional spin-1 normalization.
pub fn conventional_tau(stack: &CasimirStack, theta: i64) -> Result<SparseOperator> {
    require_spin_one(stack)?;
    let p0 = stack.families.p(0);
    let p1 = stack.families.p(1);
    let coefficients = match theta {
        1 => (JPoly::from_ints(&[1, 1]), 2.0),
        -1 => (JPoly::j(), -2.0),
        _ => {
            return Err(Error::InvalidTheta {
                theta,
                expected: "θ = ±1".into(),
            })
        }
    };
    let f = poly_operator(&stack.spectrum, &coefficients.0)?;
    Ok(&(p0 * &f) + &p1.scale_real(coefficients.1))
}

/// Comparison of an assembled `τ†_θ` with its conventional form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionalMatch {
    pub theta: i64,
    /// `conventional = scale · assembled`, read off the σ_s coefficients.
    pub scale: String,
    /// Whether every σ_k matches the conventional coefficient after scaling,
    /// in exact arithmetic.
    pub exact: bool,
    /// Largest entry of `|conventional − scale · assembled|` over the largest
    /// entry of `|conventional|`.
    pub entrywise_residual: f64,
}

pub fn conventional_match(stack: &CasimirStack, theta: i64) -> Result<ConventionalMatch> {
    let tau = tau_or_err(stack, theta)?;
    let conventional_sigmas = match theta {
        1 => [JPoly::from_ints(&[1, 1]), JPoly::int(2)],
        _ => [JPoly::j(), JPoly::int(-2)],
    };
    let ours = &tau.sigma.sigmas;
    let scale: BigRational = conventional_sigmas[1].coeff(0) / ours[1].coeff(0);
    let exact = ours
        .iter()
        .zip(&conventional_sigmas)
        .all(|(o, c)| &o.scale(&scale) == c);
    let conventional = conventional_tau(stack, theta)?;
    let factor = num_traits::ToPrimitive::to_f64(&scale).unwrap_or(f64::NAN);
    let diff = &conventional - &tau.op.scale_real(factor);
    let max_abs = |x: &SparseOperator| x.entries().map(|(_, _, z)| z.norm()).fold(0.0, f64::max);
    let denom = max_abs(&conventional);
    Ok(ConventionalMatch {
        theta,
        scale: scale.to_string(),
        exact,
        entrywise_residual: if denom > 0.0 { max_abs(&diff) / denom } else { max_abs(&diff) },
    })
}

/// `A`, `A†`, `L_±`, `L_z`, `L²` for spin 1.
#[derive(Clone, Debug)]
pub struct DemoOperators {
    pub a: SparseOperator,
    pub adag: SparseOperator,
    pub lplus: SparseOperator,
    pub lminus: SparseOperator,
    pub lz: SparseOperator,
    pub l2: SparseOperator,
}

fn lplus_factor(spectrum: &CasimirSpectrum) -> Result<SparseOperator> {
    spectrum.of_j(|j| {
        let j = j as f64;
        Some(1.0 / (2.0 * 2f64.sqrt() * (j + 1.0).sqrt()) * ((2.0 * j + 1.0) / (2.0 * j + 3.0)).sqrt())
    })
}

/// `A† = τ†_1 f(N, ĵ)` with
/// `f = 1/(2√(ĵ+1)) · 1/√(N+ĵ+3) · √(2ĵ+3)/√(2ĵ+1)`, and
/// `L_+ = g(ĵ) τ†_{−1}` with `g = 1/(2√2 √(ĵ+1)) · √(2ĵ+1)/√(2ĵ+3)`,
/// both `τ†` in the conventional normalization. `g` acts on the outgoing
/// label, so it stands to the left. Then `L_z = ½[L_+, L_−]` and
/// `L² = L_z² + L_z + L_−L_+`.
pub fn demo_s1_operators(stack: &CasimirStack) -> Result<DemoOperators> {
    require_spin_one(stack)?;
    let raise = conventional_tau(stack, 1)?;
    let lower = conventional_tau(stack, -1)?;
    let fa = stack.spectrum.function(|n, j| {
        let (n, j) = (n as f64, j as f64);
        let radicand = n + j + 3.0;
        (radicand > 0.0).then(|| {
            1.0 / (2.0 * (j + 1.0).sqrt()) / radicand.sqrt() * ((2.0 * j + 3.0) / (2.0 * j + 1.0)).sqrt()
        })
    })?;
    let adag = &raise * &fa;
    let a = adag.adjoint();
    let lplus = &lplus_factor(&stack.spectrum)? * &lower;
    let lminus = lplus.adjoint();
    let lz = commutator(&lplus, &lminus)?.scale_real(0.5);
    let l2 = &(&(&lz * &lz) + &lz) + &(&lminus * &lplus);
    Ok(DemoOperators {
        a,
        adag,
        lplus,
        lminus,
        lz,
        l2,
    })
}

/// `L_+` with `g(ĵ)` on the right of `τ†_{−1}`; fails the `L_z`, `L²`
/// eigenvalue checks and is kept to document that.
pub fn lplus_factor_right(stack: &CasimirStack) -> Result<SparseOperator> {
    require_spin_one(stack)?;
    Ok(&conventional_tau(stack, -1)? * &lplus_factor(&stack.spectrum)?)
}

/// Deviation of `X v` from `λ v` for one kernel eigenvector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeEigenCheck {
    pub operator: String,
    pub n: u32,
    pub j: u32,
    pub expected: f64,
    pub measured: f64,
    /// `‖Xv − λv‖ / max(1, |λ|)`.
    pub residual: f64,
}

/// `A†A → j`, `L_z → (n−j)/2 − (n+j)/4`, `L² → (n+j)/4·((n+j)/4 + 1)` on
/// every kernel node with `n ≤ n_top`.
pub fn demo_eigen_checks(
    stack: &CasimirStack,
    ops: &DemoOperators,
    lz: &SparseOperator,
    l2: &SparseOperator,
    n_top: u32,
) -> Result<Vec<NodeEigenCheck>> {
    let ada = &ops.adag * &ops.a;
    let mut out = Vec::new();
    for n in 0..=n_top.min(stack.n_max()) {
        for v in jz_kernel(stack.basis(), &stack.generators, n)? {
            let (nf, jf) = (n as f64, v.j as f64);
            let q = (nf + jf) / 4.0;
            for (name, op, expected) in [
                ("AdagA", &ada, jf),
                ("Lz", lz, (nf - jf) / 2.0 - q),
                ("L2", l2, q * (q + 1.0)),
            ] {
                let x = DVector::from_vec(op.apply(v.as_slice()));
                let measured = v.amplitudes.dotc(&x).re;
                let r = (&x - &v.amplitudes * C64::new(expected, 0.0)).norm();
                out.push(NodeEigenCheck {
                    operator: name.to_string(),
                    n,
                    j: v.j,
                    expected,
                    measured,
                    residual: r / expected.abs().max(1.0),
                });
            }
        }
    }
    Ok(out)
}

/// `[A, A†] − Î` on the weight-0 interior at margin 2.
pub fn weyl_residual(stack: &CasimirStack, ops: &DemoOperators) -> Result<ResidualReport> {
    let c = commutator(&ops.a, &ops.adag)?;
    let id = SparseOperator::identity(stack.basis());
    let restriction = Restriction::kernel(2);
    let scale = (&ops.a * &ops.adag).restricted_norm(&restriction)?;
    residual_restricted(&c, &id, &restriction, scale)
}

/// A spin-1 canonical basis vector `|n, j, j_z⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalVector {
    pub n: u32,
    pub j: u32,
    pub jz: i64,
    /// Norm of the unnormalized construction.
    pub norm: f64,
    pub amplitudes: Vec<C64>,
}

/// `normalize(J_±^{|j_z|} (τ†_{−1})^{(n−j)/2} (τ†_1)^{(n+j)/2} |0⟩)`, first
/// nonzero amplitude made real positive.
pub fn canonical_vector(stack: &CasimirStack, n: u32, j: u32, jz: i64) -> Result<CanonicalVector> {
    require_spin_one(stack)?;
    if j > n || !(n - j).is_multiple_of(2) || jz.unsigned_abs() > j as u64 || n > stack.n_max() {
        return Err(Error::InvalidLabel { n, j, jz });
    }
    let basis = stack.basis();
    let mut v = vec![C64::new(0.0, 0.0); basis.len()];
    v[basis.vacuum_index().expect("full basis has a vacuum")] = C64::new(1.0, 0.0);
    let up = &tau_or_err(stack, 1)?.op;
    let down = &tau_or_err(stack, -1)?.op;
    for _ in 0..(n + j) / 2 {
        v = up.apply(&v);
    }
    for _ in 0..(n - j) / 2 {
        v = down.apply(&v);
    }
    let ladder = if jz >= 0 {
        &stack.generators.jplus
    } else {
        &stack.generators.jminus
    };
    for _ in 0..jz.unsigned_abs() {
        v = ladder.apply(&v);
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::ZeroVector { n, j, jz });
    }
    let v = DVector::from_vec(v) / C64::new(norm, 0.0);
    let v = crate::schwinger::fix_phase(v);
    Ok(CanonicalVector {
        n,
        j,
        jz,
        norm,
        amplitudes: v.iter().copied().collect(),
    })
}

/// Every `|n, j, j_z⟩` with `n ≤ n_top`, ordered by `n`, `j`, `j_z`.
pub fn canonical_basis_s1(stack: &CasimirStack, n_top: u32) -> Result<Vec<CanonicalVector>> {
    require_spin_one(stack)?;
    let mut out = Vec::new();
    for n in 0..=n_top.min(stack.n_max()) {
        for j in (n % 2..=n).step_by(2) {
            for jz in -(j as i64)..=j as i64 {
                out.push(canonical_vector(stack, n, j, jz)?);
            }
        }
    }
    Ok(out)
}

/// Residuals of the commutator forms `τ̄†_{±1} = ±[ĵ, a†_0] + a†_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauBarReport {
    /// `[ĵ, [ĵ, a†_0]] − a†_0`, margin 2.
    pub double_commutator: ResidualReport,
    /// `(θ, [J², τ̄†_θ] − τ̄†_θ P_θ)`.
    pub raising: Vec<(i64, ResidualReport)>,
    /// `(θ, [τ̄_θ, J²] − P_θ τ̄_θ)`.
    pub lowering: Vec<(i64, ResidualReport)>,
    /// `(θ, λ)` minimizing `‖[J², τ̄†_θ] − λ τ̄†_θ P_θ‖`.
    pub fitted_scale: Vec<(i64, f64)>,
    /// Per node: `(n, j, θ, ratio, collinearity residual)` of `τ̄†_θ v`
    /// against `τ†_θ v`.
    pub node_ratios: Vec<(u32, u32, i64, f64, f64)>,
}

impl TauBarReport {
    pub fn max_collinearity(&self) -> f64 {
        self.node_ratios.iter().map(|r| r.4).fold(0.0, f64::max)
    }
}

fn restricted_inner(x: &SparseOperator, y: &SparseOperator, restriction: &Restriction) -> f64 {
    let basis = x.basis();
    let cap = basis.n_max().saturating_sub(restriction.margin);
    x.entries()
        .filter(|&(r, c, _)| basis.total_of(r) <= cap && restriction.column_selected(basis, c))
        .map(|(r, c, z)| (y.get(r, c).conj() * z).re)
        .sum()
}

pub fn tau_bar_forms(stack: &CasimirStack) -> Result<TauBarReport> {
    require_spin_one(stack)?;
    let basis = stack.basis();
    let jh = &stack.jhat;
    let a0dag = SparseOperator::creation(basis, 0)?;
    let x = commutator(jh, &a0dag)?;
    let margin2 = Restriction::kernel(2);
    let double = commutator(jh, &x)?;
    let scale = (jh * &x).restricted_norm(&margin2)?;
    let double_commutator = residual_restricted(&double, &a0dag, &margin2, scale)?;

    let restriction = Restriction::kernel(1);
    let j2 = &stack.generators.j2;
    let mut raising = Vec::new();
    let mut lowering = Vec::new();
    let mut fitted_scale = Vec::new();
    let mut node_ratios = Vec::new();
    for theta in [1i64, -1] {
        let bar = &x.scale_real(theta as f64) + &a0dag;
        let right = poly_operator(&stack.spectrum, &JPoly::shift_function(theta))?;
        raising.push((theta, check_rlo(j2, &bar, &right, &restriction, 1e-8)?));

        let bar_down = bar.adjoint();
        let lhs = commutator(&bar_down, j2)?;
        let rhs = &right * &bar_down;
        let s = (&bar_down * j2).restricted_norm(&restriction)?;
        lowering.push((theta, residual_restricted(&lhs, &rhs, &restriction, s)?));

        let c = commutator(j2, &bar)?;
        let y = &bar * &right;
        let yy = restricted_inner(&y, &y, &restriction);
        fitted_scale.push((theta, if yy > 0.0 { restricted_inner(&c, &y, &restriction) / yy } else { 0.0 }));

        let tau = &tau_or_err(stack, theta)?.op;
        for n in 0..stack.n_max() {
            for v in jz_kernel(basis, &stack.generators, n)? {
                let t = DVector::from_vec(tau.apply(v.as_slice()));
                let b = DVector::from_vec(bar.apply(v.as_slice()));
                let tt = t.norm_squared();
                let (ratio, resid) = if tt > 1e-20 {
                    let r = t.dotc(&b) / C64::new(tt, 0.0);
                    (r.re, (&b - &t * r).norm() / b.norm().max(1e-300))
                } else {
                    (0.0, b.norm())
                };
                node_ratios.push((n, v.j, theta, ratio, resid));
            }
        }
    }
    Ok(TauBarReport {
        double_commutator,
        raising,
        lowering,
        fitted_scale,
        node_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(n_max: u32) -> CasimirStack {
        CasimirStack::new(1, n_max).unwrap()
    }

    #[test]
    fn conventional_forms_match_up_to_scale() {
        let s = stack(4);
        let up = conventional_match(&s, 1).unwrap();
        assert!(up.exact);
        assert_eq!(up.scale, "2");
        assert!(up.entrywise_residual < 1e-12);
        let down = conventional_match(&s, -1).unwrap();
        assert!(down.exact);
        assert_eq!(down.scale, "-2");
        assert!(down.entrywise_residual < 1e-12);
    }

    #[test]
    fn weyl_pair_and_eigenvalues() {
        let s = stack(5);
        let ops = demo_s1_operators(&s).unwrap();
        assert!(weyl_residual(&s, &ops).unwrap().passes(1e-8));
        for c in demo_eigen_checks(&s, &ops, &ops.lz, &ops.l2, 4).unwrap() {
            assert!(c.residual < 1e-8, "{c:?}");
        }
    }

    #[test]
    fn right_placed_lplus_fails() {
        let s = stack(5);
        let ops = demo_s1_operators(&s).unwrap();
        let lp = lplus_factor_right(&s).unwrap();
        let lm = lp.adjoint();
        let lz = commutator(&lp, &lm).unwrap().scale_real(0.5);
        let l2 = &(&(&lz * &lz) + &lz) + &(&lm * &lp);
        let worst = demo_eigen_checks(&s, &ops, &lz, &l2, 4)
            .unwrap()
            .into_iter()
            .filter(|c| c.operator != "AdagA")
            .map(|c| c.residual)
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn canonical_basis_properties() {
        let s = stack(4);
        let basis = canonical_basis_s1(&s, 4).unwrap();
        assert_eq!(basis.len(), 1 + 3 + (1 + 5) + (3 + 7) + (1 + 5 + 9));
        let first = &basis[1];
        assert_eq!((first.n, first.j, first.jz), (1, 1, -1));
        let g = &s.generators;
        for (a, va) in basis.iter().enumerate() {
            for vb in &basis[a..] {
                let ip: C64 = va.amplitudes.iter().zip(&vb.amplitudes).map(|(x, y)| x.conj() * y).sum();
                let want = if std::ptr::eq(va, vb) { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-8);
            }
            let jf = va.j as f64;
            for (op, want) in [(&g.ntot, va.n as f64), (&g.j2, jf * (jf + 1.0)), (&g.jz, va.jz as f64)] {
                let out = op.apply(&va.amplitudes);
                let dev: f64 = out
                    .iter()
                    .zip(&va.amplitudes)
                    .map(|(x, y)| (x - y * want).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(dev < 1e-8, "({}, {}, {})", va.n, va.j, va.jz);
            }
        }
    }

    #[test]
    fn single_particle_canonical_vector() {
        let s = stack(3);
        let v = canonical_vector(&s, 1, 1, 0).unwrap();
        let i = s
            .basis()
            .state_index(&crate::fock::FockState::new(vec![0, 1, 0]))
            .unwrap()
            .unwrap();
        assert!((v.amplitudes[i] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(canonical_vector(&s, 2, 1, 0), Err(Error::InvalidLabel { .. })));
    }

    #[test]
    fn tau_bar() {
        let s = stack(5);
        let r = tau_bar_forms(&s).unwrap();
        assert!(r.double_commutator.passes(1e-8));
        for (_, x) in r.raising.iter().chain(&r.lowering) {
            assert!(x.passes(1e-8), "{x:?}");
        }
        for &(_, l) in &r.fitted_scale {
            assert!((l - 1.0).abs() < 1e-8);
        }
        assert!(r.max_collinearity() < 1e-8);
    }

    #[test]
    fn other_spins_rejected() {
        let s = CasimirStack::new(2, 3).unwrap();
        assert!(matches!(demo_s1_operators(&s), Err(Error::UnsupportedSpin { .. })));
    }
}
