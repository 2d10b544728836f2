//! The closure matrix of the `p†`/`m†` families under `[J², ·]`, its
//! right-function certificates and the σ back-substitution.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::jpoly::{rational, JPoly};
use crate::operator::{commutator, residual_restricted, Restriction, ResidualReport, SparseOperator, C64};
use crate::schwinger::CasimirSpectrum;

/// Which operator family a ladder is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `p†_k`, `k = 0..=s`; carries `θ ≡ s (mod 2)`.
    P,
    /// `m†_k`, `k = 1..=s`; carries the other parity.
    M,
}

impl Family {
    pub fn for_theta(spin: u32, theta: i64) -> Family {
        if (theta - spin as i64).rem_euclid(2) == 0 {
            Family::P
        } else {
            Family::M
        }
    }

    /// Family index `k` of each matrix position.
    pub fn indices(self, spin: u32) -> Vec<u32> {
        match self {
            Family::P => (0..=spin).collect(),
            Family::M => (1..=spin).collect(),
        }
    }

    pub fn thetas(self, spin: u32) -> Vec<i64> {
        let s = spin as i64;
        (-s..=s).filter(|&t| Family::for_theta(spin, t) == self).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::P => "P",
            Family::M => "M",
        })
    }
}

/// Tridiagonal matrix `α` with `[J², T_η] = Σ_μ T_μ α_μη` on the `J_z`
/// kernel, `α_μη` standing to the right of `T_μ`. Row and column positions
/// follow [`Family::indices`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaMatrix {
    pub spin: u32,
    pub family: Family,
    pub indices: Vec<u32>,
    pub entries: Vec<Vec<JPoly>>,
}

impl AlphaMatrix {
    /// Assembles the matrix from the closure relations on the kernel:
    ///
    /// * diagonal `(s+k+1)(s−k) − k(k−1)`,
    /// * `(k+1, k)`: `(s+k+1)(s−k)`, or `2s(s+1)` below `p†_0 = 2a†_0`,
    /// * `(k−1, k)`: `ĵ(ĵ+1) − k(k−1)`.
    pub fn derive(spin: u32, family: Family) -> Result<Self> {
        if spin == 0 {
            return Err(Error::DegenerateSpin);
        }
        let s = spin as i64;
        let indices = family.indices(spin);
        let n = indices.len();
        let mut entries = vec![vec![JPoly::zero(); n]; n];
        for (c, &k) in indices.iter().enumerate() {
            let k = k as i64;
            entries[c][c] = JPoly::int((s + k + 1) * (s - k) - k * (k - 1));
            if c + 1 < n {
                entries[c + 1][c] = if k == 0 {
                    JPoly::int(2 * s * (s + 1))
                } else {
                    JPoly::int((s + k + 1) * (s - k))
                };
            }
            if c >= 1 {
                entries[c - 1][c] = JPoly::from_ints(&[-k * (k - 1), 1, 1]);
            }
        }
        Ok(Self {
            spin,
            family,
            indices,
            entries,
        })
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &JPoly {
        &self.entries[row][col]
    }

    pub fn is_tridiagonal(&self) -> bool {
        (0..self.size()).all(|r| {
            (0..self.size()).all(|c| r.abs_diff(c) <= 1 || self.entries[r][c].is_zero())
        })
    }

    /// `A − P·Î`.
    pub fn shifted(&self, right: &JPoly) -> Vec<Vec<JPoly>> {
        let mut m = self.entries.clone();
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = &row[k] - right;
        }
        m
    }

    /// `det(A − θ(θ+2ĵ+1)·Î)`.
    pub fn determinant_certificate(&self, theta: i64) -> JPoly {
        determinant(&self.shifted(&JPoly::shift_function(theta)))
    }

    /// Checks every column against numerical commutators:
    /// `[H, T_η] − Σ_μ T_μ α_μη(ĵ)` on `restriction`. `ops[i]` is the operator
    /// at matrix position `i`. Returns one report per column.
    pub fn verify(
        &self,
        h: &SparseOperator,
        ops: &[SparseOperator],
        spectrum: &CasimirSpectrum,
        restriction: &Restriction,
        tolerance: f64,
    ) -> Result<Vec<ResidualReport>> {
        assert_eq!(ops.len(), self.size(), "one operator per matrix position");
        let coefficient_ops = self
            .entries
            .iter()
            .map(|row| row.iter().map(|p| poly_operator(spectrum, p)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let mut reports = Vec::with_capacity(self.size());
        for col in 0..self.size() {
            let lhs = commutator(h, &ops[col])?;
            let mut rhs = SparseOperator::zero(h.basis());
            for (row, op) in ops.iter().enumerate() {
                if !self.entries[row][col].is_zero() {
                    rhs = &rhs + &(op * &coefficient_ops[row][col]);
                }
            }
            let scale = (h * &ops[col]).restricted_norm(restriction)?;
            let report = residual_restricted(&lhs, &rhs, restriction, scale)?;
            if !report.passes(tolerance) {
                let row = self
                    .locate_mismatch(h, ops, spectrum, col, restriction)
                    .unwrap_or(col);
                return Err(Error::AlphaMismatch {
                    family: self.family.to_string(),
                    row,
                    col,
                    residual: report.frobenius_relative,
                });
            }
            reports.push(report);
        }
        Ok(reports)
    }

    // First row whose extracted coefficient disagrees with the matrix entry.
    fn locate_mismatch(
        &self,
        h: &SparseOperator,
        ops: &[SparseOperator],
        spectrum: &CasimirSpectrum,
        col: usize,
        restriction: &Restriction,
    ) -> Option<usize> {
        let extracted = extract_coefficients(h, ops, spectrum, col, restriction).ok()?;
        extracted.iter().find_map(|ex| {
            (0..self.size()).find(|&row| {
                let want = self.entries[row][col].eval(ex.j as f64);
                (ex.coefficients[row] - want).abs() > 1e-6 * (1.0 + want.abs())
            })
        })
    }
}

/// `p(ĵ)` as an operator.
pub fn poly_operator(spectrum: &CasimirSpectrum, p: &JPoly) -> Result<SparseOperator> {
    if let Some(0) = p.degree() {
        return Ok(SparseOperator::identity(spectrum.basis()).scale_real(p.eval(0.0)));
    }
    if p.is_zero() {
        return Ok(SparseOperator::zero(spectrum.basis()));
    }
    spectrum.of_j(|j| Some(p.eval(j as f64)))
}

/// Coefficients `c_μ` with `[H, T_η] v = Σ_μ c_μ T_μ v`, read off one
/// kernel eigenvector `v` at a time.
#[derive(Clone, Debug)]
pub struct ExtractedColumn {
    pub n: u32,
    pub j: u32,
    pub coefficients: Vec<f64>,
    pub fit_residual: f64,
}

/// Squared image norm below which a unit kernel vector counts as annihilated.
const GRAM_FLOOR: f64 = 1e-20;

/// Least-squares extraction of the closure coefficients of column `col`
/// from the action on each weight-0 eigenvector of `J²` inside the
/// restriction. Vectors where the `T_μ v` vanish or are numerically
/// dependent are skipped, since the coefficients are not determined there.
pub fn extract_coefficients(
    h: &SparseOperator,
    ops: &[SparseOperator],
    spectrum: &CasimirSpectrum,
    col: usize,
    restriction: &Restriction,
) -> Result<Vec<ExtractedColumn>> {
    let basis = spectrum.basis();
    let lhs = commutator(h, &ops[col])?;
    let mut out = Vec::new();
    for (sector, labels) in spectrum.labeled_sectors() {
        if sector.weight != 0 || sector.n + restriction.margin > basis.n_max() {
            continue;
        }
        for (k, &j) in labels.iter().enumerate() {
            let mut v = vec![C64::new(0.0, 0.0); basis.len()];
            for (a, &i) in sector.indices.iter().enumerate() {
                v[i] = sector.vectors[(a, k)];
            }
            let target = DVector::from_vec(lhs.apply(&v));
            let columns: Vec<DVector<C64>> =
                ops.iter().map(|op| DVector::from_vec(op.apply(&v))).collect();
            let m = columns.len();
            let gram = DMatrix::from_fn(m, m, |a, b| columns[a].dotc(&columns[b]));
            let rhs = DVector::from_fn(m, |a, _| columns[a].dotc(&target));
            let eig = gram.clone().symmetric_eigen();
            let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            // `v` is a unit vector: images below 1e-10 are roundoff of an
            // annihilated state, and their ratios carry no information.
            if max <= GRAM_FLOOR || min < 1e-10 * max {
                continue;
            }
            let Some(c) = gram.lu().solve(&rhs) else {
                continue;
            };
            let mut fit = -target.clone();
            for (a, col_vec) in columns.iter().enumerate() {
                fit += col_vec * c[a];
            }
            out.push(ExtractedColumn {
                n: sector.n,
                j,
                coefficients: c.iter().map(|z| z.re).collect(),
                fit_residual: fit.norm() / target.norm().max(1.0),
            });
        }
    }
    Ok(out)
}

/// Cofactor expansion along the first row; exact over `ℚ[ĵ]`.
pub fn determinant(m: &[Vec<JPoly>]) -> JPoly {
    let n = m.len();
    match n {
        0 => JPoly::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = JPoly::zero();
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<JPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != c)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][c] * &determinant(&minor);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// A certified root `θ(θ+2ĵ+1)` of `det(A − P) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RightFunction {
    pub theta: i64,
    pub family: Family,
    pub function: JPoly,
}

/// All `2s + 1` right functions, ascending in `θ`, each certified by an
/// exactly vanishing determinant of its family's `A − P`.
pub fn right_functions(spin: u32) -> Result<Vec<RightFunction>> {
    let p = AlphaMatrix::derive(spin, Family::P)?;
    let m = AlphaMatrix::derive(spin, Family::M)?;
    let s = spin as i64;
    (-s..=s)
        .map(|theta| {
            let family = Family::for_theta(spin, theta);
            let alpha = if family == Family::P { &p } else { &m };
            let det = alpha.determinant_certificate(theta);
            if !det.is_zero() {
                return Err(Error::NonzeroDeterminant {
                    theta,
                    det: det.to_string(),
                });
            }
            Ok(RightFunction {
                theta,
                family,
                function: JPoly::shift_function(theta),
            })
        })
        .collect()
}

/// Null vector of `A − θ(θ+2ĵ+1)` normalized to `σ_s = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaVector {
    pub spin: u32,
    pub theta: i64,
    pub family: Family,
    /// Family index `k` of each entry of `sigmas`.
    pub indices: Vec<u32>,
    pub sigmas: Vec<JPoly>,
}

impl SigmaVector {
    pub fn sigma(&self, k: u32) -> Option<&JPoly> {
        self.indices
            .iter()
            .position(|&i| i == k)
            .map(|p| &self.sigmas[p])
    }
}

/// Back-substitutes the rows of `(A − P)σ = 0` from the bottom up, each
/// solved for the entry one position higher, then evaluates the remaining
/// top row, which must be the zero polynomial.
pub fn solve_sigma(alpha: &AlphaMatrix, theta: i64) -> Result<SigmaVector> {
    if Family::for_theta(alpha.spin, theta) != alpha.family {
        return Err(Error::ParityMismatch {
            theta,
            family: alpha.family.to_string(),
            spin: alpha.spin,
        });
    }
    let right = JPoly::shift_function(theta);
    let shifted = alpha.shifted(&right);
    let n = alpha.size();
    let mut sigmas = vec![JPoly::zero(); n];
    sigmas[n - 1] = JPoly::one();
    for r in (1..n).rev() {
        let mut acc = &shifted[r][r] * &sigmas[r];
        if r + 1 < n {
            acc = &acc + &(&shifted[r][r + 1] * &sigmas[r + 1]);
        }
        let pivot = shifted[r][r - 1].clone();
        let pivot = match pivot.degree() {
            Some(0) => pivot.coeff(0),
            _ => {
                return Err(Error::SingularPivot {
                    row: r,
                    col: r - 1,
                    entry: pivot.to_string(),
                })
            }
        };
        sigmas[r - 1] = (-&acc).div_scalar(&pivot);
    }
    let mut top = &shifted[0][0] * &sigmas[0];
    if n > 1 {
        top = &top + &(&shifted[0][1] * &sigmas[1]);
    }
    if !top.is_zero() {
        return Err(Error::InconsistentSigma {
            theta,
            poly: top.to_string(),
        });
    }
    Ok(SigmaVector {
        spin: alpha.spin,
        theta,
        family: alpha.family,
        indices: alpha.indices.clone(),
        sigmas,
    })
}

/// Conventional closed form for `σ_{s−1}`: `ĵθ/s + (θ² + θ + s² − s)/(2s)`.
pub fn sigma_next_to_last_closed_form(spin: u32, theta: i64) -> JPoly {
    let s = spin as i64;
    JPoly::from_coeffs(vec![
        rational(theta * theta + theta + s * s - s, 2 * s),
        rational(theta, s),
    ])
}
