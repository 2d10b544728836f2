//! Sparse operators over a [`SectorBasis`]-indexed space.
//!
//! Arithmetic through `+`, `-`, `*` panics when the operands live on
//! different bases, like shape mismatches in dense linear algebra crates.
//! [`commutator`] and [`residual`] report the mismatch as an error instead.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SectorBasis;

pub type C64 = Complex64;

#[derive(Clone, Debug)]
pub struct SparseOperator {
    basis: Arc<SectorBasis>,
    // Row-major, each row sorted by column, no stored zeros.
    rows: Vec<Vec<(usize, C64)>>,
    budget: u32,
}

impl SparseOperator {
    pub fn zero(basis: &Arc<SectorBasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            rows: vec![Vec::new(); basis.len()],
            budget: 0,
        }
    }

    pub fn identity(basis: &Arc<SectorBasis>) -> Self {
        Self::diagonal(basis, |_| 1.0)
    }

    /// Diagonal operator with entries `f(i)`.
    pub fn diagonal(basis: &Arc<SectorBasis>, f: impl Fn(usize) -> f64) -> Self {
        let rows = (0..basis.len())
            .map(|i| {
                let v = f(i);
                if v == 0.0 {
                    Vec::new()
                } else {
                    vec![(i, C64::new(v, 0.0))]
                }
            })
            .collect();
        Self {
            basis: Arc::clone(basis),
            rows,
            budget: 0,
        }
    }

    /// Builds an operator from `(row, col, value)` triplets; duplicates add up.
    pub fn from_triplets(
        basis: &Arc<SectorBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
        budget: u32,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.len()];
        for (r, c, v) in triplets {
            assert!(r < basis.len() && c < basis.len(), "index out of range");
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|(_, v)| *v != C64::new(0.0, 0.0));
            *row = merged;
        }
        Self {
            basis: Arc::clone(basis),
            rows,
            budget,
        }
    }

    /// `a†_μ` with `⟨.., n_μ+1, ..| a†_μ |.., n_μ, ..⟩ = √(n_μ+1)`. States
    /// pushed past the truncation are dropped.
    pub fn creation(basis: &Arc<SectorBasis>, mu: i64) -> Result<Self> {
        let slot = mode_slot(basis, mu)?;
        let triplets = (0..basis.len()).filter_map(|c| {
            let st = basis.state(c);
            let n = st.occupations()[slot];
            let target = st.shifted(slot, 1)?;
            let r = basis.lookup(&target)?;
            Some((r, c, C64::new(((n + 1) as f64).sqrt(), 0.0)))
        });
        Ok(Self::from_triplets(basis, triplets.collect::<Vec<_>>(), 1))
    }

    pub fn annihilation(basis: &Arc<SectorBasis>, mu: i64) -> Result<Self> {
        Ok(Self::creation(basis, mu)?.adjoint())
    }

    /// Mode number operator `N_μ = a†_μ a_μ`, built directly so it is exact
    /// up to the truncation edge.
    pub fn mode_number(basis: &Arc<SectorBasis>, mu: i64) -> Result<Self> {
        let slot = mode_slot(basis, mu)?;
        Ok(Self::diagonal(basis, |i| {
            basis.state(i).occupations()[slot] as f64
        }))
    }

    pub fn total_number(basis: &Arc<SectorBasis>) -> Self {
        Self::diagonal(basis, |i| basis.total_of(i) as f64)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn particle_budget(&self) -> u32 {
        self.budget
    }

    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    pub fn row(&self, r: usize) -> &[(usize, C64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.rows[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map(|k| self.rows[r][k].1)
            .unwrap_or_default()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn same_basis(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    pub fn adjoint(&self) -> Self {
        let triplets: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(&self.basis, triplets, self.budget)
    }

    pub fn scale(&self, factor: C64) -> Self {
        if factor == C64::new(0.0, 0.0) {
            return Self::zero(&self.basis).with_budget(self.budget);
        }
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| (c, v * factor)).collect())
            .collect();
        Self {
            basis: Arc::clone(&self.basis),
            rows,
            budget: self.budget,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity(&self.basis);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Sparse matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim(), "vector length mismatch");
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, a)| a * v[c]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm over the entries kept by `restriction`.
    pub fn restricted_norm(&self, restriction: &Restriction) -> Result<f64> {
        let mask = restriction.masks(&self.basis)?;
        Ok(self.masked_norm_sqr(&mask).sqrt())
    }

    fn masked_norm_sqr(&self, mask: &Masks) -> f64 {
        self.entries()
            .filter(|&(r, c, _)| mask.rows[r] && mask.cols[c])
            .map(|(_, _, v)| v.norm_sqr())
            .sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert!(self.same_basis(other), "operands act on different bases");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| merge_rows(a, b, sign))
            .collect();
        Self {
            basis: Arc::clone(&self.basis),
            rows,
            budget: self.budget.max(other.budget),
        }
    }

    fn product(&self, other: &Self) -> Self {
        assert!(self.same_basis(other), "operands act on different bases");
        let dim = self.dim();
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut touched = vec![false; dim];
        let mut cols: Vec<usize> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &(k, a) in row {
                    for &(c, b) in &other.rows[k] {
                        if !touched[c] {
                            touched[c] = true;
                            cols.push(c);
                        }
                        acc[c] += a * b;
                    }
                }
                cols.sort_unstable();
                let out: Vec<(usize, C64)> = cols
                    .iter()
                    .filter_map(|&c| {
                        let v = acc[c];
                        acc[c] = C64::new(0.0, 0.0);
                        touched[c] = false;
                        (v != C64::new(0.0, 0.0)).then_some((c, v))
                    })
                    .collect();
                cols.clear();
                out
            })
            .collect();
        Self {
            basis: Arc::clone(&self.basis),
            rows,
            budget: self.budget + other.budget,
        }
    }
}

fn merge_rows(a: &[(usize, C64)], b: &[(usize, C64)], sign: f64) -> Vec<(usize, C64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                i += 1;
                j += 1;
                (ca, va + vb * sign)
            }
            (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                i += 1;
                (ca, va)
            }
            (Some(&(ca, va)), None) => {
                i += 1;
                (ca, va)
            }
            (_, Some(&(cb, vb))) => {
                j += 1;
                (cb, vb * sign)
            }
            (None, None) => unreachable!(),
        };
        if next.1 != C64::new(0.0, 0.0) {
            out.push(next);
        }
    }
    out
}

fn mode_slot(basis: &SectorBasis, mu: i64) -> Result<usize> {
    let s = basis.spin() as i64;
    if mu < -s || mu > s {
        return Err(Error::InvalidMode {
            mu,
            spin: basis.spin(),
        });
    }
    Ok((mu + s) as usize)
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: &SparseOperator) -> SparseOperator {
        self.product(rhs)
    }
}

impl Neg for &SparseOperator {
    type Output = SparseOperator;
    fn neg(self) -> SparseOperator {
        self.scale_real(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SparseOperator {
            type Output = SparseOperator;
            fn $m(self, rhs: SparseOperator) -> SparseOperator {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SparseOperator> for SparseOperator {
            type Output = SparseOperator;
            fn $m(self, rhs: &SparseOperator) -> SparseOperator {
                (&self).$m(rhs)
            }
        }
        impl $tr<SparseOperator> for &SparseOperator {
            type Output = SparseOperator;
            fn $m(self, rhs: SparseOperator) -> SparseOperator {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `XY - YX`. The particle budget of the result is the sum of the operands'.
pub fn commutator(x: &SparseOperator, y: &SparseOperator) -> Result<SparseOperator> {
    if !x.same_basis(y) {
        return Err(Error::BasisMismatch);
    }
    Ok((x * y) - (y * x))
}

/// Which rows and columns a residual looks at: total particle number at most
/// `n_max - margin` on both sides, and optionally a fixed `J_z` weight on the
/// columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub margin: u32,
    pub column_weight: Option<i64>,
}

impl Restriction {
    pub fn interior(margin: u32) -> Self {
        Self {
            margin,
            column_weight: None,
        }
    }

    /// Interior restricted to weight-0 (J_z kernel) columns.
    pub fn kernel(margin: u32) -> Self {
        Self {
            margin,
            column_weight: Some(0),
        }
    }

    fn masks(&self, basis: &SectorBasis) -> Result<Masks> {
        let empty = || Error::EmptyRestriction {
            margin: self.margin,
            column_weight: self.column_weight,
        };
        if self.margin > basis.n_max() {
            return Err(empty());
        }
        let cap = basis.n_max() - self.margin;
        let rows: Vec<bool> = (0..basis.len()).map(|i| basis.total_of(i) <= cap).collect();
        let cols: Vec<bool> = (0..basis.len())
            .map(|i| rows[i] && self.column_weight.is_none_or(|w| basis.weight_of(i) == w))
            .collect();
        if !cols.iter().any(|&c| c) {
            return Err(empty());
        }
        Ok(Masks { rows, cols })
    }

    pub fn column_selected(&self, basis: &SectorBasis, i: usize) -> bool {
        basis.total_of(i) + self.margin <= basis.n_max()
            && self.column_weight.is_none_or(|w| basis.weight_of(i) == w)
    }
}

struct Masks {
    rows: Vec<bool>,
    cols: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub frobenius_absolute: f64,
    pub frobenius_relative: f64,
    pub interior_margin: u32,
}

impl ResidualReport {
    pub fn exact(margin: u32) -> Self {
        Self {
            frobenius_absolute: 0.0,
            frobenius_relative: 0.0,
            interior_margin: margin,
        }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.frobenius_relative < tolerance
    }
}

/// Frobenius norm of `X - Y` on the interior `N <= n_max - margin`,
/// relative to the larger of the two restricted operand norms.
pub fn residual(x: &SparseOperator, y: &SparseOperator, margin: u32) -> Result<ResidualReport> {
    residual_restricted(x, y, &Restriction::interior(margin), 0.0)
}

/// Like [`residual`], on an arbitrary [`Restriction`]. The relative value is
/// normalized by `max(‖X‖, ‖Y‖, scale)`, so callers can pass the norm of
/// the individual terms that make up `X` when `X` is itself a difference.
pub fn residual_restricted(
    x: &SparseOperator,
    y: &SparseOperator,
    restriction: &Restriction,
    scale: f64,
) -> Result<ResidualReport> {
    if !x.same_basis(y) {
        return Err(Error::BasisMismatch);
    }
    let mask = restriction.masks(&x.basis)?;
    let diff = x - y;
    let absolute = diff.masked_norm_sqr(&mask).sqrt();
    let norm = x
        .masked_norm_sqr(&mask)
        .sqrt()
        .max(y.masked_norm_sqr(&mask).sqrt())
        .max(scale);
    let relative = if absolute == 0.0 {
        0.0
    } else if norm > 0.0 {
        absolute / norm
    } else {
        absolute
    };
    Ok(ResidualReport {
        frobenius_absolute: absolute,
        frobenius_relative: relative,
        interior_margin: restriction.margin,
    })
}

/// Residual of `[X, Y] − Z`, relative to the larger of `‖XY‖`, `‖YX‖`,
/// `‖Z‖`. Commuting pairs pass `Z = 0` and still get a meaningful relative
/// value.
pub fn commutator_residual(
    x: &SparseOperator,
    y: &SparseOperator,
    expected: &SparseOperator,
    restriction: &Restriction,
) -> Result<ResidualReport> {
    let xy = x * y;
    let yx = y * x;
    let scale = xy.restricted_norm(restriction)?.max(yx.restricted_norm(restriction)?);
    residual_restricted(&(&xy - &yx), expected, restriction, scale)
}
