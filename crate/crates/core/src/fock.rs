//! Truncated multi-mode bosonic Fock bases.
//!
//! A state over spin `s` carries `2s + 1` occupation numbers, one per mode
//! weight `μ = -s, ..., s` from left to right. Bases are truncated by total
//! particle number only and are listed in descending lexicographic order of
//! the occupation vectors, so `(1,0,1)` precedes `(0,2,0)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation numbers `|n_{-s}, ..., n_s⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn vacuum(spin: u32) -> Self {
        Self(vec![0; mode_count(spin)])
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Total particle number `Σ n_μ`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `J_z` weight `Σ μ n_μ`. The spin is read off the vector length.
    pub fn weight(&self) -> i64 {
        let s = (self.0.len() as i64 - 1) / 2;
        self.0
            .iter()
            .enumerate()
            .map(|(i, &n)| (i as i64 - s) * n as i64)
            .sum()
    }

    /// Occupation of the mode with weight `mu`.
    pub fn get(&self, mu: i64) -> u32 {
        let s = (self.0.len() as i64 - 1) / 2;
        self.0[(mu + s) as usize]
    }

    pub(crate) fn shifted(&self, slot: usize, delta: i32) -> Option<FockState> {
        let n = self.0[slot] as i64 + delta as i64;
        if n < 0 {
            return None;
        }
        let mut occ = self.0.clone();
        occ[slot] = n as u32;
        Some(FockState(occ))
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

pub fn mode_count(spin: u32) -> usize {
    2 * spin as usize + 1
}

/// Indexed enumeration of Fock states, optionally restricted to a fixed
/// particle number and/or a fixed `J_z` weight. Immutable once built.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    spin: u32,
    n_max: u32,
    particles: Option<u32>,
    weight: Option<i64>,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
    totals: Vec<u32>,
    weights: Vec<i64>,
}

impl PartialEq for SectorBasis {
    fn eq(&self, other: &Self) -> bool {
        self.spin == other.spin
            && self.n_max == other.n_max
            && self.particles == other.particles
            && self.weight == other.weight
    }
}

impl SectorBasis {
    /// Full truncated space: every state with `N <= n_max`.
    pub fn full(spin: u32, n_max: u32) -> Self {
        enumerate_sector(spin, n_max, None, None).expect("unconstrained enumeration cannot fail")
    }

    pub fn spin(&self) -> u32 {
        self.spin
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn particles(&self) -> Option<u32> {
        self.particles
    }

    pub fn weight_constraint(&self) -> Option<i64> {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.states[i]
    }

    /// Total particle number of the `i`-th state.
    pub fn total_of(&self, i: usize) -> u32 {
        self.totals[i]
    }

    /// `J_z` weight of the `i`-th state.
    pub fn weight_of(&self, i: usize) -> i64 {
        self.weights[i]
    }

    /// Position of `state`, or `None` when it is not part of this basis.
    /// A vector of the wrong length is an error.
    pub fn state_index(&self, state: &FockState) -> Result<Option<usize>> {
        let expected = mode_count(self.spin);
        if state.modes() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: state.modes(),
            });
        }
        Ok(self.index.get(state).copied())
    }

    pub(crate) fn lookup(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn vacuum_index(&self) -> Option<usize> {
        self.lookup(&FockState::vacuum(self.spin))
    }

    /// Indices of the states with the given total and weight, in basis order.
    pub fn sector_indices(&self, n: u32, weight: i64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.totals[i] == n && self.weights[i] == weight)
            .collect()
    }
}

/// Enumerate all occupation vectors over `2s + 1` modes with
/// `Σ n_μ <= n_max` (or `= n` when `n` is given), optionally fixing the
/// weight `Σ μ n_μ`.
pub fn enumerate_sector(
    spin: u32,
    n_max: u32,
    n: Option<u32>,
    weight: Option<i64>,
) -> Result<SectorBasis> {
    if let Some(n) = n {
        if n > n_max {
            return Err(Error::ParticleNumberOutOfRange { n, n_max });
        }
    }
    let modes = mode_count(spin);
    let mut states = Vec::new();
    let mut current = vec![0u32; modes];
    fill(&mut current, 0, n_max, &mut states);

    let states: Vec<FockState> = states
        .into_iter()
        .map(FockState)
        .filter(|st| n.is_none_or(|n| st.total() == n))
        .filter(|st| weight.is_none_or(|w| st.weight() == w))
        .collect();

    let index = states
        .iter()
        .enumerate()
        .map(|(i, st)| (st.clone(), i))
        .collect();
    let totals = states.iter().map(FockState::total).collect();
    let weights = states.iter().map(FockState::weight).collect();

    Ok(SectorBasis {
        spin,
        n_max,
        particles: n,
        weight,
        states,
        index,
        totals,
        weights,
    })
}

// Descending lexicographic: larger occupations of earlier modes come first.
fn fill(current: &mut Vec<u32>, slot: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if slot == current.len() {
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k;
        fill(current, slot + 1, remaining - k, out);
    }
    current[slot] = 0;
}

/// Number of states with total particle number at most `n_max`:
/// `C(n_max + 2s + 1, 2s + 1)`.
pub fn dimension(spin: u32, n_max: u32) -> u64 {
    let k = 2 * spin as u128 + 1;
    let n = n_max as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc as u64
}
