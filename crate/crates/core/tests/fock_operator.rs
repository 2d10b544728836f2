use std::sync::Arc;

use proptest::prelude::*;
use su2ladder::{commutator, dimension, enumerate_sector, residual, FockState, SectorBasis, SparseOperator, C64};

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn dimension_matches_binomial_oracle() {
    for s in 1..=4u32 {
        for n_max in 0..=6u32 {
            let modes = 2 * s as u64 + 1;
            let want = binomial(n_max as u64 + modes, modes);
            assert_eq!(dimension(s, n_max), want, "s={s} n_max={n_max}");
            assert_eq!(SectorBasis::full(s, n_max).len() as u64, want);
        }
    }
}

#[test]
fn sectors_partition_the_full_basis() {
    let b = SectorBasis::full(2, 4);
    let mut seen = vec![false; b.len()];
    for n in 0..=4u32 {
        for w in -(2 * n as i64)..=2 * n as i64 {
            let sector = enumerate_sector(2, 4, Some(n), Some(w)).unwrap();
            let idx = b.sector_indices(n, w);
            assert_eq!(sector.len(), idx.len());
            for (state, &i) in sector.states().iter().zip(&idx) {
                assert_eq!(state, b.state(i));
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }
    assert!(seen.iter().all(|&x| x));
}

#[test]
fn small_spin_one_sector() {
    let s = enumerate_sector(1, 2, Some(2), Some(0)).unwrap();
    let occ: Vec<&[u32]> = s.states().iter().map(FockState::occupations).collect();
    assert_eq!(occ, vec![&[1, 0, 1][..], &[0, 2, 0][..]]);
}

#[test]
fn particle_number_above_cutoff_rejected() {
    assert!(enumerate_sector(1, 2, Some(3), None).is_err());
}

fn unit(basis: &SectorBasis, i: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); basis.len()];
    v[i] = C64::new(1.0, 0.0);
    v
}

proptest! {
    #[test]
    fn basis_strictly_descending(s in 1u32..=3, n_max in 0u32..=4) {
        let b = SectorBasis::full(s, n_max);
        for w in b.states().windows(2) {
            prop_assert!(w[0].occupations() > w[1].occupations());
        }
        for (i, st) in b.states().iter().enumerate() {
            prop_assert_eq!(b.state_index(st).unwrap(), Some(i));
            prop_assert!(st.total() <= n_max);
            prop_assert_eq!(st.modes(), 2 * s as usize + 1);
        }
    }

    #[test]
    fn ccr_on_interior(s in 1u32..=2, n_max in 2u32..=4, mu in -2i64..=2, nu in -2i64..=2) {
        prop_assume!(mu.abs() <= s as i64 && nu.abs() <= s as i64);
        let b = Arc::new(SectorBasis::full(s, n_max));
        let a = SparseOperator::annihilation(&b, mu).unwrap();
        let ad = SparseOperator::creation(&b, nu).unwrap();
        let c = commutator(&a, &ad).unwrap();
        let want = if mu == nu { SparseOperator::identity(&b) } else { SparseOperator::zero(&b) };
        let r = residual(&c, &want, 1).unwrap();
        prop_assert!(r.frobenius_absolute < 1e-12, "{:?}", r);
    }

    #[test]
    fn creation_action(idx in 0usize..84, mu in -1i64..=1) {
        // s = 1, n_max = 6: 84 states.
        let b = Arc::new(SectorBasis::full(1, 6));
        let st = b.state(idx).clone();
        let ad = SparseOperator::creation(&b, mu).unwrap();
        let image = ad.apply(&unit(&b, idx));
        let mut occ = st.occupations().to_vec();
        let slot = (mu + 1) as usize;
        occ[slot] += 1;
        match b.state_index(&FockState::new(occ.clone())).unwrap() {
            Some(j) => {
                let want = ((st.get(mu) + 1) as f64).sqrt();
                prop_assert!((image[j].re - want).abs() < 1e-12);
                let rest: f64 = image.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, z)| z.norm()).sum();
                prop_assert!(rest < 1e-12);
            }
            None => prop_assert!(image.iter().all(|z| z.norm() == 0.0)),
        }
        // The adjoint lowers the same mode.
        let a = SparseOperator::annihilation(&b, mu).unwrap();
        prop_assert_eq!(a.to_dense(), ad.adjoint().to_dense());
    }
}
