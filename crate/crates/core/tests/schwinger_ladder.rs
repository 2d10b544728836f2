use std::sync::Arc;

use nalgebra::DMatrix;
use num_rational::BigRational;
use proptest::prelude::*;
use su2ladder::casimir::CasimirStack;
use su2ladder::casimir::weight_count_multiplicities;
use su2ladder::ladder::{
    extract_coefficients, rational, right_functions, solve_sigma, AlphaMatrix, Family, JPoly,
};
use su2ladder::schwinger::{jordan_schwinger, su2_generators, CasimirSpectrum};
use su2ladder::{commutator, residual, Restriction, SectorBasis, C64};

fn small_matrix(values: &[(i8, i8)], d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        let (re, im) = values[i * d + j];
        C64::new(re as f64, im as f64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// X -> Σ x_ij a†_i a_j is a Lie homomorphism; every image conserves N,
    /// so the identity holds on the whole truncated space.
    #[test]
    fn jordan_map_preserves_commutators(
        x in proptest::collection::vec((-3i8..=3, -3i8..=3), 9),
        y in proptest::collection::vec((-3i8..=3, -3i8..=3), 9),
    ) {
        let b = Arc::new(SectorBasis::full(1, 3));
        let (x, y) = (small_matrix(&x, 3), small_matrix(&y, 3));
        let lhs = commutator(&jordan_schwinger(&b, &x).unwrap(), &jordan_schwinger(&b, &y).unwrap()).unwrap();
        let rhs = jordan_schwinger(&b, &(&x * &y - &y * &x)).unwrap();
        let r = residual(&lhs, &rhs, 0).unwrap();
        prop_assert!(r.frobenius_absolute < 1e-10, "{:?}", r);
    }

    #[test]
    fn jpoly_ring_and_evaluation(
        a in proptest::collection::vec(-5i64..=5, 0..4),
        b in proptest::collection::vec(-5i64..=5, 0..4),
        c in proptest::collection::vec(-5i64..=5, 0..4),
        j in -6i64..=6,
    ) {
        let (a, b, c) = (JPoly::from_ints(&a), JPoly::from_ints(&b), JPoly::from_ints(&c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!((&a * &b).eval_exact(j), a.eval_exact(j) * b.eval_exact(j));
        prop_assert!((&a - &a).is_zero());
        if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
            prop_assert_eq!((&a * &b).degree(), Some(da + db));
        }
    }

    #[test]
    fn jpoly_json_round_trip(coeffs in proptest::collection::vec((-1000i64..=1000, 1i64..=97), 0..6)) {
        let p = JPoly::from_coeffs(coeffs.iter().map(|&(n, d)| rational(n, d)).collect());
        let text = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(JPoly::parse_json(&text).unwrap(), p);
    }
}

#[test]
fn jpoly_huge_coefficients_survive_json() {
    let big: BigRational = rational(i64::MAX, 3) * rational(i64::MAX, 5);
    let p = JPoly::from_coeffs(vec![big.clone(), rational(-1, 7)]);
    let text = serde_json::to_string(&p).unwrap();
    assert!(text.contains('"'), "big integers travel as strings: {text}");
    assert_eq!(JPoly::parse_json(&text).unwrap(), p);
}

#[test]
fn jhat_labels_match_weight_counting() {
    for s in 1..=3u32 {
        let n_max = if s == 3 { 4 } else { 5 };
        let b = Arc::new(SectorBasis::full(s, n_max));
        let spectrum = CasimirSpectrum::new(&su2_generators(&b).unwrap()).unwrap();
        for n in 0..=n_max {
            let mut counts = std::collections::BTreeMap::new();
            for (sector, labels) in spectrum.labeled_sectors() {
                if sector.n == n && sector.weight == 0 {
                    for &j in labels {
                        *counts.entry(j).or_insert(0usize) += 1;
                    }
                }
            }
            assert_eq!(counts, weight_count_multiplicities(s, n), "s={s} n={n}");
        }
    }
}

#[test]
fn right_functions_certified_up_to_spin_four() {
    for s in 1..=4u32 {
        let rf = right_functions(s).unwrap();
        assert_eq!(rf.len(), 2 * s as usize + 1);
        for f in &rf {
            assert_eq!(f.function, JPoly::shift_function(f.theta));
            assert_eq!(f.family, Family::for_theta(s, f.theta));
        }
        // θ = s + 1 is not a root of either family.
        for family in [Family::P, Family::M] {
            let alpha = AlphaMatrix::derive(s, family).unwrap();
            assert!(!alpha.determinant_certificate(s as i64 + 1).is_zero(), "s={s} {family}");
        }
    }
}

#[test]
fn sigma_degrees_and_normalization() {
    for s in 1..=4u32 {
        for family in [Family::P, Family::M] {
            let alpha = AlphaMatrix::derive(s, family).unwrap();
            for theta in family.thetas(s) {
                let sigma = solve_sigma(&alpha, theta).unwrap();
                assert_eq!(sigma.sigma(s), Some(&JPoly::one()));
                for (&k, p) in sigma.indices.iter().zip(&sigma.sigmas) {
                    assert!(p.degree().unwrap_or(0) <= (s - k) as usize, "s={s} θ={theta} k={k}");
                }
            }
        }
    }
}

/// m†_1 and m†_2 annihilate the j = 0, 2 kernel states at n = 3 (s = 2);
/// extraction must skip them rather than fit roundoff.
#[test]
fn extraction_skips_annihilated_kernel_states() {
    let stack = CasimirStack::unverified(2, 4).unwrap();
    let alpha = stack.alpha(Family::M);
    let ops = stack.families.ops(Family::M);
    let mut fitted = 0;
    for col in 0..alpha.size() {
        for ex in extract_coefficients(&stack.generators.j2, ops, &stack.spectrum, col, &Restriction::kernel(1)).unwrap() {
            fitted += 1;
            for (row, &c) in ex.coefficients.iter().enumerate() {
                let want = alpha.entry(row, col).eval(ex.j as f64);
                assert!((c - want).abs() < 1e-8 * (1.0 + want.abs()), "n={} j={} row={row}: {c} vs {want}", ex.n, ex.j);
            }
        }
    }
    assert!(fitted > 0);
}
