use fgsim_core::dynamics::evolve_unitary;
use fgsim_core::entanglement::{entanglement_entropy, log_negativity, Bipartition};
use fgsim_core::matkit::{self, AntisymMatrix};
use fgsim_core::superop::{dissipate, measure_dressed, outcome_probability};
use fgsim_core::{CovarianceState, DressedMode, Occupation};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Block-diagonal product of two states.
fn product(a: &CovarianceState, b: &CovarianceState) -> CovarianceState {
    let (da, db) = (a.dim(), b.dim());
    let mut v = DMatrix::zeros(da + db, da + db);
    v.view_mut((0, 0), (da, da)).copy_from(a.covariance());
    v.view_mut((da, da), (db, db)).copy_from(b.covariance());
    CovarianceState::from_parts(AntisymMatrix::project(v), 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squares_to_determinant(seed in any::<u64>(), half in 1usize..12) {
        let a = matkit::random_antisym(2 * half, 1.0, &mut rng(seed));
        let pf = matkit::pfaffian(a.as_matrix()).unwrap();
        let det = matkit::determinant(a.as_matrix());
        prop_assert!((pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-300));
    }

    #[test]
    fn measurement_probabilities_sum_to_one(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let s = CovarianceState::random_mixed(n, &mut r).unwrap();
        let b = DressedMode::random(n, &mut r).unwrap();
        let p0 = outcome_probability(&s, &b, Occupation::Empty).unwrap();
        let p1 = outcome_probability(&s, &b, Occupation::Occupied).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-10);
        let w0 = measure_dressed(&s, &b, Occupation::Empty).unwrap().weight;
        let w1 = measure_dressed(&s, &b, Occupation::Occupied).unwrap().weight;
        prop_assert!((w0 - p0).abs() < 1e-9 && (w1 - p1).abs() < 1e-9);
    }

    #[test]
    fn measurement_and_dissipation_keep_pure_states_pure(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let s = CovarianceState::random_pure(n, &mut r).unwrap();
        let b = DressedMode::random(n, &mut r).unwrap();
        for outcome in [Occupation::Empty, Occupation::Occupied] {
            if let Some(next) = measure_dressed(&s, &b, outcome).unwrap().state {
                prop_assert!(next.check_physical().purity_defect < 1e-7);
                let target = if outcome == Occupation::Occupied { 1.0 } else { 0.0 };
                let occ = next.occupation_of_mode(&b).unwrap();
                prop_assert!((occ - target).abs() < 1e-8);
            }
        }
        if let Some(next) = dissipate(&s, &b).unwrap().state {
            prop_assert!(next.check_physical().purity_defect < 1e-7);
            prop_assert!(next.occupation_of_mode(&b).unwrap() < 1e-8);
        }
    }

    #[test]
    fn unitary_preserves_spectrum(seed in any::<u64>(), n in 1usize..8, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let s = CovarianceState::random_mixed(n, &mut r).unwrap();
        let h = matkit::random_antisym(2 * n, 1.0, &mut r);
        let out = evolve_unitary(&s, &h, t).unwrap();
        let a = matkit::singular_values(s.covariance());
        let b = matkit::singular_values(out.covariance());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_additive_over_products(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4) {
        let mut r = rng(seed);
        let a = CovarianceState::random_mixed(na, &mut r).unwrap();
        let b = CovarianceState::random_mixed(nb, &mut r).unwrap();
        let ab = product(&a, &b);
        let n = na + nb;
        let pa = Bipartition::new(&[0], na).unwrap();
        let pb = Bipartition::new(&[0], nb).unwrap();
        let pab = Bipartition::new(&[0, na], n).unwrap();
        let sum = entanglement_entropy(&a, &pa).unwrap() + entanglement_entropy(&b, &pb).unwrap();
        prop_assert!((entanglement_entropy(&ab, &pab).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn entropy_ignores_local_unitaries(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let s = CovarianceState::random_pure(n, &mut r).unwrap();
        let p = Bipartition::first_half(n);
        let local = matkit::random_antisym(2 * n, 1.0, &mut r);
        // Keep only the block acting inside A.
        let idx = p.majorana_indices();
        let h = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if idx.contains(&i) && idx.contains(&j) { local.as_matrix()[(i, j)] } else { 0.0 }
        });
        let out = evolve_unitary(&s, &AntisymMatrix::project(h), 1.3).unwrap();
        let before = entanglement_entropy(&s, &p).unwrap();
        let after = entanglement_entropy(&out, &p).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn negativity_properties(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let mixed = CovarianceState::random_mixed(n, &mut r).unwrap();
        let pure = CovarianceState::random_pure(n, &mut r).unwrap();
        let p = Bipartition::first_half(n);
        prop_assert!(log_negativity(&mixed, &p).unwrap() >= -1e-10);
        let a = log_negativity(&pure, &p).unwrap();
        let b = log_negativity(&pure, &p.complement()).unwrap();
        prop_assert!((a - b).abs() < 1e-8);
        let occ: Vec<bool> = (0..n).map(|k| (seed >> k) & 1 == 1).collect();
        let prod = CovarianceState::product(&occ).unwrap();
        prop_assert!(log_negativity(&prod, &p).unwrap().abs() < 1e-10);
    }

    #[test]
    fn entropy_complementarity_for_pure_states(seed in any::<u64>(), n in 2usize..9) {
        let s = CovarianceState::random_pure(n, &mut rng(seed)).unwrap();
        let p = Bipartition::first_half(n);
        let a = entanglement_entropy(&s, &p).unwrap();
        let b = entanglement_entropy(&s, &p.complement()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn cofactor_pfaffian_example() {
    // Pf = a01 a23 − a02 a13 + a03 a12 = 1·6 − 2·5 + 3·4
    let upper = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let mut a = DMatrix::<f64>::zeros(4, 4);
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            a[(i, j)] = upper[k];
            a[(j, i)] = -upper[k];
            k += 1;
        }
    }
    assert_eq!(matkit::pfaffian(&a).unwrap(), 8.0);
    assert!((matkit::determinant(&a) - 64.0).abs() < 1e-12);
}
