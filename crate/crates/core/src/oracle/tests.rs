use super::*;
use crate::dynamics::{
    evolve_nonhermitian, lindblad_covariance_dissipative, lindblad_covariance_projective, Jump,
    NonHermitianPropagator,
};
use crate::entanglement::{entanglement_entropy, Bipartition};
use crate::models::{
    hatano_nelson_dissipative, hatano_nelson_projective, kitaev_chain, to_majorana,
};
use crate::superop::{
    channel_average_dissipative, channel_average_projective, dissipate, measure_dressed,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn assert_close_cov(c: &CovarianceState, d: &DenseState, tol: f64) {
    let from_dense = covariance_of(d).unwrap();
    let err = matkit::max_abs_diff(c.covariance(), from_dense.covariance());
    assert!(err < tol, "covariance mismatch {err:e}");
    let pd = d.trace().norm();
    let werr = (c.weight() - pd).abs() / pd;
    assert!(werr < tol, "weight mismatch {werr:e}");
}

#[test]
fn majorana_algebra() {
    let n = 3;
    let cs: Vec<_> = (0..2 * n).map(|i| majorana_matrix(i, n).unwrap()).collect();
    let id = DMatrix::<Complex64>::identity(1 << n, 1 << n);
    for i in 0..2 * n {
        assert_eq!(cs[i], cs[i].adjoint());
        for j in 0..2 * n {
            let anti = &cs[i] * &cs[j] + &cs[j] * &cs[i];
            let expected = if i == j { &id * Complex64::new(2.0, 0.0) } else { &id * ZERO };
            assert_eq!(anti, expected);
        }
    }
    assert!(majorana_matrix(6, 3).is_err());
    assert!(matches!(majorana_matrix(0, 7), Err(Error::Capacity { n: 7, max: 6 })));
}

#[test]
fn annihilator_acts_on_occupations() {
    let a = annihilator(0, 1).unwrap();
    // a|1⟩ = |0⟩, a|0⟩ = 0
    assert!((a[(0, 1)] - ONE).norm() < 1e-15);
    assert!(a[(1, 0)].norm() < 1e-15);
}

#[test]
fn vacuum_round_trip() {
    let d = DenseState::vacuum(3).unwrap();
    let c = covariance_of(&d).unwrap();
    let vac = CovarianceState::vacuum(3).unwrap();
    assert!(matkit::max_abs_diff(c.covariance(), vac.covariance()) < 1e-15);
    let d2 = DenseState::from_covariance(&vac).unwrap();
    assert!(matkit::max_abs_diff(d2.rho(), d.rho()) < 1e-14);
}

#[test]
fn vacuum_two_point_is_i() {
    let d = DenseState::vacuum(1).unwrap();
    assert!((d.correlator(&[0, 1]) - I).norm() < 1e-15);
}

#[test]
fn gaussian_round_trip_and_wick() {
    let mut r = rng(1);
    for n in 1..=4 {
        let s = CovarianceState::random_mixed(n, &mut r).unwrap();
        let d = DenseState::from_covariance(&s).unwrap();
        assert!(d.hermiticity_defect() < 1e-12);
        let ev = matkit::hermitian_eigenvalues(d.rho());
        assert!(ev[0] > -1e-10);
        assert!((d.trace() - ONE).norm() < 1e-12);
        let back = covariance_of(&d).unwrap();
        assert!(matkit::max_abs_diff(back.covariance(), s.covariance()) < 1e-10);
        assert!(wick_residual(&d) < 1e-9);
    }
}

#[test]
fn bell_pair_covariance_from_dense() {
    // (I + i c₀d₀)(I + i c₁d₁)/4 with the c register on mode 0.
    let c0 = SignedFlip::majorana(0, 2);
    let c1 = SignedFlip::majorana(1, 2);
    let d0 = SignedFlip::majorana(2, 2);
    let d1 = SignedFlip::majorana(3, 2);
    let id = DMatrix::<Complex64>::identity(4, 4);
    let f0 = &id + c0.mul(&d0).to_dense() * I;
    let f1 = &id + c1.mul(&d1).to_dense() * I;
    let rho = f0 * f1 * Complex64::new(0.25, 0.0);
    let d = DenseState::new(rho, 2).unwrap();
    let s = covariance_of(&d).unwrap();
    let bell = CovarianceState::bell_pair(1).unwrap();
    assert!(matkit::max_abs_diff(s.covariance(), bell.covariance()) < 1e-14);
}

#[test]
fn non_gaussian_state_is_flagged() {
    let n = 4;
    let mut rho = DMatrix::zeros(16, 16);
    for (r, c) in [(0, 0), (0, 15), (15, 0), (15, 15)] {
        rho[(r, c)] = Complex64::new(0.5, 0.0);
    }
    let d = DenseState::new(rho, n).unwrap();
    assert!(covariance_of(&d).is_ok());
    assert!(wick_residual(&d) > 0.1);
}

#[test]
fn correlators_match_dense() {
    let mut r = rng(2);
    let s = CovarianceState::random_mixed(3, &mut r).unwrap();
    let d = DenseState::from_covariance(&s).unwrap();
    for idx in [[0usize, 1, 2, 3], [1, 2, 4, 5], [3, 0, 5, 2]] {
        let a = s.correlator(&idx).unwrap();
        let b = d.correlator(&idx);
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn to_majorana_matches_dirac_operator() {
    let mut r = rng(3);
    for n in 1..=4 {
        let hop = DMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let hop = (&hop + hop.adjoint()) * Complex64::new(0.5, 0.0);
        let pair = DMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let pair = (&pair - pair.transpose()) * Complex64::new(0.5, 0.0);
        let q = QuadraticSpec::new(hop, pair).unwrap();
        let (h, c) = to_majorana(&q).unwrap();
        let lhs = dirac_operator(&q).unwrap();
        let rhs = quadratic_operator(&matkit::complexify(h.as_matrix()), n).unwrap()
            + DMatrix::identity(1 << n, 1 << n) * Complex64::new(c, 0.0);
        assert!(matkit::max_abs_diff(&lhs, &rhs) < 1e-12, "n = {n}");
    }
}

#[test]
fn kitaev_spectrum_matches_dense() {
    let q = kitaev_chain(2, 0.0, 1.0, 1.0).unwrap();
    let (h, c) = to_majorana(&q).unwrap();
    let dense = dirac_operator(&q).unwrap();
    let quad = quadratic_operator(&matkit::complexify(h.as_matrix()), 2).unwrap();
    let a = matkit::hermitian_eigenvalues(&dense);
    let b: Vec<f64> = matkit::hermitian_eigenvalues(&quad).iter().map(|e| e + c).collect();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn unitary_kitaev_matches_dense() {
    let (h, _) = to_majorana(&kitaev_chain(2, 0.3, 1.0, 0.7).unwrap()).unwrap();
    let s = CovarianceState::random_pure(2, &mut rng(4)).unwrap();
    let c = crate::dynamics::evolve_unitary(&s, &h, 1.7).unwrap();
    let d = oracle_apply(&DenseState::from_covariance(&s).unwrap(), &DenseOp::Unitary { h: &h, t: 1.7 }).unwrap();
    assert_close_cov(&c, &d, 1e-8);
}

#[test]
fn nonhermitian_kitaev_matches_dense() {
    let mut r = rng(5);
    let (h, _) = to_majorana(&kitaev_chain(2, 0.2, 1.0, 1.0).unwrap()).unwrap();
    let b = DressedMode::random(2, &mut r).unwrap();
    let g = QuadraticGenerator::new(h, AntisymMatrix::project(b.number_generator() * 0.05), 0.025).unwrap();
    let s = CovarianceState::neel(2).unwrap();
    let c = evolve_nonhermitian(&s, &g, 2.0, 0.01).unwrap();
    let d = oracle_apply(&DenseState::from_covariance(&s).unwrap(), &DenseOp::NonHermitian { g: &g, t: 2.0 }).unwrap();
    assert_close_cov(&c, &d, 1e-6);
}

#[test]
fn exact_propagator_matches_dense() {
    let mut r = rng(51);
    for n in 1..=3 {
        let h = matkit::random_antisym(2 * n, 1.0, &mut r);
        let mut gam = DMatrix::zeros(2 * n, 2 * n);
        let mut g0 = 0.0;
        for _ in 0..2 {
            let b = DressedMode::random(n, &mut r).unwrap();
            let rate = r.random_range(0.1..0.8);
            gam += b.number_generator() * (0.5 * rate);
            g0 += 0.25 * rate;
        }
        let g = QuadraticGenerator::new(h, AntisymMatrix::project(gam), g0).unwrap();
        let s = CovarianceState::random_mixed(n, &mut r).unwrap();
        let prop = NonHermitianPropagator::new(&g, 0.1).unwrap();
        let mut c = s.clone();
        for _ in 0..15 {
            c = prop.apply(&c).unwrap();
        }
        let d = oracle_apply(&DenseState::from_covariance(&s).unwrap(), &DenseOp::NonHermitian { g: &g, t: 1.5 }).unwrap();
        assert_close_cov(&c, &d, 1e-9);
        let rk = evolve_nonhermitian(&s, &g, 1.5, 0.001).unwrap();
        assert!(matkit::max_abs_diff(c.covariance(), rk.covariance()) < 1e-10);
        assert!((c.log_weight() - rk.log_weight()).abs() < 1e-10);
    }
}

#[test]
fn measurement_probabilities_match_dense() {
    let mut r = rng(6);
    for _ in 0..100 {
        let n = r.random_range(1..=4);
        let s = if r.random::<bool>() {
            CovarianceState::random_pure(n, &mut r).unwrap()
        } else {
            CovarianceState::random_mixed(n, &mut r).unwrap()
        };
        let b = DressedMode::random(n, &mut r).unwrap();
        let d = DenseState::from_covariance(&s).unwrap();
        let bop = mode_operator(&b).unwrap();
        let dense_p1 = d.expectation(&(bop.adjoint() * &bop)).re;
        assert!((s.occupation_of_mode(&b).unwrap() - dense_p1).abs() < 1e-10);
    }
}

#[test]
fn dressed_measurement_matches_dense() {
    let mut r = rng(7);
    for _ in 0..10 {
        let s = CovarianceState::random_pure(3, &mut r).unwrap();
        let b = DressedMode::random(3, &mut r).unwrap();
        let d = DenseState::from_covariance(&s).unwrap();
        for outcome in [Occupation::Empty, Occupation::Occupied] {
            let c = measure_dressed(&s, &b, outcome).unwrap().state.unwrap();
            let dd = oracle_apply(&d, &DenseOp::Measure { mode: &b, outcome }).unwrap();
            assert_close_cov(&c, &dd, 1e-8);
        }
    }
}

#[test]
fn bell_pair_measurement_correlation() {
    // Measuring the c-register mode fixes the d-register occupation to the opposite value.
    let s = CovarianceState::bell_pair(1).unwrap();
    let d = DenseState::from_covariance(&s).unwrap();
    let b0 = DressedMode::bare(0, 2).unwrap();
    for outcome in [Occupation::Empty, Occupation::Occupied] {
        let c = measure_dressed(&s, &b0, outcome).unwrap();
        assert!((c.weight - 0.5).abs() < 1e-12);
        let c = c.state.unwrap().normalized();
        let dd = oracle_apply(&d, &DenseOp::Measure { mode: &b0, outcome }).unwrap();
        let a1 = annihilator(1, 2).unwrap();
        let dense_occ = dd.expectation(&(a1.adjoint() * &a1)).re;
        assert!((c.occupation(1) - dense_occ).abs() < 1e-12);
        let expected = match outcome {
            Occupation::Empty => 1.0,
            Occupation::Occupied => 0.0,
        };
        assert!((dense_occ - expected).abs() < 1e-12);
    }
}

#[test]
fn dissipation_matches_dense() {
    let mut r = rng(8);
    for _ in 0..10 {
        let s = CovarianceState::random_mixed(3, &mut r).unwrap();
        let b = DressedMode::random(3, &mut r).unwrap();
        let c = dissipate(&s, &b).unwrap().state.unwrap();
        let d = oracle_apply(&DenseState::from_covariance(&s).unwrap(), &DenseOp::Dissipate { mode: &b }).unwrap();
        assert_close_cov(&c, &d, 1e-8);
    }
}

fn dense_two_point(d: &DenseState) -> DMatrix<Complex64> {
    two_point_matrix(d)
}

#[test]
fn dissipative_channel_average_matches_dense() {
    let mut r = rng(9);
    let cases = [
        (CovarianceState::filled(1).unwrap(), alloc::vec![(0.7, DressedMode::bare(0, 1).unwrap())]),
        (
            CovarianceState::random_mixed(3, &mut r).unwrap(),
            (0..3).map(|_| (r.random_range(0.1..1.0), DressedMode::random(3, &mut r).unwrap())).collect(),
        ),
        (CovarianceState::maximally_mixed(2).unwrap(), alloc::vec![(1.0, DressedMode::random(2, &mut r).unwrap())]),
    ];
    for (s, jumps) in cases.iter() {
        let f = channel_average_dissipative(s, jumps).unwrap();
        let d = channel_average(&DenseState::from_covariance(s).unwrap(), jumps, JumpKind::Dissipative).unwrap();
        assert!(matkit::max_abs_diff(f.matrix(), &dense_two_point(&d)) < 1e-8);
    }
}

#[test]
fn projective_channel_average_matches_dense() {
    let mut r = rng(10);
    let cases = [
        (CovarianceState::vacuum(1).unwrap(), alloc::vec![(0.4, DressedMode::bare(0, 1).unwrap())]),
        (CovarianceState::maximally_mixed(2).unwrap(), alloc::vec![(1.0, DressedMode::random(2, &mut r).unwrap())]),
        (
            CovarianceState::random_mixed(3, &mut r).unwrap(),
            (0..3).map(|_| (r.random_range(0.1..1.0), DressedMode::random(3, &mut r).unwrap())).collect(),
        ),
    ];
    for (s, jumps) in cases.iter() {
        let f = channel_average_projective(s, jumps).unwrap();
        let d = channel_average(&DenseState::from_covariance(s).unwrap(), jumps, JumpKind::Projective).unwrap();
        assert!(matkit::max_abs_diff(f.matrix(), &dense_two_point(&d)) < 1e-8);
    }
}

/// Closed form `Σγ²{2[X, M−Mᵀ] + X}`, `X = Tr(MC)C + Cᵀ(M−Mᵀ)C`, scaled by the weight,
/// with the rate standing in for `γ²`.
fn number_channel_closed_form(s: &CovarianceState, jumps: &[(f64, DressedMode)]) -> DMatrix<Complex64> {
    let c = s.correlation_matrix().0;
    let mut out = DMatrix::zeros(c.nrows(), c.ncols());
    for (rate, b) in jumps {
        let m = b.outer();
        let anti = &m - m.transpose();
        let x = &c * (&m * &c).trace() + c.transpose() * &anti * &c;
        out += ((&x * &anti - &anti * &x) * Complex64::new(2.0, 0.0) + &x) * Complex64::new(*rate, 0.0);
    }
    out * Complex64::new(s.weight(), 0.0)
}

#[test]
fn number_channel_closed_form_matches_dense() {
    let mut r = rng(11);
    for n in 1..=3 {
        let s = CovarianceState::random_mixed(n, &mut r).unwrap().with_log_weight(-0.3);
        let jumps: Vec<_> = (0..n + 1)
            .map(|_| (r.random_range(0.1..1.5), DressedMode::random(n, &mut r).unwrap()))
            .collect();
        let closed = number_channel_closed_form(&s, &jumps);
        let d = channel_average(&DenseState::from_covariance(&s).unwrap(), &jumps, JumpKind::Projective).unwrap();
        assert!(matkit::max_abs_diff(&closed, &dense_two_point(&d)) < 1e-10);
        let derived = channel_average_projective(&s, &jumps).unwrap();
        assert!(matkit::max_abs_diff(&closed, derived.matrix()) < 1e-10);
    }
}

#[test]
fn dissipative_lindblad_matches_dense() {
    let b = DressedMode::bare(0, 1).unwrap();
    let m = LindbladModel::new(
        AntisymMatrix::zeros(2),
        alloc::vec![Jump { rate: 1.0, mode: b, kind: JumpKind::Dissipative }],
    )
    .unwrap();
    let s = CovarianceState::filled(1).unwrap();
    let d0 = DenseState::from_covariance(&s).unwrap();
    let a = annihilator(0, 1).unwrap();
    let num = a.adjoint() * &a;
    for t in [0.5, 1.0, 2.0] {
        let c = lindblad_covariance_dissipative(&s, &m, t, 0.01).unwrap();
        let d = evolve_lindblad(&d0, &m, t, 0.01).unwrap();
        assert!((c.occupation(0) - d.expectation(&num).re).abs() < 1e-6);
    }

    let mut r = rng(12);
    let h = matkit::random_antisym(6, 1.0, &mut r);
    let jumps = (0..3)
        .map(|_| Jump { rate: r.random_range(0.2..1.0), mode: DressedMode::random(3, &mut r).unwrap(), kind: JumpKind::Dissipative })
        .collect();
    let m = LindbladModel::new(h, jumps).unwrap();
    let s = CovarianceState::random_pure(3, &mut r).unwrap();
    let c = lindblad_covariance_dissipative(&s, &m, 1.5, 0.005).unwrap();
    let d = evolve_lindblad(&DenseState::from_covariance(&s).unwrap(), &m, 1.5, 0.005).unwrap();
    assert_close_cov(&c, &d, 1e-6);
}

#[test]
fn projective_lindblad_matches_dense() {
    let b = DressedMode::bare(0, 1).unwrap();
    let m = LindbladModel::new(
        AntisymMatrix::zeros(2),
        alloc::vec![Jump { rate: 0.8, mode: b, kind: JumpKind::Projective }],
    )
    .unwrap();
    let s = CovarianceState::random_pure(1, &mut rng(13)).unwrap();
    let c = lindblad_covariance_projective(&s, &m, 1.0, 0.01).unwrap();
    let d = evolve_lindblad(&DenseState::from_covariance(&s).unwrap(), &m, 1.0, 0.01).unwrap();
    assert_close_cov(&c, &d, 1e-6);

    let mut r = rng(14);
    let h = matkit::random_antisym(6, 1.0, &mut r);
    let jumps = (0..3)
        .map(|_| Jump { rate: r.random_range(0.2..1.0), mode: DressedMode::random(3, &mut r).unwrap(), kind: JumpKind::Projective })
        .collect();
    let m = LindbladModel::new(h, jumps).unwrap();
    let s = CovarianceState::random_pure(3, &mut r).unwrap();
    let c = lindblad_covariance_projective(&s, &m, 1.5, 0.005).unwrap();
    let d = evolve_lindblad(&DenseState::from_covariance(&s).unwrap(), &m, 1.5, 0.005).unwrap();
    assert_close_cov(&c, &d, 1e-6);
}

fn hatano_nelson_reference(l: usize, j: f64, gamma: f64) -> DMatrix<Complex64> {
    // −(J − γ/2) Σ a_i†a_{i+1} − (J + γ/2) Σ a_{i+1}†a_i − iγ(L−1)/2
    let a: Vec<_> = (0..l).map(|k| annihilator(k, l).unwrap()).collect();
    let mut out = DMatrix::<Complex64>::identity(1 << l, 1 << l) * Complex64::new(0.0, -0.5 * gamma * (l - 1) as f64);
    for i in 0..l - 1 {
        out -= a[i].adjoint() * &a[i + 1] * Complex64::new(j - 0.5 * gamma, 0.0);
        out -= a[i + 1].adjoint() * &a[i] * Complex64::new(j + 0.5 * gamma, 0.0);
    }
    out
}

#[test]
fn hatano_nelson_effective_hamiltonian() {
    let (l, j, gamma) = (3, 1.0, 0.5);
    let reference = hatano_nelson_reference(l, j, gamma);
    for m in [hatano_nelson_dissipative(l, j, gamma).unwrap(), hatano_nelson_projective(l, j, gamma).unwrap()] {
        let k = effective_hamiltonian(&m).unwrap();
        assert!(matkit::max_abs_diff(&k, &reference) < 1e-12);
        // The covariance no-jump generator is the same operator.
        let g = m.no_jump_generator();
        let kq = quadratic_operator(&matkit::complexify(g.h.as_matrix()), l).unwrap()
            - (quadratic_operator(&matkit::complexify(g.gamma.as_matrix()), l).unwrap()
                + DMatrix::identity(1 << l, 1 << l) * Complex64::new(g.gamma0, 0.0))
                * I;
        assert!(matkit::max_abs_diff(&kq, &reference) < 1e-12);
    }
}

#[test]
fn entropy_matches_dense() {
    let mut r = rng(15);
    for n in 2..=5 {
        let s = if n % 2 == 0 {
            CovarianceState::random_pure(n, &mut r).unwrap()
        } else {
            CovarianceState::random_mixed(n, &mut r).unwrap()
        };
        let p = Bipartition::new(&[0, n - 1], n).unwrap();
        let d = DenseState::from_covariance(&s).unwrap();
        let a = entanglement_entropy(&s, &p).unwrap();
        let b = entanglement_entropy_exact(&d, &p).unwrap();
        assert!((a - b).abs() < 1e-9, "n = {n}: {a} vs {b}");
    }
    let bell = CovarianceState::bell_pair(1).unwrap();
    let p = Bipartition::new(&[0], 2).unwrap();
    let e = entanglement_entropy_exact(&DenseState::from_covariance(&bell).unwrap(), &p).unwrap();
    assert!((e - core::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn exact_negativity_reference_values() {
    let p = Bipartition::new(&[0], 2).unwrap();
    let bell = DenseState::from_covariance(&CovarianceState::bell_pair(1).unwrap()).unwrap();
    assert!((log_negativity_exact(&bell, &p).unwrap() - core::f64::consts::LN_2).abs() < 1e-12);
    let product = DenseState::from_covariance(&CovarianceState::neel(2).unwrap()).unwrap();
    assert!(log_negativity_exact(&product, &p).unwrap().abs() < 1e-12);
    assert!(log_negativity_bosonic(&product, &p).unwrap().abs() < 1e-12);
}

#[test]
fn negativity_calibration_small() {
    let report = sweep::negativity_calibration(4, 40, 3).unwrap();
    assert!(report.passed(1e-7), "{report:?}");
}

#[test]
fn operation_sweep_small() {
    let report = sweep::operation_sweep(3, 10, 8, 5).unwrap();
    assert!(report.operations > 40);
    assert!(report.passed(1e-8), "{report:?}");
}
