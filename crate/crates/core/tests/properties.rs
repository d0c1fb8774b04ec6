//! Randomised invariants.

use nonherm::biorthogonal::{biorthonormality_residual, build_basis, completeness, decompose, associated_state};
use nonherm::dissipative::{evolve_me, evolve_nojump, BlochVector, DissipativeModel};
use nonherm::experiments::{format_sig, read_csv, to_csv_string, ResultRow};
use nonherm::linalg::{expm2, herm_sqrt, inner, normalized, polar_unitary};
use nonherm::metric::{evolve_metric, metric_expectation};
use nonherm::symmetry::{
    build_momentum_maps, closed_form_maps, lz_matrix, mirror_density_residual, phi_identity_residual,
    table1_residual,
};
use nonherm::{c64, CMatrix, Error, HamiltonianFn, PauliCoeffs, TimeGrid, C64};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 256,
        ..ProptestConfig::default()
    }
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0_f64, -2.0..2.0_f64).prop_map(|(re, im)| c64(re, im))
}

fn matrix2() -> impl Strategy<Value = CMatrix> {
    prop::array::uniform4(complex()).prop_map(|a| CMatrix::new(2, a.to_vec()).unwrap())
}

fn state() -> impl Strategy<Value = Vec<C64>> {
    (complex(), complex())
        .prop_filter("nonzero", |(a, b)| a.norm() + b.norm() > 0.1)
        .prop_map(|(a, b)| normalized(&[a, b]).unwrap())
}

fn bloch_ball() -> impl Strategy<Value = BlochVector> {
    (0.0..1.0_f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        BlochVector::new(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pauli_round_trip(m in matrix2()) {
        let back = PauliCoeffs::decompose(&m).unwrap().compose();
        prop_assert!((&back - &m).max_abs() < 1e-14);
    }

    #[test]
    fn inverse_is_inverse(m in matrix2()) {
        prop_assume!(m.det().norm() > 1e-3);
        let p = &m * &m.inverse().unwrap();
        prop_assert!((&p - &CMatrix::identity(2)).max_abs() < 1e-9);
    }

    #[test]
    fn exponential_inverts(m in matrix2()) {
        let a = expm2(&m).unwrap();
        let b = expm2(&m.scale_re(-1.0)).unwrap();
        prop_assert!((&(&a * &b) - &CMatrix::identity(2)).max_abs() < 1e-9 * a.max_abs().max(1.0) * b.max_abs().max(1.0));
    }

    #[test]
    fn polar_factor_is_unitary(m in matrix2()) {
        prop_assume!(m.det().norm() > 1e-3);
        let q = polar_unitary(&m, None).unwrap();
        prop_assert!((&(&q.adjoint() * &q) - &CMatrix::identity(2)).max_abs() < 1e-12);
        // the remaining factor is Hermitian positive
        let p = &q.adjoint() * &m;
        prop_assert!(p.hermitian_residual() < 1e-10 * m.max_abs().max(1.0));
    }

    #[test]
    fn square_root_squares_back(m in matrix2()) {
        let p = &(&m * &m.adjoint()) + &CMatrix::identity(2).scale_re(0.05);
        let r = herm_sqrt(&p).unwrap();
        prop_assert!((&(&r * &r) - &p).max_abs() < 1e-10 * p.max_abs().max(1.0));
        prop_assert!(r.hermitian_residual() < 1e-12);
    }

    #[test]
    fn biorthogonal_basis_is_complete(m in matrix2()) {
        match build_basis(&m) {
            Ok(b) => {
                let cond = b.right.iter().zip(&b.left).map(|(r, l)| inner(r, r).re.sqrt() * inner(l, l).re.sqrt()).fold(1.0, f64::max);
                prop_assert!(biorthonormality_residual(&b) < 1e-10 * cond * cond);
                prop_assert!((&completeness(&b) - &CMatrix::identity(2)).max_abs() < 1e-10 * cond * cond);
            }
            Err(e) => prop_assert!(matches!(e, Error::NearDegenerate { .. }), "{e}"),
        }
    }

    #[test]
    fn associated_state_normalises(m in matrix2(), psi in state()) {
        let Ok(b) = build_basis(&m) else { return Ok(()) };
        let s = decompose(&psi, &b).unwrap();
        let cond = b.right.iter().zip(&b.left).map(|(r, l)| inner(r, r).re.sqrt() * inner(l, l).re.sqrt()).fold(1.0, f64::max);
        prop_assert!((inner(&associated_state(&s), &s.ket()) - c64(1.0, 0.0)).norm() < 1e-10 * cond * cond);
    }

    #[test]
    fn bloch_state_round_trip(psi in state()) {
        let b = BlochVector::from_state(&psi).unwrap();
        prop_assert!((b.length() - 1.0).abs() < 1e-12);
        let back = b.to_state().unwrap();
        prop_assert!((inner(&back, &psi).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mirror_identity(psi in state()) {
        prop_assert!(mirror_density_residual(&psi).unwrap() <= 1e-12);
    }

    #[test]
    fn phi_identity(psi in state(), k in 0.05..3.0_f64) {
        prop_assume!((k - 1.0).abs() > 0.05);
        prop_assert!(phi_identity_residual(k, 1.0, &psi).unwrap() <= 1e-8);
    }

    #[test]
    fn table1_identities(k in prop_oneof![-3.0..-1.05_f64, -0.95..-0.05_f64, 0.05..0.95_f64, 1.05..3.0_f64], delta in -3.0..3.0_f64) {
        // stay away from the instantaneous exceptional point
        prop_assume!((k * k + delta * delta - 1.0).abs() > 0.05);
        prop_assert!(table1_residual(k, 1.0, delta).unwrap() <= 1e-8);
    }

    #[test]
    fn momentum_maps_are_gauge_covariant(
        k in prop_oneof![0.05..0.95_f64, 1.05..3.0_f64],
        delta in -3.0..3.0_f64,
        phases in prop::array::uniform4(0.0..std::f64::consts::TAU),
    ) {
        prop_assume!((k * k + delta * delta - 1.0).abs() > 0.05);
        let (hk, hmk) = (lz_matrix(k, 1.0, delta), lz_matrix(-k, 1.0, delta));
        let maps = build_momentum_maps(k, &hk, &hmk).unwrap();
        prop_assert!(maps.conjugation_residual(&hk, &hmk) <= 1e-9);
        let closed = closed_form_maps(k, 1.0).unwrap();
        prop_assert!(closed.conjugation_residual(&hk, &hmk) <= 1e-9);
        let bk = build_basis(&hk).unwrap().regauge(&[C64::from_polar(1.0, phases[0]), C64::from_polar(1.0, phases[1])]);
        let bmk = build_basis(&hmk).unwrap().regauge(&[C64::from_polar(1.0, phases[2]), C64::from_polar(1.0, phases[3])]);
        let regauged = nonherm::symmetry::momentum_maps_from_bases(k, &bk, &bmk).unwrap();
        prop_assert!(regauged.conjugation_residual(&hk, &hmk) <= 1e-9);
    }

    #[test]
    fn csv_round_trip(
        values in prop::collection::vec((-1e3..1e3_f64, prop::option::of(-3.0..3.0_f64), -1.0..1.0_f64, -1.0..1.0_f64, -1.0..1.0_f64, 0.0..2.0_f64), 1..20),
    ) {
        let rows: Vec<ResultRow> = values
            .iter()
            .map(|&(t, k, sx, sy, sz, norm)| ResultRow { t, k, method: "metric".into(), sx, sy, sz, norm })
            .collect();
        let text = to_csv_string(&["m".to_string()], &rows);
        let back = read_csv(&text).unwrap();
        prop_assert_eq!(to_csv_string(&back.metadata, &back.rows), text.clone());
        for (a, b) in rows.iter().zip(&back.rows) {
            prop_assert_eq!(format_sig(a.t), format_sig(b.t));
            prop_assert!((a.sx - b.sx).abs() <= 1e-11 * a.sx.abs().max(1e-300));
            prop_assert_eq!(a.k.is_some(), b.k.is_some());
        }
    }

    #[test]
    fn sig_format_parses_close(x in -1e12..1e12_f64, scale in -20i32..20) {
        let v = x * 10f64.powi(scale);
        let parsed: f64 = format_sig(v).parse().unwrap();
        prop_assert!((parsed - v).abs() <= 5e-12 * v.abs());
    }
}

proptest! {
    // integration-heavy properties
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn master_equation_stays_physical(omega in 0.1..2.0_f64, gamma in 0.05..2.0_f64, b in bloch_ball(), which in any::<bool>()) {
        let model = if which { DissipativeModel::model_a(omega, gamma) } else { DissipativeModel::model_b(omega, gamma) };
        let traj = evolve_me(&model, &b.to_density(), TimeGrid::new(0.0, 3.0, 1e-2).unwrap()).unwrap();
        for rho in &traj.rho {
            prop_assert!((rho.trace() - c64(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(rho.hermitian_residual() < 1e-12);
            prop_assert!(BlochVector::from_density(rho).unwrap().length() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn no_jump_trace_never_grows(omega in 0.1..2.0_f64, gamma in 0.05..2.0_f64, b in bloch_ball(), which in any::<bool>()) {
        let model = if which { DissipativeModel::model_a(omega, gamma) } else { DissipativeModel::model_b(omega, gamma) };
        let traj = evolve_nojump(&model, &b.to_density(), TimeGrid::new(0.0, 3.0, 1e-2).unwrap()).unwrap();
        for i in 1..traj.len() {
            prop_assert!(traj.trace(i) <= traj.trace(i - 1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn metric_norm_is_conserved(omega in 0.5..2.0_f64, ratio in 0.0..0.9_f64, psi in state()) {
        let h = HamiltonianFn::constant(&CMatrix::sigma_x().scale_re(omega) - &CMatrix::sigma_z().scale(c64(0.0, ratio * omega)));
        let traj = evolve_metric(&h, &CMatrix::identity(2), &psi, TimeGrid::new(0.0, 2.0, 1e-2).unwrap()).unwrap();
        for i in 0..traj.len() {
            prop_assert!((traj.norm(i) - 1.0).abs() < 1e-6);
            prop_assert!((traj.mapped_norm(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_shift_leaves_metric_observables(m in matrix2(), shift in complex(), psi in state()) {
        let h = HamiltonianFn::constant(m);
        let grid = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        let a = evolve_metric(&h, &CMatrix::identity(2), &psi, grid).unwrap();
        let b = evolve_metric(&h.shifted(shift), &CMatrix::identity(2), &psi, grid).unwrap();
        let last = a.len() - 1;
        for op in CMatrix::paulis() {
            let (x, y) = (metric_expectation(&a, &op, last).unwrap(), metric_expectation(&b, &op, last).unwrap());
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}
