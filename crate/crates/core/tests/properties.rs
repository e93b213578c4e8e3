use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use tripod_sim::geometry::CalibrationTable;
use tripod_sim::model::{
    build_superoperator, master_rhs, solve_steady_state, time_evolve, unvectorize, vectorize,
    DecayModel, DensityMatrix, Reduction, SystemParams,
};
use tripod_sim::output::{parse_table, table_to_string};
use tripod_sim::spectra::{find_features, linspace, probe_sweep_with, FeatureKind, SpectrumSeries, SweepOptions};

fn decay() -> impl Strategy<Value = DecayModel> {
    (0.5..12.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..2.0f64, 0.0..1.0f64, 0.0..0.5f64).prop_map(
        |(gamma_pop, b1, b2, extra, gamma_ground, mix)| {
            let (b1, b2) = (b1 * 0.9, b2 * 0.9);
            let (b1, b2) = if b1 + b2 > 1.0 { (b1 / 2.0, b2 / 2.0) } else { (b1, b2) };
            DecayModel {
                gamma_pop,
                branching: [b1, b2, 1.0 - b1 - b2],
                gamma_opt: [0.5 * gamma_pop + extra, 0.5 * gamma_pop + 2.0 * extra, 0.5 * gamma_pop + extra / 2.0],
                gamma_ground,
                ground_mix: mix,
            }
        },
    )
}

fn params() -> impl Strategy<Value = SystemParams> {
    (
        (0.0..15.0f64, 0.0..3.0f64, 0.0..15.0f64),
        (-10.0..10.0f64, -20.0..20.0f64, -10.0..10.0f64),
        decay(),
    )
        .prop_map(|((omega_c, omega_p, omega_a), (delta_c, delta_p, delta_a), decay)| SystemParams {
            omega_c,
            omega_p,
            omega_a,
            delta_c,
            delta_p,
            delta_a,
            decay,
        })
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0..1.0f64, 32).prop_map(|v| {
        let a = Matrix4::<C64>::from_fn(|i, j| C64::new(v[2 * (4 * i + j)], v[2 * (4 * i + j) + 1]));
        let mut m = a * a.adjoint();
        m /= m.trace();
        DensityMatrix::new(m).unwrap()
    })
}

fn max_norm(m: &Matrix4<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(100) })]

    #[test]
    fn generator_is_traceless_and_hermitian(p in params(), rho in state()) {
        let d = master_rhs(&p, &rho);
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!(max_norm(&(d - d.adjoint())) < 1e-12);
    }

    #[test]
    fn superoperator_matches_matrix_generator(p in params(), rho in state()) {
        let l = build_superoperator(&p);
        let via_super = unvectorize(&(l * vectorize(rho.matrix())));
        let direct = master_rhs(&p, &rho);
        prop_assert!(max_norm(&(via_super - direct)) < 1e-12);
    }

    #[test]
    fn short_trajectories_stay_physical(p in params(), rho in state()) {
        let dt = 0.5 * tripod_sim::model::max_step(&p);
        let traj = time_evolve(&p, &rho, 50.0 * dt, dt).unwrap();
        for (_, r) in traj.samples() {
            prop_assert!((r.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(r.hermiticity_error() < 1e-12);
            prop_assert!(r.min_eigenvalue() > -1e-7);
        }
    }

    #[test]
    fn steady_states_are_physical(p in params()) {
        let p = SystemParams { decay: DecayModel { ground_mix: p.decay.ground_mix + 0.01, ..p.decay }, ..p };
        let s = solve_steady_state(&p, Reduction::None).unwrap();
        prop_assert!((s.rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(s.rho.hermiticity_error() < 1e-12);
        prop_assert!(s.rho.min_eigenvalue() > -1e-9);
        prop_assert!(s.residual < 1e-10);
    }

    #[test]
    fn lambda_reduction_keeps_level_three_empty(p in params()) {
        let lam = SystemParams { decay: DecayModel { ground_mix: 0.0, ..p.decay }, omega_c: p.omega_c + 0.5, ..p }
            .lambda_reference();
        prop_assume!(lam.decay.gamma_pop > 0.0);
        let s = solve_steady_state(&lam, Reduction::ExcludeIsolated).unwrap();
        for k in 0..4 {
            prop_assert_eq!(s.rho.get(2, k), C64::from(0.0));
            prop_assert_eq!(s.rho.get(k, 2), C64::from(0.0));
        }
        prop_assert!((s.rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(s.residual < 1e-10);
    }

    #[test]
    fn calibration_round_trip(det in -0.375..0.375f64) {
        let c = CalibrationTable::default();
        let dl = c.detuning_to_length(det);
        prop_assert!((c.length_to_detuning(dl) - det).abs() < 1e-12);
        prop_assert!((c.detuning_to_length(c.length_to_detuning(dl)) - dl).abs() < 1e-9);
    }

    #[test]
    fn calibration_is_strictly_decreasing(a in -20.0..20.0f64, step in 1e-6..5.0f64) {
        let c = CalibrationTable::default();
        prop_assert!(c.length_to_detuning(a + step) < c.length_to_detuning(a));
    }

    #[test]
    fn lorentzian_peak_is_located(center in -10.0..10.0f64, width in 0.5..5.0f64) {
        let axis = linspace(-30.0, 30.0, 401);
        let step = axis[1] - axis[0];
        let y: Vec<f64> = axis.iter().map(|x| width / ((x - center).powi(2) + width * width)).collect();
        let z = vec![0.0; axis.len()];
        let s = SpectrumSeries::from_columns("delta_p_khz", axis, [y, z.clone(), z.clone(), z.clone(), z.clone(), z]).unwrap();
        let f = find_features(&s).unwrap();
        prop_assert_eq!(f.len(), 1);
        prop_assert_eq!(f[0].kind, FeatureKind::Bright);
        prop_assert!((f[0].position - center).abs() < step);
        // Width at half prominence above the higher window edge.
        let base = s.absorption()[0].max(s.absorption()[400]);
        let half = 0.5 * (1.0 / width + base);
        let expected = 2.0 * (width / half - width * width).sqrt();
        prop_assert!((f[0].fwhm.unwrap() - expected).abs() < step);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..40)) {
        let text = table_to_string(&["a"], &[&values]);
        let t = parse_table(&text, std::path::Path::new("mem")).unwrap();
        prop_assert!(t.columns[0].iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(8) })]

    #[test]
    fn sweeps_are_deterministic(p in params(), threads in 1usize..5) {
        let p = SystemParams { decay: DecayModel { ground_mix: p.decay.ground_mix + 0.01, ..p.decay }, ..p };
        let axis = linspace(-20.0, 20.0, 41);
        let a = probe_sweep_with(&p, &axis, &SweepOptions::serial()).unwrap();
        let b = probe_sweep_with(&p, &axis, &SweepOptions { threads, ..Default::default() }).unwrap();
        prop_assert_eq!(a, b);
    }
}
