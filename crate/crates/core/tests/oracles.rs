mod common;

use common::{max_abs_diff, random_params, random_state};
use nalgebra::Matrix4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tripod_sim::dressed::{eigensystem, generalized_rabi};
use tripod_sim::geometry::preset;
use tripod_sim::model::{
    build_hamiltonian, evolve_to, master_rhs, max_step, solve_steady_state, steady_state,
    DensityMatrix, ModelError, Reduction, SystemParams,
};

#[test]
fn steady_state_matches_jump_operator_null_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let model = steady_state(&p).unwrap();
        let oracle = common::steady_state(&p, &[0, 1, 2, 3]);
        let err = max_abs_diff(model.matrix(), &oracle);
        assert!(err < 1e-9, "steady state differs by {err:e} for {p:?}");
    }
}

#[test]
fn generator_matches_jump_operator_liouvillian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let l = common::liouvillian(&p, &[0, 1, 2, 3]);
        let rho = random_state(&mut rng);
        let model = master_rhs(&p, &DensityMatrix::new(rho).unwrap());
        let oracle = common::rhs(&l, &rho);
        assert!(max_abs_diff(&model, &oracle) < 1e-11);
    }
}

#[test]
fn lambda_reduction_matches_three_level_oracle() {
    for name in ["fig1-lambda", "fig1d-detuned"] {
        let p = preset(name).unwrap().params;
        assert!(matches!(steady_state(&p), Err(ModelError::SingularSystem { .. })));
        for dp in [-12.0, -3.0, 0.0, 2.5, 9.0] {
            let q = SystemParams { delta_p: dp, ..p };
            let model = solve_steady_state(&q, Reduction::ExcludeIsolated).unwrap();
            let oracle = common::steady_state(&q, &[0, 1, 3]);
            assert!(max_abs_diff(model.rho.matrix(), &oracle) < 1e-10, "{name} at {dp}");
        }
    }
}

#[test]
fn decoupled_level_gives_a_two_dimensional_null_space() {
    let p = preset("fig1-lambda").unwrap().params;
    let s = common::singular_values(&p);
    let scale = s[s.len() - 1];
    assert!(s[0] < 1e-12 * scale && s[1] < 1e-12 * scale);
    assert!(s[2] > 1e-6 * scale);
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let h: Matrix4<f64> = build_hamiltonian(&p).matrix().map(|z| z.re);
        let roots = common::symmetric_eigenvalues(&h);
        let eig = eigensystem(&p);
        assert_eq!(roots.len(), 4, "{roots:?}");
        for (a, b) in roots.iter().zip(eig.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn bright_eigenvalues_are_roots_at_zero_detuning() {
    let p = preset("fig4c-map").unwrap().params;
    let h: Matrix4<f64> = build_hamiltonian(&p).matrix().map(|z| z.re);
    let roots = common::symmetric_eigenvalues(&h);
    let omega = generalized_rabi(p.omega_c, p.omega_p, p.omega_a);
    // The double root at zero is ill-conditioned for a sign-change scan;
    // the outer two are simple.
    assert!((roots[0] + 0.5 * omega).abs() < 1e-10, "{roots:?}");
    assert!((roots[roots.len() - 1] - 0.5 * omega).abs() < 1e-10, "{roots:?}");
    assert!(roots[1..roots.len() - 1].iter().all(|r| r.abs() < 1e-6));
}

#[test]
fn rk4_matches_independent_integrator() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..5 {
        let p = random_params(&mut rng);
        let rho0 = random_state(&mut rng);
        let dt = 0.5 * max_step(&p);
        let t = 400.0 * dt;
        let model = evolve_to(&p, &DensityMatrix::new(rho0).unwrap(), t, dt).unwrap();
        let oracle = common::integrate(&p, &rho0, t, dt);
        assert!(max_abs_diff(model.matrix(), &oracle) < 1e-12);
    }
}

// The horizon is picked from the slowest Liouvillian relaxation rate so the
// remaining transient is far below the tolerance.
#[test]
fn long_time_evolution_converges_to_steady_state() {
    let p = preset("fig4d-traces").unwrap().params;
    let rate = common::slowest_rate(&p);
    assert!(rate > 0.1 && rate < 1.0, "slowest rate {rate}");
    let t = 40.0 / rate;
    let dt = 0.5 * max_step(&p);
    let rho = evolve_to(&p, &DensityMatrix::pure_level(1), t, dt).unwrap();
    let ss = steady_state(&p).unwrap();
    assert!(max_abs_diff(rho.matrix(), ss.matrix()) < 1e-10);
}
