//! Reference implementations used to check the library from a different
//! direction: Lindblad jump operators with column-stacked vectorization, an
//! SVD null-vector steady state, a characteristic-polynomial eigen solver,
//! and an independent RK4 loop.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tripod_sim::model::{DecayModel, SystemParams};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ket_bra(n: usize, i: usize, j: usize, scale: f64) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = c(scale);
    m
}

/// Interaction Hamiltonian written out entry by entry.
pub fn hamiltonian(p: &SystemParams) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(4, 4);
    h[(0, 0)] = c(-p.delta_c);
    h[(1, 1)] = c(-p.delta_p);
    h[(2, 2)] = c(-p.delta_a);
    for (g, w) in [(0, p.omega_c), (1, p.omega_p), (2, p.omega_a)] {
        h[(g, 3)] = c(-0.5 * w);
        h[(3, g)] = c(-0.5 * w);
    }
    h
}

/// Jump operators reproducing the decay model. Needs equal optical rates
/// with γ_opt ≥ Γ₀/2 + γ_ground/2 so it splits into pure dephasing.
pub fn jump_operators(d: &DecayModel) -> Vec<DMatrix<C64>> {
    let g_opt = d.gamma_opt[0];
    assert!(d.gamma_opt.iter().all(|&g| g == g_opt), "oracle needs equal optical rates");
    let kappa_g = 0.5 * d.gamma_ground;
    let kappa_e = g_opt - 0.5 * d.gamma_pop - kappa_g;
    assert!(kappa_e >= -1e-12, "oracle needs gamma_opt >= gamma_pop/2 + gamma_ground/2");
    let mut ops = Vec::new();
    for g in 0..3 {
        ops.push(ket_bra(4, g, 3, (d.branching[g] * d.gamma_pop).sqrt()));
        ops.push(ket_bra(4, g, g, (2.0 * kappa_g).sqrt()));
        for h in 0..3 {
            if h != g {
                ops.push(ket_bra(4, h, g, d.ground_mix.sqrt()));
            }
        }
    }
    ops.push(ket_bra(4, 3, 3, (2.0 * kappa_e.max(0.0)).sqrt()));
    ops
}

fn restrict(m: &DMatrix<C64>, keep: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

/// Kronecker product a ⊗ b.
fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Liouvillian on the kept levels, column-stacked: vec(X)[i + n j] = X[i, j].
pub fn liouvillian(p: &SystemParams, keep: &[usize]) -> DMatrix<C64> {
    let n = keep.len();
    let id = DMatrix::<C64>::identity(n, n);
    let h = restrict(&hamiltonian(p), keep);
    let i = C64::new(0.0, 1.0);
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * (-i);
    for op in jump_operators(&p.decay) {
        let op = restrict(&op, keep);
        let ldl = op.adjoint() * &op;
        l += kron(&op.conjugate(), &op) - kron(&id, &ldl) * c(0.5) - kron(&ldl.transpose(), &id) * c(0.5);
    }
    l
}

fn unstack(v: &DVector<C64>, keep: &[usize]) -> Matrix4<C64> {
    let n = keep.len();
    let mut m = Matrix4::zeros();
    for a in 0..n {
        for b in 0..n {
            m[(keep[a], keep[b])] = v[a + n * b];
        }
    }
    m
}

fn stack(m: &Matrix4<C64>) -> DVector<C64> {
    DVector::from_fn(16, |k, _| m[(k % 4, k / 4)])
}

/// Right singular vector of the smallest singular value, trace-normalized.
pub fn steady_state(p: &SystemParams, keep: &[usize]) -> Matrix4<C64> {
    let l = liouvillian(p, keep);
    let svd = l.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let v: DVector<C64> = v_t.row(k).adjoint();
    let mut m = unstack(&v, keep);
    let tr: C64 = (0..4).map(|i| m[(i, i)]).sum();
    m /= tr;
    m
}

/// Singular values of the full Liouvillian, ascending.
pub fn singular_values(p: &SystemParams) -> Vec<f64> {
    let mut s: Vec<f64> = liouvillian(p, &[0, 1, 2, 3]).singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Applies the column-stacked Liouvillian to a matrix.
pub fn rhs(l: &DMatrix<C64>, rho: &Matrix4<C64>) -> Matrix4<C64> {
    let v = l * stack(rho);
    unstack(&v, &[0, 1, 2, 3])
}

/// Plain RK4 on the column-stacked generator with a fixed step.
pub fn integrate(p: &SystemParams, rho0: &Matrix4<C64>, t_end: f64, dt: f64) -> Matrix4<C64> {
    let l = liouvillian(p, &[0, 1, 2, 3]);
    let mut v = stack(rho0);
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    for _ in 0..steps {
        let k1 = &l * &v;
        let k2 = &l * (&v + &k1 * c(0.5 * h));
        let k3 = &l * (&v + &k2 * c(0.5 * h));
        let k4 = &l * (&v + &k3 * c(h));
        v += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    unstack(&v, &[0, 1, 2, 3])
}

/// Largest |Re λ| < 0 of the Liouvillian other than the stationary mode:
/// the slowest relaxation rate.
pub fn slowest_rate(p: &SystemParams) -> f64 {
    let l = liouvillian(p, &[0, 1, 2, 3]);
    let mut re: Vec<f64> =
        nalgebra::Schur::new(l).eigenvalues().expect("complex Schur form").iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.total_cmp(a));
    -re[1]
}

/// Coefficients of det(λI − A) for a real symmetric 4×4 matrix by
/// Faddeev–LeVerrier: λ⁴ + c₃λ³ + c₂λ² + c₁λ + c₀, returned as [c₀..c₃].
pub fn characteristic_polynomial(a: &Matrix4<f64>) -> [f64; 4] {
    let mut coeffs = [0.0; 5];
    coeffs[4] = 1.0;
    let mut m = Matrix4::<f64>::zeros();
    for k in 1..=4 {
        m = a * m + Matrix4::identity() * coeffs[5 - k];
        coeffs[4 - k] = -(a * m).trace() / k as f64;
    }
    [coeffs[0], coeffs[1], coeffs[2], coeffs[3]]
}

/// Real roots of the characteristic polynomial by bisection on sign
/// changes over a fine grid, ascending.
pub fn symmetric_eigenvalues(a: &Matrix4<f64>) -> Vec<f64> {
    let cp = characteristic_polynomial(a);
    let f = |x: f64| (((x + cp[3]) * x + cp[2]) * x + cp[1]) * x + cp[0];
    let bound = 1.0 + a.iter().map(|v| v.abs()).sum::<f64>();
    let n = 200_000;
    let mut roots = Vec::new();
    let mut x0 = -bound;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = -bound + 2.0 * bound * i as f64 / n as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi) = (x0, x1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Random rates and fields around the map values, valid for the oracle.
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let gamma_pop = rng.gen_range(1.0..12.0);
    let gamma_ground = rng.gen_range(0.005..1.0);
    let gamma_opt = rng.gen_range((0.5 * gamma_pop + 0.5 * gamma_ground)..40.0);
    let b1: f64 = rng.gen_range(0.05..0.9);
    let b2: f64 = rng.gen_range(0.05..(0.95 - b1));
    SystemParams {
        omega_c: rng.gen_range(1.0..15.0),
        omega_p: rng.gen_range(0.1..3.0),
        omega_a: rng.gen_range(0.0..15.0),
        delta_c: rng.gen_range(-10.0..10.0),
        delta_p: rng.gen_range(-20.0..20.0),
        delta_a: rng.gen_range(-10.0..10.0),
        decay: DecayModel {
            gamma_pop,
            branching: [b1, b2, 1.0 - b1 - b2],
            gamma_opt: [gamma_opt; 3],
            gamma_ground,
            ground_mix: if rng.gen_bool(0.3) { rng.gen_range(0.0..0.5) } else { 0.0 },
        },
    }
}

/// Random full-rank density matrix A A† / tr.
pub fn random_state(rng: &mut ChaCha8Rng) -> Matrix4<C64> {
    let a = Matrix4::<C64>::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a * a.adjoint();
    let tr = m.trace();
    m / tr
}

pub fn max_abs_diff(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
