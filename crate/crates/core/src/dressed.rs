//! Dressed-state analysis of the tripod Hamiltonian: the analytic dark and
//! bright superpositions, exact eigen-decomposition, and the asymptotic
//! bright-mode splitting under symmetric detuning.

use std::fmt;

use nalgebra::{SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::model::{build_hamiltonian, Matrix4c, SystemParams, DIM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressedError {
    #[error("degenerate fields: {0}")]
    DegenerateFields(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DressedLabel {
    D1,
    D2,
    BrightPlus,
    BrightMinus,
}

impl fmt::Display for DressedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DressedLabel::D1 => "d1",
            DressedLabel::D2 => "d2",
            DressedLabel::BrightPlus => "b+",
            DressedLabel::BrightMinus => "b-",
        })
    }
}

/// A unit-norm superposition over |1⟩..|4⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedState {
    pub label: DressedLabel,
    pub amplitudes: Vector4<C64>,
    /// Eigenvalue of H at zero detunings, in kHz.
    pub eigenvalue: Option<f64>,
}

impl DressedState {
    fn normalized(label: DressedLabel, v: [f64; 4], eigenvalue: f64) -> Self {
        let v = Vector4::from(v.map(C64::from));
        let norm = v.norm();
        DressedState { label, amplitudes: v / C64::from(norm), eigenvalue: Some(eigenvalue) }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩
    pub fn overlap(&self, other: &DressedState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// The two dark states at zero detuning:
/// d1 ∝ Ω_A|1⟩ − Ω_c|3⟩ and d2 ∝ Ω_pΩ_c|1⟩ − (Ω_c² + Ω_A²)|2⟩ + Ω_pΩ_A|3⟩.
pub fn dark_states(
    omega_c: f64,
    omega_p: f64,
    omega_a: f64,
) -> Result<(DressedState, DressedState), DressedError> {
    if omega_c == 0.0 && omega_a == 0.0 {
        return Err(DressedError::DegenerateFields("dark states need Ω_c or Ω_A nonzero"));
    }
    let d1 = DressedState::normalized(DressedLabel::D1, [omega_a, 0.0, -omega_c, 0.0], 0.0);
    let d2 = DressedState::normalized(
        DressedLabel::D2,
        [
            omega_p * omega_c,
            -(omega_c * omega_c + omega_a * omega_a),
            omega_p * omega_a,
            0.0,
        ],
        0.0,
    );
    Ok((d1, d2))
}

/// Bright states b± ∝ Ω_c|1⟩ + Ω_p|2⟩ + Ω_A|3⟩ ± Ω|4⟩, normalized to unit
/// length. At zero detunings H·b± = ∓(Ω/2)·b±.
pub fn bright_states(
    omega_c: f64,
    omega_p: f64,
    omega_a: f64,
) -> Result<(DressedState, DressedState), DressedError> {
    let omega = generalized_rabi(omega_c, omega_p, omega_a);
    if omega == 0.0 {
        return Err(DressedError::DegenerateFields("bright states need a nonzero field"));
    }
    let plus = DressedState::normalized(
        DressedLabel::BrightPlus,
        [omega_c, omega_p, omega_a, omega],
        -0.5 * omega,
    );
    let minus = DressedState::normalized(
        DressedLabel::BrightMinus,
        [omega_c, omega_p, omega_a, -omega],
        0.5 * omega,
    );
    Ok((plus, minus))
}

/// Ω = √(Ω_c² + Ω_A² + Ω_p²)
pub fn generalized_rabi(omega_c: f64, omega_p: f64, omega_a: f64) -> f64 {
    (omega_c * omega_c + omega_p * omega_p + omega_a * omega_a).sqrt()
}

/// Eigen-decomposition of the Hamiltonian with ascending eigenvalues.
///
/// Column k of `eigenvectors` belongs to `eigenvalues[k]`; each column's
/// largest-magnitude component is real and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: [f64; 4],
    pub eigenvectors: Matrix4c,
    hamiltonian: Matrix4c,
}

impl EigenSystem {
    pub fn eigenvector(&self, k: usize) -> Vector4<C64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// max_k ‖H·v_k − λ_k v_k‖
    pub fn max_residual(&self) -> f64 {
        (0..DIM)
            .map(|k| {
                let v = self.eigenvector(k);
                (self.hamiltonian * v - v * C64::from(self.eigenvalues[k])).norm()
            })
            .fold(0.0, f64::max)
    }

    /// max |V†V − I|
    pub fn orthonormality_error(&self) -> f64 {
        (self.eigenvectors.adjoint() * self.eigenvectors - Matrix4c::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn eigensystem(params: &SystemParams) -> EigenSystem {
    let h = *build_hamiltonian(params).matrix();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvectors = Matrix4c::zeros();
    let mut eigenvalues = [0.0; 4];
    for (k, &src) in order.iter().enumerate() {
        eigenvalues[k] = eig.eigenvalues[src];
        let mut v = eig.eigenvectors.column(src).into_owned();
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::from(1.0));
        if pivot.norm() > 0.0 {
            v *= pivot.conj() / C64::from(pivot.norm());
        }
        eigenvectors.set_column(k, &v);
    }
    EigenSystem { eigenvalues, eigenvectors, hamiltonian: h }
}

/// Asymptotic bright-mode positions under symmetric detuning δ_c = −δ_A = δ:
/// e± = ±(Ω/√2)·√(1 + 2(δ/Ω)²). Returns (e+, e−).
pub fn asymptotic_splitting(omega: f64, delta: f64) -> Result<(f64, f64), DressedError> {
    if omega.is_nan() || omega <= 0.0 {
        return Err(DressedError::DegenerateFields("asymptotic splitting needs Ω > 0"));
    }
    let ratio = delta / omega;
    let e = omega / std::f64::consts::SQRT_2 * (1.0 + 2.0 * ratio * ratio).sqrt();
    Ok((e, -e))
}

/// Side-by-side report of the asymptotic formula and the exact outer
/// eigenvalues of H at δ_c = δ, δ_A = −δ, δ_p = 0. The two are reported as
/// computed; at δ = 0 they differ by a factor √2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingComparison {
    pub omega: f64,
    pub delta: f64,
    pub asymptotic_plus: f64,
    pub asymptotic_minus: f64,
    pub exact_lowest: f64,
    pub exact_highest: f64,
}

impl SplittingComparison {
    pub fn asymptotic_separation(&self) -> f64 {
        self.asymptotic_plus - self.asymptotic_minus
    }

    pub fn exact_separation(&self) -> f64 {
        self.exact_highest - self.exact_lowest
    }

    /// asymptotic separation / exact separation
    pub fn ratio(&self) -> f64 {
        self.asymptotic_separation() / self.exact_separation()
    }
}

pub fn compare_splitting(
    base: &SystemParams,
    delta: f64,
) -> Result<SplittingComparison, DressedError> {
    let omega = base.generalized_rabi();
    let (asymptotic_plus, asymptotic_minus) = asymptotic_splitting(omega, delta)?;
    let detuned = SystemParams { delta_c: delta, delta_a: -delta, delta_p: 0.0, ..*base };
    let eig = eigensystem(&detuned);
    Ok(SplittingComparison {
        omega,
        delta,
        asymptotic_plus,
        asymptotic_minus,
        exact_lowest: eig.eigenvalues[0],
        exact_highest: eig.eigenvalues[3],
    })
}
