//! Four-level tripod model: Hamiltonian, master-equation generator, steady
//! states and fixed-step time evolution.
//!
//! Basis order is |1⟩, |2⟩, |3⟩, |4⟩ (indices 0..=3). |1⟩, |2⟩ and |3⟩ are the
//! ground states driven to the excited state |4⟩ by the coupling (Ω_c), probe
//! (Ω_p) and control (Ω_A) fields. ħ = 1 and every frequency, rate and
//! detuning is an angular-frequency quantity in kHz, so times are in ms.
//!
//! Density matrices are vectorized row-major: element (i, j) sits at `4 i + j`.

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Number of levels in the tripod.
pub const DIM: usize = 4;
/// Index of the excited state |4⟩.
pub const EXCITED: usize = 3;
/// Indices of the ground states |1⟩, |2⟩, |3⟩.
pub const GROUNDS: [usize; 3] = [0, 1, 2];

pub type Matrix4c = Matrix4<C64>;
/// Liouvillian acting on row-major vectorized 4×4 matrices.
pub type Superoperator = SMatrix<C64, 16, 16>;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-9;
const BRANCHING_TOL: f64 = 1e-12;
/// Relative pivot size below which the constrained steady-state system is
/// treated as singular.
const PIVOT_RATIO_TOL: f64 = 1e-12;
/// Relative singular-value cutoff used to count null-space dimensions.
const NULLITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error(
        "steady state is not unique (null space dimension {nullity}); \
         decoupled ground levels {isolated:?}: set decay.ground_mix_khz > 0 \
         or exclude the decoupled levels"
    )]
    SingularSystem { nullity: usize, isolated: Vec<usize> },
    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("invalid time span: {0}")]
    InvalidTime(String),
}

/// Relaxation channels of the tripod.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    /// Population decay rate Γ₀ of |4⟩.
    pub gamma_pop: f64,
    /// Branching ratios β₁, β₂, β₃ of the |4⟩ decay into |1⟩, |2⟩, |3⟩.
    pub branching: [f64; 3],
    /// Total decay rate of each optical coherence ρ₁₄, ρ₂₄, ρ₃₄.
    pub gamma_opt: [f64; 3],
    /// Decay rate of the ground coherences ρ₁₂, ρ₁₃, ρ₂₃.
    pub gamma_ground: f64,
    /// Rate of incoherent population exchange between each pair of ground
    /// states. Implemented as Lindblad jumps |i⟩⟨j| so it also dephases:
    /// ground coherences at 2·rate, optical coherences at rate.
    pub ground_mix: f64,
}

impl DecayModel {
    /// Equal branching into all three ground states and the same decay rate
    /// on every optical coherence.
    pub fn tripod(gamma_pop: f64, gamma_opt: f64, gamma_ground: f64) -> Self {
        DecayModel {
            gamma_pop,
            branching: [1.0 / 3.0; 3],
            gamma_opt: [gamma_opt; 3],
            gamma_ground,
            ground_mix: 0.0,
        }
    }

    /// Λ-system decay: |4⟩ decays only into |1⟩ and |2⟩, half each.
    pub fn lambda(gamma_pop: f64, gamma_opt: f64, gamma_ground: f64) -> Self {
        DecayModel {
            branching: [0.5, 0.5, 0.0],
            ..Self::tripod(gamma_pop, gamma_opt, gamma_ground)
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = [
            ("gamma_pop", self.gamma_pop),
            ("gamma_ground", self.gamma_ground),
            ("ground_mix", self.ground_mix),
        ];
        for (name, v) in rates
            .into_iter()
            .chain(self.gamma_opt.iter().map(|&g| ("gamma_opt", g)))
            .chain(self.branching.iter().map(|&b| ("branching", b)))
        {
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        let sum: f64 = self.branching.iter().sum();
        if (sum - 1.0).abs() > BRANCHING_TOL {
            return Err(ModelError::InvalidParams(format!(
                "branching ratios must sum to 1, got {sum}"
            )));
        }
        for (i, &g) in self.gamma_opt.iter().enumerate() {
            if g < 0.5 * self.gamma_pop {
                return Err(ModelError::InvalidParams(format!(
                    "optical coherence rate gamma_{}4 = {g} is below gamma_pop/2 = {}",
                    i + 1,
                    0.5 * self.gamma_pop
                )));
            }
        }
        Ok(())
    }

    fn max_rate(&self) -> f64 {
        self.gamma_opt
            .iter()
            .copied()
            .chain([self.gamma_pop, self.gamma_ground, self.ground_mix])
            .fold(0.0, f64::max)
    }
}

/// Complete physical configuration of the driven tripod.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Coupling Rabi frequency Ω_c on |1⟩–|4⟩.
    pub omega_c: f64,
    /// Probe Rabi frequency Ω_p on |2⟩–|4⟩.
    pub omega_p: f64,
    /// Control Rabi frequency Ω_A on |3⟩–|4⟩.
    pub omega_a: f64,
    /// δ_c = ω₁₄ − ω_c.
    pub delta_c: f64,
    /// δ_p = ω₂₄ − ω_p.
    pub delta_p: f64,
    /// δ_A = ω₃₄ − ω_A.
    pub delta_a: f64,
    pub decay: DecayModel,
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("omega_p", self.omega_p),
            ("omega_a", self.omega_a),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("delta_c", self.delta_c),
            ("delta_p", self.delta_p),
            ("delta_a", self.delta_a),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        self.decay.validate()
    }

    /// Rabi frequencies indexed by ground level: (Ω_c, Ω_p, Ω_A).
    pub fn rabi(&self) -> [f64; 3] {
        [self.omega_c, self.omega_p, self.omega_a]
    }

    /// Detunings indexed by ground level: (δ_c, δ_p, δ_A).
    pub fn detunings(&self) -> [f64; 3] {
        [self.delta_c, self.delta_p, self.delta_a]
    }

    /// Generalized Rabi frequency √(Ω_c² + Ω_p² + Ω_A²).
    pub fn generalized_rabi(&self) -> f64 {
        self.rabi().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Largest frequency scale of the problem, used for the step-size bound.
    pub fn max_frequency(&self) -> f64 {
        self.rabi()
            .into_iter()
            .chain(self.detunings().map(f64::abs))
            .fold(self.decay.max_rate(), f64::max)
    }

    /// The Λ reference obtained by switching the control field off.
    ///
    /// The |4⟩ → |3⟩ branch is redistributed onto |1⟩ and |2⟩ in proportion
    /// to their own ratios, so |3⟩ is neither driven nor fed.
    pub fn lambda_reference(&self) -> SystemParams {
        let [b1, b2, _] = self.decay.branching;
        let branching = if b1 + b2 > 0.0 {
            [b1 / (b1 + b2), b2 / (b1 + b2), 0.0]
        } else {
            [0.5, 0.5, 0.0]
        };
        SystemParams {
            omega_a: 0.0,
            decay: DecayModel { branching, ..self.decay },
            ..*self
        }
    }

    /// Ground levels with no field, no decay feeding them and no ground
    /// mixing. Population there never moves, so the steady state is not
    /// unique unless they are excluded.
    pub fn isolated_levels(&self) -> Vec<usize> {
        if self.decay.ground_mix > 0.0 {
            return Vec::new();
        }
        let rabi = self.rabi();
        GROUNDS
            .into_iter()
            .filter(|&g| rabi[g] == 0.0 && (self.decay.branching[g] == 0.0 || self.decay.gamma_pop == 0.0))
            .collect()
    }
}

/// Interaction Hamiltonian in units of ħ·kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian4(Matrix4c);

impl Hamiltonian4 {
    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4c {
        self.0
    }
}

/// H = −δ_c|1⟩⟨1| − δ_p|2⟩⟨2| − δ_A|3⟩⟨3| − ½(Ω_c|1⟩⟨4| + Ω_p|2⟩⟨4| + Ω_A|3⟩⟨4| + H.c.)
pub fn build_hamiltonian(params: &SystemParams) -> Hamiltonian4 {
    let mut h = Matrix4c::zeros();
    let rabi = params.rabi();
    let detunings = params.detunings();
    for g in GROUNDS {
        h[(g, g)] = C64::from(-detunings[g]);
        let coupling = C64::from(-0.5 * rabi[g]);
        h[(g, EXCITED)] = coupling;
        h[(EXCITED, g)] = coupling.conj();
    }
    Hamiltonian4(h)
}

/// A 4×4 Hermitian, unit-trace, positive semidefinite state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4c);

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(m: Matrix4c) -> Result<Self, ModelError> {
        let rho = DensityMatrix(m);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps a matrix without checking it. Integrators and solvers use this
    /// for states that satisfy the invariants up to round-off.
    pub(crate) fn from_matrix_unchecked(m: Matrix4c) -> Self {
        DensityMatrix(m)
    }

    /// |level⟩⟨level|
    pub fn pure_level(level: usize) -> Self {
        assert!(level < DIM, "level index {level} out of range");
        let mut m = Matrix4c::zeros();
        m[(level, level)] = C64::from(1.0);
        DensityMatrix(m)
    }

    /// Diagonal state with the given populations (must sum to 1).
    pub fn from_populations(pops: [f64; 4]) -> Result<Self, ModelError> {
        Self::new(Matrix4c::from_diagonal(&nalgebra::Vector4::from(pops.map(C64::from))))
    }

    /// |ψ⟩⟨ψ| for a normalized copy of `psi`.
    pub fn from_pure(psi: &nalgebra::Vector4<C64>) -> Result<Self, ModelError> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(ModelError::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi / C64::from(norm);
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.0 + self.0.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Checks Hermiticity, unit trace and positivity at the documented
    /// tolerances.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ModelError::InvalidState("non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(ModelError::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - C64::from(1.0)).norm() > TRACE_TOL {
            return Err(ModelError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -POSITIVITY_TOL {
            return Err(ModelError::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(())
    }
}

fn commutator(a: &Matrix4c, b: &Matrix4c) -> Matrix4c {
    a * b - b * a
}

/// Relaxation part of the generator applied to an arbitrary 4×4 matrix.
fn decay_terms(decay: &DecayModel, rho: &Matrix4c) -> Matrix4c {
    let mut out = Matrix4c::zeros();
    let excited_pop = rho[(EXCITED, EXCITED)];
    let mix = decay.ground_mix;

    out[(EXCITED, EXCITED)] = -decay.gamma_pop * excited_pop;
    for g in GROUNDS {
        let inflow_from_others: C64 = GROUNDS
            .into_iter()
            .filter(|&o| o != g)
            .map(|o| rho[(o, o)])
            .sum();
        out[(g, g)] = decay.branching[g] * decay.gamma_pop * excited_pop
            + mix * inflow_from_others
            - 2.0 * mix * rho[(g, g)];
    }
    for i in 0..DIM {
        for j in 0..DIM {
            if i == j {
                continue;
            }
            let rate = if i == EXCITED || j == EXCITED {
                let g = if i == EXCITED { j } else { i };
                decay.gamma_opt[g] + mix
            } else {
                decay.gamma_ground + 2.0 * mix
            };
            out[(i, j)] = -rate * rho[(i, j)];
        }
    }
    out
}

/// dρ/dt = −i[H, ρ] + decay, for any 4×4 matrix (the generator is linear).
pub fn master_rhs_matrix(params: &SystemParams, rho: &Matrix4c) -> Matrix4c {
    let h = build_hamiltonian(params);
    let coherent = commutator(h.matrix(), rho) * C64::new(0.0, -1.0);
    coherent + decay_terms(&params.decay, rho)
}

/// dρ/dt for a density matrix.
pub fn master_rhs(params: &SystemParams, rho: &DensityMatrix) -> Matrix4c {
    master_rhs_matrix(params, rho.matrix())
}

/// Row-major vectorization.
pub fn vectorize(m: &Matrix4c) -> SMatrix<C64, 16, 1> {
    SMatrix::<C64, 16, 1>::from_fn(|k, _| m[(k / DIM, k % DIM)])
}

pub fn unvectorize(v: &SMatrix<C64, 16, 1>) -> Matrix4c {
    Matrix4c::from_fn(|i, j| v[DIM * i + j])
}

/// Linear superoperator L with unvec(L·vec(ρ)) = dρ/dt.
///
/// Built independently of [`master_rhs_matrix`]: the coherent part is
/// −i(H ⊗ I − I ⊗ Hᵀ) and the decay part is filled from its index rules.
pub fn build_superoperator(params: &SystemParams) -> Superoperator {
    let h = *build_hamiltonian(params).matrix();
    let id = Matrix4c::identity();
    let h_left = h.kronecker(&id);
    let h_right = id.kronecker(&h.transpose());
    let mut l = Superoperator::zeros();
    l.copy_from(&((h_left - h_right) * C64::new(0.0, -1.0)));

    let d = &params.decay;
    let idx = |i: usize, j: usize| DIM * i + j;
    let ee = idx(EXCITED, EXCITED);
    l[(ee, ee)] -= C64::from(d.gamma_pop);
    for g in GROUNDS {
        let gg = idx(g, g);
        l[(gg, ee)] += C64::from(d.branching[g] * d.gamma_pop);
        for o in GROUNDS {
            if o != g {
                l[(gg, idx(o, o))] += C64::from(d.ground_mix);
            }
        }
        l[(gg, gg)] -= C64::from(2.0 * d.ground_mix);
    }
    for i in 0..DIM {
        for j in 0..DIM {
            if i == j {
                continue;
            }
            let rate = if i == EXCITED {
                d.gamma_opt[j] + d.ground_mix
            } else if j == EXCITED {
                d.gamma_opt[i] + d.ground_mix
            } else {
                d.gamma_ground + 2.0 * d.ground_mix
            };
            l[(idx(i, j), idx(i, j))] -= C64::from(rate);
        }
    }
    l
}

/// Which levels the steady-state solve runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Full 16-dimensional system; decoupled levels make it singular.
    #[default]
    None,
    /// Drop ground levels reported by [`SystemParams::isolated_levels`]; their
    /// rows and columns of ρ are fixed to zero.
    ExcludeIsolated,
}

/// A solved steady state together with its generator residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// max |(dρ/dt)_ij| evaluated at the solution.
    pub residual: f64,
}

/// Stationary state of the full system.
///
/// Solves L·vec(ρ) = 0 with the ρ₁₁ equation replaced by Tr ρ = 1.
pub fn steady_state(params: &SystemParams) -> Result<DensityMatrix, ModelError> {
    solve_steady_state(params, Reduction::None).map(|s| s.rho)
}

pub fn solve_steady_state(
    params: &SystemParams,
    reduction: Reduction,
) -> Result<SteadyState, ModelError> {
    params.validate()?;
    if params.decay.gamma_opt.iter().any(|&g| g <= 0.0) {
        return Err(ModelError::InvalidParams(
            "steady state requires strictly positive optical coherence decay".into(),
        ));
    }
    let isolated = params.isolated_levels();
    let kept: Vec<usize> = match reduction {
        Reduction::None => (0..DIM).collect(),
        Reduction::ExcludeIsolated => (0..DIM).filter(|l| !isolated.contains(l)).collect(),
    };
    let n = kept.len();
    let vars: Vec<usize> = kept
        .iter()
        .flat_map(|&i| kept.iter().map(move |&j| DIM * i + j))
        .collect();

    let full = build_superoperator(params);
    let reduced = DMatrix::<C64>::from_fn(vars.len(), vars.len(), |r, c| full[(vars[r], vars[c])]);

    // Trace row replaces the equation of the first kept population.
    let mut system = reduced.clone();
    system.row_mut(0).fill(C64::from(0.0));
    for a in 0..n {
        system[(0, a * n + a)] = C64::from(1.0);
    }
    let mut rhs = DVector::<C64>::zeros(vars.len());
    rhs[0] = C64::from(1.0);

    let singular = || ModelError::SingularSystem {
        nullity: nullity(&reduced),
        isolated: isolated.clone(),
    };
    let lu = system.full_piv_lu();
    let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
    let max_pivot = pivots.iter().copied().fold(0.0, f64::max);
    let min_pivot = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if max_pivot == 0.0 || min_pivot < PIVOT_RATIO_TOL * max_pivot {
        return Err(singular());
    }
    let x = lu.solve(&rhs).ok_or_else(singular)?;

    let mut m = Matrix4c::zeros();
    for (r, &v) in vars.iter().enumerate() {
        m[(v / DIM, v % DIM)] = x[r];
    }
    let m = (m + m.adjoint()) * C64::from(0.5);
    let rho = DensityMatrix::from_matrix_unchecked(m);
    let residual = master_rhs(params, &rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SteadyState { rho, residual })
}

fn nullity(m: &DMatrix<C64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return m.ncols();
    }
    sv.iter().filter(|&&s| s <= NULLITY_TOL * max).count()
}

/// Ordered (time, state) samples; time in ms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    samples: Vec<(f64, DensityMatrix)>,
}

impl Trajectory {
    pub fn samples(&self) -> &[(f64, DensityMatrix)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    pub fn last(&self) -> Option<&(f64, DensityMatrix)> {
        self.samples.last()
    }
}

/// Largest step accepted by [`time_evolve`].
pub fn max_step(params: &SystemParams) -> f64 {
    let f = params.max_frequency();
    if f == 0.0 {
        f64::INFINITY
    } else {
        0.1 / f
    }
}

fn rk4_step(params: &SystemParams, rho: &Matrix4c, dt: f64) -> Matrix4c {
    let half = C64::from(0.5 * dt);
    let full = C64::from(dt);
    let k1 = master_rhs_matrix(params, rho);
    let k2 = master_rhs_matrix(params, &(rho + k1 * half));
    let k3 = master_rhs_matrix(params, &(rho + k2 * half));
    let k4 = master_rhs_matrix(params, &(rho + k3 * full));
    rho + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0)
}

fn check_span(params: &SystemParams, t_end: f64, dt: f64) -> Result<(), ModelError> {
    params.validate()?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(ModelError::InvalidTime(format!("t_end must be >= 0, got {t_end}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ModelError::InvalidTime(format!("dt must be > 0, got {dt}")));
    }
    let limit = max_step(params);
    if dt > limit {
        return Err(ModelError::StepTooLarge { dt, limit });
    }
    Ok(())
}

/// Drives `on_step` with every accepted (time, state). The last step is
/// shortened to land exactly on `t_end`.
fn integrate(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    mut on_step: impl FnMut(f64, &Matrix4c),
) -> Result<Matrix4c, ModelError> {
    check_span(params, t_end, dt)?;
    rho0.check()?;
    let mut rho = *rho0.matrix();
    let steps = (t_end / dt).floor() as u64;
    for k in 1..=steps {
        rho = rk4_step(params, &rho, dt);
        on_step(k as f64 * dt, &rho);
    }
    let t_done = steps as f64 * dt;
    let rest = t_end - t_done;
    if rest > 1e-12 * dt.max(t_end) {
        rho = rk4_step(params, &rho, rest);
        on_step(t_end, &rho);
    }
    Ok(rho)
}

/// Classical fourth-order Runge–Kutta integration of the master equation
/// with fixed step `dt`, recording every step starting at t = 0.
pub fn time_evolve(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, ModelError> {
    let mut samples = vec![(0.0, *rho0)];
    integrate(params, rho0, t_end, dt, |t, m| {
        samples.push((t, DensityMatrix::from_matrix_unchecked(*m)));
    })?;
    Ok(Trajectory { samples })
}

/// Like [`time_evolve`] but keeps only every `stride`-th step (plus the
/// final one).
pub fn time_evolve_sampled(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, ModelError> {
    let stride = stride.max(1);
    let mut samples = vec![(0.0, *rho0)];
    let mut count = 0usize;
    let mut last = None;
    integrate(params, rho0, t_end, dt, |t, m| {
        count += 1;
        if count.is_multiple_of(stride) {
            samples.push((t, DensityMatrix::from_matrix_unchecked(*m)));
            last = None;
        } else {
            last = Some((t, DensityMatrix::from_matrix_unchecked(*m)));
        }
    })?;
    samples.extend(last);
    Ok(Trajectory { samples })
}

/// Final state of a [`time_evolve`] run without storing the path.
pub fn evolve_to(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<DensityMatrix, ModelError> {
    integrate(params, rho0, t_end, dt, |_, _| {}).map(DensityMatrix::from_matrix_unchecked)
}
