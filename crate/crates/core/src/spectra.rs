//! Steady-state sweep engines and derived spectral observables.
//!
//! Every spectrum point is an independent steady-state solve. Sweeps may run
//! on a rayon pool but results are always assembled in axis order, so serial
//! and parallel runs produce bit-identical series.
//!
//! The absorption column `im_rho24` is signed so that absorption is
//! positive: it holds Im⟨4|ρ|2⟩ = −Im ρ₂₄. With real couplings the real
//! parts of the coherences do not depend on the index order.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    solve_steady_state, DecayModel, DensityMatrix, ModelError, Reduction, SystemParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("steady state failed at delta = {delta:?} kHz, delta_p = {delta_p} kHz: {source}")]
    Sweep {
        delta: Option<f64>,
        delta_p: f64,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("series has {0} points; feature finding needs at least 5")]
    TooShort(usize),
    #[error("no spectral features: the absorption is monotone")]
    NoFeatures,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

/// Observable columns of a [`SpectrumSeries`], in CSV order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    ImRho24,
    ReRho24,
    ReRho12,
    ReRho13,
    ReRho23,
    Rho44,
}

impl Column {
    pub const ALL: [Column; 6] = [
        Column::ImRho24,
        Column::ReRho24,
        Column::ReRho12,
        Column::ReRho13,
        Column::ReRho23,
        Column::Rho44,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::ImRho24 => "im_rho24",
            Column::ReRho24 => "re_rho24",
            Column::ReRho12 => "re_rho12",
            Column::ReRho13 => "re_rho13",
            Column::ReRho23 => "re_rho23",
            Column::Rho44 => "rho44",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn extract(self, rho: &DensityMatrix) -> f64 {
        match self {
            Column::ImRho24 => rho.get(3, 1).im,
            Column::ReRho24 => rho.get(1, 3).re,
            Column::ReRho12 => rho.get(0, 1).re,
            Column::ReRho13 => rho.get(0, 2).re,
            Column::ReRho23 => rho.get(1, 2).re,
            Column::Rho44 => rho.get(3, 3).re,
        }
    }
}

/// Name of the derived column added by [`coherence_traces`].
pub const RE_RHO12_PLUS_RE_RHO13: &str = "re_rho12_plus_re_rho13";

/// A sweep axis with the steady-state observables recorded at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    axis_name: String,
    axis: Vec<f64>,
    columns: [Vec<f64>; 6],
    extra: Vec<(String, Vec<f64>)>,
    max_residual: f64,
}

impl SpectrumSeries {
    /// Builds a series from raw columns (ordered as [`Column::ALL`]).
    pub fn from_columns(
        axis_name: impl Into<String>,
        axis: Vec<f64>,
        columns: [Vec<f64>; 6],
    ) -> Result<Self, SpectraError> {
        validate_axis(&axis)?;
        if columns.iter().any(|c| c.len() != axis.len()) {
            return Err(SpectraError::InvalidAxis("column length differs from axis".into()));
        }
        Ok(SpectrumSeries {
            axis_name: axis_name.into(),
            axis,
            columns,
            extra: Vec::new(),
            max_residual: 0.0,
        })
    }

    fn from_states(axis_name: &str, axis: Vec<f64>, states: &[(DensityMatrix, f64)]) -> Self {
        let columns = Column::ALL.map(|c| states.iter().map(|(rho, _)| c.extract(rho)).collect());
        let max_residual = states.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        SpectrumSeries { axis_name: axis_name.to_string(), axis, columns, extra: Vec::new(), max_residual }
    }

    pub fn axis_name(&self) -> &str {
        &self.axis_name
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn column(&self, c: Column) -> &[f64] {
        &self.columns[c.index()]
    }

    /// Probe absorption, positive for absorption.
    pub fn absorption(&self) -> &[f64] {
        self.column(Column::ImRho24)
    }

    pub fn extra(&self, name: &str) -> Option<&[f64]> {
        self.extra.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn extra_columns(&self) -> &[(String, Vec<f64>)] {
        &self.extra
    }

    pub fn push_extra(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<(), SpectraError> {
        if values.len() != self.axis.len() {
            return Err(SpectraError::InvalidAxis("extra column length differs from axis".into()));
        }
        self.extra.push((name.into(), values));
        Ok(())
    }

    /// Largest steady-state generator residual over the sweep.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Absorption divided by a reference peak (see [`two_level_peak`]).
    pub fn normalized_absorption(&self, reference_peak: f64) -> Vec<f64> {
        self.absorption().iter().map(|a| a / reference_peak).collect()
    }

    /// Value of a column at the axis point nearest to `x`.
    pub fn value_near(&self, c: Column, x: f64) -> f64 {
        self.column(c)[nearest_index(&self.axis, x)]
    }

    /// Pointwise mean of two series on the same axis.
    pub fn mean_with(&self, other: &SpectrumSeries) -> Result<SpectrumSeries, SpectraError> {
        if self.axis != other.axis {
            return Err(SpectraError::InvalidAxis("series axes differ".into()));
        }
        let columns = Column::ALL.map(|c| {
            self.column(c)
                .iter()
                .zip(other.column(c))
                .map(|(a, b)| 0.5 * (a + b))
                .collect()
        });
        Ok(SpectrumSeries {
            axis_name: self.axis_name.clone(),
            axis: self.axis.clone(),
            columns,
            extra: Vec::new(),
            max_residual: self.max_residual.max(other.max_residual),
        })
    }
}

/// Index of the axis value closest to `x`.
pub fn nearest_index(axis: &[f64], x: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Probe absorption over (δ, δ_p) with δ_c = δ and δ_A = −δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Map2D {
    pub d_axis: Vec<f64>,
    pub dp_axis: Vec<f64>,
    /// One row per δ, one column per δ_p.
    pub grid: Vec<Vec<f64>>,
    pub max_residual: f64,
}

impl Map2D {
    pub fn row(&self, d_index: usize) -> &[f64] {
        &self.grid[d_index]
    }

    /// The row as a spectrum over δ_p with only the absorption filled in.
    pub fn row_series(&self, d_index: usize) -> Result<SpectrumSeries, SpectraError> {
        let n = self.dp_axis.len();
        let mut columns: [Vec<f64>; 6] = Default::default();
        columns[Column::ImRho24.index()] = self.grid[d_index].clone();
        for c in columns.iter_mut().skip(1) {
            *c = vec![0.0; n];
        }
        SpectrumSeries::from_columns("delta_p_khz", self.dp_axis.clone(), columns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    /// Local minimum of absorption (transparency).
    Dark,
    /// Local maximum of absorption.
    Bright,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    /// Sub-grid position, kHz.
    pub position: f64,
    pub value: f64,
    /// Full width at half prominence, bright features only.
    pub fwhm: Option<f64>,
}

/// Controls for the sweep engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    pub reduction: Reduction,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { threads: 0, reduction: Reduction::ExcludeIsolated }
    }
}

impl SweepOptions {
    pub fn serial() -> Self {
        SweepOptions { threads: 1, ..Default::default() }
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// 401 points over [−3Ω_c, +3Ω_c].
pub fn default_probe_axis(omega_c: f64) -> Vec<f64> {
    linspace(-3.0 * omega_c, 3.0 * omega_c, 401)
}

fn validate_axis(axis: &[f64]) -> Result<(), SpectraError> {
    if axis.is_empty() {
        return Err(SpectraError::InvalidAxis("axis is empty".into()));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(SpectraError::InvalidAxis("axis has non-finite values".into()));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::InvalidAxis("axis is not strictly increasing".into()));
    }
    Ok(())
}

fn run_parallel<T: Send>(
    threads: usize,
    job: impl FnOnce() -> T + Send,
) -> Result<T, SpectraError> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SpectraError::ThreadPool(e.to_string()))?;
    Ok(pool.install(job))
}

fn solve_points(
    points: &[(Option<f64>, SystemParams)],
    opts: &SweepOptions,
) -> Result<Vec<(DensityMatrix, f64)>, SpectraError> {
    let results: Vec<_> = run_parallel(opts.threads, || {
        points
            .par_iter()
            .map(|(delta, p)| {
                solve_steady_state(p, opts.reduction)
                    .map(|s| (s.rho, s.residual))
                    .map_err(|source| SpectraError::Sweep { delta: *delta, delta_p: p.delta_p, source })
            })
            .collect()
    })?;
    results.into_iter().collect()
}

pub fn probe_sweep(params: &SystemParams, dp_axis: &[f64]) -> Result<SpectrumSeries, SpectraError> {
    probe_sweep_with(params, dp_axis, &SweepOptions::default())
}

/// Steady state at every δ_p of the axis.
pub fn probe_sweep_with(
    params: &SystemParams,
    dp_axis: &[f64],
    opts: &SweepOptions,
) -> Result<SpectrumSeries, SpectraError> {
    validate_axis(dp_axis)?;
    params.validate()?;
    let points: Vec<_> = dp_axis
        .iter()
        .map(|&dp| (None, SystemParams { delta_p: dp, ..*params }))
        .collect();
    let states = solve_points(&points, opts)?;
    Ok(SpectrumSeries::from_states("delta_p_khz", dp_axis.to_vec(), &states))
}

pub fn detuning_map(
    params: &SystemParams,
    dp_axis: &[f64],
    d_axis: &[f64],
) -> Result<Map2D, SpectraError> {
    detuning_map_with(params, dp_axis, d_axis, &SweepOptions::default())
}

/// Absorption grid with δ_c = δ and δ_A = −δ on each row.
pub fn detuning_map_with(
    params: &SystemParams,
    dp_axis: &[f64],
    d_axis: &[f64],
    opts: &SweepOptions,
) -> Result<Map2D, SpectraError> {
    validate_axis(dp_axis)?;
    validate_axis(d_axis)?;
    params.validate()?;
    let points: Vec<_> = d_axis
        .iter()
        .flat_map(|&d| {
            dp_axis.iter().map(move |&dp| {
                (Some(d), SystemParams { delta_c: d, delta_a: -d, delta_p: dp, ..*params })
            })
        })
        .collect();
    let states = solve_points(&points, opts)?;
    let max_residual = states.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let grid = states
        .chunks(dp_axis.len())
        .map(|row| row.iter().map(|(rho, _)| Column::ImRho24.extract(rho)).collect())
        .collect();
    Ok(Map2D { d_axis: d_axis.to_vec(), dp_axis: dp_axis.to_vec(), grid, max_residual })
}

/// Probe sweep carrying the two-photon coherences plus the derived column
/// Re ρ₁₂ + Re ρ₁₃.
pub fn coherence_traces(params: &SystemParams, dp_axis: &[f64]) -> Result<SpectrumSeries, SpectraError> {
    coherence_traces_with(params, dp_axis, &SweepOptions::default())
}

pub fn coherence_traces_with(
    params: &SystemParams,
    dp_axis: &[f64],
    opts: &SweepOptions,
) -> Result<SpectrumSeries, SpectraError> {
    let mut series = probe_sweep_with(params, dp_axis, opts)?;
    let sum = series
        .column(Column::ReRho12)
        .iter()
        .zip(series.column(Column::ReRho13))
        .map(|(a, b)| a + b)
        .collect();
    series.push_extra(RE_RHO12_PLUS_RE_RHO13, sum)?;
    Ok(series)
}

/// Which tripod leg a Λ sub-model keeps besides the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaLeg {
    /// |1⟩ with Ω_c and δ_c.
    Coupling,
    /// |3⟩ with Ω_A and δ_A, mapped onto the |1⟩ slot.
    Control,
}

/// Λ model built from one leg of a tripod. The other leg's field is off and
/// its decay branch is redistributed, so the unused ground level is isolated.
pub fn lambda_leg(tripod: &SystemParams, leg: LambdaLeg) -> SystemParams {
    match leg {
        LambdaLeg::Coupling => tripod.lambda_reference(),
        LambdaLeg::Control => {
            let d = tripod.decay;
            let mirrored = SystemParams {
                omega_c: tripod.omega_a,
                omega_a: tripod.omega_c,
                delta_c: tripod.delta_a,
                delta_a: tripod.delta_c,
                decay: DecayModel {
                    branching: [d.branching[2], d.branching[1], d.branching[0]],
                    gamma_opt: [d.gamma_opt[2], d.gamma_opt[1], d.gamma_opt[0]],
                    ..d
                },
                ..*tripod
            };
            mirrored.lambda_reference()
        }
    }
}

/// Tripod spectrum next to the two independently detuned Λ models it
/// would decompose into, and their average.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// A: the tripod.
    pub tripod: SpectrumSeries,
    /// B: Λ with the coupling leg at δ_c.
    pub lambda_coupling: SpectrumSeries,
    /// C: Λ with the control leg at δ_A.
    pub lambda_control: SpectrumSeries,
    /// Pointwise mean of B and C.
    pub average: SpectrumSeries,
}

pub fn decomposition_compare(
    tripod: &SystemParams,
    dp_axis: &[f64],
) -> Result<Decomposition, SpectraError> {
    decomposition_compare_with(tripod, dp_axis, &SweepOptions::default())
}

pub fn decomposition_compare_with(
    tripod: &SystemParams,
    dp_axis: &[f64],
    opts: &SweepOptions,
) -> Result<Decomposition, SpectraError> {
    check_balanced(tripod)?;
    if tripod.delta_c == 0.0 {
        return Err(SpectraError::Precondition(
            "decomposition needs nonzero detuning (delta_c = -delta_a != 0)".into(),
        ));
    }
    let a = probe_sweep_with(tripod, dp_axis, opts)?;
    let b = probe_sweep_with(&lambda_leg(tripod, LambdaLeg::Coupling), dp_axis, opts)?;
    let c = probe_sweep_with(&lambda_leg(tripod, LambdaLeg::Control), dp_axis, opts)?;
    let average = b.mean_with(&c)?;
    Ok(Decomposition { tripod: a, lambda_coupling: b, lambda_control: c, average })
}

fn check_balanced(p: &SystemParams) -> Result<(), SpectraError> {
    let scale = p.delta_c.abs().max(p.delta_a.abs()).max(1.0);
    if (p.delta_c + p.delta_a).abs() > 1e-9 * scale {
        return Err(SpectraError::Precondition(format!(
            "expected delta_c = -delta_a, got delta_c = {}, delta_a = {}",
            p.delta_c, p.delta_a
        )));
    }
    Ok(())
}

/// Absorption with the control on (at the central bright feature) over the
/// absorption of the Λ reference at line center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingContrast {
    /// on/off, or +∞ when the off value is below 1e-15.
    pub ratio: f64,
    pub on: f64,
    pub off: f64,
    /// δ_p where `on` was evaluated.
    pub position: f64,
    /// True when the division guard produced the ∞ sentinel.
    pub guarded: bool,
}

const CONTRAST_FLOOR: f64 = 1e-15;
const CENTRAL_SEARCH_POINTS: usize = 201;

pub fn switching_contrast(params: &SystemParams) -> Result<SwitchingContrast, SpectraError> {
    switching_contrast_with(params, &SweepOptions::default())
}

/// With Ω_A = 0 both branches are the same Λ system evaluated at line
/// center, so the ratio is exactly 1.
pub fn switching_contrast_with(
    params: &SystemParams,
    opts: &SweepOptions,
) -> Result<SwitchingContrast, SpectraError> {
    check_balanced(params)?;
    params.validate()?;
    let off_params = params.lambda_reference();
    let absorption_at = |p: &SystemParams, dp: f64| -> Result<f64, SpectraError> {
        let p = SystemParams { delta_p: dp, ..*p };
        solve_steady_state(&p, opts.reduction)
            .map(|s| Column::ImRho24.extract(&s.rho))
            .map_err(|source| SpectraError::Sweep { delta: Some(params.delta_c), delta_p: dp, source })
    };
    let off = absorption_at(&off_params, 0.0)?;

    let (on_params, position) = if params.omega_a == 0.0 {
        (off_params, 0.0)
    } else {
        (*params, central_feature_position(params, opts)?)
    };
    let on = absorption_at(&on_params, position)?;
    let guarded = off.abs() < CONTRAST_FLOOR;
    let ratio = if guarded { f64::INFINITY } else { on / off };
    Ok(SwitchingContrast { ratio, on, off, position, guarded })
}

/// Position of the bright feature between the two dark resonances at δ_c
/// and δ_A, or 0 when the resonances coincide or no maximum lies between.
pub fn central_feature_position(params: &SystemParams, opts: &SweepOptions) -> Result<f64, SpectraError> {
    let lo = params.delta_c.min(params.delta_a);
    let hi = params.delta_c.max(params.delta_a);
    if hi - lo <= 0.0 {
        return Ok(0.0);
    }
    let pad = 0.02 * (hi - lo);
    let axis = linspace(lo + pad, hi - pad, CENTRAL_SEARCH_POINTS);
    let series = probe_sweep_with(params, &axis, opts)?;
    let best = match find_features(&series) {
        Ok(features) => features
            .into_iter()
            .filter(|f| f.kind == FeatureKind::Bright)
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .map(|f| f.position),
        Err(SpectraError::NoFeatures) => None,
        Err(e) => return Err(e),
    };
    Ok(best.unwrap_or(0.0))
}

/// Peak absorption of the bare probe transition: coupling and control off,
/// |4⟩ decaying only into |2⟩, probe on resonance.
pub fn two_level_peak(params: &SystemParams) -> Result<f64, SpectraError> {
    let p = SystemParams {
        omega_c: 0.0,
        omega_a: 0.0,
        delta_p: 0.0,
        decay: DecayModel { branching: [0.0, 1.0, 0.0], ground_mix: 0.0, ..params.decay },
        ..*params
    };
    let s = solve_steady_state(&p, Reduction::ExcludeIsolated)?;
    Ok(Column::ImRho24.extract(&s.rho))
}

/// Vertex of the parabola through three points, if it lies between the
/// outer two.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    // Newton form: y0 + d1 (x − x0) + a (x − x0)(x − x1)
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * a);
    if xv < x[0] || xv > x[2] {
        return None;
    }
    let yv = y[0] + d1 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Full width at half prominence of the maximum at index `i`.
fn fwhm_at(x: &[f64], y: &[f64], i: usize, peak: f64) -> f64 {
    let mut l = i;
    while l > 0 && y[l - 1] < y[l] {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < y.len() && y[r + 1] < y[r] {
        r += 1;
    }
    let base = y[l].max(y[r]);
    let half = 0.5 * (peak + base);

    let mut a = i;
    while a > l && y[a - 1] > half {
        a -= 1;
    }
    let left = if a > l || y[l] <= half {
        let a0 = a.saturating_sub(1).max(l);
        if a0 == a { x[a] } else { crossing(x[a0], y[a0], x[a], y[a], half) }
    } else {
        x[l]
    };
    let mut b = i;
    while b < r && y[b + 1] > half {
        b += 1;
    }
    let right = if b < r { crossing(x[b], y[b], x[b + 1], y[b + 1], half) } else { x[r] };
    right - left
}

/// Local extrema of the absorption column, with quadratic sub-grid
/// refinement and half-prominence widths for the maxima.
pub fn find_features(series: &SpectrumSeries) -> Result<Vec<SpectralFeature>, SpectraError> {
    let x = series.axis();
    let y = series.absorption();
    if y.len() < 5 {
        return Err(SpectraError::TooShort(y.len()));
    }
    let mut out = Vec::new();
    for i in 1..y.len() - 1 {
        let kind = if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            FeatureKind::Bright
        } else if y[i] < y[i - 1] && y[i] <= y[i + 1] {
            FeatureKind::Dark
        } else {
            continue;
        };
        let (position, value) = parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]])
            .unwrap_or((x[i], y[i]));
        let fwhm = (kind == FeatureKind::Bright).then(|| fwhm_at(x, y, i, value));
        out.push(SpectralFeature { kind, position, value, fwhm });
    }
    if out.is_empty() {
        return Err(SpectraError::NoFeatures);
    }
    Ok(out)
}
