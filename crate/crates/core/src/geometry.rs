//! Stripe geometry, the length-to-detuning calibration and the catalog of
//! named figure scenarios.
//!
//! Lengthening a stripe red-shifts its resonance, which the atomic analog
//! reads as a negative detuning. Detunings produced by the calibration are
//! in units of Ω_c and are scaled to kHz when a layout is applied.
//!
//! Every preset field is tagged [`Provenance::Paper`] when the value is
//! stated for the figure it reproduces (directly or inherited from the Λ figure),
//! and [`Provenance::Default`] when it had to be chosen:
//!
//! | preset                 | paper | default |
//! |------------------------|-------|---------|
//! | fig1-lambda            | 7     | 7       |
//! | fig1d-detuned          | 7     | 7       |
//! | fig2-tripod            | 7     | 7       |
//! | fig3-row1              | 8     | 6       |
//! | fig3-row2              | 8     | 6       |
//! | fig3-row3              | 8     | 6       |
//! | fig3-row4              | 8     | 6       |
//! | fig3-row5              | 6     | 8       |
//! | fig4ab-decomposition   | 8     | 6       |
//! | fig4c-map              | 5     | 9       |
//! | fig4d-traces           | 7     | 7       |
//!
//! Branching ratios and sweep ranges are never stated, so they are always
//! defaults.

use std::fmt;

use thiserror::Error;

use crate::model::{DecayModel, SystemParams};
use crate::spectra::linspace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unknown preset '{0}' (see list-presets)")]
    UnknownPreset(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
}

/// Unit-cell dimensions of the stripe metamaterial, all in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripeLayout {
    pub a: f64,
    pub b: f64,
    /// Reference stripe length L.
    pub l: f64,
    pub d: f64,
    pub w: f64,
    pub s: f64,
    pub thickness: f64,
    /// Length of the coupling stripe pair.
    pub l1: f64,
    /// Length of the control stripe pair.
    pub l2: f64,
}

impl Default for StripeLayout {
    fn default() -> Self {
        StripeLayout {
            a: 60.0,
            b: 160.0,
            l: 118.0,
            d: 40.0,
            w: 30.0,
            s: 30.0,
            thickness: 20.0,
            l1: 118.0,
            l2: 118.0,
        }
    }
}

impl StripeLayout {
    /// Default cell with the two stripe pairs set to `l1` and `l2`.
    pub fn with_pairs(l1: f64, l2: f64) -> Self {
        StripeLayout { l1, l2, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let fields = [
            ("A", self.a),
            ("B", self.b),
            ("L", self.l),
            ("D", self.d),
            ("W", self.w),
            ("S", self.s),
            ("thickness", self.thickness),
            ("L1", self.l1),
            ("L2", self.l2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(GeometryError::InvalidLayout(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Piecewise-linear map from stripe length change ΔL (nm) to detuning in
/// units of Ω_c, extended linearly past the outer anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    anchors: Vec<(f64, f64)>,
}

impl Default for CalibrationTable {
    /// Measured anchors at −8, 0 and +4 nm plus their mirror images.
    fn default() -> Self {
        CalibrationTable {
            anchors: vec![(-8.0, 0.375), (-4.0, 0.3), (0.0, 0.0), (4.0, -0.3), (8.0, -0.375)],
        }
    }
}

impl CalibrationTable {
    /// Anchors must be strictly increasing in ΔL and strictly decreasing in
    /// detuning.
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if anchors.len() < 2 {
            return Err(GeometryError::InvalidCalibration("need at least two anchors".into()));
        }
        if anchors.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(GeometryError::InvalidCalibration("anchors must be finite".into()));
        }
        for w in anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(GeometryError::InvalidCalibration(
                    "anchor lengths must be strictly increasing".into(),
                ));
            }
            if w[1].1 >= w[0].1 {
                return Err(GeometryError::InvalidCalibration(
                    "detuning must strictly decrease with length".into(),
                ));
            }
        }
        Ok(CalibrationTable { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    /// Index of the anchor segment used for `v` along coordinate `key`.
    fn segment(&self, v: f64, key: impl Fn(&(f64, f64)) -> f64, increasing: bool) -> usize {
        let n = self.anchors.len();
        let inside = |a: f64| if increasing { v > a } else { v < a };
        (1..n - 1).take_while(|&i| inside(key(&self.anchors[i]))).count()
    }

    pub fn length_to_detuning(&self, dl_nm: f64) -> f64 {
        let i = self.segment(dl_nm, |a| a.0, true);
        let (x0, y0) = self.anchors[i];
        let (x1, y1) = self.anchors[i + 1];
        if dl_nm == x0 {
            return y0;
        }
        if dl_nm == x1 {
            return y1;
        }
        y0 + (dl_nm - x0) * (y1 - y0) / (x1 - x0)
    }

    /// Inverse of [`Self::length_to_detuning`] on the same segments.
    pub fn detuning_to_length(&self, detuning: f64) -> f64 {
        let i = self.segment(detuning, |a| a.1, false);
        let (x0, y0) = self.anchors[i];
        let (x1, y1) = self.anchors[i + 1];
        if detuning == y0 {
            return x0;
        }
        if detuning == y1 {
            return x1;
        }
        x0 + (detuning - y0) * (x1 - x0) / (y1 - y0)
    }
}

/// Detunings of the coupling and control legs implied by a layout:
/// δ_c from L1 − L and δ_A from L2 − L, both scaled by Ω_c of `base`.
pub fn layout_to_params(
    layout: &StripeLayout,
    base: &SystemParams,
    calib: &CalibrationTable,
) -> Result<SystemParams, GeometryError> {
    layout.validate()?;
    Ok(SystemParams {
        delta_c: calib.length_to_detuning(layout.l1 - layout.l) * base.omega_c,
        delta_a: calib.length_to_detuning(layout.l2 - layout.l) * base.omega_c,
        ..*base
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Stated in the figure or text the scenario reproduces.
    Paper,
    /// Not given there; chosen by this crate.
    Default,
    /// Set explicitly by a config file or command-line override.
    Config,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Paper => "paper",
            Provenance::Default => "default",
            Provenance::Config => "config",
        })
    }
}

/// Evenly spaced sweep axis in kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        AxisSpec { min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }
}

/// What a scenario is meant to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputKind {
    Spectrum,
    Map2D,
    Traces,
    Decomposition,
    Dressed,
    Contrast,
    Evolve,
}

/// Settings for a time-evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveSpec {
    pub t_end_ms: f64,
    /// Fixed RK4 step; `None` picks half the stability limit.
    pub dt_ms: Option<f64>,
    /// Initially populated level, 1-based.
    pub initial_level: usize,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        EvolveSpec { t_end_ms: 10.0, dt_ms: None, initial_level: 2 }
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub params: SystemParams,
    pub dp_axis: AxisSpec,
    /// δ axis of the detuning map (δ_c = δ, δ_A = −δ).
    pub d_axis: Option<AxisSpec>,
    pub evolve: EvolveSpec,
    pub outputs: Vec<OutputKind>,
    pub layout: Option<StripeLayout>,
    /// Origin of each parameter, keyed by its config name.
    pub provenance: Vec<(String, Provenance)>,
}

impl Scenario {
    pub fn provenance_of(&self, key: &str) -> Option<Provenance> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, p)| *p)
    }

    pub fn count(&self, p: Provenance) -> usize {
        self.provenance.iter().filter(|(_, q)| *q == p).count()
    }

    /// Records `key` as coming from `p`, replacing any earlier tag.
    pub fn tag(&mut self, key: &str, p: Provenance) {
        match self.provenance.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = p,
            None => self.provenance.push((key.to_string(), p)),
        }
    }
}

/// The parameter keys every preset tags.
pub const PARAM_KEYS: [&str; 14] = [
    "rabi.omega_c_khz",
    "rabi.omega_p_khz",
    "rabi.omega_a_khz",
    "detuning.delta_c_khz",
    "detuning.delta_a_khz",
    "decay.gamma0_khz",
    "decay.gamma_opt_khz",
    "decay.gamma_ground_khz",
    "decay.ground_mix_khz",
    "decay.beta",
    "sweep.dp_axis",
    "sweep.d_axis",
    "geometry.l1_nm",
    "geometry.l2_nm",
];

const PRESETS: [&str; 11] = [
    "fig1-lambda",
    "fig1d-detuned",
    "fig2-tripod",
    "fig3-row1",
    "fig3-row2",
    "fig3-row3",
    "fig3-row4",
    "fig3-row5",
    "fig4ab-decomposition",
    "fig4c-map",
    "fig4d-traces",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESETS
}

/// Coupling Rabi frequency shared by all presets, kHz.
pub const OMEGA_C_KHZ: f64 = 10.0;

// Rates of the metamaterial figures in units of Ω_c.
const FIG1_GAMMA_OPT: f64 = 0.25;
const FIG1_GAMMA_GROUND: f64 = 0.125;
const FIG1_OMEGA_P: f64 = 0.05;

/// Ground dephasing for the presets whose caption gives only Γ₀ and γ₀; a
/// small positive value keeps the degenerate steady state unique.
pub const FIG4_GAMMA_GROUND_KHZ: f64 = 0.01;

fn fig1_decay(branching: [f64; 3]) -> DecayModel {
    let gamma_opt = FIG1_GAMMA_OPT * OMEGA_C_KHZ;
    let gamma_ground = FIG1_GAMMA_GROUND * OMEGA_C_KHZ;
    DecayModel {
        // Optical coherence = Γ₀/2 + ground dephasing.
        gamma_pop: 2.0 * (gamma_opt - gamma_ground),
        branching,
        gamma_opt: [gamma_opt; 3],
        gamma_ground,
        ground_mix: 0.0,
    }
}

fn fig4_decay() -> DecayModel {
    DecayModel::tripod(6.0, 30.0, FIG4_GAMMA_GROUND_KHZ)
}

fn probe_axis() -> AxisSpec {
    AxisSpec::new(-3.0 * OMEGA_C_KHZ, 3.0 * OMEGA_C_KHZ, 401)
}

struct Builder {
    scenario: Scenario,
}

impl Builder {
    fn new(name: &str, description: &str, params: SystemParams, outputs: &[OutputKind]) -> Self {
        Builder {
            scenario: Scenario {
                name: name.to_string(),
                description: description.to_string(),
                params,
                dp_axis: probe_axis(),
                d_axis: None,
                evolve: EvolveSpec::default(),
                outputs: outputs.to_vec(),
                layout: None,
                provenance: PARAM_KEYS.iter().map(|k| (k.to_string(), Provenance::Default)).collect(),
            },
        }
    }

    fn paper(mut self, keys: &[&str]) -> Self {
        for k in keys {
            debug_assert!(PARAM_KEYS.contains(k), "untracked key {k}");
            self.scenario.tag(k, Provenance::Paper);
        }
        self
    }

    fn layout(mut self, l1: f64, l2: f64) -> Self {
        self.scenario.layout = Some(StripeLayout::with_pairs(l1, l2));
        self
    }

    fn dp_axis(mut self, axis: AxisSpec) -> Self {
        self.scenario.dp_axis = axis;
        self
    }

    fn d_axis(mut self, axis: AxisSpec) -> Self {
        self.scenario.d_axis = Some(axis);
        self
    }

    fn build(self) -> Scenario {
        self.scenario
    }
}

fn fig1_params(delta_c: f64) -> SystemParams {
    SystemParams {
        omega_c: OMEGA_C_KHZ,
        omega_p: FIG1_OMEGA_P * OMEGA_C_KHZ,
        omega_a: 0.0,
        delta_c,
        delta_p: 0.0,
        delta_a: 0.0,
        decay: fig1_decay([0.5, 0.5, 0.0]),
    }
}

fn fig1_tripod(delta_c: f64, delta_a: f64) -> SystemParams {
    SystemParams {
        omega_a: OMEGA_C_KHZ,
        delta_a,
        decay: fig1_decay([1.0 / 3.0; 3]),
        ..fig1_params(delta_c)
    }
}

const FIG1_KEYS: [&str; 5] = [
    "rabi.omega_p_khz",
    "decay.gamma_opt_khz",
    "decay.gamma_ground_khz",
    "rabi.omega_a_khz",
    "detuning.delta_c_khz",
];

fn fig3_row(row: usize, l1: f64, l2: f64, delta_c: f64, delta_a: f64, paper_detunings: bool) -> Scenario {
    let name = format!("fig3-row{row}");
    let mut b = Builder::new(
        &name,
        &format!("tripod with L1 = {l1} nm, L2 = {l2} nm"),
        fig1_tripod(delta_c, delta_a),
        &[OutputKind::Spectrum],
    )
    .paper(&["rabi.omega_p_khz", "decay.gamma_opt_khz", "decay.gamma_ground_khz", "geometry.l1_nm", "geometry.l2_nm"])
    .layout(l1, l2);
    if paper_detunings {
        b = b.paper(&["detuning.delta_c_khz", "detuning.delta_a_khz"]);
    }
    b.paper(&["rabi.omega_a_khz"]).build()
}

/// Resolves a named figure scenario.
pub fn preset(name: &str) -> Result<Scenario, GeometryError> {
    let c = OMEGA_C_KHZ;
    let calib = CalibrationTable::default();
    let s = match name {
        "fig1-lambda" => Builder::new(
            name,
            "resonant Λ system: single transparency window",
            fig1_params(0.0),
            &[OutputKind::Spectrum, OutputKind::Dressed],
        )
        .paper(&FIG1_KEYS)
        .paper(&["geometry.l1_nm", "geometry.l2_nm"])
        .layout(118.0, 118.0)
        .build(),
        "fig1d-detuned" => Builder::new(
            name,
            "Λ system with the coupling stripe shortened by 8 nm",
            fig1_params(0.375 * c),
            &[OutputKind::Spectrum],
        )
        .paper(&FIG1_KEYS)
        .paper(&["geometry.l1_nm", "geometry.l2_nm"])
        .layout(110.0, 118.0)
        .build(),
        "fig2-tripod" => {
            // ΔL = 6 nm falls between anchors; δ_A = −δ_c is stated.
            let d = calib.length_to_detuning(-6.0) * c;
            Builder::new(
                name,
                "detuned tripod, stripe pairs changed by ∓6 nm",
                fig1_tripod(d, -d),
                &[OutputKind::Spectrum],
            )
            .paper(&["rabi.omega_p_khz", "decay.gamma_opt_khz", "decay.gamma_ground_khz", "rabi.omega_a_khz"])
            .paper(&["detuning.delta_a_khz", "geometry.l1_nm", "geometry.l2_nm"])
            .layout(112.0, 124.0)
            .build()
        }
        "fig3-row1" => fig3_row(1, 118.0, 118.0, 0.0, 0.0, true),
        "fig3-row2" => fig3_row(2, 118.0, 122.0, 0.0, -0.3 * c, true),
        "fig3-row3" => fig3_row(3, 114.0, 122.0, 0.3 * c, -0.3 * c, true),
        "fig3-row4" => fig3_row(4, 110.0, 126.0, 0.375 * c, -0.375 * c, true),
        "fig3-row5" => {
            let d = calib.length_to_detuning(-12.0) * c;
            fig3_row(5, 106.0, 130.0, d, -d, false)
        }
        "fig4ab-decomposition" => Builder::new(
            name,
            "tripod against the two detuned Λ systems it would split into",
            fig1_tripod(0.3 * c, -0.3 * c),
            &[OutputKind::Decomposition],
        )
        .paper(&["rabi.omega_p_khz", "decay.gamma_opt_khz", "decay.gamma_ground_khz", "rabi.omega_a_khz"])
        .paper(&["detuning.delta_c_khz", "detuning.delta_a_khz", "geometry.l1_nm", "geometry.l2_nm"])
        .layout(114.0, 122.0)
        .build(),
        "fig4c-map" => Builder::new(
            name,
            "probe absorption over probe and symmetric coupling/control detuning",
            fig4_params(0.0),
            &[OutputKind::Map2D, OutputKind::Dressed, OutputKind::Contrast],
        )
        .paper(&["rabi.omega_c_khz", "rabi.omega_p_khz", "rabi.omega_a_khz"])
        .paper(&["decay.gamma0_khz", "decay.gamma_opt_khz"])
        .dp_axis(AxisSpec::new(-3.0 * c, 3.0 * c, 301))
        .d_axis(AxisSpec::new(-c, c, 201))
        .build(),
        "fig4d-traces" => Builder::new(
            name,
            "two-photon coherences of the Λ reference and the tripod",
            fig4_params(2.0),
            &[OutputKind::Traces, OutputKind::Contrast],
        )
        .paper(&["rabi.omega_c_khz", "rabi.omega_p_khz", "rabi.omega_a_khz"])
        .paper(&["decay.gamma0_khz", "decay.gamma_opt_khz"])
        .paper(&["detuning.delta_c_khz", "detuning.delta_a_khz"])
        .build(),
        _ => return Err(GeometryError::UnknownPreset(name.to_string())),
    };
    Ok(s)
}

/// Built-in scenario used when no preset is named: the resonant tripod
/// with the map rates, every value tagged as a default.
pub fn default_scenario() -> Scenario {
    Builder::new(
        "default",
        "resonant tripod with built-in defaults",
        fig4_params(0.0),
        &[OutputKind::Spectrum],
    )
    .d_axis(AxisSpec::new(-OMEGA_C_KHZ, OMEGA_C_KHZ, 201))
    .build()
}

fn fig4_params(delta: f64) -> SystemParams {
    SystemParams {
        omega_c: OMEGA_C_KHZ,
        omega_p: 1.0,
        omega_a: OMEGA_C_KHZ,
        delta_c: delta,
        delta_p: 0.0,
        delta_a: -delta,
        decay: fig4_decay(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn anchors_are_exact() {
        let c = CalibrationTable::default();
        assert_eq!(c.length_to_detuning(-8.0), 0.375);
        assert_eq!(c.length_to_detuning(4.0), -0.3);
        assert_eq!(c.length_to_detuning(0.0), 0.0);
        assert_eq!(c.detuning_to_length(0.375), -8.0);
        assert_eq!(c.detuning_to_length(0.0), 0.0);
    }

    #[test]
    fn interpolation_and_extrapolation() {
        let c = CalibrationTable::default();
        assert_abs_diff_eq!(c.length_to_detuning(-6.0), 0.3375, epsilon = 1e-15);
        assert_abs_diff_eq!(c.length_to_detuning(2.0), -0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(c.length_to_detuning(12.0), -0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(c.length_to_detuning(-12.0), 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(c.detuning_to_length(-0.45), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn calibration_rejects_non_monotone_anchors() {
        assert!(CalibrationTable::new(vec![(0.0, 0.0)]).is_err());
        assert!(CalibrationTable::new(vec![(0.0, 0.0), (0.0, -1.0)]).is_err());
        assert!(CalibrationTable::new(vec![(0.0, 0.0), (1.0, 0.5)]).is_err());
        assert!(CalibrationTable::new(vec![(0.0, 0.0), (1.0, -0.5)]).is_ok());
    }

    #[test]
    fn layout_examples() {
        let base = preset("fig3-row1").unwrap().params;
        let calib = CalibrationTable::default();
        let p = layout_to_params(&StripeLayout::default(), &base, &calib).unwrap();
        assert_eq!((p.delta_c, p.delta_a), (0.0, 0.0));
        let p = layout_to_params(&StripeLayout::with_pairs(114.0, 122.0), &base, &calib).unwrap();
        assert_abs_diff_eq!(p.delta_c, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.delta_a, -3.0, epsilon = 1e-12);
        let p = layout_to_params(&StripeLayout::with_pairs(118.0, 122.0), &base, &calib).unwrap();
        assert_eq!(p.delta_c, 0.0);
        assert_abs_diff_eq!(p.delta_a, -3.0, epsilon = 1e-12);
        let bad = StripeLayout { w: 0.0, ..Default::default() };
        assert!(layout_to_params(&bad, &base, &calib).is_err());
    }

    #[test]
    fn preset_layouts_agree_with_calibration_where_the_paper_uses_it() {
        let calib = CalibrationTable::default();
        for name in ["fig1d-detuned", "fig2-tripod", "fig3-row2", "fig3-row3", "fig3-row4", "fig3-row5", "fig4ab-decomposition"] {
            let s = preset(name).unwrap();
            let p = layout_to_params(s.layout.as_ref().unwrap(), &s.params, &calib).unwrap();
            assert_abs_diff_eq!(p.delta_c, s.params.delta_c, epsilon = 1e-12);
            assert_abs_diff_eq!(p.delta_a, s.params.delta_a, epsilon = 1e-12);
        }
    }

    #[test]
    fn stated_preset_values() {
        let s = preset("fig1-lambda").unwrap();
        let p = s.params;
        assert_eq!(p.omega_p, p.omega_c / 20.0);
        assert_eq!(p.decay.gamma_opt[1], p.omega_c / 4.0);
        assert_eq!(p.decay.gamma_ground, p.omega_c / 8.0);
        assert_eq!((p.omega_a, p.delta_c), (0.0, 0.0));

        let p = preset("fig4c-map").unwrap().params;
        assert_eq!(p.decay.gamma_pop, 6.0);
        assert_eq!(p.decay.gamma_opt, [30.0; 3]);
        assert_eq!((p.omega_p, p.omega_c, p.omega_a), (1.0, 10.0, 10.0));

        let p = preset("fig4d-traces").unwrap().params;
        assert_eq!((p.delta_c, p.delta_a), (2.0, -2.0));
        assert_eq!(p.decay.gamma_pop, 6.0);
    }

    #[test]
    fn every_preset_is_valid_and_fully_tagged() {
        let expected_paper = [7, 7, 7, 8, 8, 8, 8, 6, 8, 5, 7];
        assert_eq!(preset_names().len(), expected_paper.len());
        for (name, paper) in preset_names().iter().zip(expected_paper) {
            let s = preset(name).unwrap();
            assert_eq!(&s.name, name);
            s.params.validate().unwrap();
            assert_eq!(s.provenance.len(), PARAM_KEYS.len(), "{name}");
            assert_eq!(s.count(Provenance::Paper), paper, "{name}");
            if let Some(l) = s.layout {
                l.validate().unwrap();
            }
        }
    }

    #[test]
    fn default_scenario_is_all_defaults() {
        let s = default_scenario();
        s.params.validate().unwrap();
        assert_eq!(s.count(Provenance::Default), PARAM_KEYS.len());
        assert!(s.d_axis.is_some());
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(preset("fig9"), Err(GeometryError::UnknownPreset("fig9".into())));
    }
}
