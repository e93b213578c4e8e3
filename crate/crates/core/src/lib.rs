//! Simulation of a four-level tripod atom driven by coupling, probe and
//! control fields, used as the atomic analog of plasmon-induced switching in
//! metal-stripe metamaterials.
//!
//! * [`model`]: Hamiltonian, master equation, steady states, RK4 evolution.
//! * [`dressed`]: dark/bright dressed states and eigen-analysis.
//! * [`spectra`]: probe sweeps, detuning maps, coherence traces, features.
//! * [`geometry`]: stripe-length calibration and the figure preset catalog.
//! * [`config`], [`output`], [`cli`]: configuration files, CSV/SVG output and
//!   the command-line driver.

pub mod cli;
pub mod config;
pub mod dressed;
pub mod geometry;
pub mod model;
pub mod output;
pub mod spectra;
