//! Simulation of a giant atom: a two-level system coupled to a phononic
//! waveguide at two points separated by a propagation delay `T`.
//!
//! The crate is split along the physics:
//!
//! * [`landscape`]: frequency-dependent decay rate `γ_e(ω)` and its fit.
//! * [`relaxation`]: undriven non-Markovian decay, solved three ways.
//! * [`stateops`]: qubit density matrices, Bloch vectors, tomography.
//! * [`driven`]: dressed-state Lindblad dynamics and steady-state maps.
//! * [`config`] / [`sweep`]: run configuration, parameter sweeps, presets.
//!
//! All rates and frequencies are angular (rad/s) internally. The [`units`]
//! module converts at the boundary, where values are quoted as `ω/2π`.

pub mod config;
pub mod driven;
pub mod error;
pub mod landscape;
pub mod relaxation;
pub mod stateops;
pub mod sweep;
pub mod units;

pub use driven::{DressedRates, Dissipator, DriveSpec, MasterOptions};
pub use error::{Error, Result};
pub use landscape::{phase_mod, CouplingLandscape, IdtModel, IntrinsicLossLine};
pub use relaxation::{RateConvention, RelaxationParams, RelaxationTrace, SolverTag};
pub use config::RunConfig;
pub use stateops::{BlochVector, DensityMatrix2};
pub use sweep::{Axis, SweepGrid, SweepOutput};

pub use num_complex::Complex64 as C64;
