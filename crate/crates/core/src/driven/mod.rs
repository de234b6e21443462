//! Driven giant atom with frequency-dependent dissipation.
//!
//! In the frame rotating at the drive frequency `ω_d = ω_q + Δ` the qubit
//! Hamiltonian is `H = −(Δ/2)σ_z + (Ω/2)σ_x` (basis conventions in
//! [`crate::stateops`]). Its eigenstates are the dressed states `|±⟩`, split
//! by `Ω_R = √(Ω² + Δ²)`. The bath is sampled at the three Mollow frequencies
//! `ω_d − Ω_R`, `ω_d`, `ω_d + Ω_R`; see [`dressed_rates`].

mod dressed;
mod map;
mod master;

pub use dressed::{dressed_rates, DressedBasis, DressedRates};
pub use map::{map_coherence_purity, CoherenceMap, MapCell};
pub use master::{
    default_dt, evolve_sampled, lindblad_evolve, steady_state, Dissipator, MasterEquation, MasterOptions,
    Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Rabi frequency `Ω` (rad/s).
    pub rabi: f64,
    /// `Δ = ω_d − ω_q` (rad/s); positive means the drive sits above the qubit.
    pub detuning: f64,
    /// Drive duration (s).
    pub duration: f64,
    pub qubit_omega: f64,
}

impl DriveSpec {
    pub fn new(rabi: f64, detuning: f64, duration: f64, qubit_omega: f64) -> Result<Self> {
        if !(rabi >= 0.0) {
            return Err(Error::Validation(format!("rabi frequency must be >= 0, got {rabi}")));
        }
        if !(duration >= 0.0) {
            return Err(Error::Validation(format!("duration must be >= 0, got {duration}")));
        }
        if !detuning.is_finite() || !(qubit_omega > 0.0) {
            return Err(Error::Validation("detuning and qubit frequency must be finite, qubit > 0".into()));
        }
        Ok(Self { rabi, detuning, duration, qubit_omega })
    }

    pub fn drive_omega(&self) -> f64 {
        self.qubit_omega + self.detuning
    }

    pub fn generalized_rabi(&self) -> f64 {
        self.rabi.hypot(self.detuning)
    }

    /// `θ ∈ [0, π]` with `cos θ = Δ/Ω_R`, `sin θ = Ω/Ω_R`; 0 for an undriven,
    /// resonant qubit.
    pub fn mixing_angle(&self) -> f64 {
        if self.generalized_rabi() == 0.0 {
            0.0
        } else {
            self.rabi.atan2(self.detuning)
        }
    }
}

/// Resonant steady-state population `Ω²/(2Ω² + γ_e²)`.
pub fn steady_pe_resonant(rabi: f64, gamma_e: f64) -> Result<f64> {
    if rabi == 0.0 && gamma_e == 0.0 {
        return Err(Error::Degenerate("rabi and gamma_e are both zero".into()));
    }
    if rabi < 0.0 || gamma_e < 0.0 {
        return Err(Error::Domain("rabi and gamma_e must be >= 0".into()));
    }
    let o2 = rabi * rabi;
    Ok(o2 / (2.0 * o2 + gamma_e * gamma_e))
}

/// Whether `Ω ≤ γ_e/3`, the range where [`weak_drive_pe`] is meaningful.
pub fn weak_drive_valid(rabi: f64, gamma_e: f64) -> bool {
    3.0 * rabi <= gamma_e
}

/// Weak-drive population `Ω²/γ_e²`.
pub fn weak_drive_pe(rabi: f64, gamma_e: f64) -> Result<f64> {
    if !(gamma_e > 0.0) {
        return Err(Error::Domain(format!("weak_drive_pe needs gamma_e > 0, got {gamma_e}")));
    }
    if !weak_drive_valid(rabi, gamma_e) {
        log::warn!("weak-drive formula used outside Omega <= gamma_e/3 (ratio {:.3})", rabi / gamma_e);
    }
    Ok((rabi / gamma_e).powi(2))
}
