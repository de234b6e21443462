//! Undriven relaxation of the giant atom from its excited state.
//!
//! Three independent routes to the same population `P_e(t)`:
//!
//! * [`pe_series`]: closed-form sum over backflow orders `n ≤ ⌊t/T⌋`;
//! * [`dde_integrate`]: method of steps on the delay equation
//!   `ḃ = −(κ_in + κ)·b(t) − κβ·e^{iω_qT}·b(t−T)` (rotating frame);
//! * [`mode_oracle`]: brute-force single-excitation dynamics with a
//!   discretized waveguide continuum.
//!
//! # Rate convention
//!
//! The amplitude decays at `κ = γ/2` under [`RateConvention::AmplitudeHalfRates`]
//! (default), so the early-time population rate is `γ_in + γ` and the long-time
//! rate reduces to `γ_in + γ(1 + β cos ω_qT)` when `γT → 0`.
//! [`RateConvention::PopulationRates`] uses `κ = γ` as the amplitude rate
//! instead; every solver honours the same choice.

mod dde;
mod modes;
mod rate;
mod series;

pub use dde::{dde_integrate, DdeOutput};
pub use modes::{mode_oracle, ModeOracleConfig};
pub use rate::{effective_rate, RateFit};
pub use series::{amplitude_series, pe_series};

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{phase_mod, CouplingLandscape};
use crate::units::{fmt_f64, to_ns};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    #[default]
    AmplitudeHalfRates,
    PopulationRates,
}

impl RateConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "amplitude_half_rates" => Some(Self::AmplitudeHalfRates),
            "population_rates" => Some(Self::PopulationRates),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::AmplitudeHalfRates => "amplitude_half_rates",
            Self::PopulationRates => "population_rates",
        }
    }

    fn factor(self) -> f64 {
        match self {
            Self::AmplitudeHalfRates => 0.5,
            Self::PopulationRates => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationParams {
    pub omega_q: f64,
    pub gamma: f64,
    pub gamma_in: f64,
    pub beta: f64,
    pub delay: f64,
}

impl RelaxationParams {
    pub fn new(omega_q: f64, gamma: f64, gamma_in: f64, beta: f64, delay: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma_in >= 0.0) {
            return Err(Error::Validation(format!("rates must be >= 0 (gamma={gamma}, gamma_in={gamma_in})")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Validation(format!("beta out of [0,1]: {beta}")));
        }
        if !(delay > 0.0) {
            return Err(Error::Validation(format!("delay must be > 0, got {delay}")));
        }
        if !omega_q.is_finite() {
            return Err(Error::Validation("omega_q must be finite".into()));
        }
        Ok(Self { omega_q, gamma, gamma_in, beta, delay })
    }

    /// Parameters with a prescribed accumulated phase `ω_qT mod 2π`, using the
    /// carrier cycle nearest `omega_ref`.
    pub fn at_phase(phase: f64, omega_ref: f64, gamma: f64, gamma_in: f64, beta: f64, delay: f64) -> Result<Self> {
        let cycles = (omega_ref * delay / TAU).round();
        Self::new((cycles * TAU + phase) / delay, gamma, gamma_in, beta, delay)
    }

    /// Sample the landscape at `omega_q`.
    pub fn from_landscape(land: &CouplingLandscape, omega_q: f64) -> Result<Self> {
        Self::new(omega_q, land.gamma_idt(omega_q)?, land.gamma_in(omega_q)?, land.beta, land.delay)
    }

    /// Retardation parameter `γT`.
    pub fn retardation(&self) -> f64 {
        self.gamma * self.delay
    }

    pub fn phase(&self) -> f64 {
        phase_mod(self.omega_q, self.delay)
    }

    /// Amplitude rates `(κ, κ_in)` under `conv`.
    pub fn amplitude_rates(&self, conv: RateConvention) -> (f64, f64) {
        (self.gamma * conv.factor(), self.gamma_in * conv.factor())
    }

    /// Population decay rate before any backflow arrives.
    pub fn early_rate(&self, conv: RateConvention) -> f64 {
        let (k, kin) = self.amplitude_rates(conv);
        2.0 * (k + kin)
    }

    /// Markovian rate `γ_in + γ(1 + β cos ω_qT)`.
    pub fn markovian_rate(&self) -> f64 {
        self.gamma_in + self.gamma * (1.0 + self.beta * self.phase().cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Series,
    Dde,
    ModeOracle,
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverTag::Series => "series",
            SolverTag::Dde => "dde",
            SolverTag::ModeOracle => "mode_oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationTrace {
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub solver: SolverTag,
    /// Delay of the parameters that produced the trace.
    pub delay: f64,
}

pub const TRACE_CSV_HEADER: &str = "t_ns,pe,solver";

impl RelaxationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Maximum pointwise `|Δpe|` against another trace on the same grid.
    pub fn max_abs_diff(&self, other: &RelaxationTrace) -> f64 {
        assert_eq!(self.len(), other.len(), "traces are on different grids");
        self.pe.iter().zip(&other.pe).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Keep every `stride`-th sample, always retaining the first.
    pub fn decimate(&self, stride: usize) -> RelaxationTrace {
        let stride = stride.max(1);
        RelaxationTrace {
            times: self.times.iter().step_by(stride).copied().collect(),
            pe: self.pe.iter().step_by(stride).copied().collect(),
            solver: self.solver,
            delay: self.delay,
        }
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.times
            .iter()
            .zip(&self.pe)
            .map(move |(t, p)| format!("{},{},{}", fmt_f64(to_ns(*t)), fmt_f64(*p), self.solver))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time {t} at index {i} is negative")));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::Domain(format!("times must increase strictly (index {i})")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_is_fixed() {
        let tr = RelaxationTrace { times: vec![0.0, 1.25e-7], pe: vec![1.0, 0.5], solver: SolverTag::Dde, delay: 1.25e-7 };
        assert_eq!(
            tr.to_csv(),
            "t_ns,pe,solver\n0.0000000000000000e0,1.0000000000000000e0,dde\n1.2500000000000000e2,5.0000000000000000e-1,dde\n"
        );
    }

    #[test]
    fn at_phase_lands_on_phase() {
        for ph in [0.0, 0.164, 0.5, 1.0, 1.9] {
            let p = RelaxationParams::at_phase(ph * std::f64::consts::PI, crate::units::ghz(4.89), 1e6, 0.0, 0.5, 125e-9).unwrap();
            let got = p.phase();
            let d = (got - ph * std::f64::consts::PI).abs();
            assert!(d < 1e-9 || (TAU - d) < 1e-9, "{ph}: {got}");
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(RelaxationParams::new(1.0, -1.0, 0.0, 0.5, 1.0).is_err());
        assert!(RelaxationParams::new(1.0, 1.0, 0.0, 1.5, 1.0).is_err());
        assert!(RelaxationParams::new(1.0, 1.0, 0.0, 0.5, 0.0).is_err());
    }
}
