//! Shared fixtures for the solver benchmarks.

use giant_atom::driven::{dressed_rates, DressedRates, DriveSpec};
use giant_atom::units::{ghz, mhz};
use giant_atom::{CouplingLandscape, RelaxationParams};

/// Relaxation parameters with retardation `γT` at backflow phase `phase`.
pub fn relaxation_case(gamma_t: f64, phase: f64) -> RelaxationParams {
    let delay = 125e-9;
    let gamma = gamma_t / delay;
    RelaxationParams::at_phase(phase, ghz(4.9), gamma, mhz(0.07), 0.78, delay).expect("valid fixture")
}

/// Drive at 4.891 GHz with detuning −5 MHz on the reference landscape.
pub fn driven_case(rabi_mhz: f64) -> (DriveSpec, DressedRates, CouplingLandscape) {
    let land = CouplingLandscape::device_default();
    let d = DriveSpec::new(mhz(rabi_mhz), mhz(-5.0), 3.8e-6, ghz(4.891)).expect("valid drive");
    let r = dressed_rates(&d, &land).expect("in band");
    (d, r, land)
}

/// Linear grid in rad/s from `ω/2π` values in MHz.
pub fn mhz_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| mhz(start + (stop - start) * i as f64 / (n - 1) as f64)).collect()
}
