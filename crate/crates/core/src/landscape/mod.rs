//! Frequency-dependent coupling of the giant atom to the phononic continuum.
//!
//! The effective decay rate is
//!
//! ```text
//! γ_e(ω) = γ_in(ω) + γ(ω)·[1 + β·cos(ωT)]
//! ```
//!
//! where `γ(ω)` is the single-transducer emission rate (a sinc² response in
//! the finger-pair count), `γ_in(ω)` a linear intrinsic-loss line, `β` the
//! amplitude transmittance between coupling points and `T` the delay.

mod fit;

pub use fit::{fit_landscape, FitOptions, FitParam, FitReport, RateContribution};

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Keys of the flat landscape config section, in canonical order.
pub const CONFIG_KEYS: [&str; 9] = [
    "gamma_peak_mhz",
    "omega_center_ghz",
    "n_pairs",
    "beta",
    "delay_t_ns",
    "gamma_in_c0_mhz",
    "gamma_in_slope",
    "band_lo_ghz",
    "band_hi_ghz",
];

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Interdigital transducer response: peak extra decay rate at the center
/// frequency, falling off as sinc² with a width set by the finger pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdtModel {
    pub gamma_peak: f64,
    pub omega_center: f64,
    pub n_pairs: u32,
}

impl IdtModel {
    pub fn new(gamma_peak: f64, omega_center: f64, n_pairs: u32) -> Result<Self> {
        if !(gamma_peak >= 0.0) || !gamma_peak.is_finite() {
            return Err(Error::Validation(format!("gamma_peak must be >= 0, got {gamma_peak}")));
        }
        if !(omega_center > 0.0) || !omega_center.is_finite() {
            return Err(Error::Validation(format!("omega_center must be > 0, got {omega_center}")));
        }
        if n_pairs == 0 {
            return Err(Error::Validation("n_pairs must be >= 1".into()));
        }
        Ok(Self { gamma_peak, omega_center, n_pairs })
    }

    /// Frequency-independent reference response. Represented as the
    /// zero-finger-pair limit of the sinc² model, which is exactly flat.
    pub fn flat(gamma: f64, omega_center: f64) -> Result<Self> {
        let m = Self::new(gamma, omega_center, 1)?;
        Ok(Self { n_pairs: 0, ..m })
    }

    /// Normalized sinc² shape, 1 at the center frequency.
    fn shape(&self, omega: f64) -> f64 {
        let x = self.n_pairs as f64 * PI * (omega - self.omega_center) / self.omega_center;
        let s = sinc(x);
        s * s
    }

    /// Single-transducer emission rate `γ(ω)`.
    pub fn gamma_idt(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("gamma_idt needs omega > 0, got {omega}")));
        }
        Ok(self.gamma_peak * self.shape(omega))
    }
}

/// Intrinsic loss `γ_in(ω) = c0 + c1·ω`, valid on a declared band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicLossLine {
    pub c0: f64,
    pub c1: f64,
    pub band: (f64, f64),
}

impl IntrinsicLossLine {
    pub fn new(c0: f64, c1: f64, band: (f64, f64)) -> Result<Self> {
        let (lo, hi) = band;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Validation(format!("invalid validity band [{lo}, {hi}]")));
        }
        let line = Self { c0, c1, band };
        // linear, so both ends suffice
        for w in [lo, hi] {
            let g = line.rate(w);
            if g < 0.0 {
                return Err(Error::Validation(format!(
                    "intrinsic loss is negative ({g:.3e} rad/s) at {w:.6e} rad/s inside the band"
                )));
            }
        }
        Ok(line)
    }

    pub fn flat(gamma_in: f64, band: (f64, f64)) -> Result<Self> {
        Self::new(gamma_in, 0.0, band)
    }

    pub fn rate(&self, omega: f64) -> f64 {
        self.c0 + self.c1 * omega
    }
}

/// The full `γ_e(ω)` model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingLandscape {
    pub idt: IdtModel,
    pub loss: IntrinsicLossLine,
    pub beta: f64,
    pub delay: f64,
}

impl CouplingLandscape {
    pub fn new(idt: IdtModel, loss: IntrinsicLossLine, beta: f64, delay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Validation(format!("beta out of [0,1]: {beta}")));
        }
        if !(delay > 0.0) || !delay.is_finite() {
            return Err(Error::Validation(format!("delay_T must be > 0, got {delay}")));
        }
        Ok(Self { idt, loss, beta, delay })
    }

    /// Landscape calibrated to the device anchors: `T = 125 ns`, `β = 0.78`,
    /// `γ_in/2π ≈ 0.07 MHz` near 4.9 GHz, `γ_e/2π = 1.11 MHz` at the 4.912 GHz
    /// interference maximum and 27.2 kHz at 1.526 GHz.
    pub fn device_default() -> Self {
        Self::from_config_values(&DEFAULT_CONFIG).expect("default landscape is valid")
    }

    /// Flat spectrum: `γ_e(ω) = γ_in + γ` everywhere in the band.
    pub fn flat(gamma: f64, gamma_in: f64, band: (f64, f64), delay: f64) -> Result<Self> {
        let idt = IdtModel::flat(gamma, 0.5 * (band.0 + band.1))?;
        Self::new(idt, IntrinsicLossLine::flat(gamma_in, band)?, 0.0, delay)
    }

    pub fn band(&self) -> (f64, f64) {
        self.loss.band
    }

    pub fn check_band(&self, what: &'static str, omega: f64) -> Result<()> {
        let (lo, hi) = self.band();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::OutOfBand { what, value: omega, lo, hi });
        }
        Ok(())
    }

    pub fn gamma_in(&self, omega: f64) -> Result<f64> {
        self.check_band("omega", omega)?;
        Ok(self.loss.rate(omega))
    }

    pub fn gamma_idt(&self, omega: f64) -> Result<f64> {
        self.check_band("omega", omega)?;
        self.idt.gamma_idt(omega)
    }

    /// `cos(ωT)` with the phase reduced in extended precision.
    pub fn interference(&self, omega: f64) -> f64 {
        phase_mod(omega, self.delay).cos()
    }

    pub fn gamma_eff(&self, omega: f64) -> Result<f64> {
        self.check_band("omega", omega)?;
        let g = self.idt.gamma_idt(omega)?;
        Ok(self.loss.rate(omega) + g * (1.0 + self.beta * self.interference(omega)))
    }

    /// Lower and upper interference envelopes `γ_in + γ(1 ∓ β)`.
    pub fn envelopes(&self, omega: f64) -> Result<(f64, f64)> {
        self.check_band("omega", omega)?;
        let g = self.idt.gamma_idt(omega)?;
        let gin = self.loss.rate(omega);
        Ok((gin + g * (1.0 - self.beta), gin + g * (1.0 + self.beta)))
    }

    pub fn purcell_factor(&self, omega_on: f64, omega_off: f64) -> Result<f64> {
        let on = self.gamma_eff(omega_on)?;
        let off = self.gamma_eff(omega_off)?;
        if off <= 0.0 {
            return Err(Error::Degenerate(format!(
                "gamma_eff vanishes at omega_off = {omega_off:.6e} rad/s"
            )));
        }
        Ok(on / off)
    }

    /// Modulation period of `γ_e` in angular frequency, `2π/T`.
    pub fn modulation_period(&self) -> f64 {
        TAU / self.delay
    }

    /// Decomposition of `γ_e(ω)` into its three terms.
    pub fn contributions(&self, omega: f64) -> Result<RateContribution> {
        self.check_band("omega", omega)?;
        let g = self.idt.gamma_idt(omega)?;
        Ok(RateContribution {
            omega,
            gamma_in: self.loss.rate(omega),
            gamma_idt: g,
            interference: g * self.beta * self.interference(omega),
        })
    }

    pub fn to_config_values(&self) -> BTreeMap<&'static str, f64> {
        let mut m = BTreeMap::new();
        m.insert("gamma_peak_mhz", units::to_mhz(self.idt.gamma_peak));
        m.insert("omega_center_ghz", units::to_ghz(self.idt.omega_center));
        m.insert("n_pairs", self.idt.n_pairs as f64);
        m.insert("beta", self.beta);
        m.insert("delay_t_ns", units::to_ns(self.delay));
        m.insert("gamma_in_c0_mhz", units::to_mhz(self.loss.c0));
        m.insert("gamma_in_slope", self.loss.c1);
        m.insert("band_lo_ghz", units::to_ghz(self.loss.band.0));
        m.insert("band_hi_ghz", units::to_ghz(self.loss.band.1));
        m
    }

    /// Build from the flat key-value section; missing keys fall back to
    /// the device defaults, unknown keys are rejected.
    pub fn from_config_values<K: AsRef<str>>(values: &[(K, f64)]) -> Result<Self> {
        let mut v: BTreeMap<&str, f64> = DEFAULT_CONFIG.iter().copied().collect();
        for (k, x) in values {
            let k = k.as_ref();
            match CONFIG_KEYS.iter().find(|c| **c == k) {
                Some(c) => {
                    v.insert(c, *x);
                }
                None => return Err(Error::Config(format!("unknown landscape key '{k}'"))),
            }
        }
        let n_pairs = v["n_pairs"];
        if n_pairs.fract() != 0.0 || n_pairs < 1.0 {
            return Err(Error::Validation(format!("n_pairs must be a positive integer, got {n_pairs}")));
        }
        let idt = IdtModel::new(units::mhz(v["gamma_peak_mhz"]), units::ghz(v["omega_center_ghz"]), n_pairs as u32)?;
        let loss = IntrinsicLossLine::new(
            units::mhz(v["gamma_in_c0_mhz"]),
            v["gamma_in_slope"],
            (units::ghz(v["band_lo_ghz"]), units::ghz(v["band_hi_ghz"])),
        )?;
        Self::new(idt, loss, v["beta"], units::ns(v["delay_t_ns"]))
    }
}

pub const DEFAULT_CONFIG: [(&str, f64); 9] = [
    ("gamma_peak_mhz", 0.6),
    ("omega_center_ghz", 5.0),
    ("n_pairs", 5.0),
    ("beta", 0.78),
    ("delay_t_ns", 125.0),
    ("gamma_in_c0_mhz", 0.0007),
    ("gamma_in_slope", 1.41e-5),
    ("band_lo_ghz", 1.0),
    ("band_hi_ghz", 6.0),
];

const TAU_HI: f64 = 6.283_185_307_179_586;
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `ωT mod 2π` in `[0, 2π)`, computed from the exact product `ωT` and a
/// double-word representation of `2π` so that phases of `10⁴–10⁶` rad keep
/// full double precision.
pub fn phase_mod(omega: f64, delay: f64) -> f64 {
    let hi = omega * delay;
    let lo = omega.mul_add(delay, -hi);
    let k = (hi / TAU_HI).floor();
    let p = k * TAU_HI;
    let pe = k.mul_add(TAU_HI, -p);
    let mut r = ((hi - p) - pe) + (lo - k * TAU_LO);
    while r < 0.0 {
        r += TAU;
    }
    while r >= TAU {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, khz, mhz};

    fn land(beta: f64) -> CouplingLandscape {
        let mut l = CouplingLandscape::device_default();
        l.beta = beta;
        l
    }

    #[test]
    fn sinc_peak_and_first_null() {
        let idt = IdtModel::new(mhz(10.8), ghz(5.0), 5).unwrap();
        assert_eq!(idt.gamma_idt(ghz(5.0)).unwrap(), mhz(10.8));
        let null = idt.gamma_idt(ghz(5.0) * (1.0 + 1.0 / 5.0)).unwrap();
        assert!(null < 1e-20 * mhz(10.8), "{null}");
        assert!(idt.gamma_idt(0.0).is_err());
        assert!(idt.gamma_idt(-1.0).is_err());
    }

    #[test]
    fn sinc_symmetric_about_centre() {
        let idt = IdtModel::new(mhz(1.0), ghz(5.0), 5).unwrap();
        for d in [1e3, 1e7, 3e8, 2.1e9] {
            let a = idt.gamma_idt(ghz(5.0) + d).unwrap();
            let b = idt.gamma_idt(ghz(5.0) - d).unwrap();
            assert!((a - b).abs() <= 1e-12 * mhz(1.0), "{d}: {a} vs {b}");
        }
    }

    #[test]
    fn eq_values_at_destructive_phase() {
        // ωT ≡ π: γ_e = γ_in + γ(1-β)
        let t = 125e-9;
        let omega = (TAU * 600.0 + PI) / t;
        let idt = IdtModel::new(mhz(1.0), omega, 1).unwrap();
        let loss = IntrinsicLossLine::flat(mhz(0.07), (omega * 0.99, omega * 1.01)).unwrap();
        let l = CouplingLandscape::new(idt, loss, 0.78, t).unwrap();
        let g = l.gamma_eff(omega).unwrap();
        assert!((g - mhz(0.29)).abs() < 1e-9 * mhz(1.0), "{}", units::to_mhz(g));
        let (lo, hi) = l.envelopes(omega).unwrap();
        assert!((lo - mhz(0.29)).abs() < 1e-9 * mhz(1.0));
        assert!((hi - mhz(1.85)).abs() < 1e-9 * mhz(1.0));
    }

    #[test]
    fn beta_zero_and_one_envelopes() {
        let l0 = land(0.0);
        let w = ghz(4.9);
        let (lo, hi) = l0.envelopes(w).unwrap();
        assert_eq!(lo, hi);
        assert!((l0.gamma_eff(w).unwrap() - (l0.gamma_in(w).unwrap() + l0.gamma_idt(w).unwrap())).abs() < 1e-9);
        let l1 = land(1.0);
        let (lo, _) = l1.envelopes(w).unwrap();
        assert_eq!(lo, l1.gamma_in(w).unwrap());
    }

    #[test]
    fn out_of_band_names_band() {
        let l = land(0.78);
        let e = l.gamma_eff(ghz(7.0)).unwrap_err();
        assert!(matches!(e, Error::OutOfBand { .. }));
        assert!(e.to_string().contains("validity band"));
    }

    #[test]
    fn device_anchors() {
        let l = CouplingLandscape::device_default();
        let on = l.gamma_eff(ghz(4.912)).unwrap();
        let off = l.gamma_eff(ghz(1.526)).unwrap();
        assert!((units::to_mhz(on) - 1.11).abs() < 0.005, "{}", units::to_mhz(on));
        assert!((off - khz(27.2)).abs() < khz(0.2), "{}", units::to_mhz(off));
        let f = l.purcell_factor(ghz(4.912), ghz(1.526)).unwrap();
        assert!(f > 40.0, "{f}");
        assert_eq!(l.purcell_factor(ghz(4.9), ghz(4.9)).unwrap(), 1.0);
        let pf: f64 = 1.11e6 / 27.2e3;
        assert!((pf - 40.8).abs() < 0.05);
    }

    #[test]
    fn flat_landscape_is_flat() {
        let band = (ghz(4.0), ghz(5.0));
        let l = CouplingLandscape::flat(mhz(1.0), mhz(0.1), band, 125e-9).unwrap();
        for f in [4.0, 4.3, 4.89, 5.0] {
            let g = l.gamma_eff(ghz(f)).unwrap();
            assert!((g - mhz(1.1)).abs() < 1e-12 * mhz(1.1), "{f}: {g}");
        }
        assert_eq!(l.purcell_factor(ghz(4.1), ghz(4.9)).unwrap(), 1.0);
    }

    #[test]
    fn phase_examples() {
        let t = 125e-9;
        let p = phase_mod(mhz(8.0), t);
        assert!(p < 1e-12 || (TAU - p) < 1e-12, "{p}");
        assert!((phase_mod(mhz(4.0), t) - PI).abs() < 1e-12);
        let a = phase_mod(ghz(4.8887), t);
        let b = phase_mod(ghz(4.8894), t);
        let step = (b - a).rem_euclid(TAU);
        assert!((step - TAU * 0.0875).abs() < 1e-9);
        assert!((step / PI - (0.344 - 0.164)).abs() < 0.01);
    }

    #[test]
    fn config_roundtrip() {
        let l = CouplingLandscape::device_default();
        let vals: Vec<(&str, f64)> = l.to_config_values().into_iter().collect();
        let back = CouplingLandscape::from_config_values(&vals).unwrap();
        assert!((back.delay - l.delay).abs() < 1e-22);
        assert!((back.idt.gamma_peak - l.idt.gamma_peak).abs() < 1e-6);
        assert!(CouplingLandscape::from_config_values(&[("beta", 1.5)]).is_err());
        assert!(CouplingLandscape::from_config_values(&[("betta", 0.5)]).is_err());
    }
}
