use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::DriveSpec;
use crate::error::{Error, Result};
use crate::landscape::CouplingLandscape;

/// Secular decay rates of the dressed qubit.
///
/// `rate_minus` drives `|−⟩ → |+⟩` with emission at `ω_d − Ω_R`,
/// `rate_plus` drives `|+⟩ → |−⟩` with emission at `ω_d + Ω_R`, and
/// `rate_phi` dephases the dressed basis through the carrier at `ω_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedRates {
    pub rate_minus: f64,
    pub rate_plus: f64,
    pub rate_phi: f64,
    pub mixing_theta: f64,
}

impl DressedRates {
    /// Weight the spectrum samples `γ(ω_d − Ω_R)`, `γ(ω_d)`, `γ(ω_d + Ω_R)`
    /// with the dressed matrix elements of `σ_−`.
    pub fn from_spectrum<F>(drive: &DriveSpec, mut spectrum: F) -> Result<Self>
    where
        F: FnMut(&'static str, f64) -> Result<f64>,
    {
        let theta = drive.mixing_angle();
        let omega_r = drive.generalized_rabi();
        let wd = drive.drive_omega();
        let c2 = (0.5 * theta).cos().powi(2);
        let s2 = (0.5 * theta).sin().powi(2);
        let g_lower = spectrum("lower sideband", wd - omega_r)?;
        let g_carrier = spectrum("carrier", wd)?;
        let g_upper = spectrum("upper sideband", wd + omega_r)?;
        for (what, g) in [("lower sideband", g_lower), ("carrier", g_carrier), ("upper sideband", g_upper)] {
            if !(g >= 0.0) {
                return Err(Error::Domain(format!("negative bath rate {g:e} at the {what}")));
            }
        }
        Ok(Self {
            rate_minus: g_lower * c2 * c2,
            rate_plus: g_upper * s2 * s2,
            rate_phi: g_carrier * theta.sin().powi(2) / 4.0,
            mixing_theta: theta,
        })
    }

    pub fn total(&self) -> f64 {
        self.rate_minus + self.rate_plus + self.rate_phi
    }

    /// Steady dressed-population imbalance `P₊ − P₋` of the secular rate
    /// equations.
    pub fn population_imbalance(&self) -> Option<f64> {
        let s = self.rate_minus + self.rate_plus;
        (s > 0.0).then(|| (self.rate_minus - self.rate_plus) / s)
    }
}

pub fn dressed_rates(drive: &DriveSpec, land: &CouplingLandscape) -> Result<DressedRates> {
    DressedRates::from_spectrum(drive, |what, w| {
        land.check_band(what, w)?;
        land.gamma_eff(w)
    })
}

/// Dressed eigenbasis in lab coordinates (index 0 = `|e⟩`):
/// `|+⟩ = sin(θ/2)|e⟩ + cos(θ/2)|g⟩`, `|−⟩ = cos(θ/2)|e⟩ − sin(θ/2)|g⟩`.
#[derive(Debug, Clone, Copy)]
pub struct DressedBasis {
    pub plus: Vector2<C64>,
    pub minus: Vector2<C64>,
}

impl DressedBasis {
    pub fn new(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self {
            plus: Vector2::new(C64::new(s, 0.0), C64::new(c, 0.0)),
            minus: Vector2::new(C64::new(c, 0.0), C64::new(-s, 0.0)),
        }
    }

    /// `|+⟩⟨−|`
    pub fn raise(&self) -> Matrix2<C64> {
        self.plus * self.minus.adjoint()
    }

    /// `|−⟩⟨+|`
    pub fn lower(&self) -> Matrix2<C64> {
        self.minus * self.plus.adjoint()
    }

    /// `|+⟩⟨+| − |−⟩⟨−|`
    pub fn sigma_z(&self) -> Matrix2<C64> {
        self.plus * self.plus.adjoint() - self.minus * self.minus.adjoint()
    }

    pub fn populations(&self, rho: &Matrix2<C64>) -> (f64, f64) {
        let p = (self.plus.adjoint() * rho * self.plus)[(0, 0)].re;
        let m = (self.minus.adjoint() * rho * self.minus)[(0, 0)].re;
        (p, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{IdtModel, IntrinsicLossLine};
    use crate::units::{ghz, mhz};

    fn drive(rabi_mhz: f64, delta_mhz: f64) -> DriveSpec {
        DriveSpec::new(mhz(rabi_mhz), mhz(delta_mhz), 3.8e-6, ghz(4.891)).unwrap()
    }

    #[test]
    fn resonant_weights_are_equal() {
        let d = drive(2.0, 0.0);
        let r = DressedRates::from_spectrum(&d, |_, _| Ok(1.0)).unwrap();
        assert!((r.mixing_theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        for w in [r.rate_minus, r.rate_plus, r.rate_phi] {
            assert!((w - 0.25).abs() < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn flat_landscape_balanced() {
        let band = (ghz(4.0), ghz(6.0));
        let l = CouplingLandscape::flat(mhz(1.0), mhz(0.07), band, 125e-9).unwrap();
        let r = dressed_rates(&drive(5.0, 0.0), &l).unwrap();
        assert!((r.rate_plus - r.rate_minus).abs() < 1e-12 * r.rate_plus);
    }

    #[test]
    fn sigma_minus_decomposes_into_channels() {
        // σ₋ = cos²(θ/2)|+⟩⟨−| − sin²(θ/2)|−⟩⟨+| + (sin θ/2)(|+⟩⟨+| − |−⟩⟨−|)
        for theta in [0.0, 0.3, 1.2, std::f64::consts::FRAC_PI_2, 2.5, std::f64::consts::PI] {
            let b = DressedBasis::new(theta);
            let c2 = (0.5f64 * theta).cos().powi(2);
            let s2 = (0.5f64 * theta).sin().powi(2);
            let m = b.raise() * C64::new(c2, 0.0) - b.lower() * C64::new(s2, 0.0) + b.sigma_z() * C64::new(theta.sin() / 2.0, 0.0);
            let sm = Matrix2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            assert!((m - sm).norm() < 1e-15, "theta {theta}");
        }
    }

    #[test]
    fn dressed_states_diagonalize_hamiltonian() {
        let d = drive(3.0, -4.0);
        let b = DressedBasis::new(d.mixing_angle());
        let h = Matrix2::new(
            C64::new(-d.detuning / 2.0, 0.0),
            C64::new(d.rabi / 2.0, 0.0),
            C64::new(d.rabi / 2.0, 0.0),
            C64::new(d.detuning / 2.0, 0.0),
        );
        let half = d.generalized_rabi() / 2.0;
        assert!((h * b.plus - b.plus * C64::new(half, 0.0)).norm() < 1e-9 * half);
        assert!((h * b.minus + b.minus * C64::new(half, 0.0)).norm() < 1e-9 * half);
    }

    #[test]
    fn sideband_ratio_has_landscape_period() {
        let t = 125e-9;
        let band = (ghz(4.0), ghz(6.0));
        let idt = IdtModel::flat(mhz(0.6), ghz(4.9)).unwrap();
        let l = CouplingLandscape::new(idt, IntrinsicLossLine::flat(mhz(0.07), band).unwrap(), 0.78, t).unwrap();
        let ratio = |rabi_mhz: f64| {
            let r = dressed_rates(&drive(rabi_mhz, 0.0), &l).unwrap();
            r.rate_plus / r.rate_minus
        };
        let period = 1e-6 / t; // MHz
        assert!((period - 8.0).abs() < 1e-12);
        for o in [1.0, 2.5, 3.3, 6.0] {
            assert!((ratio(o) - ratio(o + period)).abs() < 1e-9, "{o}");
        }
        // and it actually oscillates
        assert!((ratio(1.0) - ratio(3.0)).abs() > 0.1);
    }

    #[test]
    fn out_of_band_sideband_named() {
        let l = CouplingLandscape::device_default();
        let d = DriveSpec::new(mhz(3000.0), 0.0, 1e-6, ghz(4.89)).unwrap();
        let err = dressed_rates(&d, &l).unwrap_err();
        assert!(err.to_string().contains("upper sideband"), "{err}");
    }
}
