//! Single-qubit state algebra.
//!
//! # Conventions
//!
//! Every module in the crate uses this table.
//!
//! | item            | choice                                             |
//! |-----------------|----------------------------------------------------|
//! | basis index 0   | excited state `|e⟩`                                |
//! | basis index 1   | ground state `|g⟩`                                 |
//! | `σ_z`           | `|e⟩⟨e| − |g⟩⟨g|`, so `r_z = P_e − P_g`            |
//! | `σ_−`           | `|g⟩⟨e|`                                           |
//! | `r_x`           | `⟨σ_x⟩ = 2·Re ρ₀₁`                                  |
//! | `r_y`           | `⟨σ_y⟩ = −2·Im ρ₀₁`                                 |

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    pub rho00: C64,
    pub rho01: C64,
    pub rho10: C64,
    pub rho11: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let r = Self { rx, ry, rz };
        if r.norm_sqr() > 1.0 + TOL {
            return Err(Error::Validation(format!("Bloch vector length² {} exceeds 1", r.norm_sqr())));
        }
        Ok(r)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rx * self.rx + self.ry * self.ry + self.rz * self.rz
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl DensityMatrix2 {
    pub fn new(rho00: C64, rho01: C64, rho10: C64, rho11: C64) -> Result<Self> {
        let rho = Self { rho00, rho01, rho10, rho11 };
        rho.validate()?;
        Ok(rho)
    }

    pub fn excited() -> Self {
        Self::from_matrix(&Matrix2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)))
    }

    pub fn ground() -> Self {
        Self::from_matrix(&Matrix2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)))
    }

    pub fn maximally_mixed() -> Self {
        rho_from_bloch(BlochVector { rx: 0.0, ry: 0.0, rz: 0.0 })
    }

    pub fn from_matrix(m: &Matrix2<C64>) -> Self {
        Self { rho00: m[(0, 0)], rho01: m[(0, 1)], rho10: m[(1, 0)], rho11: m[(1, 1)] }
    }

    pub fn to_matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.rho00, self.rho01, self.rho10, self.rho11)
    }

    pub fn trace(&self) -> C64 {
        self.rho00 + self.rho11
    }

    /// Smaller eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.rho00.re;
        let d = self.rho11.re;
        let b = 0.5 * (self.rho01 + self.rho10.conj());
        0.5 * (a + d) - (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (self.rho10 - self.rho01.conj()).norm();
        if herm > TOL || self.rho00.im.abs() > TOL || self.rho11.im.abs() > TOL {
            return Err(Error::Validation(format!("density matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TOL {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let ev = self.min_eigenvalue();
        if ev < -TOL {
            return Err(Error::Validation(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }

    pub fn excited_population(&self) -> f64 {
        self.rho00.re
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector { rx: 2.0 * self.rho01.re, ry: -2.0 * self.rho01.im, rz: self.rho00.re - self.rho11.re }
    }

    pub fn purity(&self) -> f64 {
        let m = self.to_matrix();
        (m * m).trace().re
    }

    /// Hermitize, renormalize the trace and pull the Bloch vector back onto
    /// the unit ball. States already physical change only at rounding level.
    pub fn project_physical(&self) -> Self {
        let m = self.to_matrix();
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let tr = h.trace().re;
        let scaled = Self::from_matrix(&(h / C64::new(tr, 0.0)));
        let r = scaled.bloch();
        let n = r.norm();
        if n > 1.0 {
            rho_from_bloch(BlochVector { rx: r.rx / n, ry: r.ry / n, rz: r.rz / n })
        } else {
            scaled
        }
    }

    /// Real and imaginary parts of ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁.
    pub fn csv_fields(&self) -> [f64; 8] {
        [
            self.rho00.re,
            self.rho00.im,
            self.rho01.re,
            self.rho01.im,
            self.rho10.re,
            self.rho10.im,
            self.rho11.re,
            self.rho11.im,
        ]
    }

    pub fn from_csv_fields(f: &[f64; 8]) -> Result<Self> {
        Self::new(C64::new(f[0], f[1]), C64::new(f[2], f[3]), C64::new(f[4], f[5]), C64::new(f[6], f[7]))
    }
}

pub fn bloch_from_rho(rho: &DensityMatrix2) -> Result<BlochVector> {
    rho.validate()?;
    Ok(rho.bloch())
}

pub fn rho_from_bloch(r: BlochVector) -> DensityMatrix2 {
    DensityMatrix2 {
        rho00: C64::new(0.5 * (1.0 + r.rz), 0.0),
        rho01: C64::new(0.5 * r.rx, -0.5 * r.ry),
        rho10: C64::new(0.5 * r.rx, 0.5 * r.ry),
        rho11: C64::new(0.5 * (1.0 - r.rz), 0.0),
    }
}

pub fn purity(rho: &DensityMatrix2) -> f64 {
    rho.purity()
}

/// Linear-inversion estimate from simulated projective measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyEstimate {
    pub r: [f64; 3],
    pub std_err: [f64; 3],
    pub shots: u64,
}

impl TomographyEstimate {
    /// Purity of the linear-inversion estimate; can exceed 1 for few shots.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.r.iter().map(|x| x * x).sum::<f64>())
    }
}

/// Seeded generator shared by every sampling routine (xoshiro256++, with the
/// state expanded from the seed by SplitMix64).
pub fn make_rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Sample `shots` outcomes per Pauli axis with `P(+1) = (1 + r_i)/2`.
pub fn sample_tomography(rho: &DensityMatrix2, shots: u64, seed: u64) -> Result<TomographyEstimate> {
    if shots == 0 {
        return Err(Error::Domain("tomography needs at least one shot".into()));
    }
    let r = bloch_from_rho(rho)?;
    let mut rng = make_rng(seed);
    let mut est = [0.0; 3];
    let mut err = [0.0; 3];
    for (i, ri) in [r.rx, r.ry, r.rz].into_iter().enumerate() {
        let p = (0.5 * (1.0 + ri)).clamp(0.0, 1.0);
        let ups = (0..shots).filter(|_| rng.random::<f64>() < p).count() as f64;
        let p_hat = ups / shots as f64;
        est[i] = 2.0 * p_hat - 1.0;
        err[i] = 2.0 * (p_hat * (1.0 - p_hat) / shots as f64).sqrt();
    }
    Ok(TomographyEstimate { r: est, std_err: err, shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball() -> impl Strategy<Value = BlochVector> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y, z, s)| {
            let n = (x * x + y * y + z * z).sqrt().max(1e-12);
            let len = s.cbrt();
            BlochVector { rx: x / n * len, ry: y / n * len, rz: z / n * len }
        })
    }

    #[test]
    fn named_states() {
        let mixed = DensityMatrix2::maximally_mixed();
        assert_eq!(bloch_from_rho(&mixed).unwrap(), BlochVector { rx: 0.0, ry: 0.0, rz: 0.0 });
        assert_eq!(purity(&mixed), 0.5);
        let plus_x = rho_from_bloch(BlochVector::new(1.0, 0.0, 0.0).unwrap());
        assert_eq!(plus_x.bloch(), BlochVector { rx: 1.0, ry: 0.0, rz: 0.0 });
        assert!((plus_x.purity() - 1.0).abs() < 1e-15);
        assert_eq!(DensityMatrix2::excited().bloch().rz, 1.0);
        assert_eq!(DensityMatrix2::ground().bloch().rz, -1.0);
        // +y: (|e⟩ + i|g⟩)/√2 → ρ₀₁ = −i/2
        let plus_y = rho_from_bloch(BlochVector { rx: 0.0, ry: 1.0, rz: 0.0 });
        assert_eq!(plus_y.rho01, C64::new(0.0, -0.5));
    }

    #[test]
    fn validation_catches_bad_states() {
        let z = C64::new(0.0, 0.0);
        assert!(DensityMatrix2::new(C64::new(0.6, 0.0), z, z, C64::new(0.6, 0.0)).is_err());
        assert!(DensityMatrix2::new(C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0)).is_err());
        assert!(DensityMatrix2::new(C64::new(1.2, 0.0), z, z, C64::new(-0.2, 0.0)).is_err());
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn projection_fixes_small_violations() {
        let rho = DensityMatrix2 {
            rho00: C64::new(1.0 + 1e-9, 0.0),
            rho01: C64::new(1e-6, 0.0),
            rho10: C64::new(1e-6, 1e-11),
            rho11: C64::new(-1e-9, 0.0),
        };
        let p = rho.project_physical();
        assert!(p.validate().is_ok());
        assert!(p.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn pure_z_tomography_is_exact() {
        let est = sample_tomography(&DensityMatrix2::excited(), 17, 3).unwrap();
        assert_eq!(est.r[2], 1.0);
        assert_eq!(est.std_err[2], 0.0);
        let est = sample_tomography(&DensityMatrix2::ground(), 5, 3).unwrap();
        assert_eq!(est.r[2], -1.0);
        assert!(sample_tomography(&DensityMatrix2::ground(), 0, 3).is_err());
    }

    #[test]
    fn tomography_is_seed_deterministic() {
        let rho = rho_from_bloch(BlochVector { rx: 0.3, ry: -0.2, rz: 0.5 });
        let a = sample_tomography(&rho, 1000, 42).unwrap();
        let b = sample_tomography(&rho, 1000, 42).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = sample_tomography(&rho, 1000, 43).unwrap();
        assert_ne!(a.r, c.r);
    }

    #[test]
    fn tomography_error_scales_as_inverse_sqrt_shots() {
        let rho = rho_from_bloch(BlochVector { rx: 0.4, ry: 0.1, rz: -0.3 });
        let truth = rho.bloch();
        let rms = |shots: u64| -> f64 {
            let mut acc = 0.0;
            let reps = 40;
            for seed in 0..reps {
                let e = sample_tomography(&rho, shots, 1000 + seed).unwrap();
                acc += (e.r[0] - truth.rx).powi(2) + (e.r[1] - truth.ry).powi(2) + (e.r[2] - truth.rz).powi(2);
            }
            (acc / reps as f64).sqrt()
        };
        let ratio = rms(1_000) / rms(100_000);
        assert!(ratio > 10.0 / 3.0 && ratio < 30.0, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn bloch_round_trip(r in ball()) {
            let rho = rho_from_bloch(r);
            let back = bloch_from_rho(&rho).unwrap();
            prop_assert!((back.rx - r.rx).abs() < 1e-14);
            prop_assert!((back.ry - r.ry).abs() < 1e-14);
            prop_assert!((back.rz - r.rz).abs() < 1e-14);
        }

        #[test]
        fn purity_matches_bloch_length(r in ball()) {
            let rho = rho_from_bloch(r);
            let p = rho.purity();
            prop_assert!((p - 0.5 * (1.0 + r.norm_sqr())).abs() < 1e-15);
            prop_assert!(p >= 0.5 - 1e-15 && p <= 1.0 + 1e-12);
            prop_assert!(rho.min_eigenvalue() >= -1e-12);
        }
    }
}
