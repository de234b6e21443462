use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{DressedBasis, DressedRates, DriveSpec};
use crate::error::{Error, Result};
use crate::stateops::DensityMatrix2;

/// Structure of the dressed dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Dissipator {
    /// One jump operator `√Γ₋|+⟩⟨−| − √Γ₊|−⟩⟨+| + √Γ_φ σ_z^d`. Keeps the
    /// cross terms between channels, so a flat spectrum reproduces `√γ σ₋`
    /// at any `Ω, Δ`.
    #[default]
    Full,
    /// Three independent channels; valid when `Ω_R` dominates the rates.
    Secular,
}

impl Dissipator {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Self::Full),
            "secular" => Some(Self::Secular),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Secular => "secular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MasterOptions {
    pub dissipator: Dissipator,
    /// Additional lab-frame dephasing; transverse coherences decay at this
    /// rate (rad/s) on top of radiative damping.
    pub extra_dephasing: f64,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Rotating-frame Lindblad generator for one drive configuration.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    pub hamiltonian: Matrix2<C64>,
    pub jumps: Vec<Matrix2<C64>>,
    total_rate: f64,
    rabi_scale: f64,
}

impl MasterEquation {
    pub fn new(drive: &DriveSpec, rates: &DressedRates, opts: &MasterOptions) -> Result<Self> {
        if !(opts.extra_dephasing >= 0.0) {
            return Err(Error::Validation(format!("extra dephasing must be >= 0, got {}", opts.extra_dephasing)));
        }
        let (d, o) = (drive.detuning, drive.rabi);
        let hamiltonian = Matrix2::new(c(-d / 2.0), c(o / 2.0), c(o / 2.0), c(d / 2.0));
        let b = DressedBasis::new(rates.mixing_theta);
        let (sm, sp, sf) = (rates.rate_minus.sqrt(), rates.rate_plus.sqrt(), rates.rate_phi.sqrt());
        let mut jumps = match opts.dissipator {
            Dissipator::Full => vec![b.raise() * c(sm) - b.lower() * c(sp) + b.sigma_z() * c(sf)],
            Dissipator::Secular => vec![b.raise() * c(sm), b.lower() * c(sp), b.sigma_z() * c(sf)],
        };
        if opts.extra_dephasing > 0.0 {
            let a = (opts.extra_dephasing / 2.0).sqrt();
            jumps.push(Matrix2::new(c(a), c(0.0), c(0.0), c(-a)));
        }
        Ok(Self {
            hamiltonian,
            jumps,
            total_rate: rates.total() + opts.extra_dephasing,
            rabi_scale: drive.generalized_rabi(),
        })
    }

    pub fn rhs(&self, rho: &Matrix2<C64>) -> Matrix2<C64> {
        let i = C64::new(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut out = -(h * rho - rho * h) * i;
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = ld * l;
            out += l * rho * ld - (ldl * rho + rho * ldl) * c(0.5);
        }
        out
    }

    /// Superoperator acting on the row-major vectorisation
    /// `[ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁]`.
    pub fn liouvillian(&self) -> Matrix4<C64> {
        let id = Matrix2::<C64>::identity();
        let i = C64::new(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut m = (kron(h, &id) - kron(&id, &h.transpose())) * (-i);
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            m += kron(l, &l.map(|z| z.conj())) - kron(&ldl, &id) * c(0.5) - kron(&id, &ldl.transpose()) * c(0.5);
        }
        m
    }

    /// Largest frequency scale, `max(Ω_R, Σ rates)`.
    pub fn stiffness(&self) -> f64 {
        self.rabi_scale.max(self.total_rate)
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

fn vec_rho(rho: &Matrix2<C64>) -> Vector4<C64> {
    Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)])
}

/// Step suggested for RK4: `0.005 / max(Ω_R, Σ rates)`.
pub fn default_dt(drive: &DriveSpec, rates: &DressedRates, opts: &MasterOptions) -> f64 {
    let s = drive.generalized_rabi().max(rates.total() + opts.extra_dephasing);
    if s > 0.0 {
        0.005 / s
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    /// Step actually used (duration divided into equal steps).
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix2 {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// RK4 evolution recording every step.
pub fn lindblad_evolve(
    rho0: &DensityMatrix2,
    drive: &DriveSpec,
    rates: &DressedRates,
    dt: f64,
    opts: &MasterOptions,
) -> Result<Trajectory> {
    integrate(rho0, drive, rates, dt, None, opts)
}

/// RK4 evolution recorded at `n_samples` equally spaced times including both
/// endpoints. The step count is rounded up to a multiple of `n_samples − 1`.
pub fn evolve_sampled(
    rho0: &DensityMatrix2,
    drive: &DriveSpec,
    rates: &DressedRates,
    dt: f64,
    n_samples: usize,
    opts: &MasterOptions,
) -> Result<Trajectory> {
    if n_samples < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {n_samples}")));
    }
    integrate(rho0, drive, rates, dt, Some(n_samples - 1), opts)
}

fn integrate(
    rho0: &DensityMatrix2,
    drive: &DriveSpec,
    rates: &DressedRates,
    dt: f64,
    intervals: Option<usize>,
    opts: &MasterOptions,
) -> Result<Trajectory> {
    rho0.validate()?;
    let me = MasterEquation::new(drive, rates, opts)?;
    let s = me.stiffness();
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {dt:e}")));
    }
    if s > 0.0 && dt > 0.01 / s {
        return Err(Error::Config(format!(
            "dt = {dt:e} s exceeds the stability bound 0.01/max(Omega_R, total rate) = {:e} s",
            0.01 / s
        )));
    }
    let mut steps = (drive.duration / dt).ceil().max(1.0) as usize;
    let stride = match intervals {
        Some(k) => {
            steps = steps.div_ceil(k) * k;
            steps / k
        }
        None => 1,
    };
    let h = drive.duration / steps as f64;
    let mut rho = rho0.to_matrix();
    let mut times = vec![0.0];
    let mut states = vec![*rho0];
    let half = c(h / 2.0);
    let sixth = c(h / 6.0);
    for n in 1..=steps {
        let k1 = me.rhs(&rho);
        let k2 = me.rhs(&(rho + k1 * half));
        let k3 = me.rhs(&(rho + k2 * half));
        let k4 = me.rhs(&(rho + k3 * c(h)));
        rho += (k1 + (k2 + k3) * c(2.0) + k4) * sixth;
        if n % stride == 0 {
            times.push(n as f64 * h);
            states.push(DensityMatrix2::from_matrix(&rho));
        }
    }
    Ok(Trajectory { times, states, dt: h })
}

/// Null vector of the Liouvillian, normalised to unit trace.
pub fn steady_state(drive: &DriveSpec, rates: &DressedRates, opts: &MasterOptions) -> Result<DensityMatrix2> {
    let me = MasterEquation::new(drive, rates, opts)?;
    if !(me.total_rate() > 0.0) {
        return Err(Error::Degenerate("all dissipation rates vanish; the steady state is not unique".into()));
    }
    let l = me.liouvillian();
    let scale = l.norm();
    let ln = l.unscale(scale);
    let svd = ln.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let (s0, s1) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    if s1 < 1e-9 {
        return Err(Error::Degenerate(format!(
            "Liouvillian has a degenerate null space (singular values {s0:e}, {s1:e})"
        )));
    }
    let row = v_t.row(order[0]);
    let v = Vector4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj());
    let tr = v[0] + v[3];
    if tr.norm() < 1e-12 {
        return Err(Error::Degenerate("null vector is traceless".into()));
    }
    let v = v / tr;
    let m = Matrix2::new(v[0], v[1], v[2], v[3]);
    let m = (m + m.adjoint()) * c(0.5);
    let rho = DensityMatrix2::from_matrix(&m).project_physical();
    let resid = (ln * vec_rho(&rho.to_matrix())).norm();
    if resid > 1e-9 {
        return Err(Error::Degenerate(format!("steady-state residual {resid:e} exceeds 1e-9 of the generator norm")));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driven::steady_pe_resonant;
    use crate::units::{ghz, mhz};
    use nalgebra::{Matrix3, Vector3};
    use proptest::prelude::*;

    fn flat_rates(drive: &DriveSpec, gamma: f64) -> DressedRates {
        DressedRates::from_spectrum(drive, |_, _| Ok(gamma)).unwrap()
    }

    fn bloch_oracle(rabi: f64, delta: f64, gamma: f64) -> [f64; 3] {
        // ṙ = w × r − diag(γ/2, γ/2, γ) r − (0, 0, γ), with w = (Ω, 0, −Δ)
        let (wx, wy, wz) = (rabi, 0.0, -delta);
        let m = Matrix3::new(-gamma / 2.0, -wz, wy, wz, -gamma / 2.0, -wx, -wy, wx, -gamma);
        let r = m.lu().solve(&Vector3::new(0.0, 0.0, gamma)).unwrap();
        [r[0], r[1], r[2]]
    }

    #[test]
    fn pi_pulse_inverts() {
        let o = mhz(1.0);
        let d = DriveSpec::new(o, 0.0, std::f64::consts::PI / o, ghz(4.9)).unwrap();
        let r = DressedRates { rate_minus: 0.0, rate_plus: 0.0, rate_phi: 0.0, mixing_theta: d.mixing_angle() };
        let tr = lindblad_evolve(&DensityMatrix2::ground(), &d, &r, 1e-3 / o, &MasterOptions::default()).unwrap();
        assert!((tr.last().excited_population() - 1.0).abs() < 1e-8);
        assert!(matches!(steady_state(&d, &r, &MasterOptions::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn full_dissipator_is_sigma_minus_for_flat_bath() {
        let g = mhz(1.0);
        for (o, dl) in [(0.5, 0.0), (2.0, -3.0), (7.0, 1.5)] {
            let d = DriveSpec::new(mhz(o), mhz(dl), 1e-6, ghz(4.9)).unwrap();
            let me = MasterEquation::new(&d, &flat_rates(&d, g), &MasterOptions::default()).unwrap();
            let sm = Matrix2::new(c(0.0), c(0.0), c(g.sqrt()), c(0.0));
            assert!((me.jumps[0] - sm).norm() < 1e-12 * g.sqrt());
        }
    }

    #[test]
    fn steady_state_matches_bloch_equations() {
        let g = mhz(1.0);
        for (o, dl) in [(0.2, 0.0), (1.0, 0.0), (3.0, -2.0), (0.7, 4.0), (10.0, 0.3)] {
            let d = DriveSpec::new(mhz(o), mhz(dl), 1e-6, ghz(4.9)).unwrap();
            let rho = steady_state(&d, &flat_rates(&d, g), &MasterOptions::default()).unwrap();
            let b = rho.bloch();
            let want = bloch_oracle(d.rabi, d.detuning, g);
            for (got, w) in [b.rx, b.ry, b.rz].iter().zip(want) {
                assert!((got - w).abs() < 1e-10, "Ω={o} Δ={dl}: {b:?} vs {want:?}");
            }
            if dl == 0.0 {
                assert!((rho.excited_population() - steady_pe_resonant(d.rabi, g).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn evolution_relaxes_to_steady_state() {
        let g = mhz(1.0);
        let d = DriveSpec::new(mhz(2.0), mhz(-1.0), 40.0 / g, ghz(4.9)).unwrap();
        let r = flat_rates(&d, g);
        let opts = MasterOptions::default();
        let tr = lindblad_evolve(&DensityMatrix2::ground(), &d, &r, default_dt(&d, &r, &opts), &opts).unwrap();
        let ss = steady_state(&d, &r, &opts).unwrap();
        let end = tr.last();
        assert!((end.excited_population() - ss.excited_population()).abs() < 1e-8);
        assert!((end.rho01 - ss.rho01).norm() < 1e-8);
    }

    #[test]
    fn secular_limit_population_imbalance() {
        let d = DriveSpec::new(mhz(20.0), 0.0, 1e-6, ghz(4.9)).unwrap();
        let r = DressedRates { rate_minus: mhz(0.3), rate_plus: mhz(0.1), rate_phi: mhz(0.2), mixing_theta: d.mixing_angle() };
        let b = DressedBasis::new(r.mixing_theta);
        for dis in [Dissipator::Secular, Dissipator::Full] {
            let rho = steady_state(&d, &r, &MasterOptions { dissipator: dis, extra_dephasing: 0.0 }).unwrap();
            let (pp, pm) = b.populations(&rho.to_matrix());
            let want = r.population_imbalance().unwrap();
            let tol = if dis == Dissipator::Secular { 1e-10 } else { 1e-3 };
            assert!((pp - pm - want).abs() < tol, "{dis:?}: {} vs {want}", pp - pm);
        }
    }

    #[test]
    fn mirrored_slope_flips_imbalance() {
        let d = DriveSpec::new(mhz(4.0), 0.0, 1e-6, ghz(4.9)).unwrap();
        let wd = d.drive_omega();
        let (g0, slope) = (mhz(1.0), 0.08);
        let up = DressedRates::from_spectrum(&d, |_, w| Ok(g0 + slope * (w - wd))).unwrap();
        let down = DressedRates::from_spectrum(&d, |_, w| Ok(g0 - slope * (w - wd))).unwrap();
        assert!((up.rate_plus - down.rate_minus).abs() < 1e-14 * g0);
        assert!((up.rate_minus - down.rate_plus).abs() < 1e-14 * g0);
        let imb = up.population_imbalance().unwrap();
        assert!(imb.abs() > 0.1 && (imb + down.population_imbalance().unwrap()).abs() < 1e-14);
        let b = DressedBasis::new(up.mixing_theta);
        for dis in [Dissipator::Secular, Dissipator::Full] {
            let opts = MasterOptions { dissipator: dis, extra_dephasing: 0.0 };
            let no_phi = |r: DressedRates| DressedRates { rate_phi: 0.0, ..r };
            let a = steady_state(&d, &no_phi(up), &opts).unwrap();
            let z = steady_state(&d, &no_phi(down), &opts).unwrap();
            let (ap, am) = b.populations(&a.to_matrix());
            let (zp, zm) = b.populations(&z.to_matrix());
            assert!((ap - am + (zp - zm)).abs() < 1e-12, "{dis:?}");
            assert!(a.bloch().rx.abs() > 1e-3);
            assert!((a.bloch().rx + z.bloch().rx).abs() < 1e-12, "{dis:?}");
        }
    }

    #[test]
    fn extra_dephasing_broadens() {
        let g = mhz(1.0);
        let d = DriveSpec::new(mhz(0.5), 0.0, 1e-6, ghz(4.9)).unwrap();
        let r = flat_rates(&d, g);
        let a = steady_state(&d, &r, &MasterOptions::default()).unwrap();
        let gd = mhz(0.5);
        let b = steady_state(&d, &r, &MasterOptions { extra_dephasing: gd, ..Default::default() }).unwrap();
        // resonant Bloch solution with T₂ rate Γ₂ = γ/2 + γ_d:  Ω² / 2(Ω² + γΓ₂)
        let o2 = d.rabi * d.rabi;
        let want = 0.5 * o2 / (o2 + g * (g / 2.0 + gd));
        assert!((b.excited_population() - want).abs() < 1e-10);
        assert!(b.excited_population() < a.excited_population());
        assert!(MasterEquation::new(&d, &r, &MasterOptions { extra_dephasing: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn rejects_coarse_step() {
        let d = DriveSpec::new(mhz(5.0), 0.0, 1e-6, ghz(4.9)).unwrap();
        let r = flat_rates(&d, mhz(1.0));
        let err = lindblad_evolve(&DensityMatrix2::ground(), &d, &r, 1e-6, &MasterOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("stability bound"));
    }

    #[test]
    fn sampled_grid_is_uniform() {
        let d = DriveSpec::new(mhz(1.0), 0.0, 3.8e-6, ghz(4.9)).unwrap();
        let r = flat_rates(&d, mhz(1.0));
        let opts = MasterOptions::default();
        let tr = evolve_sampled(&DensityMatrix2::ground(), &d, &r, default_dt(&d, &r, &opts), 256, &opts).unwrap();
        assert_eq!(tr.times.len(), 256);
        assert!((tr.times[255] - 3.8e-6).abs() < 1e-18);
        let step = tr.times[1];
        for w in tr.times.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-18);
        }
    }

    #[test]
    fn liouvillian_agrees_with_rhs() {
        let d = DriveSpec::new(mhz(1.3), mhz(0.4), 1e-6, ghz(4.9)).unwrap();
        let r = DressedRates { rate_minus: 0.7, rate_plus: 0.2, rate_phi: 0.5, mixing_theta: d.mixing_angle() };
        let me = MasterEquation::new(&d, &r, &MasterOptions { dissipator: Dissipator::Secular, extra_dephasing: 0.1 }).unwrap();
        let rho = Matrix2::new(c(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.7));
        let a = vec_rho(&me.rhs(&rho));
        let b = me.liouvillian() * vec_rho(&rho);
        assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn evolution_preserves_trace_and_positivity(
            o in 0.0f64..5.0, dl in -5.0f64..5.0,
            gm in 0.0f64..1.0, gp in 0.0f64..1.0, gf in 0.0f64..1.0,
            secular in any::<bool>(),
        ) {
            let d = DriveSpec::new(mhz(o), mhz(dl), 2e-6, ghz(4.9)).unwrap();
            let r = DressedRates { rate_minus: mhz(gm), rate_plus: mhz(gp), rate_phi: mhz(gf), mixing_theta: d.mixing_angle() };
            let opts = MasterOptions { dissipator: if secular { Dissipator::Secular } else { Dissipator::Full }, extra_dephasing: 0.0 };
            let dt = default_dt(&d, &r, &opts).min(1e-8);
            let tr = evolve_sampled(&DensityMatrix2::ground(), &d, &r, dt, 32, &opts).unwrap();
            for s in &tr.states {
                prop_assert!((s.trace().re - 1.0).abs() < 1e-10);
                prop_assert!(s.trace().im.abs() < 1e-12);
                prop_assert!(s.min_eigenvalue() > -1e-9);
                prop_assert!((s.rho01 - s.rho10.conj()).norm() < 1e-12);
            }
        }
    }
}
