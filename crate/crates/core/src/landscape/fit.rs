//! Damped Gauss–Newton (Levenberg–Marquardt) fit of the landscape model to
//! measured `(ω, γ_e)` samples, with the analytic Jacobian.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::CouplingLandscape;
use crate::error::{Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParam {
    GammaPeak,
    Beta,
    Delay,
    C0,
    Slope,
}

impl FitParam {
    pub const ALL: [FitParam; 5] =
        [FitParam::GammaPeak, FitParam::Beta, FitParam::Delay, FitParam::C0, FitParam::Slope];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FitParam::GammaPeak => "gamma_peak_mhz",
            FitParam::Beta => "beta",
            FitParam::Delay => "delay_t_ns",
            FitParam::C0 => "gamma_in_c0_mhz",
            FitParam::Slope => "gamma_in_slope",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub free: Vec<FitParam>,
    pub max_iter: usize,
    pub step_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { free: FitParam::ALL.to_vec(), max_iter: 500, step_tol: 1e-10 }
    }
}

/// One frequency split into intrinsic, single-transducer and interference
/// parts. `gamma_eff = gamma_in + gamma_idt + interference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateContribution {
    pub omega: f64,
    pub gamma_in: f64,
    pub gamma_idt: f64,
    pub interference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub landscape: CouplingLandscape,
    /// Fitted values in config units, keyed like the landscape section.
    pub params: BTreeMap<String, f64>,
    pub free: Vec<FitParam>,
    /// `‖model − data‖₂` in rad/s.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the data carry no interference (β → 0) so `T` is not
    /// constrained; the reported delay is then just the last iterate.
    pub delay_identifiable: bool,
    pub lowest_sample: RateContribution,
    pub highest_sample: RateContribution,
}

const N: usize = 5;

fn pack(l: &CouplingLandscape) -> [f64; N] {
    [l.idt.gamma_peak, l.beta, l.delay, l.loss.c0, l.loss.c1]
}

fn unpack(base: &CouplingLandscape, p: &[f64; N]) -> CouplingLandscape {
    let mut l = *base;
    l.idt.gamma_peak = p[0];
    l.beta = p[1];
    l.delay = p[2];
    l.loss.c0 = p[3];
    l.loss.c1 = p[4];
    l
}

/// Model value and full 5-column gradient at one frequency.
fn model_and_grad(l: &CouplingLandscape, omega: f64) -> (f64, [f64; N]) {
    let shape = l.idt.shape(omega);
    let phase = super::phase_mod(omega, l.delay);
    let (s, c) = phase.sin_cos();
    let g = l.idt.gamma_peak * shape;
    let value = l.loss.c0 + l.loss.c1 * omega + g * (1.0 + l.beta * c);
    let grad = [shape * (1.0 + l.beta * c), g * c, -g * l.beta * omega * s, 1.0, omega];
    (value, grad)
}

pub fn fit_landscape(
    samples: &[(f64, f64)],
    init: &CouplingLandscape,
    opts: &FitOptions,
) -> Result<FitReport> {
    if samples.len() < 6 {
        return Err(Error::InsufficientData(format!("need >= 6 samples, got {}", samples.len())));
    }
    let mut free = opts.free.clone();
    free.sort();
    free.dedup();
    if free.is_empty() {
        return Err(Error::Config("no free fit parameters".into()));
    }
    if samples.len() < free.len() {
        return Err(Error::InsufficientData("fewer samples than free parameters".into()));
    }
    for &(w, y) in samples {
        init.check_band("sample omega", w)?;
        if !y.is_finite() {
            return Err(Error::Domain(format!("non-finite gamma_e sample at omega = {w:.6e}")));
        }
    }
    let w_lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let w_hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if w_hi - w_lo < init.modulation_period() {
        return Err(Error::InsufficientData(format!(
            "samples span {:.4} MHz, less than one modulation period {:.4} MHz",
            units::to_mhz(w_hi - w_lo),
            units::to_mhz(init.modulation_period())
        )));
    }

    let y_max = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let p0 = pack(init);
    let scale = [
        p0[0].abs().max(y_max),
        1.0,
        p0[2],
        p0[3].abs().max(y_max),
        p0[4].abs().max(y_max / w_hi),
    ];

    let cost = |l: &CouplingLandscape| -> f64 {
        samples.iter().map(|&(w, y)| (model_and_grad(l, w).0 - y).powi(2)).sum::<f64>()
    };

    let m = free.len();
    let mut p = p0;
    let mut lambda = 1e-3;
    let mut current = cost(init);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let l = unpack(init, &p);
        let mut jac = DMatrix::<f64>::zeros(samples.len(), m);
        let mut res = DVector::<f64>::zeros(samples.len());
        for (i, &(w, y)) in samples.iter().enumerate() {
            let (v, g) = model_and_grad(&l, w);
            res[i] = v - y;
            for (j, fp) in free.iter().enumerate() {
                jac[(i, j)] = g[fp.index()] * scale[fp.index()];
            }
        }
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &res;
        let max_diag = (0..m).map(|j| jtj[(j, j)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..m {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12 * max_diag);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p;
            for (j, fp) in free.iter().enumerate() {
                trial[fp.index()] += step[j] * scale[fp.index()];
            }
            trial[1] = trial[1].clamp(0.0, 1.0);
            let u_norm: f64 = free.iter().map(|fp| (p[fp.index()] / scale[fp.index()]).powi(2)).sum::<f64>().sqrt();
            let s_norm = step.norm();
            small_step = s_norm <= opts.step_tol * (u_norm + opts.step_tol);
            let trial_cost = cost(&unpack(init, &trial));
            if trial_cost < current {
                p = trial;
                current = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            if small_step {
                break;
            }
            lambda *= 4.0;
        }
        if small_step || (!accepted && lambda >= 1e16) {
            converged = small_step || current == 0.0;
            break;
        }
    }

    let landscape = unpack(init, &p);
    let delay_col: f64 = samples
        .iter()
        .map(|&(w, _)| (model_and_grad(&landscape, w).1[2] * scale[2]).powi(2))
        .sum::<f64>()
        .sqrt();
    let peak_col: f64 = samples
        .iter()
        .map(|&(w, _)| (model_and_grad(&landscape, w).1[0] * scale[0]).powi(2))
        .sum::<f64>()
        .sqrt();
    let delay_identifiable =
        landscape.beta > 1e-8 && delay_col > 1e-8 * peak_col.max(f64::MIN_POSITIVE);

    let cfg = landscape.to_config_values();
    let params = free.iter().map(|fp| (fp.name().to_string(), cfg[fp.name()])).collect();
    Ok(FitReport {
        landscape,
        params,
        free,
        residual_norm: current.sqrt(),
        iterations,
        converged,
        delay_identifiable,
        lowest_sample: landscape.contributions(w_lo)?,
        highest_sample: landscape.contributions(w_hi)?,
    })
}
