//! Brute-force check of the delay equation: one qubit coupled at `x = 0`
//! and `x = L` to a discretized band of right- and left-moving waveguide
//! modes, integrated in the single-excitation sector.
//!
//! Modes sit at detunings `δ_k` from `ω_q`, uniformly spaced by
//! `δω = bandwidth / n_modes`, with propagation phase `ω_k·T = ω_qT + δ_kT`
//! between the two coupling points. For `β < 1` the two coupling points
//! get weights `1` and `v`, with `2v/(1 + v²) = β`; this reproduces exactly the
//! self-decay `κ` and backflow `κβ` of the delay equation.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{RateConvention, RelaxationParams, RelaxationTrace, SolverTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOracleConfig {
    pub n_modes: usize,
    /// Total width of the discretized band (rad/s).
    pub bandwidth: f64,
    pub dt: f64,
}

impl ModeOracleConfig {
    /// Band of `n_modes` modes wide enough that the finite-band error stays
    /// near `1e-3` for `γT ≤ 0.5`, with the recurrence time at twice `t_max`.
    pub fn for_horizon(n_modes: usize, t_max: f64) -> Self {
        let bandwidth = TAU * n_modes as f64 / (2.0 * t_max);
        Self { n_modes, bandwidth, dt: 1.0 / bandwidth }
    }

    pub fn recurrence_time(&self) -> f64 {
        TAU * self.n_modes as f64 / self.bandwidth
    }
}

/// Second coupling-point weight giving backflow ratio `β`.
fn second_weight(beta: f64) -> f64 {
    if beta == 0.0 {
        0.0
    } else {
        (1.0 - (1.0 - beta * beta).sqrt()) / beta
    }
}

pub fn mode_oracle(
    p: &RelaxationParams,
    cfg: &ModeOracleConfig,
    t_max: f64,
    conv: RateConvention,
) -> Result<RelaxationTrace> {
    let ModeOracleConfig { n_modes, bandwidth, dt } = *cfg;
    if n_modes < 100 {
        return Err(Error::Config(format!("mode oracle needs n_modes >= 100, got {n_modes}")));
    }
    let needed = 20.0 * (p.gamma_in + p.gamma);
    if !(bandwidth >= needed) || !(bandwidth > 0.0) {
        return Err(Error::Config(format!(
            "bandwidth {bandwidth:.4e} rad/s is below 20*(gamma_in + gamma) = {needed:.4e} rad/s"
        )));
    }
    if !(t_max >= 0.0) {
        return Err(Error::Domain(format!("t_max must be >= 0, got {t_max}")));
    }
    if cfg.recurrence_time() < t_max {
        return Err(Error::Config(format!(
            "recurrence time 2*pi*n_modes/bandwidth = {:.4e} s is shorter than t_max = {t_max:.4e} s; \
             increase n_modes or reduce bandwidth",
            cfg.recurrence_time()
        )));
    }
    if !(dt > 0.0) || dt * bandwidth / 2.0 > 1.0 {
        return Err(Error::Config(format!(
            "dt = {dt:.4e} s must satisfy 0 < dt <= 2/bandwidth = {:.4e} s",
            2.0 / bandwidth
        )));
    }

    let (k, kin) = p.amplitude_rates(conv);
    let dw = bandwidth / n_modes as f64;
    let v = second_weight(p.beta);
    let g = (k * dw / (TAU * (1.0 + v * v))).sqrt();
    let phase = p.phase();
    let centre = (n_modes as f64 - 1.0) / 2.0;

    // right movers then left movers
    let mut det = Vec::with_capacity(2 * n_modes);
    let mut cpl = Vec::with_capacity(2 * n_modes);
    for sign in [-1.0, 1.0] {
        for i in 0..n_modes {
            let d = (i as f64 - centre) * dw;
            det.push(d);
            cpl.push(C64::new(g, 0.0) * (C64::new(1.0, 0.0) + C64::from_polar(v, sign * (phase + d * p.delay))));
        }
    }
    let cpl_conj: Vec<C64> = cpl.iter().map(|z| z.conj()).collect();

    let n_steps = ((t_max / dt) * (1.0 - 1e-12)).ceil() as usize;
    let h = if n_steps == 0 { 0.0 } else { t_max / n_steps as f64 };
    let i_unit = C64::new(0.0, 1.0);

    let dim = 2 * n_modes;
    let mut a = C64::new(1.0, 0.0);
    let mut c = vec![C64::new(0.0, 0.0); dim];
    let mut cs = vec![C64::new(0.0, 0.0); dim];
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    let mut sum = C64::new(0.0, 0.0);

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut pe = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    pe.push(1.0);

    let qubit_rhs = |a: C64, s: C64| -kin * a - i_unit * s;

    for step in 0..n_steps {
        // stage 1
        let da1 = qubit_rhs(a, sum);
        let mut s2 = C64::new(0.0, 0.0);
        for j in 0..dim {
            let dc = -i_unit * (c[j] * det[j] + cpl[j] * a);
            acc[j] = c[j] + dc * (h / 6.0);
            cs[j] = c[j] + dc * (h / 2.0);
            s2 += cpl_conj[j] * cs[j];
        }
        // stage 2
        let a2 = a + da1 * (h / 2.0);
        let da2 = qubit_rhs(a2, s2);
        let mut s3 = C64::new(0.0, 0.0);
        for j in 0..dim {
            let dc = -i_unit * (cs[j] * det[j] + cpl[j] * a2);
            acc[j] += dc * (h / 3.0);
            cs[j] = c[j] + dc * (h / 2.0);
            s3 += cpl_conj[j] * cs[j];
        }
        // stage 3
        let a3 = a + da2 * (h / 2.0);
        let da3 = qubit_rhs(a3, s3);
        let mut s4 = C64::new(0.0, 0.0);
        for j in 0..dim {
            let dc = -i_unit * (cs[j] * det[j] + cpl[j] * a3);
            acc[j] += dc * (h / 3.0);
            cs[j] = c[j] + dc * h;
            s4 += cpl_conj[j] * cs[j];
        }
        // stage 4
        let a4 = a + da3 * h;
        let da4 = qubit_rhs(a4, s4);
        let mut next_sum = C64::new(0.0, 0.0);
        for j in 0..dim {
            let dc = -i_unit * (cs[j] * det[j] + cpl[j] * a4);
            c[j] = acc[j] + dc * (h / 6.0);
            next_sum += cpl_conj[j] * c[j];
        }
        a += (da1 + da2 * 2.0 + da3 * 2.0 + da4) * (h / 6.0);
        sum = next_sum;
        times.push((step + 1) as f64 * h);
        pe.push(a.norm_sqr());
    }

    Ok(RelaxationTrace { times, pe, solver: SolverTag::ModeOracle, delay: p.delay })
}
