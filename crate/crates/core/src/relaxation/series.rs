use num_complex::Complex64 as C64;

use super::{check_times, RateConvention, RelaxationParams, RelaxationTrace, SolverTag};
use crate::error::{Error, Result};
use crate::landscape::phase_mod;

/// Rotating-frame amplitude `b(t) = a(t)·e^{iω_q t}` as a sum over backflow
/// orders. Terms are accumulated in log-magnitude form, so `n!` never
/// overflows for long times.
pub(crate) fn rotating_amplitude(p: &RelaxationParams, t: f64, conv: RateConvention) -> C64 {
    let (k, kin) = p.amplitude_rates(conv);
    let decay = k + kin;
    let kb = k * p.beta;
    let phase = p.phase();
    let n_max = (t / p.delay).floor() as usize;

    let mut sum = C64::new((-decay * t).exp(), 0.0);
    if kb == 0.0 {
        return sum;
    }
    let ln_kb = kb.ln();
    let mut ln_fact = 0.0;
    for n in 1..=n_max {
        ln_fact += (n as f64).ln();
        let s = t - n as f64 * p.delay;
        if s <= 0.0 {
            // (t − nT)ⁿ vanishes on the boundary
            break;
        }
        let nf = n as f64;
        let ln_mag = nf * (ln_kb + s.ln()) - ln_fact - decay * s;
        // (−1)ⁿ·e^{inφ}
        let arg = nf * (std::f64::consts::PI + phase);
        sum += C64::from_polar(ln_mag.exp(), arg);
    }
    sum
}

/// Lab-frame amplitude
/// `Σ_{n ≤ ⌊t/T⌋} (−κβ(t−nT))ⁿ/n! · exp(−i(ω_q − iκ − iκ_in)(t−nT))`.
pub fn amplitude_series(p: &RelaxationParams, t: f64, conv: RateConvention) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("amplitude_series needs t >= 0, got {t}")));
    }
    let carrier = phase_mod(p.omega_q, t);
    Ok(rotating_amplitude(p, t, conv) * C64::from_polar(1.0, -carrier))
}

pub fn pe_series(p: &RelaxationParams, times: &[f64], conv: RateConvention) -> Result<RelaxationTrace> {
    check_times(times)?;
    let pe = times.iter().map(|&t| rotating_amplitude(p, t, conv).norm_sqr()).collect();
    Ok(RelaxationTrace { times: times.to_vec(), pe, solver: SolverTag::Series, delay: p.delay })
}
